//! Exact Hölder IPM over a quantized family of piecewise-linear functions on
//! a one-dimensional chart interval (smoothness `s = 1`).
//!
//! A member is fixed by its values `g_k = v_k·δ` at `m + 1` equispaced knots
//! with integer `v_k`. With knot spacing `h` the constraints are
//!
//! * `|g_k| ≤ 1`
//! * `|g_{k+1} − g_k| ≤ h` (slope bound 1)
//! * `|slope_{k+1} − slope_k| ≤ h^β` (β-Hölder slopes between adjacent segments)
//!
//! The maximum of `Ê_X g − Ê_Y g` is found by dynamic programming over
//! states `(v_k, v_k − v_{k−1})`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transport::{ratio_to_f64, WeightedPointCloud};

pub const MAX_SEGMENTS: usize = 40;
pub const SEARCH_BUDGET: u128 = 100_000_000;
const MEMBERSHIP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridFunctionFamily {
    pub s: u32,
    pub beta: f64,
    pub lo: f64,
    pub hi: f64,
    /// Number of segments; there are `segments + 1` knots.
    pub segments: usize,
    pub quantum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleValue {
    pub value: f64,
    /// Knot values of a maximizer.
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Membership {
    pub member: bool,
    pub violations: Vec<String>,
}

impl GridFunctionFamily {
    /// Family on `[lo, hi]` with 32 segments and quantum 1/64.
    pub fn new(beta: f64, lo: f64, hi: f64) -> Result<Self> {
        Self::with_grid(1, beta, lo, hi, 32, 1.0 / 64.0)
    }

    pub fn with_grid(
        s: u32,
        beta: f64,
        lo: f64,
        hi: f64,
        segments: usize,
        quantum: f64,
    ) -> Result<Self> {
        let f = Self {
            s,
            beta,
            lo,
            hi,
            segments,
            quantum,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if self.s != 1 {
            return Err(Error::Scope(format!(
                "only s = 1 is supported, got s = {}",
                self.s
            )));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::Smoothness(format!(
                "β must lie in (0, 1], got {}",
                self.beta
            )));
        }
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::InvalidArgument(format!(
                "empty interval [{}, {}]",
                self.lo, self.hi
            )));
        }
        if self.segments == 0 {
            return Err(Error::InvalidArgument("need at least one segment".into()));
        }
        if !(self.quantum > 0.0 && self.quantum <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "quantum must lie in (0, 1], got {}",
                self.quantum
            )));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / self.segments as f64
    }

    /// Largest `|v_k|`.
    pub fn value_levels(&self) -> i64 {
        (1.0 / self.quantum + 1e-9).floor() as i64
    }

    /// Largest `|v_{k+1} − v_k|`.
    pub fn max_increment(&self) -> i64 {
        (self.spacing() / self.quantum + 1e-9).floor() as i64
    }

    /// Largest change of increment between adjacent segments.
    pub fn max_increment_change(&self) -> i64 {
        (self.spacing().powf(1.0 + self.beta) / self.quantum + 1e-9).floor() as i64
    }

    /// Work estimate `states × transitions × segments` of the dynamic program.
    pub fn search_size(&self) -> u128 {
        let states = (2 * self.value_levels() + 1) as u128 * (2 * self.max_increment() + 1) as u128;
        states * (2 * self.max_increment_change() + 1) as u128 * self.segments as u128
    }

    /// Piecewise-linear evaluation of knot values at `u`.
    pub fn evaluate(&self, coefficients: &[f64], u: f64) -> Result<f64> {
        let (k, frac) = self.locate(u)?;
        Ok(coefficients[k] * (1.0 - frac) + coefficients.get(k + 1).copied().unwrap_or(0.0) * frac)
    }

    fn locate(&self, u: f64) -> Result<(usize, f64)> {
        if !(u >= self.lo && u <= self.hi) {
            return Err(Error::Domain {
                value: u,
                lo: self.lo,
                hi: self.hi,
            });
        }
        let pos = (u - self.lo) / self.spacing();
        let k = (pos.floor() as usize).min(self.segments - 1);
        Ok((k, (pos - k as f64).clamp(0.0, 1.0)))
    }

    fn knot_weights(&self, xs: &[(f64, f64)], ys: &[(f64, f64)]) -> Result<Vec<f64>> {
        let mut c = vec![0.0; self.segments + 1];
        for (points, sign) in [(xs, 1.0), (ys, -1.0)] {
            for &(u, w) in points {
                let (k, frac) = self.locate(u)?;
                c[k] += sign * w * (1.0 - frac);
                c[k + 1] += sign * w * frac;
            }
        }
        Ok(c)
    }
}

/// Maximum of `Ê_X g − Ê_Y g` over the family, for clouds in R¹.
pub fn oracle_ipm(
    family: &GridFunctionFamily,
    x: &WeightedPointCloud,
    y: &WeightedPointCloud,
) -> Result<OracleValue> {
    if x.dim() != 1 || y.dim() != 1 {
        return Err(Error::Scope(format!(
            "the oracle handles one-dimensional charts, got dimensions {} and {}",
            x.dim(),
            y.dim()
        )));
    }
    let pairs = |c: &WeightedPointCloud| -> Vec<(f64, f64)> {
        c.points()
            .iter()
            .zip(c.weights())
            .map(|(p, w)| (p[0], ratio_to_f64(w)))
            .collect()
    };
    oracle_ipm_weighted(family, &pairs(x), &pairs(y))
}

/// [`oracle_ipm`] for uniformly weighted coordinate lists.
pub fn oracle_ipm_points(
    family: &GridFunctionFamily,
    xs: &[f64],
    ys: &[f64],
) -> Result<OracleValue> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let (wx, wy) = (1.0 / xs.len() as f64, 1.0 / ys.len() as f64);
    let px: Vec<(f64, f64)> = xs.iter().map(|&u| (u, wx)).collect();
    let py: Vec<(f64, f64)> = ys.iter().map(|&u| (u, wy)).collect();
    oracle_ipm_weighted(family, &px, &py)
}

fn oracle_ipm_weighted(
    family: &GridFunctionFamily,
    xs: &[(f64, f64)],
    ys: &[(f64, f64)],
) -> Result<OracleValue> {
    family.validate()?;
    if family.segments > MAX_SEGMENTS {
        return Err(Error::Budget {
            needed: family.segments as u128,
            budget: MAX_SEGMENTS as u128,
        });
    }
    let needed = family.search_size();
    if needed > SEARCH_BUDGET {
        return Err(Error::Budget {
            needed,
            budget: SEARCH_BUDGET,
        });
    }
    let c = family.knot_weights(xs, ys)?;
    let m = family.segments;
    let vmax = family.value_levels();
    let dmax = family.max_increment();
    let hmax = family.max_increment_change();
    let nv = (2 * vmax + 1) as usize;
    let nd = (2 * dmax + 1) as usize;
    let idx = |v: i64, d: i64| (v + vmax) as usize * nd + (d + dmax) as usize;

    // dp over (v_k, Δ_{k−1}) after knot k, starting at k = 1.
    let mut dp = vec![f64::NEG_INFINITY; nv * nd];
    for v1 in -vmax..=vmax {
        for d in -dmax..=dmax {
            let v0 = v1 - d;
            if v0.abs() <= vmax {
                dp[idx(v1, d)] = c[0] * v0 as f64 + c[1] * v1 as f64;
            }
        }
    }
    // back[k][state] = Δ_{k−2} chosen for the state at knot k (k ≥ 2).
    let mut back: Vec<Vec<i16>> = Vec::with_capacity(m.saturating_sub(1));
    let mut next = vec![f64::NEG_INFINITY; nv * nd];
    for ck in c.iter().skip(2) {
        next.fill(f64::NEG_INFINITY);
        let mut choice = vec![0i16; nv * nd];
        for v in -vmax..=vmax {
            for d in -dmax..=dmax {
                let prev_v = v - d;
                if prev_v.abs() > vmax {
                    continue;
                }
                let mut best = f64::NEG_INFINITY;
                let mut arg = 0i64;
                for pd in (d - hmax).max(-dmax)..=(d + hmax).min(dmax) {
                    let val = dp[idx(prev_v, pd)];
                    if val > best {
                        best = val;
                        arg = pd;
                    }
                }
                if best > f64::NEG_INFINITY {
                    let s = idx(v, d);
                    next[s] = best + ck * v as f64;
                    choice[s] = arg as i16;
                }
            }
        }
        back.push(choice);
        std::mem::swap(&mut dp, &mut next);
    }

    let mut best = f64::NEG_INFINITY;
    let mut state = (0i64, 0i64);
    for v in -vmax..=vmax {
        for d in -dmax..=dmax {
            if dp[idx(v, d)] > best {
                best = dp[idx(v, d)];
                state = (v, d);
            }
        }
    }
    let mut levels = vec![0i64; m + 1];
    let (mut v, mut d) = state;
    levels[m] = v;
    for k in (2..=m).rev() {
        let pd = back[k - 2][idx(v, d)] as i64;
        v -= d;
        d = pd;
        levels[k - 1] = v;
    }
    levels[0] = v - d;

    let coefficients: Vec<f64> = levels.iter().map(|&l| l as f64 * family.quantum).collect();
    // Recompute from the maximizer so the value is exactly its objective.
    let value: f64 = c.iter().zip(&coefficients).map(|(a, b)| a * b).sum();
    Ok(OracleValue {
        value: value.max(0.0),
        coefficients,
    })
}

/// Checks the family constraints on knot values, with `≤` at equality.
pub fn verify_holder_membership(family: &GridFunctionFamily, coefficients: &[f64]) -> Membership {
    let mut violations = Vec::new();
    if coefficients.len() != family.segments + 1 {
        violations.push(format!(
            "expected {} knot values, got {}",
            family.segments + 1,
            coefficients.len()
        ));
        return Membership {
            member: false,
            violations,
        };
    }
    let h = family.spacing();
    let slack = |bound: f64| bound + MEMBERSHIP_TOL * bound.max(1.0);
    for (k, g) in coefficients.iter().enumerate() {
        if !(g.abs() <= slack(1.0)) {
            violations.push(format!("|g({k})| = {} exceeds 1", g.abs()));
        }
    }
    let slopes: Vec<f64> = coefficients.windows(2).map(|w| (w[1] - w[0]) / h).collect();
    for (k, s) in slopes.iter().enumerate() {
        if !(s.abs() <= slack(1.0)) {
            violations.push(format!("slope on segment {k} is {s}, exceeds 1"));
        }
    }
    let bound = h.powf(family.beta);
    for (k, w) in slopes.windows(2).enumerate() {
        let jump = (w[1] - w[0]).abs();
        if !(jump <= slack(bound)) {
            violations.push(format!(
                "slope change {jump} at knot {} exceeds h^β = {bound}",
                k + 1
            ));
        }
    }
    Membership {
        member: violations.is_empty(),
        violations,
    }
}
