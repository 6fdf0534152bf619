use rand::Rng;
use serde::{Deserialize, Serialize};

use super::arch::CriticArchitecture;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Weights and biases stored flat as `W_1, b_1, W_2, b_2, …` with each
/// matrix row-major. `mask[i]` is true iff `values[i] != 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticParams {
    shapes: Vec<(usize, usize)>,
    mask: Vec<bool>,
    values: Vec<f64>,
}

impl CriticParams {
    pub fn zeros(arch: &CriticArchitecture) -> Self {
        let shapes = arch.layer_shapes();
        let len = arch.parameter_count();
        Self {
            shapes,
            mask: vec![false; len],
            values: vec![0.0; len],
        }
    }

    /// Builds parameters from per-layer `(W, b)` pairs, `W` row-major.
    pub fn from_layers(arch: &CriticArchitecture, layers: &[(Vec<f64>, Vec<f64>)]) -> Result<Self> {
        let shapes = arch.layer_shapes();
        if layers.len() != shapes.len() {
            return Err(Error::Conformance(format!(
                "expected {} layers, got {}",
                shapes.len(),
                layers.len()
            )));
        }
        let mut values = Vec::with_capacity(arch.parameter_count());
        for (l, ((w, b), &(rows, cols))) in layers.iter().zip(&shapes).enumerate() {
            if w.len() != rows * cols || b.len() != rows {
                return Err(Error::Conformance(format!(
                    "layer {l}: expected W {rows}x{cols} and b of {rows}, got {} and {}",
                    w.len(),
                    b.len()
                )));
            }
            values.extend_from_slice(w);
            values.extend_from_slice(b);
        }
        Self::from_flat(arch, values)
    }

    pub fn from_flat(arch: &CriticArchitecture, values: Vec<f64>) -> Result<Self> {
        if values.len() != arch.parameter_count() {
            return Err(Error::Conformance(format!(
                "expected {} parameters, got {}",
                arch.parameter_count(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Conformance("non-finite parameter".into()));
        }
        let mut p = Self {
            shapes: arch.layer_shapes(),
            mask: Vec::new(),
            values,
        };
        p.refresh_mask();
        Ok(p)
    }

    /// Uniform on `[−scale, scale]` entrywise (not yet projected).
    pub fn random_uniform(arch: &CriticArchitecture, scale: f64, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let values = (0..arch.parameter_count())
            .map(|_| scale * (2.0 * rng.random::<f64>() - 1.0))
            .collect();
        Self::from_flat(arch, values).expect("generated parameters conform")
    }

    pub fn shapes(&self) -> &[(usize, usize)] {
        &self.shapes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn nonzero_count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub(crate) fn refresh_mask(&mut self) {
        self.mask = self.values.iter().map(|v| *v != 0.0).collect();
    }

    /// Offsets `(weights, biases)` of layer `l` in the flat vector.
    pub(crate) fn layer_offsets(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.shapes.len());
        let mut at = 0;
        for &(r, c) in &self.shapes {
            out.push((at, at + r * c));
            at += r * c + r;
        }
        out
    }

    pub fn conforms_to(&self, arch: &CriticArchitecture) -> Result<()> {
        if self.shapes != arch.layer_shapes() || self.values.len() != arch.parameter_count() {
            return Err(Error::Conformance(format!(
                "parameter shapes {:?} do not match architecture {:?}",
                self.shapes,
                arch.layer_shapes()
            )));
        }
        Ok(())
    }

    /// Checks every class constraint exactly: shapes, `|θ| ≤ κ`, `‖θ‖₀ ≤ K`
    /// and mask consistency.
    pub fn check_feasible(&self, arch: &CriticArchitecture) -> Result<()> {
        self.conforms_to(arch)?;
        if let Some((i, v)) = self
            .values
            .iter()
            .enumerate()
            .find(|(_, v)| v.abs() > arch.weight_bound)
        {
            return Err(Error::Conformance(format!(
                "parameter {i} = {v} exceeds κ = {}",
                arch.weight_bound
            )));
        }
        let nnz = self.values.iter().filter(|v| **v != 0.0).count();
        if nnz > arch.sparsity_budget {
            return Err(Error::Conformance(format!(
                "{nnz} nonzeros exceed K = {}",
                arch.sparsity_budget
            )));
        }
        if self
            .mask
            .iter()
            .zip(&self.values)
            .any(|(m, v)| *m != (*v != 0.0))
        {
            return Err(Error::Conformance(
                "mask disagrees with nonzero pattern".into(),
            ));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text).map_err(|e| Error::Io(e.to_string()))?;
        let expected: usize = p.shapes.iter().map(|(r, c)| r * c + r).sum();
        if p.values.len() != expected || p.mask.len() != expected {
            return Err(Error::Conformance(
                "serialized lengths disagree with shapes".into(),
            ));
        }
        Ok(p)
    }
}

/// Flips the sign of the output layer, so the network computes `−f`.
pub fn negate_params(params: &CriticParams) -> CriticParams {
    let mut out = params.clone();
    let &(w, _) = out.layer_offsets().last().expect("at least one layer");
    for v in &mut out.values[w..] {
        *v = -*v;
    }
    out
}

/// Entrywise clip to `[−κ, κ]`, then keep the `K` largest magnitudes (ties
/// go to the earlier flat index) and zero the rest.
pub fn project_to_class(arch: &CriticArchitecture, params: &CriticParams) -> CriticParams {
    let mut out = params.clone();
    project_in_place(arch, &mut out);
    out
}

pub(crate) fn project_in_place(arch: &CriticArchitecture, params: &mut CriticParams) {
    let kappa = arch.weight_bound;
    for v in params.values.iter_mut() {
        *v = v.clamp(-kappa, kappa);
    }
    let nnz = params.values.iter().filter(|v| **v != 0.0).count();
    if nnz > arch.sparsity_budget {
        let mut order: Vec<usize> = (0..params.values.len())
            .filter(|&i| params.values[i] != 0.0)
            .collect();
        order.sort_by(|&a, &b| {
            params.values[b]
                .abs()
                .total_cmp(&params.values[a].abs())
                .then(a.cmp(&b))
        });
        for &i in &order[arch.sparsity_budget..] {
            params.values[i] = 0.0;
        }
    }
    params.refresh_mask();
}

/// Zero-pads `params` into a class with the same depth and input dimension
/// but at least as much width; the computed function is unchanged.
pub fn embed_into(
    params: &CriticParams,
    from: &CriticArchitecture,
    to: &CriticArchitecture,
) -> Result<CriticParams> {
    params.conforms_to(from)?;
    if from.depth != to.depth || from.input_dim != to.input_dim || to.width < from.width {
        return Err(Error::Conformance(
            "target class must have equal depth/input and no smaller width".into(),
        ));
    }
    let mut out = CriticParams::zeros(to);
    let src = params.layer_offsets();
    let dst = out.layer_offsets();
    for (l, (&(rows, cols), &(wide_rows, wide_cols))) in
        params.shapes.iter().zip(&to.layer_shapes()).enumerate()
    {
        let (sw, sb) = src[l];
        let (dw, db) = dst[l];
        for r in 0..rows {
            for c in 0..cols {
                out.values[dw + r * wide_cols + c] = params.values[sw + r * cols + c];
            }
            out.values[db + r] = params.values[sb + r];
        }
        debug_assert!(wide_rows >= rows);
    }
    out.refresh_mask();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arch(depth: usize, width: usize, k: usize, dim: usize, kappa: f64) -> CriticArchitecture {
        CriticArchitecture::new(1.0, kappa, depth, width, k, dim).unwrap()
    }

    #[test]
    fn projection_examples() {
        let a = arch(1, 1, 2, 3, 1.0);
        let p = CriticParams::from_flat(&a, vec![0.5, -0.2, 0.1, 0.9]).unwrap();
        let q = project_to_class(&a, &p);
        assert_eq!(q.values(), &[0.5, 0.0, 0.0, 0.9]);
        assert_eq!(q.mask(), &[true, false, false, true]);

        let tight = arch(1, 1, 4, 3, 0.5);
        let p = CriticParams::from_flat(&tight, vec![0.7, -0.7, 0.1, 0.0]).unwrap();
        assert_eq!(
            project_to_class(&tight, &p).values(),
            &[0.5, -0.5, 0.1, 0.0]
        );

        let feasible = CriticParams::from_flat(&a, vec![0.3, 0.0, 0.0, -0.2]).unwrap();
        assert_eq!(project_to_class(&a, &feasible), feasible);
    }

    #[test]
    fn ties_keep_the_earlier_index() {
        let a = arch(1, 1, 2, 3, 1.0);
        let p = CriticParams::from_flat(&a, vec![0.4, -0.4, 0.4, 0.1]).unwrap();
        assert_eq!(project_to_class(&a, &p).values(), &[0.4, -0.4, 0.0, 0.0]);
    }

    #[test]
    fn negation_is_an_involution_preserving_feasibility() {
        let a = arch(3, 4, 10, 2, 1.0);
        let p = project_to_class(&a, &CriticParams::random_uniform(&a, 2.0, 3));
        let n = negate_params(&p);
        n.check_feasible(&a).unwrap();
        assert_eq!(n.nonzero_count(), p.nonzero_count());
        assert_eq!(negate_params(&n), p);
    }

    #[test]
    fn json_round_trip() {
        let a = arch(2, 3, 6, 2, 1.0);
        let p = project_to_class(&a, &CriticParams::random_uniform(&a, 1.0, 1));
        let back = CriticParams::from_json(&p.to_json().unwrap()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn conformance_errors() {
        let a = arch(2, 3, 6, 2, 1.0);
        assert!(matches!(
            CriticParams::from_flat(&a, vec![0.0; 3]),
            Err(Error::Conformance(_))
        ));
        let over = CriticParams::from_flat(&a, vec![2.0; a.parameter_count()]).unwrap();
        assert!(over.check_feasible(&a).is_err());
    }
}
