use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// A probability mass vector over chart indices with exact rational entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteMass {
    masses: Vec<Ratio<u64>>,
}

impl DiscreteMass {
    pub fn from_ratios(masses: Vec<Ratio<u64>>) -> Result<Self> {
        let total = masses
            .iter()
            .fold(Ratio::zero(), |acc: Ratio<u64>, m| acc + m);
        if !total.is_one() {
            return Err(Error::InvalidArgument(format!(
                "masses sum to {total}, not 1"
            )));
        }
        Ok(Self { masses })
    }

    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let n: u64 = counts.iter().sum();
        if n == 0 {
            return Err(Error::EmptySample);
        }
        Self::from_ratios(counts.iter().map(|&c| Ratio::new(c, n)).collect())
    }

    pub fn masses(&self) -> &[Ratio<u64>] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.masses.iter().map(ratio_to_f64).collect()
    }
}

pub(crate) fn ratio_to_f64(r: &Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `‖p − q‖₂`. Entry differences are formed exactly before rounding.
pub fn l2_divergence(p: &DiscreteMass, q: &DiscreteMass) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            got: q.len(),
        });
    }
    let sum: f64 = p
        .masses
        .iter()
        .zip(&q.masses)
        .map(|(a, b)| {
            let num =
                *a.numer() as i128 * *b.denom() as i128 - *b.numer() as i128 * *a.denom() as i128;
            let den = *a.denom() as i128 * *b.denom() as i128;
            let d = num.unsigned_abs() as f64 / den as f64;
            d * d
        })
        .sum();
    Ok(sum.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(v: &[(u64, u64)]) -> DiscreteMass {
        DiscreteMass::from_ratios(v.iter().map(|&(a, b)| Ratio::new(a, b)).collect()).unwrap()
    }

    #[test]
    fn reference_values() {
        let half = m(&[(1, 2), (1, 2)]);
        assert_eq!(l2_divergence(&half, &half).unwrap(), 0.0);
        let e0 = m(&[(1, 1), (0, 1)]);
        let e1 = m(&[(0, 1), (1, 1)]);
        assert!((l2_divergence(&e0, &e1).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let p = m(&[(7, 10), (3, 10)]);
        let q = m(&[(4, 10), (6, 10)]);
        assert!((l2_divergence(&p, &q).unwrap() - 0.18f64.sqrt()).abs() < 1e-15);
        assert!((l2_divergence(&p, &q).unwrap() - 0.424_264_1).abs() < 1e-7);
    }

    #[test]
    fn length_mismatch() {
        let a = m(&[(1, 1)]);
        let b = m(&[(1, 2), (1, 2)]);
        assert!(matches!(
            l2_divergence(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rejects_non_normalized() {
        assert!(DiscreteMass::from_ratios(vec![Ratio::new(1, 3), Ratio::new(1, 3)]).is_err());
    }
}
