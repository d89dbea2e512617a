//! Sampled moment curves produced by the Θ sweeps.

use crate::error::{Error, Result};

/// Point flag: the inverse precision at this point comes from the Gaussian
/// fourth-moment assumption, which diverges at Θ = 0; the stored value is 0.
pub const FLAG_DIVERGENT_AT_ZERO: u32 = 1;

/// Second and fourth moments of J_x, the variance of J_x², and the inverse
/// estimation precision (ΔΘ)⁻¹ sampled over a Θ grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MomentCurve {
    pub thetas: Vec<f64>,
    pub jx2: Vec<f64>,
    pub jx4: Vec<f64>,
    pub var_jx2: Vec<f64>,
    pub inv_precision: Vec<f64>,
    pub flags: Vec<u32>,
}

impl MomentCurve {
    pub fn with_capacity(n: usize) -> Self {
        MomentCurve {
            thetas: Vec::with_capacity(n),
            jx2: Vec::with_capacity(n),
            jx4: Vec::with_capacity(n),
            var_jx2: Vec::with_capacity(n),
            inv_precision: Vec::with_capacity(n),
            flags: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    pub fn push(
        &mut self,
        theta: f64,
        jx2: f64,
        jx4: f64,
        var_jx2: f64,
        inv_precision: f64,
        flags: u32,
    ) {
        self.thetas.push(theta);
        self.jx2.push(jx2);
        self.jx4.push(jx4);
        self.var_jx2.push(var_jx2);
        self.inv_precision.push(inv_precision);
        self.flags.push(flags);
    }

    /// Check the structural invariants: equal column lengths, finite
    /// non-negative moments, and the fourth-moment bound jx4 ≥ jx2².
    pub fn validate(&self) -> Result<()> {
        let n = self.thetas.len();
        if [
            self.jx2.len(),
            self.jx4.len(),
            self.var_jx2.len(),
            self.inv_precision.len(),
            self.flags.len(),
        ]
        .iter()
        .any(|&len| len != n)
        {
            return Err(Error::DimensionMismatch(
                "moment curve columns have unequal lengths".into(),
            ));
        }
        for i in 0..n {
            let (jx2, jx4) = (self.jx2[i], self.jx4[i]);
            if !jx2.is_finite() || !jx4.is_finite() || jx2 < -1e-12 {
                return Err(Error::NumericalInconsistency(format!(
                    "non-finite or negative moment at index {i}"
                )));
            }
            if jx4 - jx2 * jx2 < -1e-12 {
                return Err(Error::NumericalInconsistency(format!(
                    "fourth-moment bound violated at index {i}: jx4 = {jx4}, jx2² = {}",
                    jx2 * jx2
                )));
            }
            if self.var_jx2[i] < 0.0 || self.inv_precision[i] < 0.0 {
                return Err(Error::NumericalInconsistency(format!(
                    "negative variance or precision at index {i}"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_catches_bound_violation() {
        let mut c = MomentCurve::default();
        c.push(0.0, 2.0, 1.0, 0.0, 0.0, 0);
        assert!(matches!(
            c.validate(),
            Err(Error::NumericalInconsistency(_))
        ));
    }

    #[test]
    fn validate_accepts_consistent_curve() {
        let mut c = MomentCurve::default();
        c.push(0.0, 0.0, 0.0, 0.0, 6.9, 0);
        c.push(0.5, 1.0, 3.0, 2.0, 1.2, 0);
        assert!(c.validate().is_ok());
        assert_eq!(c.len(), 2);
    }
}
