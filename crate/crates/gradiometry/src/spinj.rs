//! Spin-j generalization: the second-moment dynamics of a spin-j singlet is
//! the spin-1/2 curve scaled by κ_j = 4j(j+1)/3, and the precision can be
//! estimated from the second moment alone through the Gaussian
//! fourth-moment assumption ⟨J_x⁴⟩ ≈ 3⟨J_x²⟩².

use crate::chain;
use crate::ensemble::{ChainGeometry, PhasePoint, Spin};
use crate::error::{Error, Result};
use crate::profile::{self, DensityProfile};

/// Scaling between the spin-j and spin-1/2 white-noise variances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinScaling {
    /// κ_j = 4j(j+1)/3.
    pub kappa: f64,
    /// Per-ensemble white-noise variance ⟨J_x²⟩ = N·j(j+1)/3 = κ_j·N/4.
    pub wn_variance: f64,
}

impl SpinScaling {
    pub fn new(n: usize, spin: Spin) -> Self {
        let kappa = kappa(spin);
        SpinScaling {
            kappa,
            wn_variance: kappa * n as f64 / 4.0,
        }
    }
}

/// κ_j = 4j(j+1)/3; equals 1 for spin-1/2.
pub fn kappa(spin: Spin) -> f64 {
    let j = spin.value();
    4.0 * j * (j + 1.0) / 3.0
}

/// Spin-j chain second moment: κ_j times the spin-1/2 curve.
pub fn jx2_chain_spinj(
    geom: &ChainGeometry,
    n: usize,
    spin: Spin,
    theta: PhasePoint,
) -> Result<f64> {
    Ok(kappa(spin) * chain::jx2_chain(geom, theta, n)?)
}

/// Spin-j product-profile second moment: κ_j·(N/4)(1 - C̃² - S̃²).
pub fn jx2_product_spinj(
    profile: &DensityProfile,
    n: usize,
    spin: Spin,
    theta: PhasePoint,
) -> Result<f64> {
    Ok(kappa(spin) * profile::jx2_product(profile, n, theta)?)
}

/// Gaussian-outcome assumption for the fourth moment, 3·⟨J_x²⟩². The
/// implied variance of J_x² is 2·⟨J_x²⟩².
pub fn gaussian_assumption_jx4(jx2_value: f64) -> Result<f64> {
    if !(jx2_value >= 0.0) {
        return Err(Error::Domain(format!(
            "second moment must be non-negative, got {jx2_value}"
        )));
    }
    Ok(3.0 * jx2_value * jx2_value)
}

/// Inverse precision under the Gaussian assumption, with the divergence at
/// Θ = 0 reported as a flag rather than an error so sweeps never abort.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssumedPrecision {
    pub inv_precision: f64,
    pub divergent: bool,
}

fn assumed_precision(jx2: f64, djx2: f64, theta: PhasePoint) -> AssumedPrecision {
    if theta.value() == 0.0 || jx2 <= 0.0 {
        return AssumedPrecision {
            inv_precision: 0.0,
            divergent: true,
        };
    }
    AssumedPrecision {
        inv_precision: djx2.abs() / (std::f64::consts::SQRT_2 * jx2),
        divergent: false,
    }
}

/// (ΔΘ)⁻¹ = |∂_Θ⟨J_x²⟩| / (√2·⟨J_x²⟩) for a spin-j chain. κ_j cancels
/// between numerator and denominator, so the value is independent of j.
pub fn precision_gaussian_assumption_chain(
    geom: &ChainGeometry,
    n: usize,
    spin: Spin,
    theta: PhasePoint,
) -> Result<AssumedPrecision> {
    let k = kappa(spin);
    let jx2 = k * chain::jx2_chain(geom, theta, n)?;
    let d = k * chain::djx2_dtheta_chain(geom, theta, n)?;
    Ok(assumed_precision(jx2, d, theta))
}

/// (ΔΘ)⁻¹ under the Gaussian assumption for a spin-j product profile.
pub fn precision_gaussian_assumption_product(
    profile: &DensityProfile,
    n: usize,
    spin: Spin,
    theta: PhasePoint,
) -> Result<AssumedPrecision> {
    let k = kappa(spin);
    let jx2 = k * profile::jx2_product(profile, n, theta)?;
    let d = k * profile::djx2_dtheta_product(profile, n, theta)?;
    Ok(assumed_precision(jx2, d, theta))
}
