//! Moments and precision when every spin of the initial singlet is mixed
//! with local white noise, plus the projector-based estimator for globally
//! mixed states.
//!
//! The local channel scales two-body correlations by (1-q)² and four-body
//! correlations by (1-q)⁴, so the noisy moments are the noiseless ones with
//! C̃² + S̃² replaced by (1-q)²(C̃² + S̃²).

use statrs::function::gamma::ln_gamma;

use crate::chain::{self, clamp_variance, error_propagation};
use crate::ensemble::{ChainGeometry, PhasePoint};
use crate::error::{Error, Result};
use crate::profile::{ctilde_stilde, precision_product, DensityProfile, ProfileKind};

/// Per-site white-noise weight and global mixing weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    pub q_local: f64,
    pub p_global: f64,
}

impl NoiseConfig {
    pub fn new(q_local: f64, p_global: f64) -> Result<Self> {
        check_unit_interval(q_local, "q")?;
        check_unit_interval(p_global, "p")?;
        Ok(NoiseConfig { q_local, p_global })
    }
}

fn check_unit_interval(x: f64, name: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&x) || !x.is_finite() {
        return Err(Error::Domain(format!("{name} must lie in [0, 1], got {x}")));
    }
    Ok(())
}

/// Deficit 1 - (1-q)²·(C̃² + S̃²) without cancellation: the noiseless
/// deficit plus q(2-q)·u, both non-negative.
fn noisy_deficit(profile: &DensityProfile, theta: PhasePoint, q: f64) -> Result<f64> {
    let (c, s) = ctilde_stilde(profile, theta)?;
    let u = c * c + s * s;
    let deficit = (1.0 - u).max(0.0);
    Ok(deficit + q * (2.0 - q) * u)
}

/// Noisy second moment for a product profile,
/// (N/4)·[1 - (1-q)²(C̃² + S̃²)].
pub fn jx2_noisy_product(
    profile: &DensityProfile,
    n: usize,
    theta: PhasePoint,
    q: f64,
) -> Result<f64> {
    check_unit_interval(q, "q")?;
    if let ProfileKind::DeltaChain(geom) = profile.kind() {
        return jx2_noisy_chain(geom, n, theta, q);
    }
    if q == 0.0 {
        return crate::profile::jx2_product(profile, n, theta);
    }
    let nf = require_n(n)?;
    Ok(nf / 4.0 * noisy_deficit(profile, theta, q)?)
}

/// Noisy fourth moment for a product profile,
/// (N/16)·{3N-2 - (1-q)²(6N-8)u + (1-q)⁴·3(N-2)u²}.
pub fn jx4_noisy_product(
    profile: &DensityProfile,
    n: usize,
    theta: PhasePoint,
    q: f64,
) -> Result<f64> {
    check_unit_interval(q, "q")?;
    if let ProfileKind::DeltaChain(geom) = profile.kind() {
        return jx4_noisy_chain(geom, n, theta, q);
    }
    if q == 0.0 {
        return crate::profile::jx4_product(profile, n, theta);
    }
    let nf = require_n(n)?;
    let d = noisy_deficit(profile, theta, q)?;
    Ok(nf / 16.0 * (4.0 * d + 3.0 * (nf - 2.0) * d * d))
}

fn require_n(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "noisy moments need at least 2 particles, got {n}"
        )));
    }
    Ok(n as f64)
}

/// Noisy second moment for a fixed chain,
/// (N/4)·{1 + (1-q)²[N - C² - S²]/(N(N-1))}.
pub fn jx2_noisy_chain(geom: &ChainGeometry, n: usize, theta: PhasePoint, q: f64) -> Result<f64> {
    check_unit_interval(q, "q")?;
    if q == 0.0 {
        return chain::jx2_chain(geom, theta, n);
    }
    // Reuse the noiseless path for its validation, then rescale the
    // correlation part.
    let jx2 = chain::jx2_chain(geom, theta, n)?;
    let nf = n as f64;
    let w = (1.0 - q) * (1.0 - q);
    Ok(nf / 4.0 + w * (jx2 - nf / 4.0))
}

/// Noisy fourth moment for a fixed chain: the chain fourth moment with the
/// two-body sum scaled by (1-q)² and the four-body sum by (1-q)⁴,
/// (1/16)·{3N² - 2N - (1-q)²(6N-8)I₂/(N-1) + (1-q)⁴·3I₄/((N-1)(N-3))}.
pub fn jx4_noisy_chain(geom: &ChainGeometry, n: usize, theta: PhasePoint, q: f64) -> Result<f64> {
    check_unit_interval(q, "q")?;
    if q == 0.0 {
        return chain::jx4_chain(geom, theta, n);
    }
    chain::jx4_chain(geom, theta, n)?;
    let nf = n as f64;
    let w = (1.0 - q) * (1.0 - q);
    let i2 = chain::i2_chain(geom, theta);
    let i4 = chain::i4_chain_char_fn(geom, theta);
    Ok(
        (3.0 * nf * nf - 2.0 * nf - w * (6.0 * nf - 8.0) / (nf - 1.0) * i2
            + w * w * 3.0 / ((nf - 1.0) * (nf - 3.0)) * i4)
            / 16.0,
    )
}

/// Inverse precision under local noise: the noisy variance propagated
/// through the (1-q)²-scaled slope of ⟨J_x²⟩. For q > 0 the precision at
/// Θ = 0 is exactly zero; for q = 0 it reduces to the noiseless value.
pub fn precision_noisy(
    profile: &DensityProfile,
    n: usize,
    theta: PhasePoint,
    q: f64,
) -> Result<f64> {
    check_unit_interval(q, "q")?;
    if q == 1.0 {
        return Err(Error::Domain(
            "q = 1 leaves no signal to estimate the gradient from".into(),
        ));
    }
    if q == 0.0 {
        return precision_product(profile, n, theta);
    }
    require_n(n)?;
    if theta.value() == 0.0 {
        return Ok(0.0);
    }
    let w = (1.0 - q) * (1.0 - q);
    let (derivative, var) = match profile.kind() {
        ProfileKind::DeltaChain(geom) => {
            let d = chain::djx2_dtheta_chain(geom, theta, n)?;
            let jx2 = jx2_noisy_chain(geom, n, theta, q)?;
            let jx4 = jx4_noisy_chain(geom, n, theta, q)?;
            (w * d, clamp_variance(jx4 - jx2 * jx2)?)
        }
        _ => {
            let jx2 = jx2_noisy_product(profile, n, theta, q)?;
            let jx4 = jx4_noisy_product(profile, n, theta, q)?;
            let d = crate::profile::djx2_dtheta_product(profile, n, theta)?;
            (w * d, clamp_variance(jx4 - jx2 * jx2)?)
        }
    };
    Ok(error_propagation(derivative, var))
}

/// How the white-noise projector expectation 2^{-N}·C(N, N/2) is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProjectorEstimate {
    /// Exact value up to N = 10⁴, the asymptotic √(2/(πN)) beyond.
    #[default]
    Auto,
    /// Exact binomial (integer arithmetic for small N, log-gamma beyond).
    Exact,
    /// Asymptotic √(2/(πN)).
    Asymptotic,
}

/// Crossover above which `Auto` switches to the asymptotic form; the two
/// agree to about 1e-6 relative there.
pub const PROJECTOR_ASYMPTOTIC_CROSSOVER: usize = 10_000;

/// Expectation of the J_x = 0 projector on the fully mixed state,
/// 2^{-N}·C(N, N/2) ≈ √(2/(πN)).
pub fn projector_mixed_expectation(n: usize, estimate: ProjectorEstimate) -> Result<f64> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::Domain(format!(
            "projector expectation needs a positive even particle number, got {n}"
        )));
    }
    let exact = |n: usize| -> f64 {
        if n <= 56 {
            // C(n, n/2) fits in the f64 mantissa up to n = 56; the division
            // by 2^n is exact.
            let mut binom: u128 = 1;
            for i in 1..=(n / 2) as u128 {
                binom = binom * (n as u128 / 2 + i) / i;
            }
            binom as f64 * 0.5f64.powi(n as i32)
        } else {
            let nf = n as f64;
            (ln_gamma(nf + 1.0) - 2.0 * ln_gamma(nf / 2.0 + 1.0) - nf * std::f64::consts::LN_2)
                .exp()
        }
    };
    let asymptotic = |n: usize| (2.0 / (std::f64::consts::PI * n as f64)).sqrt();
    Ok(match estimate {
        ProjectorEstimate::Exact => exact(n),
        ProjectorEstimate::Asymptotic => asymptotic(n),
        ProjectorEstimate::Auto => {
            if n <= PROJECTOR_ASYMPTOTIC_CROSSOVER {
                exact(n)
            } else {
                asymptotic(n)
            }
        }
    })
}

/// Projector expectation on the globally mixed state
/// p·⟨P⟩_mixed + (1-p)·⟨P⟩_singlet.
pub fn projector_noisy_curve(
    n: usize,
    p_global: f64,
    proj_singlet_value: f64,
    estimate: ProjectorEstimate,
) -> Result<f64> {
    check_unit_interval(p_global, "p")?;
    let mixed = projector_mixed_expectation(n, estimate)?;
    Ok(p_global * mixed + (1.0 - p_global) * proj_singlet_value)
}

/// Second moment of the globally mixed state p·N/4 + (1-p)·⟨J_x²⟩_singlet.
pub fn second_moment_global_mix(p_global: f64, n: usize, jx2_singlet: f64) -> Result<f64> {
    check_unit_interval(p_global, "p")?;
    let nf = require_n(n)?;
    Ok(p_global * nf / 4.0 + (1.0 - p_global) * jx2_singlet)
}
