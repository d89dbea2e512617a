//! Closed-form structure of the permutationally invariant singlet: pairing
//! counts, reduced-state mixing weights, and the two- and four-body
//! correlators its moment dynamics is assembled from.

use crate::error::{Error, Result};

/// Spin axis label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Mixing weights of the reduced four-particle state of the singlet.
///
/// `alpha` weighs the fully mixed component, `beta` each product of two pair
/// singlets (3 permutations), `gamma` each single pair singlet tensored with
/// the mixed state (6 permutations); alpha + 3β + 6γ = 1. `p_singlet` is
/// the pair-singlet weight of the two-particle reduction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub p_singlet: f64,
}

fn require_even(n: usize, what: &str) -> Result<()> {
    if n % 2 != 0 {
        return Err(Error::NoSinglet(format!(
            "{what} requires an even particle number, got {n}"
        )));
    }
    Ok(())
}

/// Number of perfect pairings of n particles into two-particle singlets,
/// (n-1)!! = (n-1)(n-3)(n-5)…
pub fn pairing_count(n: usize) -> Result<u128> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "pairing count needs at least 2 particles, got {n}"
        )));
    }
    require_even(n, "pairing count")?;
    let mut count: u128 = 1;
    let mut k = n as u128 - 1;
    while k > 1 {
        count = count
            .checked_mul(k)
            .ok_or_else(|| Error::Overflow(format!("({n}-1)!! exceeds u128")))?;
        k -= 2;
    }
    Ok(count)
}

/// Reduced-state mixing weights for an even ensemble of N ≥ 4 qubits.
///
/// Computed from the ratio forms β = 1/((N-1)(N-3)), γ = 1/(N-1) - β,
/// p_s = 1/(N-1) rather than raw double factorials; only these ratios
/// survive in the moment formulas and they stay finite for N ~ 10⁶.
pub fn reduced_weights(n: usize) -> Result<ReducedWeights> {
    if n <= 3 {
        return Err(Error::Domain(format!(
            "reduced weights need at least 4 particles, got {n}"
        )));
    }
    require_even(n, "reduced weights")?;
    let nf = n as f64;
    let beta = 1.0 / ((nf - 1.0) * (nf - 3.0));
    let p_singlet = 1.0 / (nf - 1.0);
    let gamma = p_singlet - beta;
    let alpha = 1.0 - 3.0 * beta - 6.0 * gamma;
    Ok(ReducedWeights {
        alpha,
        beta,
        gamma,
        p_singlet,
    })
}

/// Two-body correlator ⟨j_k ⊗ j_l⟩ of the singlet's two-particle reduction:
/// -δ_kl / (4(N-1)).
pub fn two_body_correlator(n: usize, axis_k: Axis, axis_l: Axis) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "two-body correlator needs at least 2 particles, got {n}"
        )));
    }
    require_even(n, "two-body correlator")?;
    if axis_k != axis_l {
        return Ok(0.0);
    }
    Ok(-1.0 / (4.0 * (n as f64 - 1.0)))
}

/// Index pattern of a four-body correlator in the x/y plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FourBodyPattern {
    /// ⟨j_x j_x j_x j_x⟩
    Xxxx,
    /// ⟨j_y j_y j_y j_y⟩
    Yyyy,
    /// ⟨j_x j_x j_y j_y⟩ (any placement of the two axes)
    Xxyy,
    /// Any pattern with an odd count of x or y factors
    MixedOdd,
}

/// Four-body correlator of the singlet's four-particle reduction.
pub fn four_body_correlator(n: usize, pattern: FourBodyPattern) -> Result<f64> {
    if n < 6 {
        return Err(Error::Domain(format!(
            "four-body correlator formulas need at least 6 particles, got {n}"
        )));
    }
    require_even(n, "four-body correlator")?;
    let nf = n as f64;
    let denom = 16.0 * (nf - 1.0) * (nf - 3.0);
    Ok(match pattern {
        FourBodyPattern::Xxxx | FourBodyPattern::Yyyy => 3.0 / denom,
        FourBodyPattern::Xxyy => 1.0 / denom,
        FourBodyPattern::MixedOdd => 0.0,
    })
}
