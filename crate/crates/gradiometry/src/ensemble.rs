//! Particle ensembles, chain geometries, and the scalar trigonometric sums
//! that every closed-form moment expression is built from.
//!
//! Positions are stored as plain reals in units of the characteristic length
//! `L`; the accumulated phase `Θ` is dimensionless, and `ħ = 1` throughout.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Spin quantum number restricted to positive half-integers (1/2, 1, 3/2, …).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Spin {
    twice: u32,
}

impl Spin {
    pub const HALF: Spin = Spin { twice: 1 };
    pub const ONE: Spin = Spin { twice: 2 };

    /// Build from a floating-point value, rejecting anything that is not a
    /// positive half-integer.
    pub fn new(j: f64) -> Result<Self> {
        let twice = 2.0 * j;
        if !j.is_finite() || j <= 0.0 || twice.fract() != 0.0 || twice > f64::from(u32::MAX) {
            return Err(Error::Domain(format!(
                "spin must be a positive half-integer, got {j}"
            )));
        }
        Ok(Spin {
            twice: twice as u32,
        })
    }

    pub fn value(self) -> f64 {
        f64::from(self.twice) / 2.0
    }

    /// Local Hilbert-space dimension 2j+1.
    pub fn multiplicity(self) -> usize {
        self.twice as usize + 1
    }

    pub fn is_half(self) -> bool {
        self.twice == 1
    }
}

/// Particle count and spin of the ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnsembleSpec {
    n_particles: usize,
    spin: Spin,
}

impl EnsembleSpec {
    pub fn new(n_particles: usize, spin: Spin) -> Result<Self> {
        if n_particles < 2 {
            return Err(Error::Domain(format!(
                "ensemble needs at least 2 particles, got {n_particles}"
            )));
        }
        Ok(EnsembleSpec { n_particles, spin })
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn spin(&self) -> Spin {
        self.spin
    }
}

/// Fixed z-coordinates of a one-dimensional chain together with the
/// characteristic length normalizing them.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainGeometry {
    positions: Vec<f64>,
    char_length: f64,
}

impl ChainGeometry {
    /// Chain at arbitrary positions. The characteristic length must be
    /// supplied explicitly since the phase is only meaningful relative to it.
    pub fn new(positions: Vec<f64>, char_length: f64) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidGeometry("empty position list".into()));
        }
        if positions.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidGeometry("non-finite position".into()));
        }
        if !(char_length > 0.0) || !char_length.is_finite() {
            return Err(Error::InvalidGeometry(format!(
                "characteristic length must be positive, got {char_length}"
            )));
        }
        Ok(ChainGeometry {
            positions,
            char_length,
        })
    }

    /// Equidistant chain z_n = (n-1)·spacing + offset for n = 1…N, with the
    /// characteristic length set to the spacing.
    pub fn equidistant(n: usize, spacing: f64, offset: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGeometry(format!(
                "equidistant chain needs at least 2 particles, got {n}"
            )));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::InvalidGeometry(format!(
                "spacing must be positive, got {spacing}"
            )));
        }
        let positions = (0..n).map(|k| k as f64 * spacing + offset).collect();
        ChainGeometry::new(positions, spacing)
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn char_length(&self) -> f64 {
        self.char_length
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Dimensionless accumulated phase Θ = ω_L·t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint(f64);

impl PhasePoint {
    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::Domain(format!("phase must be finite, got {theta}")));
        }
        Ok(PhasePoint(theta))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Neumaier-compensated accumulator. The squared sums C² + S² enter
/// differences of near-cancelling quantities, so plain summation is not
/// enough once N reaches ~10⁴.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn total(self) -> f64 {
        self.sum + self.carry
    }
}

/// Per-site phase cosine/sine pairs (c_n, s_n) with c_n = cos(z_n Θ / L).
pub(crate) fn site_phases<'a>(
    geom: &'a ChainGeometry,
    theta: PhasePoint,
) -> impl Iterator<Item = (f64, f64)> + 'a {
    let inv_l = 1.0 / geom.char_length();
    let th = theta.value();
    geom.positions().iter().map(move |&z| {
        let phase = z * inv_l * th;
        (phase.cos(), phase.sin())
    })
}

/// The sums C = Σ_n cos(z_n Θ / L) and S = Σ_n sin(z_n Θ / L).
pub fn trig_sums(geom: &ChainGeometry, theta: PhasePoint) -> (f64, f64) {
    let mut c = CompensatedSum::default();
    let mut s = CompensatedSum::default();
    for (cn, sn) in site_phases(geom, theta) {
        c.add(cn);
        s.add(sn);
    }
    (c.total(), s.total())
}

/// Power sum X_{k,l} = Σ_n c_n^k s_n^l for k, l ≤ 4 with k + l ≤ 4.
pub fn power_sums(geom: &ChainGeometry, theta: PhasePoint, k: u32, l: u32) -> Result<f64> {
    if k > 4 || l > 4 || k + l > 4 {
        return Err(Error::Domain(format!(
            "power sum exponents must satisfy k, l ≤ 4 and k + l ≤ 4, got ({k}, {l})"
        )));
    }
    let mut acc = CompensatedSum::default();
    for (cn, sn) in site_phases(geom, theta) {
        acc.add(cn.powi(k as i32) * sn.powi(l as i32));
    }
    Ok(acc.total())
}

/// Characteristic function of the position set, (1/N) Σ_k exp(i α z_k).
pub fn char_fn(geom: &ChainGeometry, alpha: f64) -> Complex64 {
    let mut re = CompensatedSum::default();
    let mut im = CompensatedSum::default();
    for &z in geom.positions() {
        let phase = alpha * z;
        re.add(phase.cos());
        im.add(phase.sin());
    }
    let n = geom.len() as f64;
    Complex64::new(re.total() / n, im.total() / n)
}

/// Mean, variance, and two-body covariance of the position set under its
/// fixed-chain (permutation) distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionStats {
    pub mean: f64,
    pub variance: f64,
    pub pair_covariance: f64,
}

/// Position statistics of a fixed chain. The pair covariance is the
/// two-body average Σ_{k≠l} z_k z_l / (N(N-1)) - mean², evaluated in
/// centered coordinates to avoid cancellation.
pub fn position_stats(geom: &ChainGeometry) -> Result<PositionStats> {
    let n = geom.len();
    if n < 2 {
        return Err(Error::InvalidGeometry(format!(
            "position statistics need at least 2 particles, got {n}"
        )));
    }
    let nf = n as f64;
    let mut sum = CompensatedSum::default();
    for &z in geom.positions() {
        sum.add(z);
    }
    let mean = sum.total() / nf;

    let mut centered = CompensatedSum::default();
    let mut centered_sq = CompensatedSum::default();
    for &z in geom.positions() {
        let d = z - mean;
        centered.add(d);
        centered_sq.add(d * d);
    }
    let s1 = centered.total();
    let s2 = centered_sq.total();
    let variance = s2 / nf;
    let pair_covariance = (s1 * s1 - s2) / (nf * (nf - 1.0));
    Ok(PositionStats {
        mean,
        variance,
        pair_covariance,
    })
}
