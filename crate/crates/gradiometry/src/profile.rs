//! Moment dynamics and precision for ensembles described by a single-particle
//! density profile: smooth product distributions (Gaussian or tabulated) and
//! the delta-chain limit of fixed positions.
//!
//! For product profiles everything reduces to the averaged phase factors
//! C̃ = ∫ f₁(z) cos(zΘ/L) dz and S̃ = ∫ f₁(z) sin(zΘ/L) dz.

use std::io::BufRead;
use std::path::Path;

use crate::chain;
use crate::ensemble::{position_stats, trig_sums, ChainGeometry, PhasePoint};
use crate::error::{Error, Result};

/// Absolute tolerance for the tabulated-profile quadrature.
pub const QUADRATURE_TOL: f64 = 1e-10;

/// Tolerance on |∫f₁ - 1| accepted as normalized.
pub const NORMALIZATION_TOL: f64 = 1e-10;

/// Sampled single-particle density on a strictly increasing grid, with local
/// cubic interpolation between samples. Zero outside the sampled range.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedProfile {
    z: Vec<f64>,
    density: Vec<f64>,
}

impl TabulatedProfile {
    /// Accept samples that already integrate to one within
    /// [`NORMALIZATION_TOL`].
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        let profile = Self::build(samples)?;
        let integral = profile.integrate(|_| 1.0, QUADRATURE_TOL);
        if (integral - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::UnnormalizedProfile(format!(
                "tabulated density integrates to {integral}"
            )));
        }
        Ok(profile)
    }

    /// Rescale the samples so the interpolated density integrates to one.
    pub fn normalized(samples: Vec<(f64, f64)>) -> Result<Self> {
        let mut profile = Self::build(samples)?;
        let integral = profile.integrate(|_| 1.0, QUADRATURE_TOL);
        if !(integral > 0.0) || !integral.is_finite() {
            return Err(Error::UnnormalizedProfile(format!(
                "tabulated density integrates to {integral}, cannot normalize"
            )));
        }
        for d in &mut profile.density {
            *d /= integral;
        }
        Ok(profile)
    }

    fn build(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 4 {
            return Err(Error::Domain(format!(
                "tabulated profile needs at least 4 samples, got {}",
                samples.len()
            )));
        }
        let mut sorted = samples;
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        for pair in sorted.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::Domain(format!(
                    "duplicate sample position {}",
                    pair[0].0
                )));
            }
        }
        if sorted
            .iter()
            .any(|&(z, d)| !z.is_finite() || !d.is_finite() || d < 0.0)
        {
            return Err(Error::Domain(
                "sample positions and densities must be finite and non-negative".into(),
            ));
        }
        let (z, density) = sorted.into_iter().unzip();
        Ok(TabulatedProfile { z, density })
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.z.iter().copied().zip(self.density.iter().copied())
    }

    pub fn support(&self) -> (f64, f64) {
        (self.z[0], *self.z.last().unwrap())
    }

    /// Interpolated density: cubic Lagrange through the four samples nearest
    /// to z, zero outside the sampled range.
    pub fn density_at(&self, z: f64) -> f64 {
        let n = self.z.len();
        if z < self.z[0] || z > self.z[n - 1] {
            return 0.0;
        }
        let i = match self.z.binary_search_by(|probe| probe.total_cmp(&z)) {
            Ok(k) => return self.density[k],
            Err(k) => k - 1,
        };
        let start = i.saturating_sub(1).min(n - 4);
        let mut value = 0.0;
        for a in start..start + 4 {
            let mut weight = 1.0;
            for b in start..start + 4 {
                if a != b {
                    weight *= (z - self.z[b]) / (self.z[a] - self.z[b]);
                }
            }
            value += weight * self.density[a];
        }
        value
    }

    /// ∫ f₁(z)·w(z) dz by adaptive bisection over the sample grid, with the
    /// absolute-error budget split across intervals by width.
    pub(crate) fn integrate(&self, weight: impl Fn(f64) -> f64, abs_tol: f64) -> f64 {
        let total_width = self.z[self.z.len() - 1] - self.z[0];
        let g = |z: f64| self.density_at(z) * weight(z);
        let mut total = 0.0;
        for pair in self.z.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let tol = abs_tol * ((b - a) / total_width);
            total += adaptive_simpson(&g, a, b, tol.max(1e-300));
        }
        total
    }

    fn mean(&self) -> f64 {
        self.integrate(|z| z, QUADRATURE_TOL)
    }

    fn variance(&self) -> f64 {
        let mean = self.mean();
        self.integrate(|z| (z - mean) * (z - mean), QUADRATURE_TOL)
    }
}

/// Parse two-column whitespace-delimited (z, density) text; `#` starts a
/// comment and blank lines are skipped.
pub fn parse_tabulated_samples<R: BufRead>(reader: R) -> Result<Vec<(f64, f64)>> {
    let mut samples = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::Domain(format!(
                "line {}: expected two columns, found {}",
                lineno + 1,
                fields.len()
            )));
        }
        let z: f64 = fields[0].parse().map_err(|_| {
            Error::Domain(format!("line {}: bad position '{}'", lineno + 1, fields[0]))
        })?;
        let d: f64 = fields[1].parse().map_err(|_| {
            Error::Domain(format!("line {}: bad density '{}'", lineno + 1, fields[1]))
        })?;
        samples.push((z, d));
    }
    Ok(samples)
}

/// Read tabulated samples from a file path.
pub fn load_tabulated_samples<P: AsRef<Path>>(path: P) -> Result<Vec<(f64, f64)>> {
    let file = std::fs::File::open(path)?;
    parse_tabulated_samples(std::io::BufReader::new(file))
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    adaptive_step(f, a, fa, m, fm, b, fb, whole, tol, 24)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    fa: f64,
    m: f64,
    fm: f64,
    b: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adaptive_step(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1)
            + adaptive_step(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1)
    }
}

/// The supported single-particle density shapes.
#[derive(Debug, Clone)]
pub enum ProfileKind {
    Gaussian { center: f64, width: f64 },
    Tabulated(TabulatedProfile),
    DeltaChain(ChainGeometry),
}

/// Single-particle density profile plus the characteristic length and the
/// two-body position covariance (zero for product distributions, the chain
/// value for delta chains; correlated smooth profiles supply it directly).
#[derive(Debug, Clone)]
pub struct DensityProfile {
    kind: ProfileKind,
    char_length: f64,
    pair_covariance: f64,
}

impl DensityProfile {
    pub fn gaussian(center: f64, width: f64, char_length: f64) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::Domain(format!(
                "gaussian width must be positive, got {width}"
            )));
        }
        if !(char_length > 0.0) || !char_length.is_finite() {
            return Err(Error::Domain(format!(
                "characteristic length must be positive, got {char_length}"
            )));
        }
        Ok(DensityProfile {
            kind: ProfileKind::Gaussian { center, width },
            char_length,
            pair_covariance: 0.0,
        })
    }

    pub fn tabulated(profile: TabulatedProfile, char_length: f64) -> Result<Self> {
        if !(char_length > 0.0) || !char_length.is_finite() {
            return Err(Error::Domain(format!(
                "characteristic length must be positive, got {char_length}"
            )));
        }
        Ok(DensityProfile {
            kind: ProfileKind::Tabulated(profile),
            char_length,
            pair_covariance: 0.0,
        })
    }

    pub fn delta_chain(geom: ChainGeometry) -> Result<Self> {
        let stats = position_stats(&geom)?;
        let char_length = geom.char_length();
        Ok(DensityProfile {
            kind: ProfileKind::DeltaChain(geom),
            char_length,
            pair_covariance: stats.pair_covariance,
        })
    }

    /// Override the stored pair covariance; correlated smooth profiles only
    /// enter the Θ = 0 precision through σ² and cov(z₁, z₂).
    pub fn with_pair_covariance(mut self, cov: f64) -> Self {
        self.pair_covariance = cov;
        self
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn char_length(&self) -> f64 {
        self.char_length
    }

    pub fn pair_covariance(&self) -> f64 {
        self.pair_covariance
    }

    /// Mean and variance of the single-particle distribution.
    pub fn stats(&self) -> Result<(f64, f64)> {
        match &self.kind {
            ProfileKind::Gaussian { center, width } => Ok((*center, width * width)),
            ProfileKind::Tabulated(tab) => Ok((tab.mean(), tab.variance())),
            ProfileKind::DeltaChain(geom) => {
                let stats = position_stats(geom)?;
                Ok((stats.mean, stats.variance))
            }
        }
    }
}

/// Averaged phase factors (C̃, S̃) of the profile at phase Θ.
pub fn ctilde_stilde(profile: &DensityProfile, theta: PhasePoint) -> Result<(f64, f64)> {
    let l = profile.char_length();
    let th = theta.value();
    match profile.kind() {
        ProfileKind::Gaussian { center, width } => {
            let damp = (-0.5 * (width * th / l).powi(2)).exp();
            let phase = center * th / l;
            Ok((damp * phase.cos(), damp * phase.sin()))
        }
        ProfileKind::Tabulated(tab) => {
            let c = tab.integrate(|z| (z * th / l).cos(), QUADRATURE_TOL);
            let s = tab.integrate(|z| (z * th / l).sin(), QUADRATURE_TOL);
            Ok((c, s))
        }
        ProfileKind::DeltaChain(geom) => {
            let (c, s) = trig_sums(geom, theta);
            let n = geom.len() as f64;
            Ok((c / n, s / n))
        }
    }
}

/// 1 - C̃² - S̃², the quantity the product-profile moments are built from,
/// evaluated without cancellation near Θ = 0.
fn csq_deficit(profile: &DensityProfile, theta: PhasePoint) -> Result<f64> {
    match profile.kind() {
        ProfileKind::Gaussian { width, .. } => {
            let x = width * theta.value() / profile.char_length();
            Ok(-f64::exp_m1(-x * x))
        }
        _ => {
            let (c, s) = ctilde_stilde(profile, theta)?;
            Ok((1.0 - (c * c + s * s)).max(0.0))
        }
    }
}

/// d(C̃² + S̃²)/dΘ.
fn csq_derivative(profile: &DensityProfile, theta: PhasePoint) -> Result<f64> {
    let l = profile.char_length();
    let th = theta.value();
    match profile.kind() {
        ProfileKind::Gaussian { width, .. } => {
            let r = width / l;
            Ok(-2.0 * r * r * th * (-(r * th) * (r * th)).exp())
        }
        ProfileKind::Tabulated(tab) => {
            let (c, s) = ctilde_stilde(profile, theta)?;
            let dc = tab.integrate(|z| -(z / l) * (z * th / l).sin(), QUADRATURE_TOL);
            let ds = tab.integrate(|z| (z / l) * (z * th / l).cos(), QUADRATURE_TOL);
            Ok(2.0 * (c * dc + s * ds))
        }
        ProfileKind::DeltaChain(_) => Err(Error::Unsupported(
            "delta-chain profiles use the chain derivative".into(),
        )),
    }
}

fn require_product_n(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "product-profile moments need at least 2 particles, got {n}"
        )));
    }
    Ok(n as f64)
}

/// Second moment ⟨J_x²⟩ = (N/4)(1 - C̃² - S̃²) for a product profile;
/// delta chains delegate to the chain formula.
pub fn jx2_product(profile: &DensityProfile, n: usize, theta: PhasePoint) -> Result<f64> {
    if let ProfileKind::DeltaChain(geom) = profile.kind() {
        return chain::jx2_chain(geom, theta, n);
    }
    let nf = require_product_n(n)?;
    Ok(nf / 4.0 * csq_deficit(profile, theta)?)
}

/// Fourth moment ⟨J_x⁴⟩ = (N/16){3N-2 - (6N-8)u + 3(N-2)u²} with
/// u = C̃² + S̃², evaluated in the equivalent cancellation-free form
/// (N/16){4δ + 3(N-2)δ²}, δ = 1 - u. Delta chains delegate to the chain
/// formula.
pub fn jx4_product(profile: &DensityProfile, n: usize, theta: PhasePoint) -> Result<f64> {
    if let ProfileKind::DeltaChain(geom) = profile.kind() {
        return chain::jx4_chain(geom, theta, n);
    }
    let nf = require_product_n(n)?;
    let d = csq_deficit(profile, theta)?;
    Ok(nf / 16.0 * (4.0 * d + 3.0 * (nf - 2.0) * d * d))
}

/// Variance of J_x² for a product profile: (N/8)(2δ + (N-3)δ²).
fn var_jx2_product(nf: f64, deficit: f64) -> f64 {
    nf / 8.0 * (2.0 * deficit + (nf - 3.0) * deficit * deficit)
}

/// Analytic slope ∂_Θ ⟨J_x²⟩ = -(N/4)·d(C̃² + S̃²)/dΘ.
pub fn djx2_dtheta_product(profile: &DensityProfile, n: usize, theta: PhasePoint) -> Result<f64> {
    if let ProfileKind::DeltaChain(geom) = profile.kind() {
        return chain::djx2_dtheta_chain(geom, theta, n);
    }
    let nf = require_product_n(n)?;
    Ok(-nf / 4.0 * csq_derivative(profile, theta)?)
}

/// Inverse precision (ΔΘ)⁻¹ from error propagation on ⟨J_x²⟩. At Θ = 0 the
/// analytic limit √(N[σ²-cov]/L²) is returned.
pub fn precision_product(profile: &DensityProfile, n: usize, theta: PhasePoint) -> Result<f64> {
    if let ProfileKind::DeltaChain(geom) = profile.kind() {
        return chain::precision_chain(geom, theta, n);
    }
    let nf = require_product_n(n)?;
    if theta.value() == 0.0 {
        return Ok(precision_zero_general(profile, n)?.max(0.0).sqrt());
    }
    let d = csq_deficit(profile, theta)?;
    let var = chain::clamp_variance(var_jx2_product(nf, d))?;
    let derivative = djx2_dtheta_product(profile, n, theta)?;
    Ok(chain::error_propagation(derivative, var))
}

/// Squared inverse precision at Θ = 0 for any particle distribution:
/// N·[σ² - cov(z₁,z₂)]/L².
pub fn precision_zero_general(profile: &DensityProfile, n: usize) -> Result<f64> {
    let nf = require_product_n(n)?;
    let (_, variance) = profile.stats()?;
    let l = profile.char_length();
    Ok(nf * (variance - profile.pair_covariance()) / (l * l))
}

/// Averaged restricted sums (⟨I₂⟩, ⟨I₄⟩): N(N-1)·u and N!/(N-4)!·u² for
/// product profiles; the fixed-chain sums for delta chains.
pub fn i2_i4_averages(profile: &DensityProfile, n: usize, theta: PhasePoint) -> Result<(f64, f64)> {
    if let ProfileKind::DeltaChain(geom) = profile.kind() {
        if geom.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "geometry holds {} positions but N = {n}",
                geom.len()
            )));
        }
        return Ok((
            chain::i2_chain(geom, theta),
            chain::i4_chain_char_fn(geom, theta),
        ));
    }
    let nf = require_product_n(n)?;
    let (c, s) = ctilde_stilde(profile, theta)?;
    let u = c * c + s * s;
    Ok((
        nf * (nf - 1.0) * u,
        nf * (nf - 1.0) * (nf - 2.0) * (nf - 3.0) * u * u,
    ))
}
