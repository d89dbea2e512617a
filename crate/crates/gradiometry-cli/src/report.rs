//! Validation reports: the curve-comparison check and the oracle
//! validation suite behind the `validate` subcommand.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gradiometry::correlators::Axis;
use gradiometry::ensemble::{ChainGeometry, PhasePoint, Spin};
use gradiometry::oracle::{
    self, build_singlet_j0, build_singlet_pair_mixture, depolarize, evolve_gradient, expectation,
    moment, CollectiveOperator, DensityOperator,
};
use gradiometry::profile::DensityProfile;
use gradiometry::{chain, noise, profile};

use crate::output::CurveTable;
use crate::CliError;

/// One named check: its worst observed deviation against its tolerance.
#[derive(Debug, Clone)]
pub struct CheckRecord {
    pub name: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// A batch of checks; the report passes iff every check does.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub checks: Vec<CheckRecord>,
}

impl ValidationReport {
    pub fn record(&mut self, name: impl Into<String>, max_deviation: f64, tolerance: f64) {
        let pass = max_deviation.is_finite() && max_deviation <= tolerance;
        self.checks.push(CheckRecord {
            name: name.into(),
            max_deviation,
            tolerance,
            pass,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .checks
            .iter()
            .map(|c| c.name.len())
            .max()
            .unwrap_or(0)
            .max(5);
        for c in &self.checks {
            writeln!(
                f,
                "{}  {:width$}  max dev {:>12.5e}  tol {:>9.1e}",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.max_deviation,
                c.tolerance,
            )?;
        }
        write!(
            f,
            "overall: {}",
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

/// Pointwise comparison of two curve tables over identical Θ grids:
/// per column, the maximum absolute deviation against `tolerance` (the
/// maximum relative deviation is reported in the check name).
pub fn compare_curves(
    a: &CurveTable,
    b: &CurveTable,
    tolerance: f64,
) -> Result<ValidationReport, CliError> {
    if a.columns != b.columns {
        return Err(CliError::Config(format!(
            "column sets differ: {:?} vs {:?}",
            a.columns, b.columns
        )));
    }
    if a.rows.len() != b.rows.len() {
        return Err(CliError::Config(format!(
            "row counts differ: {} vs {}",
            a.rows.len(),
            b.rows.len()
        )));
    }
    let theta_col = a
        .columns
        .iter()
        .position(|c| c == "theta")
        .ok_or_else(|| CliError::Config("no 'theta' column".into()))?;
    for (i, (ra, rb)) in a.rows.iter().zip(&b.rows).enumerate() {
        if ra[theta_col] != rb[theta_col] {
            return Err(CliError::Config(format!(
                "theta grids differ at row {i}: {} vs {}",
                ra[theta_col], rb[theta_col]
            )));
        }
    }
    let mut report = ValidationReport::default();
    for (col, name) in a.columns.iter().enumerate() {
        if col == theta_col {
            continue;
        }
        let mut max_abs: f64 = 0.0;
        let mut max_rel: f64 = 0.0;
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            let dev = (ra[col] - rb[col]).abs();
            max_abs = max_abs.max(dev);
            let scale = ra[col].abs().max(rb[col].abs());
            if scale > 0.0 {
                max_rel = max_rel.max(dev / scale);
            }
        }
        report.record(
            format!("{name} (max rel {max_rel:.3e})"),
            max_abs,
            tolerance,
        );
    }
    Ok(report)
}

/// The oracle validation suite: exact small-N simulation against every
/// closed form, at the tolerances the library claims.
pub fn oracle_validation(n: usize, seed: u64) -> Result<ValidationReport, CliError> {
    let rt = |e: gradiometry::Error| CliError::Runtime(e.to_string());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ValidationReport::default();
    let theta = |t: f64| PhasePoint::new(t).unwrap();

    let singlet = build_singlet_pair_mixture(n).map_err(rt)?;
    let jx = CollectiveOperator::new(n, Spin::HALF, Axis::X);
    let jx2_op = jx.power(2);
    let jx4_op = jx.power(4);

    // Analytic chain moments against the evolved oracle.
    let mut dev2: f64 = 0.0;
    let mut dev4: f64 = 0.0;
    for _ in 0..3 {
        let positions: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let geom = ChainGeometry::new(positions, 1.0).map_err(rt)?;
        for _ in 0..10 {
            let t = theta(rng.random_range(0.0..6.3));
            let evolved = evolve_gradient(&singlet, &geom, t).map_err(rt)?;
            let o2 = expectation(&evolved, &jx2_op).map_err(rt)?;
            let a2 = chain::jx2_chain(&geom, t, n).map_err(rt)?;
            dev2 = dev2.max((o2 - a2).abs());
            if n >= 4 {
                let o4 = expectation(&evolved, &jx4_op).map_err(rt)?;
                let a4 = chain::jx4_chain(&geom, t, n).map_err(rt)?;
                dev4 = dev4.max((o4 - a4).abs());
            }
        }
    }
    report.record("chain second moment vs oracle", dev2, 1e-10);
    if n >= 4 {
        report.record("chain fourth moment vs oracle", dev4, 1e-10);
    }

    // Vanishing singlet moments.
    let mut dev: f64 = 0.0;
    for axis in [Axis::X, Axis::Y, Axis::Z] {
        for power in 1..=4 {
            dev = dev.max(moment(&singlet, axis, power).map_err(rt)?.abs());
        }
    }
    report.record("singlet moments vanish", dev, 1e-12);

    // Conserved quantities along the evolution.
    let geom = ChainGeometry::equidistant(n, 1.0, 0.0).map_err(rt)?;
    let jy2_op = CollectiveOperator::new(n, Spin::HALF, Axis::Y).power(2);
    let mut dev_z: f64 = 0.0;
    let mut dev_xy: f64 = 0.0;
    for _ in 0..10 {
        let t = theta(rng.random_range(0.0..6.3));
        let evolved = evolve_gradient(&singlet, &geom, t).map_err(rt)?;
        for power in 1..=4 {
            dev_z = dev_z.max(moment(&evolved, Axis::Z, power).map_err(rt)?.abs());
        }
        let x2 = expectation(&evolved, &jx2_op).map_err(rt)?;
        let y2 = expectation(&evolved, &jy2_op).map_err(rt)?;
        dev_xy = dev_xy.max((x2 - y2).abs());
    }
    report.record("Jz moments stay zero", dev_z, 1e-12);
    report.record("x-y symmetry of the variance", dev_xy, 1e-12);

    // Invariance under collective rotations.
    let mut dev: f64 = 0.0;
    for _ in 0..10 {
        let dir = [
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0f64),
        ];
        if dir.iter().map(|x| x * x).sum::<f64>() < 1e-3 {
            continue;
        }
        let angle = rng.random_range(-3.2..3.2);
        let rotated = oracle::rotate_collective(&singlet, dir, angle).map_err(rt)?;
        dev = dev.max(singlet.frobenius_distance(&rotated));
    }
    report.record("collective rotation invariance", dev, 1e-12);

    // The two singlet constructions coincide.
    let j0 = build_singlet_j0(n, Spin::HALF).map_err(rt)?;
    report.record(
        "pair mixture equals J=0 projector",
        singlet.frobenius_distance(&j0),
        1e-12,
    );

    // Gradient echo.
    let echo_geom = ChainGeometry::new((0..n).map(|_| rng.random_range(-2.0..2.0)).collect(), 1.0)
        .map_err(rt)?;
    let there = evolve_gradient(&singlet, &echo_geom, theta(1.37)).map_err(rt)?;
    let back = evolve_gradient(&there, &echo_geom, theta(-1.37)).map_err(rt)?;
    report.record("gradient echo", singlet.frobenius_distance(&back), 1e-13);

    // Local white-noise channel against the noisy closed forms.
    if n >= 4 {
        let mut dev: f64 = 0.0;
        for q in [0.2, 0.5] {
            let noisy = depolarize(&singlet, q).map_err(rt)?;
            for _ in 0..6 {
                let t = theta(rng.random_range(0.0..6.3));
                let evolved = evolve_gradient(&noisy, &geom, t).map_err(rt)?;
                let o2 = expectation(&evolved, &jx2_op).map_err(rt)?;
                let o4 = expectation(&evolved, &jx4_op).map_err(rt)?;
                let a2 = noise::jx2_noisy_chain(&geom, n, t, q).map_err(rt)?;
                let a4 = noise::jx4_noisy_chain(&geom, n, t, q).map_err(rt)?;
                dev = dev.max((o2 - a2).abs()).max((o4 - a4).abs());
            }
        }
        report.record("local noise channel vs closed forms", dev, 1e-10);
    }

    // Projector values on the mixed state and the singlet.
    let mixed = DensityOperator::maximally_mixed(n, Spin::HALF).map_err(rt)?;
    let p_mixed = oracle::projector_jx_value(&mixed, 0.0).map_err(rt)?;
    let p_exact =
        noise::projector_mixed_expectation(n, noise::ProjectorEstimate::Exact).map_err(rt)?;
    let p_singlet = oracle::projector_jx_value(&singlet, 0.0).map_err(rt)?;
    report.record(
        "white-noise projector expectation",
        (p_mixed - p_exact).abs(),
        1e-12,
    );
    report.record(
        "singlet projector expectation",
        (p_singlet - 1.0).abs(),
        1e-12,
    );

    // Globally mixed state against the affine formulas.
    let p_n = 0.5;
    let combined = DensityOperator::from_matrix(
        n,
        Spin::HALF,
        mixed.matrix() * Complex64::from(p_n) + singlet.matrix() * Complex64::from(1.0 - p_n),
    )
    .map_err(rt)?;
    let got = oracle::projector_jx_value(&combined, 0.0).map_err(rt)?;
    let analytic =
        noise::projector_noisy_curve(n, p_n, 1.0, noise::ProjectorEstimate::Exact).map_err(rt)?;
    report.record("global mix projector", (got - analytic).abs(), 1e-12);

    // The two I₄ evaluation routes.
    let mut dev: f64 = 0.0;
    for _ in 0..50 {
        let m = rng.random_range(2usize..=40);
        let positions: Vec<f64> = (0..m).map(|_| rng.random_range(-3.0..3.0)).collect();
        let g = ChainGeometry::new(positions, 1.0).map_err(rt)?;
        let t = theta(rng.random_range(-6.3..6.3));
        let a = chain::i4_chain_power_sum(&g, t);
        let b = chain::i4_chain_char_fn(&g, t);
        dev = dev.max((a - b).abs() / a.abs().max(b.abs()).max(1.0));
    }
    report.record("I4 dual-form identity (relative)", dev, 1e-9);

    // Monte Carlo average of the chain fourth moment over a Gaussian
    // profile against the product closed form.
    if n >= 4 {
        let p = DensityProfile::gaussian(0.0, 1.0, 1.0).map_err(rt)?;
        let t = theta(0.8);
        let draws = 200_000usize;
        let mut sum = 0.0f64;
        let mut sum_sq = 0.0f64;
        for _ in 0..draws {
            let positions: Vec<f64> = (0..n.div_ceil(2))
                .flat_map(|_| {
                    let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
                    let u2: f64 = rng.random_range(0.0..1.0);
                    let r = (-2.0 * u1.ln()).sqrt();
                    let phi = 2.0 * std::f64::consts::PI * u2;
                    [r * phi.cos(), r * phi.sin()]
                })
                .take(n)
                .collect();
            let g = ChainGeometry::new(positions, 1.0).map_err(rt)?;
            let v = chain::jx4_chain(&g, t, n).map_err(rt)?;
            sum += v;
            sum_sq += v * v;
        }
        let mean = sum / draws as f64;
        let variance = (sum_sq / draws as f64 - mean * mean).max(0.0);
        let stderr = (variance / draws as f64).sqrt();
        let expected = profile::jx4_product(&p, n, t).map_err(rt)?;
        report.record(
            "profile-averaged fourth moment (Monte Carlo, 3σ)",
            (mean - expected).abs(),
            3.0 * stderr + 1e-12,
        );
    }

    Ok(report)
}
