//! Sweep execution: one row per Θ grid point, evaluated in parallel and
//! assembled in grid order.

use std::sync::Mutex;

use gradiometry::correlators::Axis;
use gradiometry::curve::{MomentCurve, FLAG_DIVERGENT_AT_ZERO};
use gradiometry::ensemble::{ChainGeometry, PhasePoint, Spin};
use gradiometry::oracle::{self, CollectiveOperator, DensityOperator};
use gradiometry::profile::DensityProfile;
use gradiometry::{chain, noise, profile, spinj};

use crate::config::{Mode, RunConfig};
use crate::CliError;

#[derive(Debug, Clone, Copy, Default)]
struct Row {
    jx2: f64,
    jx4: f64,
    var_jx2: f64,
    inv_precision: f64,
    flags: u32,
}

/// A finished sweep: the sampled curve plus the white-noise normalization
/// its second moment is reported against.
pub struct SweepResult {
    pub curve: MomentCurve,
    pub normalized_jx2: Vec<f64>,
    pub wn_variance: f64,
}

enum Target {
    Chain {
        geom: ChainGeometry,
    },
    Profile {
        profile: DensityProfile,
    },
    NoisyProfile {
        profile: DensityProfile,
        q: f64,
    },
    SpinjAnalytic {
        geom: Option<ChainGeometry>,
        profile: Option<DensityProfile>,
        spin: Spin,
    },
    SpinjOracle {
        geom: ChainGeometry,
        spin: Spin,
        singlet: DensityOperator,
        jx2_op: oracle::CMat,
        jx4_op: oracle::CMat,
    },
}

fn build_target(config: &RunConfig) -> Result<Target, CliError> {
    Ok(match config.mode {
        Mode::Chain => Target::Chain {
            geom: config
                .geometry
                .as_ref()
                .expect("validated")
                .build(config.particles)?,
        },
        Mode::Profile => Target::Profile {
            profile: crate::config::build_profile(config)?,
        },
        Mode::Noise => Target::NoisyProfile {
            profile: crate::config::build_profile(config)?,
            q: config.noise.expect("validated").q_local,
        },
        Mode::Spinj => {
            if config.spinj_oracle_moments {
                let geom = config
                    .geometry
                    .as_ref()
                    .expect("validated")
                    .build(config.particles)?;
                let singlet = oracle::build_singlet_j0(config.particles, config.spin)
                    .map_err(|e| CliError::Runtime(e.to_string()))?;
                let jx = CollectiveOperator::new(config.particles, config.spin, Axis::X);
                Target::SpinjOracle {
                    geom,
                    spin: config.spin,
                    singlet,
                    jx2_op: jx.power(2),
                    jx4_op: jx.power(4),
                }
            } else {
                let geom = match &config.geometry {
                    Some(spec) => Some(spec.build(config.particles)?),
                    None => None,
                };
                let profile = if config.profile.is_some() {
                    Some(crate::config::build_profile(config)?)
                } else {
                    None
                };
                Target::SpinjAnalytic {
                    geom,
                    profile,
                    spin: config.spin,
                }
            }
        }
        Mode::OracleValidate | Mode::Compare => {
            return Err(CliError::Config(format!(
                "mode '{}' does not run sweeps",
                config.mode.name()
            )))
        }
    })
}

fn eval_point(target: &Target, n: usize, t: f64) -> Result<Row, gradiometry::Error> {
    let theta = PhasePoint::new(t)?;
    match target {
        Target::Chain { geom } => {
            let jx2 = chain::jx2_chain(geom, theta, n)?;
            let jx4 = chain::jx4_chain(geom, theta, n)?;
            let var = (jx4 - jx2 * jx2).max(0.0);
            let inv = chain::precision_chain(geom, theta, n)?;
            Ok(Row {
                jx2,
                jx4,
                var_jx2: var,
                inv_precision: inv,
                flags: 0,
            })
        }
        Target::Profile { profile } => {
            let jx2 = profile::jx2_product(profile, n, theta)?;
            let jx4 = profile::jx4_product(profile, n, theta)?;
            let var = (jx4 - jx2 * jx2).max(0.0);
            let inv = profile::precision_product(profile, n, theta)?;
            Ok(Row {
                jx2,
                jx4,
                var_jx2: var,
                inv_precision: inv,
                flags: 0,
            })
        }
        Target::NoisyProfile { profile, q } => {
            let jx2 = noise::jx2_noisy_product(profile, n, theta, *q)?;
            let jx4 = noise::jx4_noisy_product(profile, n, theta, *q)?;
            let var = (jx4 - jx2 * jx2).max(0.0);
            let inv = noise::precision_noisy(profile, n, theta, *q)?;
            Ok(Row {
                jx2,
                jx4,
                var_jx2: var,
                inv_precision: inv,
                flags: 0,
            })
        }
        Target::SpinjAnalytic {
            geom,
            profile,
            spin,
        } => {
            let (jx2, assumed) = if let Some(geom) = geom {
                (
                    spinj::jx2_chain_spinj(geom, n, *spin, theta)?,
                    spinj::precision_gaussian_assumption_chain(geom, n, *spin, theta)?,
                )
            } else {
                let p = profile.as_ref().expect("validated");
                (
                    spinj::jx2_product_spinj(p, n, *spin, theta)?,
                    spinj::precision_gaussian_assumption_product(p, n, *spin, theta)?,
                )
            };
            let jx4 = spinj::gaussian_assumption_jx4(jx2)?;
            Ok(Row {
                jx2,
                jx4,
                var_jx2: 2.0 * jx2 * jx2,
                inv_precision: assumed.inv_precision,
                flags: if assumed.divergent {
                    FLAG_DIVERGENT_AT_ZERO
                } else {
                    0
                },
            })
        }
        Target::SpinjOracle {
            geom,
            spin,
            singlet,
            jx2_op,
            jx4_op,
        } => {
            let evolved = oracle::evolve_gradient(singlet, geom, theta)?;
            // Moments of a positive operator; anything below zero is
            // floating-point dust from the trace.
            let jx2 = oracle::expectation(&evolved, jx2_op)?.max(0.0);
            let jx4 = oracle::expectation(&evolved, jx4_op)?.max(0.0);
            let var = (jx4 - jx2 * jx2).max(0.0);
            // The second moment is exactly the κ-scaled closed form, so its
            // analytic slope is the slope of the oracle curve.
            let k = spinj::kappa(*spin);
            let d = k * chain::djx2_dtheta_chain(geom, theta, n)?;
            let inv = if d == 0.0 || var == 0.0 {
                0.0
            } else {
                d.abs() / var.sqrt()
            };
            Ok(Row {
                jx2,
                jx4,
                var_jx2: var,
                inv_precision: inv,
                flags: 0,
            })
        }
    }
}

/// Evaluate the sweep, distributing grid points over `threads` workers;
/// rows are written in grid order regardless of completion order.
pub fn execute(config: &RunConfig, threads: usize) -> Result<SweepResult, CliError> {
    let target = build_target(config)?;
    let grid = config.sweep.grid();
    let n = config.particles;
    let rows = parallel_rows(&grid, threads.max(1), |idx| {
        eval_point(&target, n, grid[idx])
    })?;

    let wn_variance = spinj::SpinScaling::new(n, config.spin).wn_variance;
    let mut curve = MomentCurve::with_capacity(grid.len());
    let mut normalized = Vec::with_capacity(grid.len());
    for (t, row) in grid.iter().zip(rows) {
        curve.push(
            *t,
            row.jx2,
            row.jx4,
            row.var_jx2,
            row.inv_precision,
            row.flags,
        );
        normalized.push(row.jx2 / wn_variance);
    }
    curve
        .validate()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(SweepResult {
        curve,
        normalized_jx2: normalized,
        wn_variance,
    })
}

fn parallel_rows<F>(grid: &[f64], threads: usize, eval: F) -> Result<Vec<Row>, CliError>
where
    F: Fn(usize) -> Result<Row, gradiometry::Error> + Sync,
{
    let count = grid.len();
    let mut rows = vec![Row::default(); count];
    if count == 0 {
        return Ok(rows);
    }
    let chunk = count.div_ceil(threads);
    let first_error: Mutex<Option<(usize, String)>> = Mutex::new(None);
    std::thread::scope(|scope| {
        for (ci, slice) in rows.chunks_mut(chunk).enumerate() {
            let eval = &eval;
            let first_error = &first_error;
            scope.spawn(move || {
                for (off, slot) in slice.iter_mut().enumerate() {
                    let idx = ci * chunk + off;
                    match eval(idx) {
                        Ok(row) => *slot = row,
                        Err(e) => {
                            let mut guard = first_error.lock().unwrap();
                            if guard.as_ref().is_none_or(|(i, _)| idx < *i) {
                                *guard = Some((idx, e.to_string()));
                            }
                            return;
                        }
                    }
                }
            });
        }
    });
    if let Some((idx, message)) = first_error.into_inner().unwrap() {
        return Err(CliError::Runtime(format!(
            "at Θ = {} (grid index {idx}): {message}",
            grid[idx]
        )));
    }
    Ok(rows)
}
