//! Analytic moment dynamics and estimation precision for a singlet prepared
//! on a fixed chain of spin-1/2 particles in a field gradient.
//!
//! The second moment grows as the gradient dephases the pair singlets; the
//! fourth moment follows from the restricted four-index sums I₂ and I₄,
//! which collapse to single-index power sums or characteristic functions.

use crate::curve::MomentCurve;
use crate::ensemble::{char_fn, site_phases, trig_sums, ChainGeometry, CompensatedSum, PhasePoint};
use crate::error::{Error, Result};

/// Variances this far below zero are treated as cancellation residue and
/// clamped; anything lower is a hard error.
pub const VARIANCE_CLAMP: f64 = 1e-12;

fn check_chain(geom: &ChainGeometry, n: usize, min_n: usize) -> Result<()> {
    if geom.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "geometry holds {} positions but N = {n}",
            geom.len()
        )));
    }
    if n % 2 != 0 {
        return Err(Error::NoSinglet(format!(
            "chain singlet requires an even particle number, got {n}"
        )));
    }
    if n < min_n {
        return Err(Error::Domain(format!(
            "operation requires N ≥ {min_n}, got {n}"
        )));
    }
    Ok(())
}

/// Two-index sum I₂ = Σ_{n≠m} (c_n c_m + s_n s_m) = C² + S² - N.
pub fn i2_chain(geom: &ChainGeometry, theta: PhasePoint) -> f64 {
    let (c, s) = trig_sums(geom, theta);
    c * c + s * s - geom.len() as f64
}

/// Second moment ⟨J_x²⟩ of the evolved chain singlet,
/// (N/4)·{1 + [N - C² - S²] / (N(N-1))}.
pub fn jx2_chain(geom: &ChainGeometry, theta: PhasePoint, n: usize) -> Result<f64> {
    check_chain(geom, n, 2)?;
    let nf = n as f64;
    let (c, s) = trig_sums(geom, theta);
    Ok(nf / 4.0 * (1.0 + (nf - c * c - s * s) / (nf * (nf - 1.0))))
}

/// Four-index sum I₄ evaluated through single-index power sums X_{k,l}.
pub fn i4_chain_power_sum(geom: &ChainGeometry, theta: PhasePoint) -> f64 {
    // One pass accumulating every X_{k,l} that appears in the expansion.
    let mut x10 = CompensatedSum::default();
    let mut x01 = CompensatedSum::default();
    let mut x20 = CompensatedSum::default();
    let mut x02 = CompensatedSum::default();
    let mut x11 = CompensatedSum::default();
    let mut x30 = CompensatedSum::default();
    let mut x03 = CompensatedSum::default();
    let mut x21 = CompensatedSum::default();
    let mut x12 = CompensatedSum::default();
    let mut x40 = CompensatedSum::default();
    let mut x04 = CompensatedSum::default();
    let mut x22 = CompensatedSum::default();
    for (c, s) in site_phases(geom, theta) {
        let (c2, s2) = (c * c, s * s);
        x10.add(c);
        x01.add(s);
        x20.add(c2);
        x02.add(s2);
        x11.add(c * s);
        x30.add(c2 * c);
        x03.add(s2 * s);
        x21.add(c2 * s);
        x12.add(c * s2);
        x40.add(c2 * c2);
        x04.add(s2 * s2);
        x22.add(c2 * s2);
    }
    let (x10, x01) = (x10.total(), x01.total());
    let (x20, x02, x11) = (x20.total(), x02.total(), x11.total());
    let (x30, x03, x21, x12) = (x30.total(), x03.total(), x21.total(), x12.total());
    let (x40, x04, x22) = (x40.total(), x04.total(), x22.total());

    x10.powi(4) + x01.powi(4) + 2.0 * x10 * x10 * x01 * x01 - 6.0 * x40 - 6.0 * x04 - 12.0 * x22
        + 3.0 * x20 * x20
        + 3.0 * x02 * x02
        + 8.0 * x30 * x10
        + 8.0 * x03 * x01
        + 4.0 * x11 * x11
        + 8.0 * x21 * x01
        + 8.0 * x12 * x10
        + 2.0 * x20 * x02
        - 6.0 * x20 * x10 * x10
        - 6.0 * x02 * x01 * x01
        - 2.0 * x20 * x01 * x01
        - 2.0 * x02 * x10 * x10
        - 8.0 * x11 * x10 * x01
}

/// Four-index sum I₄ evaluated through the characteristic function
/// f̂₁(α) = (1/N) Σ_k exp(i α z_k) with α = Θ/L.
pub fn i4_chain_char_fn(geom: &ChainGeometry, theta: PhasePoint) -> f64 {
    let n = geom.len() as f64;
    let alpha = theta.value() / geom.char_length();
    let f1 = char_fn(geom, alpha);
    let f2 = char_fn(geom, 2.0 * alpha);
    let f1_sq = f1.norm_sqr();
    let f2_sq = f2.norm_sqr();
    let cross = (f1 * f1 * f2.conj()).re;
    n * (2.0 * (n - 3.0) - 4.0 * n * (n - 2.0) * f1_sq + n.powi(3) * f1_sq * f1_sq + n * f2_sq
        - 2.0 * n * n * cross)
}

/// Fourth moment ⟨J_x⁴⟩ of the evolved chain singlet,
/// (1/16)·{3N² - 2N - (6N-8)/(N-1)·I₂ + 3/((N-1)(N-3))·I₄}.
pub fn jx4_chain(geom: &ChainGeometry, theta: PhasePoint, n: usize) -> Result<f64> {
    check_chain(geom, n, 4)?;
    let nf = n as f64;
    let i2 = i2_chain(geom, theta);
    let i4 = i4_chain_char_fn(geom, theta);
    Ok(
        (3.0 * nf * nf - 2.0 * nf - (6.0 * nf - 8.0) / (nf - 1.0) * i2
            + 3.0 / ((nf - 1.0) * (nf - 3.0)) * i4)
            / 16.0,
    )
}

/// Analytic derivative ∂_Θ ⟨J_x²⟩ = -(C·C' + S·S') / (2(N-1)) with
/// C' = -Σ (z_n/L) s_n and S' = Σ (z_n/L) c_n.
pub fn djx2_dtheta_chain(geom: &ChainGeometry, theta: PhasePoint, n: usize) -> Result<f64> {
    check_chain(geom, n, 2)?;
    let nf = n as f64;
    let (c, s) = trig_sums(geom, theta);
    let inv_l = 1.0 / geom.char_length();
    let mut dc = CompensatedSum::default();
    let mut ds = CompensatedSum::default();
    for (&z, (cn, sn)) in geom.positions().iter().zip(site_phases(geom, theta)) {
        dc.add(-z * inv_l * sn);
        ds.add(z * inv_l * cn);
    }
    Ok(-(c * dc.total() + s * ds.total()) / (2.0 * (nf - 1.0)))
}

pub(crate) fn clamp_variance(var: f64) -> Result<f64> {
    if var < -VARIANCE_CLAMP {
        return Err(Error::NumericalInconsistency(format!(
            "variance of J_x² computed as {var}, beyond the cancellation clamp"
        )));
    }
    Ok(var.max(0.0))
}

pub(crate) fn error_propagation(derivative: f64, variance: f64) -> f64 {
    if derivative == 0.0 || variance == 0.0 {
        0.0
    } else {
        derivative.abs() / variance.sqrt()
    }
}

/// Inverse estimation precision (ΔΘ)⁻¹ = |∂_Θ⟨J_x²⟩| / √(ΔJ_x²)².
///
/// At Θ = 0 the 0/0 limit is resolved analytically and the maximal
/// precision √(N[σ²-cov]/L²) is returned; at interior stationary points the
/// precision is zero.
pub fn precision_chain(geom: &ChainGeometry, theta: PhasePoint, n: usize) -> Result<f64> {
    check_chain(geom, n, 4)?;
    if theta.value() == 0.0 {
        return Ok(precision_zero_chain(geom, n)?.max(0.0).sqrt());
    }
    let jx2 = jx2_chain(geom, theta, n)?;
    let jx4 = jx4_chain(geom, theta, n)?;
    let var = clamp_variance(jx4 - jx2 * jx2)?;
    let d = djx2_dtheta_chain(geom, theta, n)?;
    Ok(error_propagation(d, var))
}

/// Squared inverse precision (ΔΘ)⁻² at Θ = 0, N·[σ² - cov(z₁,z₂)]/L²;
/// equals (N² + N³)/12 for the equidistant chain.
pub fn precision_zero_chain(geom: &ChainGeometry, n: usize) -> Result<f64> {
    check_chain(geom, n, 4)?;
    let stats = crate::ensemble::position_stats(geom)?;
    let l = geom.char_length();
    Ok(n as f64 * (stats.variance - stats.pair_covariance) / (l * l))
}

/// Evaluate second/fourth moments, variance, and inverse precision on a grid.
pub fn sweep_chain(geom: &ChainGeometry, n: usize, thetas: &[f64]) -> Result<MomentCurve> {
    check_chain(geom, n, 4)?;
    let mut curve = MomentCurve::with_capacity(thetas.len());
    for &t in thetas {
        let theta = PhasePoint::new(t)?;
        let jx2 = jx2_chain(geom, theta, n)?;
        let jx4 = jx4_chain(geom, theta, n)?;
        let var = clamp_variance(jx4 - jx2 * jx2)?;
        let inv_prec = precision_chain(geom, theta, n)?;
        curve.push(t, jx2, jx4, var, inv_prec, 0);
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn theta(t: f64) -> PhasePoint {
        PhasePoint::new(t).unwrap()
    }

    #[test]
    fn i2_at_zero_phase() {
        for n in [2usize, 5, 8] {
            let g = ChainGeometry::equidistant(n, 1.0, 0.3).unwrap();
            let nf = n as f64;
            assert!((i2_chain(&g, theta(0.0)) - nf * (nf - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn i2_two_sites_is_cosine() {
        // Σ_{n≠m} cos((z_n - z_m)Θ/L) for two sites one unit apart is 2cosΘ.
        let g = ChainGeometry::new(vec![0.0, 1.0], 1.0).unwrap();
        for t in [0.1, 0.9, 2.4, -1.3] {
            let got = i2_chain(&g, theta(t));
            assert!((got - 2.0 * t.cos()).abs() < 1e-13, "Θ={t}");
        }
    }

    #[test]
    fn i2_equidistant_eight_at_pi() {
        let g = ChainGeometry::equidistant(8, 1.0, 0.0).unwrap();
        let got = i2_chain(&g, theta(PI));
        assert!((got + 8.0).abs() < 1e-12, "I₂ = {got}");
    }

    #[test]
    fn jx2_starts_at_zero() {
        for n in [2usize, 4, 8] {
            let g = ChainGeometry::equidistant(n, 0.7, -1.9).unwrap();
            assert!(jx2_chain(&g, theta(0.0), n).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn jx2_equidistant_eight_at_pi() {
        let g = ChainGeometry::equidistant(8, 1.0, 0.0).unwrap();
        let got = jx2_chain(&g, theta(PI), 8).unwrap();
        assert!((got - 16.0 / 7.0).abs() < 1e-12, "⟨Jx²⟩ = {got}");
    }

    #[test]
    fn jx2_two_qubits_closed_form() {
        // Exact evolution of the two-qubit singlet gives (1 - cosΘ)/2.
        let g = ChainGeometry::new(vec![0.0, 1.0], 1.0).unwrap();
        for t in [0.0, 0.3, 1.7, PI, 5.0] {
            let got = jx2_chain(&g, theta(t), 2).unwrap();
            assert!((got - (1.0 - t.cos()) / 2.0).abs() < 1e-13, "Θ={t}");
        }
    }

    #[test]
    fn jx2_rejects_mismatched_length() {
        let g = ChainGeometry::equidistant(4, 1.0, 0.0).unwrap();
        assert!(matches!(
            jx2_chain(&g, theta(0.1), 6),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn i4_power_sum_at_zero_phase() {
        for n in [4usize, 6, 9] {
            let g = ChainGeometry::equidistant(n, 1.0, 0.2).unwrap();
            let nf = n as f64;
            let expected = nf * (nf - 1.0) * (nf - 2.0) * (nf - 3.0);
            let got = i4_chain_power_sum(&g, theta(0.0));
            assert!((got - expected).abs() < 1e-9 * expected.max(1.0), "N={n}");
        }
    }

    #[test]
    fn i4_power_sum_matches_quadruple_loop() {
        // O(N⁴) brute force over distinct index quadruples.
        let g = ChainGeometry::equidistant(4, 1.0, 0.0).unwrap();
        let t = 0.7;
        let cs: Vec<(f64, f64)> = g
            .positions()
            .iter()
            .map(|&z| ((z * t).cos(), (z * t).sin()))
            .collect();
        let mut expected = 0.0;
        let n = 4;
        for k in 0..n {
            for l in 0..n {
                for m in 0..n {
                    for p in 0..n {
                        if k == l || k == m || k == p || l == m || l == p || m == p {
                            continue;
                        }
                        let (ck, sk) = cs[k];
                        let (cl, sl) = cs[l];
                        let (cm, sm) = cs[m];
                        let (cp, sp) = cs[p];
                        expected += ck * cl * cm * cp + sk * sl * sm * sp + 2.0 * ck * cl * sm * sp;
                    }
                }
            }
        }
        let got = i4_chain_power_sum(&g, theta(t));
        assert!((got - expected).abs() < 1e-11, "{got} vs {expected}");
    }

    #[test]
    fn i4_empty_for_two_sites() {
        let g = ChainGeometry::new(vec![0.0, 1.0], 1.0).unwrap();
        for t in [0.0, 0.4, 2.2] {
            assert!(i4_chain_power_sum(&g, theta(t)).abs() < 1e-13, "Θ={t}");
            assert!(i4_chain_char_fn(&g, theta(t)).abs() < 1e-12, "Θ={t}");
        }
    }

    #[test]
    fn i4_char_fn_at_zero_phase() {
        for n in [4usize, 7, 12] {
            let g = ChainGeometry::equidistant(n, 1.0, -0.6).unwrap();
            let nf = n as f64;
            let expected = nf * (nf - 1.0) * (nf - 2.0) * (nf - 3.0);
            let got = i4_chain_char_fn(&g, theta(0.0));
            assert!((got - expected).abs() < 1e-9 * expected, "N={n}");
        }
    }

    #[test]
    fn i4_forms_agree_on_a_large_random_chain() {
        // Fixed irregular 60-site chain; both routes run in O(N).
        let positions: Vec<f64> = (0..60)
            .map(|k| {
                let x = k as f64;
                x + 0.37 * (1.7 * x).sin() - 0.21 * (0.9 * x + 1.0).cos()
            })
            .collect();
        let g = ChainGeometry::new(positions, 1.0).unwrap();
        let t = theta(1.3);
        let a = i4_chain_power_sum(&g, t);
        let b = i4_chain_char_fn(&g, t);
        assert!(
            (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0),
            "{a} vs {b}"
        );
    }

    #[test]
    fn jx4_vanishes_at_zero_phase() {
        for n in [4usize, 6, 8] {
            let g = ChainGeometry::equidistant(n, 1.3, 0.8).unwrap();
            let got = jx4_chain(&g, theta(0.0), n).unwrap();
            assert!(got.abs() < 1e-10, "N={n}: {got}");
        }
    }

    #[test]
    fn jx4_consistent_between_i4_forms() {
        let g = ChainGeometry::equidistant(6, 1.0, 0.0).unwrap();
        let t = theta(PI / 3.0);
        let nf = 6.0;
        let i2 = i2_chain(&g, t);
        let via_form = |i4: f64| {
            (3.0 * nf * nf - 2.0 * nf - (6.0 * nf - 8.0) / (nf - 1.0) * i2
                + 3.0 / ((nf - 1.0) * (nf - 3.0)) * i4)
                / 16.0
        };
        let a = via_form(i4_chain_power_sum(&g, t));
        let b = via_form(i4_chain_char_fn(&g, t));
        let got = jx4_chain(&g, t, 6).unwrap();
        assert!((a - b).abs() < 1e-10);
        assert!((got - b).abs() < 1e-12);
    }

    #[test]
    fn jx4_rejects_two_sites() {
        let g = ChainGeometry::new(vec![0.0, 1.0], 1.0).unwrap();
        assert!(matches!(
            jx4_chain(&g, theta(0.5), 2),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn derivative_vanishes_at_origin() {
        let g = ChainGeometry::equidistant(6, 1.0, 0.4).unwrap();
        assert_eq!(djx2_dtheta_chain(&g, theta(0.0), 6).unwrap(), 0.0);
    }

    #[test]
    fn derivative_two_qubits_closed_form() {
        // d/dΘ of (1 - cosΘ)/2 is sinΘ/2.
        let g = ChainGeometry::new(vec![0.0, 1.0], 1.0).unwrap();
        for t in [0.2, 1.1, 2.9] {
            let got = djx2_dtheta_chain(&g, theta(t), 2).unwrap();
            assert!((got - t.sin() / 2.0).abs() < 1e-13, "Θ={t}");
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let g = ChainGeometry::new(vec![0.11, 0.83, 1.77, 2.41, 3.96, 5.02], 1.0).unwrap();
        let h = 1e-6;
        for t in [0.37, 1.21, 2.83, 4.55] {
            let fd = (jx2_chain(&g, theta(t + h), 6).unwrap()
                - jx2_chain(&g, theta(t - h), 6).unwrap())
                / (2.0 * h);
            let got = djx2_dtheta_chain(&g, theta(t), 6).unwrap();
            assert!((got - fd).abs() < 1e-8, "Θ={t}: {got} vs {fd}");
        }
    }

    #[test]
    fn precision_zero_equidistant_closed_form() {
        let g = ChainGeometry::equidistant(8, 1.0, 0.0).unwrap();
        let got = precision_zero_chain(&g, 8).unwrap();
        assert!((got - 48.0).abs() < 1e-10, "{got}");

        let g = ChainGeometry::equidistant(4, 1.0, 0.0).unwrap();
        let got = precision_zero_chain(&g, 4).unwrap();
        assert!((got - 20.0 / 3.0).abs() < 1e-12, "{got}");
    }

    #[test]
    fn precision_zero_matches_small_theta_limit() {
        // Arbitrary chain: the finite-Θ error-propagation value at Θ = 1e-4
        // approaches the closed form within 0.1% relative.
        let g = ChainGeometry::new(vec![0.05, 0.92, 2.11, 2.77, 4.31, 5.5], 1.0).unwrap();
        let closed = precision_zero_chain(&g, 6).unwrap();
        let finite = precision_chain(&g, theta(1e-4), 6).unwrap().powi(2);
        assert!(
            (finite - closed).abs() < 1e-3 * closed,
            "{finite} vs {closed}"
        );
    }

    #[test]
    fn precision_at_origin_reports_maximum() {
        let g = ChainGeometry::equidistant(8, 1.0, 0.0).unwrap();
        let got = precision_chain(&g, theta(0.0), 8).unwrap();
        assert!((got - 48f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn precision_zero_at_stationary_point() {
        // For the equidistant chain ⟨Jx²⟩ peaks at Θ = π, so the inverse
        // precision vanishes there.
        let g = ChainGeometry::equidistant(8, 1.0, 0.0).unwrap();
        let d = djx2_dtheta_chain(&g, theta(PI), 8).unwrap();
        assert!(d.abs() < 1e-12, "dΘ = {d}");
        let got = precision_chain(&g, theta(PI), 8).unwrap();
        assert!(got.abs() < 1e-10, "(ΔΘ)⁻¹ = {got}");
    }

    #[test]
    fn sweep_matches_scalar_calls_and_revives() {
        let g = ChainGeometry::equidistant(8, 1.0, 0.0).unwrap();
        let grid: Vec<f64> = (0..=1000).map(|k| k as f64 / 1000.0 * 2.0 * PI).collect();
        let curve = sweep_chain(&g, 8, &grid).unwrap();
        curve.validate().unwrap();
        assert!(curve.jx2[0].abs() < 1e-12);
        assert!(curve.jx2[1000].abs() < 1e-12);

        let single = sweep_chain(&g, 8, &[PI]).unwrap();
        assert_eq!(single.jx2[0], jx2_chain(&g, theta(PI), 8).unwrap());

        let empty = sweep_chain(&g, 8, &[]).unwrap();
        assert!(empty.is_empty());
    }
}
