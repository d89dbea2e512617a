//! Density operators, singlet constructions, gradient evolution, the local
//! white-noise channel, and collective-moment extraction.

use std::collections::BTreeMap;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use super::ops::{spin_matrices, CMat, CollectiveOperator};
use crate::correlators::Axis;
use crate::ensemble::{ChainGeometry, CompensatedSum, PhasePoint, Spin};
use crate::error::{Error, Result};

/// Eigenvalues of Σ_l J_l² below this are assigned to the singlet subspace;
/// the spectrum gaps are O(1) in units of ħ² = 1.
pub const J0_EIGENVALUE_CUTOFF: f64 = 1e-9;

/// Largest product-space dimension the dense oracle accepts.
pub const MAX_ORACLE_DIM: usize = 2048;

/// Dense Hermitian trace-one operator over the (2j+1)^N product space.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    n_sites: usize,
    spin: Spin,
    matrix: CMat,
}

impl DensityOperator {
    pub fn from_matrix(n_sites: usize, spin: Spin, matrix: CMat) -> Result<Self> {
        let dim = checked_dim(n_sites, spin)?;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {dim}×{dim} matrix for {n_sites} sites, got {}×{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(DensityOperator {
            n_sites,
            spin,
            matrix,
        })
    }

    /// Fully mixed (white-noise) state 1/dim.
    pub fn maximally_mixed(n_sites: usize, spin: Spin) -> Result<Self> {
        let dim = checked_dim(n_sites, spin)?;
        let m = CMat::identity(dim, dim) * Complex64::from(1.0 / dim as f64);
        Ok(DensityOperator {
            n_sites,
            spin,
            matrix: m,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        let mut tr = Complex64::default();
        for i in 0..self.dim() {
            tr += self.matrix[(i, i)];
        }
        tr
    }

    pub fn frobenius_distance(&self, other: &DensityOperator) -> f64 {
        (&self.matrix - &other.matrix).norm()
    }

    /// Check Hermiticity and unit trace to 1e-12 and positive
    /// semidefiniteness down to eigenvalues of -1e-10.
    pub fn validate(&self) -> Result<()> {
        let herm = (&self.matrix - self.matrix.adjoint()).norm();
        if herm > 1e-12 {
            return Err(Error::NumericalInconsistency(format!(
                "non-Hermitian density operator: |ρ - ρ†| = {herm:e}"
            )));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(Error::NumericalInconsistency(format!(
                "trace {tr} differs from one"
            )));
        }
        if !positive_semidefinite(&self.matrix, 1e-10) {
            return Err(Error::NumericalInconsistency(
                "density operator has an eigenvalue below -1e-10".into(),
            ));
        }
        Ok(())
    }

    /// Trace out the listed sites, keeping the remaining ones in order.
    pub fn partial_trace(&self, trace_out: &[usize]) -> Result<DensityOperator> {
        let mut traced: Vec<usize> = trace_out.to_vec();
        traced.sort_unstable();
        traced.dedup();
        if traced.len() != trace_out.len() || traced.iter().any(|&s| s >= self.n_sites) {
            return Err(Error::Domain(format!(
                "invalid sites to trace out: {trace_out:?}"
            )));
        }
        if traced.len() == self.n_sites {
            return Err(Error::Domain("cannot trace out every site".into()));
        }
        let kept: Vec<usize> = (0..self.n_sites).filter(|s| !traced.contains(s)).collect();
        let d = self.spin.multiplicity();
        let stride = |site: usize| d.pow((self.n_sites - 1 - site) as u32);
        let rdim = d.pow(kept.len() as u32);
        let tdim = d.pow(traced.len() as u32);

        // Full-space offset of a reduced index: distribute its digits over
        // the kept sites.
        let spread = |reduced: usize, sites: &[usize]| -> usize {
            let mut rem = reduced;
            let mut offset = 0;
            for (rank, &site) in sites.iter().enumerate() {
                let digit = (rem / d.pow((sites.len() - 1 - rank) as u32)) % d;
                offset += digit * stride(site);
                rem %= d.pow((sites.len() - 1 - rank) as u32).max(1);
            }
            offset
        };

        let mut reduced = CMat::zeros(rdim, rdim);
        for ra in 0..rdim {
            let base_a = spread(ra, &kept);
            for rb in 0..rdim {
                let base_b = spread(rb, &kept);
                let mut acc = Complex64::default();
                for t in 0..tdim {
                    let t_offset = spread(t, &traced);
                    acc += self.matrix[(base_a + t_offset, base_b + t_offset)];
                }
                reduced[(ra, rb)] = acc;
            }
        }
        DensityOperator::from_matrix(kept.len(), self.spin, reduced)
    }
}

/// Hermitian Cholesky with an explicit positivity test on every pivot:
/// true iff every eigenvalue of `m` exceeds -shift.
fn positive_semidefinite(m: &CMat, shift: f64) -> bool {
    let n = m.nrows();
    let mut l = CMat::zeros(n, n);
    for j in 0..n {
        let mut pivot = m[(j, j)].re + shift;
        for k in 0..j {
            pivot -= l[(j, k)].norm_sqr();
        }
        if pivot <= 0.0 || !pivot.is_finite() {
            return false;
        }
        let root = pivot.sqrt();
        l[(j, j)] = Complex64::from(root);
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / root;
        }
    }
    true
}

fn checked_dim(n_sites: usize, spin: Spin) -> Result<usize> {
    if n_sites == 0 {
        return Err(Error::Domain("need at least one site".into()));
    }
    let d = spin.multiplicity();
    let mut dim: usize = 1;
    for _ in 0..n_sites {
        dim = dim
            .checked_mul(d)
            .filter(|&v| v <= MAX_ORACLE_DIM)
            .ok_or_else(|| {
                Error::Domain(format!(
                    "(2j+1)^N = {d}^{n_sites} exceeds the exact-simulation budget of {MAX_ORACLE_DIM}"
                ))
            })?;
    }
    Ok(dim)
}

fn kron_power(u: &CMat, n: usize) -> CMat {
    let mut acc = CMat::identity(1, 1);
    for _ in 0..n {
        acc = acc.kronecker(u);
    }
    acc
}

fn recurse_matchings(
    available: &[usize],
    current: &mut Vec<(usize, usize)>,
    out: &mut Vec<Vec<(usize, usize)>>,
) {
    if available.is_empty() {
        out.push(current.clone());
        return;
    }
    let first = available[0];
    for k in 1..available.len() {
        let partner = available[k];
        let rest: Vec<usize> = available[1..]
            .iter()
            .copied()
            .filter(|&x| x != partner)
            .collect();
        current.push((first, partner));
        recurse_matchings(&rest, current, out);
        current.pop();
    }
}

/// All perfect matchings of 0..n, pairing the lowest unpaired index with
/// each remaining index in turn; the order is deterministic.
fn perfect_matchings(n: usize) -> Vec<Vec<(usize, usize)>> {
    let items: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    recurse_matchings(&items, &mut Vec::new(), &mut out);
    out
}

/// Uniform mixture over all (N-1)!! tensor products of two-particle
/// singlets — the permutationally invariant singlet of N qubits.
pub fn build_singlet_pair_mixture(n: usize) -> Result<DensityOperator> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::NoSinglet(format!(
            "pair-singlet mixture needs an even particle number, got {n}"
        )));
    }
    if n > 10 {
        return Err(Error::Domain(format!(
            "pair-mixture construction supports N ≤ 10, got {n}"
        )));
    }
    let dim = 1usize << n;
    let pairs = n / 2;
    let amp = (1.0 / 2.0f64.sqrt()).powi(pairs as i32);
    let matchings = perfect_matchings(n);
    let mut m = CMat::zeros(dim, dim);
    let mut entries: Vec<(usize, f64)> = Vec::with_capacity(1 << pairs);
    for matching in &matchings {
        entries.clear();
        for mask in 0u32..(1 << pairs) {
            let mut idx = 0usize;
            let mut value = amp;
            for (p, &(a, b)) in matching.iter().enumerate() {
                if (mask >> p) & 1 == 0 {
                    // |↑↓⟩ component: site b carries the lowered spin.
                    idx |= 1 << (n - 1 - b);
                } else {
                    idx |= 1 << (n - 1 - a);
                    value = -value;
                }
            }
            entries.push((idx, value));
        }
        for &(ia, va) in &entries {
            for &(ib, vb) in &entries {
                m[(ia, ib)] += Complex64::from(va * vb);
            }
        }
    }
    m /= Complex64::from(matchings.len() as f64);
    DensityOperator::from_matrix(n, Spin::HALF, m)
}

/// Fully mixed state over the zero eigenspace of Σ_l J_l², found by dense
/// Hermitian eigendecomposition with cutoff [`J0_EIGENVALUE_CUTOFF`].
pub fn build_singlet_j0(n: usize, spin: Spin) -> Result<DensityOperator> {
    let dim = checked_dim(n, spin)?;
    let mut hs = CMat::zeros(dim, dim);
    for axis in [Axis::X, Axis::Y, Axis::Z] {
        hs += CollectiveOperator::new(n, spin, axis).power(2);
    }
    let eig = SymmetricEigen::new(hs);
    let zero_modes: Vec<usize> = (0..dim)
        .filter(|&k| eig.eigenvalues[k].abs() < J0_EIGENVALUE_CUTOFF)
        .collect();
    if zero_modes.is_empty() {
        return Err(Error::NoSinglet(format!(
            "the J = 0 subspace of {n} spin-{} particles is empty",
            spin.value()
        )));
    }
    let weight = Complex64::from(1.0 / zero_modes.len() as f64);
    let mut m = CMat::zeros(dim, dim);
    for &k in &zero_modes {
        let v = eig.eigenvectors.column(k);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] += weight * v[i] * v[j].conj();
            }
        }
    }
    DensityOperator::from_matrix(n, spin, m)
}

/// Conjugate by the diagonal gradient unitary exp[-iΘ Σ_n (z_n/L) j_z^(n)]:
/// an elementwise phase mask, no matrix exponential.
pub fn evolve_gradient(
    rho: &DensityOperator,
    geom: &ChainGeometry,
    theta: PhasePoint,
) -> Result<DensityOperator> {
    if geom.len() != rho.n_sites {
        return Err(Error::DimensionMismatch(format!(
            "geometry holds {} positions but the state has {} sites",
            geom.len(),
            rho.n_sites
        )));
    }
    let dim = rho.dim();
    let j = rho.spin.value();
    let inv_l = 1.0 / geom.char_length();
    let d = rho.spin.multiplicity();
    let mut phases = vec![0.0f64; dim];
    for (idx, phase) in phases.iter_mut().enumerate() {
        let mut rem = idx;
        let mut phi = 0.0;
        for site in (0..rho.n_sites).rev() {
            let digit = rem % d;
            rem /= d;
            phi += geom.positions()[site] * inv_l * (j - digit as f64);
        }
        *phase = phi;
    }
    let th = theta.value();
    let m = CMat::from_fn(dim, dim, |a, b| {
        Complex64::from_polar(1.0, -th * (phases[a] - phases[b])) * rho.matrix[(a, b)]
    });
    DensityOperator::from_matrix(rho.n_sites, rho.spin, m)
}

/// Tr(ρ·M) for Hermitian M, with the imaginary residue asserted small.
pub fn expectation(rho: &DensityOperator, op: &CMat) -> Result<f64> {
    let dim = rho.dim();
    if op.nrows() != dim || op.ncols() != dim {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}×{}, state is {dim}×{dim}",
            op.nrows(),
            op.ncols()
        )));
    }
    let mut re = CompensatedSum::default();
    let mut im = CompensatedSum::default();
    for i in 0..dim {
        for k in 0..dim {
            let z = rho.matrix[(i, k)] * op[(k, i)];
            re.add(z.re);
            im.add(z.im);
        }
    }
    let (re, im) = (re.total(), im.total());
    if im.abs() > 1e-12 * (1.0 + re.abs()) {
        return Err(Error::NumericalInconsistency(format!(
            "imaginary residue {im:e} in an expectation value"
        )));
    }
    Ok(re)
}

/// ⟨J_axis^power⟩ for power 1…4.
pub fn moment(rho: &DensityOperator, axis: Axis, power: u32) -> Result<f64> {
    if !(1..=4).contains(&power) {
        return Err(Error::Domain(format!(
            "moment power must lie in 1..=4, got {power}"
        )));
    }
    let op = CollectiveOperator::new(rho.n_sites, rho.spin, axis).power(power);
    expectation(rho, &op)
}

/// Local white-noise channel ρ → (1-q)ρ + q·(1/2 ⊗ Tr_site ρ) applied to
/// every site in turn. Defined for qubits.
pub fn depolarize(rho: &DensityOperator, q: f64) -> Result<DensityOperator> {
    if rho.spin != Spin::HALF {
        return Err(Error::Unsupported(
            "the local white-noise channel is defined for spin-1/2 sites".into(),
        ));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain(format!("q must lie in [0, 1], got {q}")));
    }
    let n = rho.n_sites;
    let dim = rho.dim();
    let mut m = rho.matrix.clone();
    for site in 0..n {
        let bit = 1usize << (n - 1 - site);
        let next = CMat::from_fn(dim, dim, |a, b| {
            let mut v = Complex64::from(1.0 - q) * m[(a, b)];
            if (a & bit) == (b & bit) {
                v += Complex64::from(0.5 * q) * (m[(a & !bit, b & !bit)] + m[(a | bit, b | bit)]);
            }
            v
        });
        m = next;
    }
    DensityOperator::from_matrix(n, Spin::HALF, m)
}

/// Conjugate by the collective rotation exp(-iθ J_n̂) = u^{⊗N}.
pub fn rotate_collective(
    rho: &DensityOperator,
    direction: [f64; 3],
    angle: f64,
) -> Result<DensityOperator> {
    let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::Domain(
            "rotation axis must be a nonzero vector".into(),
        ));
    }
    let (jx, jy, jz) = spin_matrices(rho.spin);
    let generator = jx * Complex64::from(direction[0] / norm)
        + jy * Complex64::from(direction[1] / norm)
        + jz * Complex64::from(direction[2] / norm);
    let eig = SymmetricEigen::new(generator);
    let d = rho.spin.multiplicity();
    let mut u = CMat::zeros(d, d);
    for k in 0..d {
        let phase = Complex64::from_polar(1.0, -angle * eig.eigenvalues[k]);
        let v = eig.eigenvectors.column(k);
        for i in 0..d {
            for j in 0..d {
                u[(i, j)] += phase * v[i] * v[j].conj();
            }
        }
    }
    let big = kron_power(&u, rho.n_sites);
    let m = &big * &rho.matrix * big.adjoint();
    DensityOperator::from_matrix(rho.n_sites, rho.spin, m)
}

/// Probability distribution of the collective J_x outcomes: pairs (m, p)
/// sorted by ascending m. The per-site eigenbasis of j_x is computed once
/// and the total eigenvalue read off the digit sum, so the grouping is
/// exact.
pub fn jx_distribution(rho: &DensityOperator) -> Result<Vec<(f64, f64)>> {
    let (jx, _, _) = spin_matrices(rho.spin);
    let d = rho.spin.multiplicity();
    let eig = SymmetricEigen::new(jx);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut u = CMat::zeros(d, d);
    for (col, &k) in order.iter().enumerate() {
        u.set_column(col, &eig.eigenvectors.column(k));
    }
    let big = kron_power(&u, rho.n_sites);
    let t = big.adjoint() * &rho.matrix * &big;

    // Digit k of a transformed index means site eigenvalue m = j - k, so
    // 2·m_tot = N·2j - 2·(digit sum) is an exact integer key.
    let twice_j = (d - 1) as i64;
    let mut bins: BTreeMap<i64, f64> = BTreeMap::new();
    for idx in 0..rho.dim() {
        let mut rem = idx;
        let mut digit_sum: i64 = 0;
        for _ in 0..rho.n_sites {
            digit_sum += (rem % d) as i64;
            rem /= d;
        }
        let key = rho.n_sites as i64 * twice_j - 2 * digit_sum;
        *bins.entry(key).or_insert(0.0) += t[(idx, idx)].re;
    }
    Ok(bins
        .into_iter()
        .map(|(key, p)| (key as f64 / 2.0, p))
        .collect())
}

/// Tr(ρ·P_{J_x = m}), zero when m is outside the spectrum. Outcomes are
/// matched with tolerance 1e-9.
pub fn projector_jx_value(rho: &DensityOperator, m: f64) -> Result<f64> {
    let dist = jx_distribution(rho)?;
    Ok(dist
        .iter()
        .find(|&&(mk, _)| (mk - m).abs() < 1e-9)
        .map_or(0.0, |&(_, p)| p))
}

/// Error-propagation inverse precision from sampled oracle moments, with a
/// five-point central-difference derivative on a uniform Θ grid.
pub fn oracle_precision(thetas: &[f64], jx2: &[f64], jx4: &[f64], index: usize) -> Result<f64> {
    let n = thetas.len();
    if n < 5 || jx2.len() != n || jx4.len() != n {
        return Err(Error::Grid(
            "need at least five uniformly spaced samples per column".into(),
        ));
    }
    if index < 2 || index + 2 >= n {
        return Err(Error::Grid(format!(
            "index {index} too close to the grid edge for a five-point stencil"
        )));
    }
    let h = thetas[1] - thetas[0];
    if !(h > 0.0) {
        return Err(Error::Grid("grid must be strictly increasing".into()));
    }
    for k in 1..n {
        if ((thetas[k] - thetas[k - 1]) - h).abs() > 1e-9 * h.abs() {
            return Err(Error::Grid("grid spacing is not uniform".into()));
        }
    }
    let derivative = (-jx2[index + 2] + 8.0 * jx2[index + 1] - 8.0 * jx2[index - 1]
        + jx2[index - 2])
        / (12.0 * h);
    let var = crate::chain::clamp_variance(jx4[index] - jx2[index] * jx2[index])?;
    Ok(crate::chain::error_propagation(derivative, var))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn theta(t: f64) -> PhasePoint {
        PhasePoint::new(t).unwrap()
    }

    #[test]
    fn pair_mixture_two_qubits_is_pure_singlet() {
        let rho = build_singlet_pair_mixture(2).unwrap();
        rho.validate().unwrap();
        // |Ψ⁻⟩ = (|↑↓⟩ - |↓↑⟩)/√2 over basis indices 1 and 2.
        let m = rho.matrix();
        assert!((m[(1, 1)].re - 0.5).abs() < 1e-15);
        assert!((m[(2, 2)].re - 0.5).abs() < 1e-15);
        assert!((m[(1, 2)].re + 0.5).abs() < 1e-15);
        assert!(m[(0, 0)].norm() < 1e-15);
        assert!(m[(3, 3)].norm() < 1e-15);
    }

    #[test]
    fn matching_count_is_double_factorial() {
        assert_eq!(perfect_matchings(2).len(), 1);
        assert_eq!(perfect_matchings(4).len(), 3);
        assert_eq!(perfect_matchings(6).len(), 15);
        assert_eq!(perfect_matchings(8).len(), 105);
    }

    #[test]
    fn pair_mixture_rejects_odd_or_large() {
        assert!(matches!(
            build_singlet_pair_mixture(3),
            Err(Error::NoSinglet(_))
        ));
        assert!(matches!(
            build_singlet_pair_mixture(12),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn j0_construction_matches_pair_mixture() {
        for n in [2usize, 4, 6] {
            let pairs = build_singlet_pair_mixture(n).unwrap();
            let j0 = build_singlet_j0(n, Spin::HALF).unwrap();
            let dist = pairs.frobenius_distance(&j0);
            assert!(dist < 1e-12, "N={n}: distance {dist:e}");
        }
    }

    #[test]
    fn j0_empty_for_odd_qubits() {
        assert!(matches!(
            build_singlet_j0(3, Spin::HALF),
            Err(Error::NoSinglet(_))
        ));
    }

    #[test]
    fn j0_spin_one_has_vanishing_casimir() {
        let rho = build_singlet_j0(4, Spin::ONE).unwrap();
        rho.validate().unwrap();
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            let v = moment(&rho, axis, 2).unwrap();
            assert!(v.abs() < 1e-12, "{axis:?}: {v}");
        }
    }

    #[test]
    fn singlet_moments_vanish_to_high_order() {
        let rho = build_singlet_pair_mixture(6).unwrap();
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            let op = CollectiveOperator::new(6, Spin::HALF, axis);
            let mut power = op.matrix().clone();
            for m in 1..=6 {
                let v = expectation(&rho, &power).unwrap();
                assert!(v.abs() < 1e-12, "{axis:?}^{m}: {v}");
                power = &power * op.matrix();
            }
        }
    }

    #[test]
    fn evolution_at_zero_phase_is_identity() {
        let rho = build_singlet_pair_mixture(4).unwrap();
        let geom = ChainGeometry::equidistant(4, 1.0, 0.0).unwrap();
        let evolved = evolve_gradient(&rho, &geom, theta(0.0)).unwrap();
        assert!(rho.frobenius_distance(&evolved) < 1e-15);
    }

    #[test]
    fn evolution_two_qubits_closed_form() {
        let rho = build_singlet_pair_mixture(2).unwrap();
        let geom = ChainGeometry::new(vec![0.0, 1.0], 1.0).unwrap();
        for t in [0.0, 0.4, 1.2, PI, 4.9] {
            let evolved = evolve_gradient(&rho, &geom, theta(t)).unwrap();
            let jx2 = moment(&evolved, Axis::X, 2).unwrap();
            assert!((jx2 - (1.0 - t.cos()) / 2.0).abs() < 1e-13, "Θ={t}");
        }
    }

    #[test]
    fn homogeneous_shift_leaves_moments_unchanged() {
        let rho = build_singlet_pair_mixture(4).unwrap();
        let base = ChainGeometry::new(vec![0.0, 0.7, 1.9, 2.4], 1.0).unwrap();
        let shifted = ChainGeometry::new(vec![10.0, 10.7, 11.9, 12.4], 1.0).unwrap();
        for t in [0.5, 1.7] {
            let a = moment(&evolve_gradient(&rho, &base, theta(t)).unwrap(), Axis::X, 2).unwrap();
            let b = moment(
                &evolve_gradient(&rho, &shifted, theta(t)).unwrap(),
                Axis::X,
                2,
            )
            .unwrap();
            assert!((a - b).abs() < 1e-12, "Θ={t}: {a} vs {b}");
        }
    }

    #[test]
    fn gradient_echo_restores_the_state() {
        let rho = build_singlet_pair_mixture(4).unwrap();
        let geom = ChainGeometry::new(vec![0.3, 1.1, 2.9, 3.4], 1.0).unwrap();
        let there = evolve_gradient(&rho, &geom, theta(1.23)).unwrap();
        let back = evolve_gradient(&there, &geom, theta(-1.23)).unwrap();
        assert!(rho.frobenius_distance(&back) < 1e-14);
    }

    #[test]
    fn white_noise_moments() {
        let rho = DensityOperator::maximally_mixed(4, Spin::HALF).unwrap();
        assert!((moment(&rho, Axis::X, 2).unwrap() - 1.0).abs() < 1e-13);

        let rho = DensityOperator::maximally_mixed(3, Spin::ONE).unwrap();
        assert!((moment(&rho, Axis::X, 2).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn depolarize_limits() {
        let rho = build_singlet_pair_mixture(4).unwrap();
        let same = depolarize(&rho, 0.0).unwrap();
        assert!(rho.frobenius_distance(&same) < 1e-15);

        let mixed = depolarize(&rho, 1.0).unwrap();
        let white = DensityOperator::maximally_mixed(4, Spin::HALF).unwrap();
        assert!(mixed.frobenius_distance(&white) < 1e-13);
        mixed.validate().unwrap();
    }

    #[test]
    fn depolarize_rejects_non_qubits() {
        let rho = DensityOperator::maximally_mixed(2, Spin::ONE).unwrap();
        assert!(matches!(depolarize(&rho, 0.3), Err(Error::Unsupported(_))));
    }

    #[test]
    fn rotation_invariance_of_the_singlet() {
        let rho = build_singlet_pair_mixture(4).unwrap();
        for (dir, angle) in [
            ([0.0, 0.0, 1.0], 0.83),
            ([1.0, 0.0, 0.0], 2.1),
            ([0.3, -0.8, 0.51], -1.37),
        ] {
            let rotated = rotate_collective(&rho, dir, angle).unwrap();
            assert!(
                rho.frobenius_distance(&rotated) < 1e-12,
                "dir {dir:?} angle {angle}"
            );
        }
    }

    #[test]
    fn rotation_preserves_validity() {
        let rho = DensityOperator::maximally_mixed(2, Spin::ONE).unwrap();
        let rotated = rotate_collective(&rho, [0.7, 0.2, -0.4], 0.9).unwrap();
        rotated.validate().unwrap();
    }

    #[test]
    fn jx_projector_values() {
        let mixed = DensityOperator::maximally_mixed(4, Spin::HALF).unwrap();
        let p0 = projector_jx_value(&mixed, 0.0).unwrap();
        assert!((p0 - 0.375).abs() < 1e-13, "{p0}");

        let singlet = build_singlet_pair_mixture(4).unwrap();
        let p0 = projector_jx_value(&singlet, 0.0).unwrap();
        assert!((p0 - 1.0).abs() < 1e-12, "{p0}");

        // Outside the spectrum.
        assert_eq!(projector_jx_value(&mixed, 7.5).unwrap(), 0.0);

        // Completeness.
        let evolved = evolve_gradient(
            &singlet,
            &ChainGeometry::equidistant(4, 1.0, 0.0).unwrap(),
            theta(0.9),
        )
        .unwrap();
        let total: f64 = jx_distribution(&evolved)
            .unwrap()
            .iter()
            .map(|&(_, p)| p)
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jx_distribution_second_moment_consistency() {
        let singlet = build_singlet_pair_mixture(4).unwrap();
        let geom = ChainGeometry::equidistant(4, 1.0, 0.0).unwrap();
        let evolved = evolve_gradient(&singlet, &geom, theta(1.1)).unwrap();
        let from_dist: f64 = jx_distribution(&evolved)
            .unwrap()
            .iter()
            .map(|&(m, p)| m * m * p)
            .sum();
        let direct = moment(&evolved, Axis::X, 2).unwrap();
        assert!((from_dist - direct).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_of_singlet_pair() {
        // Tracing two sites of the 4-qubit singlet leaves
        // p_s·|Ψ⁻⟩⟨Ψ⁻| + (1-p_s)·1/4 with p_s = 1/3.
        let rho = build_singlet_pair_mixture(4).unwrap();
        let reduced = rho.partial_trace(&[2, 3]).unwrap();
        reduced.validate().unwrap();
        let pair = build_singlet_pair_mixture(2).unwrap();
        let mixed = DensityOperator::maximally_mixed(2, Spin::HALF).unwrap();
        let expected = DensityOperator::from_matrix(
            2,
            Spin::HALF,
            pair.matrix() * Complex64::from(1.0 / 3.0)
                + mixed.matrix() * Complex64::from(2.0 / 3.0),
        )
        .unwrap();
        assert!(reduced.frobenius_distance(&expected) < 1e-13);
    }

    #[test]
    fn oracle_precision_stencil() {
        // Constant family has zero derivative, hence zero precision.
        let thetas: Vec<f64> = (0..9).map(|k| k as f64 * 0.1).collect();
        let jx2 = vec![1.0; 9];
        let jx4 = vec![3.5; 9];
        assert_eq!(oracle_precision(&thetas, &jx2, &jx4, 4).unwrap(), 0.0);

        assert!(matches!(
            oracle_precision(&thetas, &jx2, &jx4, 1),
            Err(Error::Grid(_))
        ));
        let uneven = vec![0.0, 0.1, 0.25, 0.3, 0.4];
        assert!(matches!(
            oracle_precision(&uneven, &jx2[..5], &jx4[..5], 2),
            Err(Error::Grid(_))
        ));
    }

    #[test]
    fn validate_flags_bad_states() {
        let mut m = CMat::zeros(2, 2);
        m[(0, 0)] = Complex64::from(1.5);
        m[(1, 1)] = Complex64::from(-0.5);
        let rho = DensityOperator::from_matrix(1, Spin::HALF, m).unwrap();
        assert!(rho.validate().is_err());
    }
}
