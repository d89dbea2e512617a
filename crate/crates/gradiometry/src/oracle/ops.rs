//! Single-site spin matrices and collective operators on the N-site product
//! space.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::correlators::Axis;
use crate::ensemble::Spin;

pub type CMat = DMatrix<Complex64>;

/// The (2j+1)-dimensional matrices (j_x, j_y, j_z) in the j_z eigenbasis,
/// ordered m = j, j-1, …, -j.
pub fn spin_matrices(spin: Spin) -> (CMat, CMat, CMat) {
    let d = spin.multiplicity();
    let j = spin.value();
    let mut raising = CMat::zeros(d, d);
    for k in 1..d {
        let m = j - k as f64;
        raising[(k - 1, k)] = Complex64::from((j * (j + 1.0) - m * (m + 1.0)).sqrt());
    }
    let lowering = raising.adjoint();
    let jx = (&raising + &lowering) * Complex64::from(0.5);
    let jy = (&raising - &lowering) * Complex64::new(0.0, -0.5);
    let mut jz = CMat::zeros(d, d);
    for k in 0..d {
        jz[(k, k)] = Complex64::from(j - k as f64);
    }
    (jx, jy, jz)
}

/// 1 ⊗ … ⊗ op ⊗ … ⊗ 1 with op acting on `site` (site 0 is the leftmost
/// factor, i.e. the most significant digit of a basis index).
pub fn embed_site(op: &CMat, n_sites: usize, site: usize) -> CMat {
    let d = op.nrows();
    let left = CMat::identity(d.pow(site as u32), d.pow(site as u32));
    let right_dim = d.pow((n_sites - 1 - site) as u32);
    let right = CMat::identity(right_dim, right_dim);
    left.kronecker(op).kronecker(&right)
}

/// Collective operator J_l = Σ_n j_l^(n) over the N-site product space.
#[derive(Debug, Clone)]
pub struct CollectiveOperator {
    axis: Axis,
    n_sites: usize,
    spin: Spin,
    matrix: CMat,
}

impl CollectiveOperator {
    pub fn new(n_sites: usize, spin: Spin, axis: Axis) -> Self {
        let (jx, jy, jz) = spin_matrices(spin);
        let site_op = match axis {
            Axis::X => jx,
            Axis::Y => jy,
            Axis::Z => jz,
        };
        let dim = spin.multiplicity().pow(n_sites as u32);
        let mut matrix = CMat::zeros(dim, dim);
        for site in 0..n_sites {
            matrix += embed_site(&site_op, n_sites, site);
        }
        CollectiveOperator {
            axis,
            n_sites,
            spin,
            matrix,
        }
    }

    pub fn axis(&self) -> Axis {
        self.axis
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

    /// J_l^p by repeated multiplication, p ≥ 1.
    pub fn power(&self, p: u32) -> CMat {
        let mut acc = self.matrix.clone();
        for _ in 1..p {
            acc = &acc * &self.matrix;
        }
        acc
    }
}
