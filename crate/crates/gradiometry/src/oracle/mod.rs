//! Dense exact quantum simulation at small particle number: the true
//! permutationally invariant singlet, its evolution under the gradient, the
//! local white-noise channel, and arbitrary collective moments. This is the
//! ground truth every closed-form expression in the crate is checked
//! against.
//!
//! Everything is stored as dense complex matrices; the intended regime is
//! (2j+1)^N ≲ 2000, where clarity beats cleverness.

mod io;
mod ops;
mod state;

pub use io::{read_matrix, write_matrix, DUMP_MAGIC};
pub use ops::{spin_matrices, CMat, CollectiveOperator};
pub use state::{
    build_singlet_j0, build_singlet_pair_mixture, depolarize, evolve_gradient, expectation,
    jx_distribution, moment, oracle_precision, projector_jx_value, rotate_collective,
    DensityOperator, J0_EIGENVALUE_CUTOFF, MAX_ORACLE_DIM,
};
