//! Operator algebra and open-system evolution on truncated multimode spaces.
//!
//! Tensor order: mode 0 is the slowest-varying index of the composite basis,
//! i.e. the basis vector `|n_0, n_1, ..., n_{k-1}>` sits at
//! `sum_i n_i * prod_{j>i} dim_j`.

mod lindblad;
mod operator;
mod space;
mod state;

pub use lindblad::{evolve_lindblad, evolve_lindblad_with, SolverOptions};
pub use operator::{creation, ladder, number_op, qubit_rotation, Operator};
pub use space::ModeSpace;
pub use state::{coherent_amplitudes, coherent_state, displace, displacement_operator, State};

pub use num_complex::Complex64 as C64;

/// Dense complex matrix used for operators and density matrices.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;

/// Upper bound on the composite dimension accepted by dense constructors.
pub const MAX_DENSE_DIM: usize = 4096;
