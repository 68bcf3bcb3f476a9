//! Non-relativistic quantum mechanics with a finite quantum correlation time `tau_c`.
//!
//! The momentum of the particle is modelled as an Ornstein-Uhlenbeck process instead of
//! white noise. The resulting stationary problem lives on the coupled position/momentum
//! plane `(x, q)`; expanding in oscillator eigenfunctions of `q` turns it into a
//! block-tridiagonal system over Hermite modes `n`, which this crate assembles and
//! diagonalizes on a uniform position grid.
//!
//! Module map:
//!
//! * [`quantum`]: physical parameters, polynomial potentials, grids and Hermite functions.
//! * [`operator`]: the coupled operator and the baseline Schrödinger Hamiltonians.
//! * [`spectral`]: sector-resolved eigenpairs of the coupled operator.
//! * [`perturbation`]: first-order `tau_c` energy correction through two resolvent solves.
//! * [`exact`]: free-particle and Pais-Uhlenbeck closed forms.
//! * [`evolution`]: Cayley (Crank-Nicolson) propagation of the time-dependent equation.
//! * [`uncertainty`]: commutator factor of time coarse-grained position and momentum.
//! * [`convergence`]: grid-refinement studies and Richardson extrapolation.

// Links the system OpenBLAS build that provides the LAPACK symbols.
extern crate openblas_src;

pub mod convergence;
pub mod error;
pub mod evolution;
pub mod exact;
mod lapack;
pub mod operator;
pub mod perturbation;
pub mod quantum;
pub mod spectral;
pub mod uncertainty;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use quantum::{hermite_function, HermiteBasis, PhysicalParams, Potential, PotentialValue, XGrid};
