//! Numerical laboratory for the one-dimensional nonlinear Dirac equations:
//! a structure-respecting split-step integrator, conserved-quantity and
//! apriori-bound diagnostics, dispersive decay measurement, and direct
//! scattering analysis of the massive Thirring model in characteristic
//! coordinates.

pub mod characteristic;
pub mod diagnostics;
pub mod evolve;
pub mod field;
pub mod fit;
pub mod io;
pub mod linpde;
pub mod model;
pub mod scalar;
pub mod scattering;
pub mod spectral;

pub use num_complex::Complex;

pub use field::{LineGrid, SpinorField};
pub use model::PotentialSpec;
pub use scalar::Real;

/// Default-precision aliases.
pub type C64 = Complex<f64>;
pub type Spinor64 = SpinorField<f64>;
pub type Grid64 = LineGrid<f64>;
pub type Potential64 = PotentialSpec<f64>;
pub type Profile64 = characteristic::ScatteringProfile<f64>;

/// Single-precision aliases.
pub type C32 = Complex<f32>;
pub type Spinor32 = SpinorField<f32>;
pub type Potential32 = PotentialSpec<f32>;
