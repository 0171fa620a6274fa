//! Sliding window discrete Fourier transform (SWDFT) toolkit.
//!
//! * [`transform`]: DFT, direct and sliding SWDFT kernels, coefficient views.
//! * [`signals`]: local periodic signals, composites with seeded noise, steps, aliasing.
//! * [`analytic`]: Dirichlet kernel and exact closed-form coefficients.
//! * [`estimation`]: least-squares recovery of a single local periodic signal.
//! * [`montecarlo`]: the seeded parameter-recovery study and its tables.
//! * [`io`]: CSV formats shared with the command-line tool.

pub mod analytic;
pub mod error;
pub mod estimation;
pub mod io;
pub mod montecarlo;
pub mod signals;
pub mod transform;

pub use error::{Result, SwdftError};
pub use signals::{CompositeSpec, LocalSignalSpec, StepSpec};
pub use transform::{CoefView, ComplexCoef, RealSignal, SwdftGrid};
