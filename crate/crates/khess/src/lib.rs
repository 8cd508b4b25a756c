//! Numerical machinery for sigma_k curvature problems on star-shaped
//! hypersurfaces of hyperbolic space.
//!
//! The crate has four areas, layered bottom up:
//!
//! * [`symm`]: elementary symmetric functions `sigma_k`, their deletion
//!   minors, first and second derivatives at diagonal matrices, and Garding
//!   cone membership with margins.
//! * [`ineq`]: sampled verification of concavity-type inequalities built
//!   from those derivatives, including a bisection search for admissible
//!   eigenvalue-pinching thresholds.
//! * [`geom`]: radial graphs over the sphere in H^{n+1}, their curvature
//!   jets up to second covariant derivatives of the second fundamental
//!   form, and finite-difference residual checks of the structural
//!   identities (warping Hessian, support function derivatives, Gauss,
//!   Codazzi, and the derivative interchange rule).
//! * [`solve`]: a damped Newton and pseudo-time solver for the prescribed
//!   curvature equation `sigma_k(kappa) = f` on such graphs, with a
//!   cone-interior safeguard and a diagnostics report.
//!
//! All sampling is driven by explicit seeds and counter-based substreams,
//! so every reported number is reproducible byte for byte.

pub mod geom;
pub mod ineq;
pub mod report;
pub mod solve;
pub mod symm;

mod error;

pub use error::{Error, Result};
