//! Symbolic-numeric engine for renormalization-group reductions of
//! perturbed ordinary differential equations.
//!
//! The crate derives higher-order RG equations and near-identity
//! transformations for systems `dx/dt = sum_k eps^k g_k(t, x)` over an exact
//! ring of quasi-periodic polynomials, reduces autonomous systems with
//! diagonal imaginary spectrum to normal forms, computes truncated Floquet
//! exponents for linear periodic systems, reduces dynamics onto critical
//! manifolds and phase variables, and numerically verifies the error orders
//! and invariant sets the reductions predict.

pub mod autonomous;
pub mod dynamics;
pub mod floquet;
pub mod gsp;
pub mod io;
pub mod linalg;
pub mod ode;
pub mod phase;
pub mod presets;
pub mod qp;
pub mod render;
pub mod rg;
pub mod scalar;

pub use qp::{FrequencyBasis, QpError, QpPoly, QpVector};
pub use rg::{PerturbedSystem, RgError, RgResult};
pub use scalar::{C64, CRat, Scalar};
