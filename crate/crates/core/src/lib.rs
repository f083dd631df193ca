//! Radial numerics for the polyharmonic critical-exponent problem
//! `Δ^k u − λu = |u|^{2*−2}u` on the unit ball of `ℝⁿ`, `n > 2k`.
//!
//! Throughout, `Δ = −Σ ∂_ii` is the *positive* Laplacian, so that on radial
//! functions `Δg = −(g'' + (n−1)/r · g')`, `∫ u Δ^k u = ∫ (Δ^{k/2}u)² ≥ 0`
//! under Dirichlet conditions, and Green's functions of `Δ^k` are positive.

pub mod bubbles;
pub mod bvp;
pub mod calculus;
pub mod error;
pub mod field;
pub mod green;
pub mod grid;
pub mod inequalities;
pub mod linalg;
pub mod neumann;
pub mod operator;
pub mod params;
pub mod pohozaev;
pub mod profile;
pub mod quadrature;
pub mod stencil;

pub use calculus::{
    differentiate, dilation_generator, hk_seminorm, iterated_laplacian, weighted_integral,
    weighted_integral_range,
};
pub use error::{Error, Result};
pub use field::{Parity, RadialField};
pub use grid::{make_grid, GridScheme, RadialGrid};
pub use params::{ProblemParams, SphereConstants};
pub use profile::{PowerSum, RadialProfile};
