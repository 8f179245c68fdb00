//! Closed-form hyperbolic geometry and arithmetic counting of common
//! perpendiculars.
//!
//! The crate is organised by subject:
//!
//! * [`geom`] – upper half-space, ball and hyperboloid models, Busemann
//!   cocycles, visual and Hamenstädt distances, common perpendiculars and
//!   Hopf coordinates.
//! * [`constants`] – sphere volumes, Bowen–Margulis and skinning masses, the
//!   master counting constant and its specialisations, zeta values.
//! * [`qforms`] – integral binary quadratic forms: Pell solutions, automorphs,
//!   exact orbit canonicalisation, representation counts, Gauss reduction.
//! * [`cusps`] – cusp-to-cusp counts for `PSL₂(ℤ)` and Bianchi groups.
//! * [`orbits`] – orbit points of `PSL₂(ℤ)` and `PSL₂(ℤ[i])` in balls.
//! * [`hermitian`] – binary Hermitian forms over `ℤ[i]` and their circle orbits.
//! * [`quat`] – Hamilton quaternions, the Hurwitz order, Dieudonné determinant.
//! * [`report`] – count series, constant fitting and serialisation.

pub mod arith;
pub mod constants;
pub mod cusps;
mod error;
pub mod geom;
pub mod hermitian;
pub mod orbits;
pub mod qforms;
pub mod quat;
pub mod report;

pub use error::{Error, Result};
