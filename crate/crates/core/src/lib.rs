//! Classical and quantum symmetries of finite multigraphs.
//!
//! The crate models multigraphs ([`graph`]), enumerates their classical
//! automorphisms ([`aut`]), emits the generator/relation presentations of the
//! associated quantum groups ([`presentation`]), finds their classical points
//! ([`abelian`]), verifies finite-dimensional matrix representations
//! ([`reps`]), and checks induced coactions on graph C*-algebras ([`cstar`]).

pub mod abelian;
pub mod aut;
pub mod cstar;
pub mod error;
pub mod graph;
pub mod ncpoly;
pub mod perm;
pub mod presentation;
pub mod reps;

pub use error::*;
pub use graph::{Graph, Multigraph};
