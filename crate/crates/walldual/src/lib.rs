//! Dual metric spaces for finite sets with walls.
//!
//! Starting from a finite point set and a family of bipartitions, this crate
//! realizes the dual space of any downward-closed system of wall subsets:
//! the full power set gives the vertex set of a CAT(0) cube complex, the set
//! of all chains gives a Helly graph, and separated gluable systems give
//! hyperbolic duals. Walls can be supplied directly or synthesized from a
//! graph via curtains dual to strongly contracting geodesics, and every
//! quantitative bound the constructions promise is exposed as a checkable
//! predicate over desk-scale fixtures.
//!
//! Entry points:
//! - [`wallspace`] — walls, orientations, ultrafilters, medians;
//! - [`chains`] — chain systems, dual metrics, gluability and separation;
//! - [`dual`] — explicit dual spaces, gates, balls, fixed points;
//! - [`paths`] — normal wall paths and their fellow-traveling bounds;
//! - [`geometry`] — hyperbolicity, injectivity, and density checks;
//! - [`curtains`] — the graph-to-wallspace pipeline and graded duals;
//! - [`io`] / [`report`] — file formats and deterministic JSON reports.
//!
//! The `examples/` directory has one runnable example per capability; the
//! `walldual` binary exposes the same pipeline as subcommands.

pub mod bits;
pub mod chains;
pub mod curtains;
pub mod dual;
pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod graph;
pub mod io;
pub mod paths;
pub mod report;
pub mod wallspace;

pub use error::{Error, Result};
