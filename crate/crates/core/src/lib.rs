//! Shadows of the 4-cube.
//!
//! Orthogonal projections of the unit n-cube onto a random hyperplane (and, for n = 4, onto a
//! random 2-plane) are zonotopes whose volume, surface area and mean width have simple
//! closed forms in the projection direction. This crate evaluates those functionals,
//! checks them against explicit convex hulls, reproduces their moments in closed form and
//! by Monte Carlo, and evaluates the elliptic-integral and hypergeometric constants that
//! the second moments reduce to.

pub mod cli;
pub mod functionals;
pub mod geometry;
pub mod hull;
pub mod moments;
pub mod quad;
pub mod specfun;
