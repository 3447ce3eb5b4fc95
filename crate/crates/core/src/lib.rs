//! Circle patterns on cellular surfaces.
//!
//! A pattern assigns one circle to every face; circles of faces sharing an
//! edge meet at that edge's vertices under a prescribed angle. Radii are found
//! by minimizing a convex functional built from the Clausen function, after
//! a flow-based feasibility check. Solved patterns can be laid out in the
//! Euclidean plane, the Poincare disk, or on the sphere.

pub mod surface;
pub mod specfun;
pub mod functional;
pub mod solver;
pub mod feasibility;
pub mod spherical;
pub mod json;
pub mod layout;
