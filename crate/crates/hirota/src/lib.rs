//! Exact Hirota bilinear algebra for five semi-discrete soliton systems, with
//! Backlund-transformation and Lax-pair checks, a lattice solver and
//! continuum-limit studies.

pub mod expalg;
pub mod systems;
pub mod soliton;
pub mod verify;
pub mod lattice;
pub mod convergence;
