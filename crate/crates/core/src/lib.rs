//! Discrete space-time fractional nonlinear Schrödinger equation on the
//! lattice `hZ`: special functions, dispersion symbol, lattice operators,
//! memory-kernel solver and verification experiments.

// Negated float comparisons such as `!(x > 0.0)` are used on purpose: they
// reject NaN together with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod harness;
pub mod lattice;
pub mod quadrature;
pub mod solver;
pub mod special;
pub mod symbol;
pub mod trajectory;
