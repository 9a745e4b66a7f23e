//! Exact machinery for Dirichlet improvability along analytic curves.
//!
//! The crate is organised bottom-up:
//!
//! * [`rational`] and [`linalg`]: arbitrary-precision rationals and dense
//!   exact matrices (fraction-free elimination, rank, kernels).
//! * [`groups`]: elements of `SL(n, Q)`, the diagonal flows `a_t`, `a'_t`,
//!   the unipotent maps `u`, `u'` and the outer automorphism `sigma`.
//! * [`lattices`]: unimodular lattices `g Z^n`, sup-norm box enumeration,
//!   LLL preconditioning and Hermite normal forms.
//! * [`diophantine`]: brute-force checkers for the two Dirichlet systems and
//!   the lattice box-avoidance criterion that mirrors them.
//! * [`curves`]: polynomial curves, the centralizer twist, the horospherical
//!   factorisation and sublevel-set growth estimates.
//! * [`reps`]: finite-dimensional representations built functorially from
//!   the standard one, weight decompositions and the Basic Lemma checks.
//! * [`experiments`]: Monte Carlo runs over expanding translates of curves.

pub mod curves;
pub mod diophantine;
pub mod error;
pub mod experiments;
pub mod groups;
pub mod lattices;
pub mod linalg;
pub mod rational;
pub mod reps;

pub use error::{Error, Result};
pub use rational::{Integer, Rational};
