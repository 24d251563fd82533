//! Exact and approximate Nash equilibrium computation for bilinear games:
//! two-player games with polytopal strategy sets `X = {Ex = e, x >= 0}`,
//! `Y = {Fy = f, y >= 0}` and payoffs `x^T A y`, `x^T B y`, all over exact
//! rational arithmetic.
//!
//! The solvers are organized by game rank (`rank(A+B)`): a linear program
//! for zero-sum games, a binary-search path-following method for rank-1
//! games, two grid approximation schemes for fixed-rank games, and a
//! vertex-enumeration solver when one payoff matrix has low rank. A
//! brute-force oracle validates all of them at desk scale. Reductions from
//! bimatrix, Bayesian, polymatrix, ranking-duel, and perfect-recall
//! extensive-form games are in [`convert`].

// Constraint-row assembly mixes index arithmetic across several slices,
// where explicit indices read better than iterator chains.
#![allow(clippy::needless_range_loop)]

pub mod rational;
pub mod linalg;
pub mod lp;
pub mod polytope;
pub mod game;
pub mod convert;
pub mod zerosum;
pub mod rank1;
pub mod fptas;
pub mod lowrank;
pub mod oracle;
pub mod gen;
pub mod io;
pub mod par;

pub use game::{BilinearGame, EquilibriumCertificate, StrategyProfile};
pub use par::Parallelism;
pub use rational::Rat;
