//! Finite discounted Markov decision processes, solved and certified.
//!
//! The crate models a finite MDP as per-state sets of labelled actions, each
//! a probability mass function over successors with attached rewards, plus a
//! discount factor. On top of that sit three mutually checking layers:
//!
//! * [`mod@slice`] — step-by-step trajectory semantics: reachable-state sets,
//!   occupation probabilities, per-step expected rewards, and truncated
//!   discounted values with certified tail bounds. This is the ground truth
//!   everything else is compared against.
//! * [`bellman`] + [`linalg`] — the matrix formulation: sup-norm vectors,
//!   max-row-sum operator norms, the one-step operators of fixed and
//!   optimizing policies, and exact policy evaluation via linear solve (by
//!   elimination or by power series, each checking the other).
//! * [`solver`] + [`oracle`] — value iteration with an epsilon-optimality
//!   certificate, policy iteration with exact termination, and a brute-force
//!   enumeration oracle that certifies both on desk-scale instances.
//!
//! Models and policies serialize to JSON ([`document`]), and the `fmdp`
//! binary exposes everything as subcommands (`validate`, `eval`, `vi`, `pi`,
//! `oracle`, `check`).
//!
//! Each major capability has a runnable example under `examples/`; start
//! with `solve_and_certify`.

pub mod bellman;
pub mod check;
pub mod cli;
pub mod document;
pub mod error;
pub mod generate;
pub mod linalg;
pub mod mdp;
pub mod models;
pub mod oracle;
pub mod slice;
pub mod solver;

pub use error::{Error, ModelViolation, Result};
pub use linalg::{StateMatrix, StateVector};
pub use mdp::{ActionPmf, Mdp, Policy, StateId};
pub use oracle::OracleResult;
pub use slice::ValueEstimate;
pub use solver::SolveReport;
