//! Computable calculus of weight sequences, Braun–Meise–Taylor weight functions,
//! associated weight matrices and generalized lower/upper Legendre conjugates.
//!
//! All sequence arithmetic happens in log domain. Asymptotic statements are decided
//! on finite tail windows and reported as tri-state [`Verdict`]s.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod conjugate;
pub mod error;
pub mod matrixcalc;
pub mod optim;
pub mod seqcore;
pub mod tail;
pub mod theoremlab;
pub mod verdict;
pub mod weightfn;

pub use config::RunConfig;
pub use conjugate::{ConjOptions, ConjugateResult, GridSpec};
pub use error::{Error, Result};
pub use matrixcalc::WeightMatrix;
pub use seqcore::WeightSequence;
pub use tail::Policy;
pub use theoremlab::SuiteReport;
pub use verdict::{GrowthIndexEstimate, State, Verdict, Window, Witness};
pub use weightfn::{Kind, WeightFunction};
