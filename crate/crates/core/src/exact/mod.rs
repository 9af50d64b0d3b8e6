//! Exact arithmetic: rationals, binomials and a rational simplex solver.

pub mod binom;
pub mod lp;
pub mod rational;

pub use binom::{binom, binom_u64, gen_binom, GeneralizedBinomialQuery};
pub use lp::{
    lp_solve, lp_strict_feasible, Constraint, LpProblem, LpSolution, LpStatus, Relation, Sense, StrictConstraint,
    StrictFeasibility, StrictRelation, StrictSystem, VarBounds,
};
pub use rational::{format_rational, int, parse_rational, ratio, Rational};
