//! Sparse LP container, simplex backend and the decision-rule reformulation.

mod ldr;
mod program;

pub use ldr::{
    build_sro_ldr_lp, evaluate_ldr, recourse_cost, solve_sro_ldr, worst_case_objective_oracle, AffineRule, DualPair,
    Family, Formulation, LdrInstance, LdrModel, LdrSolution,
};
pub use program::{solve, solve_with, Method, SIMPLEX_ROW_LIMIT, Constraint, LinearProgram, LpSolution, Sense, SolveStatus, SolverReport, VarId, Variable};
