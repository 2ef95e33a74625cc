use std::collections::HashMap;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

/// Index of a variable inside a [`LinearProgram`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// Minimization LP: `min c'x + offset` over sparse rows and variable bounds.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    vars: Vec<Variable>,
    objective: Vec<f64>,
    offset: f64,
    rows: Vec<Constraint>,
    #[serde(skip)]
    index: HashMap<String, VarId>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a variable. Names must be unique; a duplicate name panics
    /// because it always signals a builder bug.
    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> VarId {
        let name = name.into();
        let id = VarId(self.vars.len());
        let prev = self.index.insert(name.clone(), id);
        assert!(prev.is_none(), "duplicate LP variable {name}");
        self.vars.push(Variable { name, lower, upper });
        self.objective.push(0.0);
        id
    }

    pub fn add_free(&mut self, name: impl Into<String>) -> VarId {
        self.add_var(name, f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn add_nonneg(&mut self, name: impl Into<String>) -> VarId {
        self.add_var(name, 0.0, f64::INFINITY)
    }

    pub fn add_objective(&mut self, var: VarId, coef: f64) {
        self.objective[var.0] += coef;
    }

    pub fn add_objective_constant(&mut self, value: f64) {
        self.offset += value;
    }

    /// Adds a row; repeated variables are merged and zero terms dropped.
    pub fn add_constraint(&mut self, name: impl Into<String>, terms: Vec<(VarId, f64)>, sense: Sense, rhs: f64) {
        let mut terms = terms;
        terms.sort_by_key(|t| t.0);
        let mut merged: Vec<(VarId, f64)> = Vec::with_capacity(terms.len());
        for (v, c) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += c,
                _ => merged.push((v, c)),
            }
        }
        merged.retain(|t| t.1 != 0.0);
        self.rows.push(Constraint { name: name.into(), terms: merged, sense, rhs });
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.rows.len()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.rows
    }

    pub fn objective_coef(&self, var: VarId) -> f64 {
        self.objective[var.0]
    }

    pub fn objective_offset(&self) -> f64 {
        self.offset
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        if self.index.len() == self.vars.len() {
            return self.index.get(name).copied();
        }
        self.vars.iter().position(|v| v.name == name).map(VarId)
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.offset + self.objective.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }

    /// Largest bound or row violation at `x`, each row scaled by
    /// `1 + max(|rhs|, max |coef|)`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (v, &val) in self.vars.iter().zip(x) {
            worst = worst.max(v.lower - val).max(val - v.upper);
        }
        for r in &self.rows {
            let lhs: f64 = r.terms.iter().map(|&(v, c)| c * x[v.0]).sum();
            let scale = 1.0 + r.terms.iter().fold(r.rhs.abs(), |m, t| m.max(t.1.abs()));
            let viol = match r.sense {
                Sense::Le => lhs - r.rhs,
                Sense::Ge => r.rhs - lhs,
                Sense::Eq => (lhs - r.rhs).abs(),
            };
            worst = worst.max(viol / scale);
        }
        worst
    }

    /// CPLEX LP text format.
    pub fn to_lp_format(&self) -> String {
        let mut s = String::new();
        let term = |s: &mut String, c: f64, name: &str, first: bool| {
            if c < 0.0 {
                let _ = write!(s, " - {} {}", -c, name);
            } else if first {
                let _ = write!(s, " {} {}", c, name);
            } else {
                let _ = write!(s, " + {} {}", c, name);
            }
        };
        s.push_str("\\ objective offset ");
        let _ = writeln!(s, "{}", self.offset);
        s.push_str("Minimize\n obj:");
        let mut first = true;
        for (v, &c) in self.vars.iter().zip(&self.objective) {
            if c != 0.0 {
                term(&mut s, c, &v.name, first);
                first = false;
            }
        }
        if first {
            s.push_str(" 0");
        }
        s.push_str("\nSubject To\n");
        for r in &self.rows {
            let _ = write!(s, " {}:", r.name);
            let mut first = true;
            for &(v, c) in &r.terms {
                term(&mut s, c, &self.vars[v.0].name, first);
                first = false;
            }
            if first {
                s.push_str(" 0");
            }
            let op = match r.sense {
                Sense::Le => "<=",
                Sense::Eq => "=",
                Sense::Ge => ">=",
            };
            let _ = writeln!(s, " {op} {}", r.rhs);
        }
        s.push_str("Bounds\n");
        for v in &self.vars {
            match (v.lower.is_finite(), v.upper.is_finite()) {
                (false, false) => {
                    let _ = writeln!(s, " {} free", v.name);
                }
                (true, false) if v.lower == 0.0 => {}
                (true, false) => {
                    let _ = writeln!(s, " {} >= {}", v.name, v.lower);
                }
                (false, true) => {
                    let _ = writeln!(s, " -inf <= {} <= {}", v.name, v.upper);
                }
                (true, true) => {
                    let _ = writeln!(s, " {} <= {} <= {}", v.lower, v.name, v.upper);
                }
            }
        }
        s.push_str("End\n");
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    /// Backend error unrelated to the model's feasibility.
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub status: SolveStatus,
    pub iterations: u64,
    pub solve_time: Duration,
    pub objective: f64,
    /// Scaled primal residual at the returned point.
    pub max_violation: f64,
}

/// Variable values of an optimal solve.
#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub values: Vec<f64>,
    pub report: SolverReport,
}

impl LpSolution {
    pub fn value(&self, var: VarId) -> f64 {
        self.values[var.0]
    }
}

/// Algorithm used by [`solve_with`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Dual simplex below [`SIMPLEX_ROW_LIMIT`] rows, interior point above.
    #[default]
    Auto,
    /// Simplex; returns a vertex.
    Simplex,
    /// Interior point without crossover.
    InteriorPoint,
}

/// Row count up to which [`Method::Auto`] uses the simplex method.
pub const SIMPLEX_ROW_LIMIT: usize = 2500;

/// Solves `lp` with the default method.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution, SolverReport> {
    solve_with(lp, Method::Auto)
}

/// Solves `lp` with HiGHS on one thread. Non-optimal outcomes come back as
/// a report with no values.
pub fn solve_with(lp: &LinearProgram, method: Method) -> Result<LpSolution, SolverReport> {
    let start = Instant::now();
    let failed = |status, iterations| SolverReport {
        status,
        iterations,
        solve_time: start.elapsed(),
        objective: f64::NAN,
        max_violation: f64::NAN,
    };
    if lp.vars.is_empty() {
        if lp.rows.iter().any(|r| match r.sense {
            Sense::Le => r.rhs < 0.0,
            Sense::Ge => r.rhs > 0.0,
            Sense::Eq => r.rhs != 0.0,
        }) {
            return Err(failed(SolveStatus::Infeasible, 0));
        }
        let report = SolverReport { status: SolveStatus::Optimal, iterations: 0, solve_time: start.elapsed(), objective: lp.offset, max_violation: 0.0 };
        return Ok(LpSolution { values: Vec::new(), report });
    }
    let use_ipm = match method {
        Method::Auto => lp.rows.len() > SIMPLEX_ROW_LIMIT,
        Method::Simplex => false,
        Method::InteriorPoint => true,
    };
    let run = |presolve: bool| {
        let mut problem = highs::RowProblem::default();
        let cols: Vec<highs::Col> =
            lp.vars.iter().zip(&lp.objective).map(|(v, &c)| problem.add_column(c, v.lower..=v.upper)).collect();
        for r in &lp.rows {
            let terms = r.terms.iter().map(|&(v, c)| (cols[v.0], c));
            match r.sense {
                Sense::Le => problem.add_row(..=r.rhs, terms),
                Sense::Ge => problem.add_row(r.rhs.., terms),
                Sense::Eq => problem.add_row(r.rhs..=r.rhs, terms),
            }
        }
        let mut model = problem.optimise(highs::Sense::Minimise);
        model.make_quiet();
        model.set_option("threads", 1);
        model.set_option("random_seed", 0);
        model.set_option("presolve", if presolve { "on" } else { "off" });
        if use_ipm {
            model.set_option("solver", "ipm");
            model.set_option("run_crossover", "off");
        } else {
            model.set_option("solver", "simplex");
        }
        model.solve()
    };
    let mut solved = run(true);
    if solved.status() == highs::HighsModelStatus::UnboundedOrInfeasible {
        solved = run(false);
    }
    let iterations = (solved.simplex_iteration_count().max(0) + solved.ipm_iteration_count().max(0)) as u64;
    use highs::HighsModelStatus as H;
    match solved.status() {
        H::Optimal => {
            let values = solved.get_solution().columns().to_vec();
            let report = SolverReport {
                status: SolveStatus::Optimal,
                iterations,
                solve_time: start.elapsed(),
                objective: lp.objective_at(&values),
                max_violation: lp.max_violation(&values),
            };
            Ok(LpSolution { values, report })
        }
        H::Infeasible | H::UnboundedOrInfeasible => Err(failed(SolveStatus::Infeasible, iterations)),
        H::Unbounded => Err(failed(SolveStatus::Unbounded, iterations)),
        H::ReachedIterationLimit | H::ReachedTimeLimit => Err(failed(SolveStatus::IterationLimit, iterations)),
        _ => Err(failed(SolveStatus::Failed, iterations)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_only_problem() {
        let mut lp = LinearProgram::new();
        let x = lp.add_free("x");
        lp.add_objective(x, 1.0);
        lp.add_constraint("lb", vec![(x, 1.0)], Sense::Ge, 3.0);
        let sol = solve(&lp).unwrap();
        assert!((sol.value(x) - 3.0).abs() < 1e-9);
        assert_eq!(sol.report.status, SolveStatus::Optimal);
    }

    #[test]
    fn empty_objective_is_zero() {
        let mut lp = LinearProgram::new();
        let x = lp.add_nonneg("x");
        lp.add_constraint("c", vec![(x, 1.0)], Sense::Le, 4.0);
        assert_eq!(solve(&lp).unwrap().report.objective, 0.0);
    }

    #[test]
    fn infeasible_and_unbounded_reported() {
        let mut lp = LinearProgram::new();
        let x = lp.add_nonneg("x");
        lp.add_constraint("c", vec![(x, 1.0)], Sense::Le, -1.0);
        assert_eq!(solve(&lp).unwrap_err().status, SolveStatus::Infeasible);

        let mut lp = LinearProgram::new();
        let x = lp.add_free("x");
        lp.add_objective(x, 1.0);
        assert_eq!(solve(&lp).unwrap_err().status, SolveStatus::Unbounded);
    }

    #[test]
    fn methods_agree() {
        let mut lp = LinearProgram::new();
        let x = lp.add_nonneg("x");
        let y = lp.add_nonneg("y");
        lp.add_objective(x, -1.0);
        lp.add_objective(y, -2.0);
        lp.add_constraint("c1", vec![(x, 1.0), (y, 1.0)], Sense::Le, 4.0);
        lp.add_constraint("c2", vec![(x, 1.0), (y, 3.0)], Sense::Le, 6.0);
        let a = solve_with(&lp, Method::Simplex).unwrap();
        let b = solve_with(&lp, Method::InteriorPoint).unwrap();
        assert!((a.report.objective + 5.0).abs() < 1e-9);
        assert!((a.report.objective - b.report.objective).abs() < 1e-6);
    }

    #[test]
    fn rows_merge_duplicates() {
        let mut lp = LinearProgram::new();
        let x = lp.add_nonneg("x");
        lp.add_constraint("c", vec![(x, 1.0), (x, 2.0)], Sense::Le, 6.0);
        assert_eq!(lp.constraints()[0].terms, vec![(x, 3.0)]);
        assert_eq!(lp.var_by_name("x"), Some(x));
    }

    #[test]
    fn lp_text_contains_sections() {
        let mut lp = LinearProgram::new();
        let x = lp.add_free("x");
        let y = lp.add_nonneg("y");
        lp.add_objective(x, 2.0);
        lp.add_constraint("r1", vec![(x, 1.0), (y, -1.0)], Sense::Eq, 0.0);
        let text = lp.to_lp_format();
        assert!(text.contains("Minimize") && text.contains("r1: 1 x - 1 y = 0") && text.contains("x free"));
    }
}
