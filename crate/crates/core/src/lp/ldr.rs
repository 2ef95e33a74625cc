//! Linear-decision-rule reformulation of the sample robust transfer problem.
//!
//! Deployments `b`, emergency excesses `x` and shortages `y` are affine in
//! the demand observed up to their own day. Each robust row
//! `const + Σ_d β_d ζ_d ≤ 0 for all ζ in box n` is dualized with one pair
//! `ν_d, ψ_d ≥ 0`, `ν_d − ψ_d = β_d`, shared by every box, leaving the per-box
//! rows `const + Σ_d (ν_d ζ̄ⁿ_d − ψ_d ζ̲ⁿ_d) ≤ 0`. The per-box worst-case
//! objective is averaged directly into the objective.

use serde::{Deserialize, Serialize};

use super::program::{solve, LinearProgram, Sense, SolverReport, VarId};
use crate::error::{invalid, Error, Result};
use crate::model::{emergency_unit_cost, mu, planned_unit_cost, ArcFlows, CostParams, NetworkConfig, SecondmentState};
use crate::uncertainty::{enumerate_vertices, DemandPath, UncertaintyBox};

/// How per-sample robust rows are written.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Formulation {
    /// Scenario rows when every box is a single point, dual rows otherwise.
    #[default]
    Auto,
    /// Always dualize, even for point boxes.
    Dual,
    /// Evaluate rows at the sample points; requires point boxes.
    Scenario,
}

/// Constraint families of the reformulated problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Epi,
    Cap,
    Sho,
    Eme,
    Nnb,
    Nnx,
    Nny,
}

impl Family {
    fn tag(self) -> &'static str {
        match self {
            Family::Epi => "epi",
            Family::Cap => "cap",
            Family::Sho => "sho",
            Family::Eme => "eme",
            Family::Nnb => "nnb",
            Family::Nnx => "nnx",
            Family::Nny => "nny",
        }
    }
}

/// Inputs of one decision-rule LP over days `first_day ..= first_day + S − 1`
/// of a week of `horizon` days, where `S` is the box length.
#[derive(Clone, Copy, Debug)]
pub struct LdrInstance<'a> {
    pub network: &'a NetworkConfig,
    pub costs: &'a CostParams,
    pub horizon: u32,
    /// 1-based day of the week that the first box day corresponds to.
    pub first_day: u32,
    pub boxes: &'a [UncertaintyBox],
    /// Secondments under way at the start of `first_day`.
    pub state: &'a SecondmentState,
    /// Committed plan for the covered days; `None` optimizes it.
    pub fixed_plan: Option<&'a [ArcFlows]>,
    pub formulation: Formulation,
}

/// Affine function of the demand history: `intercept + Σ_d coefs[d] ζ_d`,
/// with `d = day · L + location` ranging over days up to the rule's own day.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AffineRule {
    pub intercept: f64,
    pub coefs: Vec<f64>,
}

impl AffineRule {
    pub fn eval(&self, realized: &DemandPath) -> f64 {
        let l = realized.locations();
        self.intercept
            + self.coefs.iter().enumerate().map(|(d, &c)| if c == 0.0 { 0.0 } else { c * realized.get(d / l, d % l) }).sum::<f64>()
    }
}

/// Dual pair of one uncertain coordinate of one robust row.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualPair {
    pub family: Family,
    /// Local day of the row (unused for the objective).
    pub day: usize,
    pub from: usize,
    /// Destination for arc rows; equals `from` for location rows.
    pub to: usize,
    /// Uncertain coordinate `m · L + l`.
    pub dim: usize,
    pub nu: f64,
    pub psi: f64,
}

/// Optimal rules of one LP. Day indices are local: `0` is `first_day`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdrSolution {
    pub first_day: u32,
    pub horizon: u32,
    pub locations: usize,
    pub a: Vec<ArcFlows>,
    /// `b[s][i * L + j]`; zero rules on the diagonal and disallowed arcs.
    pub b: Vec<Vec<AffineRule>>,
    pub x: Vec<Vec<AffineRule>>,
    /// `y[s][i]`.
    pub y: Vec<Vec<AffineRule>>,
    pub duals: Vec<DualPair>,
    pub objective_value: f64,
}

impl LdrSolution {
    pub fn days(&self) -> usize {
        self.a.len()
    }

    /// Rule values `b_s(ζ)` for local day `s`; may be negative or infeasible
    /// away from the training samples.
    pub fn deployment(&self, realized: &DemandPath, s: usize) -> ArcFlows {
        let n = self.locations;
        let mut out = ArcFlows::zeros(n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    out.set(i, j, self.b[s][i * n + j].eval(realized));
                }
            }
        }
        out
    }
}

/// Deployment rule of local day `day` evaluated at `realized`, which must
/// cover at least `day + 1` days.
pub fn evaluate_ldr(sol: &LdrSolution, realized: &DemandPath, day: usize) -> ArcFlows {
    sol.deployment(realized, day)
}

/// Coefficient of a rule on one uncertain coordinate. In the dual form the
/// coefficient is carried by the dual pair of the rule's own nonnegativity
/// row: `ν − ψ = −coef` there, so `coef = ψ − ν` and no equality is needed.
#[derive(Clone, Copy)]
enum Coef {
    Free(VarId),
    Split { psi: VarId, nu: VarId },
}

struct Rule {
    intercept: VarId,
    coefs: Vec<(usize, Coef)>,
}

#[derive(Clone, Copy)]
enum Planned {
    Var(VarId),
    Fixed(f64),
}

/// `constant + lin + Σ_d (Σ vars + k_d) ζ_d`.
struct Affine {
    constant: f64,
    lin: Vec<(VarId, f64)>,
    beta: Vec<(Vec<(VarId, f64)>, f64)>,
}

impl Affine {
    fn new(dims: usize) -> Self {
        Affine { constant: 0.0, lin: Vec::new(), beta: vec![(Vec::new(), 0.0); dims] }
    }

    fn rule(&mut self, r: &Rule, w: f64) {
        self.lin.push((r.intercept, w));
        for &(d, c) in &r.coefs {
            match c {
                Coef::Free(v) => self.beta[d].0.push((v, w)),
                Coef::Split { psi, nu } => {
                    self.beta[d].0.push((psi, w));
                    self.beta[d].0.push((nu, -w));
                }
            }
        }
    }

    fn planned(&mut self, p: Planned, w: f64) {
        match p {
            Planned::Var(v) => self.lin.push((v, w)),
            Planned::Fixed(c) => self.constant += w * c,
        }
    }
}

struct Layout {
    locs: usize,
    active: Vec<bool>,
    /// Value of inactive coordinates (identical in every box).
    fixed: Vec<f64>,
    scenario: bool,
}

struct Builder<'a> {
    lp: LinearProgram,
    layout: Layout,
    boxes: &'a [UncertaintyBox],
    first_day: u32,
    duals: Vec<(Family, usize, usize, usize, usize, VarId, VarId)>,
}

impl Builder<'_> {
    fn lower(&self, n: usize, d: usize) -> f64 {
        self.boxes[n].lower[d / self.layout.locs][d % self.layout.locs]
    }

    fn upper(&self, n: usize, d: usize) -> f64 {
        self.boxes[n].upper[d / self.layout.locs][d % self.layout.locs]
    }

    /// Splits an affine form into n-independent data and per-box terms.
    fn expand(&mut self, f: Affine, family: Family, key: (usize, usize, usize)) -> (f64, Vec<(VarId, f64)>, Vec<(f64, Vec<(VarId, f64)>)>) {
        let nb = self.boxes.len();
        let mut constant = f.constant;
        let mut per_n: Vec<(f64, Vec<(VarId, f64)>)> = vec![(0.0, Vec::new()); nb];
        let (s, i, j) = key;
        for (d, (mut vars, k)) in f.beta.into_iter().enumerate() {
            merge(&mut vars);
            if !self.layout.active[d] {
                debug_assert!(vars.is_empty());
                constant += k * self.layout.fixed[d];
                continue;
            }
            if vars.is_empty() {
                if k != 0.0 {
                    for (n, term) in per_n.iter_mut().enumerate() {
                        term.0 += if k > 0.0 { k * self.upper(n, d) } else { k * self.lower(n, d) };
                    }
                }
                continue;
            }
            if self.layout.scenario {
                for (n, term) in per_n.iter_mut().enumerate() {
                    let z = self.boxes[n].lower[d / self.layout.locs][d % self.layout.locs];
                    term.0 += k * z;
                    term.1.extend(vars.iter().map(|&(v, c)| (v, c * z)));
                }
                continue;
            }
            let (m, l) = (d / self.layout.locs, d % self.layout.locs);
            let suffix = self.name_key(family, key, m, l);
            let nu = self.lp.add_nonneg(format!("nu_{suffix}"));
            let psi = self.lp.add_nonneg(format!("psi_{suffix}"));
            let mut eq: Vec<(VarId, f64)> = vec![(nu, 1.0), (psi, -1.0)];
            eq.extend(vars.iter().map(|&(v, c)| (v, -c)));
            self.lp.add_constraint(format!("eq_{suffix}"), eq, Sense::Eq, k);
            self.duals.push((family, s, i, j, d, nu, psi));
            for n in 0..nb {
                let (lo, up) = (self.lower(n, d), self.upper(n, d));
                let term = &mut per_n[n];
                term.1.push((nu, up));
                term.1.push((psi, -lo));
            }
        }
        let mut lin = f.lin;
        merge(&mut lin);
        (constant, lin, per_n)
    }

    fn name_key(&self, family: Family, (s, i, j): (usize, usize, usize), m: usize, l: usize) -> String {
        let t = self.first_day as usize + s;
        let tm = self.first_day as usize + m;
        match family {
            Family::Epi => format!("epi_m{tm}_l{l}"),
            Family::Cap | Family::Sho | Family::Nny => format!("{}_t{t}_i{i}_m{tm}_l{l}", family.tag()),
            _ => format!("{}_t{t}_i{i}_j{j}_m{tm}_l{l}", family.tag()),
        }
    }

    /// Adds `f(ζ) ≤ 0` for every ζ in every box.
    fn robust_row(&mut self, f: Affine, family: Family, key: (usize, usize, usize)) -> Result<()> {
        let (constant, lin, per_n) = self.expand(f, family, key);
        let t = self.first_day as usize + key.0;
        let base = match family {
            Family::Cap | Family::Sho | Family::Nny => format!("{}_t{t}_i{}", family.tag(), key.1),
            _ => format!("{}_t{t}_i{}_j{}", family.tag(), key.1, key.2),
        };
        let identical = per_n.windows(2).all(|w| w[0] == w[1]);
        for (n, (c_n, terms)) in per_n.iter().enumerate() {
            if identical && n > 0 {
                break;
            }
            let mut row = lin.clone();
            row.extend(terms.iter().copied());
            merge(&mut row);
            let rhs = -(constant + c_n);
            if row.is_empty() {
                if rhs < -1e-9 {
                    return Err(Error::Solver {
                        status: super::SolveStatus::Infeasible,
                        context: format!("row {base} is violated by committed transfers alone"),
                    });
                }
                continue;
            }
            let name = if identical { base.clone() } else { format!("{base}_n{n}") };
            self.lp.add_constraint(name, row, Sense::Le, rhs);
        }
        Ok(())
    }

    /// `rule(ζ) ≥ 0` on every box.
    fn nonneg_row(&mut self, r: &Rule, family: Family, key: (usize, usize, usize)) -> Result<()> {
        if self.layout.scenario {
            let mut f = Affine::new(self.layout.active.len());
            f.rule(r, -1.0);
            return self.robust_row(f, family, key);
        }
        let t = self.first_day as usize + key.0;
        let base = match family {
            Family::Nny => format!("{}_t{t}_i{}", family.tag(), key.1),
            _ => format!("{}_t{t}_i{}_j{}", family.tag(), key.1, key.2),
        };
        let rows: Vec<Vec<(VarId, f64)>> = (0..self.boxes.len())
            .map(|n| {
                let mut row = vec![(r.intercept, -1.0)];
                for &(d, c) in &r.coefs {
                    if let Coef::Split { psi, nu } = c {
                        row.push((nu, self.upper(n, d)));
                        row.push((psi, -self.lower(n, d)));
                    }
                }
                row
            })
            .collect();
        for &(d, c) in &r.coefs {
            if let Coef::Split { psi, nu } = c {
                self.duals.push((family, key.0, key.1, key.2, d, nu, psi));
            }
        }
        let identical = rows.windows(2).all(|w| w[0] == w[1]);
        for (n, row) in rows.into_iter().enumerate() {
            if identical && n > 0 {
                break;
            }
            let name = if identical { base.clone() } else { format!("{base}_n{n}") };
            self.lp.add_constraint(name, row, Sense::Le, 0.0);
        }
        Ok(())
    }

    fn robust_objective(&mut self, f: Affine) {
        let nb = self.boxes.len() as f64;
        let (constant, lin, per_n) = self.expand(f, Family::Epi, (0, 0, 0));
        self.lp.add_objective_constant(constant);
        for (v, c) in lin {
            self.lp.add_objective(v, c);
        }
        for (c_n, terms) in per_n {
            self.lp.add_objective_constant(c_n / nb);
            for (v, c) in terms {
                self.lp.add_objective(v, c / nb);
            }
        }
    }
}

fn merge(terms: &mut Vec<(VarId, f64)>) {
    terms.sort_by_key(|t| t.0);
    let mut out: Vec<(VarId, f64)> = Vec::with_capacity(terms.len());
    for &(v, c) in terms.iter() {
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 += c,
            _ => out.push((v, c)),
        }
    }
    out.retain(|t| t.1 != 0.0);
    *terms = out;
}

/// Variable handles needed to read an [`LdrSolution`] back.
pub struct LdrModel {
    pub lp: LinearProgram,
    first_day: u32,
    horizon: u32,
    locs: usize,
    days: usize,
    a: Vec<Vec<Option<Planned>>>,
    b: Vec<Vec<Option<Rule>>>,
    x: Vec<Vec<Option<Rule>>>,
    y: Vec<Vec<Rule>>,
    duals: Vec<(Family, usize, usize, usize, usize, VarId, VarId)>,
}

impl std::fmt::Debug for LdrModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LdrModel")
            .field("vars", &self.lp.num_vars())
            .field("rows", &self.lp.num_constraints())
            .finish()
    }
}

fn check_shapes(inst: &LdrInstance<'_>) -> Result<(usize, usize)> {
    let net = inst.network;
    let locs = net.num_locations();
    let first = inst.boxes.first().ok_or_else(|| invalid("at least one uncertainty box is required"))?;
    let days = first.horizon();
    if days == 0 {
        return Err(Error::Shape("uncertainty boxes cover no days".into()));
    }
    for (n, bx) in inst.boxes.iter().enumerate() {
        if bx.horizon() != days || bx.upper.len() != days || bx.locations() != locs || bx.upper.iter().any(|r| r.len() != locs) {
            return Err(Error::Shape(format!("box {n} is not {days} days by {locs} locations")));
        }
    }
    if inst.first_day < 1 || inst.first_day as usize + days - 1 > inst.horizon as usize {
        return Err(Error::Shape(format!(
            "days {}..{} fall outside the {}-day horizon",
            inst.first_day,
            inst.first_day as usize + days - 1,
            inst.horizon
        )));
    }
    if inst.costs.days() < inst.horizon as usize || inst.costs.shortage_cost.iter().any(|r| r.len() != locs) {
        return Err(Error::Shape("cost parameters do not cover the horizon".into()));
    }
    if inst.state.locations() != locs || inst.state.depth() + 1 < net.max_secondment() as usize {
        return Err(Error::Shape("secondment state does not match the network".into()));
    }
    if let Some(plan) = inst.fixed_plan {
        if plan.len() != days || plan.iter().any(|a| a.size() != locs) {
            return Err(Error::Shape(format!("fixed plan must have {days} days of {locs}x{locs} flows")));
        }
    }
    Ok((locs, days))
}

/// Builds the decision-rule LP for `inst`.
pub fn build_sro_ldr_lp(inst: &LdrInstance<'_>) -> Result<LdrModel> {
    let (locs, days) = check_shapes(inst)?;
    let net = inst.network;
    let costs = inst.costs;
    let horizon = inst.horizon;
    let dims = days * locs;
    let point_boxes = inst.boxes.iter().all(|b| b.lower == b.upper);
    let scenario = match inst.formulation {
        Formulation::Auto => point_boxes,
        Formulation::Dual => false,
        Formulation::Scenario if point_boxes => true,
        Formulation::Scenario => return Err(invalid("scenario formulation needs zero-width boxes")),
    };

    let mut active = vec![false; dims];
    let mut fixed = vec![0.0; dims];
    for d in 0..dims {
        let (m, l) = (d / locs, d % locs);
        let v = inst.boxes[0].lower[m][l];
        active[d] = inst.boxes.iter().any(|b| b.lower[m][l] != v || b.upper[m][l] != v);
        fixed[d] = v;
    }

    let mut b = Builder {
        lp: LinearProgram::new(),
        layout: Layout { locs, active, fixed, scenario },
        boxes: inst.boxes,
        first_day: inst.first_day,
        duals: Vec::new(),
    };
    let day = |s: usize| inst.first_day + s as u32;
    let arcs = net.arcs();

    // Planned decisions and the three affine rule families.
    let mut a_vars: Vec<Vec<Option<Planned>>> = vec![vec![None; locs * locs]; days];
    let mut b_rules: Vec<Vec<Option<Rule>>> = (0..days).map(|_| (0..locs * locs).map(|_| None).collect()).collect();
    let mut x_rules: Vec<Vec<Option<Rule>>> = (0..days).map(|_| (0..locs * locs).map(|_| None).collect()).collect();
    let mut y_rules: Vec<Vec<Rule>> = Vec::with_capacity(days);
    let lp = &mut b.lp;
    let layout = &b.layout;
    let new_rule = |lp: &mut LinearProgram, prefix: &str, s: usize, tag: &str| {
        let t = inst.first_day as usize + s;
        let intercept = lp.add_free(format!("{prefix}0_t{t}{tag}"));
        let coefs = (0..(s + 1) * locs)
            .filter(|&d| layout.active[d])
            .map(|d| {
                let dim = format!("t{t}{tag}_m{}_l{}", inst.first_day as usize + d / locs, d % locs);
                let c = if layout.scenario {
                    Coef::Free(lp.add_free(format!("{prefix}1_{dim}")))
                } else {
                    let psi = lp.add_nonneg(format!("psi_nn{prefix}_{dim}"));
                    let nu = lp.add_nonneg(format!("nu_nn{prefix}_{dim}"));
                    Coef::Split { psi, nu }
                };
                (d, c)
            })
            .collect();
        Rule { intercept, coefs }
    };
    for s in 0..days {
        let t = day(s);
        for arc in &arcs {
            let (i, j) = (arc.from, arc.to);
            let tag = format!("_i{i}_j{j}");
            a_vars[s][i * locs + j] = Some(match inst.fixed_plan {
                Some(plan) => Planned::Fixed(plan[s].get(i, j)),
                None => {
                    let v = lp.add_nonneg(format!("a_t{t}{tag}"));
                    lp.add_objective(v, planned_unit_cost(net, costs, i, j, t, horizon));
                    Planned::Var(v)
                }
            });
            b_rules[s][i * locs + j] = Some(new_rule(lp, "b", s, &tag));
            x_rules[s][i * locs + j] = Some(new_rule(lp, "x", s, &tag));
        }
        y_rules.push((0..locs).map(|i| new_rule(lp, "y", s, &format!("_i{i}"))).collect());
    }
    if let Some(plan) = inst.fixed_plan {
        let committed: f64 = (0..days).map(|s| crate::model::planned_cost(net, costs, &plan[s], day(s), horizon)).sum();
        b.lp.add_objective_constant(committed);
    }

    // Which earlier decisions keep a nurse of arc (i, j) away on day s.
    let covers = |m: usize, s: usize, i: usize, j: usize| m <= s && m + mu(net, i, j, day(m), horizon) as usize > s;

    for s in 0..days {
        for i in 0..locs {
            let capacity = net.capacity[i] as f64;
            let away = inst.state.away_from(i, s);
            let hosted = inst.state.hosted_at(i, s);

            if inst.fixed_plan.is_none() {
                let mut row = Vec::new();
                for m in 0..=s {
                    for j in 0..locs {
                        if let (true, Some(Planned::Var(v))) = (covers(m, s, i, j), a_vars[m][i * locs + j]) {
                            row.push((v, 1.0));
                        }
                    }
                }
                if !row.is_empty() {
                    b.lp.add_constraint(format!("cap_a_t{}_i{i}", day(s)), row, Sense::Le, capacity - away);
                }
            }

            let mut cap = Affine::new(dims);
            cap.constant = away - capacity;
            let mut sho = Affine::new(dims);
            sho.constant = away - hosted - capacity;
            sho.beta[s * locs + i].1 += 1.0;
            for m in 0..=s {
                for j in 0..locs {
                    if covers(m, s, i, j) {
                        if let Some(r) = &b_rules[m][i * locs + j] {
                            cap.rule(r, 1.0);
                            sho.rule(r, 1.0);
                        }
                    }
                    if covers(m, s, j, i) {
                        if let Some(r) = &b_rules[m][j * locs + i] {
                            sho.rule(r, -1.0);
                        }
                    }
                }
            }
            sho.rule(&y_rules[s][i], -1.0);
            b.robust_row(cap, Family::Cap, (s, i, i))?;
            b.robust_row(sho, Family::Sho, (s, i, i))?;

            b.nonneg_row(&y_rules[s][i], Family::Nny, (s, i, i))?;
        }
        for arc in &arcs {
            let k = arc.from * locs + arc.to;
            let (br, xr) = (b_rules[s][k].as_ref().unwrap(), x_rules[s][k].as_ref().unwrap());
            let mut eme = Affine::new(dims);
            eme.rule(br, 1.0);
            eme.rule(xr, -1.0);
            eme.planned(a_vars[s][k].unwrap(), -1.0);
            let key = (s, arc.from, arc.to);
            b.robust_row(eme, Family::Eme, key)?;
            b.nonneg_row(br, Family::Nnb, key)?;
            b.nonneg_row(xr, Family::Nnx, key)?;
        }
    }

    // Recourse cost, worst case per box.
    let mut epi = Affine::new(dims);
    let fee = costs.cancellation_fee - 1.0;
    for s in 0..days {
        let t = day(s);
        for arc in &arcs {
            let (i, j) = (arc.from, arc.to);
            let k = i * locs + j;
            let cp = planned_unit_cost(net, costs, i, j, t, horizon);
            let ce = emergency_unit_cost(net, costs, i, j, t, horizon);
            epi.rule(x_rules[s][k].as_ref().unwrap(), ce + fee * cp);
            epi.rule(b_rules[s][k].as_ref().unwrap(), -fee * cp);
            epi.planned(a_vars[s][k].unwrap(), fee * cp);
        }
        for i in 0..locs {
            epi.rule(&y_rules[s][i], costs.shortage_cost[t as usize - 1][i]);
        }
    }
    b.robust_objective(epi);

    Ok(LdrModel {
        lp: b.lp,
        first_day: inst.first_day,
        horizon,
        locs,
        days,
        a: a_vars,
        b: b_rules,
        x: x_rules,
        y: y_rules,
        duals: b.duals,
    })
}

impl LdrModel {
    /// Solves the LP and reads back the rules.
    pub fn solve(&self) -> Result<(LdrSolution, SolverReport)> {
        let sol = solve(&self.lp).map_err(|r| Error::Solver {
            status: r.status,
            context: format!("decision-rule LP for days from {}", self.first_day),
        })?;
        let x = &sol.values;
        let (locs, days) = (self.locs, self.days);
        let read_rule = |r: &Rule, s: usize| {
            let mut coefs = vec![0.0; (s + 1) * locs];
            for &(d, c) in &r.coefs {
                coefs[d] = match c {
                    Coef::Free(v) => x[v.0],
                    Coef::Split { psi, nu } => x[psi.0] - x[nu.0],
                };
            }
            AffineRule { intercept: x[r.intercept.0], coefs }
        };
        let read_family = |rules: &Vec<Vec<Option<Rule>>>| -> Vec<Vec<AffineRule>> {
            rules
                .iter()
                .enumerate()
                .map(|(s, row)| {
                    row.iter()
                        .map(|r| r.as_ref().map_or_else(|| AffineRule { intercept: 0.0, coefs: vec![0.0; (s + 1) * locs] }, |r| read_rule(r, s)))
                        .collect()
                })
                .collect()
        };
        let a = (0..days)
            .map(|s| {
                let mut flows = ArcFlows::zeros(locs);
                for (k, p) in self.a[s].iter().enumerate() {
                    let v = match p {
                        Some(Planned::Var(v)) => x[v.0],
                        Some(Planned::Fixed(c)) => *c,
                        None => 0.0,
                    };
                    flows.set(k / locs, k % locs, v);
                }
                flows
            })
            .collect();
        let y = self.y.iter().enumerate().map(|(s, row)| row.iter().map(|r| read_rule(r, s)).collect()).collect();
        let duals = self
            .duals
            .iter()
            .map(|&(family, day, from, to, dim, nu, psi)| DualPair { family, day, from, to, dim, nu: x[nu.0], psi: x[psi.0] })
            .collect();
        let out = LdrSolution {
            first_day: self.first_day,
            horizon: self.horizon,
            locations: locs,
            a,
            b: read_family(&self.b),
            x: read_family(&self.x),
            y,
            duals,
            objective_value: sol.report.objective,
        };
        Ok((out, sol.report))
    }
}

/// Builds and solves in one step.
pub fn solve_sro_ldr(inst: &LdrInstance<'_>) -> Result<(LdrSolution, SolverReport)> {
    build_sro_ldr_lp(inst)?.solve()
}

/// Recourse cost of the rules at one demand realization.
pub fn recourse_cost(sol: &LdrSolution, network: &NetworkConfig, costs: &CostParams, realized: &DemandPath) -> f64 {
    let n = sol.locations;
    let fee = costs.cancellation_fee - 1.0;
    let mut total = 0.0;
    for s in 0..sol.days() {
        let t = sol.first_day + s as u32;
        for arc in network.arcs() {
            let k = arc.from * n + arc.to;
            let cp = planned_unit_cost(network, costs, arc.from, arc.to, t, sol.horizon);
            let ce = emergency_unit_cost(network, costs, arc.from, arc.to, t, sol.horizon);
            let xv = sol.x[s][k].eval(realized);
            let bv = sol.b[s][k].eval(realized);
            total += ce * xv + fee * cp * (xv - bv + sol.a[s].get(arc.from, arc.to));
        }
        for i in 0..n {
            total += costs.shortage_cost[t as usize - 1][i] * sol.y[s][i].eval(realized);
        }
    }
    total
}

/// Planned cost plus the box-averaged worst-case recourse cost of `sol`,
/// found by enumerating box vertices.
pub fn worst_case_objective_oracle(
    sol: &LdrSolution,
    boxes: &[UncertaintyBox],
    network: &NetworkConfig,
    costs: &CostParams,
) -> Result<f64> {
    if boxes.is_empty() {
        return Err(invalid("at least one uncertainty box is required"));
    }
    let planned: f64 = sol
        .a
        .iter()
        .enumerate()
        .map(|(s, a)| crate::model::planned_cost(network, costs, a, sol.first_day + s as u32, sol.horizon))
        .sum();
    let mut avg = 0.0;
    for bx in boxes {
        let worst = enumerate_vertices(bx)?
            .iter()
            .map(|v| recourse_cost(sol, network, costs, v))
            .fold(f64::NEG_INFINITY, f64::max);
        avg += worst;
    }
    Ok(planned + avg / boxes.len() as f64)
}
