//! Exact rational simplex on a sparse-row tableau: two-phase primal, plus
//! a dual simplex start for covering-type problems.
//!
//! Pivoting uses Dantzig's largest-coefficient rule until a run of
//! degenerate pivots is seen, then switches permanently to Bland's
//! smallest-index rule, which cannot cycle. Both rules break ties by
//! smallest column index and the ratio test breaks ties by smallest basic
//! variable, so a given problem always yields the same basic solution.

use log::trace;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::rational::{serde_rational, serde_rational_vec, Rational};
use crate::error::{invalid, Result};

/// Consecutive degenerate pivots tolerated before switching to Bland.
const DEGENERATE_RUN_LIMIT: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    #[serde(with = "serde_rational_vec")]
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    #[serde(with = "serde_rational")]
    pub rhs: Rational,
}

impl Constraint {
    pub fn new(coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> Self {
        Self { coeffs, relation, rhs }
    }

    pub fn lhs(&self, point: &[Rational]) -> Rational {
        dot(&self.coeffs, point)
    }

    pub fn is_satisfied(&self, point: &[Rational]) -> bool {
        let lhs = self.lhs(point);
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Ge => lhs >= self.rhs,
            Relation::Eq => lhs == self.rhs,
        }
    }
}

/// Per-variable bounds; `None` means unbounded on that side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarBounds {
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
}

impl VarBounds {
    pub fn nonnegative() -> Self {
        Self {
            lower: Some(Rational::zero()),
            upper: None,
        }
    }

    pub fn unit() -> Self {
        Self {
            lower: Some(Rational::zero()),
            upper: Some(Rational::one()),
        }
    }

    pub fn free() -> Self {
        Self {
            lower: None,
            upper: None,
        }
    }

    pub fn contains(&self, v: &Rational) -> bool {
        self.lower.as_ref().is_none_or(|lo| v >= lo) && self.upper.as_ref().is_none_or(|hi| v <= hi)
    }
}

#[derive(Clone, Debug)]
pub struct LpProblem {
    num_vars: usize,
    objective: Vec<Rational>,
    sense: Sense,
    constraints: Vec<Constraint>,
    bounds: Vec<VarBounds>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LpSolution {
    pub status: LpStatus,
    #[serde(with = "serde_rational")]
    pub value: Rational,
    #[serde(with = "serde_rational_vec")]
    pub assignment: Vec<Rational>,
}

impl LpProblem {
    /// A problem with zero objective and every variable in `[0, +inf)`.
    pub fn new(num_vars: usize, sense: Sense) -> Self {
        Self {
            num_vars,
            objective: vec![Rational::zero(); num_vars],
            sense,
            constraints: Vec::new(),
            bounds: vec![VarBounds::nonnegative(); num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn bounds(&self) -> &[VarBounds] {
        &self.bounds
    }

    pub fn set_objective(&mut self, objective: Vec<Rational>) -> Result<()> {
        if objective.len() != self.num_vars {
            return Err(invalid(format!(
                "objective has {} coefficients, expected {}",
                objective.len(),
                self.num_vars
            )));
        }
        self.objective = objective;
        Ok(())
    }

    pub fn add_constraint(&mut self, c: Constraint) -> Result<()> {
        if c.coeffs.len() != self.num_vars {
            return Err(invalid(format!(
                "constraint has {} coefficients, expected {}",
                c.coeffs.len(),
                self.num_vars
            )));
        }
        self.constraints.push(c);
        Ok(())
    }

    /// Adds `sum coeff * x[idx] rel rhs` from sparse terms.
    pub fn add_sparse(
        &mut self,
        terms: impl IntoIterator<Item = (usize, Rational)>,
        relation: Relation,
        rhs: Rational,
    ) -> Result<()> {
        let mut coeffs = vec![Rational::zero(); self.num_vars];
        for (idx, coeff) in terms {
            if idx >= self.num_vars {
                return Err(invalid(format!("variable {idx} out of range")));
            }
            coeffs[idx] += coeff;
        }
        self.add_constraint(Constraint::new(coeffs, relation, rhs))
    }

    pub fn set_bounds(&mut self, var: usize, bounds: VarBounds) -> Result<()> {
        if var >= self.num_vars {
            return Err(invalid(format!("variable {var} out of range")));
        }
        self.bounds[var] = bounds;
        Ok(())
    }

    pub fn objective_value(&self, point: &[Rational]) -> Rational {
        dot(&self.objective, point)
    }

    /// Exact feasibility check of a point against constraints and bounds.
    pub fn is_feasible(&self, point: &[Rational]) -> bool {
        point.len() == self.num_vars
            && self.bounds.iter().zip(point).all(|(b, v)| b.contains(v))
            && self.constraints.iter().all(|c| c.is_satisfied(point))
    }

    pub fn solve(&self) -> LpSolution {
        lp_solve(self)
    }
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .filter(|(x, _)| !x.is_zero())
        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

/// How an original variable maps onto nonnegative tableau columns.
#[derive(Clone, Debug)]
enum VarMap {
    /// x = offset + col
    Shifted { col: usize, offset: Rational },
    /// x = pos - neg
    Split { pos: usize, neg: usize },
}

struct Row {
    coeffs: Vec<Rational>,
    relation: Relation,
    rhs: Rational,
}

/// Sparse row: `(column, coefficient)` pairs sorted by column, no zeros.
type SparseRow = Vec<(usize, Rational)>;

fn lookup(row: &SparseRow, col: usize) -> Option<&Rational> {
    row.binary_search_by_key(&col, |(j, _)| *j).ok().map(|pos| &row[pos].1)
}

/// `row - f * other`, dropping cancelled entries.
fn axpy(row: &SparseRow, f: &Rational, other: &SparseRow) -> SparseRow {
    let mut out = Vec::with_capacity(row.len() + other.len());
    let (mut a, mut b) = (row.iter().peekable(), other.iter().peekable());
    loop {
        match (a.peek(), b.peek()) {
            (Some((ja, va)), Some((jb, vb))) => {
                if ja < jb {
                    out.push((*ja, va.clone()));
                    a.next();
                } else if jb < ja {
                    out.push((*jb, -(f * vb)));
                    b.next();
                } else {
                    let v = va - f * vb;
                    if !v.is_zero() {
                        out.push((*ja, v));
                    }
                    a.next();
                    b.next();
                }
            }
            (Some((ja, va)), None) => {
                out.push((*ja, va.clone()));
                a.next();
            }
            (None, Some((jb, vb))) => {
                out.push((*jb, -(f * vb)));
                b.next();
            }
            (None, None) => break,
        }
    }
    out
}

struct Tableau {
    rows: Vec<SparseRow>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    ncols: usize,
    /// Reduced costs `c_j - z_j` of the current maximization objective.
    reduced: Vec<Rational>,
    value: Rational,
    /// Columns that may not enter the basis.
    blocked: Vec<bool>,
    bland: bool,
    degenerate_run: usize,
    pivots: usize,
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
    Infeasible,
}

impl Tableau {
    fn load_objective(&mut self, costs: &[Rational]) {
        self.reduced = costs.to_vec();
        self.value = Rational::zero();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &costs[b];
            if cb.is_zero() {
                continue;
            }
            for (j, a) in &self.rows[i] {
                self.reduced[*j] -= cb * a;
            }
            self.value += cb * &self.rhs[i];
        }
    }

    fn note_degenerate(&mut self, degenerate: bool) {
        if degenerate {
            self.degenerate_run += 1;
            if !self.bland && self.degenerate_run >= DEGENERATE_RUN_LIMIT {
                trace!("switching to Bland's rule after {} pivots", self.pivots);
                self.bland = true;
            }
        } else {
            self.degenerate_run = 0;
        }
    }

    fn entering(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for j in 0..self.ncols {
            if self.blocked[j] || !self.reduced[j].is_positive() {
                continue;
            }
            if self.bland {
                return Some(j);
            }
            match best {
                Some(b) if self.reduced[b] >= self.reduced[j] => {}
                _ => best = Some(j),
            }
        }
        best
    }

    fn leaving(&self, col: usize) -> Option<usize> {
        let mut best: Option<(usize, Rational)> = None;
        for (i, row) in self.rows.iter().enumerate() {
            let Some(a) = lookup(row, col) else { continue };
            if !a.is_positive() {
                continue;
            }
            let ratio = &self.rhs[i] / a;
            let better = match &best {
                None => true,
                Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
            };
            if better {
                best = Some((i, ratio));
            }
        }
        best.map(|(i, _)| i)
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let inv = Rational::one() / lookup(&self.rows[p], q).expect("nonzero pivot");
        for (_, a) in self.rows[p].iter_mut() {
            *a *= &inv;
        }
        self.rhs[p] *= &inv;
        let prow = std::mem::take(&mut self.rows[p]);
        let prhs = self.rhs[p].clone();

        for i in 0..self.rows.len() {
            if i == p {
                continue;
            }
            let Some(f) = lookup(&self.rows[i], q).cloned() else {
                continue;
            };
            self.rows[i] = axpy(&self.rows[i], &f, &prow);
            self.rhs[i] -= &f * &prhs;
        }

        let f = self.reduced[q].clone();
        if !f.is_zero() {
            for (j, a) in &prow {
                self.reduced[*j] -= &f * a;
            }
            self.value += &f * &prhs;
        }
        self.rows[p] = prow;
        self.basis[p] = q;
        self.pivots += 1;
    }

    /// Primal simplex from a primal feasible basis.
    fn run_primal(&mut self) -> PhaseOutcome {
        loop {
            let Some(q) = self.entering() else {
                return PhaseOutcome::Optimal;
            };
            let Some(p) = self.leaving(q) else {
                return PhaseOutcome::Unbounded;
            };
            self.note_degenerate(self.rhs[p].is_zero());
            self.pivot(p, q);
        }
    }

    /// Dual simplex from a dual feasible basis (all reduced costs <= 0).
    fn run_dual(&mut self) -> PhaseOutcome {
        loop {
            // leaving row: most negative rhs, or smallest basic index under Bland
            let mut leave: Option<usize> = None;
            for i in 0..self.rows.len() {
                if !self.rhs[i].is_negative() {
                    continue;
                }
                leave = match leave {
                    None => Some(i),
                    Some(b) if self.bland && self.basis[i] < self.basis[b] => Some(i),
                    Some(b) if !self.bland && self.rhs[i] < self.rhs[b] => Some(i),
                    keep => keep,
                };
            }
            let Some(p) = leave else {
                return PhaseOutcome::Optimal;
            };
            let mut enter: Option<(usize, Rational)> = None;
            for (j, a) in &self.rows[p] {
                if self.blocked[*j] || !a.is_negative() {
                    continue;
                }
                let ratio = &self.reduced[*j] / a;
                if enter.as_ref().is_none_or(|(_, r)| ratio < *r) {
                    enter = Some((*j, ratio));
                }
            }
            let Some((q, ratio)) = enter else {
                return PhaseOutcome::Infeasible;
            };
            self.note_degenerate(ratio.is_zero());
            self.pivot(p, q);
        }
    }
}

/// Solves `p` exactly. Infeasible and unbounded problems are reported via
/// [`LpStatus`]; the returned value and assignment are meaningful only for
/// [`LpStatus::Optimal`].
///
/// When every constraint is an inequality and the objective makes the
/// all-slack basis dual feasible (e.g. minimizing a nonnegative cost over
/// covering constraints), the dual simplex is used and no artificial
/// variables are introduced; otherwise the two-phase primal simplex runs.
pub fn lp_solve(p: &LpProblem) -> LpSolution {
    let fail = |status| LpSolution {
        status,
        value: Rational::zero(),
        assignment: Vec::new(),
    };

    // Column layout for the original variables.
    let mut maps = Vec::with_capacity(p.num_vars);
    let mut nstruct = 0usize;
    let mut rows: Vec<Row> = Vec::new();
    for b in &p.bounds {
        match &b.lower {
            Some(lo) => {
                if let Some(hi) = &b.upper {
                    if hi < lo {
                        return fail(LpStatus::Infeasible);
                    }
                }
                maps.push(VarMap::Shifted {
                    col: nstruct,
                    offset: lo.clone(),
                });
                nstruct += 1;
            }
            None => {
                maps.push(VarMap::Split {
                    pos: nstruct,
                    neg: nstruct + 1,
                });
                nstruct += 2;
            }
        }
    }

    let mut push_row = |terms: &[(usize, Rational)], relation: Relation, rhs: Rational| {
        let mut coeffs = vec![Rational::zero(); nstruct];
        let mut rhs = rhs;
        for (var, a) in terms {
            if a.is_zero() {
                continue;
            }
            match &maps[*var] {
                VarMap::Shifted { col, offset } => {
                    coeffs[*col] += a;
                    rhs -= a * offset;
                }
                VarMap::Split { pos, neg } => {
                    coeffs[*pos] += a;
                    coeffs[*neg] -= a;
                }
            }
        }
        rows.push(Row { coeffs, relation, rhs });
    };

    for c in &p.constraints {
        let terms: Vec<(usize, Rational)> = c
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_zero())
            .map(|(i, a)| (i, a.clone()))
            .collect();
        push_row(&terms, c.relation, c.rhs.clone());
    }
    for (i, b) in p.bounds.iter().enumerate() {
        if let Some(hi) = &b.upper {
            push_row(&[(i, Rational::one())], Relation::Le, hi.clone());
        }
    }

    // Objective in maximization form over the structural columns.
    let sign = match p.sense {
        Sense::Maximize => Rational::one(),
        Sense::Minimize => -Rational::one(),
    };
    let mut struct_costs = vec![Rational::zero(); nstruct];
    let mut constant = Rational::zero();
    for (var, c) in p.objective.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let c = &sign * c;
        match &maps[var] {
            VarMap::Shifted { col, offset } => {
                struct_costs[*col] += &c;
                constant += &c * offset;
            }
            VarMap::Split { pos, neg } => {
                struct_costs[*pos] += &c;
                struct_costs[*neg] -= &c;
            }
        }
    }

    let dual_start = rows.iter().all(|r| r.relation != Relation::Eq) && struct_costs.iter().all(|c| !c.is_positive());

    let sparse = |coeffs: Vec<Rational>, negate: bool| -> SparseRow {
        coeffs
            .into_iter()
            .enumerate()
            .filter(|(_, a)| !a.is_zero())
            .map(|(j, a)| (j, if negate { -a } else { a }))
            .collect()
    };

    let (mut t, first_art) = if dual_start {
        // Every row as `a.y + s = b` with `s >= 0` basic; `>=` rows negated.
        let m = rows.len();
        let ncols = nstruct + m;
        let mut t = Tableau::empty(ncols);
        for (i, row) in rows.into_iter().enumerate() {
            let negate = row.relation == Relation::Ge;
            let mut r = sparse(row.coeffs, negate);
            r.push((nstruct + i, Rational::one()));
            t.rows.push(r);
            t.rhs.push(if negate { -row.rhs } else { row.rhs });
            t.basis.push(nstruct + i);
        }
        (t, ncols)
    } else {
        // Nonnegative right-hand sides, then slack / surplus / artificial.
        for row in &mut rows {
            if row.rhs.is_negative() {
                row.rhs = -row.rhs.clone();
                for a in &mut row.coeffs {
                    *a = -a.clone();
                }
                row.relation = match row.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
        }
        let nslack = rows.iter().filter(|r| r.relation != Relation::Eq).count();
        let nart = rows.iter().filter(|r| r.relation != Relation::Le).count();
        let ncols = nstruct + nslack + nart;
        let first_art = nstruct + nslack;
        let mut t = Tableau::empty(ncols);
        let (mut slack, mut art) = (nstruct, first_art);
        for row in rows {
            let mut r = sparse(row.coeffs, false);
            match row.relation {
                Relation::Le => {
                    r.push((slack, Rational::one()));
                    t.basis.push(slack);
                    slack += 1;
                }
                Relation::Ge => {
                    r.push((slack, -Rational::one()));
                    r.push((art, Rational::one()));
                    t.basis.push(art);
                    slack += 1;
                    art += 1;
                }
                Relation::Eq => {
                    r.push((art, Rational::one()));
                    t.basis.push(art);
                    art += 1;
                }
            }
            t.rows.push(r);
            t.rhs.push(row.rhs);
        }

        if nart > 0 {
            let mut costs = vec![Rational::zero(); ncols];
            for c in costs.iter_mut().skip(first_art) {
                *c = -Rational::one();
            }
            t.load_objective(&costs);
            t.run_primal();
            if t.value.is_negative() {
                return fail(LpStatus::Infeasible);
            }
            // Pivot remaining zero-valued artificials out; drop redundant rows.
            let mut i = 0;
            while i < t.rows.len() {
                if t.basis[i] >= first_art {
                    match t.rows[i].iter().find(|(j, _)| *j < first_art).map(|(j, _)| *j) {
                        Some(j) => t.pivot(i, j),
                        None => {
                            t.rows.remove(i);
                            t.rhs.remove(i);
                            t.basis.remove(i);
                            continue;
                        }
                    }
                }
                i += 1;
            }
            for b in t.blocked.iter_mut().skip(first_art) {
                *b = true;
            }
        }
        (t, first_art)
    };

    let mut costs = struct_costs;
    costs.resize(t.ncols, Rational::zero());
    t.load_objective(&costs);
    t.bland = false;
    t.degenerate_run = 0;
    let outcome = if dual_start { t.run_dual() } else { t.run_primal() };
    match outcome {
        PhaseOutcome::Optimal => {}
        PhaseOutcome::Unbounded => return fail(LpStatus::Unbounded),
        PhaseOutcome::Infeasible => return fail(LpStatus::Infeasible),
    }

    let mut cols = vec![Rational::zero(); first_art];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < first_art {
            cols[b] = t.rhs[i].clone();
        }
    }
    let assignment: Vec<Rational> = maps
        .iter()
        .map(|m| match m {
            VarMap::Shifted { col, offset } => offset + &cols[*col],
            VarMap::Split { pos, neg } => &cols[*pos] - &cols[*neg],
        })
        .collect();
    let value = p.objective_value(&assignment);
    assert_eq!(
        value,
        &sign * (&t.value + &constant),
        "tableau value disagrees with re-evaluated objective"
    );
    assert!(
        p.is_feasible(&assignment),
        "simplex returned a point violating the constraints"
    );
    trace!(
        "lp solved ({}): {} pivots, {} rows, {} cols",
        if dual_start { "dual" } else { "primal" },
        t.pivots,
        t.rows.len(),
        t.ncols
    );
    LpSolution {
        status: LpStatus::Optimal,
        value,
        assignment,
    }
}

impl Tableau {
    fn empty(ncols: usize) -> Self {
        Tableau {
            rows: Vec::new(),
            rhs: Vec::new(),
            basis: Vec::new(),
            ncols,
            reduced: Vec::new(),
            value: Rational::zero(),
            blocked: vec![false; ncols],
            bland: false,
            degenerate_run: 0,
            pivots: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StrictRelation {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">")]
    Gt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrictConstraint {
    pub coeffs: Vec<Rational>,
    pub relation: StrictRelation,
    pub rhs: Rational,
}

impl StrictConstraint {
    pub fn new(coeffs: Vec<Rational>, relation: StrictRelation, rhs: Rational) -> Self {
        Self { coeffs, relation, rhs }
    }

    pub fn is_satisfied(&self, point: &[Rational]) -> bool {
        let lhs = dot(&self.coeffs, point);
        match self.relation {
            StrictRelation::Lt => lhs < self.rhs,
            StrictRelation::Gt => lhs > self.rhs,
        }
    }
}

/// A mixed system of weak and strict linear constraints.
#[derive(Clone, Debug)]
pub struct StrictSystem {
    pub num_vars: usize,
    pub bounds: Vec<VarBounds>,
    pub weak: Vec<Constraint>,
    pub strict: Vec<StrictConstraint>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrictFeasibility {
    pub feasible: bool,
    /// Optimal margin, clamped to at most 1.
    pub margin: Rational,
    pub witness: Vec<Rational>,
}

impl StrictSystem {
    /// All variables free.
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            bounds: vec![VarBounds::free(); num_vars],
            weak: Vec::new(),
            strict: Vec::new(),
        }
    }

    pub fn weak(&mut self, c: Constraint) -> &mut Self {
        self.weak.push(c);
        self
    }

    pub fn strict(&mut self, c: StrictConstraint) -> &mut Self {
        self.strict.push(c);
        self
    }

    pub fn is_satisfied_by(&self, point: &[Rational]) -> bool {
        self.bounds.iter().zip(point).all(|(b, v)| b.contains(v))
            && self.weak.iter().all(|c| c.is_satisfied(point))
            && self.strict.iter().all(|c| c.is_satisfied(point))
    }
}

/// Decides whether `sys` has a point satisfying every strict constraint
/// strictly. A margin variable `eps <= 1` is subtracted from each strict
/// constraint and maximized; the system is feasible iff the optimal margin
/// is positive, and the optimal point is returned as the witness.
pub fn lp_strict_feasible(sys: &StrictSystem) -> Result<StrictFeasibility> {
    let n = sys.num_vars;
    if sys.bounds.len() != n {
        return Err(invalid("bounds length differs from num_vars"));
    }
    let eps = n;
    let mut lp = LpProblem::new(n + 1, Sense::Maximize);
    for (i, b) in sys.bounds.iter().enumerate() {
        lp.set_bounds(i, b.clone())?;
    }
    lp.set_bounds(
        eps,
        VarBounds {
            lower: None,
            upper: Some(Rational::one()),
        },
    )?;
    let mut objective = vec![Rational::zero(); n + 1];
    objective[eps] = Rational::one();
    lp.set_objective(objective)?;

    let widen = |coeffs: &[Rational], extra: Rational| -> Result<Vec<Rational>> {
        if coeffs.len() != n {
            return Err(invalid("constraint length differs from num_vars"));
        }
        let mut v = coeffs.to_vec();
        v.push(extra);
        Ok(v)
    };
    for c in &sys.weak {
        lp.add_constraint(Constraint::new(
            widen(&c.coeffs, Rational::zero())?,
            c.relation,
            c.rhs.clone(),
        ))?;
    }
    for c in &sys.strict {
        let (extra, relation) = match c.relation {
            StrictRelation::Lt => (Rational::one(), Relation::Le),
            StrictRelation::Gt => (-Rational::one(), Relation::Ge),
        };
        lp.add_constraint(Constraint::new(widen(&c.coeffs, extra)?, relation, c.rhs.clone()))?;
    }

    let sol = lp.solve();
    Ok(match sol.status {
        LpStatus::Optimal => {
            let mut witness = sol.assignment;
            let margin = witness.pop().expect("margin variable");
            let feasible = margin.is_positive();
            debug_assert!(!feasible || sys.is_satisfied_by(&witness));
            StrictFeasibility {
                feasible,
                margin,
                witness,
            }
        }
        // The margin is bounded above, so a non-optimal status means the
        // weak part alone is infeasible.
        _ => StrictFeasibility {
            feasible: false,
            margin: Rational::zero(),
            witness: Vec::new(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::{int, ratio};

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| int(x)).collect()
    }

    fn triangle(sense: Sense) -> LpProblem {
        let mut lp = LpProblem::new(3, sense);
        lp.set_objective(v(&[1, 1, 1])).unwrap();
        let rel = match sense {
            Sense::Maximize => Relation::Le,
            Sense::Minimize => Relation::Ge,
        };
        for pair in [[1, 1, 0], [0, 1, 1], [1, 0, 1]] {
            lp.add_constraint(Constraint::new(v(&pair), rel, int(1))).unwrap();
        }
        for i in 0..3 {
            lp.set_bounds(i, VarBounds::unit()).unwrap();
        }
        lp
    }

    #[test]
    fn triangle_matching_and_cover() {
        let primal = triangle(Sense::Maximize).solve();
        assert_eq!(primal.status, LpStatus::Optimal);
        assert_eq!(primal.value, ratio(3, 2));
        assert_eq!(primal.assignment, vec![ratio(1, 2); 3]);

        let dual = triangle(Sense::Minimize).solve();
        assert_eq!(dual.status, LpStatus::Optimal);
        assert_eq!(dual.value, ratio(3, 2));
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LpProblem::new(1, Sense::Maximize);
        lp.set_objective(v(&[1])).unwrap();
        lp.add_constraint(Constraint::new(v(&[1]), Relation::Ge, int(2)))
            .unwrap();
        assert_eq!(lp.solve().status, LpStatus::Unbounded);
        lp.add_constraint(Constraint::new(v(&[1]), Relation::Le, int(1)))
            .unwrap();
        assert_eq!(lp.solve().status, LpStatus::Infeasible);
    }

    #[test]
    fn dual_path_detects_infeasible() {
        // min x, x >= 2, x <= 1: no equalities and nonnegative cost
        let mut lp = LpProblem::new(1, Sense::Minimize);
        lp.set_objective(v(&[1])).unwrap();
        lp.add_constraint(Constraint::new(v(&[1]), Relation::Ge, int(2)))
            .unwrap();
        lp.add_constraint(Constraint::new(v(&[1]), Relation::Le, int(1)))
            .unwrap();
        assert_eq!(lp.solve().status, LpStatus::Infeasible);
    }

    #[test]
    fn dual_and_primal_paths_agree() {
        // min 3x + 2y + 4z over a covering system; the same optimum is
        // reached through the primal path once an equality forces phase 1
        let build = |with_eq: bool| {
            let mut lp = LpProblem::new(4, Sense::Minimize);
            lp.set_objective(v(&[3, 2, 4, 0])).unwrap();
            lp.add_constraint(Constraint::new(v(&[1, 1, 0, 0]), Relation::Ge, int(2)))
                .unwrap();
            lp.add_constraint(Constraint::new(v(&[0, 1, 1, 0]), Relation::Ge, int(3)))
                .unwrap();
            lp.add_constraint(Constraint::new(v(&[1, 0, 2, 0]), Relation::Ge, int(1)))
                .unwrap();
            if with_eq {
                lp.add_constraint(Constraint::new(v(&[0, 0, 0, 1]), Relation::Eq, int(0)))
                    .unwrap();
            }
            lp.solve()
        };
        let (a, b) = (build(false), build(true));
        assert_eq!(a.status, LpStatus::Optimal);
        assert_eq!(a.value, b.value);
        assert_eq!(a.value, int(7));
    }

    #[test]
    fn free_variables_and_equalities() {
        // min x + 2y, x + y = 1, x - y <= -3, x free, y >= 0
        let mut lp = LpProblem::new(2, Sense::Minimize);
        lp.set_objective(v(&[1, 2])).unwrap();
        lp.set_bounds(0, VarBounds::free()).unwrap();
        lp.add_constraint(Constraint::new(v(&[1, 1]), Relation::Eq, int(1)))
            .unwrap();
        lp.add_constraint(Constraint::new(v(&[1, -1]), Relation::Le, int(-3)))
            .unwrap();
        let sol = lp.solve();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.assignment, vec![int(-1), int(2)]);
        assert_eq!(sol.value, int(3));
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let mut lp = LpProblem::new(2, Sense::Maximize);
        lp.set_objective(v(&[1, 0])).unwrap();
        lp.add_constraint(Constraint::new(v(&[1, 1]), Relation::Eq, int(2)))
            .unwrap();
        lp.add_constraint(Constraint::new(v(&[2, 2]), Relation::Eq, int(4)))
            .unwrap();
        let sol = lp.solve();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.value, int(2));
    }

    #[test]
    fn lower_bounds_are_shifted() {
        let mut lp = LpProblem::new(1, Sense::Minimize);
        lp.set_objective(v(&[1])).unwrap();
        lp.set_bounds(
            0,
            VarBounds {
                lower: Some(ratio(-5, 2)),
                upper: Some(int(4)),
            },
        )
        .unwrap();
        let sol = lp.solve();
        assert_eq!(sol.value, ratio(-5, 2));
    }

    #[test]
    fn rejects_wrong_arity() {
        let mut lp = LpProblem::new(2, Sense::Maximize);
        assert!(lp.set_objective(v(&[1])).is_err());
        assert!(lp
            .add_constraint(Constraint::new(v(&[1, 2, 3]), Relation::Le, int(1)))
            .is_err());
    }

    #[test]
    fn strict_feasibility_examples() {
        let mut sys = StrictSystem::new(1);
        sys.weak(Constraint::new(v(&[1]), Relation::Ge, int(0)));
        sys.strict(StrictConstraint::new(v(&[1]), StrictRelation::Lt, int(1)));
        let res = lp_strict_feasible(&sys).unwrap();
        assert!(res.feasible);
        assert!(sys.is_satisfied_by(&res.witness));

        let mut sys = StrictSystem::new(1);
        sys.weak(Constraint::new(v(&[1]), Relation::Ge, int(1)));
        sys.strict(StrictConstraint::new(v(&[1]), StrictRelation::Lt, int(1)));
        let res = lp_strict_feasible(&sys).unwrap();
        assert!(!res.feasible);
        assert!(res.margin <= int(0));
    }

    #[test]
    fn strict_margin_is_clamped() {
        let mut sys = StrictSystem::new(1);
        sys.strict(StrictConstraint::new(v(&[1]), StrictRelation::Gt, int(0)));
        let res = lp_strict_feasible(&sys).unwrap();
        assert!(res.feasible);
        assert_eq!(res.margin, int(1));
    }

    #[test]
    fn infeasible_weak_part() {
        let mut sys = StrictSystem::new(1);
        sys.weak(Constraint::new(v(&[1]), Relation::Ge, int(2)));
        sys.weak(Constraint::new(v(&[1]), Relation::Le, int(1)));
        assert!(!lp_strict_feasible(&sys).unwrap().feasible);
    }
}
