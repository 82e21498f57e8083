//! Exact feasibility of mixed strict/non-strict rational linear systems.
//!
//! A system is a list of rows `a·z ≤ b` or `a·z < b` over free variables.
//! [`solve_mixed_system`] either finds a strictly feasible point or returns
//! nonnegative multipliers refuting the system: a combination with vanishing
//! coefficients whose bounds sum to a negative value, or to zero with
//! positive weight on a strict row (Motzkin-style refutation).
//!
//! Strictness is handled by one shared slack variable: every strict row
//! `a·z < b` becomes `a·z + eps ≤ b`, `eps` is maximized subject to the
//! relaxed system together with `eps ≤ 1`, and the verdict is strictly
//! feasible iff the maximum is positive. The maximization runs a dense
//! two-phase simplex over exact rationals with Bland's pivoting rule, so it
//! terminates without perturbation and the refutation multipliers fall out
//! of the slack columns' reduced costs.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::rational::{format_rat, Rat};

/// Row relation: `a·z ≤ b` or `a·z < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    NonStrictLeq,
    StrictLess,
}

/// One row of a system. Zero coefficients are omitted from the map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearConstraint {
    pub coefficients: BTreeMap<usize, Rat>,
    pub bound: Rat,
    pub relation: Relation,
}

impl LinearConstraint {
    pub fn new(coefficients: Vec<(usize, Rat)>, bound: Rat, relation: Relation) -> Self {
        let mut map: BTreeMap<usize, Rat> = BTreeMap::new();
        for (var, coeff) in coefficients {
            let entry = map.entry(var).or_insert_with(Rat::zero);
            *entry += coeff;
        }
        map.retain(|_, c| !c.is_zero());
        LinearConstraint { coefficients: map, bound, relation }
    }

    fn evaluate(&self, point: &[Rat]) -> Rat {
        let mut value = Rat::zero();
        for (&var, coeff) in &self.coefficients {
            value += coeff * &point[var];
        }
        value
    }

    fn holds_at(&self, point: &[Rat]) -> bool {
        let value = self.evaluate(point);
        match self.relation {
            Relation::NonStrictLeq => value <= self.bound,
            Relation::StrictLess => value < self.bound,
        }
    }
}

/// A mixed system over `variable_count` free variables.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinearSystem {
    pub variable_count: usize,
    pub constraints: Vec<LinearConstraint>,
}

impl LinearSystem {
    pub fn new(variable_count: usize) -> Self {
        LinearSystem { variable_count, constraints: Vec::new() }
    }

    pub fn add(&mut self, coefficients: Vec<(usize, Rat)>, bound: Rat, relation: Relation) {
        self.push(LinearConstraint::new(coefficients, bound, relation));
    }

    pub fn push(&mut self, row: LinearConstraint) {
        debug_assert!(row.coefficients.keys().all(|&v| v < self.variable_count));
        self.constraints.push(row);
    }

    pub fn row_count(&self) -> usize {
        self.constraints.len()
    }

    pub fn strict_row_count(&self) -> usize {
        self.constraints
            .iter()
            .filter(|c| c.relation == Relation::StrictLess)
            .count()
    }

    /// Human-readable dump, one `coeff·var … rel bound` row per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for row in &self.constraints {
            if row.coefficients.is_empty() {
                out.push('0');
            } else {
                for (k, (&var, coeff)) in row.coefficients.iter().enumerate() {
                    if k > 0 {
                        out.push_str(" + ");
                    }
                    let _ = write!(out, "{}·x{}", format_rat(coeff), var);
                }
            }
            let rel = match row.relation {
                Relation::NonStrictLeq => "<=",
                Relation::StrictLess => "<",
            };
            let _ = writeln!(out, " {} {}", rel, format_rat(&row.bound));
        }
        out
    }
}

/// Result of [`solve_mixed_system`]: a strictly feasible point together with
/// the exact minimum slack over strict rows, or a refuting combination.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeasibilityOutcome {
    StrictlyFeasible { point: Vec<Rat>, min_strict_slack: Rat },
    Infeasible { multipliers: Vec<Rat> },
}

impl FeasibilityOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityOutcome::StrictlyFeasible { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("expected {expected} entries, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// True iff every row holds with its declared relation at `point`.
pub fn check_point(sys: &LinearSystem, point: &[Rat]) -> Result<bool, LpError> {
    if point.len() != sys.variable_count {
        return Err(LpError::DimensionMismatch {
            expected: sys.variable_count,
            got: point.len(),
        });
    }
    Ok(sys.constraints.iter().all(|row| row.holds_at(point)))
}

/// True iff `multipliers ≥ 0` combine the rows into a contradiction:
/// coefficients vanish and the bounds sum to a negative value, or to zero
/// with positive weight on at least one strict row.
pub fn validate_refutation(sys: &LinearSystem, multipliers: &[Rat]) -> Result<bool, LpError> {
    if multipliers.len() != sys.constraints.len() {
        return Err(LpError::DimensionMismatch {
            expected: sys.constraints.len(),
            got: multipliers.len(),
        });
    }
    if multipliers.iter().any(|m| m < &Rat::zero()) {
        return Ok(false);
    }
    let mut combined: BTreeMap<usize, Rat> = BTreeMap::new();
    let mut bound_sum = Rat::zero();
    let mut strict_weight = false;
    for (row, m) in sys.constraints.iter().zip(multipliers) {
        if m.is_zero() {
            continue;
        }
        for (&var, coeff) in &row.coefficients {
            let entry = combined.entry(var).or_insert_with(Rat::zero);
            *entry += coeff * m;
        }
        bound_sum += &row.bound * m;
        if row.relation == Relation::StrictLess {
            strict_weight = true;
        }
    }
    if combined.values().any(|c| !c.is_zero()) {
        return Ok(false);
    }
    Ok(bound_sum < Rat::zero() || (bound_sum.is_zero() && strict_weight))
}

/// Decides strict feasibility of a mixed system, exactly.
///
/// The outcome always validates: a strictly feasible point passes
/// [`check_point`], refutation multipliers pass [`validate_refutation`].
pub fn solve_mixed_system(sys: &LinearSystem) -> FeasibilityOutcome {
    // Trivial rows are resolved up front: a constant row that fails refutes
    // the system by itself, a constant row that holds carries multiplier 0.
    for (r, row) in sys.constraints.iter().enumerate() {
        if row.coefficients.is_empty() {
            let violated = match row.relation {
                Relation::NonStrictLeq => row.bound < Rat::zero(),
                Relation::StrictLess => row.bound <= Rat::zero(),
            };
            if violated {
                let mut multipliers = vec![Rat::zero(); sys.constraints.len()];
                multipliers[r] = Rat::one();
                return FeasibilityOutcome::Infeasible { multipliers };
            }
        }
    }

    // Deduplicate rows with identical coefficient vectors, keeping the
    // tightest (smallest bound; strict preferred on ties). The kept row
    // implies every dropped one, and refutation multipliers map back with
    // zeros on dropped rows.
    let mut kept: Vec<usize> = Vec::new();
    let mut group: BTreeMap<Vec<(usize, Rat)>, usize> = BTreeMap::new();
    for (r, row) in sys.constraints.iter().enumerate() {
        if row.coefficients.is_empty() {
            continue; // trivially true, handled above
        }
        let sig: Vec<(usize, Rat)> = row
            .coefficients
            .iter()
            .map(|(&v, c)| (v, c.clone()))
            .collect();
        match group.get(&sig) {
            None => {
                group.insert(sig, kept.len());
                kept.push(r);
            }
            Some(&slot) => {
                let cur = &sys.constraints[kept[slot]];
                let tighter = row.bound < cur.bound
                    || (row.bound == cur.bound
                        && row.relation == Relation::StrictLess
                        && cur.relation == Relation::NonStrictLeq);
                if tighter {
                    kept[slot] = r;
                }
            }
        }
    }

    let d = sys.variable_count;
    let strict_rows: Vec<bool> = kept
        .iter()
        .map(|&r| sys.constraints[r].relation == Relation::StrictLess)
        .collect();
    let has_strict = strict_rows.iter().any(|&s| s);

    // Structural columns: u, v (free variables split as z = u − v), then the
    // shared strictness slack eps when strict rows are present.
    let eps_col = if has_strict { Some(2 * d) } else { None };
    let structural = 2 * d + usize::from(has_strict);

    // Row data over structural columns, as g·w ≤ bound.
    let mut gs: Vec<Vec<Rat>> = Vec::with_capacity(kept.len() + 1);
    let mut bounds: Vec<Rat> = Vec::with_capacity(kept.len() + 1);
    for (kr, &r) in kept.iter().enumerate() {
        let row = &sys.constraints[r];
        let mut g = vec![Rat::zero(); structural];
        for (&var, coeff) in &row.coefficients {
            g[var] = coeff.clone();
            g[d + var] = -coeff.clone();
        }
        if strict_rows[kr] {
            g[eps_col.unwrap()] = Rat::one();
        }
        gs.push(g);
        bounds.push(row.bound.clone());
    }
    if let Some(eps) = eps_col {
        // eps ≤ 1 bounds the phase-2 objective.
        let mut g = vec![Rat::zero(); structural];
        g[eps] = Rat::one();
        gs.push(g);
        bounds.push(Rat::one());
    }

    let mut tableau = Tableau::new(structural, gs, bounds);
    let expand = |reduced: Vec<Rat>| -> Vec<Rat> {
        // Map multipliers on kept rows back to the original indexing; the
        // eps-cap row (last, when present) is provably weightless and the
        // dropped rows are implied, so both get multiplier zero.
        let mut multipliers = vec![Rat::zero(); sys.constraints.len()];
        for (kr, &r) in kept.iter().enumerate() {
            multipliers[r] = reduced[kr].clone();
        }
        multipliers
    };

    if !tableau.phase_one() {
        return FeasibilityOutcome::Infeasible { multipliers: expand(tableau.slack_reduced_costs()) };
    }

    match eps_col {
        None => {
            let point = tableau.extract_point(d);
            debug_assert_eq!(check_point(sys, &point), Ok(true));
            FeasibilityOutcome::StrictlyFeasible { point, min_strict_slack: Rat::one() }
        }
        Some(eps) => {
            tableau.phase_two(eps);
            let eps_value = -tableau.objective_value();
            if eps_value > Rat::zero() {
                let point = tableau.extract_point(d);
                let min_strict_slack = sys
                    .constraints
                    .iter()
                    .filter(|row| row.relation == Relation::StrictLess)
                    .map(|row| &row.bound - row.evaluate(&point))
                    .min()
                    .expect("strict rows present");
                debug_assert!(min_strict_slack > Rat::zero());
                debug_assert_eq!(check_point(sys, &point), Ok(true));
                FeasibilityOutcome::StrictlyFeasible { point, min_strict_slack }
            } else {
                let multipliers = expand(tableau.slack_reduced_costs());
                debug_assert_eq!(validate_refutation(sys, &multipliers), Ok(true));
                FeasibilityOutcome::Infeasible { multipliers }
            }
        }
    }
}

/// Dense simplex tableau in computational standard form
/// `Mx = rhs, x ≥ 0, rhs ≥ 0` with slack and artificial columns.
struct Tableau {
    cols: usize,
    rows: Vec<Vec<Rat>>,
    rhs: Vec<Rat>,
    basis: Vec<usize>,
    /// Per inequality row: its slack column and whether the equality was
    /// negated to keep the right-hand side nonnegative.
    slack_col: Vec<usize>,
    /// Objective coefficients of the current phase (zero except artificials
    /// in phase one / the eps column in phase two).
    cost: Vec<Rat>,
    /// Reduced-cost row for the current phase.
    reduced: Vec<Rat>,
    first_artificial: usize,
    ineq_rows: usize,
}

impl Tableau {
    fn new(structural: usize, gs: Vec<Vec<Rat>>, bounds: Vec<Rat>) -> Self {
        let m = gs.len();
        let slack_base = structural;
        let first_artificial = structural + m;
        // Artificial columns are allocated per negated row only.
        let negated: Vec<bool> = bounds.iter().map(|b| b < &Rat::zero()).collect();
        let art_count = negated.iter().filter(|&&n| n).count();
        let cols = first_artificial + art_count;

        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut slack_col = Vec::with_capacity(m);
        let mut next_art = first_artificial;
        for (r, g) in gs.into_iter().enumerate() {
            let mut row = vec![Rat::zero(); cols];
            let sign = if negated[r] { -Rat::one() } else { Rat::one() };
            for (j, coeff) in g.into_iter().enumerate() {
                if !coeff.is_zero() {
                    row[j] = coeff * &sign;
                }
            }
            let s = slack_base + r;
            row[s] = sign.clone();
            slack_col.push(s);
            if negated[r] {
                row[next_art] = Rat::one();
                basis.push(next_art);
                next_art += 1;
                rhs.push(-bounds[r].clone());
            } else {
                basis.push(s);
                rhs.push(bounds[r].clone());
            }
            rows.push(row);
        }

        Tableau {
            cols,
            rows,
            rhs,
            basis,
            slack_col,
            cost: vec![Rat::zero(); cols],
            reduced: vec![Rat::zero(); cols],
            first_artificial,
            ineq_rows: m,
        }
    }

    fn recompute_reduced(&mut self) {
        self.reduced = self.cost.clone();
        for (r, row) in self.rows.iter().enumerate() {
            let cb = self.cost[self.basis[r]].clone();
            if cb.is_zero() {
                continue;
            }
            for (target, coeff) in self.reduced.iter_mut().zip(row) {
                if !coeff.is_zero() {
                    *target -= &cb * coeff;
                }
            }
        }
    }

    fn objective_value(&self) -> Rat {
        let mut value = Rat::zero();
        for (r, b) in self.basis.iter().enumerate() {
            if !self.cost[*b].is_zero() {
                value += &self.cost[*b] * &self.rhs[r];
            }
        }
        value
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let pivot = self.rows[row][col].clone();
        debug_assert!(!pivot.is_zero());
        for j in 0..self.cols {
            if !self.rows[row][j].is_zero() {
                self.rows[row][j] = &self.rows[row][j] / &pivot;
            }
        }
        self.rhs[row] = &self.rhs[row] / &pivot;
        for r in 0..self.rows.len() {
            if r == row || self.rows[r][col].is_zero() {
                continue;
            }
            let factor = self.rows[r][col].clone();
            for j in 0..self.cols {
                if !self.rows[row][j].is_zero() {
                    let delta = &factor * &self.rows[row][j];
                    self.rows[r][j] -= delta;
                }
            }
            let delta = &factor * &self.rhs[row];
            self.rhs[r] -= delta;
        }
        if !self.reduced[col].is_zero() {
            let factor = self.reduced[col].clone();
            for j in 0..self.cols {
                if !self.rows[row][j].is_zero() {
                    let delta = &factor * &self.rows[row][j];
                    self.reduced[j] -= delta;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Bland's rule: entering column = smallest eligible index with negative
    /// reduced cost; leaving row = minimum ratio, ties by smallest basic
    /// column. Returns false when optimal.
    fn bland_step(&mut self, allow_artificial: bool) -> bool {
        let limit = if allow_artificial { self.cols } else { self.first_artificial };
        let entering = (0..limit).find(|&j| self.reduced[j] < Rat::zero());
        let Some(col) = entering else {
            return false;
        };
        let mut leaving: Option<(usize, Rat)> = None;
        for r in 0..self.rows.len() {
            if self.rows[r][col] > Rat::zero() {
                let ratio = &self.rhs[r] / &self.rows[r][col];
                let better = match &leaving {
                    None => true,
                    Some((lr, lratio)) => {
                        ratio < *lratio || (ratio == *lratio && self.basis[r] < self.basis[*lr])
                    }
                };
                if better {
                    leaving = Some((r, ratio));
                }
            }
        }
        let (row, _) = leaving.expect("objective is bounded by construction");
        self.pivot(row, col);
        true
    }

    fn run(&mut self, allow_artificial: bool) {
        let mut steps = 0u64;
        while self.bland_step(allow_artificial) {
            steps += 1;
            assert!(steps < 50_000_000, "simplex failed to terminate");
        }
    }

    /// Minimizes the artificial sum from the all-slack/artificial start.
    /// Returns true when a feasible basis was found.
    fn phase_one(&mut self) -> bool {
        for j in self.first_artificial..self.cols {
            self.cost[j] = Rat::one();
        }
        self.recompute_reduced();
        self.run(true);
        if !self.objective_value().is_zero() {
            return false;
        }
        self.drive_out_artificials();
        true
    }

    /// Pivots basic artificials (necessarily at zero) onto real columns.
    /// Rows that are zero over all real columns are redundant; their
    /// artificial stays pinned at zero and never participates again.
    fn drive_out_artificials(&mut self) {
        for r in 0..self.rows.len() {
            if self.basis[r] < self.first_artificial {
                continue;
            }
            debug_assert!(self.rhs[r].is_zero());
            if let Some(col) = (0..self.first_artificial).find(|&j| !self.rows[r][j].is_zero()) {
                self.pivot(r, col);
            }
        }
    }

    /// Minimizes `−eps`; artificial columns are no longer eligible.
    fn phase_two(&mut self, eps_col: usize) {
        for c in self.cost.iter_mut() {
            *c = Rat::zero();
        }
        self.cost[eps_col] = -Rat::one();
        self.recompute_reduced();
        self.run(false);
    }

    /// Values of the original free variables `z = u − v` at the current
    /// basic solution.
    fn extract_point(&self, d: usize) -> Vec<Rat> {
        let mut w = vec![Rat::zero(); 2 * d];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < 2 * d {
                w[b] = self.rhs[r].clone();
            }
        }
        (0..d).map(|j| &w[j] - &w[d + j]).collect()
    }

    /// Reduced costs of the inequality rows' slack columns. At optimality of
    /// either phase these are exactly the nonnegative multipliers of the
    /// inequality-form dual.
    fn slack_reduced_costs(&self) -> Vec<Rat> {
        (0..self.ineq_rows)
            .map(|r| self.reduced[self.slack_col[r]].clone())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    fn leq(coeffs: Vec<(usize, i64)>, bound: i64) -> (Vec<(usize, Rat)>, Rat, Relation) {
        (
            coeffs.into_iter().map(|(v, c)| (v, rat_int(c))).collect(),
            rat_int(bound),
            Relation::NonStrictLeq,
        )
    }

    fn strict(coeffs: Vec<(usize, i64)>, bound: i64) -> (Vec<(usize, Rat)>, Rat, Relation) {
        (
            coeffs.into_iter().map(|(v, c)| (v, rat_int(c))).collect(),
            rat_int(bound),
            Relation::StrictLess,
        )
    }

    fn system(vars: usize, rows: Vec<(Vec<(usize, Rat)>, Rat, Relation)>) -> LinearSystem {
        let mut sys = LinearSystem::new(vars);
        for (c, b, rel) in rows {
            sys.add(c, b, rel);
        }
        sys
    }

    #[test]
    fn strictly_feasible_interval() {
        // x ≥ 0 (as −x ≤ 0), x < 1.
        let sys = system(1, vec![leq(vec![(0, -1)], 0), strict(vec![(0, 1)], 1)]);
        match solve_mixed_system(&sys) {
            FeasibilityOutcome::StrictlyFeasible { point, min_strict_slack } => {
                assert_eq!(check_point(&sys, &point), Ok(true));
                assert!(min_strict_slack > Rat::zero());
            }
            other => panic!("expected feasible, got {other:?}"),
        }
    }

    #[test]
    fn infeasible_pair_adds_to_contradiction() {
        // x ≤ 0 and −x ≤ −1 sum to 0 ≤ −1.
        let sys = system(1, vec![leq(vec![(0, 1)], 0), leq(vec![(0, -1)], -1)]);
        match solve_mixed_system(&sys) {
            FeasibilityOutcome::Infeasible { multipliers } => {
                assert_eq!(validate_refutation(&sys, &multipliers), Ok(true));
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
        // The canonical multipliers also validate.
        assert_eq!(
            validate_refutation(&sys, &[rat_int(1), rat_int(1)]),
            Ok(true)
        );
        assert_eq!(
            validate_refutation(&sys, &[rat_int(1), rat_int(0)]),
            Ok(false)
        );
    }

    #[test]
    fn strict_motzkin_case() {
        // x < 0 and −x < 0: zero combination with strict weight.
        let sys = system(1, vec![strict(vec![(0, 1)], 0), strict(vec![(0, -1)], 0)]);
        match solve_mixed_system(&sys) {
            FeasibilityOutcome::Infeasible { multipliers } => {
                assert_eq!(validate_refutation(&sys, &multipliers), Ok(true));
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
        assert_eq!(
            validate_refutation(&sys, &[rat_int(1), rat_int(1)]),
            Ok(true)
        );
    }

    #[test]
    fn empty_system_is_feasible_everywhere() {
        let sys = LinearSystem::new(2);
        assert_eq!(check_point(&sys, &[rat_int(5), rat(-7, 3)]), Ok(true));
        assert!(solve_mixed_system(&sys).is_feasible());
    }

    #[test]
    fn constant_rows() {
        // 0 < 0 alone is infeasible with multiplier 1.
        let sys = system(1, vec![strict(vec![], 0)]);
        match solve_mixed_system(&sys) {
            FeasibilityOutcome::Infeasible { multipliers } => {
                assert_eq!(multipliers, vec![rat_int(1)]);
                assert_eq!(validate_refutation(&sys, &multipliers), Ok(true));
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
        // 0 ≤ 3 is vacuous.
        let sys = system(1, vec![leq(vec![], 3), strict(vec![(0, 1)], 1)]);
        assert!(solve_mixed_system(&sys).is_feasible());
    }

    #[test]
    fn equality_forced_point_is_not_strict() {
        // x ≤ 1, −x ≤ −1 force x = 1; x < 1 then fails.
        let sys = system(
            1,
            vec![
                leq(vec![(0, 1)], 1),
                leq(vec![(0, -1)], -1),
                strict(vec![(0, 1)], 1),
            ],
        );
        match solve_mixed_system(&sys) {
            FeasibilityOutcome::Infeasible { multipliers } => {
                assert_eq!(validate_refutation(&sys, &multipliers), Ok(true));
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn negative_bounds_need_artificials() {
        // −x ≤ −3 with x < 10: feasible, e.g. anything in [3, 10).
        let sys = system(1, vec![leq(vec![(0, -1)], -3), strict(vec![(0, 1)], 10)]);
        match solve_mixed_system(&sys) {
            FeasibilityOutcome::StrictlyFeasible { point, .. } => {
                assert_eq!(check_point(&sys, &point), Ok(true));
            }
            other => panic!("expected feasible, got {other:?}"),
        }
    }

    #[test]
    fn two_dimensional_strict_polytope() {
        // x + y < 2, x ≥ 0, y ≥ 0, x − y ≤ 1/2.
        let mut sys = LinearSystem::new(2);
        sys.add(
            vec![(0, rat_int(1)), (1, rat_int(1))],
            rat_int(2),
            Relation::StrictLess,
        );
        sys.add(vec![(0, rat_int(-1))], rat_int(0), Relation::NonStrictLeq);
        sys.add(vec![(1, rat_int(-1))], rat_int(0), Relation::NonStrictLeq);
        sys.add(
            vec![(0, rat_int(1)), (1, rat_int(-1))],
            rat(1, 2),
            Relation::NonStrictLeq,
        );
        match solve_mixed_system(&sys) {
            FeasibilityOutcome::StrictlyFeasible { point, min_strict_slack } => {
                assert_eq!(check_point(&sys, &point), Ok(true));
                assert!(min_strict_slack > Rat::zero());
            }
            other => panic!("expected feasible, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_rows_keep_refutations_aligned() {
        // The same strict pair twice; multipliers must index the original
        // four rows.
        let sys = system(
            1,
            vec![
                strict(vec![(0, 1)], 0),
                strict(vec![(0, -1)], 0),
                strict(vec![(0, 1)], 0),
                strict(vec![(0, -1)], 0),
            ],
        );
        match solve_mixed_system(&sys) {
            FeasibilityOutcome::Infeasible { multipliers } => {
                assert_eq!(multipliers.len(), 4);
                assert_eq!(validate_refutation(&sys, &multipliers), Ok(true));
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let sys = system(2, vec![leq(vec![(0, 1)], 0)]);
        assert!(check_point(&sys, &[rat_int(0)]).is_err());
        assert!(validate_refutation(&sys, &[]).is_err());
    }

    #[test]
    fn verdicts_are_deterministic() {
        let sys = system(
            2,
            vec![
                strict(vec![(0, 1), (1, 2)], 3),
                leq(vec![(0, -1)], 0),
                leq(vec![(1, -1)], 0),
            ],
        );
        let a = solve_mixed_system(&sys);
        let b = solve_mixed_system(&sys);
        assert_eq!(a, b);
    }
}
