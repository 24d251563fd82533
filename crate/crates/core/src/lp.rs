//! Exact rational simplex.
//!
//! Two-phase dense simplex over `Rat` with Bland's pivoting rule, so every
//! solve terminates and identical inputs produce identical outcomes, tight
//! sets included. Free variables are split into nonnegative pairs
//! internally; the split never shows up in an [`LpOutcome`].
//!
//! Every optimal outcome carries dual multipliers for the equality and
//! inequality rows, normalized to the program's own sense:
//! `value = eq_duals . b_eq + ineq_duals . b_ineq` exactly, with
//! `ineq_duals >= 0` for maximization and `<= 0` for minimization. The
//! solver checks this identity (and complementary slackness) before
//! returning.

use crate::linalg::{dot, matrix_rank, RatMatrix, RatVector};
use crate::rational::Rat;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Max,
    Min,
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: RatVector,
    /// `eq_lhs * x = eq_rhs`
    pub eq_lhs: RatMatrix,
    pub eq_rhs: RatVector,
    /// `ineq_lhs * x <= ineq_rhs`
    pub ineq_lhs: RatMatrix,
    pub ineq_rhs: RatVector,
    /// `true` entries are constrained `x_i >= 0`; the rest are free.
    pub nonneg: Vec<bool>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LpError {
    #[error("malformed program: {0}")]
    MalformedProgram(String),
    #[error("optimal_face requires an optimal program, got {0}")]
    NotOptimal(&'static str),
}

/// A constraint index usable in a tight set: either an inequality row or a
/// sign-constrained variable sitting at zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TightConstraint {
    Ineq(usize),
    VarZero(usize),
}

#[derive(Debug, Clone)]
pub struct Optimum {
    pub point: RatVector,
    pub value: Rat,
    pub tight_set: BTreeSet<TightConstraint>,
    pub eq_duals: RatVector,
    pub ineq_duals: RatVector,
}

#[derive(Debug, Clone)]
pub enum LpOutcome {
    Optimal(Optimum),
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(&self) -> Option<&Optimum> {
        match self {
            LpOutcome::Optimal(o) => Some(o),
            _ => None,
        }
    }
}

impl LinearProgram {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Maximize (or minimize) `objective` over `{x : eq, ineq, signs}` with
    /// no inequality rows.
    pub fn with_equalities(
        sense: Sense,
        objective: RatVector,
        eq_lhs: RatMatrix,
        eq_rhs: RatVector,
        nonneg: Vec<bool>,
    ) -> Self {
        let n = objective.len();
        LinearProgram {
            sense,
            objective,
            eq_lhs,
            eq_rhs,
            ineq_lhs: RatMatrix::zeros(0, n),
            ineq_rhs: vec![],
            nonneg,
        }
    }

    fn check(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.eq_lhs.cols() != n || self.ineq_lhs.cols() != n || self.nonneg.len() != n {
            return Err(LpError::MalformedProgram(format!(
                "variable count mismatch: objective has {n} entries"
            )));
        }
        if self.eq_lhs.rows() != self.eq_rhs.len() || self.ineq_lhs.rows() != self.ineq_rhs.len() {
            return Err(LpError::MalformedProgram(
                "constraint row/rhs count mismatch".into(),
            ));
        }
        Ok(())
    }

    /// Exact tight set of `point`: inequality rows met with equality plus
    /// sign-constrained variables at zero.
    pub fn tight_set_at(&self, point: &[Rat]) -> BTreeSet<TightConstraint> {
        let mut set = BTreeSet::new();
        for j in 0..self.ineq_lhs.rows() {
            if dot(self.ineq_lhs.row(j), point) == self.ineq_rhs[j] {
                set.insert(TightConstraint::Ineq(j));
            }
        }
        for (i, &nn) in self.nonneg.iter().enumerate() {
            if nn && point[i].is_zero() {
                set.insert(TightConstraint::VarZero(i));
            }
        }
        set
    }

    pub fn is_feasible(&self, point: &[Rat]) -> bool {
        if point.len() != self.num_vars() {
            return false;
        }
        for i in 0..self.eq_lhs.rows() {
            if dot(self.eq_lhs.row(i), point) != self.eq_rhs[i] {
                return false;
            }
        }
        for j in 0..self.ineq_lhs.rows() {
            if dot(self.ineq_lhs.row(j), point) > self.ineq_rhs[j] {
                return false;
            }
        }
        self.nonneg
            .iter()
            .enumerate()
            .all(|(i, &nn)| !nn || !point[i].is_negative())
    }
}

// Standard-form tableau: min c.z s.t. Az = b, z >= 0, artificial columns
// appended so their tableau columns stay equal to B^{-1}.
struct Tableau {
    a: Vec<RatVector>,
    b: RatVector,
    basis: Vec<usize>,
    n_real: usize,
    rows: usize,
    flipped: Vec<bool>,
}

enum SimplexResult {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn new(a: Vec<RatVector>, b: RatVector, c: RatVector) -> Self {
        let rows = a.len();
        let n_real = c.len();
        let mut t = Tableau {
            a,
            b,
            basis: Vec::with_capacity(rows),
            n_real,
            rows,
            flipped: vec![false; rows],
        };
        // Flip rows to b >= 0 and append artificial identity columns.
        for i in 0..rows {
            if t.b[i].is_negative() {
                t.flipped[i] = true;
                t.b[i] = -t.b[i].clone();
                for v in t.a[i].iter_mut() {
                    *v = -v.clone();
                }
            }
        }
        for i in 0..rows {
            for r in 0..rows {
                t.a[r].push(if r == i { Rat::one() } else { Rat::zero() });
            }
            t.basis.push(n_real + i);
        }
        t
    }

    fn cols(&self) -> usize {
        self.n_real + self.rows
    }

    fn cost_of(&self, costs: &[Rat], col: usize) -> Rat {
        costs.get(col).cloned().unwrap_or_else(Rat::zero)
    }

    fn reduced_cost(&self, costs: &[Rat], j: usize) -> Rat {
        let mut r = self.cost_of(costs, j);
        for i in 0..self.rows {
            let cb = self.cost_of(costs, self.basis[i]);
            if !cb.is_zero() && !self.a[i][j].is_zero() {
                r -= cb * &self.a[i][j];
            }
        }
        r
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let inv = Rat::one() / self.a[row][col].clone();
        if !inv.is_one() {
            for v in self.a[row].iter_mut() {
                if !v.is_zero() {
                    *v = &*v * &inv;
                }
            }
            self.b[row] = &self.b[row] * &inv;
        }
        for i in 0..self.rows {
            if i == row || self.a[i][col].is_zero() {
                continue;
            }
            let factor = self.a[i][col].clone();
            for j in 0..self.cols() {
                if !self.a[row][j].is_zero() {
                    let sub = &factor * &self.a[row][j];
                    self.a[i][j] = &self.a[i][j] - &sub;
                }
            }
            let sub = &factor * &self.b[row];
            self.b[i] = &self.b[i] - &sub;
        }
        self.basis[row] = col;
    }

    /// Bland's rule: entering column is the lowest index with negative
    /// reduced cost, leaving row the minimum ratio with lowest basis index.
    fn run(&mut self, costs: &[Rat], allow_artificial_entering: bool) -> SimplexResult {
        loop {
            let limit = if allow_artificial_entering {
                self.cols()
            } else {
                self.n_real
            };
            let mut entering = None;
            for j in 0..limit {
                if self.basis.contains(&j) {
                    continue;
                }
                if self.reduced_cost(costs, j).is_negative() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(e) = entering else {
                return SimplexResult::Optimal;
            };
            let mut leave: Option<(usize, Rat)> = None;
            for i in 0..self.rows {
                if self.a[i][e].is_positive() {
                    let ratio = &self.b[i] / &self.a[i][e];
                    let better = match &leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else {
                return SimplexResult::Unbounded;
            };
            self.pivot(r, e);
        }
    }

    fn basic_value(&self, col: usize) -> Rat {
        for i in 0..self.rows {
            if self.basis[i] == col {
                return self.b[i].clone();
            }
        }
        Rat::zero()
    }

    fn objective_value(&self, costs: &[Rat]) -> Rat {
        let mut v = Rat::zero();
        for i in 0..self.rows {
            let cb = self.cost_of(costs, self.basis[i]);
            if !cb.is_zero() {
                v += cb * &self.b[i];
            }
        }
        v
    }

    /// Row duals `y = c_B^T B^{-1}`, read off the artificial columns and
    /// restored to the pre-flip row orientation.
    fn duals(&self, costs: &[Rat]) -> RatVector {
        (0..self.rows)
            .map(|row| {
                let col = self.n_real + row;
                let mut y = Rat::zero();
                for i in 0..self.rows {
                    let cb = self.cost_of(costs, self.basis[i]);
                    if !cb.is_zero() && !self.a[i][col].is_zero() {
                        y += cb * &self.a[i][col];
                    }
                }
                if self.flipped[row] {
                    -y
                } else {
                    y
                }
            })
            .collect()
    }
}

/// Solves the program exactly. Infeasible and unbounded programs are
/// reported as outcomes, not errors.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpOutcome, LpError> {
    lp.check()?;
    let n = lp.num_vars();
    let m_eq = lp.eq_lhs.rows();
    let m_ineq = lp.ineq_lhs.rows();

    // Column layout: for nonneg x_i one column, for free x_i the pair
    // (x_i^+, x_i^-); then one slack per inequality row.
    let mut col_of_var = Vec::with_capacity(n);
    let mut n_cols = 0usize;
    for &nn in &lp.nonneg {
        col_of_var.push(n_cols);
        n_cols += if nn { 1 } else { 2 };
    }
    let slack0 = n_cols;
    n_cols += m_ineq;

    let mut rows: Vec<RatVector> = Vec::with_capacity(m_eq + m_ineq);
    let mut rhs: RatVector = Vec::with_capacity(m_eq + m_ineq);
    // Row sign flips are handled inside the tableau; remember the original
    // orientation by re-deriving duals against these rows.
    let mut push_row = |coeffs: &[Rat], b: &Rat, slack: Option<usize>| {
        let mut row = vec![Rat::zero(); n_cols];
        for (i, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            row[col_of_var[i]] = c.clone();
            if !lp.nonneg[i] {
                row[col_of_var[i] + 1] = -c.clone();
            }
        }
        if let Some(s) = slack {
            row[slack0 + s] = Rat::one();
        }
        rows.push(row);
        rhs.push(b.clone());
    };
    for i in 0..m_eq {
        push_row(lp.eq_lhs.row(i), &lp.eq_rhs[i], None);
    }
    for j in 0..m_ineq {
        push_row(lp.ineq_lhs.row(j), &lp.ineq_rhs[j], Some(j));
    }

    // Internal problem is always a minimization.
    let mut c_int = vec![Rat::zero(); n_cols];
    for (i, obj) in lp.objective.iter().enumerate() {
        let signed = match lp.sense {
            Sense::Max => -obj.clone(),
            Sense::Min => obj.clone(),
        };
        c_int[col_of_var[i]] = signed.clone();
        if !lp.nonneg[i] {
            c_int[col_of_var[i] + 1] = -signed;
        }
    }

    let mut tab = Tableau::new(rows, rhs, c_int.clone());

    // Phase 1: minimize the artificial sum.
    let mut c_phase1 = vec![Rat::zero(); tab.cols()];
    for j in tab.n_real..tab.cols() {
        c_phase1[j] = Rat::one();
    }
    match tab.run(&c_phase1, true) {
        SimplexResult::Unbounded => unreachable!("phase 1 is bounded below by zero"),
        SimplexResult::Optimal => {}
    }
    if !tab.objective_value(&c_phase1).is_zero() {
        return Ok(LpOutcome::Infeasible);
    }
    // Drive basic artificials out where possible; rows that cannot be
    // pivoted are redundant and stay pinned at zero.
    for i in 0..tab.rows {
        if tab.basis[i] >= tab.n_real {
            if let Some(j) = (0..tab.n_real).find(|&j| !tab.a[i][j].is_zero()) {
                tab.pivot(i, j);
            }
        }
    }

    // Phase 2.
    if let SimplexResult::Unbounded = tab.run(&c_int, false) {
        return Ok(LpOutcome::Unbounded);
    }

    // Recover the point in original variables.
    let mut point = Vec::with_capacity(n);
    for (i, &nn) in lp.nonneg.iter().enumerate() {
        let plus = tab.basic_value(col_of_var[i]);
        if nn {
            point.push(plus);
        } else {
            point.push(plus - tab.basic_value(col_of_var[i] + 1));
        }
    }

    let value_int = tab.objective_value(&c_int);
    let duals_int = tab.duals(&c_int);
    let (value, duals): (Rat, RatVector) = match lp.sense {
        Sense::Max => (-value_int, duals_int.iter().map(|d| -d).collect()),
        Sense::Min => (value_int, duals_int),
    };
    let eq_duals = duals[..m_eq].to_vec();
    let ineq_duals = duals[m_eq..].to_vec();

    let opt = Optimum {
        tight_set: lp.tight_set_at(&point),
        point,
        value,
        eq_duals,
        ineq_duals,
    };
    certify(lp, &opt);
    Ok(LpOutcome::Optimal(opt))
}

/// Internal strong-duality and feasibility certificate; a violation is a
/// solver bug, not an input condition.
fn certify(lp: &LinearProgram, opt: &Optimum) {
    assert!(lp.is_feasible(&opt.point), "simplex returned infeasible point");
    assert_eq!(dot(&lp.objective, &opt.point), opt.value, "objective mismatch");
    let dual_value = dot(&opt.eq_duals, &lp.eq_rhs) + dot(&opt.ineq_duals, &lp.ineq_rhs);
    assert_eq!(dual_value, opt.value, "strong duality violated");
    for (j, d) in opt.ineq_duals.iter().enumerate() {
        let ok_sign = match lp.sense {
            Sense::Max => !d.is_negative(),
            Sense::Min => !d.is_positive(),
        };
        assert!(ok_sign, "inequality dual {j} has wrong sign");
        if !d.is_zero() {
            assert!(
                opt.tight_set.contains(&TightConstraint::Ineq(j)),
                "complementary slackness violated on inequality {j}"
            );
        }
    }
}

/// The set of constraints tight at *every* optimal point, found by
/// re-optimizing each tight constraint's slack on the optimal face, plus a
/// flag for whether that face is a single vertex.
pub fn optimal_face(
    lp: &LinearProgram,
) -> Result<(BTreeSet<TightConstraint>, bool), LpError> {
    let outcome = solve_lp(lp)?;
    let opt = match outcome {
        LpOutcome::Optimal(o) => o,
        LpOutcome::Infeasible => return Err(LpError::NotOptimal("infeasible")),
        LpOutcome::Unbounded => return Err(LpError::NotOptimal("unbounded")),
    };

    // Restrict to the optimal face by pinning the objective value.
    let face = |extra_obj: RatVector, sense: Sense| -> LinearProgram {
        let mut eq_lhs = lp.eq_lhs.clone();
        let mut eq_rhs = lp.eq_rhs.clone();
        eq_lhs = eq_lhs.vstack(&RatMatrix::new(1, lp.num_vars(), lp.objective.clone()));
        eq_rhs.push(opt.value.clone());
        LinearProgram {
            sense,
            objective: extra_obj,
            eq_lhs,
            eq_rhs,
            ineq_lhs: lp.ineq_lhs.clone(),
            ineq_rhs: lp.ineq_rhs.clone(),
            nonneg: lp.nonneg.clone(),
        }
    };

    let mut everywhere = BTreeSet::new();
    for &t in &opt.tight_set {
        // Maximize the slack of t on the face; zero maximum means t is
        // tight on the whole face.
        let mut obj = vec![Rat::zero(); lp.num_vars()];
        let (sense, target_zero) = match t {
            TightConstraint::Ineq(j) => {
                for (i, c) in lp.ineq_lhs.row(j).iter().enumerate() {
                    obj[i] = -c.clone();
                }
                (Sense::Max, -lp.ineq_rhs[j].clone())
            }
            TightConstraint::VarZero(i) => {
                obj[i] = Rat::one();
                (Sense::Max, Rat::zero())
            }
        };
        match solve_lp(&face(obj, sense))? {
            LpOutcome::Optimal(o) if o.value == target_zero => {
                everywhere.insert(t);
            }
            _ => {}
        }
    }

    // Face dimension: 0 iff the affine system of equalities, the pinned
    // objective, and the everywhere-tight constraints has full column rank.
    let n = lp.num_vars();
    let mut rows: Vec<RatVector> = Vec::new();
    for i in 0..lp.eq_lhs.rows() {
        rows.push(lp.eq_lhs.row(i).to_vec());
    }
    rows.push(lp.objective.clone());
    for &t in &everywhere {
        match t {
            TightConstraint::Ineq(j) => rows.push(lp.ineq_lhs.row(j).to_vec()),
            TightConstraint::VarZero(i) => {
                let mut r = vec![Rat::zero(); n];
                r[i] = Rat::one();
                rows.push(r);
            }
        }
    }
    let mat = RatMatrix::new(rows.len(), n, rows.concat());
    let is_unique_vertex = matrix_rank(&mat) == n;
    Ok((everywhere, is_unique_vertex))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Compactness {
    Compact,
    Unbounded,
    Empty,
}

/// Tests whether `{x : Ex = e, x >= 0}` is nonempty and bounded. Bounded is
/// decided by the recession cone `{Ex = 0, x >= 0, sum x <= 1}`: the
/// polytope is bounded iff the cone's maximum coordinate sum is zero.
pub fn is_polytope_compact(e_mat: &RatMatrix, e_rhs: &RatVector) -> Compactness {
    let n = e_mat.cols();
    let feasibility = LinearProgram::with_equalities(
        Sense::Max,
        vec![Rat::zero(); n],
        e_mat.clone(),
        e_rhs.clone(),
        vec![true; n],
    );
    match solve_lp(&feasibility).expect("well-formed by construction") {
        LpOutcome::Infeasible => return Compactness::Empty,
        LpOutcome::Unbounded => unreachable!("constant objective"),
        LpOutcome::Optimal(_) => {}
    }
    let ones = vec![Rat::one(); n];
    let cone = LinearProgram {
        sense: Sense::Max,
        objective: ones.clone(),
        eq_lhs: e_mat.clone(),
        eq_rhs: vec![Rat::zero(); e_mat.rows()],
        ineq_lhs: RatMatrix::new(1, n, ones),
        ineq_rhs: vec![Rat::one()],
        nonneg: vec![true; n],
    };
    match solve_lp(&cone).expect("well-formed by construction") {
        LpOutcome::Optimal(o) if o.value.is_zero() => Compactness::Compact,
        _ => Compactness::Unbounded,
    }
}
