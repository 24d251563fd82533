//! The bilinear game model.
//!
//! A game is the six-tuple `(A, B, E, F, e, f)` with strategy polytopes
//! `X = {Ex = e, x >= 0}` and `Y = {Fy = f, y >= 0}` and payoffs `x^T A y`,
//! `x^T B y`. Validation scales all data to integers, drops dependent
//! equality rows, and rejects empty or unbounded strategy sets, so every
//! constructed game satisfies the assumptions the solvers rely on.
//!
//! Best responses are primal-dual LPs; their complementarity conditions
//! define the best response polytopes P and Q whose inequality labels
//! 1..M+N turn Nash equilibria into fully-labeled pairs.

use crate::linalg::{dot, matrix_rank, vec_scale, RatMatrix, RatVector};
use crate::lp::{is_polytope_compact, solve_lp, Compactness, LinearProgram, LpOutcome, Sense};
use crate::polytope::{Polytope, PolytopeError};
use crate::rational::{rat, Rat};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Player {
    Row,
    Col,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GameError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("{0:?} player's strategy set is not compact")]
    NonCompactStrategySet(Player),
    #[error("{0:?} player's strategy set is empty")]
    EmptyStrategySet(Player),
    #[error("strategy is not feasible for {0:?} player")]
    InfeasibleStrategy(Player),
    #[error("point is not in the best response polytope")]
    PointNotInPolytope,
}

impl From<PolytopeError> for GameError {
    fn from(_: PolytopeError) -> Self {
        GameError::PointNotInPolytope
    }
}

/// A validated bilinear game. All entries are integers, equality rows are
/// linearly independent, and both strategy polytopes are nonempty and
/// bounded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BilinearGame {
    pub a: RatMatrix,
    pub b: RatMatrix,
    pub e_mat: RatMatrix,
    pub e_rhs: RatVector,
    pub f_mat: RatMatrix,
    pub f_rhs: RatVector,
    x_max: Rat,
    y_max: Rat,
    bit_length: u64,
    entry_bound: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyProfile {
    pub x: RatVector,
    pub y: RatVector,
}

/// Equilibrium quality report: duals, both approximation errors, and the
/// QP-objective residual `e^Tp + f^Tq - x^T(A+B)y`.
#[derive(Debug, Clone)]
pub struct EquilibriumCertificate {
    pub profile: StrategyProfile,
    pub p: RatVector,
    pub q: RatVector,
    pub abs_eps: Rat,
    /// `None` when the relative error is undefined (`u + v <= 0` with a
    /// nonzero regret).
    pub rel_eps: Option<Rat>,
    /// Set when `|A+B| = 0` makes the absolute normalizer degenerate.
    pub degenerate_scale: bool,
    pub qp_residual: Rat,
}

impl EquilibriumCertificate {
    pub fn is_exact(&self) -> bool {
        self.qp_residual.is_zero()
    }
}

/// Best response polytope with the 1..M+N label numbering. Points are
/// `(strategy, dual)` blocks: `(y, p)` for P, `(x, q)` for Q.
#[derive(Debug, Clone)]
pub struct BrpPolytope {
    pub polytope: Polytope,
    pub strategy_len: usize,
    pub dual_len: usize,
    pub m: usize,
    pub n: usize,
}

impl BrpPolytope {
    pub fn split<'a>(&self, point: &'a [Rat]) -> (&'a [Rat], &'a [Rat]) {
        point.split_at(self.strategy_len)
    }

    pub fn labels_at(&self, point: &[Rat]) -> Result<BTreeSet<usize>, GameError> {
        Ok(self.polytope.labels_at(point)?)
    }

    /// True when strictly more than dim-many inequalities are tight, i.e.
    /// the point witnesses degeneracy of the polytope.
    pub fn degeneracy_probe(&self, point: &[Rat]) -> bool {
        let tight = self.polytope.tight_indices(point);
        let dim = self.polytope.dim - matrix_rank(&self.polytope.eq_lhs);
        tight.len() > dim
    }
}

/// Row-wise integer scaling: multiplies each row of `(lhs | rhs)` by the
/// lcm of its denominators.
fn scale_rows_to_integers(lhs: &mut RatMatrix, rhs: &mut RatVector) {
    for i in 0..lhs.rows() {
        let mut lcm = BigInt::one();
        for v in lhs.row(i) {
            lcm = lcm.lcm(v.denom());
        }
        lcm = lcm.lcm(rhs[i].denom());
        if lcm.is_one() {
            continue;
        }
        let factor = Rat::from_integer(lcm);
        for j in 0..lhs.cols() {
            lhs[(i, j)] = &lhs[(i, j)] * &factor;
        }
        rhs[i] = &rhs[i] * &factor;
    }
}

/// Keeps a maximal independent prefix of equality rows; errors if a
/// dependent row is inconsistent with the kept ones (empty polytope).
fn drop_dependent_rows(
    lhs: &RatMatrix,
    rhs: &RatVector,
    player: Player,
) -> Result<(RatMatrix, RatVector), GameError> {
    let mut kept: Vec<RatVector> = Vec::new();
    let mut kept_rhs: RatVector = Vec::new();
    let mut rank = 0;
    for i in 0..lhs.rows() {
        let mut rows = kept.clone();
        rows.push(lhs.row(i).to_vec());
        let r = matrix_rank(&RatMatrix::new(rows.len(), lhs.cols(), rows.concat()));
        if r > rank {
            kept.push(lhs.row(i).to_vec());
            kept_rhs.push(rhs[i].clone());
            rank = r;
        } else {
            // Dependent row: consistent iff the augmented rank also stays.
            let mut aug: Vec<RatVector> = kept
                .iter()
                .zip(&kept_rhs)
                .map(|(r, b)| {
                    let mut row = r.clone();
                    row.push(b.clone());
                    row
                })
                .collect();
            let mut row = lhs.row(i).to_vec();
            row.push(rhs[i].clone());
            aug.push(row);
            let aug_rank =
                matrix_rank(&RatMatrix::new(aug.len(), lhs.cols() + 1, aug.concat()));
            if aug_rank > rank {
                return Err(GameError::EmptyStrategySet(player));
            }
        }
    }
    let cols = lhs.cols();
    Ok((RatMatrix::new(kept.len(), cols, kept.concat()), kept_rhs))
}

impl BilinearGame {
    /// Validates and normalizes raw game data.
    pub fn validate(
        a: RatMatrix,
        b: RatMatrix,
        e_mat: RatMatrix,
        e_rhs: RatVector,
        f_mat: RatMatrix,
        f_rhs: RatVector,
    ) -> Result<Self, GameError> {
        let (m, n) = (a.rows(), a.cols());
        if b.rows() != m || b.cols() != n {
            return Err(GameError::DimensionMismatch(format!(
                "A is {m}x{n} but B is {}x{}",
                b.rows(),
                b.cols()
            )));
        }
        if e_mat.cols() != m || e_mat.rows() != e_rhs.len() {
            return Err(GameError::DimensionMismatch(
                "E must have M columns and as many rows as e".into(),
            ));
        }
        if f_mat.cols() != n || f_mat.rows() != f_rhs.len() {
            return Err(GameError::DimensionMismatch(
                "F must have N columns and as many rows as f".into(),
            ));
        }

        // Payoffs stay exactly as given (converters promise exact payoff
        // equivalence); the size bounds below are computed from a jointly
        // denominator-cleared copy, which preserves rank(A+B) and every
        // equilibrium, so they remain valid for the rational game.
        let mut payoff_lcm = BigInt::one();
        for v in a.entries().iter().chain(b.entries()) {
            payoff_lcm = payoff_lcm.lcm(v.denom());
        }
        let factor = Rat::from_integer(payoff_lcm.clone());
        let scaled_a = a.scale(&factor);
        let scaled_b = b.scale(&factor);

        let (mut e_mat, mut e_rhs) = (e_mat, e_rhs);
        let (mut f_mat, mut f_rhs) = (f_mat, f_rhs);
        scale_rows_to_integers(&mut e_mat, &mut e_rhs);
        scale_rows_to_integers(&mut f_mat, &mut f_rhs);
        let (e_mat, e_rhs) = drop_dependent_rows(&e_mat, &e_rhs, Player::Row)?;
        let (f_mat, f_rhs) = drop_dependent_rows(&f_mat, &f_rhs, Player::Col)?;

        match is_polytope_compact(&e_mat, &e_rhs) {
            Compactness::Compact => {}
            Compactness::Empty => return Err(GameError::EmptyStrategySet(Player::Row)),
            Compactness::Unbounded => {
                return Err(GameError::NonCompactStrategySet(Player::Row))
            }
        }
        match is_polytope_compact(&f_mat, &f_rhs) {
            Compactness::Compact => {}
            Compactness::Empty => return Err(GameError::EmptyStrategySet(Player::Col)),
            Compactness::Unbounded => {
                return Err(GameError::NonCompactStrategySet(Player::Col))
            }
        }

        let x_max = max_coordinate_sum(&e_mat, &e_rhs);
        let y_max = max_coordinate_sum(&f_mat, &f_rhs);
        let bit_length = scaled_a.total_bit_length()
            + scaled_b.total_bit_length()
            + e_mat.total_bit_length()
            + f_mat.total_bit_length()
            + e_rhs.iter().map(crate::rational::bit_length).sum::<u64>()
            + f_rhs.iter().map(crate::rational::bit_length).sum::<u64>();

        // Z: the largest integer in the cleared system, the lcm itself
        // included so denominator bounds cover the unscaled payoffs too.
        let mut entry_bound = payoff_lcm;
        for v in scaled_a
            .entries()
            .iter()
            .chain(scaled_b.entries())
            .chain(e_mat.entries())
            .chain(f_mat.entries())
            .chain(&e_rhs)
            .chain(&f_rhs)
        {
            let n = v.numer().abs().max(v.denom().abs());
            if n > entry_bound {
                entry_bound = n;
            }
        }

        Ok(BilinearGame {
            a,
            b,
            e_mat,
            e_rhs,
            f_mat,
            f_rhs,
            x_max,
            y_max,
            bit_length,
            entry_bound,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.a.rows(), self.a.cols())
    }

    pub fn k1(&self) -> usize {
        self.e_mat.rows()
    }

    pub fn k2(&self) -> usize {
        self.f_mat.rows()
    }

    /// Cached `max_{x in X} sum_i x_i`.
    pub fn x_max(&self) -> &Rat {
        &self.x_max
    }

    pub fn y_max(&self) -> &Rat {
        &self.y_max
    }

    pub fn bit_length(&self) -> u64 {
        self.bit_length
    }

    /// Z: largest integer magnitude in the denominator-cleared game data,
    /// the input to the vertex denominator bound `l! Z^l`.
    pub fn entry_bound(&self) -> &BigInt {
        &self.entry_bound
    }

    pub fn payoff_sum(&self) -> RatMatrix {
        self.a.add(&self.b)
    }

    /// `rank(A+B)`, the game's place in the rank hierarchy.
    pub fn rank(&self) -> usize {
        matrix_rank(&self.payoff_sum())
    }

    pub fn x_feasible(&self, x: &[Rat]) -> bool {
        x.len() == self.a.rows()
            && x.iter().all(|v| !v.is_negative())
            && self.e_mat.mul_vec(x) == self.e_rhs
    }

    pub fn y_feasible(&self, y: &[Rat]) -> bool {
        y.len() == self.a.cols()
            && y.iter().all(|v| !v.is_negative())
            && self.f_mat.mul_vec(y) == self.f_rhs
    }

    pub fn profile_feasible(&self, profile: &StrategyProfile) -> bool {
        self.x_feasible(&profile.x) && self.y_feasible(&profile.y)
    }

    pub fn payoff_row(&self, x: &[Rat], y: &[Rat]) -> Rat {
        dot(x, &self.a.mul_vec(y))
    }

    pub fn payoff_col(&self, x: &[Rat], y: &[Rat]) -> Rat {
        dot(x, &self.b.mul_vec(y))
    }

    /// `max_{x in X} x^T A y` with an optimal `x*` and the dual `p`
    /// certifying `u = e^T p`.
    pub fn best_response_row(&self, y: &[Rat]) -> Result<(Rat, RatVector, RatVector), GameError> {
        if !self.y_feasible(y) {
            return Err(GameError::InfeasibleStrategy(Player::Col));
        }
        let lp = LinearProgram::with_equalities(
            Sense::Max,
            self.a.mul_vec(y),
            self.e_mat.clone(),
            self.e_rhs.clone(),
            vec![true; self.a.rows()],
        );
        let out = solve_lp(&lp).expect("well-formed by construction");
        match out {
            LpOutcome::Optimal(opt) => Ok((opt.value, opt.point, opt.eq_duals)),
            _ => unreachable!("X is validated nonempty and compact"),
        }
    }

    /// `max_{y in Y} x^T B y` with optimal `y*` and dual `q`.
    pub fn best_response_col(&self, x: &[Rat]) -> Result<(Rat, RatVector, RatVector), GameError> {
        if !self.x_feasible(x) {
            return Err(GameError::InfeasibleStrategy(Player::Row));
        }
        let lp = LinearProgram::with_equalities(
            Sense::Max,
            self.b.vec_mul(x),
            self.f_mat.clone(),
            self.f_rhs.clone(),
            vec![true; self.a.cols()],
        );
        let out = solve_lp(&lp).expect("well-formed by construction");
        match out {
            LpOutcome::Optimal(opt) => Ok((opt.value, opt.point, opt.eq_duals)),
            _ => unreachable!("Y is validated nonempty and compact"),
        }
    }

    /// Full certificate for a feasible profile: both best-response regrets
    /// and both approximation errors, exactly.
    pub fn verify(&self, profile: &StrategyProfile) -> Result<EquilibriumCertificate, GameError> {
        if !self.x_feasible(&profile.x) {
            return Err(GameError::InfeasibleStrategy(Player::Row));
        }
        if !self.y_feasible(&profile.y) {
            return Err(GameError::InfeasibleStrategy(Player::Col));
        }
        let (u, _, p) = self.best_response_row(&profile.y)?;
        let (v, _, q) = self.best_response_col(&profile.x)?;
        let played = self.payoff_row(&profile.x, &profile.y)
            + self.payoff_col(&profile.x, &profile.y);
        let regret = &u + &v - &played;
        self.certificate_from_duals(profile.clone(), p, q, regret)
    }

    pub(crate) fn certificate_from_duals(
        &self,
        profile: StrategyProfile,
        p: RatVector,
        q: RatVector,
        regret: Rat,
    ) -> Result<EquilibriumCertificate, GameError> {
        let d = self.payoff_sum().max_abs();
        let degenerate_scale = d.is_zero();
        let scale = &self.x_max * &d * &self.y_max;
        let normalizer = if scale.is_positive() { scale } else { rat(1) };
        let abs_eps = &regret / &normalizer;
        let total = dot(&p, &self.e_rhs) + dot(&q, &self.f_rhs);
        let rel_eps = if regret.is_zero() {
            Some(Rat::zero())
        } else if total.is_positive() {
            Some(&regret / &total)
        } else {
            None
        };
        let played = self.payoff_row(&profile.x, &profile.y)
            + self.payoff_col(&profile.x, &profile.y);
        let qp_residual = dot(&p, &self.e_rhs) + dot(&q, &self.f_rhs) - played;
        Ok(EquilibriumCertificate {
            profile,
            p,
            q,
            abs_eps,
            rel_eps,
            degenerate_scale,
            qp_residual,
        })
    }

    /// P over `(y, p)`: `A_i y - p^T E^i <= 0` labeled `1..=M`, `y_j >= 0`
    /// labeled `M+j`, plus `Fy = f`.
    pub fn build_brp_p(&self) -> BrpPolytope {
        let (m, n) = self.dims();
        let k1 = self.k1();
        let mut poly = Polytope::new(n + k1);
        for i in 0..m {
            let mut coeffs = self.a.row(i).to_vec();
            coeffs.extend(self.e_mat.col(i).iter().map(|v| -v.clone()));
            poly.push_ineq(coeffs, Rat::zero(), Some(i + 1));
        }
        for j in 0..n {
            poly.push_nonneg(j, Some(m + j + 1));
        }
        for r in 0..self.f_mat.rows() {
            let mut coeffs = self.f_mat.row(r).to_vec();
            coeffs.resize(n + k1, Rat::zero());
            poly.push_eq(coeffs, self.f_rhs[r].clone());
        }
        BrpPolytope {
            polytope: poly,
            strategy_len: n,
            dual_len: k1,
            m,
            n,
        }
    }

    /// Q over `(x, q)`: `x_i >= 0` labeled `i`, `x^T B^j - q^T F^j <= 0`
    /// labeled `M+j`, plus `Ex = e`.
    pub fn build_brp_q(&self) -> BrpPolytope {
        let (m, n) = self.dims();
        let k2 = self.k2();
        let mut poly = Polytope::new(m + k2);
        for i in 0..m {
            poly.push_nonneg(i, Some(i + 1));
        }
        for j in 0..n {
            let mut coeffs = self.b.col(j);
            coeffs.extend(self.f_mat.col(j).iter().map(|v| -v.clone()));
            poly.push_ineq(coeffs, Rat::zero(), Some(m + j + 1));
        }
        for r in 0..self.e_mat.rows() {
            let mut coeffs = self.e_mat.row(r).to_vec();
            coeffs.resize(m + k2, Rat::zero());
            poly.push_eq(coeffs, self.e_rhs[r].clone());
        }
        BrpPolytope {
            polytope: poly,
            strategy_len: m,
            dual_len: k2,
            m,
            n,
        }
    }

    /// `x^T(A+B)y - e^Tp - f^Tq`; nonpositive over P x Q and zero exactly
    /// at equilibria.
    pub fn qp_objective(
        &self,
        x: &[Rat],
        y: &[Rat],
        p: &[Rat],
        q: &[Rat],
    ) -> Result<Rat, GameError> {
        let mut v_point = y.to_vec();
        v_point.extend(p.iter().cloned());
        let mut w_point = x.to_vec();
        w_point.extend(q.iter().cloned());
        if !self.build_brp_p().polytope.contains(&v_point)
            || !self.build_brp_q().polytope.contains(&w_point)
        {
            return Err(GameError::PointNotInPolytope);
        }
        Ok(dot(x, &self.payoff_sum().mul_vec(y))
            - dot(p, &self.e_rhs)
            - dot(q, &self.f_rhs))
    }

    /// Symmetric block game `(A', A'^T, E', E', e', e')` with
    /// `A' = [[0, A], [B^T, 0]]`. Symmetric equilibria `z = (x, y)` of the
    /// result correspond to equilibria `(x, y)` of this game.
    pub fn symmetrize(&self) -> BilinearGame {
        let (m, n) = self.dims();
        let bt = self.b.transpose();
        let a_block = RatMatrix::from_blocks(
            &[vec![None, Some(&self.a)], vec![Some(&bt), None]],
            &[m, n],
            &[m, n],
        );
        let e_block = RatMatrix::from_blocks(
            &[
                vec![Some(&self.e_mat), None],
                vec![None, Some(&self.f_mat)],
            ],
            &[self.k1(), self.k2()],
            &[m, n],
        );
        let mut rhs = self.e_rhs.clone();
        rhs.extend(self.f_rhs.iter().cloned());
        BilinearGame::validate(
            a_block.clone(),
            a_block.transpose(),
            e_block.clone(),
            rhs.clone(),
            e_block,
            rhs,
        )
        .expect("symmetrization of a valid game is valid")
    }

    /// Splits a strategy of the symmetrized game back into `(x, y)`.
    pub fn split_symmetric(&self, z: &[Rat]) -> StrategyProfile {
        let (m, _) = self.dims();
        StrategyProfile {
            x: z[..m].to_vec(),
            y: z[m..].to_vec(),
        }
    }
}

/// `max sum_i x_i` over `{Ex = e, x >= 0}` (requires compactness).
fn max_coordinate_sum(e_mat: &RatMatrix, e_rhs: &RatVector) -> Rat {
    let n = e_mat.cols();
    let lp = LinearProgram::with_equalities(
        Sense::Max,
        vec![Rat::one(); n],
        e_mat.clone(),
        e_rhs.clone(),
        vec![true; n],
    );
    match solve_lp(&lp).expect("well-formed by construction") {
        LpOutcome::Optimal(opt) => opt.value,
        _ => unreachable!("checked compact and nonempty"),
    }
}

/// Set-union test for the fully-labeled property.
pub fn is_fully_labeled(
    v_labels: &BTreeSet<usize>,
    w_labels: &BTreeSet<usize>,
    m: usize,
    n: usize,
) -> bool {
    (1..=m + n).all(|l| v_labels.contains(&l) || w_labels.contains(&l))
}

/// A strategy set `{x : Ex = e, x >= 0}` as a labeled-polytope value.
pub(crate) fn strategy_polytope(e_mat: &RatMatrix, e_rhs: &[Rat]) -> crate::polytope::Polytope {
    let m = e_mat.cols();
    let mut p = crate::polytope::Polytope::new(m);
    for i in 0..m {
        p.push_nonneg(i, None);
    }
    for r in 0..e_mat.rows() {
        p.push_eq(e_mat.row(r).to_vec(), e_rhs[r].clone());
    }
    p
}

/// Simplex strategy sets: the bimatrix embedding's `E = 1^T`, `e = (1)`.
pub fn simplex_constraints(n: usize) -> (RatMatrix, RatVector) {
    (
        RatMatrix::new(1, n, vec![Rat::one(); n]),
        vec![Rat::one()],
    )
}

/// Uniform distribution over `n` points.
pub fn uniform(n: usize) -> RatVector {
    vec_scale(&vec![Rat::one(); n], &(Rat::one() / rat(n as i64)))
}
