//! Exact polynomial-time solver for rank-1 games, `rank(A+B) = 1`.
//!
//! With `A+B = gamma beta^T`, every game `(A, -A + alpha beta^T)` shares
//! one lifted polytope `Q'` over `(x, lambda, q)`; the fully-labeled pairs
//! `N` of `P x Q'` form a path along which lambda is monotone. A Nash
//! equilibrium of the original game is exactly a point of `N` on the
//! hyperplane `lambda = gamma^T x`, found here by binary search on lambda
//! between `gamma_min` and `gamma_max`.
//!
//! Degenerate faces (dimension above 1) are handled soundly without
//! perturbation: every point of the optimal face is fully labeled, so the
//! hyperplane intersection test runs on the whole face. The search gives
//! up with `DegenerateGame` only if the bracket shrinks below the vertex
//! separation bound `1/Delta^2` without an intersection.

use crate::game::{BilinearGame, EquilibriumCertificate, GameError, StrategyProfile};
use crate::linalg::{denominator_bound, dot, LinalgError, RatVector};
use crate::lp::{LpOutcome, Sense};
use crate::polytope::Polytope;
use crate::rational::Rat;
use crate::zerosum::{solve_zero_sum, ZeroSumError};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Rank1Error {
    #[error("game does not have rank 1: rank(A+B) = {0}")]
    NotRankOne(usize),
    #[error("degenerate game: binary search bracket collapsed without an intersection")]
    DegenerateGame,
    #[error(transparent)]
    ZeroSum(#[from] ZeroSumError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A fully-labeled point of `P x Q'`, split into its named parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathPoint {
    pub y: RatVector,
    pub p: RatVector,
    pub x: RatVector,
    pub lambda: Rat,
    pub q: RatVector,
}

/// The face of `P x Q'` containing `N(a)`, described by its tight set.
#[derive(Debug, Clone)]
pub struct Edge {
    face: Polytope,
    pub witness: PathPoint,
    /// `None` means unbounded on that side.
    pub lambda_range: (Option<Rat>, Option<Rat>),
    /// Face dimension exceeded 1; intersection still runs on the whole face.
    pub degenerate: bool,
}

/// Diagnostics from a solve: bracket iterations and the lambda-ranges of
/// every edge the search visited, in visit order.
#[derive(Debug, Clone, Default)]
pub struct Rank1Trace {
    pub iterations: u64,
    pub iteration_bound: u64,
    pub visited: Vec<(Option<Rat>, Option<Rat>)>,
}

/// Exact factorization `A+B = gamma beta^T`, sign-fixed so the first
/// nonzero entry of beta is positive.
pub fn decompose_rank1(g: &BilinearGame) -> Result<(RatVector, RatVector), Rank1Error> {
    let sum = g.payoff_sum();
    let rank = crate::linalg::matrix_rank(&sum);
    if rank != 1 {
        return Err(Rank1Error::NotRankOne(rank));
    }
    let factors = crate::linalg::rank_factorize(&sum, 1)?;
    let (mut gamma, mut beta) = factors.into_iter().next().expect("rank is 1");
    if let Some(first) = beta.iter().find(|v| !v.is_zero()) {
        if first.is_negative() {
            gamma = gamma.iter().map(|v| -v).collect();
            beta = beta.iter().map(|v| -v).collect();
        }
    }
    Ok((gamma, beta))
}

/// `(min, max)` of `gamma^T x` over the row strategy set.
pub fn gamma_bounds(g: &BilinearGame, gamma: &[Rat]) -> (Rat, Rat) {
    let x_set = crate::game::strategy_polytope(&g.e_mat, &g.e_rhs);
    let lo = match x_set.optimize(Sense::Min, gamma.to_vec()) {
        LpOutcome::Optimal(opt) => opt.value,
        _ => unreachable!("X is compact and nonempty"),
    };
    let hi = match x_set.optimize(Sense::Max, gamma.to_vec()) {
        LpOutcome::Optimal(opt) => opt.value,
        _ => unreachable!("X is compact and nonempty"),
    };
    (lo, hi)
}

/// `Q'` over `(x, lambda, q)`: `x_i >= 0` (labels 1..M) and
/// `x^T(-A^j) + lambda beta_j - q^T F^j <= 0` (labels M+1..M+N), `Ex = e`.
pub fn build_q_prime(g: &BilinearGame, beta: &[Rat]) -> Polytope {
    let (m, n) = g.dims();
    let k2 = g.k2();
    let dim = m + 1 + k2;
    let mut p = Polytope::new(dim);
    for i in 0..m {
        p.push_nonneg(i, Some(i + 1));
    }
    for j in 0..n {
        let mut coeffs = vec![Rat::zero(); dim];
        for i in 0..m {
            coeffs[i] = -g.a[(i, j)].clone();
        }
        coeffs[m] = beta[j].clone();
        for r in 0..k2 {
            coeffs[m + 1 + r] = -g.f_mat[(r, j)].clone();
        }
        p.push_ineq(coeffs, Rat::zero(), Some(m + 1 + j));
    }
    for r in 0..g.k1() {
        let mut coeffs = vec![Rat::zero(); dim];
        for i in 0..m {
            coeffs[i] = g.e_mat[(r, i)].clone();
        }
        p.push_eq(coeffs, g.e_rhs[r].clone());
    }
    p
}

/// `P x Q'` over `(y, p, x, lambda, q)`.
fn product_polytope(g: &BilinearGame, beta: &[Rat]) -> Polytope {
    g.build_brp_p().polytope.product(&build_q_prime(g, beta))
}

struct Coords {
    n: usize,
    k1: usize,
    m: usize,
}

impl Coords {
    fn of(g: &BilinearGame) -> Self {
        let (m, n) = g.dims();
        Coords { n, k1: g.k1(), m }
    }

    fn lambda(&self) -> usize {
        self.n + self.k1 + self.m
    }

    fn split(&self, z: &[Rat]) -> PathPoint {
        let (n, k1, m) = (self.n, self.k1, self.m);
        PathPoint {
            y: z[..n].to_vec(),
            p: z[n..n + k1].to_vec(),
            x: z[n + k1..n + k1 + m].to_vec(),
            lambda: z[n + k1 + m].clone(),
            q: z[n + k1 + m + 1..].to_vec(),
        }
    }
}

/// `LP(a)`: `max a (beta^T y) - e^T p - f^T q` over `P x Q'` with
/// `lambda = a`. The optimal value is 0 and the optimal set is `N(a)`.
pub fn parametric_lp(g: &BilinearGame, beta: &[Rat], a: &Rat) -> LpOutcome {
    let r = product_polytope(g, beta);
    let co = Coords::of(g);
    let mut section = r;
    let mut lam = vec![Rat::zero(); section.dim];
    lam[co.lambda()] = Rat::one();
    section.push_eq(lam, a.clone());
    section.optimize(Sense::Max, path_objective(g, beta, a, section.dim))
}

fn path_objective(g: &BilinearGame, beta: &[Rat], a: &Rat, dim: usize) -> RatVector {
    let co = Coords::of(g);
    let mut obj = vec![Rat::zero(); dim];
    for j in 0..co.n {
        obj[j] = a * &beta[j];
    }
    for r in 0..co.k1 {
        obj[co.n + r] = -g.e_rhs[r].clone();
    }
    for r in 0..g.k2() {
        obj[co.lambda() + 1 + r] = -g.f_rhs[r].clone();
    }
    obj
}

/// The face of `P x Q'` spanned by the tight set at `OPT(a)`, with the
/// section constraint `lambda = a` dropped. The whole face lies in `N`.
pub fn edge_at(g: &BilinearGame, beta: &[Rat], a: &Rat) -> Result<Edge, Rank1Error> {
    let r = product_polytope(g, beta);
    let co = Coords::of(g);
    let mut section = r.clone();
    let mut lam = vec![Rat::zero(); section.dim];
    lam[co.lambda()] = Rat::one();
    section.push_eq(lam.clone(), a.clone());
    let opt = match section.optimize(Sense::Max, path_objective(g, beta, a, section.dim)) {
        LpOutcome::Optimal(opt) => opt,
        _ => return Err(Rank1Error::DegenerateGame),
    };
    assert!(opt.value.is_zero(), "LP(a) must have optimal value 0");
    let tight: Vec<usize> = section
        .tight_indices(&opt.point)
        .into_iter()
        .collect();
    let face = r.with_tight(&tight);
    let rank = face.eq_system_rank(&[]);
    let degenerate = face.dim - rank > 1;
    let lambda_range = (
        match face.optimize(Sense::Min, lam.clone()) {
            LpOutcome::Optimal(o) => Some(o.value),
            _ => None,
        },
        match face.optimize(Sense::Max, lam) {
            LpOutcome::Optimal(o) => Some(o.value),
            _ => None,
        },
    );
    Ok(Edge {
        face,
        witness: co.split(&opt.point),
        lambda_range,
        degenerate,
    })
}

/// Intersects the edge's face with `H_gamma: lambda - gamma^T x = 0`;
/// any point found is a Nash equilibrium of the original game.
pub fn intersect_with_hplane(
    g: &BilinearGame,
    edge: &Edge,
    gamma: &[Rat],
) -> Option<PathPoint> {
    let co = Coords::of(g);
    let mut cut = edge.face.clone();
    let mut coeffs = vec![Rat::zero(); cut.dim];
    coeffs[co.lambda()] = Rat::one();
    for i in 0..co.m {
        coeffs[co.n + co.k1 + i] = -gamma[i].clone();
    }
    cut.push_eq(coeffs, Rat::zero());
    match cut.optimize(Sense::Max, vec![Rat::zero(); cut.dim]) {
        LpOutcome::Optimal(opt) => Some(co.split(&opt.point)),
        _ => None,
    }
}

/// Both complementarity products of Eq-style NE conditions on `P x Q'`;
/// zero exactly when the point is fully labeled.
pub fn complementarity_residuals(g: &BilinearGame, beta: &[Rat], pt: &PathPoint) -> (Rat, Rat) {
    let ay = g.a.mul_vec(&pt.y);
    let etp = g.e_mat.vec_mul(&pt.p);
    let first: Rat = (0..ay.len()).map(|i| &pt.x[i] * (&ay[i] - &etp[i])).sum();
    let xa = g.a.vec_mul(&pt.x);
    let qf = g.f_mat.vec_mul(&pt.q);
    let second: Rat = (0..xa.len())
        .map(|j| (&pt.lambda * &beta[j] - &xa[j] - &qf[j]) * &pt.y[j])
        .sum();
    (first, second)
}

fn certificate_from_point(
    g: &BilinearGame,
    pt: PathPoint,
) -> Result<EquilibriumCertificate, Rank1Error> {
    let profile = StrategyProfile { x: pt.x, y: pt.y };
    let played = g.payoff_row(&profile.x, &profile.y) + g.payoff_col(&profile.x, &profile.y);
    let regret = dot(&pt.p, &g.e_rhs) + dot(&pt.q, &g.f_rhs) - played;
    Ok(g.certificate_from_duals(profile, pt.p, pt.q, regret)?)
}

pub fn solve_rank1(g: &BilinearGame) -> Result<EquilibriumCertificate, Rank1Error> {
    solve_rank1_traced(g).map(|(cert, _)| cert)
}

/// S1-S5 binary search with the bracket trace exposed for diagnostics.
pub fn solve_rank1_traced(
    g: &BilinearGame,
) -> Result<(EquilibriumCertificate, Rank1Trace), Rank1Error> {
    if g.rank() == 0 {
        let (cert, _) = solve_zero_sum(g)?;
        return Ok((cert, Rank1Trace::default()));
    }
    let (gamma, beta) = decompose_rank1(g)?;
    let (mut a1, mut a2) = gamma_bounds(g, &gamma);
    let mut trace = Rank1Trace::default();

    let delta = iteration_delta(g, &gamma, &beta);
    trace.iteration_bound = iteration_bound(&a1, &a2, &delta);
    let guard = Rat::one() / Rat::from_integer(&delta * &delta);

    // S2: the bracket endpoints first.
    for a in [&a1, &a2] {
        let edge = edge_at(g, &beta, a)?;
        trace.visited.push(edge.lambda_range.clone());
        if let Some(pt) = intersect_with_hplane(g, &edge, &gamma) {
            return Ok((certificate_from_point(g, pt)?, trace));
        }
    }

    // S3-S5.
    while &a2 - &a1 >= guard {
        trace.iterations += 1;
        let a = (&a1 + &a2) / crate::rational::rat(2);
        let edge = edge_at(g, &beta, &a)?;
        trace.visited.push(edge.lambda_range.clone());
        if let Some(pt) = intersect_with_hplane(g, &edge, &gamma) {
            return Ok((certificate_from_point(g, pt)?, trace));
        }
        // The face misses H_gamma, so its sign against the hyperplane is
        // constant; the witness point decides the side.
        let side = &edge.witness.lambda - dot(&gamma, &edge.witness.x);
        if side.is_negative() {
            a1 = a;
        } else {
            a2 = a;
        }
    }
    Err(Rank1Error::DegenerateGame)
}

/// `Delta = l! Z^l` with `Z = max{|A|,|E|,|F|,|e|,|f|,|gamma|,|beta|}`
/// over the denominator-cleared data and `l = M+N+k1+k2+1`.
fn iteration_delta(g: &BilinearGame, gamma: &[Rat], beta: &[Rat]) -> BigInt {
    let mut z = g.entry_bound().clone();
    for v in gamma.iter().chain(beta) {
        let n = v.numer().abs().max(v.denom().abs());
        if n > z {
            z = n;
        }
    }
    let (m, n) = g.dims();
    denominator_bound(&z, m + n + g.k1() + g.k2() + 1)
}

fn iteration_bound(a1: &Rat, a2: &Rat, delta: &BigInt) -> u64 {
    let width = a2 - a1;
    let width_bits = if width.is_positive() {
        width.numer().bits().max(1)
    } else {
        1
    };
    width_bits + 2 * delta.bits() + 1
}
