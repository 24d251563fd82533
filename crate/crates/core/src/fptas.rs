//! Approximation schemes for fixed-rank games.
//!
//! Both schemes search a grid over the 2k-dimensional image of the rank-k
//! decomposition `A+B = sum_i alpha(i) beta(i)^T`: each grid cell pins the
//! values `x^T alpha(i)` and `beta(i)^T y` to a small interval, which makes
//! the quadratic NE objective nearly constant on the cell, so one LP per
//! cell (`min e^T p + f^T q` over P x Q plus the band constraints) finds
//! the best candidate inside it.
//!
//! The relative scheme uses the multiplicative grid `[u, (1+eps)u]` and
//! needs a strictly positive decomposition; it guarantees
//! `rel_eps <= 1 - 1/(1+eps)^2`. The absolute scheme uses an additive grid
//! with per-axis steps sized so the objective varies by at most
//! `eps * x_max * D * y_max` within a cell, guaranteeing `abs_eps <= eps`
//! for matrices of any sign. Cells are independent and solved in parallel;
//! the winner is deterministic (best error, then lowest cell index).

use crate::game::{BilinearGame, EquilibriumCertificate, GameError, StrategyProfile};
use crate::linalg::{denominator_bound, LinalgError, RatVector};
use crate::lp::{LpOutcome, Sense};
use crate::par::{map_collect, Parallelism};
use crate::polytope::Polytope;
use crate::rational::{rat, Rat};
use crate::zerosum::{solve_zero_sum, ZeroSumError};
use itertools::Itertools;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FptasError {
    #[error("epsilon must be positive")]
    InvalidEpsilon,
    #[error("relative scheme needs a strictly positive decomposition with positive box bounds")]
    NonPositiveDecomposition,
    #[error("decomposition does not reproduce A+B")]
    InconsistentDecomposition,
    #[error("no grid cell produced a candidate")]
    NoCandidate,
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    ZeroSum(#[from] ZeroSumError),
}

/// Rank-k factorization of `A+B` together with the image box
/// `B = x_i [w_i, w'_i] x_i [z_i, z'_i]` computed by 4k LPs.
#[derive(Debug, Clone)]
pub struct RankDecomposition {
    pub pairs: Vec<(RatVector, RatVector)>,
    /// `(w_i, w'_i)`: range of `x^T alpha(i)` over X.
    pub w: Vec<(Rat, Rat)>,
    /// `(z_i, z'_i)`: range of `beta(i)^T y` over Y.
    pub z: Vec<(Rat, Rat)>,
}

impl RankDecomposition {
    /// Wraps externally supplied factor pairs after checking them.
    pub fn new(
        g: &BilinearGame,
        pairs: Vec<(RatVector, RatVector)>,
    ) -> Result<Self, FptasError> {
        let (m, n) = g.dims();
        let mut sum = crate::linalg::RatMatrix::zeros(m, n);
        for (alpha, beta) in &pairs {
            if alpha.len() != m || beta.len() != n {
                return Err(FptasError::InconsistentDecomposition);
            }
            sum = sum.add(&crate::linalg::outer(alpha, beta));
        }
        if sum != g.payoff_sum() {
            return Err(FptasError::InconsistentDecomposition);
        }
        Ok(Self::with_bounds(g, pairs))
    }

    /// Factorizes `A+B` greedily at the game's exact rank.
    pub fn from_game(g: &BilinearGame) -> Result<Self, FptasError> {
        let sum = g.payoff_sum();
        let pairs = crate::linalg::rank_factorize(&sum, g.rank())?;
        Ok(Self::with_bounds(g, pairs))
    }

    fn with_bounds(g: &BilinearGame, pairs: Vec<(RatVector, RatVector)>) -> Self {
        let x_set = crate::game::strategy_polytope(&g.e_mat, &g.e_rhs);
        let y_set = crate::game::strategy_polytope(&g.f_mat, &g.f_rhs);
        let range = |set: &Polytope, obj: &RatVector| -> (Rat, Rat) {
            let lo = match set.optimize(Sense::Min, obj.clone()) {
                LpOutcome::Optimal(o) => o.value,
                _ => unreachable!("strategy sets are compact and nonempty"),
            };
            let hi = match set.optimize(Sense::Max, obj.clone()) {
                LpOutcome::Optimal(o) => o.value,
                _ => unreachable!("strategy sets are compact and nonempty"),
            };
            (lo, hi)
        };
        let w = pairs.iter().map(|(a, _)| range(&x_set, a)).collect();
        let z = pairs.iter().map(|(_, b)| range(&y_set, b)).collect();
        RankDecomposition { pairs, w, z }
    }

    pub fn k(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_positive(&self) -> bool {
        self.pairs
            .iter()
            .all(|(a, b)| a.iter().chain(b).all(|v| v.is_positive()))
            && self.w.iter().chain(&self.z).all(|(lo, _)| lo.is_positive())
    }
}

/// One grid cell: a closed interval per image axis.
#[derive(Debug, Clone)]
pub struct GridCell {
    pub u: Vec<(Rat, Rat)>,
    pub v: Vec<(Rat, Rat)>,
}

/// `min e^T p + f^T q` over `P x Q` with the cell's band constraints and
/// the dual box `|p|, |q| <= l! Z^l` that keeps the LP bounded without
/// cutting off any equilibrium vertex.
pub fn cell_lp(g: &BilinearGame, dec: &RankDecomposition, cell: &GridCell) -> LpOutcome {
    let (m, n) = g.dims();
    let (k1, k2) = (g.k1(), g.k2());
    let mut pq = g.build_brp_p().polytope.product(&g.build_brp_q().polytope);
    // Coordinates: y 0..n, p n..n+k1, x n+k1..n+k1+m, q at the end.
    let x_at = n + k1;
    for (i, (alpha, beta)) in dec.pairs.iter().enumerate() {
        let mut over_x = vec![Rat::zero(); pq.dim];
        over_x[x_at..x_at + m].clone_from_slice(alpha);
        pq.push_ineq(over_x.clone(), cell.u[i].1.clone(), None);
        let under_x: RatVector = over_x.iter().map(|v| -v).collect();
        pq.push_ineq(under_x, -cell.u[i].0.clone(), None);

        let mut over_y = vec![Rat::zero(); pq.dim];
        over_y[..n].clone_from_slice(beta);
        pq.push_ineq(over_y.clone(), cell.v[i].1.clone(), None);
        let under_y: RatVector = over_y.iter().map(|v| -v).collect();
        pq.push_ineq(under_y, -cell.v[i].0.clone(), None);
    }
    let bound = Rat::from_integer(denominator_bound(g.entry_bound(), m + n + k1 + k2));
    for dual in (n..n + k1).chain(n + k1 + m..pq.dim) {
        let mut up = vec![Rat::zero(); pq.dim];
        up[dual] = Rat::one();
        pq.push_ineq(up.clone(), bound.clone(), None);
        let down: RatVector = up.iter().map(|v| -v).collect();
        pq.push_ineq(down, bound.clone(), None);
    }
    let mut obj = vec![Rat::zero(); pq.dim];
    obj[n..n + k1].clone_from_slice(&g.e_rhs);
    for r in 0..k2 {
        obj[n + k1 + m + r] = g.f_rhs[r].clone();
    }
    pq.optimize(Sense::Min, obj)
}

fn candidate(g: &BilinearGame, point: &[Rat]) -> Result<EquilibriumCertificate, FptasError> {
    let (m, n) = g.dims();
    let k1 = g.k1();
    let profile = StrategyProfile {
        x: point[n + k1..n + k1 + m].to_vec(),
        y: point[..n].to_vec(),
    };
    // Re-verified against true best responses, so the reported errors are
    // exact, not just the dual upper bound from the cell LP.
    Ok(g.verify(&profile)?)
}

fn run_grid<K>(
    g: &BilinearGame,
    dec: &RankDecomposition,
    cells: Vec<GridCell>,
    par: Parallelism,
    key: K,
) -> Result<EquilibriumCertificate, FptasError>
where
    K: Fn(&EquilibriumCertificate) -> Option<Rat> + Sync + Send,
{
    let results = map_collect(cells, par, |cell| match cell_lp(g, dec, &cell) {
        LpOutcome::Optimal(opt) => Some(opt.point),
        _ => None,
    });
    let mut best: Option<(Rat, EquilibriumCertificate)> = None;
    for point in results.into_iter().flatten() {
        let cert = candidate(g, &point)?;
        let Some(score) = key(&cert) else { continue };
        // Strict comparison: the first cell in lexicographic order wins ties.
        if best.as_ref().is_none_or(|(b, _)| score < *b) {
            best = Some((score, cert));
        }
    }
    best.map(|(_, c)| c).ok_or(FptasError::NoCandidate)
}

/// Relative scheme over the multiplicative grid; the certificate's
/// `rel_eps` is at most `1 - 1/(1+eps)^2`.
pub fn fptas_relative(
    g: &BilinearGame,
    eps: &Rat,
    par: Parallelism,
) -> Result<EquilibriumCertificate, FptasError> {
    let dec = RankDecomposition::from_game(g)?;
    fptas_relative_with(g, dec, eps, par)
}

/// Same, with caller-supplied decomposition (useful when the greedy
/// factorization is not positive but a positive one is known).
pub fn fptas_relative_with(
    g: &BilinearGame,
    dec: RankDecomposition,
    eps: &Rat,
    par: Parallelism,
) -> Result<EquilibriumCertificate, FptasError> {
    if !eps.is_positive() {
        return Err(FptasError::InvalidEpsilon);
    }
    if !dec.is_positive() {
        return Err(FptasError::NonPositiveDecomposition);
    }
    let ratio = Rat::one() + eps;
    let axis = |lo: &Rat, hi: &Rat| -> Vec<(Rat, Rat)> {
        let mut out = Vec::new();
        let mut u = lo.clone();
        loop {
            out.push((u.clone(), &u * &ratio));
            u = &u * &ratio;
            if &u >= hi {
                break;
            }
        }
        out
    };
    let u_axes: Vec<_> = dec.w.iter().map(|(lo, hi)| axis(lo, hi)).collect();
    let v_axes: Vec<_> = dec.z.iter().map(|(lo, hi)| axis(lo, hi)).collect();
    let cells = cartesian_cells(&u_axes, &v_axes);
    run_grid(g, &dec, cells, par, |cert| cert.rel_eps.clone())
}

/// Absolute scheme over an additive grid, valid for arbitrary-sign
/// decompositions; the certificate's `abs_eps` is at most `eps`.
pub fn fptas_absolute(
    g: &BilinearGame,
    eps: &Rat,
    par: Parallelism,
) -> Result<EquilibriumCertificate, FptasError> {
    if !eps.is_positive() {
        return Err(FptasError::InvalidEpsilon);
    }
    let d = g.payoff_sum().max_abs();
    if d.is_zero() {
        // Zero-sum: the exact path is cheaper than any grid.
        let (cert, _) = solve_zero_sum(g)?;
        return Ok(cert);
    }
    let dec = RankDecomposition::from_game(g)?;
    let k = rat(dec.k() as i64);
    let scale = g.x_max() * &d * g.y_max();
    let norm = if scale.is_positive() { scale } else { Rat::one() };
    // Per cell, term i varies by at most T_i*du_i + S_i*dv_i where S_i,
    // T_i bound |x^T alpha(i)| and |beta(i)^T y|; each half gets an
    // eps*norm/(2k) budget.
    let budget = (eps * &norm) / (rat(2) * &k);
    let axis = |lo: &Rat, hi: &Rat, opp_mag: &Rat| -> Vec<(Rat, Rat)> {
        let width = hi - lo;
        if width.is_zero() {
            return vec![(lo.clone(), hi.clone())];
        }
        let steps = if opp_mag.is_zero() {
            1
        } else {
            let need = &width * opp_mag / &budget;
            need.ceil().to_integer().try_into().unwrap_or(1usize).max(1)
        };
        let step = &width / rat(steps as i64);
        (0..steps)
            .map(|t| (lo + &step * rat(t as i64), lo + &step * rat(t as i64 + 1)))
            .collect()
    };
    let mag = |(lo, hi): &(Rat, Rat)| -> Rat { lo.abs().max(hi.abs()) };
    let u_axes: Vec<_> = dec
        .w
        .iter()
        .zip(&dec.z)
        .map(|(wi, zi)| axis(&wi.0, &wi.1, &mag(zi)))
        .collect();
    let v_axes: Vec<_> = dec
        .z
        .iter()
        .zip(&dec.w)
        .map(|(zi, wi)| axis(&zi.0, &zi.1, &mag(wi)))
        .collect();
    let cells = cartesian_cells(&u_axes, &v_axes);
    run_grid(g, &dec, cells, par, |cert| Some(cert.abs_eps.clone()))
}

/// Lexicographic cell order: u axes first, then v axes, earliest axis
/// slowest; determinism depends on this.
fn cartesian_cells(u_axes: &[Vec<(Rat, Rat)>], v_axes: &[Vec<(Rat, Rat)>]) -> Vec<GridCell> {
    let k = u_axes.len();
    u_axes
        .iter()
        .chain(v_axes)
        .map(|axis| axis.iter().cloned())
        .multi_cartesian_product()
        .map(|combo| GridCell {
            u: combo[..k].to_vec(),
            v: combo[k..].to_vec(),
        })
        .collect()
}
