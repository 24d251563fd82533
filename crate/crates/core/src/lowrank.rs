//! Solver for games where one payoff matrix has low rank.
//!
//! The best-response polytope `P` has at most `2^{l+k} N^{l+k}` vertices
//! when `rank(A) = l`, because at most `l + k1` of its label inequalities
//! are independent: vertices are enumerated by choosing tight label rows
//! `D` (size at most `l + k1`) plus zero coordinates `J`. Each vertex is
//! screened by one feasibility LP (the complementary system over `Q`)
//! whose solutions complete it to a fully-labeled, hence exact, pair.
//! The same machinery enumerates every extreme equilibrium, at
//! exponential cost for general games.

use crate::game::{BilinearGame, EquilibriumCertificate, GameError, StrategyProfile};
use crate::linalg::{dot, matrix_rank, RatMatrix, RatVector};
use crate::lp::{LpOutcome, Sense};
use crate::par::{map_collect, Parallelism};
use crate::polytope::Polytope;
use crate::rational::Rat;
use itertools::Itertools;
use num_traits::{Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LowRankError {
    #[error("no vertex of the enumerated polytope passed the complementary check")]
    NoEquilibriumFound,
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Which payoff matrix's polytope to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Side {
    /// Pick the matrix of smaller rank.
    #[default]
    Auto,
    RowMatrix,
    ColMatrix,
}

/// One enumeration candidate: tight label rows `D`, zero coordinates `J`,
/// and the solved point when the system pinned one.
#[derive(Debug, Clone)]
pub struct VertexCandidate {
    pub d: Vec<usize>,
    pub j: Vec<usize>,
    pub point: Option<RatVector>,
    pub feasible: bool,
}

/// All vertices of `P`, via tight sets of at most `l_bound + k1` label
/// rows; complete whenever `l_bound >= rank(A)`. Duplicates from
/// degenerate tight sets are merged by exact equality.
pub fn enumerate_p_vertices(g: &BilinearGame, l_bound: usize, par: Parallelism) -> Vec<RatVector> {
    let (m, n) = g.dims();
    let (k1, k2) = (g.k1(), g.k2());
    let brp = g.build_brp_p();
    let poly = &brp.polytope;
    let needed = poly.dim - k2; // tight inequalities per vertex
    let d_max = (l_bound + k1).min(m).min(needed);
    let d_min = needed.saturating_sub(n);

    let mut combos: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    for d_size in d_min..=d_max {
        for d in (0..m).combinations(d_size) {
            // Dependent label-row subsets cannot pin a new vertex.
            let rows: Vec<RatVector> = d.iter().map(|&i| poly.ineqs[i].coeffs.clone()).collect();
            if !rows.is_empty() {
                let mat = RatMatrix::new(rows.len(), poly.dim, rows.concat());
                if matrix_rank(&mat) < d.len() {
                    continue;
                }
            }
            for j in (0..n).combinations(needed - d_size) {
                combos.push((d.clone(), j));
            }
        }
    }
    let solved = map_collect(combos, par, |(d, j)| {
        let tight: Vec<usize> = d.iter().copied().chain(j.iter().map(|&v| m + v)).collect();
        let point = poly.solve_tight(&tight).filter(|p| poly.contains(p));
        VertexCandidate {
            feasible: point.is_some(),
            d,
            j,
            point,
        }
    });
    let mut vertices: Vec<RatVector> = Vec::new();
    for cand in solved {
        if let Some(p) = cand.point {
            if !vertices.contains(&p) {
                vertices.push(p);
            }
        }
    }
    vertices
}

/// The complementary feasibility system for a vertex `v = (y, p)` of `P`:
/// any solution `(x, q)` completes `v` to a fully-labeled pair.
pub fn complementary_check(g: &BilinearGame, v: &[Rat]) -> Option<(RatVector, RatVector)> {
    let (m, n) = g.dims();
    let (k1, k2) = (g.k1(), g.k2());
    let y = &v[..n];
    let p = &v[n..n + k1];
    let ay = g.a.mul_vec(y);
    let etp = g.e_mat.vec_mul(p);
    let s_x: Vec<bool> = (0..m).map(|i| ay[i] == etp[i]).collect();
    let s_y: Vec<bool> = (0..n).map(|j| y[j].is_positive()).collect();

    // Variables (x, q) in R^{M+k2}.
    let dim = m + k2;
    let mut poly = Polytope::new(dim);
    for r in 0..k1 {
        let mut coeffs = vec![Rat::zero(); dim];
        for i in 0..m {
            coeffs[i] = g.e_mat[(r, i)].clone();
        }
        poly.push_eq(coeffs, g.e_rhs[r].clone());
    }
    for j in 0..n {
        let mut coeffs = vec![Rat::zero(); dim];
        for i in 0..m {
            coeffs[i] = g.b[(i, j)].clone();
        }
        for r in 0..k2 {
            coeffs[m + r] = -g.f_mat[(r, j)].clone();
        }
        if s_y[j] {
            poly.push_eq(coeffs, Rat::zero());
        } else {
            poly.push_ineq(coeffs, Rat::zero(), None);
        }
    }
    for (i, &active) in s_x.iter().enumerate() {
        if active {
            poly.push_nonneg(i, None);
        } else {
            let mut coeffs = vec![Rat::zero(); dim];
            coeffs[i] = Rat::from_integer(1.into());
            poly.push_eq(coeffs, Rat::zero());
        }
    }
    match poly.optimize(Sense::Max, vec![Rat::zero(); dim]) {
        LpOutcome::Optimal(opt) => {
            let x = opt.point[..m].to_vec();
            let q = opt.point[m..].to_vec();
            Some((x, q))
        }
        _ => None,
    }
}

fn certificate(
    g: &BilinearGame,
    x: RatVector,
    y: RatVector,
    p: RatVector,
    q: RatVector,
) -> Result<EquilibriumCertificate, LowRankError> {
    let profile = StrategyProfile { x, y };
    let played = g.payoff_row(&profile.x, &profile.y) + g.payoff_col(&profile.x, &profile.y);
    let regret = dot(&p, &g.e_rhs) + dot(&q, &g.f_rhs) - played;
    Ok(g.certificate_from_duals(profile, p, q, regret)?)
}

fn swapped(g: &BilinearGame) -> Result<BilinearGame, GameError> {
    BilinearGame::validate(
        g.b.transpose(),
        g.a.transpose(),
        g.f_mat.clone(),
        g.f_rhs.clone(),
        g.e_mat.clone(),
        g.e_rhs.clone(),
    )
}

pub fn solve_low_rank(
    g: &BilinearGame,
    side: Side,
    par: Parallelism,
) -> Result<EquilibriumCertificate, LowRankError> {
    let side = match side {
        Side::Auto => {
            if matrix_rank(&g.a) <= matrix_rank(&g.b) {
                Side::RowMatrix
            } else {
                Side::ColMatrix
            }
        }
        s => s,
    };
    if side == Side::ColMatrix {
        // rank(B) drives the bound: enumerate the swapped game's P, which
        // is this game's Q, then swap roles back.
        let sw = swapped(g)?;
        let cert = solve_low_rank(&sw, Side::RowMatrix, par)?;
        return certificate(
            g,
            cert.profile.y,
            cert.profile.x,
            cert.q,
            cert.p,
        );
    }
    let (_, n) = g.dims();
    let vertices = enumerate_p_vertices(g, matrix_rank(&g.a), par);
    let checks = map_collect(vertices, par, |v| {
        complementary_check(g, &v).map(|xq| (v, xq))
    });
    for found in checks.into_iter().flatten() {
        let (v, (x, q)) = found;
        let y = v[..n].to_vec();
        let p = v[n..].to_vec();
        return certificate(g, x, y, p, q);
    }
    // An equilibrium always exists among the enumerated vertices, so
    // this is reachable only through internal bugs.
    Err(LowRankError::NoEquilibriumFound)
}

/// Every extreme equilibrium: each vertex of `P` that passes the
/// complementary check, paired with every vertex of its complementary
/// `(x, q)` face of `Q`. Exponential in general.
pub fn enumerate_extreme_equilibria(
    g: &BilinearGame,
    par: Parallelism,
) -> Result<Vec<EquilibriumCertificate>, LowRankError> {
    let (m, n) = g.dims();
    let vertices = enumerate_p_vertices(g, matrix_rank(&g.a), par);
    let expanded = map_collect(vertices, par, |v| {
        if complementary_check(g, &v).is_none() {
            return Vec::new();
        }
        let face = complementary_face(g, &v);
        face.enumerate_vertices()
            .into_iter()
            .map(|w| (v.clone(), w))
            .collect::<Vec<_>>()
    });
    let mut out = Vec::new();
    for (v, w) in expanded.into_iter().flatten() {
        let cert = certificate(
            g,
            w[..m].to_vec(),
            v[..n].to_vec(),
            v[n..].to_vec(),
            w[m..].to_vec(),
        )?;
        if !out
            .iter()
            .any(|c: &EquilibriumCertificate| c.profile == cert.profile && c.p == cert.p && c.q == cert.q)
        {
            out.push(cert);
        }
    }
    Ok(out)
}

/// The complementary system as a polytope (a face of `Q`).
fn complementary_face(g: &BilinearGame, v: &[Rat]) -> Polytope {
    let (m, n) = g.dims();
    let (k1, k2) = (g.k1(), g.k2());
    let y = &v[..n];
    let p = &v[n..n + k1];
    let ay = g.a.mul_vec(y);
    let etp = g.e_mat.vec_mul(p);
    let dim = m + k2;
    let mut poly = Polytope::new(dim);
    for r in 0..k1 {
        let mut coeffs = vec![Rat::zero(); dim];
        for i in 0..m {
            coeffs[i] = g.e_mat[(r, i)].clone();
        }
        poly.push_eq(coeffs, g.e_rhs[r].clone());
    }
    for j in 0..n {
        let mut coeffs = vec![Rat::zero(); dim];
        for i in 0..m {
            coeffs[i] = g.b[(i, j)].clone();
        }
        for r in 0..k2 {
            coeffs[m + r] = -g.f_mat[(r, j)].clone();
        }
        if y[j].is_positive() {
            poly.push_eq(coeffs, Rat::zero());
        } else {
            poly.push_ineq(coeffs, Rat::zero(), None);
        }
    }
    for i in 0..m {
        if ay[i] == etp[i] {
            poly.push_nonneg(i, None);
        } else {
            let mut coeffs = vec![Rat::zero(); dim];
            coeffs[i] = Rat::from_integer(1.into());
            poly.push_eq(coeffs, Rat::zero());
        }
    }
    poly
}
