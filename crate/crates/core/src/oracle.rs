//! Brute-force ground truth.
//!
//! Two independent oracles for desk-scale games: exhaustive fully-labeled
//! vertex-pair search on the best response polytopes, and classical
//! support enumeration for the bimatrix embedding. Exponential on purpose;
//! their only job is to be trustworthy.

use crate::game::{is_fully_labeled, BilinearGame, EquilibriumCertificate, StrategyProfile};
use crate::linalg::{dot, RatMatrix, RatVector};
use crate::par::{map_collect, Parallelism};
use crate::polytope::solve_unique;
use crate::rational::Rat;
use itertools::Itertools;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("game too large for brute force: {actual} constraints exceed the limit {limit}")]
    TooLarge { actual: usize, limit: usize },
}

/// Default guard on M + N + k1 + k2.
pub const DEFAULT_SIZE_LIMIT: usize = 24;

/// Every extreme Nash equilibrium, as exact certificates, by enumerating
/// all vertices of P and Q and keeping the fully-labeled pairs.
pub fn brute_force_equilibria(
    g: &BilinearGame,
    par: Parallelism,
) -> Result<Vec<EquilibriumCertificate>, OracleError> {
    brute_force_with_limit(g, par, DEFAULT_SIZE_LIMIT)
}

pub fn brute_force_with_limit(
    g: &BilinearGame,
    par: Parallelism,
    limit: usize,
) -> Result<Vec<EquilibriumCertificate>, OracleError> {
    let (m, n) = g.dims();
    let actual = m + n + g.k1() + g.k2();
    if actual > limit {
        return Err(OracleError::TooLarge { actual, limit });
    }
    let brp_p = g.build_brp_p();
    let brp_q = g.build_brp_q();
    let p_vertices = brp_p.polytope.enumerate_vertices();
    let q_vertices = brp_q.polytope.enumerate_vertices();

    let p_labels: Vec<BTreeSet<usize>> = p_vertices
        .iter()
        .map(|v| brp_p.labels_at(v).expect("own vertex"))
        .collect();
    let q_labels: Vec<BTreeSet<usize>> = q_vertices
        .iter()
        .map(|w| brp_q.labels_at(w).expect("own vertex"))
        .collect();

    let pairs: Vec<(usize, usize)> = (0..p_vertices.len())
        .cartesian_product(0..q_vertices.len())
        .filter(|&(i, j)| is_fully_labeled(&p_labels[i], &q_labels[j], m, n))
        .collect();

    let certs = map_collect(pairs, par, |(i, j)| {
        let (y, p) = brp_p.split(&p_vertices[i]);
        let (x, q) = brp_q.split(&q_vertices[j]);
        let profile = StrategyProfile {
            x: x.to_vec(),
            y: y.to_vec(),
        };
        let played = g.payoff_row(x, y) + g.payoff_col(x, y);
        let regret = dot(p, &g.e_rhs) + dot(q, &g.f_rhs) - played;
        g.certificate_from_duals(profile, p.to_vec(), q.to_vec(), regret)
            .expect("fully-labeled pair is feasible")
    });
    Ok(certs)
}

/// Distinct `(x, y)` profiles from a certificate list, for set comparison.
pub fn profile_set(certs: &[EquilibriumCertificate]) -> BTreeSet<(RatVector, RatVector)> {
    certs
        .iter()
        .map(|c| (c.profile.x.clone(), c.profile.y.clone()))
        .collect()
}

/// Classical support-pair enumeration over simplex strategies: the
/// independent second oracle for bimatrix games.
pub fn bimatrix_support_enumeration(
    a: &RatMatrix,
    b: &RatMatrix,
) -> Result<Vec<StrategyProfile>, OracleError> {
    let (m, n) = (a.rows(), a.cols());
    if m > 6 || n > 6 {
        return Err(OracleError::TooLarge {
            actual: m.max(n),
            limit: 6,
        });
    }
    let mut found: Vec<StrategyProfile> = Vec::new();
    for size in 1..=m.min(n) {
        for rows in (0..m).combinations(size) {
            for cols in (0..n).combinations(size) {
                let Some(y) = support_solve(a, &rows, &cols, false) else {
                    continue;
                };
                let Some(x) = support_solve(b, &cols, &rows, true) else {
                    continue;
                };
                // Off-support best-response inequalities.
                let u = dot(a.row(rows[0]), &y);
                let ay = a.mul_vec(&y);
                if (0..m).any(|i| ay[i] > u) {
                    continue;
                }
                let xb = b.vec_mul(&x);
                let v = xb[cols[0]].clone();
                if (0..n).any(|j| xb[j] > v) {
                    continue;
                }
                let profile = StrategyProfile { x, y };
                if !found.contains(&profile) {
                    found.push(profile);
                }
            }
        }
    }
    Ok(found)
}

/// Solves for the opponent mixture that makes the `support` rows of the
/// payoff matrix indifferent; `transpose` swaps the matrix orientation.
fn support_solve(
    payoff: &RatMatrix,
    support: &[usize],
    opp_support: &[usize],
    transpose: bool,
) -> Option<RatVector> {
    let opp_dim = if transpose { payoff.rows() } else { payoff.cols() };
    let coeff_row = |i: usize| -> RatVector {
        if transpose {
            payoff.col(i)
        } else {
            payoff.row(i).to_vec()
        }
    };
    // Unknowns: mixture over opp_support plus the common payoff u.
    let k = opp_support.len();
    let mut rows: Vec<RatVector> = Vec::new();
    let mut rhs: RatVector = Vec::new();
    for &i in support {
        let full = coeff_row(i);
        let mut row: RatVector = opp_support.iter().map(|&j| full[j].clone()).collect();
        row.push(-Rat::one());
        rows.push(row);
        rhs.push(Rat::zero());
    }
    let mut norm = vec![Rat::one(); k];
    norm.push(Rat::zero());
    rows.push(norm);
    rhs.push(Rat::one());
    let sol = solve_unique(&rows, &rhs, k + 1)?;
    if sol[..k].iter().any(|v| v.is_negative()) {
        return None;
    }
    let mut full = vec![Rat::zero(); opp_dim];
    for (idx, &j) in opp_support.iter().enumerate() {
        full[j] = sol[idx].clone();
    }
    Some(full)
}
