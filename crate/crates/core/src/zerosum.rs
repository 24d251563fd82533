//! Exact LP solver for rank-0 (zero-sum) bilinear games, `B = -A`.
//!
//! One simplex run on `min e^T p  s.t.  Ay <= E^T p, Fy = f, y >= 0`
//! yields the column strategy and row duals as the primal solution and
//! the row strategy and column duals straight off the optimal basis:
//! `x = -ineq_duals`, `q = -eq_duals`. A mirrored second LP exists as a
//! fallback for the (theoretically impossible, practically paranoid)
//! case where the recovered x fails feasibility.

use crate::game::{BilinearGame, EquilibriumCertificate, GameError, StrategyProfile};
use crate::linalg::{dot, vec_scale, RatMatrix, RatVector};
use crate::lp::{solve_lp, LinearProgram, LpError, LpOutcome, Optimum, Sense};
use crate::rational::Rat;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ZeroSumError {
    #[error("game is not zero-sum: A + B has a nonzero entry")]
    NotZeroSum,
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Exact Nash equilibrium of a zero-sum game, with the game value
/// reported as the row player's payoff.
pub fn solve_zero_sum(g: &BilinearGame) -> Result<(EquilibriumCertificate, Rat), ZeroSumError> {
    if !g.payoff_sum().is_zero() {
        return Err(ZeroSumError::NotZeroSum);
    }
    let opt = orientation_lp(&g.a, &g.e_mat, &g.e_rhs, &g.f_mat, &g.f_rhs)?;
    let value = opt.value.clone();
    let (m, _) = g.dims();
    let y = opt.point[..g.a.cols()].to_vec();
    let p = opt.point[g.a.cols()..].to_vec();
    let mut x = vec_scale(&opt.ineq_duals[..m], &-Rat::one());
    let mut q = vec_scale(&opt.eq_duals[..g.k2()], &-Rat::one());
    if !g.x_feasible(&x) {
        // Fallback: recover (x, q) from the mirrored orientation.
        let mirrored = orientation_lp(
            &g.b.transpose(),
            &g.f_mat,
            &g.f_rhs,
            &g.e_mat,
            &g.e_rhs,
        )?;
        x = mirrored.point[..m].to_vec();
        q = mirrored.point[m..].to_vec();
    }
    let profile = StrategyProfile { x, y };
    let regret = dot(&p, &g.e_rhs) + dot(&q, &g.f_rhs)
        - (g.payoff_row(&profile.x, &profile.y) + g.payoff_col(&profile.x, &profile.y));
    let cert = g.certificate_from_duals(profile, p, q, regret)?;
    Ok((cert, value))
}

/// `min e^T p  s.t.  Ay - E^T p <= 0, Fy = f, y >= 0, p free`, whose
/// value is `min_y max_x x^T A y`.
fn orientation_lp(
    a: &RatMatrix,
    e_mat: &RatMatrix,
    e_rhs: &RatVector,
    f_mat: &RatMatrix,
    f_rhs: &RatVector,
) -> Result<Optimum, ZeroSumError> {
    let (m, n) = (a.rows(), a.cols());
    let k1 = e_mat.rows();
    // Variables: y (n, nonneg) then p (k1, free).
    let mut objective = vec![Rat::zero(); n];
    objective.extend(e_rhs.iter().cloned());
    let mut ineq_lhs = RatMatrix::zeros(m, n + k1);
    for i in 0..m {
        for j in 0..n {
            ineq_lhs[(i, j)] = a[(i, j)].clone();
        }
        for r in 0..k1 {
            ineq_lhs[(i, n + r)] = -e_mat[(r, i)].clone();
        }
    }
    let mut eq_lhs = RatMatrix::zeros(f_mat.rows(), n + k1);
    for r in 0..f_mat.rows() {
        for j in 0..n {
            eq_lhs[(r, j)] = f_mat[(r, j)].clone();
        }
    }
    let mut nonneg = vec![true; n];
    nonneg.extend(vec![false; k1]);
    let lp = LinearProgram {
        sense: Sense::Min,
        objective,
        eq_lhs,
        eq_rhs: f_rhs.clone(),
        ineq_lhs,
        ineq_rhs: vec![Rat::zero(); m],
        nonneg,
    };
    match solve_lp(&lp)? {
        LpOutcome::Optimal(opt) => Ok(opt),
        // Strategy sets are compact and nonempty, so neither case occurs.
        LpOutcome::Infeasible => Err(ZeroSumError::Game(GameError::EmptyStrategySet(
            crate::game::Player::Col,
        ))),
        LpOutcome::Unbounded => Err(ZeroSumError::Game(GameError::NonCompactStrategySet(
            crate::game::Player::Row,
        ))),
    }
}

/// Both orientations of the minimax LP; equal by strong duality, exposed
/// so callers (and tests) can assert the invariant explicitly.
pub fn minimax_values(g: &BilinearGame) -> Result<(Rat, Rat), ZeroSumError> {
    if !g.payoff_sum().is_zero() {
        return Err(ZeroSumError::NotZeroSum);
    }
    let row = orientation_lp(&g.a, &g.e_mat, &g.e_rhs, &g.f_mat, &g.f_rhs)?;
    let col = orientation_lp(&g.b.transpose(), &g.f_mat, &g.f_rhs, &g.e_mat, &g.e_rhs)?;
    Ok((row.value, -col.value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convert::from_bimatrix;
    use crate::game::uniform;
    use crate::gen::{random_zero_sum, rng_from_seed, StrategySet};
    use crate::oracle::{brute_force_equilibria, profile_set};
    use crate::par::Parallelism;
    use crate::rational::rat;

    #[test]
    fn matching_pennies_value_zero() {
        let a = RatMatrix::from_i64(&[&[1, -1], &[-1, 1]]);
        let g = from_bimatrix(a.clone(), a.neg()).unwrap();
        let (cert, value) = solve_zero_sum(&g).unwrap();
        assert_eq!(value, rat(0));
        assert_eq!(cert.profile.x, uniform(2));
        assert_eq!(cert.profile.y, uniform(2));
        assert!(cert.is_exact());
        assert_eq!(cert.qp_residual, rat(0));
    }

    #[test]
    fn one_by_one_value_is_entry() {
        let g = from_bimatrix(
            RatMatrix::from_i64(&[&[7]]),
            RatMatrix::from_i64(&[&[-7]]),
        )
        .unwrap();
        let (cert, value) = solve_zero_sum(&g).unwrap();
        assert_eq!(value, rat(7));
        assert_eq!(cert.profile.x, vec![rat(1)]);
    }

    #[test]
    fn rejects_non_zero_sum() {
        let g = from_bimatrix(RatMatrix::identity(2), RatMatrix::identity(2)).unwrap();
        assert_eq!(solve_zero_sum(&g).unwrap_err(), ZeroSumError::NotZeroSum);
    }

    #[test]
    fn minimax_equality_and_oracle_agreement() {
        for seed in 0..8 {
            let g = random_zero_sum(
                &mut rng_from_seed(seed),
                3,
                4,
                5,
                StrategySet::Simplex,
                StrategySet::Simplex,
            );
            let (cert, value) = solve_zero_sum(&g).unwrap();
            assert!(cert.is_exact());
            assert_eq!(cert.qp_residual, rat(0));
            let (lo, hi) = minimax_values(&g).unwrap();
            assert_eq!(lo, hi);
            assert_eq!(lo, value);
            assert_eq!(g.payoff_row(&cert.profile.x, &cert.profile.y), value);
            // The oracle's equilibria all share the value and contain none
            // with a different payoff (von Neumann).
            let oracle = brute_force_equilibria(&g, Parallelism::Sequential).unwrap();
            assert!(!oracle.is_empty());
            for (x, y) in profile_set(&oracle) {
                assert_eq!(g.payoff_row(&x, &y), value);
            }
        }
    }

    #[test]
    fn birkhoff_zero_sum() {
        let g = random_zero_sum(
            &mut rng_from_seed(2),
            4,
            4,
            5,
            StrategySet::Birkhoff(2),
            StrategySet::Birkhoff(2),
        );
        let (cert, value) = solve_zero_sum(&g).unwrap();
        assert!(cert.is_exact());
        let (lo, hi) = minimax_values(&g).unwrap();
        assert_eq!(lo, value);
        assert_eq!(hi, value);
    }
}
