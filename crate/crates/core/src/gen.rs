//! Deterministic random game generation for tests, benchmarks, and the
//! CLI `gen` subcommand. Everything is seeded ChaCha8, so identical seeds
//! give identical games.

use crate::convert::ranking_duel_polytope;
use crate::game::{simplex_constraints, BilinearGame};
use crate::linalg::{outer, RatMatrix, RatVector};
use crate::rational::{rat, Rat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategySet {
    /// Probability simplex of the given dimension.
    Simplex,
    /// Birkhoff polytope of m x m doubly stochastic matrices; the strategy
    /// dimension must be m^2.
    Birkhoff(usize),
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn constraints(set: StrategySet, dim: usize) -> (RatMatrix, RatVector) {
    match set {
        StrategySet::Simplex => simplex_constraints(dim),
        StrategySet::Birkhoff(m) => {
            assert_eq!(dim, m * m, "Birkhoff strategies live in m^2 variables");
            ranking_duel_polytope(m)
        }
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: i64, hi: i64) -> RatMatrix {
    let data = (0..rows * cols)
        .map(|_| rat(rng.gen_range(lo..=hi)))
        .collect();
    RatMatrix::new(rows, cols, data)
}

fn random_vector(rng: &mut ChaCha8Rng, len: usize, lo: i64, hi: i64) -> RatVector {
    (0..len).map(|_| rat(rng.gen_range(lo..=hi))).collect()
}

/// Arbitrary game with independent integer payoffs.
pub fn random_game(
    rng: &mut ChaCha8Rng,
    m: usize,
    n: usize,
    max_entry: i64,
    row_set: StrategySet,
    col_set: StrategySet,
) -> BilinearGame {
    let a = random_matrix(rng, m, n, -max_entry, max_entry);
    let b = random_matrix(rng, m, n, -max_entry, max_entry);
    let (e_mat, e_rhs) = constraints(row_set, m);
    let (f_mat, f_rhs) = constraints(col_set, n);
    BilinearGame::validate(a, b, e_mat, e_rhs, f_mat, f_rhs).expect("generated game is valid")
}

/// Zero-sum game: `B = -A` exactly.
pub fn random_zero_sum(
    rng: &mut ChaCha8Rng,
    m: usize,
    n: usize,
    max_entry: i64,
    row_set: StrategySet,
    col_set: StrategySet,
) -> BilinearGame {
    let a = random_matrix(rng, m, n, -max_entry, max_entry);
    let (e_mat, e_rhs) = constraints(row_set, m);
    let (f_mat, f_rhs) = constraints(col_set, n);
    BilinearGame::validate(a.clone(), a.neg(), e_mat, e_rhs, f_mat, f_rhs)
        .expect("generated game is valid")
}

/// Rank-k game: `B = -A + sum_i alpha(i) beta(i)^T` with nonzero integer
/// factor vectors, so `rank(A+B) <= k` with equality almost surely.
pub fn random_rank_k(
    rng: &mut ChaCha8Rng,
    m: usize,
    n: usize,
    k: usize,
    max_entry: i64,
    row_set: StrategySet,
    col_set: StrategySet,
) -> BilinearGame {
    let a = random_matrix(rng, m, n, -max_entry, max_entry);
    let mut sum = RatMatrix::zeros(m, n);
    for _ in 0..k {
        let alpha = nonzero_vector(rng, m, max_entry);
        let beta = nonzero_vector(rng, n, max_entry);
        sum = sum.add(&outer(&alpha, &beta));
    }
    let b = a.neg().add(&sum);
    let (e_mat, e_rhs) = constraints(row_set, m);
    let (f_mat, f_rhs) = constraints(col_set, n);
    BilinearGame::validate(a, b, e_mat, e_rhs, f_mat, f_rhs).expect("generated game is valid")
}

/// Rank-k game whose decomposition vectors are strictly positive, as the
/// relative approximation scheme requires.
pub fn random_positive_rank_k(
    rng: &mut ChaCha8Rng,
    m: usize,
    n: usize,
    k: usize,
    max_entry: i64,
) -> BilinearGame {
    random_positive_rank_k_with_factors(rng, m, n, k, max_entry).0
}

/// Same, but also hands back the positive factor pairs, which the
/// relative approximation scheme needs verbatim.
pub fn random_positive_rank_k_with_factors(
    rng: &mut ChaCha8Rng,
    m: usize,
    n: usize,
    k: usize,
    max_entry: i64,
) -> (BilinearGame, Vec<(RatVector, RatVector)>) {
    let a = random_matrix(rng, m, n, -max_entry, max_entry);
    let mut sum = RatMatrix::zeros(m, n);
    let mut pairs = Vec::with_capacity(k);
    for _ in 0..k {
        let alpha = random_vector(rng, m, 1, max_entry);
        let beta = random_vector(rng, n, 1, max_entry);
        sum = sum.add(&outer(&alpha, &beta));
        pairs.push((alpha, beta));
    }
    let b = a.neg().add(&sum);
    let (e_mat, e_rhs) = simplex_constraints(m);
    let (f_mat, f_rhs) = simplex_constraints(n);
    let g = BilinearGame::validate(a, b, e_mat, e_rhs, f_mat, f_rhs)
        .expect("generated game is valid");
    (g, pairs)
}

fn nonzero_vector(rng: &mut ChaCha8Rng, len: usize, max_entry: i64) -> RatVector {
    loop {
        let v = random_vector(rng, len, -max_entry, max_entry);
        if v.iter().any(|e| e != &Rat::from_integer(0.into())) {
            return v;
        }
    }
}

/// Random vertex of the simplex-or-Birkhoff strategy polytope, by
/// optimizing a random objective.
pub fn random_strategy(rng: &mut ChaCha8Rng, g: &BilinearGame, row_player: bool) -> RatVector {
    use crate::lp::{solve_lp, LinearProgram, LpOutcome, Sense};
    let (m, n) = g.dims();
    let dim = if row_player { m } else { n };
    let objective = random_vector(rng, dim, -100, 100);
    let lp = if row_player {
        LinearProgram::with_equalities(
            Sense::Max,
            objective,
            g.e_mat.clone(),
            g.e_rhs.clone(),
            vec![true; dim],
        )
    } else {
        LinearProgram::with_equalities(
            Sense::Max,
            objective,
            g.f_mat.clone(),
            g.f_rhs.clone(),
            vec![true; dim],
        )
    };
    match solve_lp(&lp).expect("well-formed") {
        LpOutcome::Optimal(opt) => opt.point,
        _ => unreachable!("strategy sets are compact"),
    }
}

/// Random interior-leaning mixed strategy: a rational convex combination
/// of a few random vertices.
pub fn random_mixed_strategy(rng: &mut ChaCha8Rng, g: &BilinearGame, row_player: bool) -> RatVector {
    let v1 = random_strategy(rng, g, row_player);
    let v2 = random_strategy(rng, g, row_player);
    let w = rat(rng.gen_range(0..=4)) / rat(4);
    v1.iter()
        .zip(&v2)
        .map(|(a, b)| a * &w + b * (rat(1) - &w))
        .collect()
}
