//! Labeled polytopes in inequality/equality form.
//!
//! A [`Polytope`] is `{z : ineqs, eq_lhs z = eq_rhs}` over free variables;
//! nonnegativity constraints are ordinary inequality rows, which lets best
//! response polytopes carry the 1..M+N label numbering on exactly the rows
//! the labeling applies to. Vertex enumeration is exhaustive over tight
//! subsets and therefore complete, degenerate vertices included.

use crate::linalg::{dot, matrix_rank, RatMatrix, RatVector};
use crate::lp::{solve_lp, LinearProgram, LpOutcome, Sense};
use crate::rational::Rat;
use itertools::Itertools;
use num_traits::{One, Zero};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Clone)]
pub struct Inequality {
    /// `coeffs . z <= rhs`
    pub coeffs: RatVector,
    pub rhs: Rat,
    pub label: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Polytope {
    pub dim: usize,
    pub ineqs: Vec<Inequality>,
    pub eq_lhs: RatMatrix,
    pub eq_rhs: RatVector,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolytopeError {
    #[error("point is not in the polytope")]
    PointNotInPolytope,
}

impl Polytope {
    pub fn new(dim: usize) -> Self {
        Polytope {
            dim,
            ineqs: Vec::new(),
            eq_lhs: RatMatrix::zeros(0, dim),
            eq_rhs: Vec::new(),
        }
    }

    pub fn push_ineq(&mut self, coeffs: RatVector, rhs: Rat, label: Option<usize>) {
        assert_eq!(coeffs.len(), self.dim);
        self.ineqs.push(Inequality { coeffs, rhs, label });
    }

    /// `z_i >= 0` as the labeled inequality `-z_i <= 0`.
    pub fn push_nonneg(&mut self, var: usize, label: Option<usize>) {
        let mut coeffs = vec![Rat::zero(); self.dim];
        coeffs[var] = -Rat::one();
        self.push_ineq(coeffs, Rat::zero(), label);
    }

    pub fn push_eq(&mut self, coeffs: RatVector, rhs: Rat) {
        assert_eq!(coeffs.len(), self.dim);
        self.eq_lhs = self.eq_lhs.vstack(&RatMatrix::new(1, self.dim, coeffs));
        self.eq_rhs.push(rhs);
    }

    pub fn contains(&self, point: &[Rat]) -> bool {
        point.len() == self.dim
            && self
                .ineqs
                .iter()
                .all(|iq| dot(&iq.coeffs, point) <= iq.rhs)
            && (0..self.eq_lhs.rows()).all(|i| dot(self.eq_lhs.row(i), point) == self.eq_rhs[i])
    }

    /// Labels of the inequalities exactly tight at `point`.
    pub fn labels_at(&self, point: &[Rat]) -> Result<BTreeSet<usize>, PolytopeError> {
        if !self.contains(point) {
            return Err(PolytopeError::PointNotInPolytope);
        }
        Ok(self
            .ineqs
            .iter()
            .filter(|iq| dot(&iq.coeffs, point) == iq.rhs)
            .filter_map(|iq| iq.label)
            .collect())
    }

    /// Indices (into `ineqs`) of all tight inequalities at `point`.
    pub fn tight_indices(&self, point: &[Rat]) -> Vec<usize> {
        self.ineqs
            .iter()
            .enumerate()
            .filter(|(_, iq)| dot(&iq.coeffs, point) == iq.rhs)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn lp(&self, sense: Sense, objective: RatVector) -> LinearProgram {
        let m = self.ineqs.len();
        let mut ineq_lhs = RatMatrix::zeros(m, self.dim);
        let mut ineq_rhs = Vec::with_capacity(m);
        for (i, iq) in self.ineqs.iter().enumerate() {
            for (j, c) in iq.coeffs.iter().enumerate() {
                ineq_lhs[(i, j)] = c.clone();
            }
            ineq_rhs.push(iq.rhs.clone());
        }
        LinearProgram {
            sense,
            objective,
            eq_lhs: self.eq_lhs.clone(),
            eq_rhs: self.eq_rhs.clone(),
            ineq_lhs,
            ineq_rhs,
            nonneg: vec![false; self.dim],
        }
    }

    pub fn optimize(&self, sense: Sense, objective: RatVector) -> LpOutcome {
        solve_lp(&self.lp(sense, objective)).expect("polytope LPs are well-formed")
    }

    /// Copy with the inequalities at `indices` turned into equalities.
    pub fn with_tight(&self, indices: &[usize]) -> Polytope {
        let mut p = self.clone();
        for &i in indices {
            let iq = self.ineqs[i].clone();
            p.push_eq(iq.coeffs, iq.rhs);
        }
        p
    }

    /// Product polytope over concatenated coordinates; labels are dropped
    /// because the two factors use overlapping numberings.
    pub fn product(&self, other: &Polytope) -> Polytope {
        let dim = self.dim + other.dim;
        let mut p = Polytope::new(dim);
        for iq in &self.ineqs {
            let mut coeffs = iq.coeffs.clone();
            coeffs.resize(dim, Rat::zero());
            p.push_ineq(coeffs, iq.rhs.clone(), None);
        }
        for iq in &other.ineqs {
            let mut coeffs = vec![Rat::zero(); self.dim];
            coeffs.extend(iq.coeffs.iter().cloned());
            p.push_ineq(coeffs, iq.rhs.clone(), None);
        }
        for i in 0..self.eq_lhs.rows() {
            let mut coeffs = self.eq_lhs.row(i).to_vec();
            coeffs.resize(dim, Rat::zero());
            p.push_eq(coeffs, self.eq_rhs[i].clone());
        }
        for i in 0..other.eq_lhs.rows() {
            let mut coeffs = vec![Rat::zero(); self.dim];
            coeffs.extend(other.eq_lhs.row(i).iter().cloned());
            p.push_eq(coeffs, other.eq_rhs[i].clone());
        }
        p
    }

    /// Affine dimension of `{z : eqs, plus tight inequalities}`.
    pub fn eq_system_rank(&self, tight: &[usize]) -> usize {
        let mut rows: Vec<RatVector> = (0..self.eq_lhs.rows())
            .map(|i| self.eq_lhs.row(i).to_vec())
            .collect();
        for &i in tight {
            rows.push(self.ineqs[i].coeffs.clone());
        }
        if rows.is_empty() {
            return 0;
        }
        matrix_rank(&RatMatrix::new(rows.len(), self.dim, rows.concat()))
    }

    /// All vertices, by exhaustive enumeration of tight inequality subsets.
    /// Exponential in general; meant for desk-scale polytopes.
    pub fn enumerate_vertices(&self) -> Vec<RatVector> {
        let eq_rank = matrix_rank(&self.eq_lhs);
        let free_dims = self.dim - eq_rank;
        let mut vertices: Vec<RatVector> = Vec::new();
        for subset in (0..self.ineqs.len()).combinations(free_dims) {
            let Some(point) = self.solve_tight(&subset) else {
                continue;
            };
            if self.contains(&point) && !vertices.contains(&point) {
                vertices.push(point);
            }
        }
        vertices
    }

    /// Unique solution of the equalities plus the chosen tight
    /// inequalities, if one exists.
    pub fn solve_tight(&self, tight: &[usize]) -> Option<RatVector> {
        let mut rows: Vec<RatVector> = (0..self.eq_lhs.rows())
            .map(|i| self.eq_lhs.row(i).to_vec())
            .collect();
        let mut rhs: RatVector = self.eq_rhs.clone();
        for &i in tight {
            rows.push(self.ineqs[i].coeffs.clone());
            rhs.push(self.ineqs[i].rhs.clone());
        }
        solve_unique(&rows, &rhs, self.dim)
    }
}

/// Solves `rows * z = rhs`; `Some` only when the system is consistent and
/// has exactly one solution.
pub fn solve_unique(rows: &[RatVector], rhs: &[Rat], dim: usize) -> Option<RatVector> {
    let m = rows.len();
    // Augmented rational Gaussian elimination.
    let mut a: Vec<RatVector> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut row = r.clone();
            row.push(b.clone());
            row
        })
        .collect();
    let mut pivot_col = vec![usize::MAX; m];
    let mut rank = 0;
    for col in 0..dim {
        let Some(p) = (rank..m).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        let inv = Rat::one() / a[rank][col].clone();
        for c in col..=dim {
            a[rank][c] = &a[rank][c] * &inv;
        }
        for r in 0..m {
            if r != rank && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for c in col..=dim {
                    let sub = &factor * &a[rank][c];
                    a[r][c] = &a[r][c] - &sub;
                }
            }
        }
        pivot_col[rank] = col;
        rank += 1;
        if rank == m {
            break;
        }
    }
    // Consistency: zero rows must have zero rhs.
    for r in rank..m {
        if !a[r][dim].is_zero() {
            return None;
        }
    }
    if rank < dim {
        return None;
    }
    let mut z = vec![Rat::zero(); dim];
    for r in 0..rank {
        z[pivot_col[r]] = a[r][dim].clone();
    }
    Some(z)
}
