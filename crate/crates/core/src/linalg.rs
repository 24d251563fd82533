//! Dense exact-rational matrices and vectors.
//!
//! Rank is computed by fraction-free (Bareiss) elimination on the integer
//! matrix obtained after clearing denominators, which keeps intermediate
//! entries at subdeterminant size instead of letting fractions blow up.

use crate::rational::{bit_length, rat, Rat};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type RatVector = Vec<Rat>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinalgError {
    #[error("matrix has rank {actual}, which exceeds the requested bound {bound}")]
    RankExceeded { actual: usize, bound: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

impl RatMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Rat>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must be rows*cols");
        RatMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix::new(rows, cols, vec![Rat::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row.iter().map(|&v| rat(v)));
        }
        RatMatrix::new(r, c, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> RatVector {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> RatMatrix {
        let mut t = RatMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn add(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        RatMatrix::new(self.rows, self.cols, data)
    }

    pub fn scale(&self, s: &Rat) -> RatMatrix {
        RatMatrix::new(self.rows, self.cols, self.data.iter().map(|a| a * s).collect())
    }

    pub fn neg(&self) -> RatMatrix {
        self.scale(&rat(-1))
    }

    /// Matrix-vector product `self * v`.
    pub fn mul_vec(&self, v: &[Rat]) -> RatVector {
        assert_eq!(self.cols, v.len());
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `v^T * self`.
    pub fn vec_mul(&self, v: &[Rat]) -> RatVector {
        assert_eq!(self.rows, v.len());
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| &v[i] * &self[(i, j)]).sum())
            .collect()
    }

    /// Maximum absolute entry.
    pub fn max_abs(&self) -> Rat {
        self.data
            .iter()
            .map(|a| a.abs())
            .max()
            .unwrap_or_else(Rat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|a| a.is_zero())
    }

    pub fn entries(&self) -> &[Rat] {
        &self.data
    }

    /// Vertically stack `self` on top of `other`.
    pub fn vstack(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        RatMatrix::new(self.rows + other.rows, self.cols, data)
    }

    /// Block matrix from a grid of blocks; `None` stands for a zero block.
    pub fn from_blocks(grid: &[Vec<Option<&RatMatrix>>], row_dims: &[usize], col_dims: &[usize]) -> RatMatrix {
        let rows: usize = row_dims.iter().sum();
        let cols: usize = col_dims.iter().sum();
        let mut m = RatMatrix::zeros(rows, cols);
        let mut r0 = 0;
        for (bi, block_row) in grid.iter().enumerate() {
            let mut c0 = 0;
            for (bj, block) in block_row.iter().enumerate() {
                if let Some(b) = block {
                    assert_eq!((b.rows, b.cols), (row_dims[bi], col_dims[bj]));
                    for i in 0..b.rows {
                        for j in 0..b.cols {
                            m[(r0 + i, c0 + j)] = b[(i, j)].clone();
                        }
                    }
                }
                c0 += col_dims[bj];
            }
            r0 += row_dims[bi];
        }
        m
    }

    pub fn total_bit_length(&self) -> u64 {
        self.data.iter().map(bit_length).sum()
    }
}

impl std::ops::Index<(usize, usize)> for RatMatrix {
    type Output = Rat;
    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn vec_add(a: &[Rat], b: &[Rat]) -> RatVector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_scale(a: &[Rat], s: &Rat) -> RatVector {
    a.iter().map(|x| x * s).collect()
}

pub fn vec_max_abs(a: &[Rat]) -> Rat {
    a.iter().map(|x| x.abs()).max().unwrap_or_else(Rat::zero)
}

/// Outer product `a * b^T`.
pub fn outer(a: &[Rat], b: &[Rat]) -> RatMatrix {
    let mut m = RatMatrix::zeros(a.len(), b.len());
    for i in 0..a.len() {
        for j in 0..b.len() {
            m[(i, j)] = &a[i] * &b[j];
        }
    }
    m
}

/// Clears denominators row-wise and runs Bareiss elimination over BigInt.
fn to_integer_rows(m: &RatMatrix) -> Vec<Vec<BigInt>> {
    (0..m.rows())
        .map(|i| {
            let mut lcm = BigInt::one();
            for e in m.row(i) {
                lcm = num_integer::lcm(lcm, e.denom().clone());
            }
            m.row(i)
                .iter()
                .map(|e| e.numer() * (&lcm / e.denom()))
                .collect()
        })
        .collect()
}

/// Exact rank via fraction-free Gaussian (Bareiss) elimination.
pub fn matrix_rank(m: &RatMatrix) -> usize {
    let mut a = to_integer_rows(m);
    let (rows, cols) = (m.rows(), m.cols());
    let mut prev = BigInt::one();
    let mut rank = 0;
    let mut pivot_row = 0;
    for col in 0..cols {
        if pivot_row >= rows {
            break;
        }
        // First nonzero pivot in this column at or below pivot_row.
        let Some(p) = (pivot_row..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(pivot_row, p);
        let pivot = a[pivot_row][col].clone();
        for r in pivot_row + 1..rows {
            for c in 0..cols {
                if c == col {
                    continue;
                }
                let v = (&pivot * &a[r][c] - &a[r][col] * &a[pivot_row][c]) / &prev;
                a[r][c] = v;
            }
            a[r][col] = BigInt::zero();
        }
        prev = pivot;
        pivot_row += 1;
        rank += 1;
    }
    rank
}

/// Greedy exact rank factorization: returns `rank(m)` pairs `(alpha, beta)`
/// with `sum_i alpha(i) * beta(i)^T = m`, pivots chosen by first nonzero,
/// lowest index first.
pub fn rank_factorize(
    m: &RatMatrix,
    k: usize,
) -> Result<Vec<(RatVector, RatVector)>, LinalgError> {
    let mut residual = m.clone();
    let mut pairs = Vec::new();
    loop {
        // First nonzero entry scanning row-major.
        let mut pivot = None;
        'scan: for i in 0..residual.rows() {
            for j in 0..residual.cols() {
                if !residual[(i, j)].is_zero() {
                    pivot = Some((i, j));
                    break 'scan;
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        if pairs.len() == k {
            return Err(LinalgError::RankExceeded {
                actual: matrix_rank(m),
                bound: k,
            });
        }
        let alpha = residual.col(pj);
        let inv_pivot = Rat::one() / residual[(pi, pj)].clone();
        let beta: RatVector = residual.row(pi).iter().map(|v| v * &inv_pivot).collect();
        for i in 0..residual.rows() {
            for j in 0..residual.cols() {
                let delta = &alpha[i] * &beta[j];
                residual[(i, j)] = &residual[(i, j)] - &delta;
            }
        }
        pairs.push((alpha, beta));
    }
    Ok(pairs)
}

/// `l! * Z^l`, the bound on any vertex-coordinate denominator of the
/// polytopes built from integer data of magnitude at most `Z`.
pub fn denominator_bound(z: &BigInt, l: usize) -> BigInt {
    assert!(z >= &BigInt::one() && l >= 1);
    let mut factorial = BigInt::one();
    for i in 2..=l {
        factorial *= BigInt::from(i);
    }
    factorial * z.pow(l as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use proptest::prelude::*;

    #[test]
    fn rank_of_named_matrices() {
        assert_eq!(matrix_rank(&RatMatrix::zeros(3, 3)), 0);
        assert_eq!(matrix_rank(&RatMatrix::from_i64(&[&[1, 2], &[2, 4]])), 1);
        assert_eq!(matrix_rank(&RatMatrix::identity(2)), 2);
    }

    #[test]
    fn rank_handles_fractions() {
        let proportional = RatMatrix::new(2, 2, vec![ratio(1, 2), ratio(1, 3), ratio(3, 2), rat(1)]);
        assert_eq!(matrix_rank(&proportional), 1);
        let full = RatMatrix::new(2, 2, vec![ratio(1, 2), ratio(1, 3), ratio(3, 2), rat(2)]);
        assert_eq!(matrix_rank(&full), 2);
    }

    #[test]
    fn factorize_proportional_rows() {
        let m = RatMatrix::from_i64(&[&[2, 4], &[1, 2]]);
        let pairs = rank_factorize(&m, 1).unwrap();
        assert_eq!(pairs.len(), 1);
        let (alpha, beta) = &pairs[0];
        assert_eq!(outer(alpha, beta), m);
    }

    #[test]
    fn factorize_zero_matrix_is_empty() {
        assert!(rank_factorize(&RatMatrix::zeros(2, 3), 0).unwrap().is_empty());
    }

    #[test]
    fn factorize_rejects_rank_excess() {
        let err = rank_factorize(&RatMatrix::identity(2), 1).unwrap_err();
        assert_eq!(err, LinalgError::RankExceeded { actual: 2, bound: 1 });
    }

    #[test]
    fn planted_rank2_reconstructs() {
        // 4x4 integer matrix of rank 2 from a planted U*V product.
        let u = RatMatrix::from_i64(&[&[1, 2], &[0, 1], &[3, -1], &[2, 2]]);
        let v = RatMatrix::from_i64(&[&[1, 0, 2, -1], &[0, 1, 1, 3]]);
        let mut m = RatMatrix::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] = dot(u.row(i), &v.col(j));
            }
        }
        assert_eq!(matrix_rank(&m), 2);
        let pairs = rank_factorize(&m, 2).unwrap();
        assert_eq!(pairs.len(), 2);
        let mut sum = RatMatrix::zeros(4, 4);
        for (a, b) in &pairs {
            sum = sum.add(&outer(a, b));
        }
        assert_eq!(sum, m);
    }

    #[test]
    fn denominator_bound_values() {
        assert_eq!(denominator_bound(&BigInt::from(2), 3), BigInt::from(48));
        assert_eq!(denominator_bound(&BigInt::from(1), 4), BigInt::from(24));
        assert_eq!(denominator_bound(&BigInt::from(3), 2), BigInt::from(18));
    }

    fn planted(n: usize, m: usize, r: usize, seed: &mut u64) -> RatMatrix {
        // Small deterministic LCG keeps the test independent of rand.
        let mut next = || {
            *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((*seed >> 33) % 7) as i64 - 3
        };
        let mut out = RatMatrix::zeros(n, m);
        for _ in 0..r {
            let u: RatVector = (0..n).map(|_| rat(next())).collect();
            let v: RatVector = (0..m).map(|_| rat(next())).collect();
            out = out.add(&outer(&u, &v));
        }
        out
    }

    // Independent oracle: plain rational Gaussian elimination.
    fn rank_by_rational_elimination(m: &RatMatrix) -> usize {
        let mut a: Vec<RatVector> = (0..m.rows()).map(|i| m.row(i).to_vec()).collect();
        let (rows, cols) = (m.rows(), m.cols());
        let mut rank = 0;
        for col in 0..cols {
            let Some(p) = (rank..rows).find(|&r| !a[r][col].is_zero()) else {
                continue;
            };
            a.swap(rank, p);
            let inv = Rat::one() / a[rank][col].clone();
            for r in rank + 1..rows {
                let factor = &a[r][col] * &inv;
                for c in col..cols {
                    let sub = &factor * &a[rank][c];
                    a[r][c] = &a[r][c] - &sub;
                }
            }
            rank += 1;
            if rank == rows {
                break;
            }
        }
        rank
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        // matrix_rank matches an independent rational-elimination oracle and
        // never exceeds the planted rank; rank_factorize reconstructs the
        // input exactly.
        #[test]
        fn planted_rank_and_reconstruction(n in 1usize..8, m in 1usize..8, r in 0usize..4, seed in any::<u64>()) {
            let mat = planted(n, m, r, &mut seed.clone());
            let rank = matrix_rank(&mat);
            prop_assert_eq!(rank, rank_by_rational_elimination(&mat));
            prop_assert!(rank <= r.min(n).min(m));
            let pairs = rank_factorize(&mat, rank).unwrap();
            prop_assert_eq!(pairs.len(), rank);
            let mut sum = RatMatrix::zeros(n, m);
            for (a, b) in &pairs {
                sum = sum.add(&outer(a, b));
            }
            prop_assert_eq!(sum, mat);
        }
    }
}
