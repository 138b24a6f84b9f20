//! Exact linear algebra over arbitrary-precision rationals.
//!
//! Small dense routines (RREF, rank, null space, determinant, inverse) used
//! for interpolation systems and lattice matrices, plus a sparse row
//! elimination used for the rank of the tau coefficient matrix, whose columns
//! carry exactly two nonzero entries each.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Rational from an integer.
pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Rational `p / q`.
pub fn ratio(p: i64, q: i64) -> BigRational {
    assert!(q != 0, "zero denominator");
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Dense row-major rational matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMat {
    pub rows: Vec<Vec<BigRational>>,
    pub ncols: usize,
}

impl RatMat {
    pub fn new(rows: Vec<Vec<BigRational>>, ncols: usize) -> Self {
        for row in &rows {
            assert_eq!(row.len(), ncols, "ragged matrix");
        }
        RatMat { rows, ncols }
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Self {
        let ncols = rows.first().map_or(0, |r| r.len());
        RatMat::new(
            rows.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect(),
            ncols,
        )
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    /// In-place reduced row echelon form; returns the pivot columns.
    ///
    /// Partial pivoting by largest absolute value keeps intermediate entries
    /// modest; exactness is unaffected.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.ncols {
            if row == self.rows.len() {
                break;
            }
            let pivot_row = (row..self.rows.len())
                .filter(|&i| !self.rows[i][col].is_zero())
                .max_by_key(|&i| self.rows[i][col].abs());
            let Some(p) = pivot_row else { continue };
            self.rows.swap(row, p);
            let inv = self.rows[row][col].recip();
            for x in &mut self.rows[row] {
                *x = &*x * &inv;
            }
            for i in 0..self.rows.len() {
                if i != row && !self.rows[i][col].is_zero() {
                    let factor = self.rows[i][col].clone();
                    for c in col..self.ncols {
                        let delta = &factor * &self.rows[row][c];
                        self.rows[i][c] = &self.rows[i][c] - &delta;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(mut self) -> usize {
        self.rref().len()
    }

    /// Basis of the right null space `{ x : A x = 0 }`.
    ///
    /// Each basis vector has a 1 in one free column and the pivot-column
    /// entries determined by the RREF.
    pub fn nullspace(mut self) -> Vec<Vec<BigRational>> {
        let pivots = self.rref();
        let pivot_set: Vec<Option<usize>> = {
            let mut v = vec![None; self.ncols];
            for (i, &c) in pivots.iter().enumerate() {
                v[c] = Some(i);
            }
            v
        };
        let mut basis = Vec::new();
        for free in 0..self.ncols {
            if pivot_set[free].is_some() {
                continue;
            }
            let mut vec = vec![BigRational::zero(); self.ncols];
            vec[free] = BigRational::one();
            for (&pc, prow) in pivots.iter().zip(&self.rows) {
                vec[pc] = -prow[free].clone();
            }
            basis.push(vec);
        }
        basis
    }

    /// Determinant of a square matrix.
    pub fn det(mut self) -> BigRational {
        assert_eq!(self.nrows(), self.ncols, "determinant of non-square matrix");
        let n = self.ncols;
        let mut det = BigRational::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&i| !self.rows[i][col].is_zero()) else {
                return BigRational::zero();
            };
            if p != col {
                self.rows.swap(col, p);
                det = -det;
            }
            det *= self.rows[col][col].clone();
            let inv = self.rows[col][col].recip();
            for i in col + 1..n {
                if self.rows[i][col].is_zero() {
                    continue;
                }
                let factor = &self.rows[i][col] * &inv;
                for c in col..n {
                    let delta = &factor * &self.rows[col][c];
                    self.rows[i][c] = &self.rows[i][c] - &delta;
                }
            }
        }
        det
    }

    /// Inverse of a square matrix, or `None` if singular.
    pub fn invert(&self) -> Option<RatMat> {
        let n = self.nrows();
        assert_eq!(n, self.ncols, "inverse of non-square matrix");
        let mut aug = RatMat::new(
            self.rows
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    let mut r = row.clone();
                    r.extend((0..n).map(|j| {
                        if i == j { BigRational::one() } else { BigRational::zero() }
                    }));
                    r
                })
                .collect(),
            2 * n,
        );
        let pivots = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some(RatMat::new(
            aug.rows.into_iter().map(|row| row[n..].to_vec()).collect(),
            n,
        ))
    }
}

/// Rank of a sparse rational matrix given by rows `{column -> value}`.
///
/// Rows are reduced against previously stored pivot rows in column order and
/// then normalized; suited to very sparse matrices such as the tau coefficient
/// matrix, where elimination mimics graph contraction and fill-in stays low.
pub fn sparse_rank<I>(rows: I) -> usize
where
    I: IntoIterator<Item = BTreeMap<u32, BigRational>>,
{
    // pivot column -> index into `stored`
    let mut pivot_of_col: BTreeMap<u32, usize> = BTreeMap::new();
    let mut stored: Vec<BTreeMap<u32, BigRational>> = Vec::new();

    for row in rows {
        let mut row = row;
        loop {
            row.retain(|_, v| !v.is_zero());
            let Some((&lead, _)) = row.iter().next() else { break };
            let Some(&pidx) = pivot_of_col.get(&lead) else {
                // Normalize so the leading entry is 1, then store as a pivot row.
                let inv = row[&lead].recip();
                for v in row.values_mut() {
                    *v = &*v * &inv;
                }
                pivot_of_col.insert(lead, stored.len());
                stored.push(row);
                break;
            };
            let factor = row[&lead].clone();
            for (c, v) in stored[pidx].clone() {
                let delta = &factor * &v;
                let entry = row.entry(c).or_insert_with(BigRational::zero);
                *entry = &*entry - &delta;
            }
        }
    }
    stored.len()
}
