//! Dense real square matrices sized for small optical networks, the matrix
//! permanent, and a truncated-series matrix exponential kept around purely as
//! a cross-check oracle for the closed-form network construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap for [`permanent`]. The expansion is O(2^m m); the physics in this
/// crate only ever needs 2x2 permanents and the test oracles stay below 6x6,
/// so anything larger is a usage bug.
pub const PERMANENT_MAX_DIM: usize = 20;

/// Square real matrix, row-major storage.
///
/// Serializes as `{"m": <dim>, "rows": [[..], ..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatJson", into = "MatJson")]
pub struct Mat {
    m: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(m: usize) -> Self {
        assert!(m >= 1, "matrix dimension must be >= 1");
        Mat {
            m,
            data: vec![0.0; m * m],
        }
    }

    pub fn identity(m: usize) -> Self {
        let mut out = Mat::zeros(m);
        for i in 0..m {
            out.set(i, i, 1.0);
        }
        out
    }

    pub fn from_fn(m: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut out = Mat::zeros(m);
        for i in 0..m {
            for j in 0..m {
                out.set(i, j, f(i, j));
            }
        }
        out
    }

    /// Builds from rows, rejecting ragged, empty, or non-finite input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::NotSquare { rows: 0, cols: 0 });
        }
        let mut data = Vec::with_capacity(m * m);
        for row in rows {
            if row.len() != m {
                return Err(Error::NotSquare {
                    rows: m,
                    cols: row.len(),
                });
            }
            for &v in row {
                if !v.is_finite() {
                    return Err(Error::NonFiniteEntry);
                }
                data.push(v);
            }
        }
        Ok(Mat { m, data })
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.m + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.m + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.m..(i + 1) * self.m]
    }

    pub fn mul(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.m, rhs.m, "dimension mismatch in matrix product");
        let m = self.m;
        let mut out = Mat::zeros(m);
        for i in 0..m {
            for k in 0..m {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..m {
                    out.data[i * m + j] += a * rhs.get(k, j);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.m, |i, j| self.get(j, i))
    }

    pub fn scaled(&self, k: f64) -> Mat {
        Mat {
            m: self.m,
            data: self.data.iter().map(|v| v * k).collect(),
        }
    }

    pub fn add(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.m, rhs.m, "dimension mismatch in matrix sum");
        Mat {
            m: self.m,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Largest absolute entry-wise difference.
    pub fn max_abs_diff(&self, rhs: &Mat) -> f64 {
        assert_eq!(self.m, rhs.m, "dimension mismatch in matrix comparison");
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Serialize, Deserialize)]
struct MatJson {
    m: usize,
    rows: Vec<Vec<f64>>,
}

impl TryFrom<MatJson> for Mat {
    type Error = Error;

    fn try_from(value: MatJson) -> Result<Self> {
        if value.rows.len() != value.m {
            return Err(Error::DimensionMismatchJson {
                declared: value.m,
                actual: value.rows.len(),
            });
        }
        Mat::from_rows(&value.rows)
    }
}

impl From<Mat> for MatJson {
    fn from(mat: Mat) -> Self {
        let rows = (0..mat.m).map(|i| mat.row(i).to_vec()).collect();
        MatJson { m: mat.m, rows }
    }
}

/// Matrix permanent: the determinant expansion without the alternating signs.
///
/// Exact expansion up to 3x3, Ryser inclusion-exclusion (Gray-code order)
/// above that.
pub fn permanent(sub: &Mat) -> Result<f64> {
    let m = sub.dim();
    if m > PERMANENT_MAX_DIM {
        return Err(Error::PermanentTooLarge {
            m,
            max: PERMANENT_MAX_DIM,
        });
    }
    Ok(match m {
        1 => sub.get(0, 0),
        2 => sub.get(0, 0) * sub.get(1, 1) + sub.get(0, 1) * sub.get(1, 0),
        3 => {
            sub.get(0, 0) * (sub.get(1, 1) * sub.get(2, 2) + sub.get(1, 2) * sub.get(2, 1))
                + sub.get(0, 1) * (sub.get(1, 0) * sub.get(2, 2) + sub.get(1, 2) * sub.get(2, 0))
                + sub.get(0, 2) * (sub.get(1, 0) * sub.get(2, 1) + sub.get(1, 1) * sub.get(2, 0))
        }
        _ => ryser(sub),
    })
}

/// perm(A) = (-1)^n sum over non-empty column subsets S of
/// (-1)^|S| prod_i sum_{j in S} a_ij, visited in Gray-code order so each
/// subset update touches a single column.
fn ryser(a: &Mat) -> f64 {
    let n = a.dim();
    let mut row_sums = vec![0.0f64; n];
    let mut total = 0.0;
    let mut prev_gray: usize = 0;
    for k in 1usize..(1 << n) {
        let gray = k ^ (k >> 1);
        let flipped = gray ^ prev_gray;
        let j = flipped.trailing_zeros() as usize;
        if gray & flipped != 0 {
            for (i, rs) in row_sums.iter_mut().enumerate() {
                *rs += a.get(i, j);
            }
        } else {
            for (i, rs) in row_sums.iter_mut().enumerate() {
                *rs -= a.get(i, j);
            }
        }
        let prod: f64 = row_sums.iter().product();
        if (n - gray.count_ones() as usize) % 2 == 0 {
            total += prod;
        } else {
            total -= prod;
        }
        prev_gray = gray;
    }
    total
}

/// True iff `M M^T` is the identity to within `tol` (max-abs entry norm).
pub fn is_orthogonal(mat: &Mat, tol: f64) -> bool {
    mat.mul(&mat.transpose())
        .max_abs_diff(&Mat::identity(mat.dim()))
        <= tol
}

/// Truncated Taylor series `sum_{k < terms} M^k / k!`.
///
/// Slow and deliberately naive; used only to cross-check the closed-form
/// network exponential, never on a hot path.
pub fn matexp_series(mat: &Mat, terms: usize) -> Mat {
    let mut result = Mat::identity(mat.dim());
    let mut term = Mat::identity(mat.dim());
    for k in 1..terms {
        term = term.mul(mat).scaled(1.0 / k as f64);
        result = result.add(&term);
    }
    result
}
