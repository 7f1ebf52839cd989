//! Network generators: skew-symmetric orthogonal matrices whose off-diagonal
//! entries all share the magnitude `1/sqrt(m-1)`, grown to any power-of-two
//! mode count by block doubling.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::TOL_ALGEBRAIC;

/// A validated generator `Y_m`.
///
/// The sign pattern is stored separately from the realized matrix so each
/// size computes its `1/sqrt(m-1)` entries fresh instead of rescaling the
/// parent's floats through repeated doublings.
#[derive(Debug, Clone)]
pub struct Generator {
    m: usize,
    signs: Vec<i8>,
    y: Mat,
}

impl Generator {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn y(&self) -> &Mat {
        &self.y
    }

    fn from_signs(m: usize, signs: Vec<i8>) -> Result<Self> {
        let scale = 1.0 / ((m as f64) - 1.0).sqrt();
        let y = Mat::from_fn(m, |i, j| f64::from(signs[i * m + j]) * scale);
        let g = Generator { m, signs, y };
        let report = validate(&g.y);
        if !report.all_hold() {
            return Err(Error::Internal {
                reason: format!("constructed generator for m = {m} failed validation: {report:?}"),
            });
        }
        Ok(g)
    }
}

/// The two-mode generator `[[0, 1], [-1, 0]]`.
pub fn y2() -> Generator {
    Generator {
        m: 2,
        signs: vec![0, 1, -1, 0],
        y: Mat::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]).expect("static 2x2"),
    }
}

/// Doubles the mode count via the block construction
/// `Y_2m = s * [[Y, Y + I/r], [Y - I/r, -Y]]` with `r = sqrt(m-1)` and
/// `s = sqrt(m-1)/sqrt(2m-1)`, which preserves all generator conditions.
pub fn double(g: &Generator) -> Result<Generator> {
    let m = g.m;
    let mm = 2 * m;
    let mut signs = vec![0i8; mm * mm];
    for i in 0..m {
        for j in 0..m {
            let s = g.signs[i * m + j];
            let eye = i8::from(i == j);
            signs[i * mm + j] = s;
            signs[i * mm + (j + m)] = s + eye;
            signs[(i + m) * mm + j] = s - eye;
            signs[(i + m) * mm + (j + m)] = -s;
        }
    }
    Generator::from_signs(mm, signs)
}

/// Builds `Y_m` by iterated doubling from [`y2`]. Deterministic: the same
/// matrix comes back on every call.
pub fn build(m: usize) -> Result<Generator> {
    if m < 2 || !m.is_power_of_two() {
        return Err(Error::UnsupportedModeCount { m });
    }
    let mut g = y2();
    while g.m < m {
        g = double(&g)?;
    }
    Ok(g)
}

/// Per-condition validation flags for a candidate generator matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    /// `Y^T = -Y`.
    pub a1_skew_symmetric: bool,
    /// Every off-diagonal entry has magnitude `1/sqrt(m-1)`.
    pub a2_equal_magnitude: bool,
    /// `Y Y^T = I`.
    pub a3_orthogonal: bool,
    /// `Y^2 = -I`, a consequence of the three conditions above.
    pub square_is_minus_identity: bool,
}

impl ValidationReport {
    pub fn all_hold(&self) -> bool {
        self.a1_skew_symmetric
            && self.a2_equal_magnitude
            && self.a3_orthogonal
            && self.square_is_minus_identity
    }
}

/// Checks an arbitrary square matrix against the generator conditions at the
/// default tolerance. Reports, never fails: this is the exploration surface
/// for user-supplied candidates of any size.
pub fn validate(y: &Mat) -> ValidationReport {
    validate_with_tol(y, TOL_ALGEBRAIC)
}

pub fn validate_with_tol(y: &Mat, tol: f64) -> ValidationReport {
    let m = y.dim();

    let mut a1 = true;
    for i in 0..m {
        for j in 0..m {
            if (y.get(i, j) + y.get(j, i)).abs() > tol {
                a1 = false;
            }
        }
    }

    let mut a2 = true;
    if m >= 2 {
        let magnitude = 1.0 / ((m as f64) - 1.0).sqrt();
        for i in 0..m {
            for j in 0..m {
                if i != j && (y.get(i, j).abs() - magnitude).abs() > tol {
                    a2 = false;
                }
            }
        }
    }

    let a3 = y
        .mul(&y.transpose())
        .max_abs_diff(&Mat::identity(m))
        <= tol;

    let square = y
        .mul(y)
        .max_abs_diff(&Mat::identity(m).scaled(-1.0))
        <= tol;

    ValidationReport {
        a1_skew_symmetric: a1,
        a2_equal_magnitude: a2,
        a3_orthogonal: a3,
        square_is_minus_identity: square,
    }
}
