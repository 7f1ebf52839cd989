//! The network matrix `D_m(theta) = exp(theta Y_m) = cos(theta) I + sin(theta) Y_m`
//! assembled in closed form, the dip angle at which all cross-group
//! coincidences vanish, and submatrix views for the statistics layer.

use crate::error::{Error, Result};
use crate::generator::Generator;
use crate::matrix::Mat;
use crate::TOL_ALGEBRAIC;

/// The transmission angle `arccos(1/sqrt(m))` where the multimode HOM dip
/// occurs; at this point every entry of `D_m` has magnitude `1/sqrt(m)`.
pub fn theta_dip(m: usize) -> f64 {
    (1.0 / (m as f64).sqrt()).acos()
}

/// An unordered pair of distinct input modes, 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InputPair {
    i: usize,
    j: usize,
}

impl InputPair {
    /// Normalizes the order so `i < j`; the two modes must be distinct.
    pub fn new(a: usize, b: usize) -> Result<Self> {
        if a == b {
            return Err(Error::InvalidModePair { i: a, j: b });
        }
        Ok(InputPair {
            i: a.min(b),
            j: a.max(b),
        })
    }

    pub fn i(&self) -> usize {
        self.i
    }

    pub fn j(&self) -> usize {
        self.j
    }

    pub(crate) fn check_range(&self, m: usize) -> Result<()> {
        if self.j >= m {
            return Err(Error::IndexOutOfRange {
                what: "input mode",
                value: self.j,
                m,
            });
        }
        Ok(())
    }

    /// All `m(m-1)/2` pairs in lexicographic order.
    pub fn all(m: usize) -> Vec<InputPair> {
        let mut out = Vec::with_capacity(m * (m - 1) / 2);
        for i in 0..m {
            for j in (i + 1)..m {
                out.push(InputPair { i, j });
            }
        }
        out
    }
}

impl std::fmt::Display for InputPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.i, self.j)
    }
}

/// A configured network: the matrix `D_m(theta)` together with its size and
/// transmission angle. Immutable once built.
#[derive(Debug, Clone)]
pub struct MhdNetwork {
    m: usize,
    theta: f64,
    d: Mat,
}

/// Assembles `D_m(theta)` in closed form (no series evaluation): `cos(theta)`
/// on the diagonal and `sin(theta) y_ij` off it.
///
/// Any finite `theta` is accepted; the two-photon statistics are most
/// meaningful on `[0, theta_dip(m)]` but the matrix is defined everywhere.
pub fn build_network(g: &Generator, theta: f64) -> MhdNetwork {
    let (sin, cos) = theta.sin_cos();
    let y = g.y();
    let d = Mat::from_fn(g.m(), |i, j| {
        if i == j {
            cos
        } else {
            sin * y.get(i, j)
        }
    });
    MhdNetwork {
        m: g.m(),
        theta,
        d,
    }
}

impl MhdNetwork {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn matrix(&self) -> &Mat {
        &self.d
    }

    /// The 2x2 block at the intersection of output rows `(p, q)` with input
    /// columns `(i, j)`; its permanent squared is a two-photon transition
    /// probability.
    pub fn submatrix(&self, rows: (usize, usize), cols: (usize, usize)) -> Result<Mat> {
        for (what, value) in [
            ("output mode", rows.0),
            ("output mode", rows.1),
            ("input mode", cols.0),
            ("input mode", cols.1),
        ] {
            if value >= self.m {
                return Err(Error::IndexOutOfRange {
                    what,
                    value,
                    m: self.m,
                });
            }
        }
        Ok(Mat::from_rows(&[
            vec![self.d.get(rows.0, cols.0), self.d.get(rows.0, cols.1)],
            vec![self.d.get(rows.1, cols.0), self.d.get(rows.1, cols.1)],
        ])
        .expect("2x2 from finite entries"))
    }

    /// True iff `sqrt(m) D` is a (skew-)Hadamard matrix: all entries `+-1`
    /// and `H H^T = m I`. Holds exactly at `theta_dip`.
    pub fn hadamard_check(&self) -> bool {
        let root_m = (self.m as f64).sqrt();
        let h = self.d.scaled(root_m);
        for i in 0..self.m {
            for j in 0..self.m {
                if (h.get(i, j).abs() - 1.0).abs() > TOL_ALGEBRAIC {
                    return false;
                }
            }
        }
        h.mul(&h.transpose())
            .max_abs_diff(&Mat::identity(self.m).scaled(self.m as f64))
            <= TOL_ALGEBRAIC * self.m as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::build;
    use crate::matrix::{is_orthogonal, matexp_series};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};

    #[test]
    fn dip_angle_known_values() {
        assert!((theta_dip(2) - FRAC_PI_4).abs() <= 1e-15);
        assert!((theta_dip(4) - FRAC_PI_3).abs() <= 1e-15);
        let t16 = theta_dip(16);
        assert!((t16 - 0.25f64.acos()).abs() <= 1e-15);
        assert!((t16.cos() - t16.sin() / 15.0f64.sqrt()).abs() <= 1e-15);
    }

    #[test]
    fn zero_angle_gives_identity() {
        let net = build_network(&build(2).unwrap(), 0.0);
        assert_eq!(net.matrix().max_abs_diff(&Mat::identity(2)), 0.0);
    }

    #[test]
    fn four_mode_matrix_matches_general_form() {
        let theta = 0.7;
        let net = build_network(&build(4).unwrap(), theta);
        let (s, c) = theta.sin_cos();
        let r = s / 3.0f64.sqrt();
        let want = Mat::from_rows(&[
            vec![c, r, r, r],
            vec![-r, c, -r, r],
            vec![-r, r, c, -r],
            vec![-r, -r, r, c],
        ])
        .unwrap();
        assert!(net.matrix().max_abs_diff(&want) <= 1e-15);
    }

    #[test]
    fn four_mode_dip_matrix_is_half_signs() {
        let net = build_network(&build(4).unwrap(), theta_dip(4));
        let want = Mat::from_rows(&[
            vec![0.5, 0.5, 0.5, 0.5],
            vec![-0.5, 0.5, -0.5, 0.5],
            vec![-0.5, 0.5, 0.5, -0.5],
            vec![-0.5, -0.5, 0.5, 0.5],
        ])
        .unwrap();
        assert!(net.matrix().max_abs_diff(&want) <= 1e-15);
    }

    #[test]
    fn submatrix_views() {
        let net4 = build_network(&build(4).unwrap(), theta_dip(4));
        let sub = net4.submatrix((0, 1), (1, 2)).unwrap();
        let want = Mat::from_rows(&[vec![0.5, 0.5], vec![0.5, -0.5]]).unwrap();
        assert!(sub.max_abs_diff(&want) <= 1e-15);

        let id = build_network(&build(8).unwrap(), 0.0);
        let sub = id.submatrix((3, 5), (3, 5)).unwrap();
        assert_eq!(sub.max_abs_diff(&Mat::identity(2)), 0.0);

        let net = build_network(&build(4).unwrap(), FRAC_PI_6);
        let sub = net.submatrix((1, 2), (1, 2)).unwrap();
        let r = FRAC_PI_6.sin() / 3.0f64.sqrt();
        let want =
            Mat::from_rows(&[vec![FRAC_PI_6.cos(), -r], vec![r, FRAC_PI_6.cos()]]).unwrap();
        assert!(sub.max_abs_diff(&want) <= 1e-15);

        assert!(net.submatrix((0, 4), (0, 1)).is_err());
    }

    #[test]
    fn hadamard_character_at_the_dip() {
        for m in [2usize, 4, 8, 16] {
            let g = build(m).unwrap();
            assert!(build_network(&g, theta_dip(m)).hadamard_check(), "m = {m}");
            assert!(!build_network(&g, 0.0).hadamard_check(), "m = {m}");
        }
    }

    #[test]
    fn closed_form_is_orthogonal_and_matches_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for m in [2usize, 4, 8, 16] {
            let g = build(m).unwrap();
            for _ in 0..100 {
                let theta: f64 = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
                let net = build_network(&g, theta);
                assert!(is_orthogonal(net.matrix(), 1e-12));
                let series = matexp_series(&g.y().scaled(theta), 40);
                assert!(net.matrix().max_abs_diff(&series) <= 1e-10, "m = {m}");
            }
        }
    }

    #[test]
    fn columns_stay_orthonormal_for_all_theta() {
        let g = build(8).unwrap();
        for k in 0..20 {
            let theta = -3.0 + 0.3 * k as f64;
            let d = build_network(&g, theta).d;
            for a in 0..8 {
                for b in a..8 {
                    let dot: f64 = (0..8).map(|r| d.get(r, a) * d.get(r, b)).sum();
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!((dot - want).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn input_pair_normalizes_and_rejects_equal() {
        let p = InputPair::new(3, 1).unwrap();
        assert_eq!((p.i(), p.j()), (1, 3));
        assert!(InputPair::new(2, 2).is_err());
        assert_eq!(InputPair::all(4).len(), 6);
    }
}
