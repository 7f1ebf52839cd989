//! Decomposition of network matrices into two-level beam-splitter steps by
//! column-wise Givens elimination, the recomposition inverse used to verify
//! plans, and the pinned reference circuit for the four-mode network.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::build;
use crate::matrix::Mat;
use crate::network::{build_network, MhdNetwork};

/// Entries at or below this magnitude are treated as already eliminated; no
/// rotation angle is computed for them (avoids 0/0) but an explicit trivial
/// step is still emitted so the plan shape stays deterministic.
const ELIM_ZERO_TOL: f64 = 1e-13;

/// Residual tolerance for the eliminated matrix: anything further from a
/// signed identity than this means the input was not orthogonal.
const RESIDUAL_TOL: f64 = 1e-9;

/// One beam splitter acting on modes `p < q`, embedded in the identity.
///
/// The 2x2 block is `[[sqrt(1-eta), sqrt(eta)], [sqrt(eta), -sqrt(1-eta)]]`
/// (determinant -1). `phase_pi` records a pi phase shifter on mode `q` at the
/// input side of the splitter, i.e. the block's second column is negated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelStep {
    pub p: usize,
    pub q: usize,
    pub eta: f64,
    pub phase_pi: bool,
}

impl TwoLevelStep {
    /// The bare 2x2 splitter block, before any recorded phases.
    pub fn block(&self) -> [[f64; 2]; 2] {
        let a = (1.0 - self.eta).sqrt();
        let b = self.eta.sqrt();
        [[a, b], [b, -a]]
    }

    fn embed(&self, m: usize) -> Mat {
        let [[a, b], _] = self.block();
        let (bq, aq) = if self.phase_pi { (-b, a) } else { (b, -a) };
        let mut out = Mat::identity(m);
        out.set(self.p, self.p, a);
        out.set(self.p, self.q, bq);
        out.set(self.q, self.p, b);
        out.set(self.q, self.q, aq);
        out
    }
}

/// Ordered beam-splitter program for one network: the matrix equals
/// `diag(residual_phases) * step_1 * step_2 * ... * step_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitPlan {
    pub m: usize,
    pub theta: f64,
    pub steps: Vec<TwoLevelStep>,
    /// Output-side pi phases, one `+-1` per mode.
    pub residual_phases: Vec<i8>,
}

/// Decomposes a network into exactly `m(m-1)/2` two-level steps by zeroing
/// the sub-diagonal entries of column 0 top to bottom, then column 1, and so
/// on. Deterministic plan layout; already-zero targets emit `eta = 0` steps.
pub fn decompose(net: &MhdNetwork) -> Result<CircuitPlan> {
    let (steps, residual_phases) = decompose_matrix(net.matrix())?;
    Ok(CircuitPlan {
        m: net.m(),
        theta: net.theta(),
        steps,
        residual_phases,
    })
}

/// Elimination core on a bare matrix; fails on non-orthogonal input.
pub fn decompose_matrix(mat: &Mat) -> Result<(Vec<TwoLevelStep>, Vec<i8>)> {
    let m = mat.dim();
    let mut w = mat.clone();

    // Plane rotations G with G_k..G_1 W = Lambda (diagonal +-1); each entry
    // is (p, q, cos, sin) acting on rows p and q.
    let mut rotations: Vec<(usize, usize, f64, f64)> = Vec::new();
    for col in 0..m.saturating_sub(1) {
        for row in (col + 1)..m {
            let wcc = w.get(col, col);
            let wrc = w.get(row, col);
            if wrc.abs() <= ELIM_ZERO_TOL {
                rotations.push((col, row, 1.0, 0.0));
                continue;
            }
            let r = wcc.hypot(wrc);
            let (c, s) = (wcc / r, wrc / r);
            for k in 0..m {
                let a = w.get(col, k);
                let b = w.get(row, k);
                w.set(col, k, c * a + s * b);
                w.set(row, k, -s * a + c * b);
            }
            w.set(row, col, 0.0);
            rotations.push((col, row, c, s));
        }
    }

    // The eliminated matrix must be a signed identity, otherwise the input
    // was not orthogonal to begin with.
    let mut max_dev: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            let dev = if i == j {
                (w.get(i, j).abs() - 1.0).abs()
            } else {
                w.get(i, j).abs()
            };
            max_dev = max_dev.max(dev);
        }
    }
    if max_dev > RESIDUAL_TOL {
        return Err(Error::DecompositionFailed {
            reason: format!(
                "eliminated matrix deviates from a signed identity by {max_dev:.3e}; \
                 input is not orthogonal"
            ),
        });
    }

    // W = G_1^T .. G_K^T Lambda. Walk the chain right to left, rewriting each
    // rotation times the accumulated sign diagonal as a sign diagonal times a
    // canonical splitter block, so all sign freight ends up in one output
    // phase vector: W = diag(carry) * B_1 * .. * B_K.
    let mut carry: Vec<f64> = (0..m)
        .map(|i| if w.get(i, i) >= 0.0 { 1.0 } else { -1.0 })
        .collect();
    let mut steps_rev: Vec<TwoLevelStep> = Vec::with_capacity(rotations.len());
    for &(p, q, c, s) in rotations.iter().rev() {
        // Block of R^T * diag(carry) on modes (p, q): [[c dp, -s dq], [s dp, c dq]].
        let (dp, dq) = (carry[p], carry[q]);
        let eta = (s * s).min(1.0);
        let (fp, fq, phase);
        if s == 0.0 {
            // Trivial rotation: block is diag(c dp, c dq) with |c| = 1.
            phase = false;
            fp = c * dp;
            fq = -c * dq;
        } else if c == 0.0 {
            // Pure swap: block is [[0, -s dq], [s dp, 0]].
            phase = false;
            fp = -s * dq;
            fq = s * dp;
        } else {
            fp = (c * dp).signum();
            fq = (s * dp).signum();
            phase = (-s * dq).signum() * fp < 0.0;
        }
        carry[p] = fp;
        carry[q] = fq;
        steps_rev.push(TwoLevelStep {
            p,
            q,
            eta,
            phase_pi: phase,
        });
    }
    steps_rev.reverse();

    let residual_phases = carry.iter().map(|&v| if v > 0.0 { 1 } else { -1 }).collect();
    Ok((steps_rev, residual_phases))
}

/// Multiplies the plan back out: `diag(residual) * step_1 * .. * step_k`.
pub fn recompose(plan: &CircuitPlan) -> Result<Mat> {
    recompose_steps(plan.m, &plan.steps, &plan.residual_phases)
}

pub fn recompose_steps(m: usize, steps: &[TwoLevelStep], residual: &[i8]) -> Result<Mat> {
    if residual.len() != m || residual.iter().any(|&r| r != 1 && r != -1) {
        return Err(Error::InvalidArgument(format!(
            "residual phases must be {m} entries of +-1"
        )));
    }
    let mut out = Mat::from_fn(m, |i, j| {
        if i == j {
            f64::from(residual[i])
        } else {
            0.0
        }
    });
    for step in steps {
        if step.p >= step.q || step.q >= m {
            return Err(Error::InvalidArgument(format!(
                "step modes ({}, {}) malformed for m = {m}",
                step.p, step.q
            )));
        }
        if !(0.0..=1.0).contains(&step.eta) {
            return Err(Error::InvalidArgument(format!(
                "step transmission {} outside [0, 1]",
                step.eta
            )));
        }
        out = out.mul(&step.embed(m));
    }
    Ok(out)
}

/// The four-mode circuit's three transmission ratios:
///
/// `eta_1 = sin^2 t / (2 + cos 2t)`, `eta_2 = 2 sin^2 t / (5 + cos 2t)`,
/// `eta_3 = sin^2 t / 3`.
pub fn d4_transmissions(theta: f64) -> [f64; 3] {
    let s2 = theta.sin().powi(2);
    let c2t = (2.0 * theta).cos();
    [s2 / (2.0 + c2t), 2.0 * s2 / (5.0 + c2t), s2 / 3.0]
}

/// The pinned four-mode reference circuit, valid on `theta in [0, pi/3]`.
///
/// Givens elimination of `D_4(theta)` yields the full triangle of six
/// splitters whose transmissions are the three ratios of
/// [`d4_transmissions`], each used twice in mirrored order:
/// `(eta_1, eta_2, eta_3)` on pairs `(0,1), (0,2), (0,3)` followed by
/// `(eta_3, eta_2, eta_1)` on pairs `(1,2), (1,3), (2,3)`, with the pi-phase
/// pattern below (constant over the whole window, since no rotation entry
/// changes sign on it). Three splitters cannot suffice: a two-level step
/// couples one extra mode per input at best, and `D_4` needs every input to
/// reach all four outputs.
pub fn d4_reference_plan(theta: f64) -> CircuitPlan {
    let [eta1, eta2, eta3] = d4_transmissions(theta);
    let step = |p, q, eta, phase_pi| TwoLevelStep { p, q, eta, phase_pi };
    CircuitPlan {
        m: 4,
        theta,
        steps: vec![
            step(0, 1, eta1, false),
            step(0, 2, eta2, false),
            step(0, 3, eta3, true),
            step(1, 2, eta3, true),
            step(1, 3, eta2, false),
            step(2, 3, eta1, true),
        ],
        residual_phases: vec![1, -1, -1, -1],
    }
}

/// Checks that the pinned reference circuit reproduces `D_4(theta)` to
/// within 1e-9.
pub fn verify_d4_reference(theta: f64) -> bool {
    let g = build(4).expect("4 is a power of two");
    let target = build_network(&g, theta);
    match recompose(&d4_reference_plan(theta)) {
        Ok(mat) => mat.max_abs_diff(target.matrix()) <= 1e-9,
        Err(_) => false,
    }
}
