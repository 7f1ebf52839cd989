//! Exact two-photon output statistics: outcome distributions over detector
//! pairs, the input-dependent detector grouping, coincidence and bunching
//! probabilities by brute-force permanent sums and in closed form, and the
//! monotone mapping between the network angle and an equivalent two-mode
//! beam-splitter angle.

use std::f64::consts::FRAC_PI_4;

use crate::error::{Error, Result};
use crate::generator::Generator;
use crate::matrix::permanent;
use crate::network::{build_network, theta_dip, InputPair, MhdNetwork};
use crate::TOL_ALGEBRAIC;

/// Detector group label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Group {
    A,
    B,
}

impl std::fmt::Display for Group {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Group::A => write!(f, "A"),
            Group::B => write!(f, "B"),
        }
    }
}

/// An unordered pair of output modes; `a == b` means both photons landed in
/// the same detector (a bunched outcome).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OutputOutcome {
    a: usize,
    b: usize,
}

impl OutputOutcome {
    /// Normalizes the order so `a <= b`.
    pub fn new(x: usize, y: usize) -> Self {
        OutputOutcome {
            a: x.min(y),
            b: x.max(y),
        }
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn is_bunched(&self) -> bool {
        self.a == self.b
    }
}

/// Probability of detecting the two photons at `out` given they entered at
/// `input`: the squared permanent of the corresponding 2x2 submatrix, halved
/// for bunched outcomes.
pub fn outcome_probability(
    net: &MhdNetwork,
    input: InputPair,
    out: OutputOutcome,
) -> Result<f64> {
    input.check_range(net.m())?;
    let sub = net.submatrix((out.a, out.b), (input.i(), input.j()))?;
    let perm = permanent(&sub).expect("2x2 below permanent cap");
    let p = perm * perm;
    Ok(if out.is_bunched() { 0.5 * p } else { p })
}

/// The full two-photon output distribution for one input pair, stored densely
/// over all `m(m+1)/2` unordered outcomes.
#[derive(Debug, Clone)]
pub struct TwoPhotonDistribution {
    m: usize,
    input: InputPair,
    theta: f64,
    probs: Vec<f64>,
}

impl TwoPhotonDistribution {
    pub fn compute(net: &MhdNetwork, input: InputPair) -> Result<Self> {
        let m = net.m();
        input.check_range(m)?;
        let mut probs = Vec::with_capacity(m * (m + 1) / 2);
        for a in 0..m {
            for b in a..m {
                probs.push(outcome_probability(net, input, OutputOutcome::new(a, b))?);
            }
        }
        Ok(TwoPhotonDistribution {
            m,
            input,
            theta: net.theta(),
            probs,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn input(&self) -> InputPair {
        self.input
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    fn index(&self, out: OutputOutcome) -> usize {
        let a = out.a;
        a * self.m - a * (a + 1) / 2 + out.b
    }

    pub fn probability(&self, out: OutputOutcome) -> f64 {
        self.probs[self.index(out)]
    }

    pub fn iter(&self) -> impl Iterator<Item = (OutputOutcome, f64)> + '_ {
        (0..self.m)
            .flat_map(move |a| (a..self.m).map(move |b| OutputOutcome::new(a, b)))
            .zip(self.probs.iter().copied())
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Inverse-CDF draw. Outcomes with zero probability occupy an empty
    /// interval and can never be selected.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> OutputOutcome {
        self.sample_at(rng.random())
    }

    fn sample_at(&self, u: f64) -> OutputOutcome {
        let mut acc = 0.0;
        let mut fallback = None;
        for (out, p) in self.iter() {
            acc += p;
            if u < acc {
                return out;
            }
            if p > 0.0 {
                fallback = Some(out);
            }
        }
        fallback.expect("distribution has positive total mass")
    }
}

/// Per-input assignment of each output mode to detector group A or B.
///
/// Computed once from the dip-angle network and reused unchanged for every
/// other transmission angle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectorGrouping {
    input: InputPair,
    labels: Vec<Group>,
}

impl DetectorGrouping {
    pub fn input(&self) -> InputPair {
        self.input
    }

    pub fn labels(&self) -> &[Group] {
        &self.labels
    }

    pub fn group_of(&self, mode: usize) -> Group {
        self.labels[mode]
    }

    pub fn modes_in(&self, group: Group) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &g)| g == group)
            .map(|(k, _)| k)
            .collect()
    }
}

/// Detector grouping for one input: the sign of the element-wise product of
/// columns `i` and `j` of `D_m(theta_dip)`, with `+ -> A` and `- -> B`.
pub fn grouping(g: &Generator, input: InputPair) -> Result<DetectorGrouping> {
    let m = g.m();
    input.check_range(m)?;
    let net = build_network(g, theta_dip(m));
    let d = net.matrix();
    let mut labels = Vec::with_capacity(m);
    for row in 0..m {
        let prod = d.get(row, input.i()) * d.get(row, input.j());
        if prod == 0.0 {
            return Err(Error::DegenerateGrouping { mode: row });
        }
        labels.push(if prod > 0.0 { Group::A } else { Group::B });
    }
    let grouping = DetectorGrouping { input, labels };
    let a_count = grouping.labels.iter().filter(|&&g| g == Group::A).count();
    if 2 * a_count != m || grouping.group_of(input.i()) == grouping.group_of(input.j()) {
        return Err(Error::Internal {
            reason: format!(
                "grouping for input {input} is not balanced with split input modes; \
                 the generator does not satisfy the construction conditions"
            ),
        });
    }
    Ok(grouping)
}

fn check_grouping_contract(
    net: &MhdNetwork,
    input: InputPair,
    grouping: &DetectorGrouping,
) -> Result<()> {
    input.check_range(net.m())?;
    if grouping.input != input {
        return Err(Error::GroupingMismatch {
            reason: format!(
                "grouping was derived for input {} but used with input {input}",
                grouping.input
            ),
        });
    }
    if grouping.labels.len() != net.m() {
        return Err(Error::GroupingMismatch {
            reason: format!(
                "grouping covers {} modes but the network has {}",
                grouping.labels.len(),
                net.m()
            ),
        });
    }
    Ok(())
}

/// Brute-force coincidence probability: the sum of the `(m/2)^2` outcome
/// probabilities with one photon in each detector group.
pub fn coincidence_probability(
    net: &MhdNetwork,
    input: InputPair,
    grouping: &DetectorGrouping,
) -> Result<f64> {
    check_grouping_contract(net, input, grouping)?;
    let mut p = 0.0;
    for &a in &grouping.modes_in(Group::A) {
        for &b in &grouping.modes_in(Group::B) {
            p += outcome_probability(net, input, OutputOutcome::new(a, b))?;
        }
    }
    Ok(p)
}

/// Brute-force bunching probability: both photons inside one detector group,
/// including the same-detector outcomes with their 1/2 factor.
pub fn bunching_probability(
    net: &MhdNetwork,
    input: InputPair,
    grouping: &DetectorGrouping,
    group: Group,
) -> Result<f64> {
    check_grouping_contract(net, input, grouping)?;
    let modes = grouping.modes_in(group);
    let mut p = 0.0;
    for (k, &a) in modes.iter().enumerate() {
        for &b in &modes[k..] {
            p += outcome_probability(net, input, OutputOutcome::new(a, b))?;
        }
    }
    Ok(p)
}

/// Closed-form coincidence probability between the two detector groups,
/// independent of which input pair is used:
///
/// `P(AB) = (m-2) (cos t sin t / sqrt(m-1) - sin^2 t / (m-1))^2
///        + (cos^2 t - sin^2 t / (m-1))^2`
pub fn coincidence_closed_form(m: usize, theta: f64) -> f64 {
    let mm = m as f64;
    let r = mm - 1.0;
    let (s, c) = theta.sin_cos();
    let cross = c * s / r.sqrt() - s * s / r;
    let diag = c * c - s * s / r;
    (mm - 2.0) * cross * cross + diag * diag
}

/// Closed-form bunching probability obtained by summing the same-group
/// outcome probabilities directly:
///
/// `P(A^2) = (m-2)/(2(m-1)) sin^4 t + (m-2)/(m-1)^{3/2} cos t sin^3 t
///         + (m+2)/(2(m-1)) cos^2 t sin^2 t`
///
/// Equals `(1 - P(AB))/2` for every angle; the two routes are kept separate
/// so they can check each other.
pub fn bunching_closed_form(m: usize, theta: f64) -> f64 {
    let mm = m as f64;
    let r = mm - 1.0;
    let (s, c) = theta.sin_cos();
    (mm - 2.0) / (2.0 * r) * s.powi(4)
        + (mm - 2.0) / (r * r.sqrt()) * c * s.powi(3)
        + (mm + 2.0) / (2.0 * r) * c * c * s * s
}

/// Analytic `d/dtheta` of [`coincidence_closed_form`]; strictly negative on
/// the open interval `(0, theta_dip)`.
pub fn coincidence_derivative(m: usize, theta: f64) -> f64 {
    let mm = m as f64;
    let r = mm - 1.0;
    let root = r.sqrt();
    let (s, c) = theta.sin_cos();
    let (s2, c2) = (2.0 * theta).sin_cos();
    let cross = c * s / root - s * s / r;
    let cross_d = c2 / root - s2 / r;
    let diag = c * c - s * s / r;
    let diag_d = -s2 * mm / r;
    2.0 * (mm - 2.0) * cross * cross_d + 2.0 * diag * diag_d
}

const BISECT_MAX_ITERS: usize = 200;
/// Profile slopes are bounded by 2 in magnitude, so this half-width keeps the
/// residual of either angle map below 1e-10.
const BISECT_HALF_WIDTH: f64 = 5e-11;

/// Bisection for a decreasing `f` with `f(lo) >= 0 >= f(hi)`. Chosen over
/// Newton because only monotonicity is guaranteed, not curvature.
fn bisect_decreasing(lo0: f64, hi0: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (mut lo, mut hi) = (lo0, hi0);
    let flo = f(lo);
    if flo <= 0.0 {
        return lo;
    }
    let fhi = f(hi);
    if fhi >= 0.0 {
        return hi;
    }
    for _ in 0..BISECT_MAX_ITERS {
        if 0.5 * (hi - lo) <= BISECT_HALF_WIDTH {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The beam-splitter angle `phi` in `[0, pi/4]` whose coincidence profile
/// `cos^2(2 phi)` matches this network's profile at `theta`.
pub fn theta_to_phi(m: usize, theta: f64) -> Result<f64> {
    let dip = theta_dip(m);
    if !theta.is_finite() || !(0.0..=dip).contains(&theta) {
        return Err(Error::OutOfDomain {
            name: "theta",
            value: theta,
            lo: 0.0,
            hi: dip,
        });
    }
    let target = coincidence_closed_form(m, theta);
    Ok(bisect_decreasing(0.0, FRAC_PI_4, |phi| {
        let c = (2.0 * phi).cos();
        c * c - target
    }))
}

/// Inverse of [`theta_to_phi`]: the network angle in `[0, theta_dip]` whose
/// profile matches a beam splitter at `phi`. For large `m` this approaches
/// `theta = 2 phi`.
pub fn phi_to_theta(m: usize, phi: f64) -> Result<f64> {
    if !phi.is_finite() || !(0.0..=FRAC_PI_4).contains(&phi) {
        return Err(Error::OutOfDomain {
            name: "phi",
            value: phi,
            lo: 0.0,
            hi: FRAC_PI_4,
        });
    }
    let c = (2.0 * phi).cos();
    let target = c * c;
    Ok(bisect_decreasing(0.0, theta_dip(m), |theta| {
        coincidence_closed_form(m, theta) - target
    }))
}

/// Number of unordered output pairs `(p < q)` whose transition permanent
/// vanishes at the dip angle; always `m^2 / 4` for a valid generator.
pub fn zero_permanent_count(g: &Generator, input: InputPair) -> Result<usize> {
    let m = g.m();
    input.check_range(m)?;
    let net = build_network(g, theta_dip(m));
    let mut count = 0;
    for p in 0..m {
        for q in (p + 1)..m {
            let sub = net.submatrix((p, q), (input.i(), input.j()))?;
            if permanent(&sub).expect("2x2 below permanent cap").abs() <= TOL_ALGEBRAIC {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Eagerly built map from every input pair to its detector grouping.
///
/// Write-once at construction and read-only afterwards, so it can be shared
/// freely across worker threads.
#[derive(Debug, Clone)]
pub struct GroupingTable {
    m: usize,
    groupings: Vec<DetectorGrouping>,
}

impl GroupingTable {
    pub fn build(g: &Generator) -> Result<Self> {
        let m = g.m();
        let groupings = InputPair::all(m)
            .into_iter()
            .map(|input| grouping(g, input))
            .collect::<Result<Vec<_>>>()?;
        Ok(GroupingTable { m, groupings })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, input: InputPair) -> &DetectorGrouping {
        let (i, j) = (input.i(), input.j());
        let idx = i * self.m - i * (i + 1) / 2 + (j - i - 1);
        &self.groupings[idx]
    }

    pub fn iter(&self) -> impl Iterator<Item = &DetectorGrouping> {
        self.groupings.iter()
    }
}
