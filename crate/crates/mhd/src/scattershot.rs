//! Scattershot pair source: heralding probabilities for an array of squeezer
//! crystals, closed-form success rates of the competing architectures, and a
//! seeded Monte Carlo experiment that drives the exact output distributions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::Generator;
use crate::network::{build_network, InputPair};
use crate::stats::{Group, GroupingTable, TwoPhotonDistribution};

/// Source description: `n` squeezer crystals with squeezing strength `chi`.
///
/// Each crystal emits `p` photon pairs per pump pulse with probability
/// `(1 - chi^2) chi^(2p)`. `chi = 1` is excluded (non-normalizable state).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceParams {
    n: usize,
    chi: f64,
}

impl SourceParams {
    pub fn new(n: usize, chi: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidSource {
                reason: "need at least one crystal".into(),
            });
        }
        if !chi.is_finite() || !(0.0..1.0).contains(&chi) {
            return Err(Error::InvalidSource {
                reason: format!("chi = {chi} outside [0, 1)"),
            });
        }
        Ok(SourceParams { n, chi })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    /// `(1 - chi^2)^n`, the weight of the all-vacuum configuration of the
    /// other crystals that every herald formula shares.
    fn vacuum_weight(&self) -> f64 {
        (1.0 - self.chi * self.chi).powi(self.n as i32)
    }

    /// `(1 - chi^2)^n chi^4 n/2`, the factor shared by the heralded
    /// architectures. Computing it once keeps the success-rate ratio
    /// `D : L = (n-1) : 1` exact in floating point.
    fn heralded_pair_base(&self) -> f64 {
        let chi_sq = self.chi * self.chi;
        self.vacuum_weight() * chi_sq * chi_sq * (self.n as f64 / 2.0)
    }
}

/// Probability that crystals `i` and `j` each herald exactly one photon while
/// every other crystal stays dark: `(1 - chi^2)^n chi^4`, independent of
/// which two crystals are asked about.
pub fn herald_two_probability(params: &SourceParams, i: usize, j: usize) -> Result<f64> {
    if i == j {
        return Err(Error::InvalidModePair { i, j });
    }
    for (what, value) in [("crystal", i), ("crystal", j)] {
        if value >= params.n {
            return Err(Error::IndexOutOfRange {
                what,
                value,
                m: params.n,
            });
        }
    }
    let chi_sq = params.chi * params.chi;
    Ok(params.vacuum_weight() * chi_sq * chi_sq)
}

/// Success probability of the full network fed by `n` heralded crystals:
/// any of the `n(n-1)/2` input pairs is acceptable.
///
/// `P(D_n) = (1 - chi^2)^n chi^4 n(n-1)/2`
pub fn success_d(params: &SourceParams) -> Result<f64> {
    if params.n < 2 {
        return Err(Error::InvalidSource {
            reason: "the network needs at least two crystals".into(),
        });
    }
    Ok(params.heralded_pair_base() * (params.n - 1) as f64)
}

/// Success probability of a linear array of `n/2` separate beam splitters:
/// the two photons must land on the two ports of the same splitter.
///
/// `P(L_n) = (1 - chi^2)^n chi^4 n/2`
pub fn success_l(params: &SourceParams) -> Result<f64> {
    if params.n < 2 || params.n % 2 != 0 {
        return Err(Error::InvalidSource {
            reason: format!("a splitter array needs an even crystal count, got {}", params.n),
        });
    }
    Ok(params.heralded_pair_base())
}

/// Success probability when both arms of each crystal feed a splitter
/// directly (no heralding): only `chi^2` is paid per pair, `n` splitters.
///
/// `P(L'_2n) = (1 - chi^2)^n chi^2 n`
pub fn success_l_prime(params: &SourceParams) -> f64 {
    let chi_sq = params.chi * params.chi;
    params.vacuum_weight() * chi_sq * params.n as f64
}

/// Crystal count above which the full network out-samples the direct-fed
/// splitter array: `2 / chi^2 + 1`.
///
/// Accepts the boundary value `chi = 1`; diverges as `chi -> 0`.
pub fn crossover_n(chi: f64) -> Result<f64> {
    if !chi.is_finite() || chi <= 0.0 || chi > 1.0 {
        return Err(Error::OutOfDomain {
            name: "chi",
            value: chi,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(2.0 / (chi * chi) + 1.0)
}

/// One pump pulse of the scattershot source. Returns the heralded input pair
/// iff exactly two crystals emitted exactly one pair each and every other
/// crystal stayed dark; anything else is a rejected pulse, not an error.
///
/// Always draws exactly `n` values from the stream so that pulse boundaries
/// are position-independent for a fixed seed.
pub fn sample_input<R: Rng + ?Sized>(params: &SourceParams, rng: &mut R) -> Option<InputPair> {
    let chi_sq = params.chi * params.chi;
    let mut first = None;
    let mut second = None;
    let mut rejected = false;
    for crystal in 0..params.n {
        let pairs = sample_pair_count(chi_sq, rng);
        match pairs {
            0 => {}
            1 => {
                if first.is_none() {
                    first = Some(crystal);
                } else if second.is_none() {
                    second = Some(crystal);
                } else {
                    rejected = true;
                }
            }
            _ => rejected = true,
        }
    }
    match (first, second, rejected) {
        (Some(i), Some(j), false) => Some(InputPair::new(i, j).expect("distinct crystals")),
        _ => None,
    }
}

/// Inverse-CDF draw of the per-crystal pair number `p` with
/// `P(p) = (1 - chi^2) chi^(2p)`.
fn sample_pair_count<R: Rng + ?Sized>(chi_sq: f64, rng: &mut R) -> u32 {
    let u: f64 = rng.random();
    if chi_sq == 0.0 {
        return 0;
    }
    let mut tail = chi_sq; // P(count > k)
    let mut k = 0;
    while u >= 1.0 - tail {
        tail *= chi_sq;
        k += 1;
    }
    k
}

/// Per-input event counts from one experiment run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputTally {
    /// 0-based crystal/mode indices of the heralded pair.
    pub i: usize,
    pub j: usize,
    pub heralds: u64,
    /// One photon in each detector group.
    pub coincidence_ab: u64,
    /// Both photons in group A (separate or same detector).
    pub bunched_a: u64,
    /// Both photons in group B.
    pub bunched_b: u64,
}

/// Reproducible record of a Monte Carlo experiment: the configuration plus
/// per-input outcome tallies. Identical for identical `(seed, workers)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub seed: u64,
    pub workers: usize,
    pub params: SourceParams,
    pub theta: f64,
    pub trials: u64,
    pub herald_successes: u64,
    pub per_input: Vec<InputTally>,
}

impl ExperimentRecord {
    /// Summed `(coincidence_ab, bunched_a, bunched_b)` over all inputs.
    pub fn totals(&self) -> (u64, u64, u64) {
        self.per_input.iter().fold((0, 0, 0), |acc, t| {
            (
                acc.0 + t.coincidence_ab,
                acc.1 + t.bunched_a,
                acc.2 + t.bunched_b,
            )
        })
    }

    pub fn empirical_herald_rate(&self) -> f64 {
        self.herald_successes as f64 / self.trials as f64
    }

    pub fn empirical_coincidence(&self) -> f64 {
        self.totals().0 as f64 / self.herald_successes as f64
    }
}

#[derive(Clone, Copy, Default)]
struct TallyCore {
    heralds: u64,
    ab: u64,
    a2: u64,
    b2: u64,
}

/// Runs `trials` pump pulses through the source and network with a single
/// RNG stream. See [`run_experiment_with_workers`] for the partitioned form.
pub fn run_experiment(
    g: &Generator,
    theta: f64,
    params: &SourceParams,
    trials: u64,
    seed: u64,
) -> Result<ExperimentRecord> {
    run_experiment_with_workers(g, theta, params, trials, seed, 1)
}

/// Runs the experiment with trials partitioned across `workers` independent
/// RNG streams derived from `(seed, worker index)`. The record is a pure
/// function of `(seed, workers)` and every other argument; per-worker tallies
/// merge by summation.
pub fn run_experiment_with_workers(
    g: &Generator,
    theta: f64,
    params: &SourceParams,
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<ExperimentRecord> {
    if params.n != g.m() {
        return Err(Error::DimensionMismatch {
            reason: format!(
                "source has {} crystals but the network has {} modes",
                params.n,
                g.m()
            ),
        });
    }
    if trials < 1 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    if workers < 1 {
        return Err(Error::InvalidArgument("workers must be >= 1".into()));
    }

    let m = g.m();
    let inputs = InputPair::all(m);
    let net = build_network(g, theta);
    let table = GroupingTable::build(g)?;
    let dists = inputs
        .iter()
        .map(|&input| TwoPhotonDistribution::compute(&net, input))
        .collect::<Result<Vec<_>>>()?;

    let run_worker = |worker: usize, chunk: u64| -> Vec<TallyCore> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(worker as u64);
        let mut tallies = vec![TallyCore::default(); inputs.len()];
        for _ in 0..chunk {
            let Some(input) = sample_input(params, &mut rng) else {
                continue;
            };
            let idx = pair_index(m, input);
            let out = dists[idx].sample(&mut rng);
            let grouping = table.get(input);
            let tally = &mut tallies[idx];
            tally.heralds += 1;
            match (grouping.group_of(out.a()), grouping.group_of(out.b())) {
                (Group::A, Group::A) => tally.a2 += 1,
                (Group::B, Group::B) => tally.b2 += 1,
                _ => tally.ab += 1,
            }
        }
        tallies
    };

    let base = trials / workers as u64;
    let rem = trials % workers as u64;
    let chunk_of = |w: usize| base + u64::from((w as u64) < rem);

    let mut merged = vec![TallyCore::default(); inputs.len()];
    if workers == 1 {
        merged = run_worker(0, trials);
    } else {
        let partials = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| scope.spawn(move || run_worker(w, chunk_of(w))))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("experiment worker panicked"))
                .collect::<Vec<_>>()
        });
        for partial in partials {
            for (acc, t) in merged.iter_mut().zip(partial) {
                acc.heralds += t.heralds;
                acc.ab += t.ab;
                acc.a2 += t.a2;
                acc.b2 += t.b2;
            }
        }
    }

    let per_input: Vec<InputTally> = inputs
        .iter()
        .zip(&merged)
        .map(|(input, t)| InputTally {
            i: input.i(),
            j: input.j(),
            heralds: t.heralds,
            coincidence_ab: t.ab,
            bunched_a: t.a2,
            bunched_b: t.b2,
        })
        .collect();
    let herald_successes = per_input.iter().map(|t| t.heralds).sum();

    Ok(ExperimentRecord {
        seed,
        workers,
        params: *params,
        theta,
        trials,
        herald_successes,
        per_input,
    })
}

fn pair_index(m: usize, input: InputPair) -> usize {
    let (i, j) = (input.i(), input.j());
    i * m - i * (i + 1) / 2 + (j - i - 1)
}
