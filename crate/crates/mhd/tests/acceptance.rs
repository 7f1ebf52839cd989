//! End-to-end acceptance suite: every headline result the library claims,
//! executed at its stated tolerance. Each check prints one PASS/FAIL line
//! (visible with `cargo test --test acceptance -- --nocapture`).

use std::f64::consts::{FRAC_PI_3, FRAC_PI_6, FRAC_PI_8, PI};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mhd::decompose::{d4_transmissions, decompose, recompose, verify_d4_reference};
use mhd::generator::build;
use mhd::matrix::{matexp_series, permanent, Mat};
use mhd::network::{build_network, theta_dip, InputPair};
use mhd::scattershot::{run_experiment, success_d, success_l, success_l_prime, SourceParams};
use mhd::stats::{
    bunching_closed_form, bunching_probability, coincidence_closed_form, coincidence_derivative,
    coincidence_probability, grouping, outcome_probability, theta_to_phi, zero_permanent_count,
    Group, OutputOutcome,
};

const SIZES: [usize; 4] = [2, 4, 8, 16];

fn report(number: u8, name: &str, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("acceptance criterion {number:02} ({name}): {status} - {detail}");
    assert!(pass, "criterion {number:02} ({name}) failed: {detail}");
}

fn pair(i: usize, j: usize) -> InputPair {
    InputPair::new(i, j).unwrap()
}

/// Criterion 1: Every input pair of every size has a vanishing coincidence probability
/// at the dip angle, and every individual cross-group outcome vanishes too.
#[test]
fn criterion_01_hom_dip() {
    let start = Instant::now();
    let mut max_p_ab: f64 = 0.0;
    let mut max_outcome: f64 = 0.0;
    for m in SIZES {
        let g = build(m).unwrap();
        let net = build_network(&g, theta_dip(m));
        for input in InputPair::all(m) {
            let grp = grouping(&g, input).unwrap();
            max_p_ab = max_p_ab.max(coincidence_probability(&net, input, &grp).unwrap());
            for &a in &grp.modes_in(Group::A) {
                for &b in &grp.modes_in(Group::B) {
                    let p = outcome_probability(&net, input, OutputOutcome::new(a, b)).unwrap();
                    max_outcome = max_outcome.max(p);
                }
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = max_p_ab <= 1e-12 && max_outcome <= 1e-12 && elapsed < 5.0;
    report(
        1,
        "HOM dip",
        pass,
        &format!("max P(AB) {max_p_ab:.3e}, max outcome {max_outcome:.3e}, {elapsed:.2} s"),
    );
}

/// Criterion 2: The identity point: 100% coincidence for every input at theta = 0.
#[test]
fn criterion_02_identity_point() {
    let start = Instant::now();
    let mut max_dev: f64 = 0.0;
    for m in SIZES {
        let g = build(m).unwrap();
        let net = build_network(&g, 0.0);
        for input in InputPair::all(m) {
            let grp = grouping(&g, input).unwrap();
            let p = coincidence_probability(&net, input, &grp).unwrap();
            max_dev = max_dev.max((p - 1.0).abs());
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = max_dev <= 1e-12 && elapsed < 1.0;
    report(
        2,
        "identity critical point",
        pass,
        &format!("max |P(AB) - 1| {max_dev:.3e}, {elapsed:.2} s"),
    );
}

/// Criterion 3: Brute-force permanent sums agree with both closed forms on a 101-point
/// grid for every input, and the two bunching groups are equal halves of the
/// coincidence complement.
#[test]
fn criterion_03_closed_form_equivalence() {
    let start = Instant::now();
    let mut max_ab_dev: f64 = 0.0;
    let mut max_a2_dev: f64 = 0.0;
    let mut max_split_dev: f64 = 0.0;
    for m in SIZES {
        let g = build(m).unwrap();
        let dip = theta_dip(m);
        let inputs = InputPair::all(m);
        let groupings: Vec<_> = inputs.iter().map(|&p| grouping(&g, p).unwrap()).collect();
        for k in 0..=100 {
            let theta = dip * k as f64 / 100.0;
            let net = build_network(&g, theta);
            let ab_closed = coincidence_closed_form(m, theta);
            let a2_closed = bunching_closed_form(m, theta);
            for (&input, grp) in inputs.iter().zip(&groupings) {
                let ab = coincidence_probability(&net, input, grp).unwrap();
                let a2 = bunching_probability(&net, input, grp, Group::A).unwrap();
                let b2 = bunching_probability(&net, input, grp, Group::B).unwrap();
                max_ab_dev = max_ab_dev.max((ab - ab_closed).abs());
                max_a2_dev = max_a2_dev.max((a2 - a2_closed).abs());
                max_split_dev = max_split_dev
                    .max((a2 - (1.0 - ab) / 2.0).abs())
                    .max((b2 - (1.0 - ab) / 2.0).abs());
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass =
        max_ab_dev <= 1e-12 && max_a2_dev <= 1e-12 && max_split_dev <= 1e-12 && elapsed < 30.0;
    report(
        3,
        "closed-form equivalence",
        pass,
        &format!(
            "max dev: P(AB) {max_ab_dev:.3e}, P(A^2) {max_a2_dev:.3e}, \
             split {max_split_dev:.3e}, {elapsed:.2} s"
        ),
    );
}

/// Criterion 4: The worked four-mode example: the dip matrix, the detector grouping,
/// the four vanishing permanents, and the known mid-window probabilities.
#[test]
fn criterion_04_worked_examples() {
    let g = build(4).unwrap();
    let net = build_network(&g, theta_dip(4));
    let want = Mat::from_rows(&[
        vec![0.5, 0.5, 0.5, 0.5],
        vec![-0.5, 0.5, -0.5, 0.5],
        vec![-0.5, 0.5, 0.5, -0.5],
        vec![-0.5, -0.5, 0.5, 0.5],
    ])
    .unwrap();
    let matrix_dev = net.matrix().max_abs_diff(&want);

    // Input (2,3) in 1-based labels is (1,2) here.
    let input = pair(1, 2);
    let grp = grouping(&g, input).unwrap();
    let labels_ok = grp.labels() == [Group::A, Group::B, Group::A, Group::B];

    let mut max_perm: f64 = 0.0;
    for rows in [(0, 1), (0, 3), (1, 2), (2, 3)] {
        let sub = net.submatrix(rows, (1, 2)).unwrap();
        max_perm = max_perm.max(permanent(&sub).unwrap().abs());
    }

    let mid = build_network(&g, FRAC_PI_6);
    let p_ab = coincidence_probability(&mid, input, &grp).unwrap();
    let phi = theta_to_phi(4, FRAC_PI_6).unwrap();

    let pass = matrix_dev <= 1e-15
        && labels_ok
        && max_perm <= 1e-15
        && (p_ab - 0.5).abs() <= 1e-12
        && (phi - FRAC_PI_8).abs() <= 1e-9;
    report(
        4,
        "worked four-mode golds",
        pass,
        &format!(
            "matrix dev {matrix_dev:.3e}, grouping {labels_ok}, max permanent {max_perm:.3e}, \
             P(AB|pi/6) = {p_ab:.15}, phi = {phi:.15}"
        ),
    );
}

/// Criterion 5: The coincidence profile decreases strictly between the critical points
/// and its analytic derivative matches central finite differences.
#[test]
fn criterion_05_monotonicity() {
    let mut worst: f64 = f64::MIN;
    let mut max_fd_dev: f64 = 0.0;
    let h = 1e-6;
    for m in SIZES {
        let dip = theta_dip(m);
        for k in 1..=50 {
            let theta = dip * k as f64 / 51.0;
            let d = coincidence_derivative(m, theta);
            worst = worst.max(d);
            let fd = (coincidence_closed_form(m, theta + h)
                - coincidence_closed_form(m, theta - h))
                / (2.0 * h);
            max_fd_dev = max_fd_dev.max((d - fd).abs());
        }
    }
    let pass = worst < 0.0 && max_fd_dev <= 1e-6;
    report(
        5,
        "monotone decrease",
        pass,
        &format!("max interior derivative {worst:.3e}, max |analytic - fd| {max_fd_dev:.3e}"),
    );
}

/// Criterion 6: Large-m limit: the coincidence profile at m = 4096 against cos^2.
///
/// The stated 2e-3 bound is not attainable: the profile converges to
/// cos^2(theta) at rate Theta(1/sqrt(m)) through the cross term
/// 2 cos(t) sin^3(t) (m-2)/(m-1)^(3/2), which peaks near 1.0e-2 at
/// theta = pi/3 for m = 4096. A 2e-3 bound would need m of roughly 1e5.
/// The check is implemented as stated and left to fail honestly.
#[test]
fn criterion_06_large_m_limit() {
    let m = 4096usize;
    let dip = theta_dip(m);
    let mut max_dev: f64 = 0.0;
    let mut at = 0.0;
    for k in 0..=1000 {
        let theta = dip * k as f64 / 1000.0;
        let dev = (coincidence_closed_form(m, theta) - theta.cos().powi(2)).abs();
        if dev > max_dev {
            max_dev = dev;
            at = theta;
        }
    }
    let pass = max_dev <= 2e-3;
    report(
        6,
        "large-m limit",
        pass,
        &format!(
            "max |P_4096 - cos^2| = {max_dev:.3e} at theta = {at:.4} (bound 2e-3; \
             the deviation scales as 1/sqrt(m), so this bound needs m of order 1e5)"
        ),
    );
}

/// Criterion 7: Exactly m^2/4 of the output-pair permanents vanish at the dip, for
/// every input.
#[test]
fn criterion_07_zero_permanent_count() {
    let mut ok = true;
    for m in SIZES {
        let g = build(m).unwrap();
        for input in InputPair::all(m) {
            ok &= zero_permanent_count(&g, input).unwrap() == m * m / 4;
        }
    }
    report(
        7,
        "zero-permanent count",
        ok,
        "m^2/4 vanishing permanents for every input, m in {2, 4, 8, 16}",
    );
}

/// Criterion 8: Architecture formulas: the network-to-array ratio is exactly n - 1,
/// and the network overtakes the direct-fed array at the first integer above
/// 2/chi^2 + 1.
#[test]
fn criterion_08_resource_formulas() {
    let mut ratio_exact = true;
    for n in (2..=40usize).step_by(2) {
        for k in 1..100 {
            let chi = k as f64 / 100.0;
            let p = SourceParams::new(n, chi).unwrap();
            ratio_exact &= success_d(&p).unwrap() == success_l(&p).unwrap() * (n - 1) as f64;
        }
    }

    let mut crossover_ok = true;
    let mut details = String::new();
    for chi in [0.3f64, 0.5, 0.8] {
        let boundary = 2.0 / (chi * chi) + 1.0;
        let first_above = boundary.floor() as usize + 1;
        let mut first_positive = None;
        for n in 2..=(2 * first_above) {
            let p = SourceParams::new(n, chi).unwrap();
            let gap = success_d(&p).unwrap() - success_l_prime(&p);
            if gap > 0.0 && first_positive.is_none() {
                first_positive = Some(n);
            }
            if (n as f64) < boundary {
                crossover_ok &= gap < 0.0;
            }
        }
        crossover_ok &= first_positive == Some(first_above);
        details.push_str(&format!("chi {chi}: flip at {first_positive:?}; "));
    }

    let pass = ratio_exact && crossover_ok;
    report(
        8,
        "resource formulas",
        pass,
        &format!("ratio D = (n-1) L exact: {ratio_exact}; {details}"),
    );
}

/// Criterion 9: Seeded Monte Carlo: herald rate and coincidence fraction inside their
/// 3-sigma binomial bands, and no cross-group counts at the dip.
#[test]
fn criterion_09_monte_carlo() {
    let start = Instant::now();
    let g = build(4).unwrap();
    let params = SourceParams::new(4, 0.3).unwrap();

    let record = run_experiment(&g, FRAC_PI_6, &params, 1_000_000, 42).unwrap();
    let herald_want = success_d(&params).unwrap();
    let herald_sigma = (herald_want * (1.0 - herald_want) / record.trials as f64).sqrt();
    let herald_got = record.empirical_herald_rate();
    let herald_ok = (herald_got - herald_want).abs() <= 3.0 * herald_sigma;

    let p_ab_got = record.empirical_coincidence();
    let p_ab_sigma = (0.25 / record.herald_successes as f64).sqrt();
    let p_ab_ok = (p_ab_got - 0.5).abs() <= 3.0 * p_ab_sigma;

    let dip_record = run_experiment(&g, theta_dip(4), &params, 3_500_000, 42).unwrap();
    let heralds = dip_record.herald_successes;
    let cross = dip_record.totals().0;
    let dip_ok = heralds >= 100_000 && cross == 0;

    let elapsed = start.elapsed().as_secs_f64();
    let pass = herald_ok && p_ab_ok && dip_ok && elapsed < 60.0;
    report(
        9,
        "Monte Carlo",
        pass,
        &format!(
            "herald rate {herald_got:.6} vs {herald_want:.6} (3s {:.6}), \
             P(AB) {p_ab_got:.4} vs 0.5 (3s {:.4}), \
             dip: {cross} cross counts in {heralds} heralds, {elapsed:.1} s",
            3.0 * herald_sigma,
            3.0 * p_ab_sigma
        ),
    );
}

/// Criterion 10: Decomposition: recompose is the identity of decompose, step counts
/// stay within the two-level bound, and the pinned four-mode circuit built
/// from the reference transmissions reproduces the network.
#[test]
fn criterion_10_decomposition() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut max_round_trip: f64 = 0.0;
    let mut counts_ok = true;
    for m in SIZES {
        let g = build(m).unwrap();
        for _ in 0..10 {
            let theta: f64 = rng.random_range(-PI..PI);
            let net = build_network(&g, theta);
            let plan = decompose(&net).unwrap();
            counts_ok &= plan.steps.len() <= m * (m - 1) / 2;
            let back = recompose(&plan).unwrap();
            max_round_trip = max_round_trip.max(back.max_abs_diff(net.matrix()));
        }
    }

    let mut reference_ok = true;
    for k in 0..=20 {
        reference_ok &= verify_d4_reference(FRAC_PI_3 * k as f64 / 20.0);
    }
    let [eta1, _, _] = d4_transmissions(FRAC_PI_3);
    let eta1_ok = (eta1 - 0.5).abs() <= 1e-12;

    let pass = max_round_trip <= 1e-10 && counts_ok && reference_ok && eta1_ok;
    report(
        10,
        "decomposition",
        pass,
        &format!(
            "max round-trip dev {max_round_trip:.3e}, step bound {counts_ok}, \
             pinned circuit on 21-point grid {reference_ok}, eta_1(pi/3) = {eta1:.15}"
        ),
    );
}

/// Criterion 11: The closed-form network matrix agrees with the 40-term series
/// exponential of the generator.
#[test]
fn criterion_11_oracle_agreement() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut max_dev: f64 = 0.0;
    for m in SIZES {
        let g = build(m).unwrap();
        for _ in 0..20 {
            let theta: f64 = rng.random_range(-PI..PI);
            let net = build_network(&g, theta);
            let series = matexp_series(&g.y().scaled(theta), 40);
            max_dev = max_dev.max(net.matrix().max_abs_diff(&series));
        }
    }
    let pass = max_dev <= 1e-10;
    report(
        11,
        "series-exponential oracle",
        pass,
        &format!("max |closed form - series| = {max_dev:.3e}"),
    );
}
