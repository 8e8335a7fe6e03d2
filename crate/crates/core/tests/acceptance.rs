//! Acceptance gate: every release-blocking claim, one test per criterion,
//! each printing a pass line with the observed residual next to its pinned
//! threshold. Run with `cargo test -p so3-attitude --test acceptance --
//! --nocapture` to see the lines.

use std::time::Instant;

use so3_attitude::filters::FilterKind;
use so3_attitude::sim::{simulate, ExperimentConfig};
use so3_attitude::verify::{run, Check, Suite, SuiteReport};

const SEED: u64 = 7;

fn check<'r>(report: &'r SuiteReport, name: &str) -> &'r Check {
    report
        .checks
        .iter()
        .find(|c| c.name == name)
        .unwrap_or_else(|| panic!("suite {} has no check named {name}", report.suite))
}

fn assert_check(criterion: &str, c: &Check, threshold: f64) {
    assert_eq!(
        c.threshold, threshold,
        "{criterion}: threshold drifted from the pinned value"
    );
    assert!(
        c.residual <= c.threshold,
        "{criterion}: residual {:e} exceeds {:e}",
        c.residual,
        c.threshold
    );
    println!(
        "acceptance {criterion}: PASS ({} samples, residual {:e} <= {:e})",
        c.samples, c.residual, c.threshold
    );
}

#[test]
fn criterion_01_psi_and_trace_identities() {
    let t0 = Instant::now();
    let report = run(Suite::Lemma1, SEED, None);
    let elapsed = t0.elapsed();
    for name in [
        "psi_norm_identity",
        "weighted_trace_sandwich",
        "weighted_psi_sandwich",
        "psi_rodrigues_form",
    ] {
        let c = check(&report, name);
        assert!(c.samples >= 924, "{name}: want ~1000 samples, got {}", c.samples);
        assert_check(&format!("1 ({name})"), c, 1e-10);
    }
    assert!(
        elapsed.as_secs_f64() < 1.0,
        "identity suite took {elapsed:?}, budget 1 s"
    );
}

#[test]
fn criterion_02_closed_form_matches_reference_integration() {
    let t0 = Instant::now();
    let report = run(Suite::Oracle, SEED, None);
    let elapsed = t0.elapsed();
    assert_check(
        "2 (closed form vs dt=1e-4 integration)",
        check(&report, "closed_form_vs_integration"),
        1e-6,
    );
    assert!(
        elapsed.as_secs_f64() < 30.0,
        "oracle sweep took {elapsed:?}, budget 30 s"
    );
}

#[test]
fn criterion_03_distance_formula_consistency() {
    let report = run(Suite::Oracle, SEED, None);
    assert_check(
        "3 (explicit distance vs explicit error)",
        check(&report, "distance_formula_consistency"),
        1e-12,
    );
}

#[test]
fn criterion_04_envelopes_bracket_trajectories() {
    let report = run(Suite::Oracle, SEED, None);
    let c = check(&report, "envelope_bracketing");
    // 50 admissible configs per filter, every integration step checked.
    assert!(c.samples >= 3 * 50 * 30_000, "samples: {}", c.samples);
    assert_check("4 (two-sided envelopes)", c, 1e-9);
}

#[test]
fn criterion_05_convergence_time_lower_bound() {
    let report = run(Suite::Oracle, SEED, None);
    let c = check(&report, "convergence_time_bound");
    assert_eq!(c.samples, 100, "want 100 trials");
    assert_check("5 (time-to-ball bound)", c, 0.0);
}

#[test]
fn criterion_06_destabilizing_disturbance_tracks_closed_form() {
    let report = run(Suite::Prop1, SEED, None);
    assert_check(
        "6 (square-root error growth)",
        check(&report, "square_root_growth"),
        1e-4,
    );
    assert_check(
        "6 (direction invariance)",
        check(&report, "direction_invariance"),
        1e-6,
    );
}

#[test]
fn criterion_07_vector_form_matches_matrix_form() {
    let report = run(Suite::Vecmeas, SEED, None);
    let c = check(&report, "innovation_identity");
    assert!(c.samples >= 1000, "want >= 1000 pairs, got {}", c.samples);
    assert_check("7 (innovation identity)", c, 1e-12);
    assert_check("7 (distance identity)", check(&report, "distance_identity"), 1e-12);
}

#[test]
fn criterion_08_gain_forms_are_consistent() {
    let report = run(Suite::Vecmeas, SEED, None);
    assert_check(
        "8 (distance-form vs rodrigues-form gains)",
        check(&report, "gain_form_consistency"),
        1e-12,
    );
}

#[test]
fn criterion_09_discrete_integrator_exactness() {
    let report = run(Suite::Integrator, SEED, None);
    let c = check(&report, "constant_rate_exactness");
    assert_eq!(c.samples, 1_000_000, "want a million steps");
    assert_check("9 (constant-rate exactness)", c, 1e-8);
    assert_check(
        "9 (orthonormality drift)",
        check(&report, "orthonormality_drift"),
        1e-9,
    );
}

#[test]
fn criterion_10_iss_bounds_and_lyapunov_decrease() {
    let report = run(Suite::Iss, SEED, None);
    assert_check(
        "10 (admissible-bound ordering)",
        check(&report, "disturbance_bound_ordering"),
        0.0,
    );
    let c = check(&report, "lyapunov_decrease_when_gated");
    assert!(c.samples > 1000, "gate never engaged: {} samples", c.samples);
    assert_check("10 (per-step Lyapunov decrease)", c, 0.0);
}

#[test]
fn criterion_11_attenuation_inequality() {
    let report = run(Suite::Attenuation, SEED, None);
    let c = check(&report, "noisy_runs_attenuation");
    assert_eq!(c.samples, 20, "want 20 seeded runs");
    assert_check("11 (noisy attenuation runs)", c, 0.0);
    assert_check(
        "11 (noise-free attenuation)",
        check(&report, "noise_free_attenuation"),
        0.0,
    );
    assert_check(
        "11 (noise-free right-hand side)",
        check(&report, "noise_free_rhs_value"),
        1e-12,
    );
}

#[test]
fn criterion_12_benchmark_run_crossing_order() {
    // The benchmark configuration: weighting from the rho-weighted reference
    // vectors, estimate initialized 0.1 rad short of a half-turn, epsilon
    // 1e-2, 200 Hz sensors with 0.1-std noise on both channels, fixed seed.
    let t0 = Instant::now();
    let cfg = ExperimentConfig::reference();
    let record = simulate(&cfg).expect("benchmark run");
    let elapsed = t0.elapsed();

    let crossing = |kind: FilterKind| {
        record
            .crossing_time(kind, 0.1)
            .unwrap_or_else(|| panic!("filter {kind} never reached 0.1"))
    };
    let (t1, t2, t3) = (
        crossing(FilterKind::I),
        crossing(FilterKind::II),
        crossing(FilterKind::III),
    );
    assert!(
        t3 < t2 && t2 < t1,
        "crossing order violated: I at {t1}, II at {t2}, III at {t3}"
    );
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "benchmark run took {elapsed:?}, budget 10 s"
    );
    println!(
        "acceptance 12 (error-correction ordering): PASS \
         (first crossing of 0.1: III at {t3:.3} s < II at {t2:.3} s < I at {t1:.3} s; \
         run took {elapsed:.2?})"
    );
}
