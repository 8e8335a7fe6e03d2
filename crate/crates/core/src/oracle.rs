//! Closed-form solutions and convergence envelopes for the noise-free
//! attitude-error dynamics.
//!
//! With perfect measurements the estimation error `R_err = R Rhat^T` of the
//! constant-gain filter obeys a linear ODE in Rodrigues coordinates:
//! `Z(R_err(t)) = exp(-Abar t) Z(R_err(0))`. That gives an explicit error
//! trajectory, an explicit formula for its distance to the identity, and
//! two-sided envelopes for all three gain families. These closed forms are
//! the ground truth the simulation output is checked against; the group-exact
//! reference integrator at the bottom of the module is the independent path
//! used to cross-check the closed forms themselves.

use crate::error::{Error, Result};
use crate::filters::{innovation, FilterConfig};
use crate::so3::{psi, RotationMatrix, SymMatrix3, NEAR_PI_TOL};

/// Lower and upper bounds on the error distance `|R_err(t)|_I` at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundEnvelope {
    pub t: f64,
    pub lower: f64,
    pub upper: f64,
}

impl BoundEnvelope {
    fn new(t: f64, lower: f64, upper: f64) -> Self {
        debug_assert!(
            (0.0..=1.0 + 1e-12).contains(&lower) && lower <= upper + 1e-15 && upper <= 1.0 + 1e-12,
            "envelope out of order: lower {lower}, upper {upper}"
        );
        Self { t, lower, upper }
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if !(value > 0.0) {
        return Err(Error::InvalidParameter {
            name,
            value,
            constraint: "must be positive",
        });
    }
    Ok(())
}

fn check_rates(lambda_min: f64, lambda_max: f64) -> Result<()> {
    check_positive("lambda_min", lambda_min)?;
    if !(lambda_max >= lambda_min) {
        return Err(Error::InvalidParameter {
            name: "lambda_max",
            value: lambda_max,
            constraint: "lambda_max >= lambda_min",
        });
    }
    Ok(())
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "t",
            value: t,
            constraint: "t >= 0",
        });
    }
    Ok(())
}

fn check_initial_distance(d0: f64) -> Result<()> {
    if !(0.0..1.0).contains(&d0) {
        return Err(Error::InvalidParameter {
            name: "d0",
            value: d0,
            constraint: "0 <= d0 < 1",
        });
    }
    Ok(())
}

/// Exact error trajectory of the constant-gain filter:
/// the rotation whose Rodrigues vector is `exp(-Abar t) Z(R_err(0))`.
///
/// `r0` must stay clear of half-turns (where the Rodrigues chart fails) and
/// `abar` positive definite for the trajectory to decay.
pub fn explicit_error(r0: &RotationMatrix, abar: &SymMatrix3, t: f64) -> Result<RotationMatrix> {
    let z0 = r0.rodrigues()?;
    Ok(RotationMatrix::cayley((-*abar).exp_scaled(t) * z0))
}

/// Distance to the identity of [`explicit_error`] without building the
/// rotation:
/// `d(t)^2 = q(t) / (4 (1 - d0^2)^2 + q(t))` with
/// `q(t) = psi_0^T exp(-2 Abar t) psi_0`.
pub fn explicit_distance(r0: &RotationMatrix, abar: &SymMatrix3, t: f64) -> Result<f64> {
    let d0_sq = r0.dist_identity_sq();
    if d0_sq.sqrt() > 1.0 - NEAR_PI_TOL {
        return Err(Error::NearHalfTurn {
            dist_identity: d0_sq.sqrt(),
        });
    }
    let psi0 = psi(r0.matrix());
    let q = psi0.dot(&((-*abar).exp_scaled(2.0 * t) * psi0));
    let denom = 4.0 * (1.0 - d0_sq) * (1.0 - d0_sq) + q;
    Ok((q / denom).sqrt())
}

fn filter1_beta(s: f64, rate: f64, t: f64) -> f64 {
    let decay = (-rate * t).exp();
    s * decay / (1.0 - s * s * (1.0 - decay * decay)).sqrt()
}

/// Two-sided envelope for the constant-gain filter:
/// `upper = beta(d0, lambda_min, t)` and `lower = beta(d0, lambda_max, t)`
/// with `beta(s, l, t) = s e^{-l t} / sqrt(1 - s^2 (1 - e^{-2 l t}))`.
pub fn filter1_envelope(
    d0: f64,
    lambda_min: f64,
    lambda_max: f64,
    t: f64,
) -> Result<BoundEnvelope> {
    check_initial_distance(d0)?;
    check_rates(lambda_min, lambda_max)?;
    check_time(t)?;
    Ok(BoundEnvelope::new(
        t,
        filter1_beta(d0, lambda_max, t),
        filter1_beta(d0, lambda_min, t),
    ))
}

/// Lower bound on the time the constant-gain filter needs to bring the error
/// distance from `d0` into the ball of radius `b`:
/// `(1/lambda_max) ln(d0 sqrt(1 - b^2) / (b sqrt(1 - d0^2)))`.
///
/// Returns zero when already inside the ball; grows without bound as
/// `d0 -> 1`, which is exactly the slow-convergence regime of the constant
/// gain.
pub fn convergence_time_lower(d0: f64, b: f64, lambda_max: f64) -> Result<f64> {
    check_initial_distance(d0)?;
    check_positive("lambda_max", lambda_max)?;
    if !(0.0 < b && b < 1.0) {
        return Err(Error::InvalidParameter {
            name: "b",
            value: b,
            constraint: "0 < b < 1",
        });
    }
    if b >= d0 {
        return Ok(0.0);
    }
    Ok((d0 * (1.0 - b * b).sqrt() / (b * (1.0 - d0 * d0).sqrt())).ln() / lambda_max)
}

/// `s / (cosh(x) + sqrt(1-s^2) sinh(x))` at `x = rate * t`, computed with
/// the growing exponential factored out so large arguments cannot overflow.
fn filter2_beta(s: f64, rate: f64, t: f64) -> f64 {
    let c = (1.0 - s * s).sqrt();
    let em = (-rate * t).exp();
    2.0 * s * em / ((1.0 + c) + (1.0 - c) * em * em)
}

fn check_gamma(gamma: f64, limit: f64, constraint: &'static str) -> Result<()> {
    if !(gamma > 0.0 && gamma < limit) {
        return Err(Error::InvalidParameter {
            name: "gamma",
            value: gamma,
            constraint,
        });
    }
    Ok(())
}

fn check_basin(d0: f64, xi0: f64, constraint: &'static str) -> Result<()> {
    if !(d0 * d0 < xi0) {
        return Err(Error::InvalidParameter {
            name: "d0",
            value: d0,
            constraint,
        });
    }
    Ok(())
}

/// Envelope for the square-root-gain filter on its admissible basin:
/// requires `0 < gamma < (1 + eps)^{-1/2}` and
/// `d0^2 < 1 - gamma^2 eps / (1 - gamma^2)`. The upper bound decays at rate
/// `gamma lambda_min` through `cosh/sinh`, the lower at `lambda_max`.
pub fn filter2_envelope(
    d0: f64,
    lambda_min: f64,
    lambda_max: f64,
    gamma: f64,
    epsilon: f64,
    t: f64,
) -> Result<BoundEnvelope> {
    check_initial_distance(d0)?;
    check_rates(lambda_min, lambda_max)?;
    check_positive("epsilon", epsilon)?;
    check_time(t)?;
    check_gamma(
        gamma,
        1.0 / (1.0 + epsilon).sqrt(),
        "0 < gamma < (1 + epsilon)^(-1/2)",
    )?;
    let xi0 = 1.0 - gamma * gamma * epsilon / (1.0 - gamma * gamma);
    check_basin(d0, xi0, "d0^2 < 1 - gamma^2 epsilon / (1 - gamma^2)")?;
    Ok(BoundEnvelope::new(
        t,
        filter2_beta(d0, lambda_max, t),
        filter2_beta(d0, gamma * lambda_min, t),
    ))
}

/// Envelope for the reciprocal-gain filter on its admissible basin:
/// requires `0 < gamma < (1 + eps)^{-1}` and
/// `d0^2 < 1 - gamma eps / (1 - gamma)`. Pure exponentials on both sides.
pub fn filter3_envelope(
    d0: f64,
    lambda_min: f64,
    lambda_max: f64,
    gamma: f64,
    epsilon: f64,
    t: f64,
) -> Result<BoundEnvelope> {
    check_initial_distance(d0)?;
    check_rates(lambda_min, lambda_max)?;
    check_positive("epsilon", epsilon)?;
    check_time(t)?;
    check_gamma(gamma, 1.0 / (1.0 + epsilon), "0 < gamma < (1 + epsilon)^(-1)")?;
    let xi0 = 1.0 - gamma * epsilon / (1.0 - gamma);
    check_basin(d0, xi0, "d0^2 < 1 - gamma epsilon / (1 - gamma)")?;
    Ok(BoundEnvelope::new(
        t,
        d0 * (-lambda_max * t).exp(),
        d0 * (-gamma * lambda_min * t).exp(),
    ))
}

/// Group integration of the noise-free error dynamics
/// `R_err' = R_err [sigma(R_err)]x`, sampled every `stride` steps (the
/// initial state is always included).
///
/// This integrator is deliberately independent of the closed forms above: it
/// only evaluates the innovation law. Each step advances by a single
/// exponential of a fourth-order Munthe-Kaas update, so the trajectory stays
/// on SO(3) exactly while the step error is O(dt^4) — a plain frozen-rate
/// exponential step is first-order in the innovation variation, which is not
/// accurate enough at dt = 1e-4 to referee closed forms at the 1e-6 level.
pub fn reference_error_trajectory(
    cfg: &FilterConfig,
    r0: &RotationMatrix,
    dt: f64,
    steps: usize,
    stride: usize,
) -> Vec<(f64, RotationMatrix)> {
    assert!(dt > 0.0 && stride > 0);
    let identity = RotationMatrix::identity();
    // Body-frame rate pulled back through the exponential chart:
    // u' = dexpinv(-u, sigma(R exp([u]x))), expanded to the two commutator
    // terms (the cubic Bernoulli term vanishes), which keeps the truncation
    // below the fourth-order step error for |u| ~ |sigma| dt.
    let pulled_back_rate = |r: &RotationMatrix, u: &crate::so3::Vec3| {
        let sigma = innovation(cfg, &(*r * RotationMatrix::exp(*u)), &identity);
        sigma + 0.5 * u.cross(&sigma) + u.cross(&u.cross(&sigma)) / 12.0
    };
    let mut r = *r0;
    let mut out = Vec::with_capacity(steps / stride + 1);
    out.push((0.0, r));
    let zero = crate::so3::Vec3::zeros();
    for k in 1..=steps {
        let k1 = pulled_back_rate(&r, &zero);
        let k2 = pulled_back_rate(&r, &(0.5 * dt * k1));
        let k3 = pulled_back_rate(&r, &(0.5 * dt * k2));
        let k4 = pulled_back_rate(&r, &(dt * k3));
        let u = dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        r = r * RotationMatrix::exp(u);
        if k % stride == 0 {
            out.push((k as f64 * dt, r));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::FilterKind;
    use crate::so3::Vec3;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn e1() -> Vec3 {
        Vec3::new(1.0, 0.0, 0.0)
    }
    fn e3() -> Vec3 {
        Vec3::new(0.0, 0.0, 1.0)
    }

    #[test]
    fn explicit_error_at_zero_time_is_initial_error() {
        let r0 = RotationMatrix::from_angle_axis(1.2, Vec3::new(2.0, -1.0, 2.0) / 3.0).unwrap();
        let abar = SymMatrix3::from_diagonal(2.5, 2.0, 1.5);
        let r = explicit_error(&r0, &abar, 0.0).unwrap();
        assert_relative_eq!(*r.matrix(), *r0.matrix(), epsilon = 1e-12);
    }

    #[test]
    fn explicit_error_rejects_half_turn_initial_error() {
        let r0 = RotationMatrix::from_angle_axis(PI, e1()).unwrap();
        assert!(explicit_error(&r0, &SymMatrix3::identity(), 1.0).is_err());
    }

    #[test]
    fn quarter_turn_with_identity_gain_has_known_distance_profile() {
        // d(t)^2 = e^{-2t} / (1 + e^{-2t}); at t = ln(3)/2 this is 1/4.
        let r0 = RotationMatrix::from_angle_axis(PI / 2.0, e3()).unwrap();
        let abar = SymMatrix3::identity();
        let t = 3.0f64.ln() / 2.0;
        assert_relative_eq!(
            explicit_distance(&r0, &abar, t).unwrap(),
            0.5,
            epsilon = 1e-14
        );
        let d = explicit_error(&r0, &abar, t).unwrap().dist_identity();
        assert_relative_eq!(d, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn eigendirection_initial_errors_stay_on_their_ray() {
        let abar = SymMatrix3::from_diagonal(2.5, 2.0, 1.5);
        let r0 = RotationMatrix::from_angle_axis(0.9, e1()).unwrap();
        let z0 = r0.rodrigues().unwrap();
        for t in [0.3, 1.0, 2.7] {
            let z = explicit_error(&r0, &abar, t).unwrap().rodrigues().unwrap();
            let cross = z.cross(&z0).norm();
            assert!(cross < 1e-12, "trajectory left the eigendirection: {cross:e}");
        }
    }

    #[test]
    fn explicit_distance_matches_explicit_error() {
        let r0 = RotationMatrix::from_angle_axis(PI / 2.0, e3()).unwrap();
        let abar = SymMatrix3::from_diagonal(2.5, 2.0, 1.5);
        for t in [0.0, 0.4, 1.0, 3.0] {
            assert_relative_eq!(
                explicit_distance(&r0, &abar, t).unwrap(),
                explicit_error(&r0, &abar, t).unwrap().dist_identity(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn explicit_distance_decays_to_zero() {
        let r0 = RotationMatrix::from_angle_axis(2.0, e1()).unwrap();
        let d = explicit_distance(&r0, &SymMatrix3::identity(), 50.0).unwrap();
        assert!(d < 1e-20, "distance after long decay: {d:e}");
    }

    #[test]
    fn explicit_distance_against_fine_integration() {
        let r0 = RotationMatrix::from_angle_axis(PI / 2.0, e3()).unwrap();
        let abar = SymMatrix3::from_diagonal(2.5, 2.0, 1.5);
        // A = tr(Abar) I - 2 Abar inverts the induced-gain map.
        let tr = abar.trace();
        let a = SymMatrix3::from_diagonal(tr - 2.0 * 2.5, tr - 2.0 * 2.0, tr - 2.0 * 1.5);
        let cfg = FilterConfig::new(FilterKind::I, a, 0.0).unwrap();
        let dt = 1e-4;
        let steps = 10_000;
        let traj = reference_error_trajectory(&cfg, &r0, dt, steps, steps);
        let (t_end, r_end) = traj.last().unwrap();
        assert_relative_eq!(*t_end, 1.0, epsilon = 1e-12);
        let integrated = r_end.dist_identity();
        let closed_form = explicit_distance(&r0, &abar, 1.0).unwrap();
        assert!(
            (integrated - closed_form).abs() < 1e-8,
            "closed form {closed_form} vs integrated {integrated}"
        );
    }

    #[test]
    fn filter1_envelope_basics() {
        let env = filter1_envelope(0.7, 1.5, 2.5, 0.0).unwrap();
        assert_eq!((env.lower, env.upper), (0.7, 0.7));

        // Small initial distance: upper bound is the pure exponential within
        // 0.1 percent.
        let d0 = 1e-3;
        for t in [0.1, 1.0, 4.0] {
            let env = filter1_envelope(d0, 1.5, 2.5, t).unwrap();
            let pure = d0 * (-1.5 * t).exp();
            assert!((env.upper - pure).abs() / pure < 1e-3);
        }

        // Monotone decay to zero.
        let late = filter1_envelope(0.9, 1.5, 2.5, 40.0).unwrap();
        assert!(late.upper < 1e-20 && late.lower <= late.upper);
    }

    #[test]
    fn filter1_envelope_brackets_explicit_distance() {
        let abar = SymMatrix3::from_diagonal(2.5, 2.0, 1.5);
        let mut rng = crate::rng::SimRng::new(5);
        let d0: f64 = 0.9;
        let angle = 2.0 * d0.asin();
        for _ in 0..100 {
            let r0 = RotationMatrix::from_angle_axis(angle, rng.unit_vector()).unwrap();
            for t in [0.2, 1.0, 2.5] {
                let d = explicit_distance(&r0, &abar, t).unwrap();
                let env = filter1_envelope(d0, 1.5, 2.5, t).unwrap();
                assert!(
                    env.lower - 1e-9 <= d && d <= env.upper + 1e-9,
                    "distance {d} outside [{}, {}] at t = {t}",
                    env.lower,
                    env.upper
                );
            }
        }
    }

    #[test]
    fn convergence_time_formula_value() {
        // Hand evaluation: (1/2) ln(0.9 sqrt(0.99) / (0.1 sqrt(0.19))).
        let t = convergence_time_lower(0.9, 0.1, 2.0).unwrap();
        assert_relative_eq!(t, 1.5113, epsilon = 1e-4);
        assert_eq!(convergence_time_lower(0.5, 0.5, 2.0).unwrap(), 0.0);
        assert_eq!(convergence_time_lower(0.3, 0.5, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn convergence_time_blows_up_near_half_turn() {
        let t = convergence_time_lower(1.0 - 1e-9, 0.1, 1.0).unwrap();
        assert!(t > 8.0, "bound should blow up, got {t}");
        assert!(convergence_time_lower(1.0, 0.1, 1.0).is_err());
    }

    #[test]
    fn filter2_envelope_admissibility_and_values() {
        // t = 0 returns (d0, d0).
        let env = filter2_envelope(0.8, 1.0, 2.0, 0.9, 0.01, 0.0).unwrap();
        assert_relative_eq!(env.lower, 0.8, epsilon = 1e-15);
        assert_relative_eq!(env.upper, 0.8, epsilon = 1e-15);

        // Faster than the constant-gain envelope for large initial errors.
        let sqrt_env = filter2_envelope(0.99, 1.0, 2.0, 0.9, 1e-4, 2.0).unwrap();
        let const_env = filter1_envelope(0.99, 1.0, 2.0, 2.0).unwrap();
        assert!(sqrt_env.upper < const_env.upper);

        // gamma beyond the admissible range is named in the error.
        match filter2_envelope(0.5, 1.0, 2.0, 0.999, 0.01, 1.0) {
            Err(Error::InvalidParameter { name: "gamma", .. }) => {}
            other => panic!("expected gamma admissibility error, got {other:?}"),
        }
        // d0 outside the basin.
        assert!(filter2_envelope(0.99, 1.0, 2.0, 0.9, 0.1, 1.0).is_err());
    }

    #[test]
    fn filter2_beta_is_stable_for_huge_arguments() {
        let v = filter2_beta(0.9, 1.0, 1000.0);
        assert!(v >= 0.0 && v < 1e-300);
    }

    #[test]
    fn filter3_envelope_values() {
        let env = filter3_envelope(0.9, 1.5, 2.5, 0.5, 0.01, 0.0).unwrap();
        assert_eq!((env.lower, env.upper), (0.9, 0.9));

        let env = filter3_envelope(0.9, 1.5, 2.5, 0.5, 0.01, 1.0).unwrap();
        assert_relative_eq!(env.upper, 0.9 * (-0.75f64).exp(), epsilon = 1e-15);
        assert_relative_eq!(env.lower, 0.9 * (-2.5f64).exp(), epsilon = 1e-15);

        assert!(filter3_envelope(0.9, 1.5, 2.5, 0.995, 0.01, 1.0).is_err());
    }

    #[test]
    fn square_root_gain_upper_bound_decays_exponentially_past_transient() {
        // The cosh/sinh envelope is eventually dominated by
        // (3^{3/4}/4) d0 e^{-rate t / 2}; the cap only takes over once
        // rate * t passes a transient knee (about 1.8 for d0 = 0.9, earlier
        // for smaller d0), so the check starts past it.
        let constant = 3.0f64.powf(0.75) / 4.0;
        for (gamma, lambda_min) in [(0.9, 1.5), (0.7, 2.0), (0.95, 3.0)] {
            let rate: f64 = gamma * lambda_min;
            for d0 in [0.3, 0.9] {
                let mut t = (2.0 / rate).max(1.0);
                while t < 30.0 {
                    let env = filter2_envelope(d0, lambda_min, lambda_min, gamma, 1e-4, t).unwrap();
                    let cap = constant * d0 * (-rate * t / 2.0).exp();
                    assert!(
                        env.upper <= cap,
                        "upper {:.3e} above exponential cap {cap:.3e} at t = {t}",
                        env.upper
                    );
                    t += 0.5;
                }
            }
        }
    }

    #[test]
    fn rodrigues_vector_of_explicit_error_is_linear_in_time() {
        let abar = SymMatrix3::new(2.0, 1.5, 1.0, 0.2, -0.1, 0.3);
        let r0 = RotationMatrix::from_angle_axis(1.9, Vec3::new(1.0, 2.0, -2.0) / 3.0).unwrap();
        let z0 = r0.rodrigues().unwrap();
        for t in [0.0, 0.5, 1.7] {
            let z = explicit_error(&r0, &abar, t).unwrap().rodrigues().unwrap();
            let expected = (-abar).exp_scaled(t) * z0;
            assert_relative_eq!(z, expected, epsilon = 1e-10);
        }
    }

    #[test]
    fn decay_is_faster_along_larger_gain_eigenvalues() {
        let abar = SymMatrix3::from_diagonal(2.5, 2.0, 1.5);
        let angle = 2.4;
        let fast = RotationMatrix::from_angle_axis(angle, e1()).unwrap();
        let slow = RotationMatrix::from_angle_axis(angle, e3()).unwrap();
        let mut t = 0.05;
        while t <= 6.0 {
            let df = explicit_distance(&fast, &abar, t).unwrap();
            let ds = explicit_distance(&slow, &abar, t).unwrap();
            assert!(df < ds, "at t = {t}: fast-axis {df} !< slow-axis {ds}");
            t += 0.05;
        }
    }

    #[test]
    fn state_dependent_envelopes_sit_below_constant_gain_after_transient() {
        // Shared lambda_min, large initial error. The ordering
        // III <= II <= I holds from t* on; t* stays below 1 s for these
        // parameters, and the window ends before the asymptotic rate
        // crossover (the state-dependent upper bounds decay at gamma *
        // lambda_min, the constant-gain one at lambda_min).
        let (d0, gamma, epsilon) = (0.9, 0.9, 0.01);
        let (lambda_min, lambda_max) = (1.0, 2.0);
        let mut t_star = None;
        let dt = 0.01;
        let mut t = dt;
        while t <= 3.0 {
            let env1 = filter1_envelope(d0, lambda_min, lambda_max, t).unwrap();
            let env2 = filter2_envelope(d0, lambda_min, lambda_max, gamma, epsilon, t).unwrap();
            let env3 = filter3_envelope(d0, lambda_min, lambda_max, gamma, epsilon, t).unwrap();
            let ordered = env3.upper <= env2.upper && env2.upper <= env1.upper;
            match (ordered, t_star) {
                (true, None) => t_star = Some(t),
                (false, Some(_)) => panic!("ordering broke at t = {t}"),
                _ => {}
            }
            t += dt;
        }
        let t_star = t_star.expect("ordering never held");
        assert!(t_star <= 1.0, "t* = {t_star}");
    }
}
