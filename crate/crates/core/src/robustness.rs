//! Error dynamics under measurement errors, in Rodrigues coordinates.
//!
//! On SO(3) every trajectory is bounded by the geometry, so "diverging" means
//! approaching the half-turn manifold, where the Rodrigues vector of the
//! error blows up. Working in that chart turns robustness questions into
//! ordinary input-to-state-stability questions on R^3. This module carries:
//!
//! * the forced error dynamics `Z' = -k(Z) Abar Z - g(Z) w` shared by all
//!   three filters, where `w` is the inertial-side gyro disturbance
//!   `Rhat n_omega`;
//! * an explicit vanishing disturbance that still drives the constant-gain
//!   filter's error to a half-turn — the reason the constant gain is not
//!   input-to-state stable;
//! * the admissible disturbance bounds `k_u1 < k_u2 < k_u3` and the matching
//!   ISS gain functions for the three filters;
//! * the attitude-noise model (a small extra rotation about the current
//!   error axis) and its first-order effect on the Rodrigues vector;
//! * a disturbance-attenuation check for the reciprocal-gain filter with
//!   isotropic weighting, integrating the certified inequality along a
//!   simulated noisy trajectory.

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::filters::FilterKind;
use crate::rng::SimRng;
use crate::so3::{hat, RotationMatrix, SymMatrix3, Vec3};

/// Kinematics matrix of the Rodrigues chart:
/// `d/dt Z = g(Z) xi` along `R' = R [xi]x`, with
/// `g(Z) = 1/2 (I + [Z]x + Z Z^T)`.
pub fn rodrigues_kinematics(z: &Vec3) -> Matrix3<f64> {
    0.5 * (Matrix3::identity() + hat(z) + z * z.transpose())
}

/// Right-hand side of the forced error dynamics
/// `Z' = -k(Z) Abar Z - g(Z) w`, where `w = Rhat n_omega` is the gyro
/// disturbance mapped to the inertial side.
///
/// With `w = 0` and the constant gain this reduces to the linear flow
/// `Z' = -Abar Z`.
pub fn rodrigues_error_rhs(
    kind: FilterKind,
    z: &Vec3,
    abar: &SymMatrix3,
    epsilon: f64,
    disturbance_inertial: &Vec3,
) -> Vec3 {
    let k = kind.gain_from_rodrigues(z.norm_squared(), epsilon);
    -k * (*abar * *z) - rodrigues_kinematics(z) * disturbance_inertial
}

/// Classical RK4 on the Rodrigues error ODE with a disturbance given as a
/// function of time; returns `steps + 1` samples including the initial one.
pub fn integrate_rodrigues(
    kind: FilterKind,
    abar: &SymMatrix3,
    epsilon: f64,
    z0: Vec3,
    disturbance: impl Fn(f64) -> Vec3,
    dt: f64,
    steps: usize,
) -> Vec<(f64, Vec3)> {
    assert!(dt > 0.0);
    let f = |t: f64, z: &Vec3| rodrigues_error_rhs(kind, z, abar, epsilon, &disturbance(t));
    let mut out = Vec::with_capacity(steps + 1);
    let mut z = z0;
    out.push((0.0, z));
    for k in 0..steps {
        let t = k as f64 * dt;
        let k1 = f(t, &z);
        let k2 = f(t + 0.5 * dt, &(z + 0.5 * dt * k1));
        let k3 = f(t + 0.5 * dt, &(z + 0.5 * dt * k2));
        let k4 = f(t + dt, &(z + dt * k3));
        z += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out.push(((k + 1) as f64 * dt, z));
    }
    out
}

/// A bounded gyro-disturbance signal together with its declared sup-norm.
///
/// The bound is what the input-to-state bounds of [`iss_bounds`] are stated
/// against; sampling checks it in debug builds.
pub struct GyroDisturbance {
    signal: Box<dyn FnMut(f64) -> Vec3>,
    sup_norm: f64,
}

impl GyroDisturbance {
    pub fn new(signal: impl FnMut(f64) -> Vec3 + 'static, sup_norm: f64) -> Self {
        Self {
            signal: Box::new(signal),
            sup_norm,
        }
    }

    pub fn zero() -> Self {
        Self::new(|_| Vec3::zeros(), 0.0)
    }

    pub fn constant(value: Vec3) -> Self {
        let sup_norm = value.norm();
        Self::new(move |_| value, sup_norm)
    }

    /// Seeded noise drawn uniformly from the ball of the given radius; the
    /// declared bound is tight.
    pub fn bounded_noise(radius: f64, seed: u64) -> Self {
        let mut rng = SimRng::new(seed);
        Self::new(
            move |_| radius * rng.uniform().powf(1.0 / 3.0) * rng.unit_vector(),
            radius,
        )
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// Sample the disturbance at time `t` (stochastic signals advance their
    /// stream).
    pub fn sample(&mut self, t: f64) -> Vec3 {
        let value = (self.signal)(t);
        debug_assert!(
            value.norm() <= self.sup_norm * (1.0 + 1e-12),
            "disturbance exceeded its declared bound"
        );
        value
    }
}

impl std::fmt::Debug for GyroDisturbance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GyroDisturbance")
            .field("sup_norm", &self.sup_norm)
            .finish_non_exhaustive()
    }
}

/// Attitude measurement noise: a time-varying angle offset applied about
/// the current error axis, so the measured error keeps its axis and gains
/// `n_theta` on its angle.
///
/// Meant for small offsets (well below 0.2 rad); the first-order Rodrigues
/// expansion the analysis relies on degrades beyond that.
pub struct AttitudeNoise {
    angle: Box<dyn FnMut(f64) -> f64>,
}

impl AttitudeNoise {
    pub fn new(angle: impl FnMut(f64) -> f64 + 'static) -> Self {
        Self {
            angle: Box::new(angle),
        }
    }

    pub fn constant(n_theta: f64) -> Self {
        Self::new(move |_| n_theta)
    }

    /// Contaminated attitude measurement at time `t`, falling back to a
    /// fixed axis when the error axis is undefined.
    pub fn apply(&mut self, t: f64, r_true: &RotationMatrix, r_hat: &RotationMatrix) -> RotationMatrix {
        let n_theta = (self.angle)(t);
        debug_assert!(n_theta.abs() <= 0.2, "attitude noise angle {n_theta} is not small");
        apply_attitude_noise_with_fallback(r_true, r_hat, n_theta)
    }
}

impl std::fmt::Debug for AttitudeNoise {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AttitudeNoise").finish_non_exhaustive()
    }
}

/// A bounded, vanishing gyro disturbance that keeps the constant-gain
/// filter's error from converging.
///
/// Built from a unit Rodrigues error aligned with an eigenvector of `Abar`:
/// the inertial-side signal `-2 lambda Z0 (2 lambda t + 1)^{-1/2}` holds the
/// error direction fixed while its norm grows like `sqrt(2 lambda t + 1)`,
/// so the error walks out to the half-turn manifold under a disturbance that
/// decays to zero.
#[derive(Debug, Clone, Copy)]
pub struct DestabilizingDisturbance {
    direction: Vec3,
    rate: f64,
}

impl DestabilizingDisturbance {
    /// `z0` must be a unit eigenvector of `abar` (within 1e-9); the
    /// associated eigenvalue sets the growth rate.
    pub fn new(z0: Vec3, abar: &SymMatrix3) -> Result<Self> {
        let norm = z0.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::NonUnitAxis { norm });
        }
        let rate = z0.dot(&(*abar * z0));
        let residual = (*abar * z0 - rate * z0).norm();
        if residual > 1e-9 {
            return Err(Error::InvalidParameter {
                name: "z0",
                value: residual,
                constraint: "must be an eigenvector of the gain matrix (residual <= 1e-9)",
            });
        }
        Ok(Self {
            direction: z0,
            rate,
        })
    }

    /// Eigenvalue of the gain matrix along the error direction.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn direction(&self) -> Vec3 {
        self.direction
    }

    /// Largest norm of the signal, attained at `t = 0`.
    pub fn sup_norm(&self) -> f64 {
        2.0 * self.rate
    }

    /// Inertial-side value `Rhat n_omega` at time `t`.
    pub fn inertial_value(&self, t: f64) -> Vec3 {
        -2.0 * self.rate * self.direction / (2.0 * self.rate * t + 1.0).sqrt()
    }

    /// Closed-form norm of the driven error: `sqrt(2 lambda t + 1)`.
    pub fn predicted_error_norm(&self, t: f64) -> f64 {
        (2.0 * self.rate * t + 1.0).sqrt()
    }
}

/// Admissible gyro-disturbance bounds for the three filters on the ball
/// `|Z| < r`, with margin split `rho_frac` in (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IssBounds {
    pub k_u1: f64,
    pub k_u2: f64,
    pub k_u3: f64,
    pub r: f64,
    pub rho_frac: f64,
    pub lambda_min: f64,
    pub epsilon: f64,
}

/// Explicit disturbance bounds under which each filter is input-to-state
/// stable on `|Z(0)| < r`:
///
/// ```text
/// k_u1 = rho lmin r / (1 + r^2)
/// k_u2 = rho lmin r / sqrt((1 + r^2)(1 + eps + eps r^2))
/// k_u3 = rho lmin r / (1 + eps + eps r^2)
/// ```
///
/// Whenever `eps < r^2 / (1 + r^2)` these are strictly ordered
/// `k_u1 < k_u2 < k_u3`: the error-dependent gains tolerate strictly larger
/// disturbances. As `eps -> 0` and `r -> inf`, `k_u1 -> 0` (constant gain
/// loses robustness from large errors), `k_u2 -> rho lmin`, and
/// `k_u3 -> inf`.
pub fn iss_bounds(r: f64, rho_frac: f64, lambda_min: f64, epsilon: f64) -> Result<IssBounds> {
    for (name, value, ok, constraint) in [
        ("r", r, r > 0.0, "r > 0"),
        (
            "rho_frac",
            rho_frac,
            rho_frac > 0.0 && rho_frac < 1.0,
            "0 < rho_frac < 1",
        ),
        (
            "lambda_min",
            lambda_min,
            lambda_min > 0.0,
            "lambda_min > 0",
        ),
        ("epsilon", epsilon, epsilon > 0.0, "epsilon > 0"),
    ] {
        if !ok {
            return Err(Error::InvalidParameter {
                name,
                value,
                constraint,
            });
        }
    }
    let scale = rho_frac * lambda_min * r;
    let r_sq = r * r;
    Ok(IssBounds {
        k_u1: scale / (1.0 + r_sq),
        k_u2: scale / ((1.0 + r_sq) * (1.0 + epsilon + epsilon * r_sq)).sqrt(),
        k_u3: scale / (1.0 + epsilon + epsilon * r_sq),
        r,
        rho_frac,
        lambda_min,
        epsilon,
    })
}

impl IssBounds {
    /// Shape factor `varsigma(r)` of the ISS gain for the given filter; it
    /// equals `(1 + r^2) / k(r)` with the gain evaluated at `|Z| = r`.
    pub fn varsigma(&self, kind: FilterKind) -> f64 {
        let r_sq = self.r * self.r;
        match kind {
            FilterKind::I => 1.0 + r_sq,
            FilterKind::II => ((1.0 + r_sq) * (1.0 + self.epsilon + self.epsilon * r_sq)).sqrt(),
            FilterKind::III => 1.0 + self.epsilon + self.epsilon * r_sq,
        }
    }

    /// ISS gain `gamma(s) = varsigma(r) s / (2 rho_frac lambda_min)`: the
    /// asymptotic error norm a disturbance of sup-norm `s` can sustain.
    pub fn gain(&self, kind: FilterKind, s: f64) -> f64 {
        self.varsigma(kind) * s / (2.0 * self.rho_frac * self.lambda_min)
    }

    /// Admissible sup-norm bound for the given filter.
    pub fn admissible(&self, kind: FilterKind) -> f64 {
        match kind {
            FilterKind::I => self.k_u1,
            FilterKind::II => self.k_u2,
            FilterKind::III => self.k_u3,
        }
    }
}

/// Contaminates the attitude measurement with a small rotation of angle
/// `n_theta` about the current error axis, so the measured error is the true
/// error with its angle shifted by `n_theta`.
///
/// Fails when the error is too close to the identity or to a half-turn for
/// the axis to be defined; see [`apply_attitude_noise_with_fallback`].
pub fn apply_attitude_noise(
    r_true: &RotationMatrix,
    r_hat: &RotationMatrix,
    n_theta: f64,
) -> Result<RotationMatrix> {
    let r_err = *r_true * r_hat.transpose();
    let (_, axis) = r_err.angle_axis()?;
    let n_r = RotationMatrix::from_angle_axis(n_theta, axis)?;
    Ok(n_r * *r_true)
}

/// [`apply_attitude_noise`], falling back to a fixed axis when the error
/// axis is undefined. At zero error every axis produces the same
/// first-order perturbation, so the choice does not matter there.
pub fn apply_attitude_noise_with_fallback(
    r_true: &RotationMatrix,
    r_hat: &RotationMatrix,
    n_theta: f64,
) -> RotationMatrix {
    match apply_attitude_noise(r_true, r_hat, n_theta) {
        Ok(r_y) => r_y,
        Err(_) => {
            let axis = Vec3::new(0.0, 0.0, 1.0);
            RotationMatrix::from_angle_axis(n_theta, axis).expect("unit axis") * *r_true
        }
    }
}

/// One sample of a noisy reciprocal-gain-filter trajectory used by the
/// attenuation check.
#[derive(Debug, Clone, Copy)]
pub struct AttenuationSample {
    pub t: f64,
    /// Rodrigues vector of the estimation error.
    pub z: Vec3,
    /// Innovation applied at this sample.
    pub sigma: Vec3,
    /// Body-frame gyro disturbance injected at this sample.
    pub n_omega: Vec3,
}

/// Simulates the reciprocal-gain filter with isotropic weighting `A = a I`
/// and its gain evaluated at `epsilon = 0` (so `sigma = -2 a Z`), under
/// white gyro noise of the given standard deviation, and records the error
/// trajectory.
///
/// The `epsilon = 0` gain is singular on half-turns, so the run refuses to
/// continue (with a half-turn error) if the error distance ever exceeds
/// 0.999; callers should treat that as "not applicable" rather than a
/// verdict.
pub fn attenuation_trajectory(
    a: f64,
    r_err0: &RotationMatrix,
    omega: impl Fn(f64) -> Vec3,
    noise_std: f64,
    seed: u64,
    rate_hz: u32,
    horizon: f64,
) -> Result<Vec<AttenuationSample>> {
    if !(a > 0.0) {
        return Err(Error::InvalidParameter {
            name: "a",
            value: a,
            constraint: "a > 0",
        });
    }
    let dt = 1.0 / rate_hz as f64;
    let steps = (horizon * rate_hz as f64).round() as usize;
    let mut rng = SimRng::new(seed);

    // Truth starts at the identity, so the initial estimate is the
    // transposed initial error.
    let mut r = RotationMatrix::identity();
    let mut r_hat = r_err0.transpose();
    let mut samples = Vec::with_capacity(steps + 1);

    for k in 0..=steps {
        let t = k as f64 * dt;
        let r_err = r * r_hat.transpose();
        let d = r_err.dist_identity();
        if d > 0.999 {
            return Err(Error::NearHalfTurn { dist_identity: d });
        }
        let z = r_err.rodrigues()?;
        let sigma = -2.0 * a * z;
        let n_omega = if noise_std > 0.0 {
            rng.gaussian_vec3(noise_std)
        } else {
            Vec3::zeros()
        };
        samples.push(AttenuationSample {
            t,
            z,
            sigma,
            n_omega,
        });
        if k == steps {
            break;
        }
        let w = omega(t);
        let omega_y = w + n_omega;
        let omega_hat = omega_y - r_hat.transpose() * sigma;
        r_hat = r_hat * RotationMatrix::exp(omega_hat * dt);
        r = r * RotationMatrix::exp(w * dt);
    }
    Ok(samples)
}

/// Outcome of [`attenuation_check`].
#[derive(Debug, Clone, Copy)]
pub struct AttenuationVerdict {
    /// `(4a - 1/gamma^2) * integral of |Z|^2`.
    pub lhs: f64,
    /// `gamma^2 * integral of |n_omega|^2 + 2 ln(1 + |Z(0)|^2)`.
    pub rhs: f64,
}

impl AttenuationVerdict {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + 1e-9 * self.rhs.abs()
    }
}

/// Disturbance-attenuation inequality for the reciprocal-gain filter with
/// `A = a I` and `epsilon = 0`:
///
/// ```text
/// (4a - 1/gamma^2) int |Z|^2 dt <= gamma^2 int |n_omega|^2 dt
///                                  + 2 ln(1 + |Z(0)|^2)
/// ```
///
/// evaluated with composite trapezoid quadrature at the trajectory's sample
/// rate. Requires `gamma^2 > 1/(2a)`.
pub fn attenuation_check(
    samples: &[AttenuationSample],
    a: f64,
    gamma: f64,
) -> Result<AttenuationVerdict> {
    if !(gamma * gamma > 1.0 / (2.0 * a)) {
        return Err(Error::InvalidParameter {
            name: "gamma",
            value: gamma,
            constraint: "gamma^2 > 1/(2a)",
        });
    }
    if samples.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "samples",
            value: samples.len() as f64,
            constraint: "at least two trajectory samples",
        });
    }
    let mut z_integral = 0.0;
    let mut n_integral = 0.0;
    for pair in samples.windows(2) {
        let dt = pair[1].t - pair[0].t;
        z_integral += 0.5 * dt * (pair[0].z.norm_squared() + pair[1].z.norm_squared());
        n_integral += 0.5 * dt * (pair[0].n_omega.norm_squared() + pair[1].n_omega.norm_squared());
    }
    let z0_sq = samples[0].z.norm_squared();
    Ok(AttenuationVerdict {
        lhs: (4.0 * a - 1.0 / (gamma * gamma)) * z_integral,
        rhs: gamma * gamma * n_integral + 2.0 * (1.0 + z0_sq).ln(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn e1() -> Vec3 {
        Vec3::new(1.0, 0.0, 0.0)
    }
    fn e2() -> Vec3 {
        Vec3::new(0.0, 1.0, 0.0)
    }
    fn e3() -> Vec3 {
        Vec3::new(0.0, 0.0, 1.0)
    }

    fn abar_253() -> SymMatrix3 {
        SymMatrix3::from_diagonal(2.5, 2.0, 1.5)
    }

    #[test]
    fn unforced_rhs_reduces_to_linear_flow() {
        assert_eq!(
            rodrigues_error_rhs(FilterKind::I, &Vec3::zeros(), &abar_253(), 0.0, &Vec3::zeros()),
            Vec3::zeros()
        );
        let rhs = rodrigues_error_rhs(FilterKind::I, &e3(), &abar_253(), 0.0, &Vec3::zeros());
        assert_relative_eq!(rhs, Vec3::new(0.0, 0.0, -1.5), epsilon = 1e-15);
    }

    #[test]
    fn unforced_constant_gain_flow_matches_matrix_exponential() {
        let abar = SymMatrix3::new(2.0, 1.5, 1.0, 0.2, -0.1, 0.3);
        let z0 = Vec3::new(0.4, -0.8, 0.2);
        let traj = integrate_rodrigues(
            FilterKind::I,
            &abar,
            0.0,
            z0,
            |_| Vec3::zeros(),
            1e-3,
            2000,
        );
        let (t_end, z_end) = traj.last().unwrap();
        let expected = (-abar).exp_scaled(*t_end) * z0;
        assert!((z_end - expected).norm() < 1e-8);
    }

    #[test]
    fn gyro_disturbance_respects_its_declared_bound() {
        let mut d = GyroDisturbance::bounded_noise(0.3, 9);
        for k in 0..1000 {
            assert!(d.sample(k as f64 * 0.01).norm() <= 0.3);
        }
        assert_eq!(d.sup_norm(), 0.3);
        let mut c = GyroDisturbance::constant(Vec3::new(0.1, 0.2, -0.2));
        assert_relative_eq!(c.sup_norm(), 0.3, epsilon = 1e-15);
        assert_eq!(c.sample(5.0), Vec3::new(0.1, 0.2, -0.2));
        assert_eq!(GyroDisturbance::zero().sample(1.0), Vec3::zeros());
    }

    #[test]
    fn attitude_noise_type_matches_the_free_function() {
        let r_hat = RotationMatrix::from_angle_axis(0.4, e2()).unwrap();
        let r_true = RotationMatrix::from_angle_axis(1.0, e1()).unwrap() * r_hat;
        let mut noise = AttitudeNoise::constant(0.05);
        let a = noise.apply(0.0, &r_true, &r_hat);
        let b = apply_attitude_noise(&r_true, &r_hat, 0.05).unwrap();
        assert_eq!(*a.matrix(), *b.matrix());
    }

    #[test]
    fn destabilizing_disturbance_requires_unit_eigenvector() {
        let abar = abar_253();
        assert!(DestabilizingDisturbance::new(2.0 * e1(), &abar).is_err());
        assert!(
            DestabilizingDisturbance::new(Vec3::new(1.0, 1.0, 0.0).normalize(), &abar).is_err()
        );
        let d = DestabilizingDisturbance::new(e1(), &abar).unwrap();
        assert_relative_eq!(d.rate(), 2.5);
    }

    #[test]
    fn destabilizing_disturbance_values() {
        let d = DestabilizingDisturbance::new(e3(), &abar_253()).unwrap();
        assert_relative_eq!(d.inertial_value(0.0), -3.0 * e3(), epsilon = 1e-15);
        assert_relative_eq!(d.sup_norm(), 3.0);
        // At t = 3 / (2 lambda) the square root halves the amplitude.
        let t = 3.0 / (2.0 * 1.5);
        assert_relative_eq!(d.inertial_value(t).norm(), 1.5, epsilon = 1e-12);
        // The signal vanishes.
        assert!(d.inertial_value(1e6).norm() < 1e-2);
    }

    #[test]
    fn destabilizing_disturbance_drives_square_root_growth() {
        let abar = abar_253();
        let d = DestabilizingDisturbance::new(e2(), &abar).unwrap();
        let dt = 1e-3;
        let steps = 10_000; // t in [0, 10]
        let traj = integrate_rodrigues(
            FilterKind::I,
            &abar,
            0.0,
            d.direction(),
            |t| d.inertial_value(t),
            dt,
            steps,
        );
        for (t, z) in traj.iter().skip(1) {
            let predicted = d.predicted_error_norm(*t);
            let rel = (z.norm() - predicted).abs() / predicted;
            assert!(rel < 1e-4, "relative error {rel:e} at t = {t}");
            let angle = z.normalize().cross(&d.direction()).norm().asin();
            assert!(angle < 1e-6, "direction drifted by {angle:e} rad");
        }
    }

    #[test]
    fn iss_bounds_hand_values() {
        let b = iss_bounds(1.0, 0.5, 1.0, 0.01).unwrap();
        assert_relative_eq!(b.k_u1, 0.25, epsilon = 1e-15);
        assert_relative_eq!(b.k_u2, 0.5 / (2.0 * 1.02f64).sqrt(), epsilon = 1e-15);
        assert_relative_eq!(b.k_u3, 0.5 / 1.02, epsilon = 1e-15);
    }

    #[test]
    fn iss_bound_limits() {
        // eps -> 0, r large: constant gain loses all robustness, the
        // square-root gain tends to rho * lambda_min, the reciprocal gain
        // grows without bound.
        let b = iss_bounds(1e3, 0.5, 1.0, 1e-9).unwrap();
        assert!(b.k_u1 < 1e-3);
        assert_relative_eq!(b.k_u2, 0.5, epsilon = 1e-3);
        assert!(b.k_u3 > 100.0);
    }

    #[test]
    fn iss_bounds_are_ordered_when_epsilon_is_small() {
        for r in [0.3, 1.0, 3.0, 10.0] {
            for epsilon in [1e-4, 1e-3, 1e-2, 5e-2] {
                if epsilon < r * r / (1.0 + r * r) {
                    let b = iss_bounds(r, 0.5, 2.0, epsilon).unwrap();
                    assert!(
                        b.k_u1 < b.k_u2 && b.k_u2 < b.k_u3,
                        "ordering failed at r = {r}, eps = {epsilon}"
                    );
                }
            }
        }
    }

    #[test]
    fn iss_gain_shape_matches_gain_at_radius() {
        // varsigma(r) is exactly (1 + r^2) / k(r).
        let b = iss_bounds(1.7, 0.4, 1.3, 0.02).unwrap();
        for kind in FilterKind::ALL {
            let expected =
                (1.0 + b.r * b.r) / kind.gain_from_rodrigues(b.r * b.r, b.epsilon);
            assert_relative_eq!(b.varsigma(kind), expected, max_relative = 1e-12);
        }
        // The admissible bounds sit at half the gain's inverse: a
        // disturbance at k_ui sustains an asymptotic error of r/2, leaving
        // the other half of the ball as margin.
        for kind in FilterKind::ALL {
            assert_relative_eq!(
                b.gain(kind, b.admissible(kind)),
                0.5 * b.r,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn attitude_noise_shifts_the_error_angle() {
        // Error is a rotation by pi/2; contaminate by 0.1 rad.
        let r_hat = RotationMatrix::from_angle_axis(0.8, e2()).unwrap();
        let r_true = RotationMatrix::from_angle_axis(PI / 2.0, e1()).unwrap() * r_hat;
        let r_err = r_true * r_hat.transpose();
        assert_relative_eq!(r_err.angle_axis().unwrap().0, PI / 2.0, epsilon = 1e-12);

        let r_y = apply_attitude_noise(&r_true, &r_hat, 0.1).unwrap();
        let measured_err = r_y * r_hat.transpose();
        let (angle, axis) = measured_err.angle_axis().unwrap();
        assert_relative_eq!(angle, PI / 2.0 + 0.1, epsilon = 1e-12);
        assert_relative_eq!(axis, r_err.angle_axis().unwrap().1, epsilon = 1e-9);

        // Zero noise returns the true attitude.
        let same = apply_attitude_noise(&r_true, &r_hat, 0.0).unwrap();
        assert_relative_eq!(*same.matrix(), *r_true.matrix(), epsilon = 1e-12);
    }

    #[test]
    fn attitude_noise_needs_a_defined_axis() {
        let r = RotationMatrix::from_angle_axis(0.5, e1()).unwrap();
        assert!(matches!(
            apply_attitude_noise(&r, &r, 0.1),
            Err(Error::AxisUndefined { .. })
        ));
        // The fallback still produces a perturbed measurement.
        let r_y = apply_attitude_noise_with_fallback(&r, &r, 0.1);
        assert_relative_eq!((r_y * r.transpose()).angle_axis().unwrap().0, 0.1, epsilon = 1e-12);
    }

    #[test]
    fn attitude_noise_first_order_expansion() {
        // Z(measured error) = Z + n (1 + |Z|^2) / (2 - n |Z|) * axis,
        // accurate to second order in n.
        let n_theta = 1e-3;
        let r_hat = RotationMatrix::from_angle_axis(0.3, e3()).unwrap();
        let r_true = RotationMatrix::from_angle_axis(PI / 2.0, e1()).unwrap() * r_hat;
        let r_err = r_true * r_hat.transpose();
        let z = r_err.rodrigues().unwrap();
        let (_, axis) = r_err.angle_axis().unwrap();

        let r_y = apply_attitude_noise(&r_true, &r_hat, n_theta).unwrap();
        let z_measured = (r_y * r_hat.transpose()).rodrigues().unwrap();
        let first_order =
            z + n_theta * (1.0 + z.norm_squared()) / (2.0 - n_theta * z.norm()) * axis;
        assert!(
            (z_measured - first_order).norm() < 1e-7,
            "expansion residual {:e}",
            (z_measured - first_order).norm()
        );
    }

    #[test]
    fn attenuation_holds_without_noise() {
        // Z(0) = e3, a = 1, gamma = 1: lhs = 3 * integral of |Z|^2 must stay
        // below 2 ln 2.
        let r_err0 = RotationMatrix::from_angle_axis(PI / 2.0, e3()).unwrap();
        let samples =
            attenuation_trajectory(1.0, &r_err0, |_| Vec3::zeros(), 0.0, 0, 200, 20.0).unwrap();
        let verdict = attenuation_check(&samples, 1.0, 1.0).unwrap();
        assert!(verdict.holds(), "lhs {} rhs {}", verdict.lhs, verdict.rhs);
        assert_relative_eq!(verdict.rhs, 2.0 * 2.0f64.ln(), epsilon = 1e-12);
        // The no-noise integral has a closed form: 3 * (ln 2) / 2.
        assert_relative_eq!(verdict.lhs, 1.5 * 2.0f64.ln(), epsilon = 1e-2);
    }

    #[test]
    fn attenuation_zero_start_is_trivially_tight() {
        let samples = attenuation_trajectory(
            1.0,
            &RotationMatrix::identity(),
            |_| Vec3::zeros(),
            0.0,
            0,
            200,
            5.0,
        )
        .unwrap();
        let verdict = attenuation_check(&samples, 1.0, 1.0).unwrap();
        assert_eq!(verdict.lhs, 0.0);
        assert_eq!(verdict.rhs, 0.0);
        assert!(verdict.holds());
    }

    #[test]
    fn attenuation_holds_under_white_noise() {
        let r_err0 = RotationMatrix::from_angle_axis(PI / 2.0, e2()).unwrap();
        let samples =
            attenuation_trajectory(1.0, &r_err0, |_| Vec3::zeros(), 0.1, 42, 200, 60.0).unwrap();
        let verdict = attenuation_check(&samples, 1.0, 1.0).unwrap();
        assert!(verdict.holds(), "lhs {} rhs {}", verdict.lhs, verdict.rhs);
    }

    #[test]
    fn attenuation_rejects_inadmissible_gamma() {
        let samples = attenuation_trajectory(
            1.0,
            &RotationMatrix::identity(),
            |_| Vec3::zeros(),
            0.0,
            0,
            100,
            1.0,
        )
        .unwrap();
        assert!(matches!(
            attenuation_check(&samples, 1.0, 0.7),
            Err(Error::InvalidParameter { name: "gamma", .. })
        ));
    }

    #[test]
    fn constant_attitude_noise_leaves_a_bounded_residual_error() {
        // With a constant angle offset eta on the attitude measurement and
        // |Z(0)| <= r = 1, every filter settles with
        // limsup |Z| <= (1 + r^2) eta / 2 (plus 10 percent margin).
        use crate::filters::{filter_step, FilterConfig, FilterState, Measurement};

        let eta = 0.05;
        let bound = 1.1 * (1.0 + 1.0) * eta / 2.0;
        let weighting = SymMatrix3::from_diagonal(1.0, 2.0, 3.0);
        let r_truth = RotationMatrix::identity();
        let z0 = Vec3::new(1.0, 0.0, 0.0); // |Z(0)| = 1, a quarter-turn error
        for kind in FilterKind::ALL {
            let cfg = FilterConfig::new(kind, weighting, 1e-2).unwrap();
            let mut noise = AttitudeNoise::constant(eta);
            let mut state = FilterState::new(RotationMatrix::cayley(z0).transpose());
            let dt = 1e-3;
            let mut tail_max = 0.0f64;
            for step in 0..20_000 {
                let r_y = noise.apply(step as f64 * dt, &r_truth, &state.r_hat);
                state =
                    filter_step(&cfg, &state, Vec3::zeros(), &Measurement::Attitude(r_y), dt)
                        .unwrap();
                if step >= 15_000 {
                    let z = (r_truth * state.r_hat.transpose()).rodrigues().unwrap();
                    tail_max = tail_max.max(z.norm());
                }
            }
            assert!(
                tail_max <= bound,
                "kind {kind}: residual error {tail_max} above {bound}"
            );
        }
    }

    #[test]
    fn linearized_dynamics_coincide_for_small_errors() {
        // For |Z| <= 1e-3 all three filters follow Z' = -Abar Z - w/2 within
        // one percent of the coefficient scale.
        let abar = abar_253();
        let mut rng = SimRng::new(9);
        for _ in 0..200 {
            let z = 1e-3 * rng.uniform() * rng.unit_vector();
            let w = 0.3 * rng.unit_vector();
            let linear = -(abar * z) - 0.5 * w;
            let scale = (abar * z).norm() + 0.5 * w.norm();
            for kind in FilterKind::ALL {
                let rhs = rodrigues_error_rhs(kind, &z, &abar, 1e-2, &w);
                assert!(
                    (rhs - linear).norm() <= 0.01 * scale,
                    "kind {kind}: residual {:e} vs scale {scale:e}",
                    (rhs - linear).norm()
                );
            }
        }
    }
}
