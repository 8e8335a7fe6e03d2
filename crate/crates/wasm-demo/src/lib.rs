//! Browser demo: three interactive views over the attitude-filter library,
//! exported through wasm-bindgen and plotted by the static page in `www/`.
//!
//! Every export returns a JSON string so the page needs no generated
//! bindings beyond the function signatures; the heavy lifting (simulation,
//! closed forms, envelopes) happens in the core crate.

use wasm_bindgen::prelude::*;

use serde_json::json;
use so3_attitude::filters::FilterKind;
use so3_attitude::oracle;
use so3_attitude::sim::{simulate, ExperimentConfig};
use so3_attitude::so3::{psi, RotationMatrix, SymMatrix3, Vec3};

/// Noisy benchmark run of all three filters; returns
/// `{t: [...], curves: [{kind, dist}, ...]}` downsampled for plotting.
#[wasm_bindgen]
pub fn filter_comparison(
    seed: u32,
    horizon_s: f64,
    epsilon: f64,
    gyro_noise_std: f64,
    vec_noise_std: f64,
    initial_error_deg: f64,
) -> Result<String, JsError> {
    comparison_json(
        seed as u64,
        horizon_s,
        epsilon,
        gyro_noise_std,
        vec_noise_std,
        initial_error_deg,
    )
    .map_err(|e| JsError::new(&e))
}

/// Convergence envelope for one filter kind, with a closed-form trajectory
/// of the constant-gain error dynamics for scale; returns
/// `{t: [...], lower: [...], upper: [...], explicit: [...]}`.
#[wasm_bindgen]
pub fn decay_envelopes(
    kind: &str,
    d0: f64,
    lambda_min: f64,
    lambda_max: f64,
    gamma: f64,
    epsilon: f64,
    horizon_s: f64,
) -> Result<String, JsError> {
    envelopes_json(kind, d0, lambda_min, lambda_max, gamma, epsilon, horizon_s)
        .map_err(|e| JsError::new(&e))
}

/// Innovation magnitude against the error angle for all three gain families
/// (weighting diag(1,2,3), error axis e3); returns
/// `{theta_deg: [...], curves: [{kind, sigma_norm}, ...]}`.
#[wasm_bindgen]
pub fn innovation_profile(epsilon: f64) -> Result<String, JsError> {
    profile_json(epsilon).map_err(|e| JsError::new(&e))
}

pub fn comparison_json(
    seed: u64,
    horizon_s: f64,
    epsilon: f64,
    gyro_noise_std: f64,
    vec_noise_std: f64,
    initial_error_deg: f64,
) -> Result<String, String> {
    let mut cfg = ExperimentConfig::reference();
    cfg.sensors.seed = seed;
    cfg.horizon_s = horizon_s.clamp(1.0, 120.0);
    cfg.epsilon = epsilon;
    cfg.sensors.gyro_noise_std = gyro_noise_std.max(0.0);
    cfg.sensors.vec_noise_std = vec_noise_std.max(0.0);
    let angle = (initial_error_deg.clamp(1.0, 179.9)).to_radians();
    cfg.rhat0 = RotationMatrix::from_angle_axis(angle, Vec3::new(1.0, 0.0, 0.0))
        .map_err(|e| e.to_string())?;
    let record = simulate(&cfg).map_err(|e| e.to_string())?;

    let stride = (record.t.len() / 800).max(1);
    let t: Vec<f64> = record.t.iter().step_by(stride).copied().collect();
    let curves: Vec<_> = record
        .traces
        .iter()
        .map(|trace| {
            json!({
                "kind": trace.kind.to_string(),
                "dist": trace.dist.iter().step_by(stride).copied().collect::<Vec<f64>>(),
            })
        })
        .collect();
    Ok(json!({ "t": t, "curves": curves }).to_string())
}

pub fn envelopes_json(
    kind: &str,
    d0: f64,
    lambda_min: f64,
    lambda_max: f64,
    gamma: f64,
    epsilon: f64,
    horizon_s: f64,
) -> Result<String, String> {
    let kind: FilterKind = kind.parse()?;
    let horizon = horizon_s.clamp(0.1, 60.0);
    let steps = 400usize;

    // A concrete closed-form error trajectory inside the envelope: gain
    // matrix with the given spectrum, initial error about a mixed axis.
    let abar = SymMatrix3::from_diagonal(
        lambda_max,
        0.5 * (lambda_min + lambda_max),
        lambda_min,
    );
    let axis = Vec3::new(1.0, 1.0, 1.0) / 3.0f64.sqrt();
    let r0 = RotationMatrix::from_angle_axis(2.0 * d0.asin(), axis).map_err(|e| e.to_string())?;

    let mut t = Vec::with_capacity(steps + 1);
    let mut lower = Vec::with_capacity(steps + 1);
    let mut upper = Vec::with_capacity(steps + 1);
    let mut explicit = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let tk = horizon * k as f64 / steps as f64;
        let env = match kind {
            FilterKind::I => oracle::filter1_envelope(d0, lambda_min, lambda_max, tk),
            FilterKind::II => {
                oracle::filter2_envelope(d0, lambda_min, lambda_max, gamma, epsilon, tk)
            }
            FilterKind::III => {
                oracle::filter3_envelope(d0, lambda_min, lambda_max, gamma, epsilon, tk)
            }
        }
        .map_err(|e| e.to_string())?;
        t.push(tk);
        lower.push(env.lower);
        upper.push(env.upper);
        explicit.push(oracle::explicit_distance(&r0, &abar, tk).map_err(|e| e.to_string())?);
    }
    Ok(json!({ "t": t, "lower": lower, "upper": upper, "explicit": explicit }).to_string())
}

pub fn profile_json(epsilon: f64) -> Result<String, String> {
    // NaN must fail this guard, hence the negated form.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(epsilon > 0.0) {
        return Err(format!("epsilon must be positive, got {epsilon}"));
    }
    let weighting = SymMatrix3::from_diagonal(1.0, 2.0, 3.0);
    let axis = Vec3::new(0.0, 0.0, 1.0);
    let steps = 720usize;
    let theta_deg: Vec<f64> = (0..=steps).map(|k| 360.0 * k as f64 / steps as f64).collect();

    let curves: Vec<_> = FilterKind::ALL
        .iter()
        .map(|kind| {
            let sigma_norm: Vec<f64> = theta_deg
                .iter()
                .map(|deg| {
                    let r_err = RotationMatrix::from_angle_axis(deg.to_radians(), axis)
                        .expect("unit axis");
                    let k = kind.gain(r_err.dist_identity_sq(), epsilon);
                    k * psi(&(weighting.as_matrix() * r_err.matrix())).norm()
                })
                .collect();
            json!({ "kind": kind.to_string(), "sigma_norm": sigma_norm })
        })
        .collect();
    Ok(json!({ "theta_deg": theta_deg, "curves": curves }).to_string())
}
