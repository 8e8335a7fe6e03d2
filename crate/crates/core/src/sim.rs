//! Deterministic simulation harness.
//!
//! Ground truth is propagated on SO(3) with the group-exact exponential
//! stepper at a high rate; sensors sample it at a lower, evenly dividing
//! rate, adding seeded white noise to the angular velocity and to the
//! body-frame vector observations. Experiments run one or more filters over
//! the synthesized frames and record the error distance, the error angle and
//! the innovation per filter, which persists to CSV. Everything is
//! deterministic given the config and seed: two runs produce byte-identical
//! CSV files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::error::Error as MathError;
use crate::filters::{
    filter_step, FilterConfig, FilterKind, FilterState, Measurement, ObservationPair,
    VectorObservation,
};
use crate::numfmt::g12;
use crate::rng::SimRng;
use crate::so3::{RotationMatrix, Vec3};

/// Simulation-level failures: config parse errors carry the offending line,
/// I/O errors the path.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("{path}:{line}: {message}")]
    Config {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Math(#[from] MathError),
}

pub type SimResult<T> = std::result::Result<T, SimError>;

/// Angular-velocity profile driving the ground truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OmegaProfile {
    /// Mixed sinusoids exercising all three axes:
    /// `(sin 0.3t, 0.7 sin(0.2t + pi), 0.5 sin(0.1t + pi/3))` rad/s.
    Reference,
    Zero,
    Constant(Vec3),
}

impl OmegaProfile {
    pub fn omega(&self, t: f64) -> Vec3 {
        match self {
            OmegaProfile::Reference => Vec3::new(
                (0.3 * t).sin(),
                0.7 * (0.2 * t + std::f64::consts::PI).sin(),
                0.5 * (0.1 * t + std::f64::consts::PI / 3.0).sin(),
            ),
            OmegaProfile::Zero => Vec3::zeros(),
            OmegaProfile::Constant(w) => *w,
        }
    }
}

impl std::fmt::Display for OmegaProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OmegaProfile::Reference => f.write_str("reference"),
            OmegaProfile::Zero => f.write_str("zero"),
            OmegaProfile::Constant(w) => write!(f, "constant:{},{},{}", w.x, w.y, w.z),
        }
    }
}

impl FromStr for OmegaProfile {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "reference" => Ok(OmegaProfile::Reference),
            "zero" => Ok(OmegaProfile::Zero),
            other => match other.strip_prefix("constant:") {
                Some(triple) => Ok(OmegaProfile::Constant(parse_vec3(triple)?)),
                None => Err(format!(
                    "unknown profile {other:?} (expected reference, zero or constant:x,y,z)"
                )),
            },
        }
    }
}

/// Ground-truth configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthConfig {
    pub profile: OmegaProfile,
    pub r0: RotationMatrix,
    pub truth_rate_hz: u32,
}

impl Default for TruthConfig {
    fn default() -> Self {
        Self {
            profile: OmegaProfile::Reference,
            r0: RotationMatrix::identity(),
            truth_rate_hz: 1000,
        }
    }
}

/// Sensor-suite configuration: rates, noise levels, the weighted reference
/// directions observed by the vector sensors, and the noise seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorConfig {
    pub sensor_rate_hz: u32,
    pub gyro_noise_std: f64,
    pub vec_noise_std: f64,
    pub references: Vec<(Vec3, f64)>,
    pub seed: u64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            sensor_rate_hz: 200,
            gyro_noise_std: 0.1,
            vec_noise_std: 0.1,
            references: default_references(),
            seed: 42,
        }
    }
}

fn default_references() -> Vec<(Vec3, f64)> {
    vec![
        (Vec3::new(1.0, -1.0, 1.0) / 3.0f64.sqrt(), 1.0),
        (Vec3::new(0.0, 0.0, 1.0), 2.0),
    ]
}

/// How the filters consume the attitude information.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasurementPath {
    /// Innovation computed directly from the vector observations (default).
    Vectors,
    /// Innovation computed from the true attitude; bypasses vector noise and
    /// exists for noise-free comparisons against the closed-form solutions.
    TrueAttitude,
}

/// A full experiment: truth, sensors, the filters to run, the shared initial
/// estimate, horizon and output location.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub truth: TruthConfig,
    pub sensors: SensorConfig,
    pub filters: Vec<FilterKind>,
    pub rhat0: RotationMatrix,
    pub horizon_s: f64,
    pub epsilon: f64,
    pub path: MeasurementPath,
    pub output: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::reference()
    }
}

impl ExperimentConfig {
    /// The built-in benchmark: all three filters, 60 s horizon, 1000 Hz
    /// truth, 200 Hz sensors with 0.1-std noise on both channels, the
    /// standard two reference directions weighted 1 and 2, and the estimate
    /// initialized a tenth of a radian short of a half-turn about the first
    /// body axis.
    pub fn reference() -> Self {
        Self {
            truth: TruthConfig::default(),
            sensors: SensorConfig::default(),
            filters: vec![FilterKind::I, FilterKind::II, FilterKind::III],
            rhat0: RotationMatrix::from_angle_axis(
                std::f64::consts::PI - 0.1,
                Vec3::new(1.0, 0.0, 0.0),
            )
            .expect("unit axis"),
            horizon_s: 60.0,
            epsilon: 1e-2,
            path: MeasurementPath::Vectors,
            output: PathBuf::from("trajectory.csv"),
        }
    }

    /// Sanity checks shared by the CLI and the library entry points.
    pub fn validate(&self) -> SimResult<()> {
        let complain = |message: String| SimError::Config {
            path: "<config>".into(),
            line: 0,
            message,
        };
        if self.filters.is_empty() {
            return Err(complain("at least one filter kind is required".into()));
        }
        if !(self.horizon_s > 0.0) {
            return Err(complain(format!(
                "horizon_s = {} must be positive",
                self.horizon_s
            )));
        }
        if self.truth.truth_rate_hz < self.sensors.sensor_rate_hz
            || !self.truth.truth_rate_hz.is_multiple_of(self.sensors.sensor_rate_hz)
        {
            return Err(complain(format!(
                "truth rate {} Hz must be a multiple of the sensor rate {} Hz",
                self.truth.truth_rate_hz, self.sensors.sensor_rate_hz
            )));
        }
        Ok(())
    }
}

/// One ground-truth sample.
#[derive(Debug, Clone, Copy)]
pub struct TruthSample {
    pub t: f64,
    pub r: RotationMatrix,
    pub omega: Vec3,
}

/// Propagates the truth kinematics `R' = R [omega]x` with the group-exact
/// stepper at the truth rate; returns `horizon * rate + 1` samples.
pub fn propagate_truth(cfg: &TruthConfig, horizon: f64) -> Vec<TruthSample> {
    let rate = cfg.truth_rate_hz as f64;
    let dt = 1.0 / rate;
    let steps = (horizon * rate).round() as usize;
    let mut out = Vec::with_capacity(steps + 1);
    let mut r = cfg.r0;
    for k in 0..=steps {
        let t = k as f64 / rate;
        let omega = cfg.profile.omega(t);
        out.push(TruthSample { t, r, omega });
        if k < steps {
            r = r * RotationMatrix::exp(omega * dt);
        }
    }
    out
}

/// One synthesized sensor frame: the noisy rate measurement and the noisy
/// body-frame observations, plus the index of the truth sample it was taken
/// at.
#[derive(Debug, Clone)]
pub struct SensorFrame {
    pub t: f64,
    pub truth_index: usize,
    pub omega_y: Vec3,
    pub observations: Vec<ObservationPair>,
}

/// Samples the truth at the sensor rate and contaminates it:
/// `omega_y = omega + n` and `b_i = R^T r_i + n_i` with independent
/// per-component gaussians. Draw order is fixed (rate first, then each
/// observation in reference order), so a seed pins every frame.
pub fn synthesize_sensors(
    truth: &[TruthSample],
    cfg: &SensorConfig,
    truth_rate_hz: u32,
) -> Vec<SensorFrame> {
    assert!(
        truth_rate_hz >= cfg.sensor_rate_hz && truth_rate_hz.is_multiple_of(cfg.sensor_rate_hz),
        "sensor ticks must align with truth ticks"
    );
    let stride = (truth_rate_hz / cfg.sensor_rate_hz) as usize;
    let mut rng = SimRng::new(cfg.seed);
    let mut frames = Vec::with_capacity(truth.len() / stride + 1);
    for (index, sample) in truth.iter().enumerate().step_by(stride) {
        let omega_y = sample.omega
            + if cfg.gyro_noise_std > 0.0 {
                rng.gaussian_vec3(cfg.gyro_noise_std)
            } else {
                Vec3::zeros()
            };
        let observations = cfg
            .references
            .iter()
            .map(|(reference, weight)| {
                let clean = sample.r.transpose() * *reference;
                let noise = if cfg.vec_noise_std > 0.0 {
                    rng.gaussian_vec3(cfg.vec_noise_std)
                } else {
                    Vec3::zeros()
                };
                ObservationPair {
                    reference: *reference,
                    measured: clean + noise,
                    weight: *weight,
                }
            })
            .collect();
        frames.push(SensorFrame {
            t: sample.t,
            truth_index: index,
            omega_y,
            observations,
        });
    }
    frames
}

/// Recorded trajectory of one filter.
#[derive(Debug, Clone)]
pub struct FilterTrace {
    pub kind: FilterKind,
    pub dist: Vec<f64>,
    pub angle_deg: Vec<f64>,
    pub sigma: Vec<Vec3>,
}

/// Time series of every configured filter against the same truth.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub t: Vec<f64>,
    pub traces: Vec<FilterTrace>,
}

impl TrajectoryRecord {
    /// First recorded time at which the filter's error distance falls below
    /// `threshold`.
    pub fn crossing_time(&self, kind: FilterKind, threshold: f64) -> Option<f64> {
        let trace = self.traces.iter().find(|tr| tr.kind == kind)?;
        trace
            .dist
            .iter()
            .position(|d| *d < threshold)
            .map(|i| self.t[i])
    }

    /// CSV with header
    /// `t,<kind>_distI,<kind>_angle_deg,<kind>_sigma_x,<kind>_sigma_y,<kind>_sigma_z`
    /// per filter, `%.12g` numbers and `\n` line endings.
    pub fn to_csv(&self) -> String {
        let mut header = String::from("t");
        for trace in &self.traces {
            let k = trace.kind;
            write!(
                header,
                ",{k}_distI,{k}_angle_deg,{k}_sigma_x,{k}_sigma_y,{k}_sigma_z"
            )
            .unwrap();
        }
        let mut out = header;
        out.push('\n');
        for (i, t) in self.t.iter().enumerate() {
            out.push_str(&g12(*t));
            for trace in &self.traces {
                let s = trace.sigma[i];
                for value in [trace.dist[i], trace.angle_deg[i], s.x, s.y, s.z] {
                    out.push(',');
                    out.push_str(&g12(value));
                }
            }
            out.push('\n');
        }
        out
    }
}

fn error_distance(truth: &RotationMatrix, estimate: &RotationMatrix) -> f64 {
    (*truth * estimate.transpose()).dist_identity()
}

/// Runs every configured filter over the synthesized sensor frames and
/// records `|R Rhat^T|_I`, the error angle in degrees, and the innovation at
/// each sensor tick. Purely in-memory; see [`run_experiment`] for the
/// CSV-writing entry point.
pub fn simulate(cfg: &ExperimentConfig) -> SimResult<TrajectoryRecord> {
    cfg.validate()?;
    let truth = propagate_truth(&cfg.truth, cfg.horizon_s);
    let mut frames = synthesize_sensors(&truth, &cfg.sensors, cfg.truth.truth_rate_hz);
    let stride = (cfg.truth.truth_rate_hz / cfg.sensors.sensor_rate_hz) as usize;
    let dt = 1.0 / cfg.sensors.sensor_rate_hz as f64;
    // A frame on the horizon boundary has no successor truth tick to step
    // into; drop it rather than extrapolate.
    frames.retain(|frame| frame.truth_index + stride < truth.len());

    let mut t = Vec::with_capacity(frames.len() + 1);
    t.push(0.0);
    for frame in &frames {
        t.push(frame.t + dt);
    }

    let mut traces = Vec::with_capacity(cfg.filters.len());
    for kind in &cfg.filters {
        let filter_cfg =
            FilterConfig::from_reference_vectors(*kind, &cfg.sensors.references, cfg.epsilon)?;
        let mut state = FilterState::new(cfg.rhat0);
        let mut trace = FilterTrace {
            kind: *kind,
            dist: Vec::with_capacity(t.len()),
            angle_deg: Vec::with_capacity(t.len()),
            sigma: Vec::with_capacity(t.len()),
        };
        let push = |dist: f64, sigma: Vec3, trace: &mut FilterTrace| {
            trace.dist.push(dist);
            trace.angle_deg.push(2.0 * dist.asin() * 180.0 / std::f64::consts::PI);
            trace.sigma.push(sigma);
        };
        push(
            error_distance(&truth[0].r, &state.r_hat),
            Vec3::zeros(),
            &mut trace,
        );
        for frame in &frames {
            let measurement = match cfg.path {
                MeasurementPath::Vectors => {
                    Measurement::Vectors(VectorObservation::new(frame.observations.clone())?)
                }
                MeasurementPath::TrueAttitude => {
                    Measurement::Attitude(truth[frame.truth_index].r)
                }
            };
            state = filter_step(&filter_cfg, &state, frame.omega_y, &measurement, dt)?;
            let truth_next = &truth[frame.truth_index + stride];
            push(
                error_distance(&truth_next.r, &state.r_hat),
                state.last_sigma,
                &mut trace,
            );
        }
        traces.push(trace);
    }
    Ok(TrajectoryRecord { t, traces })
}

/// [`simulate`], then write the CSV to the configured output path.
pub fn run_experiment(cfg: &ExperimentConfig) -> SimResult<TrajectoryRecord> {
    let record = simulate(cfg)?;
    write_csv(&record, &cfg.output)?;
    Ok(record)
}

/// Writes the record's CSV; an empty record still gets its header row.
pub fn write_csv(record: &TrajectoryRecord, path: &Path) -> SimResult<()> {
    std::fs::write(path, record.to_csv()).map_err(|source| SimError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_vec3(s: &str) -> std::result::Result<Vec3, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected a comma-separated triple, got {s:?}"));
    }
    let mut v = [0.0; 3];
    for (slot, part) in v.iter_mut().zip(&parts) {
        *slot = part
            .parse::<f64>()
            .map_err(|_| format!("not a number: {part:?}"))?;
    }
    Ok(Vec3::new(v[0], v[1], v[2]))
}

/// Serializes a config as the flat `key = value` format accepted by
/// [`parse_config`]; `read_config(write_config(c)) == c`.
pub fn config_to_string(cfg: &ExperimentConfig) -> String {
    let filters: Vec<String> = cfg.filters.iter().map(|k| k.to_string()).collect();
    // The initial estimate is stored as angle + axis; configs built from
    // files always have one.
    let (angle, axis) = cfg
        .rhat0
        .angle_axis()
        .unwrap_or((0.0, Vec3::new(1.0, 0.0, 0.0)));
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    };
    kv("profile", cfg.truth.profile.to_string());
    kv("truth_rate_hz", cfg.truth.truth_rate_hz.to_string());
    kv("sensor_rate_hz", cfg.sensors.sensor_rate_hz.to_string());
    kv("gyro_noise_std", cfg.sensors.gyro_noise_std.to_string());
    kv("vec_noise_std", cfg.sensors.vec_noise_std.to_string());
    kv("seed", cfg.sensors.seed.to_string());
    kv("horizon_s", cfg.horizon_s.to_string());
    kv("epsilon", cfg.epsilon.to_string());
    kv("filters", filters.join(","));
    kv("rhat0_angle_rad", angle.to_string());
    kv(
        "rhat0_axis",
        format!("{},{},{}", axis.x, axis.y, axis.z),
    );
    let r1 = cfg.sensors.references[0];
    let r2 = cfg.sensors.references[1];
    kv("r1", format!("{},{},{}", r1.0.x, r1.0.y, r1.0.z));
    kv("r2", format!("{},{},{}", r2.0.x, r2.0.y, r2.0.z));
    kv("rho1", r1.1.to_string());
    kv("rho2", r2.1.to_string());
    kv("output", cfg.output.display().to_string());
    out
}

pub fn write_config(cfg: &ExperimentConfig, path: &Path) -> SimResult<()> {
    std::fs::write(path, config_to_string(cfg)).map_err(|source| SimError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parses the flat `key = value` config format.
///
/// Every key is optional and defaults to the built-in benchmark value;
/// unknown keys and malformed lines are errors carrying the line number.
/// Blank lines and `#` comments are allowed.
pub fn parse_config(text: &str, path_label: &str) -> SimResult<ExperimentConfig> {
    let mut cfg = ExperimentConfig::reference();
    let mut rhat0_angle = None;
    let mut rhat0_axis = None;
    let fail = |line: usize, message: String| SimError::Config {
        path: path_label.to_string(),
        line,
        message,
    };

    for (index, raw) in text.lines().enumerate() {
        let line_no = index + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| fail(line_no, format!("expected `key = value`, got {line:?}")))?;
        let key = key.trim();
        let value = value.trim();
        let bad = |message: String| fail(line_no, message);
        let parse_f64 = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| fail(line_no, format!("{key}: not a number: {v:?}")))
        };
        let parse_u32 = |v: &str| {
            v.parse::<u32>()
                .map_err(|_| fail(line_no, format!("{key}: not an integer: {v:?}")))
        };
        match key {
            "profile" => cfg.truth.profile = value.parse().map_err(&bad)?,
            "truth_rate_hz" => cfg.truth.truth_rate_hz = parse_u32(value)?,
            "sensor_rate_hz" => cfg.sensors.sensor_rate_hz = parse_u32(value)?,
            "gyro_noise_std" => cfg.sensors.gyro_noise_std = parse_f64(value)?,
            "vec_noise_std" => cfg.sensors.vec_noise_std = parse_f64(value)?,
            "seed" => {
                cfg.sensors.seed = value
                    .parse::<u64>()
                    .map_err(|_| fail(line_no, format!("seed: not an integer: {value:?}")))?
            }
            "horizon_s" => cfg.horizon_s = parse_f64(value)?,
            "epsilon" => cfg.epsilon = parse_f64(value)?,
            "filters" => {
                let mut kinds = Vec::new();
                for part in value.split(',') {
                    kinds.push(part.parse::<FilterKind>().map_err(&bad)?);
                }
                if kinds.is_empty() {
                    return Err(bad("filters: empty list".into()));
                }
                cfg.filters = kinds;
            }
            "rhat0_angle_rad" => rhat0_angle = Some(parse_f64(value)?),
            "rhat0_axis" => rhat0_axis = Some(parse_vec3(value).map_err(&bad)?),
            "r1" => cfg.sensors.references[0].0 = parse_vec3(value).map_err(&bad)?,
            "r2" => cfg.sensors.references[1].0 = parse_vec3(value).map_err(&bad)?,
            "rho1" => cfg.sensors.references[0].1 = parse_f64(value)?,
            "rho2" => cfg.sensors.references[1].1 = parse_f64(value)?,
            "output" => cfg.output = PathBuf::from(value),
            other => return Err(bad(format!("unknown key {other:?}"))),
        }
    }

    if rhat0_angle.is_some() || rhat0_axis.is_some() {
        let angle = rhat0_angle.unwrap_or(std::f64::consts::PI - 0.1);
        let axis = rhat0_axis.unwrap_or(Vec3::new(1.0, 0.0, 0.0));
        cfg.rhat0 = RotationMatrix::from_angle_axis(angle, axis).map_err(|e| SimError::Config {
            path: path_label.to_string(),
            line: 0,
            message: format!("rhat0: {e}"),
        })?;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn read_config(path: &Path) -> SimResult<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| SimError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text, &path.display().to_string())
}
