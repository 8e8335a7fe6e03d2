//! The three complementary attitude filters on SO(3).
//!
//! Each filter propagates an estimate with the measured angular velocity and
//! corrects it with an innovation term `sigma = -k * psi(A R_y Rhat^T)`. They
//! differ only in the scalar gain `k`: constant for kind `I`, and growing
//! with the attitude error for kinds `II` and `III`, which buys faster
//! convergence from large errors without changing the behaviour near the
//! origin. The vector-measurement formulation computes the same innovation
//! directly from body-frame observations of known reference directions, so no
//! attitude reconstruction step is needed.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::so3::{psi, RotationMatrix, SymMatrix3, Vec3};

/// Innovation-gain family of a filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterKind {
    /// Constant gain 1.
    I,
    /// Gain `(1 + eps - |R|_I^2)^{-1/2}`.
    II,
    /// Gain `(1 + eps - |R|_I^2)^{-1}`.
    III,
}

impl FilterKind {
    pub const ALL: [FilterKind; 3] = [FilterKind::I, FilterKind::II, FilterKind::III];

    /// Innovation gain as a function of the squared error distance
    /// `d = |R_y Rhat^T|_I^2`. Finite for every `d` in [0, 1] as long as
    /// `epsilon > 0`.
    pub fn gain(self, dist_sq: f64, epsilon: f64) -> f64 {
        debug_assert!((-1e-12..=1.0 + 1e-12).contains(&dist_sq), "d = {dist_sq}");
        match self {
            FilterKind::I => 1.0,
            FilterKind::II => 1.0 / (1.0 + epsilon - dist_sq).sqrt(),
            FilterKind::III => 1.0 / (1.0 + epsilon - dist_sq),
        }
    }

    /// The same gain expressed through the squared Rodrigues-vector norm
    /// `|Z|^2 = d / (1 - d)`; used by the error-dynamics analysis.
    pub fn gain_from_rodrigues(self, z_norm_sq: f64, epsilon: f64) -> f64 {
        let n = 1.0 + z_norm_sq;
        match self {
            FilterKind::I => 1.0,
            FilterKind::II => (n / (1.0 + epsilon * n)).sqrt(),
            FilterKind::III => n / (1.0 + epsilon * n),
        }
    }

    fn requires_epsilon(self) -> bool {
        !matches!(self, FilterKind::I)
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FilterKind::I => "I",
            FilterKind::II => "II",
            FilterKind::III => "III",
        })
    }
}

impl FromStr for FilterKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "I" | "i" | "1" => Ok(FilterKind::I),
            "II" | "ii" | "2" => Ok(FilterKind::II),
            "III" | "iii" | "3" => Ok(FilterKind::III),
            other => Err(format!("unknown filter kind {other:?} (expected I, II or III)")),
        }
    }
}

/// Immutable filter parameters: the gain family, the weighting matrix `A`,
/// the scalar `epsilon`, and the spectrum of the induced gain matrix.
#[derive(Debug, Clone, Copy)]
pub struct FilterConfig {
    kind: FilterKind,
    weighting: SymMatrix3,
    epsilon: f64,
    abar: SymMatrix3,
    lambda_min: f64,
    lambda_max: f64,
}

impl FilterConfig {
    pub fn new(kind: FilterKind, weighting: SymMatrix3, epsilon: f64) -> Result<Self> {
        if kind.requires_epsilon() && !(epsilon > 0.0) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                value: epsilon,
                constraint: "epsilon > 0 for state-dependent gains",
            });
        }
        let abar = weighting.abar()?;
        let eig = abar.eigen();
        Ok(Self {
            kind,
            weighting,
            epsilon,
            abar,
            lambda_min: eig.values[0],
            lambda_max: eig.values[2],
        })
    }

    /// Builds `A = sum_i rho_i r_i r_i^T` from weighted reference directions.
    /// This is the only supported way to configure the vector-measurement
    /// path: the identities it relies on require exactly this `A`.
    pub fn from_reference_vectors(
        kind: FilterKind,
        references: &[(Vec3, f64)],
        epsilon: f64,
    ) -> Result<Self> {
        Self::new(kind, SymMatrix3::weighted_outer_sum(references), epsilon)
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn weighting(&self) -> &SymMatrix3 {
        &self.weighting
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Induced gain matrix `1/2 (tr(A) I - A)`.
    pub fn abar(&self) -> &SymMatrix3 {
        &self.abar
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    /// Spectrum ratio `lambda_min / lambda_max` of the induced gain matrix.
    pub fn xi(&self) -> f64 {
        self.lambda_min / self.lambda_max
    }
}

/// Filter state: the current estimate, its timestamp, and the innovation
/// applied on the previous step (held as a fallback when noisy vector
/// measurements momentarily lose rank).
#[derive(Debug, Clone, Copy)]
pub struct FilterState {
    pub r_hat: RotationMatrix,
    pub t: f64,
    pub last_sigma: Vec3,
}

impl FilterState {
    pub fn new(r_hat: RotationMatrix) -> Self {
        Self {
            r_hat,
            t: 0.0,
            last_sigma: Vec3::zeros(),
        }
    }
}

/// Innovation `sigma = -k(|R_y Rhat^T|_I^2) psi(A R_y Rhat^T)`.
///
/// Vanishes exactly at zero error and at half-turns about eigenvectors of
/// the weighting matrix.
pub fn innovation(
    cfg: &FilterConfig,
    r_y: &RotationMatrix,
    r_hat: &RotationMatrix,
) -> Vec3 {
    let r_err = *r_y * r_hat.transpose();
    let k = cfg.kind.gain(r_err.dist_identity_sq(), cfg.epsilon);
    -k * psi(&(cfg.weighting.as_matrix() * r_err.matrix()))
}

/// One weighted vector observation: a known inertial reference direction,
/// its body-frame measurement, and a positive weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationPair {
    pub reference: Vec3,
    pub measured: Vec3,
    pub weight: f64,
}

/// A set of at least two weighted vector observations whose reference
/// directions are noncollinear.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorObservation {
    pairs: Vec<ObservationPair>,
    /// Indices of the first reference pair with a usable cross product;
    /// the distance formula is built from these two.
    primary: (usize, usize),
}

/// References whose normalized cross product is below this are collinear.
pub const COLLINEARITY_TOL: f64 = 1e-6;

impl VectorObservation {
    pub fn new(pairs: Vec<ObservationPair>) -> Result<Self> {
        if pairs.len() < 2 {
            return Err(Error::InvalidParameter {
                name: "observations",
                value: pairs.len() as f64,
                constraint: "at least two vector observations",
            });
        }
        for p in &pairs {
            if !(p.weight > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "weight",
                    value: p.weight,
                    constraint: "weights must be positive",
                });
            }
        }
        let mut best = 0.0f64;
        let mut primary = None;
        'outer: for i in 0..pairs.len() {
            for j in i + 1..pairs.len() {
                let cross = pairs[i]
                    .reference
                    .normalize()
                    .cross(&pairs[j].reference.normalize())
                    .norm();
                best = best.max(cross);
                if cross > COLLINEARITY_TOL {
                    primary = Some((i, j));
                    break 'outer;
                }
            }
        }
        match primary {
            Some(primary) => Ok(Self { pairs, primary }),
            None => Err(Error::DegenerateObservation { cross_norm: best }),
        }
    }

    pub fn pairs(&self) -> &[ObservationPair] {
        &self.pairs
    }

    /// The weighting matrix `sum_i rho_i r_i r_i^T` implied by the
    /// references.
    pub fn weighting_matrix(&self) -> SymMatrix3 {
        SymMatrix3::weighted_outer_sum(
            &self
                .pairs
                .iter()
                .map(|p| (p.reference, p.weight))
                .collect::<Vec<_>>(),
        )
    }

    /// Noise-free observations of the references seen from attitude `r`
    /// (body frame), i.e. `b_i = R^T r_i`.
    pub fn synthesize(references: &[(Vec3, f64)], r: &RotationMatrix) -> Result<Self> {
        Self::new(
            references
                .iter()
                .map(|(reference, weight)| ObservationPair {
                    reference: *reference,
                    measured: r.transpose() * *reference,
                    weight: *weight,
                })
                .collect(),
        )
    }
}

/// Direction of a measured vector; noise that collapses the measurement to
/// (near) zero length is degenerate, not NaN.
fn unit_direction(v: &Vec3) -> Result<Vec3> {
    let n = v.norm();
    if n <= 1e-9 {
        return Err(Error::DegenerateObservation { cross_norm: 0.0 });
    }
    Ok(v / n)
}

/// Orthonormal triad from two noncollinear unit directions.
fn triad(x: Vec3, y: Vec3) -> Result<[Vec3; 3]> {
    let cross = x.cross(&y);
    let n = cross.norm();
    if n <= COLLINEARITY_TOL {
        return Err(Error::DegenerateObservation { cross_norm: n });
    }
    let second = cross / n;
    Ok([x, second, x.cross(&second)])
}

/// Squared error distance `|R Rhat^T|_I^2` computed from the first two
/// noncollinear observation pairs, without reconstructing the attitude:
/// one eighth of the squared mismatch between the measured triad and the
/// estimate-mapped reference triad.
///
/// Measured vectors are normalized first; noisy inputs whose cross product
/// collapses produce a degenerate-observation error.
pub fn distance_sq_from_vectors(
    obs: &VectorObservation,
    r_hat: &RotationMatrix,
) -> Result<f64> {
    let (i, j) = obs.primary;
    let u = triad(
        obs.pairs[i].reference.normalize(),
        obs.pairs[j].reference.normalize(),
    )?;
    let w = triad(
        unit_direction(&obs.pairs[i].measured)?,
        unit_direction(&obs.pairs[j].measured)?,
    )?;
    let mut sum = 0.0;
    for k in 0..3 {
        sum += (w[k] - r_hat.transpose() * u[k]).norm_squared();
    }
    Ok((sum / 8.0).clamp(0.0, 1.0))
}

/// Innovation computed directly from vector measurements:
/// `sigma = -k * (1/2) Rhat sum_i rho_i (b_i x Rhat^T r_i)`,
/// with the gain evaluated through [`distance_sq_from_vectors`].
///
/// With noise-free measurements this equals [`innovation`] against the true
/// attitude. Measured vectors are rescaled to their reference's norm, which
/// undoes additive noise on the length without touching the direction. The
/// configured weighting matrix must match the observation geometry.
pub fn innovation_from_vectors(
    cfg: &FilterConfig,
    obs: &VectorObservation,
    r_hat: &RotationMatrix,
) -> Result<Vec3> {
    let defect = (cfg.weighting.as_matrix() - obs.weighting_matrix().as_matrix()).norm();
    if defect > 1e-9 {
        return Err(Error::WeightingMismatch { defect });
    }
    let dist_sq = distance_sq_from_vectors(obs, r_hat)?;
    let mut sum = Vec3::zeros();
    for p in obs.pairs() {
        let measured = unit_direction(&p.measured)? * p.reference.norm();
        sum += p.weight * measured.cross(&(r_hat.transpose() * p.reference));
    }
    let psi_vec = 0.5 * (*r_hat * sum);
    Ok(-cfg.kind.gain(dist_sq, cfg.epsilon) * psi_vec)
}

/// Attitude information available to a filter step.
#[derive(Debug, Clone)]
pub enum Measurement {
    /// A reconstructed (or true) attitude measurement `R_y`.
    Attitude(RotationMatrix),
    /// Raw weighted vector observations.
    Vectors(VectorObservation),
}

/// One discrete filter step over `[t, t + dt]`:
/// `Rhat <- Rhat exp([omega_hat dt]x)` with
/// `omega_hat = omega_y - Rhat^T sigma` held constant over the interval.
///
/// The update is the exact flow of the piecewise-constant dynamics, so the
/// estimate never leaves SO(3). If noisy vector measurements are momentarily
/// collinear the previous innovation is reused for this sample.
pub fn filter_step(
    cfg: &FilterConfig,
    state: &FilterState,
    omega_y: Vec3,
    measurement: &Measurement,
    dt: f64,
) -> Result<FilterState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter {
            name: "dt",
            value: dt,
            constraint: "dt > 0",
        });
    }
    let sigma = match measurement {
        Measurement::Attitude(r_y) => innovation(cfg, r_y, &state.r_hat),
        Measurement::Vectors(obs) => match innovation_from_vectors(cfg, obs, &state.r_hat) {
            Ok(sigma) => sigma,
            Err(Error::DegenerateObservation { .. }) => state.last_sigma,
            Err(e) => return Err(e),
        },
    };
    let omega_hat = omega_y - state.r_hat.transpose() * sigma;
    Ok(FilterState {
        r_hat: state.r_hat * RotationMatrix::exp(omega_hat * dt),
        t: state.t + dt,
        last_sigma: sigma,
    })
}
