//! Quasi-linear Gaussian capacity: noise whitening, singular value
//! decomposition, and water-filling over the resulting parallel channels.
//!
//! The per-subchannel capacity term is `½ log₂(1 + σ_i P_i)`, with the
//! singular value σ_i entering linearly (not squared). Unit noise after
//! whitening absorbs the variance. This convention is isolated in
//! [`subchannel_bits`] so it is applied identically everywhere.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{invalid_param, Error, Result};

/// Noise covariance eigenvalues below this mean a noiseless direction.
pub const NOISE_EIGENVALUE_FLOOR: f64 = 1e-12;
/// Singular values below this are treated as zero-gain directions.
pub const SINGULAR_VALUE_CUTOFF: f64 = 1e-10;

/// Capacity in bits of one parallel Gaussian subchannel.
#[inline]
pub fn subchannel_bits(sigma: f64, power: f64) -> f64 {
    0.5 * (1.0 + sigma * power).log2()
}

/// `S = T A + Z` with `Z ~ N(0, K_s)` and `E[A²] <= P`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearGaussianChannel {
    /// Sensor-dimension × action-dimension, row-major.
    pub transform: Vec<Vec<f64>>,
    /// Sensor-dimension × sensor-dimension noise covariance.
    pub noise_cov: Vec<Vec<f64>>,
    pub power: f64,
}

impl LinearGaussianChannel {
    pub fn new(transform: DMatrix<f64>, noise_cov: DMatrix<f64>, power: f64) -> Result<Self> {
        let ch = Self {
            transform: to_rows(&transform),
            noise_cov: to_rows(&noise_cov),
            power,
        };
        ch.validate()?;
        Ok(ch)
    }

    pub fn transform_matrix(&self) -> Result<DMatrix<f64>> {
        from_rows(&self.transform, "transform")
    }

    pub fn noise_matrix(&self) -> Result<DMatrix<f64>> {
        from_rows(&self.noise_cov, "noise_cov")
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.transform_matrix()?;
        let k = self.noise_matrix()?;
        if k.nrows() != k.ncols() || k.nrows() != t.nrows() {
            return Err(invalid_param(
                "noise_cov",
                format!(
                    "must be {n}x{n} to match the transform's {n} rows, got {}x{}",
                    k.nrows(),
                    k.ncols(),
                    n = t.nrows()
                ),
            ));
        }
        if (&k - k.transpose()).amax() > 1e-12 {
            return Err(invalid_param("noise_cov", "not symmetric within 1e-12"));
        }
        let min_eig = SymmetricEigen::new(k).eigenvalues.min();
        if !(min_eig > 0.0) {
            return Err(invalid_param(
                "noise_cov",
                format!("not positive definite (smallest eigenvalue {min_eig:e})"),
            ));
        }
        if !(self.power > 0.0) || !self.power.is_finite() {
            return Err(invalid_param("power", format!("must be > 0, got {}", self.power)));
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let ch: Self = serde_json::from_str(s)?;
        ch.validate()?;
        Ok(ch)
    }
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn from_rows(rows: &[Vec<f64>], name: &'static str) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 {
        return Err(invalid_param(name, "matrix must be non-empty"));
    }
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(invalid_param(name, "rows have differing lengths"));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(invalid_param(name, "entries must be finite"));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

/// Maps `S = T A + Z`, `Z ~ N(0, K_s)` to an equivalent channel with
/// isotropic unit noise by applying `K_s^{-1/2}`.
///
/// The symmetric inverse square root is used; it differs from `Σ^{-1/2} Uᵀ`
/// only by an orthogonal factor, which leaves mutual information and the
/// singular values unchanged.
pub fn whiten(transform: &DMatrix<f64>, noise_cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if noise_cov.nrows() != noise_cov.ncols() || noise_cov.nrows() != transform.nrows() {
        return Err(Error::DimensionMismatch {
            expected: transform.nrows(),
            actual: noise_cov.nrows(),
        });
    }
    let sym = (noise_cov + noise_cov.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let min = eig.eigenvalues.min();
    if !(min >= NOISE_EIGENVALUE_FLOOR) {
        return Err(Error::NoiselessSubchannel(min));
    }
    let inv_sqrt = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
    let u = &eig.eigenvectors;
    let k_inv_sqrt = u * DMatrix::from_diagonal(&inv_sqrt) * u.transpose();
    Ok(k_inv_sqrt * transform)
}

/// Optimal power split over parallel subchannels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterFillingResult {
    pub capacity_bits: f64,
    /// One entry per input singular value, in input order.
    pub allocations: Vec<f64>,
    /// `None` when no subchannel has positive gain.
    pub water_level: Option<f64>,
    /// Set when every gain is zero and the power was parked on channel 0.
    pub degenerate: bool,
}

/// Maximizes `Σ ½ log₂(1 + σ_i P_i)` subject to `Σ P_i = P`, `P_i >= 0`.
///
/// Power goes first to the strongest subchannel; the level
/// `μ = (P + Σ_{active} 1/σ_i) / k` is raised until the next channel's
/// floor `1/σ` is no longer below it, and each active channel gets
/// `μ - 1/σ_i`.
pub fn water_filling(singular_values: &[f64], power: f64) -> Result<WaterFillingResult> {
    if singular_values.is_empty() {
        return Err(invalid_param("singular_values", "need at least one subchannel"));
    }
    if let Some(s) = singular_values.iter().find(|s| !(**s >= 0.0) || !s.is_finite()) {
        return Err(invalid_param("singular_values", format!("must be finite and >= 0, got {s}")));
    }
    if !(power > 0.0) || !power.is_finite() {
        return Err(invalid_param("power", format!("must be > 0, got {power}")));
    }

    let mut order: Vec<usize> = (0..singular_values.len())
        .filter(|&i| singular_values[i] >= SINGULAR_VALUE_CUTOFF)
        .collect();
    let mut allocations = vec![0.0; singular_values.len()];
    if order.is_empty() {
        allocations[0] = power;
        return Ok(WaterFillingResult {
            capacity_bits: 0.0,
            allocations,
            water_level: None,
            degenerate: true,
        });
    }
    // strongest first; index breaks ties so the result is order-stable
    order.sort_by(|&a, &b| {
        singular_values[b]
            .total_cmp(&singular_values[a])
            .then(a.cmp(&b))
    });

    let floors: Vec<f64> = order.iter().map(|&i| 1.0 / singular_values[i]).collect();
    let mut active = 1;
    let mut floor_sum = floors[0];
    let mut level = power + floors[0];
    for k in 1..floors.len() {
        let candidate = (power + floor_sum + floors[k]) / (k + 1) as f64;
        if floors[k] < candidate {
            active = k + 1;
            floor_sum += floors[k];
            level = candidate;
        } else {
            break;
        }
    }

    let mut capacity = 0.0;
    for (rank, &i) in order.iter().take(active).enumerate() {
        let p = (level - floors[rank]).max(0.0);
        allocations[i] = p;
        capacity += subchannel_bits(singular_values[i], p);
    }
    Ok(WaterFillingResult {
        capacity_bits: capacity,
        allocations,
        water_level: Some(level),
        degenerate: false,
    })
}

/// Result of a quasi-linear Gaussian capacity computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QlgResult {
    pub bits: f64,
    pub water_filling: WaterFillingResult,
    /// Singular values of the whitened transform, in decreasing order.
    pub singular_values: Vec<f64>,
}

/// Capacity of a linear Gaussian channel under a total power budget.
pub fn qlg_empowerment(channel: &LinearGaussianChannel) -> Result<QlgResult> {
    channel.validate()?;
    qlg_from_matrices(
        &channel.transform_matrix()?,
        &channel.noise_matrix()?,
        channel.power,
    )
}

/// [`qlg_empowerment`] without constructing a [`LinearGaussianChannel`].
pub fn qlg_from_matrices(
    transform: &DMatrix<f64>,
    noise_cov: &DMatrix<f64>,
    power: f64,
) -> Result<QlgResult> {
    let white = whiten(transform, noise_cov)?;
    let mut singular_values: Vec<f64> = white.singular_values().iter().copied().collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    let water_filling = water_filling(&singular_values, power)?;
    Ok(QlgResult {
        bits: water_filling.capacity_bits,
        water_filling,
        singular_values,
    })
}
