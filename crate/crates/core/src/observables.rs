//! Transport observables computed from state vectors.

use serde::{Deserialize, Serialize};

use crate::dynamics::StateVector;
use crate::error::{QleError, Result};
use crate::generator::{DriveSpec, MediumSpec, GROUP_VELOCITY};

/// Transmission, reflection and site populations at one time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportPoint {
    pub transmission: f64,
    pub reflection: f64,
    pub excitations: Vec<f64>,
    /// `None` for a steady state.
    pub time: Option<f64>,
}

/// Power-law fit `T ∝ N^-κ` in log-log space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub kappa: f64,
    pub ns: Vec<usize>,
    pub ts: Vec<f64>,
    /// Root-mean-square residual of `log T`.
    pub rms: f64,
}

/// Straight-line fit of `log T` against `N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Decay rate per site, `T ∝ exp(-rate N)`.
    pub rate: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

fn check_aligned(s: &StateVector, spec: &MediumSpec) -> Result<()> {
    if s.n() != spec.n() {
        return Err(QleError::LengthMismatch { expected: spec.n(), got: s.n() });
    }
    Ok(())
}

fn incident(drive: &DriveSpec) -> Result<f64> {
    if !(drive.intensity > 0.0) {
        return Err(QleError::InvalidParameter {
            name: "intensity",
            value: drive.intensity,
            reason: "transport coefficients need a positive incident intensity",
        });
    }
    Ok(GROUP_VELOCITY * drive.intensity)
}

/// `T = 2Γ_R S_NN / (v_g I_in)`.
pub fn transmission(s: &StateVector, spec: &MediumSpec, drive: &DriveSpec) -> Result<f64> {
    check_aligned(s, spec)?;
    let flux = incident(drive)?;
    let snn = s.population(&[spec.n()]).expect("site N exists");
    Ok(2.0 * spec.gamma_r * snn / flux)
}

/// `R = 1 + 2Ω_L Im(S_1) / (v_g I_in) + 2Γ_L S_11 / (v_g I_in)`.
pub fn reflection(s: &StateVector, spec: &MediumSpec, drive: &DriveSpec) -> Result<f64> {
    check_aligned(s, spec)?;
    let flux = incident(drive)?;
    let rabi = drive.rabi(spec.gamma_l)?;
    let s1 = s.values()[s.map().single_site(1, crate::spin_ops::LocalOp::Lower).expect("site 1 exists")];
    let s11 = s.population(&[1]).expect("site 1 exists");
    Ok(1.0 + 2.0 * rabi * s1.im / flux + 2.0 * spec.gamma_l * s11 / flux)
}

/// Excitation probability `S_ii` of every site.
pub fn excitation_profile(s: &StateVector) -> Vec<f64> {
    (1..=s.n()).map(|i| s.population(&[i]).expect("site exists")).collect()
}

/// Joint excitation probability of all `sites`.
pub fn equal_time_correlation(s: &StateVector, sites: &[usize]) -> Result<f64> {
    if sites.is_empty() {
        return Err(QleError::InvalidParameter { name: "sites", value: 0.0, reason: "need at least one site" });
    }
    s.population(sites).ok_or(QleError::InvalidParameter {
        name: "sites",
        value: sites.iter().copied().max().unwrap_or(0) as f64,
        reason: "site index outside the chain",
    })
}

pub fn transport_point(s: &StateVector, spec: &MediumSpec, drive: &DriveSpec) -> Result<TransportPoint> {
    Ok(TransportPoint {
        transmission: transmission(s, spec, drive)?,
        reflection: reflection(s, spec, drive)?,
        excitations: excitation_profile(s),
        time: s.time().is_finite().then_some(s.time()),
    })
}

/// Least-squares line `y = a + b x`; returns `(a, b, residuals)`.
fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64, Vec<f64>) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let res = x.iter().zip(y).map(|(a, b)| b - (intercept + slope * a)).collect();
    (intercept, slope, res)
}

fn check_points(points: &[(usize, f64)]) -> Result<()> {
    if points.len() < 3 {
        return Err(QleError::InvalidParameter {
            name: "points",
            value: points.len() as f64,
            reason: "need at least three chain lengths",
        });
    }
    if points.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(QleError::InvalidParameter {
            name: "points",
            value: f64::NAN,
            reason: "chain lengths must be strictly increasing",
        });
    }
    if let Some(&(_, t)) = points.iter().find(|p| !(p.1 > 0.0 && p.1.is_finite())) {
        return Err(QleError::InvalidParameter { name: "transmission", value: t, reason: "must be positive" });
    }
    Ok(())
}

/// `κ = -d log T / d log N` from a least-squares fit.
pub fn scaling_exponent(points: &[(usize, f64)]) -> Result<ScalingFit> {
    check_points(points)?;
    let x: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (_, slope, res) = line_fit(&x, &y);
    let rms = (res.iter().map(|r| r * r).sum::<f64>() / res.len() as f64).sqrt();
    Ok(ScalingFit {
        kappa: -slope,
        ns: points.iter().map(|p| p.0).collect(),
        ts: points.iter().map(|p| p.1).collect(),
        rms,
    })
}

/// Fit of `log T = intercept - rate N`, with its coefficient of determination.
pub fn exponential_decay_fit(points: &[(usize, f64)]) -> Result<DecayFit> {
    check_points(points)?;
    let x: Vec<f64> = points.iter().map(|p| p.0 as f64).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (intercept, slope, res) = line_fit(&x, &y);
    let my = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let ss_res: f64 = res.iter().map(|r| r * r).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(DecayFit { rate: -slope, intercept, r_squared })
}
