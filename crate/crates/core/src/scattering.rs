//! Exact single-photon transport through the chain. The one-excitation
//! amplitudes solve an `N x N` linear system; `Jz` plays no role.

use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{QleError, Result};
use crate::generator::{CouplingRange, MediumSpec, GROUP_VELOCITY};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterResult {
    pub t: C64,
    pub r: C64,
    /// Excited-atom amplitudes `e_k^m`, site 1 first.
    pub e_k: Vec<C64>,
}

impl ScatterResult {
    pub fn transmission(&self) -> f64 {
        self.t.norm_sqr()
    }

    pub fn reflection(&self) -> f64 {
        self.r.norm_sqr()
    }
}

/// Transmission and reflection amplitudes for a photon of frequency
/// `omega_p` incident from the left. Long-range media use the exact
/// `2Jx/|m-n|^α` hopping.
pub fn single_photon(spec: &MediumSpec, omega_p: f64) -> Result<ScatterResult> {
    spec.validate()?;
    let n = spec.n();
    let vg = GROUP_VELOCITY;
    let i = C64::new(0.0, 1.0);
    let diag: Vec<C64> = (0..n)
        .map(|m| {
            let mut d = C64::new(spec.omega[m] - vg * (omega_p / vg), 0.0);
            if m == 0 {
                d -= i * spec.gamma_l;
            }
            if m == n - 1 {
                d -= i * spec.gamma_r;
            }
            d
        })
        .collect();
    let mut rhs = vec![C64::new(0.0, 0.0); n];
    rhs[0] = C64::new(-(2.0 * vg * spec.gamma_l).sqrt(), 0.0);

    let e_k = match spec.range {
        CouplingRange::NearestNeighbor => solve_tridiagonal(&diag, 2.0 * spec.jx, &rhs),
        CouplingRange::LongRange { alpha, .. } => solve_longrange(&diag, spec.jx, alpha, &rhs),
    }
    .ok_or(QleError::SingularScattering { omega_p })?;
    if e_k.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(QleError::SingularScattering { omega_p });
    }
    let t = -i * (2.0 * spec.gamma_r / vg).sqrt() * e_k[n - 1];
    let r = C64::new(1.0, 0.0) - i * (2.0 * spec.gamma_l / vg).sqrt() * e_k[0];
    Ok(ScatterResult { t, r, e_k })
}

/// Thomas elimination for a symmetric tridiagonal system with constant
/// off-diagonal `off`.
fn solve_tridiagonal(diag: &[C64], off: f64, rhs: &[C64]) -> Option<Vec<C64>> {
    let n = diag.len();
    if off == 0.0 {
        // decoupled sites: undriven ones carry no amplitude even when resonant
        return diag
            .iter()
            .zip(rhs)
            .map(|(d, r)| {
                if r.norm() == 0.0 {
                    Some(C64::new(0.0, 0.0))
                } else if d.norm() == 0.0 {
                    None
                } else {
                    Some(r / d)
                }
            })
            .collect();
    }
    let off = C64::new(off, 0.0);
    let mut c = vec![C64::new(0.0, 0.0); n];
    let mut d = vec![C64::new(0.0, 0.0); n];
    let mut denom = diag[0];
    if denom.norm() == 0.0 {
        return None;
    }
    c[0] = off / denom;
    d[0] = rhs[0] / denom;
    for m in 1..n {
        denom = diag[m] - off * c[m - 1];
        if denom.norm() == 0.0 {
            return None;
        }
        c[m] = off / denom;
        d[m] = (rhs[m] - off * d[m - 1]) / denom;
    }
    let mut x = d;
    for m in (0..n - 1).rev() {
        let next = x[m + 1];
        x[m] -= c[m] * next;
    }
    Some(x)
}

fn solve_longrange(diag: &[C64], jx: f64, alpha: f64, rhs: &[C64]) -> Option<Vec<C64>> {
    let n = diag.len();
    let z = Mat::<C64>::from_fn(n, n, |a, b| {
        if a == b {
            diag[a]
        } else {
            C64::new(2.0 * jx / (a.abs_diff(b) as f64).powf(alpha), 0.0)
        }
    });
    let b = Mat::<C64>::from_fn(n, 1, |a, _| rhs[a]);
    let x = z.partial_piv_lu().solve(&b);
    Some((0..n).map(|a| x[(a, 0)]).collect())
}

/// Closed-form two-atom transmission amplitude
/// `t₂ = -4iJx√(Γ_LΓ_R) / [(ω_p-ω₁+iΓ_L)(ω_p-ω₂+iΓ_R) - 4Jx²]`.
pub fn t2_analytic(omega_p: f64, omega1: f64, omega2: f64, jx: f64, gamma_l: f64, gamma_r: f64) -> C64 {
    let i = C64::new(0.0, 1.0);
    let num = -4.0 * i * jx * (gamma_l * gamma_r).sqrt();
    let den = (omega_p - omega1 + i * gamma_l) * (omega_p - omega2 + i * gamma_r) - 4.0 * jx * jx;
    num / den
}
