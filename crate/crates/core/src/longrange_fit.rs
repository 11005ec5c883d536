//! Sum-of-exponentials approximation of a power-law coupling,
//! `1/r^u ≈ Σ_k γ_k δ_k^(r-1)` for `r = 1..=rmax`, fitted with
//! Levenberg–Marquardt.

use faer::linalg::solvers::{Solve, SolveLstsq};
use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{QleError, Result};

/// Decay bases are kept inside `[DELTA_MIN, DELTA_MAX]`.
pub const DELTA_MIN: f64 = 1e-12;
pub const DELTA_MAX: f64 = 1.0 - 1e-12;

const MAX_ITERATIONS: usize = 2000;
const INITIAL_DAMPING: f64 = 1e-3;
const DAMPING_LIMIT: f64 = 1e16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpFit {
    u: f64,
    gamma: Vec<f64>,
    delta: Vec<f64>,
    rmax: usize,
    residual: f64,
    converged: bool,
    iterations: usize,
}

impl ExpFit {
    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn terms(&self) -> usize {
        self.gamma.len()
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    pub fn rmax(&self) -> usize {
        self.rmax
    }

    /// Objective value `Σ_r [Σ_k γ_k δ_k^(r-1) - r^-u]²`.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// False when the iteration budget ran out; the best iterate is still
    /// returned.
    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Approximant at separation `r ≥ 1`.
    pub fn eval(&self, r: usize) -> f64 {
        model(&self.gamma, &self.delta, r)
    }

    pub fn max_abs_error(&self) -> f64 {
        (1..=self.rmax).map(|r| (self.eval(r) - target(self.u, r)).abs()).fold(0.0, f64::max)
    }

    /// Same fit with terms ordered by decreasing decay base.
    pub fn canonical(&self) -> ExpFit {
        let mut order: Vec<usize> = (0..self.terms()).collect();
        order.sort_by(|&a, &b| self.delta[b].total_cmp(&self.delta[a]));
        ExpFit {
            gamma: order.iter().map(|&i| self.gamma[i]).collect(),
            delta: order.iter().map(|&i| self.delta[i]).collect(),
            ..self.clone()
        }
    }

    /// A fit with explicit coefficients, e.g. for exact single-exponential
    /// couplings.
    pub fn from_parts(u: f64, gamma: Vec<f64>, delta: Vec<f64>, rmax: usize) -> Result<Self> {
        if gamma.len() != delta.len() {
            return Err(QleError::LengthMismatch { expected: gamma.len(), got: delta.len() });
        }
        let residual = objective(u, rmax, &gamma, &delta);
        Ok(Self { u, gamma, delta, rmax, residual, converged: true, iterations: 0 })
    }
}

fn target(u: f64, r: usize) -> f64 {
    (r as f64).powf(-u)
}

fn model(gamma: &[f64], delta: &[f64], r: usize) -> f64 {
    gamma.iter().zip(delta).map(|(g, d)| g * d.powi(r as i32 - 1)).sum()
}

fn objective(u: f64, rmax: usize, gamma: &[f64], delta: &[f64]) -> f64 {
    (1..=rmax).map(|r| (model(gamma, delta, r) - target(u, r)).powi(2)).sum()
}

/// Geometrically spaced starting bases strictly inside (0.05, 0.95).
fn initial_deltas(terms: usize) -> Vec<f64> {
    let ratio = 0.95f64 / 0.05;
    (1..=terms).map(|k| 0.05 * ratio.powf(k as f64 / (terms + 1) as f64)).collect()
}

/// Linear least-squares amplitudes for fixed decay bases.
fn linear_amplitudes(u: f64, rmax: usize, delta: &[f64]) -> Vec<f64> {
    let v = Mat::<f64>::from_fn(rmax, delta.len(), |r, k| delta[k].powi(r as i32));
    let y = Mat::<f64>::from_fn(rmax, 1, |r, _| target(u, r + 1));
    let sol = v.qr().solve_lstsq(&y);
    (0..delta.len()).map(|k| sol[(k, 0)]).collect()
}

struct LmOutcome {
    gamma: Vec<f64>,
    delta: Vec<f64>,
    cost: f64,
    converged: bool,
    iterations: usize,
}

fn levenberg_marquardt(u: f64, rmax: usize, mut gamma: Vec<f64>, mut delta: Vec<f64>) -> LmOutcome {
    let l = gamma.len();
    let p = 2 * l;
    let mut cost = objective(u, rmax, &gamma, &delta);
    let mut damping = INITIAL_DAMPING;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        // Jacobian of the residuals, columns (γ_1..γ_L, δ_1..δ_L)
        let mut jtj = Mat::<f64>::zeros(p, p);
        let mut grad = Mat::<f64>::zeros(p, 1);
        let mut row = vec![0.0; p];
        for r in 1..=rmax {
            let res = model(&gamma, &delta, r) - target(u, r);
            for k in 0..l {
                row[k] = delta[k].powi(r as i32 - 1);
                row[l + k] = if r >= 2 { gamma[k] * (r - 1) as f64 * delta[k].powi(r as i32 - 2) } else { 0.0 };
            }
            for a in 0..p {
                grad[(a, 0)] += row[a] * res;
                for b in 0..p {
                    jtj[(a, b)] += row[a] * row[b];
                }
            }
        }
        let gmax = (0..p).map(|a| grad[(a, 0)].abs()).fold(0.0, f64::max);
        if gmax <= 1e-15 * (1.0 + cost.sqrt()) || cost < 1e-30 {
            converged = true;
            break;
        }
        let dmax = (0..p).map(|a| jtj[(a, a)]).fold(0.0, f64::max);
        let floor = 1e-12 * dmax.max(f64::MIN_POSITIVE);

        let mut accepted = false;
        while damping <= DAMPING_LIMIT {
            let mut lhs = jtj.clone();
            for a in 0..p {
                lhs[(a, a)] += damping * jtj[(a, a)].max(floor);
            }
            let step = lhs.partial_piv_lu().solve(&grad);
            let trial_gamma: Vec<f64> = (0..l).map(|k| gamma[k] - step[(k, 0)]).collect();
            let trial_delta: Vec<f64> =
                (0..l).map(|k| (delta[k] - step[(l + k, 0)]).clamp(DELTA_MIN, DELTA_MAX)).collect();
            let trial_cost = objective(u, rmax, &trial_gamma, &trial_delta);
            if trial_cost.is_finite() && trial_cost < cost {
                let decrease = cost - trial_cost;
                gamma = trial_gamma;
                delta = trial_delta;
                cost = trial_cost;
                damping = (damping / 10.0).max(1e-15);
                accepted = true;
                if decrease <= 1e-15 * cost {
                    converged = true;
                }
                break;
            }
            damping *= 10.0;
        }
        if !accepted {
            // no descent direction at any damping: stationary up to rounding
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }
    LmOutcome { gamma, delta, cost, converged, iterations }
}

/// Fits `terms` exponentials to `1/r^u` over `r = 1..=rmax`.
///
/// Deterministic: each term count `l = 1..=terms` starts from geometric decay
/// bases with least-squares amplitudes, and is also warm-started from the
/// `l - 1` solution with one extra zero-amplitude term. The better of the two
/// is kept, so the residual never increases with `terms`.
pub fn fit_powerlaw(u: f64, terms: usize, rmax: usize) -> Result<ExpFit> {
    if !(u.is_finite() && u >= 0.0) {
        return Err(QleError::InvalidParameter { name: "u", value: u, reason: "must be a non-negative exponent" });
    }
    if terms == 0 {
        return Err(QleError::InvalidParameter { name: "terms", value: 0.0, reason: "need at least one exponential" });
    }
    if rmax < terms {
        return Err(QleError::InvalidParameter {
            name: "rmax",
            value: rmax as f64,
            reason: "fit range must be at least the number of terms",
        });
    }

    let mut best: Option<LmOutcome> = None;
    for l in 1..=terms {
        let delta0 = initial_deltas(l);
        let gamma0 = linear_amplitudes(u, rmax, &delta0);
        let mut outcome = levenberg_marquardt(u, rmax, gamma0, delta0);
        if let Some(prev) = &best {
            let mut gamma = prev.gamma.clone();
            let mut delta = prev.delta.clone();
            gamma.push(0.0);
            delta.push(0.5);
            let warm = levenberg_marquardt(u, rmax, gamma, delta);
            if warm.cost < outcome.cost {
                outcome = warm;
            }
        }
        best = Some(outcome);
    }
    let best = best.expect("terms >= 1");
    let fit = ExpFit {
        u,
        gamma: best.gamma,
        delta: best.delta,
        rmax,
        residual: best.cost,
        converged: best.converged,
        iterations: best.iterations,
    };
    Ok(fit.canonical())
}
