use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::StateVector;
use crate::error::{QleError, Result};
use crate::generator::Generator;

// Dormand–Prince 5(4) tableau; the system is autonomous, so the nodes are unused
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B_HAT: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    /// Local error tolerance, used both relative and absolute.
    pub tol: f64,
    /// Initial step; chosen from the time scale of `Z` when `None`.
    pub first_step: Option<f64>,
    /// Steps below this are reported as underflow.
    pub min_step: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { tol: 1e-9, first_step: None, min_step: 1e-12 }
    }
}

/// States sampled on a uniform output grid.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&StateVector> {
        self.states.last()
    }
}

struct Stepper<'a> {
    gen: &'a Generator,
    tol: f64,
    min_step: f64,
    k: Vec<Vec<C64>>,
    stage: Vec<C64>,
    next: Vec<C64>,
}

impl<'a> Stepper<'a> {
    fn new(gen: &'a Generator, opts: &EvolveOptions) -> Self {
        let dim = gen.dim();
        Self {
            gen,
            tol: opts.tol,
            min_step: opts.min_step,
            k: vec![vec![C64::new(0.0, 0.0); dim]; 7],
            stage: vec![C64::new(0.0, 0.0); dim],
            next: vec![C64::new(0.0, 0.0); dim],
        }
    }

    fn initial_step(&self, opts: &EvolveOptions) -> f64 {
        if let Some(h) = opts.first_step {
            return h;
        }
        // inverse of the largest row sum bounds the fastest rate
        let z = self.gen.z();
        let rate = (0..z.nrows()).map(|i| z.row(i).1.iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max);
        if rate > 0.0 {
            0.1 / rate
        } else {
            1.0
        }
    }

    /// Attempts one step of size `h` from `y`. On success `y` holds the new
    /// state, `k[0]` its derivative (FSAL), and the error ratio is returned.
    fn attempt(&mut self, y: &mut [C64], h: f64) -> f64 {
        let dim = y.len();
        for s in 1..7 {
            for i in 0..dim {
                let mut acc = y[i];
                for (j, &a) in A[s][..s].iter().enumerate() {
                    if a != 0.0 {
                        acc += self.k[j][i] * (h * a);
                    }
                }
                self.stage[i] = acc;
            }
            let (head, tail) = self.k.split_at_mut(s);
            let _ = head;
            self.gen.rhs_into(&self.stage, &mut tail[0]);
        }
        // stage 6 is the 5th-order solution (FSAL)
        self.next.copy_from_slice(&self.stage);
        let mut err = 0.0f64;
        for i in 0..dim {
            let mut e = C64::new(0.0, 0.0);
            for s in 0..7 {
                let w = B[s] - B_HAT[s];
                if w != 0.0 {
                    e += self.k[s][i] * (h * w);
                }
            }
            let scale = self.tol * (1.0 + y[i].norm().max(self.next[i].norm()));
            err = err.max(e.norm() / scale);
        }
        err
    }

    /// Advances `y` from `t` to exactly `t_target`, adapting `h`.
    fn advance(&mut self, y: &mut Vec<C64>, t: &mut f64, t_target: f64, h: &mut f64) -> Result<()> {
        self.gen.rhs_into(y, &mut self.k[0]);
        while *t < t_target {
            let remaining = t_target - *t;
            let last = *h >= remaining;
            let step = if last { remaining } else { *h };
            let err = self.attempt(y, step);
            if err <= 1.0 {
                *t = if last { t_target } else { *t + step };
                std::mem::swap(y, &mut self.next);
                let (first, rest) = self.k.split_at_mut(1);
                first[0].copy_from_slice(&rest[5]);
                let factor =
                    if err == 0.0 { MAX_FACTOR } else { (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR) };
                if !last || factor < 1.0 {
                    *h = step * factor;
                }
            } else {
                *h = step * (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
                if *h < self.min_step {
                    return Err(QleError::StepSizeUnderflow { time: *t });
                }
            }
        }
        Ok(())
    }
}

/// Integrates from `s0` over `[t0, t0 + t_end]` and samples every `dt_out`.
pub fn evolve(gen: &Generator, s0: &StateVector, t_end: f64, dt_out: f64) -> Result<Trajectory> {
    evolve_with(gen, s0, t_end, dt_out, &EvolveOptions::default())
}

pub fn evolve_with(
    gen: &Generator,
    s0: &StateVector,
    t_end: f64,
    dt_out: f64,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    if s0.values().len() != gen.dim() {
        return Err(QleError::LengthMismatch { expected: gen.dim(), got: s0.values().len() });
    }
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(QleError::InvalidParameter {
            name: "t_end",
            value: t_end,
            reason: "must be finite and non-negative",
        });
    }
    if !(dt_out.is_finite() && dt_out > 0.0) {
        return Err(QleError::InvalidParameter { name: "dt_out", value: dt_out, reason: "must be positive" });
    }
    let t0 = if s0.time().is_finite() { s0.time() } else { 0.0 };
    let mut times = vec![t0];
    let mut states = vec![s0.clone().with_time(t0)];
    if t_end == 0.0 {
        return Ok(Trajectory { times, states });
    }
    let samples = (t_end / dt_out - 1e-9).ceil() as usize;
    let mut stepper = Stepper::new(gen, opts);
    let mut h = stepper.initial_step(opts);
    let mut y = s0.values().to_vec();
    let mut t = t0;
    for k in 1..=samples {
        let target = t0 + (k as f64 * dt_out).min(t_end);
        stepper.advance(&mut y, &mut t, target, &mut h)?;
        times.push(target);
        states.push(StateVector::new(gen.shared_map(), y.clone(), target)?);
    }
    Ok(Trajectory { times, states })
}

/// Outcome of [`relax`].
#[derive(Clone, Debug)]
pub struct Relaxation {
    pub state: StateVector,
    /// `‖dS/dt‖∞` at the returned state.
    pub rate: f64,
    pub converged: bool,
}

/// Integrates until `‖dS/dt‖∞ < 1e-10 Ω_L` or `t_max` is reached.
pub fn relax(gen: &Generator, s0: &StateVector, t_max: f64, opts: &EvolveOptions) -> Result<Relaxation> {
    let threshold = 1e-10 * gen.rabi();
    let t0 = if s0.time().is_finite() { s0.time() } else { 0.0 };
    let (values, t, rate, converged) =
        relax_until(gen, s0.values().to_vec(), t0, t_max, opts, |d| inf_norm(d) <= threshold)?;
    let state = StateVector::new(gen.shared_map(), values, t)?;
    Ok(Relaxation { state, rate, converged })
}

fn inf_norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Steps in chunks until `done(dS/dt)` holds or `t_max` has elapsed.
/// Returns `(state, time, ‖dS/dt‖∞, converged)`.
pub(crate) fn relax_until(
    gen: &Generator,
    mut y: Vec<C64>,
    mut t: f64,
    t_max: f64,
    opts: &EvolveOptions,
    done: impl Fn(&[C64]) -> bool,
) -> Result<(Vec<C64>, f64, f64, bool)> {
    let mut stepper = Stepper::new(gen, opts);
    let mut h = stepper.initial_step(opts);
    let t_stop = t + t_max;
    let chunk = 10.0;
    let mut deriv = vec![C64::new(0.0, 0.0); y.len()];
    loop {
        gen.rhs_into(&y, &mut deriv);
        let converged = done(&deriv);
        if converged || t >= t_stop {
            return Ok((y, t, inf_norm(&deriv), converged));
        }
        let target = (t + chunk).min(t_stop);
        stepper.advance(&mut y, &mut t, target, &mut h)?;
    }
}
