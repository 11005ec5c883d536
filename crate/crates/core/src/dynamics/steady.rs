use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::precond::NoJumpPreconditioner;
use super::StateVector;
use crate::error::{QleError, Result};
use crate::generator::Generator;

const ZERO: C64 = C64::new(0.0, 0.0);
const REFINEMENT_STEPS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SteadyBackend {
    /// Sparse LU with partial pivoting.
    Direct,
    /// Restarted GMRES, right-preconditioned by the exact inverse of the
    /// generator without quantum jumps. Memory stays at a few Krylov vectors,
    /// so this handles chains whose LU factors do not fit in memory.
    Gmres { restart: usize, max_iter: usize, tol: f64 },
    /// GMRES with default settings.
    Auto,
}

/// Largest dimension for which a failed iterative solve falls back to sparse
/// LU (`N = 7`). The factors of larger generators do not fit in a few GB.
pub const DIRECT_MAX_DIM: usize = 16383;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteadyOptions {
    pub backend: SteadyBackend,
    /// Required `‖Z S + Ω‖ / ‖Ω‖`.
    pub residual_tol: f64,
    /// Retry with the direct solver when an iterative backend fails and the
    /// dimension is at most [`DIRECT_MAX_DIM`].
    pub fallback: bool,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        Self { backend: SteadyBackend::Auto, residual_tol: 1e-10, fallback: true }
    }
}

/// Solves `Z S = -Ω`, factorizing directly when the chain is small enough.
pub fn steady_state(gen: &Generator) -> Result<StateVector> {
    steady_state_with(gen, &SteadyOptions::default())
}

pub fn steady_state_with(gen: &Generator, opts: &SteadyOptions) -> Result<StateVector> {
    let dim = gen.dim();
    let omega = gen.omega();
    let norm_omega = norm(omega);
    if norm_omega == 0.0 {
        return StateVector::new(gen.shared_map(), vec![ZERO; dim], f64::INFINITY);
    }
    if !gen.is_dissipative() {
        return Err(QleError::SingularGenerator);
    }
    let rhs: Vec<C64> = omega.iter().map(|w| -w).collect();
    let backend = match opts.backend {
        SteadyBackend::Auto => SteadyBackend::Gmres { restart: 60, max_iter: 3000, tol: 0.1 * opts.residual_tol },
        b => b,
    };
    let values = match backend {
        SteadyBackend::Auto => unreachable!("resolved above"),
        SteadyBackend::Direct => direct(gen, &rhs, norm_omega, opts.residual_tol)?,
        SteadyBackend::Gmres { restart, max_iter, tol } => {
            match gmres(gen, &rhs, restart, max_iter, tol.min(opts.residual_tol)) {
                Ok(x) if relative_residual(gen, &x, norm_omega) <= opts.residual_tol => x,
                Ok(_) | Err(QleError::SolverDivergence { .. }) if opts.fallback && dim <= DIRECT_MAX_DIM => {
                    direct(gen, &rhs, norm_omega, opts.residual_tol)?
                }
                Ok(x) => {
                    return Err(QleError::SolverDivergence {
                        iterations: max_iter,
                        residual: relative_residual(gen, &x, norm_omega),
                    })
                }
                Err(e) => return Err(e),
            }
        }
    };
    StateVector::new(gen.shared_map(), values, f64::INFINITY)
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖Z x + Ω‖ / ‖Ω‖`
fn relative_residual(gen: &Generator, x: &[C64], norm_omega: f64) -> f64 {
    let mut r = vec![ZERO; x.len()];
    gen.rhs_into(x, &mut r);
    norm(&r) / norm_omega
}

fn direct(gen: &Generator, rhs: &[C64], norm_omega: f64, tol: f64) -> Result<Vec<C64>> {
    let dim = rhs.len();
    let lu = gen.z().to_faer_csc().sp_lu().map_err(|_| QleError::SingularGenerator)?;
    let mut x = Mat::<C64>::from_fn(dim, 1, |i, _| rhs[i]);
    lu.solve_in_place(x.as_mut());
    let mut sol: Vec<C64> = (0..dim).map(|i| x[(i, 0)]).collect();
    if sol.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(QleError::SingularGenerator);
    }
    let mut residual = relative_residual(gen, &sol, norm_omega);
    for _ in 0..REFINEMENT_STEPS {
        if residual <= tol {
            break;
        }
        let mut r = vec![ZERO; dim];
        gen.z().mul_vec_into(&sol, &mut r);
        let mut corr = Mat::<C64>::from_fn(dim, 1, |i, _| rhs[i] - r[i]);
        lu.solve_in_place(corr.as_mut());
        for (s, i) in sol.iter_mut().zip(0..dim) {
            *s += corr[(i, 0)];
        }
        residual = relative_residual(gen, &sol, norm_omega);
    }
    if !(residual <= tol) {
        return Err(QleError::Numerical(format!(
            "steady-state residual {residual:e} above tolerance {tol:e}; generator is close to singular"
        )));
    }
    Ok(sol)
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Right-preconditioned restarted GMRES for `Z x = b`.
fn gmres(gen: &Generator, b: &[C64], restart: usize, max_iter: usize, tol: f64) -> Result<Vec<C64>> {
    let z = gen.z();
    let dim = b.len();
    let restart = restart.clamp(1, dim);
    let pc = NoJumpPreconditioner::new(gen)?;
    let bnorm = norm(b);
    let mut x = vec![ZERO; dim];
    let mut iterations = 0;
    let mut rel;

    while iterations < max_iter {
        let ax = z.mul_vec(&x);
        let r: Vec<C64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        rel = beta / bnorm;
        if rel <= tol {
            return Ok(x);
        }
        let mut basis: Vec<Vec<C64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut h = vec![vec![ZERO; restart]; restart + 1];
        let mut cs = vec![ZERO; restart];
        let mut sn = vec![ZERO; restart];
        let mut g = vec![ZERO; restart + 1];
        g[0] = C64::new(beta, 0.0);
        let mut k_used = 0;

        for k in 0..restart {
            iterations += 1;
            let mut w = z.mul_vec(&pc.apply(gen, &basis[k]));
            for (j, q) in basis.iter().enumerate() {
                let hj = dot(q, &w);
                h[j][k] = hj;
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= hj * qi;
                }
            }
            let wn = norm(&w);
            h[k + 1][k] = C64::new(wn, 0.0);
            for j in 0..k {
                let tmp = cs[j].conj() * h[j][k] + sn[j].conj() * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = tmp;
            }
            let (a, bb) = (h[k][k], h[k + 1][k]);
            let den = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            if den == 0.0 {
                return Err(QleError::SolverDivergence { iterations, residual: rel });
            }
            cs[k] = a / den;
            sn[k] = bb / den;
            h[k][k] = C64::new(den, 0.0);
            h[k + 1][k] = ZERO;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k].conj() * g[k];
            k_used = k + 1;
            rel = g[k + 1].norm() / bnorm;
            if rel <= tol || wn == 0.0 || iterations >= max_iter {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        // back substitution on the triangular Hessenberg block
        let mut y = vec![ZERO; k_used];
        for row in (0..k_used).rev() {
            let mut s = g[row];
            for col in row + 1..k_used {
                s -= h[row][col] * y[col];
            }
            y[row] = s / h[row][row];
        }
        let mut update = vec![ZERO; dim];
        for (j, yj) in y.iter().enumerate() {
            for (ui, qi) in update.iter_mut().zip(&basis[j]) {
                *ui += yj * qi;
            }
        }
        for (xi, ui) in x.iter_mut().zip(pc.apply(gen, &update)) {
            *xi += ui;
        }
        if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(QleError::SolverDivergence { iterations, residual: f64::INFINITY });
        }
    }
    let ax = z.mul_vec(&x);
    let r: Vec<C64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    rel = norm(&r) / bnorm;
    if rel <= tol {
        Ok(x)
    } else {
        Err(QleError::SolverDivergence { iterations, residual: rel })
    }
}
