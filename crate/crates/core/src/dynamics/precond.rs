//! Preconditioner for the steady-state Krylov solve.
//!
//! In density-matrix form the generator splits into a "no-jump" part
//! `ρ ↦ -i(Kρ - ρK†)`, with the non-Hermitian `K = H - iG`, and the jump
//! terms `2Γ σρσ†`, `2Γ_λ nρn`. The no-jump part is a Sylvester operator and
//! is inverted exactly through one eigendecomposition of the `2^N x 2^N`
//! matrix `K`; mapping between expectation values and density matrices is a
//! per-site linear transform.

use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{QleError, Result};
use crate::generator::Generator;
use crate::spin_ops::{medium_hamiltonian, LocalOp};

const ZERO: C64 = C64::new(0.0, 0.0);

pub(crate) struct NoJumpPreconditioner {
    n: usize,
    /// eigenvectors of `K`
    v: Mat<C64>,
    v_inv: Mat<C64>,
    /// `1 / (-i(λ_a - conj(λ_b)))`
    weights: Mat<C64>,
    /// label code of each interleaved (row, column) position
    codes: Vec<u32>,
    /// no-jump solution for a unit identity source
    trace_response: Vec<C64>,
}

fn add_site_op(k: &mut Mat<C64>, op: LocalOp, site: usize, n: usize, coef: C64) {
    let dim = 1usize << n;
    let shift = n - site;
    for r in 0..dim {
        let bit = (r >> shift) & 1;
        let (col_bit, v) = match (op, bit) {
            (LocalOp::Raise, 1) => (0, coef),
            (LocalOp::Lower, 0) => (1, coef),
            (LocalOp::Number, 1) => (1, coef),
            _ => continue,
        };
        let c = (r & !(1 << shift)) | (col_bit << shift);
        k[(r, c)] += v;
    }
}

impl NoJumpPreconditioner {
    pub(crate) fn new(gen: &Generator) -> Result<Self> {
        let spec = gen.spec();
        let n = spec.n();
        let i = C64::new(0.0, 1.0);
        let mut k = medium_hamiltonian(spec, gen.drive().omega_p)?;
        let w = C64::new(gen.rabi(), 0.0);
        add_site_op(&mut k, LocalOp::Raise, 1, n, w);
        add_site_op(&mut k, LocalOp::Lower, 1, n, w);
        add_site_op(&mut k, LocalOp::Number, 1, n, -i * spec.gamma_l);
        add_site_op(&mut k, LocalOp::Number, n, n, -i * spec.gamma_r);
        let local = spec.gamma_gamma + spec.gamma_lambda;
        if local != 0.0 {
            for site in 1..=n {
                add_site_op(&mut k, LocalOp::Number, site, n, -i * local);
            }
        }
        let eig = k.eigen().map_err(|e| QleError::Numerical(format!("eigendecomposition failed: {e:?}")))?;
        let v = eig.U().to_owned();
        let lambda: Vec<C64> = (0..k.nrows()).map(|a| eig.S().column_vector()[a]).collect();
        let dim = k.nrows();
        let v_inv = v.partial_piv_lu().solve(Mat::<C64>::identity(dim, dim));
        let weights = Mat::from_fn(dim, dim, |a, b| {
            let d = -i * (lambda[a] - lambda[b].conj());
            if d.norm() > 1e-14 {
                d.inv()
            } else {
                ZERO
            }
        });
        let mut codes = vec![0u32; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                codes[r * dim + c] = interleave(r, c, n);
            }
        }
        let mut pc = Self { n, v, v_inv, weights, codes, trace_response: Vec::new() };
        let mut unit = vec![ZERO; 1 << (2 * n)];
        unit[0] = C64::new(1.0, 0.0);
        pc.trace_response = pc.solve_codes(unit);
        Ok(pc)
    }

    /// Approximate `Z⁻¹ x` for `x` in generator index order.
    ///
    /// `Z` is the generator restricted to non-identity labels, so the no-jump
    /// part is inverted on that block: the trace component of the full
    /// solution is projected out with the response to a unit trace source.
    pub(crate) fn apply(&self, gen: &Generator, x: &[C64]) -> Vec<C64> {
        let codes = gen.map().codes();
        let mut t = vec![ZERO; 1 << (2 * self.n)];
        for (&code, &xi) in codes.iter().zip(x) {
            t[code as usize] = xi;
        }
        let u = self.solve_codes(t);
        let y = if self.trace_response[0].norm() > 0.0 { -u[0] / self.trace_response[0] } else { ZERO };
        codes.iter().map(|&c| u[c as usize] + y * self.trace_response[c as usize]).collect()
    }

    /// Solves the no-jump equation on the full operator space, with the
    /// source and the result indexed by label code.
    fn solve_codes(&self, mut t: Vec<C64>) -> Vec<C64> {
        let n = self.n;
        let dim = 1usize << n;
        // expectation values -> density matrix
        per_site(&mut t, n, |s_i, s_p, s_m, s_n| (s_i - s_n, s_p, s_m, s_n));
        let rho = Mat::<C64>::from_fn(dim, dim, |r, c| t[self.codes[r * dim + c] as usize]);

        let rt = &self.v_inv * &rho * self.v_inv.adjoint();
        let xt = Mat::<C64>::from_fn(dim, dim, |a, b| rt[(a, b)] * self.weights[(a, b)]);
        let sol = &self.v * &xt * self.v.adjoint();

        for r in 0..dim {
            for c in 0..dim {
                t[self.codes[r * dim + c] as usize] = sol[(r, c)];
            }
        }
        per_site(&mut t, n, |gg, ge, eg, ee| (gg + ee, ge, eg, ee));
        t
    }
}

/// Position of matrix element `(r, c)` in the per-site interleaved layout,
/// where site digit `2·row_bit + col_bit` reads gg=0, ge=1, eg=2, ee=3. The
/// per-site transforms below turn these positions into label codes
/// (I=0, σ†=1, σ=2, n=3).
fn interleave(r: usize, c: usize, n: usize) -> u32 {
    let mut idx = 0u32;
    for site in 0..n {
        let shift = n - 1 - site;
        let p = (((r >> shift) & 1) << 1) | ((c >> shift) & 1);
        idx = (idx << 2) | p as u32;
    }
    idx
}

/// Applies a 4-point transform on every site digit. Inputs and outputs are
/// ordered (digit 0, 1, 2, 3).
fn per_site(t: &mut [C64], n: usize, f: impl Fn(C64, C64, C64, C64) -> (C64, C64, C64, C64)) {
    for site in 0..n {
        let stride = 1usize << (2 * (n - 1 - site));
        let block = 4 * stride;
        for base in (0..t.len()).step_by(block) {
            for off in 0..stride {
                let i0 = base + off;
                let (a, b, c, d) = f(t[i0], t[i0 + stride], t[i0 + 2 * stride], t[i0 + 3 * stride]);
                t[i0] = a;
                t[i0 + stride] = b;
                t[i0 + 2 * stride] = c;
                t[i0 + 3 * stride] = d;
            }
        }
    }
}
