//! Dense `2^N x 2^N` representations, used by the brute-force oracle and by
//! MPO contraction checks. Only practical for short chains.

use faer::Mat;
use num_complex::Complex64 as C64;

#[cfg(test)]
use super::LocalOp;
use super::{Mat2, OperatorLabel};

pub fn mat2_to_dense(m: &Mat2) -> Mat<C64> {
    Mat::from_fn(2, 2, |r, c| m.0[r][c])
}

pub fn kron(a: &Mat<C64>, b: &Mat<C64>) -> Mat<C64> {
    a.kron(b)
}

/// `op` acting on `site` (1-based) of an `n`-site chain.
pub fn embed(op: &Mat2, site: usize, n: usize) -> Mat<C64> {
    let left = Mat::<C64>::identity(1 << (site - 1), 1 << (site - 1));
    let right = Mat::<C64>::identity(1 << (n - site), 1 << (n - site));
    kron(&kron(&left, &mat2_to_dense(op)), &right)
}

pub fn label_matrix(label: &OperatorLabel) -> Mat<C64> {
    let mut out = Mat::<C64>::identity(1, 1);
    for op in label.ops() {
        out = kron(&out, &mat2_to_dense(&op.matrix()));
    }
    out
}

/// Expands a `2^n x 2^n` matrix on the label basis. Entry `c` of the result is
/// the coefficient of the label with code `c`.
pub fn expand(m: &Mat<C64>, n: usize) -> Vec<C64> {
    let dim = 1usize << n;
    assert_eq!(m.nrows(), dim);
    assert_eq!(m.ncols(), dim);
    // t-digit per site: p = 2 r + c
    let mut t = vec![C64::new(0.0, 0.0); 1 << (2 * n)];
    for r in 0..dim {
        for c in 0..dim {
            let mut idx = 0usize;
            for site in 0..n {
                let shift = n - 1 - site;
                let p = (((r >> shift) & 1) << 1) | ((c >> shift) & 1);
                idx = (idx << 2) | p;
            }
            t[idx] = m[(r, c)];
        }
    }
    for site in 0..n {
        let stride = 1usize << (2 * (n - 1 - site));
        let block = stride * 4;
        for base in (0..t.len()).step_by(block) {
            for off in 0..stride {
                let i0 = base + off;
                let (gg, ge, eg, ee) = (t[i0], t[i0 + stride], t[i0 + 2 * stride], t[i0 + 3 * stride]);
                t[i0] = gg;
                t[i0 + stride] = eg; // σ† picks the (e, g) element
                t[i0 + 2 * stride] = ge;
                t[i0 + 3 * stride] = ee - gg;
            }
        }
    }
    t
}

pub fn max_abs_diff(a: &Mat<C64>, b: &Mat<C64>) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut worst = 0.0f64;
    for c in 0..a.ncols() {
        for r in 0..a.nrows() {
            worst = worst.max((a[(r, c)] - b[(r, c)]).norm());
        }
    }
    worst
}

#[cfg(test)]
pub(crate) fn number(site: usize, n: usize) -> Mat<C64> {
    embed(&LocalOp::Number.matrix(), site, n)
}
