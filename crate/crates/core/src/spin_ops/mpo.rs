use faer::Mat;
use num_complex::Complex64 as C64;

use super::dense::{kron, mat2_to_dense};
use super::{LocalOp, Mat2};
use crate::error::{QleError, Result};
use crate::generator::MediumSpec;
use crate::longrange_fit::ExpFit;

/// Operator-valued matrix: each entry is a 2x2 operator on one site.
#[derive(Clone, Debug)]
pub struct OpMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Mat2>,
}

impl OpMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![Mat2::ZERO; rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Mat2 {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, m: Mat2) {
        self.entries[r * self.cols + c] = m;
    }
}

/// Contracts a chain of operator-valued matrices into a dense operator on
/// `2^len` states. The first factor must have one row, the last one column.
pub fn contract_chain(factors: &[&OpMatrix]) -> Mat<C64> {
    let first = factors[0];
    assert_eq!(first.rows(), 1);
    let mut partial: Vec<Option<Mat<C64>>> =
        (0..first.cols()).map(|c| nonzero(first.get(0, c)).map(mat2_to_dense)).collect();
    for m in &factors[1..] {
        assert_eq!(m.rows(), partial.len());
        let mut next: Vec<Option<Mat<C64>>> = vec![None; m.cols()];
        for (a, left) in partial.iter().enumerate() {
            let Some(left) = left else { continue };
            for (b, slot) in next.iter_mut().enumerate() {
                let Some(op) = nonzero(m.get(a, b)) else { continue };
                let term = kron(left, &mat2_to_dense(op));
                *slot = Some(match slot.take() {
                    Some(acc) => acc + term,
                    None => term,
                });
            }
        }
        partial = next;
    }
    assert_eq!(partial.len(), 1, "last factor must have a single column");
    let dim = 1usize << factors.len();
    partial.pop().flatten().unwrap_or_else(|| Mat::zeros(dim, dim))
}

fn nonzero(m: &Mat2) -> Option<&Mat2> {
    (!m.is_zero()).then_some(m)
}

/// Two-site factorization `left · right` of the bond Hamiltonian between
/// sites `site` and `site + 1`.
#[derive(Clone, Debug)]
pub struct BondMpo {
    pub site: usize,
    pub left: [Mat2; 5],
    pub right: [Mat2; 5],
}

impl BondMpo {
    /// Nonzero `(left_k, right_k)` pairs of the contraction.
    pub fn terms(&self) -> impl Iterator<Item = (Mat2, Mat2)> + '_ {
        self.left.iter().zip(self.right.iter()).filter(|(l, r)| !l.is_zero() && !r.is_zero()).map(|(l, r)| (*l, *r))
    }

    /// The bond Hamiltonian as a 4x4 matrix on the two-site space.
    pub fn product(&self) -> Mat<C64> {
        let mut out = Mat::<C64>::zeros(4, 4);
        for (l, r) in self.terms() {
            out += kron(&mat2_to_dense(&l), &mat2_to_dense(&r));
        }
        out
    }
}

/// Per-site detuning weight used by the bond decomposition: boundary sites
/// belong to one bond and carry twice the detuning, bulk sites belong to two.
pub fn bond_detuning(spec: &MediumSpec, omega_p: f64, site: usize) -> f64 {
    let n = spec.n();
    let d = spec.omega[site - 1] - omega_p;
    if site == 1 || site == n {
        2.0 * d
    } else {
        d
    }
}

/// MPO factors of the nearest-neighbor bond `(site, site + 1)`, 1-based.
pub fn bond_mpo(site: usize, spec: &MediumSpec, omega_p: f64) -> Result<BondMpo> {
    let n = spec.n();
    if n < 2 || site == 0 || site >= n {
        return Err(QleError::NoSuchBond { site, n });
    }
    let raise = LocalOp::Raise.matrix();
    let lower = LocalOp::Lower.matrix();
    let num = LocalOp::Number.matrix();
    let id = Mat2::IDENTITY;
    let (dl, dr) = (bond_detuning(spec, omega_p, site), bond_detuning(spec, omega_p, site + 1));
    let hop = 2.0 * spec.jx;
    let zz = 4.0 * spec.jz;
    Ok(BondMpo {
        site,
        left: [num.scale_re(0.5 * dl), raise.scale_re(hop), lower.scale_re(hop), num.scale_re(zz), id],
        right: [id, lower, raise, num, num.scale_re(0.5 * dr)],
    })
}

/// Lower-triangular MPO of the long-range Hamiltonian with the power-law
/// couplings replaced by fitted sums of exponentials.
///
/// Virtual index layout: `0` is "complete", `1..=L` carries a pending hop
/// started by `σ†`, `L+1..=2L` a hop started by `σ`, `2L+1..=3L` a pending
/// density-density term, and `3L+1` is "nothing placed yet".
#[derive(Clone, Debug)]
pub struct LongRangeMpo {
    n: usize,
    terms: usize,
    first: OpMatrix,
    bulk: Vec<OpMatrix>,
    last: OpMatrix,
}

impl LongRangeMpo {
    pub fn bond_dimension(&self) -> usize {
        3 * self.terms + 2
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn first(&self) -> &OpMatrix {
        &self.first
    }

    pub fn bulk(&self) -> &[OpMatrix] {
        &self.bulk
    }

    pub fn last(&self) -> &OpMatrix {
        &self.last
    }

    /// Dense `2^n x 2^n` Hamiltonian. `n` must match the chain the MPO was
    /// built for.
    pub fn contract(&self, n: usize) -> Result<Mat<C64>> {
        if n != self.n {
            return Err(QleError::LengthMismatch { expected: self.n, got: n });
        }
        let mut chain: Vec<&OpMatrix> = vec![&self.first];
        chain.extend(self.bulk.iter());
        chain.push(&self.last);
        Ok(contract_chain(&chain))
    }
}

pub fn longrange_mpo(spec: &MediumSpec, omega_p: f64, fit_x: &ExpFit, fit_z: &ExpFit) -> Result<LongRangeMpo> {
    let n = spec.n();
    if n < 2 {
        return Err(QleError::NoSuchBond { site: 1, n });
    }
    if fit_x.terms() != fit_z.terms() {
        return Err(QleError::LengthMismatch { expected: fit_x.terms(), got: fit_z.terms() });
    }
    for fit in [fit_x, fit_z] {
        if fit.delta().iter().any(|&d| !(d > 0.0 && d < 1.0)) {
            return Err(QleError::InvalidParameter {
                name: "delta",
                value: fit.delta().iter().copied().fold(f64::NAN, f64::max),
                reason: "decay bases must lie in (0, 1)",
            });
        }
    }
    let l = fit_x.terms();
    let chi = 3 * l + 2;
    let start = chi - 1;
    let raise = LocalOp::Raise.matrix();
    let lower = LocalOp::Lower.matrix();
    let num = LocalOp::Number.matrix();
    let id = Mat2::IDENTITY;

    // row "nothing placed yet": start a term or finish with the on-site detuning
    let fill_open_row = |m: &mut OpMatrix, row: usize, site: usize| {
        m.set(row, 0, num.scale_re(spec.omega[site - 1] - omega_p));
        for k in 0..l {
            m.set(row, 1 + k, raise.scale_re(2.0 * spec.jx * fit_x.gamma()[k]));
            m.set(row, 1 + l + k, lower.scale_re(2.0 * spec.jx * fit_x.gamma()[k]));
            m.set(row, 1 + 2 * l + k, num.scale_re(4.0 * spec.jz * fit_z.gamma()[k]));
        }
        m.set(row, start, id);
    };
    // column "complete": close a pending term
    let fill_close_col = |m: &mut OpMatrix, row_offset: usize| {
        m.set(0, 0, id);
        for k in 0..l {
            m.set(row_offset + 1 + k, 0, lower);
            m.set(row_offset + 1 + l + k, 0, raise);
            m.set(row_offset + 1 + 2 * l + k, 0, num);
        }
    };

    let mut first = OpMatrix::zeros(1, chi);
    fill_open_row(&mut first, 0, 1);

    let mut bulk = Vec::with_capacity(n.saturating_sub(2));
    for site in 2..n {
        let mut m = OpMatrix::zeros(chi, chi);
        fill_close_col(&mut m, 0);
        for k in 0..l {
            m.set(1 + k, 1 + k, id.scale_re(fit_x.delta()[k]));
            m.set(1 + l + k, 1 + l + k, id.scale_re(fit_x.delta()[k]));
            m.set(1 + 2 * l + k, 1 + 2 * l + k, id.scale_re(fit_z.delta()[k]));
        }
        fill_open_row(&mut m, start, site);
        bulk.push(m);
    }

    let mut last = OpMatrix::zeros(chi, 1);
    fill_close_col(&mut last, 0);
    last.set(start, 0, num.scale_re(spec.omega[n - 1] - omega_p));

    Ok(LongRangeMpo { n, terms: l, first, bulk, last })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin_ops::dense::{embed, max_abs_diff, number};

    fn direct_bond(spec: &MediumSpec, omega_p: f64, site: usize) -> Mat<C64> {
        let raise = LocalOp::Raise.matrix();
        let lower = LocalOp::Lower.matrix();
        let hop = embed(&raise, 1, 2) * embed(&lower, 2, 2) + embed(&lower, 1, 2) * embed(&raise, 2, 2);
        let zz = number(1, 2) * number(2, 2);
        let c = |x: f64| C64::new(x, 0.0);
        let dl = 0.5 * bond_detuning(spec, omega_p, site);
        let dr = 0.5 * bond_detuning(spec, omega_p, site + 1);
        hop * faer::Scale(c(2.0 * spec.jx))
            + zz * faer::Scale(c(4.0 * spec.jz))
            + number(1, 2) * faer::Scale(c(dl))
            + number(2, 2) * faer::Scale(c(dr))
    }

    #[test]
    fn resonant_bond_has_no_detuning() {
        let spec = MediumSpec::uniform(2, 1.0);
        let h = bond_mpo(1, &spec, 1.0).unwrap().product();
        // basis |gg>, |ge>, |eg>, |ee>
        assert!((h[(1, 2)] - C64::new(0.1, 0.0)).norm() < 1e-15);
        assert!((h[(2, 1)] - C64::new(0.1, 0.0)).norm() < 1e-15);
        assert!((h[(3, 3)] - C64::new(0.2, 0.0)).norm() < 1e-15);
        assert_eq!(h[(1, 1)], C64::new(0.0, 0.0));
        assert_eq!(h[(2, 2)], C64::new(0.0, 0.0));
    }

    #[test]
    fn bond_product_matches_direct_construction() {
        let mut spec = MediumSpec::uniform(4, 1.0).with_couplings(0.07, -0.03);
        spec.omega = vec![0.9, 1.05, 1.2, 0.97];
        for site in 1..4 {
            let mpo = bond_mpo(site, &spec, 1.01).unwrap();
            assert!(max_abs_diff(&mpo.product(), &direct_bond(&spec, 1.01, site)) < 1e-15);
        }
    }

    #[test]
    fn missing_bonds_rejected() {
        let spec = MediumSpec::uniform(1, 1.0);
        assert!(bond_mpo(1, &spec, 1.0).is_err());
        let spec = MediumSpec::uniform(3, 1.0);
        assert!(bond_mpo(0, &spec, 1.0).is_err());
        assert!(bond_mpo(3, &spec, 1.0).is_err());
    }
}
