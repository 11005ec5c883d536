//! Dense reference generator built from literal commutators. Independent of
//! the MPO/table machinery in [`crate::generator`] and used to check it.

use faer::Mat;
use num_complex::Complex64 as C64;

use super::dense::expand;
use super::{LabelMap, LocalOp};
use crate::error::{QleError, Result};
use crate::generator::{pair_couplings, DriveSpec, MediumSpec};

/// Largest chain the dense oracle accepts.
pub const BRUTE_FORCE_MAX_SITES: usize = 6;

/// Largest chain for which [`medium_hamiltonian`] builds a dense matrix.
pub const DENSE_HAMILTONIAN_MAX_SITES: usize = 10;

/// Generator in dense form, rows and columns ordered by `map`.
#[derive(Clone, Debug)]
pub struct DenseGenerator {
    pub map: LabelMap,
    pub z: Mat<C64>,
    pub omega: Vec<C64>,
}

/// Operator with at most one nonzero per row and per column, as every product
/// of basis operators is. Row `r` maps to `(column, value)`.
struct Monomial {
    rows: Vec<Option<(usize, C64)>>,
}

impl Monomial {
    fn from_ops(ops: &[LocalOp]) -> Self {
        let n = ops.len();
        let dim = 1usize << n;
        let rows = (0..dim)
            .map(|r| {
                let mut c = 0usize;
                for (k, op) in ops.iter().enumerate() {
                    let shift = n - 1 - k;
                    let bit = (r >> shift) & 1;
                    let col_bit = match (op, bit) {
                        (LocalOp::Identity, b) => b,
                        (LocalOp::Raise, 1) => 0,
                        (LocalOp::Lower, 0) => 1,
                        (LocalOp::Number, 1) => 1,
                        _ => return None,
                    };
                    c |= col_bit << shift;
                }
                Some((c, C64::new(1.0, 0.0)))
            })
            .collect();
        Self { rows }
    }

    fn site(op: LocalOp, site: usize, n: usize) -> Self {
        let mut ops = vec![LocalOp::Identity; n];
        ops[site - 1] = op;
        Self::from_ops(&ops)
    }

    /// `self · x`
    fn left(&self, x: &Mat<C64>) -> Mat<C64> {
        let mut out = Mat::zeros(x.nrows(), x.ncols());
        for (r, entry) in self.rows.iter().enumerate() {
            if let Some((c, v)) = entry {
                for j in 0..x.ncols() {
                    out[(r, j)] = x[(*c, j)] * v;
                }
            }
        }
        out
    }

    /// `x · self`
    fn right(&self, x: &Mat<C64>) -> Mat<C64> {
        let mut out = Mat::zeros(x.nrows(), x.ncols());
        for (r, entry) in self.rows.iter().enumerate() {
            if let Some((c, v)) = entry {
                for i in 0..x.nrows() {
                    out[(i, *c)] += x[(i, r)] * v;
                }
            }
        }
        out
    }

    fn to_dense(&self) -> Mat<C64> {
        let dim = self.rows.len();
        let mut out = Mat::zeros(dim, dim);
        for (r, entry) in self.rows.iter().enumerate() {
            if let Some((c, v)) = entry {
                out[(r, *c)] = *v;
            }
        }
        out
    }
}

/// `[x, m]` for dense `x`.
fn comm(x: &Mat<C64>, m: &Monomial) -> Mat<C64> {
    m.right(x) - m.left(x)
}

fn add_scaled(acc: &mut Mat<C64>, s: C64, x: &Mat<C64>) {
    for j in 0..acc.ncols() {
        for i in 0..acc.nrows() {
            acc[(i, j)] += s * x[(i, j)];
        }
    }
}

/// Bath-type dissipator `σ†[A, σ] - [A, σ†]σ`.
fn decay(a: &Mat<C64>, lower: &Monomial, raise: &Monomial) -> Mat<C64> {
    raise.left(&comm(a, lower)) - lower.right(&comm(a, raise))
}

/// Medium Hamiltonian in the frame rotating at `omega_p`, built directly on
/// the `2^N` space: detunings, hopping `2Jx·g(r)` and interaction `4Jz·g(r)`.
pub fn medium_hamiltonian(spec: &MediumSpec, omega_p: f64) -> Result<Mat<C64>> {
    spec.validate()?;
    let n = spec.n();
    if n > DENSE_HAMILTONIAN_MAX_SITES {
        return Err(QleError::SizeCap { n, cap: DENSE_HAMILTONIAN_MAX_SITES });
    }
    let dim = 1usize << n;
    let mut h = Mat::<C64>::zeros(dim, dim);
    for site in 1..=n {
        let num = Monomial::site(LocalOp::Number, site, n).to_dense();
        add_scaled(&mut h, C64::new(spec.omega[site - 1] - omega_p, 0.0), &num);
    }
    for (i, j, hop, zz) in pair_couplings(spec)? {
        let raise_i = Monomial::site(LocalOp::Raise, i, n);
        let lower_i = Monomial::site(LocalOp::Lower, i, n);
        let raise_j = Monomial::site(LocalOp::Raise, j, n).to_dense();
        let lower_j = Monomial::site(LocalOp::Lower, j, n).to_dense();
        let num_i = Monomial::site(LocalOp::Number, i, n);
        let num_j = Monomial::site(LocalOp::Number, j, n).to_dense();
        let hopping = raise_i.left(&lower_j) + lower_i.left(&raise_j);
        add_scaled(&mut h, C64::new(hop, 0.0), &hopping);
        add_scaled(&mut h, C64::new(zz, 0.0), &num_i.left(&num_j));
    }
    Ok(h)
}

/// Dense generator from literal commutators against [`medium_hamiltonian`].
pub fn brute_force_generator(spec: &MediumSpec, drive: &DriveSpec) -> Result<DenseGenerator> {
    if spec.n() > BRUTE_FORCE_MAX_SITES {
        return Err(QleError::SizeCap { n: spec.n(), cap: BRUTE_FORCE_MAX_SITES });
    }
    let h = medium_hamiltonian(spec, drive.omega_p)?;
    brute_force_generator_with(spec, drive, &h)
}

/// Dense generator for an arbitrary Hamiltonian `h` on the `2^N` space, with
/// the baths, drive and losses of `spec` and `drive`.
///
/// Row `ℓ` holds the label-basis coefficients of
/// `-i[ℓ, H] + Γ_L(σ₁†[ℓ,σ₁] - [ℓ,σ₁†]σ₁) - iΩ_L([ℓ,σ₁] + [ℓ,σ₁†]) + (same with Γ_R, σ_N)
///  + Σ_j Γ_λ[n_j,[ℓ,n_j]] + Γ_γ(σ_j†[ℓ,σ_j] - [ℓ,σ_j†]σ_j)`;
/// the identity coefficient goes to `Ω`.
pub fn brute_force_generator_with(spec: &MediumSpec, drive: &DriveSpec, h: &Mat<C64>) -> Result<DenseGenerator> {
    spec.validate()?;
    let n = spec.n();
    if n > BRUTE_FORCE_MAX_SITES {
        return Err(QleError::SizeCap { n, cap: BRUTE_FORCE_MAX_SITES });
    }
    let full = 1usize << n;
    if h.nrows() != full || h.ncols() != full {
        return Err(QleError::LengthMismatch { expected: full, got: h.nrows() });
    }
    let rabi = drive.rabi(spec.gamma_l)?;
    let map = LabelMap::new(n)?;
    let dim = map.dim();
    let i = C64::new(0.0, 1.0);
    let re = |x: f64| C64::new(x, 0.0);

    let lowers: Vec<Monomial> = (1..=n).map(|s| Monomial::site(LocalOp::Lower, s, n)).collect();
    let raises: Vec<Monomial> = (1..=n).map(|s| Monomial::site(LocalOp::Raise, s, n)).collect();
    let numbers: Vec<Monomial> = (1..=n).map(|s| Monomial::site(LocalOp::Number, s, n)).collect();

    let mut z = Mat::<C64>::zeros(dim, dim);
    let mut omega = vec![C64::new(0.0, 0.0); dim];
    for row in 0..dim {
        let label = map.label(row);
        let a_mono = Monomial::from_ops(label.ops());
        let a = a_mono.to_dense();

        let mut acc = Mat::<C64>::zeros(full, full);
        add_scaled(&mut acc, -i, &(a_mono.left(h) - a_mono.right(h)));
        add_scaled(&mut acc, re(spec.gamma_l), &decay(&a, &lowers[0], &raises[0]));
        add_scaled(&mut acc, -i * rabi, &(comm(&a, &lowers[0]) + comm(&a, &raises[0])));
        add_scaled(&mut acc, re(spec.gamma_r), &decay(&a, &lowers[n - 1], &raises[n - 1]));
        for s in 0..n {
            let c = comm(&a, &numbers[s]);
            add_scaled(&mut acc, re(spec.gamma_lambda), &(numbers[s].left(&c) - numbers[s].right(&c)));
            add_scaled(&mut acc, re(spec.gamma_gamma), &decay(&a, &lowers[s], &raises[s]));
        }

        for (code, coef) in expand(&acc, n).into_iter().enumerate() {
            if coef == C64::new(0.0, 0.0) {
                continue;
            }
            match map.index_of_code(code as u32) {
                Some(col) => z[(row, col)] = coef,
                None => omega[row] = coef,
            }
        }
    }
    Ok(DenseGenerator { map, z, omega })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin_ops::dense::{label_matrix, max_abs_diff};

    #[test]
    fn monomial_matches_kronecker_product() {
        let map = LabelMap::new(3).unwrap();
        for idx in 0..map.dim() {
            let label = map.label(idx);
            let mono = Monomial::from_ops(label.ops()).to_dense();
            assert!(max_abs_diff(&mono, &label_matrix(&label)) == 0.0, "{label}");
        }
    }

    #[test]
    fn undriven_has_zero_drive_vector() {
        let spec = MediumSpec::uniform(2, 1.0);
        let drive = DriveSpec::from_intensity(1.0, 0.0).unwrap();
        let g = brute_force_generator(&spec, &drive).unwrap();
        assert!(g.omega.iter().all(|w| w.norm() == 0.0));
    }

    #[test]
    fn drive_vector_has_two_entries() {
        let spec = MediumSpec::uniform(3, 1.0);
        let drive = DriveSpec::from_intensity(1.0, 0.04).unwrap();
        let g = brute_force_generator(&spec, &drive).unwrap();
        let w = drive.rabi(spec.gamma_l).unwrap();
        assert!((g.omega[0] - C64::new(0.0, w)).norm() < 1e-15);
        assert!((g.omega[1] - C64::new(0.0, -w)).norm() < 1e-15);
        assert!(g.omega[2..].iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn oversized_chain_rejected() {
        let spec = MediumSpec::uniform(7, 1.0);
        let drive = DriveSpec::from_intensity(1.0, 0.0).unwrap();
        assert!(matches!(brute_force_generator(&spec, &drive), Err(QleError::SizeCap { .. })));
    }
}
