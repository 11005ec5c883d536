//! Sparse generator `Z`, `Ω` of the linear equation of motion
//! `dS/dt = Z S + Ω` for the label-basis expectation values.
//!
//! Every contribution to `d⟨ℓ⟩/dt` acts on one or two sites of the label, so
//! the generator is assembled from small local tables: a 4x4 table per
//! single-site term (baths, drive, losses) and a 16x16 table per two-site
//! term (Hamiltonian bonds or long-range pairs).

mod sparse;
mod spec;

use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub use sparse::SparseMatrix;
pub use spec::{rabi_from_intensity, CouplingRange, DriveSide, DriveSpec, MediumSpec, GROUP_VELOCITY};

use crate::error::{QleError, Result};
use crate::longrange_fit::{fit_powerlaw, ExpFit};
use crate::spin_ops::{bond_mpo, digit_at, BondMpo, LabelMap, LocalOp, Mat2};

/// Default refusal threshold on the chain length.
pub const DEFAULT_N_CAP: usize = 8;

const ZERO: C64 = C64::new(0.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AssemblyPath {
    /// Homogeneous fast path when applicable, generic otherwise.
    #[default]
    Auto,
    /// One bond table per bond.
    Generic,
    /// Reuse a single bulk-bond table; rejected for inhomogeneous chains.
    Homogeneous,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssembleOptions {
    pub n_cap: usize,
    pub path: AssemblyPath,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        Self { n_cap: DEFAULT_N_CAP, path: AssemblyPath::Auto }
    }
}

/// Assembled equation of motion for one medium and drive.
#[derive(Clone, Debug)]
pub struct Generator {
    map: Arc<LabelMap>,
    z: SparseMatrix,
    omega: Vec<C64>,
    rabi: f64,
    dissipative: bool,
    fits: Option<(ExpFit, ExpFit)>,
    spec: MediumSpec,
    drive: DriveSpec,
}

impl Generator {
    pub fn n(&self) -> usize {
        self.map.n()
    }

    pub fn dim(&self) -> usize {
        self.map.dim()
    }

    pub fn map(&self) -> &LabelMap {
        &self.map
    }

    pub fn shared_map(&self) -> Arc<LabelMap> {
        Arc::clone(&self.map)
    }

    /// True when at least one bath or loss rate is positive; otherwise `Z`
    /// has purely imaginary spectrum and no steady state exists.
    pub fn is_dissipative(&self) -> bool {
        self.dissipative
    }

    pub fn z(&self) -> &SparseMatrix {
        &self.z
    }

    pub fn omega(&self) -> &[C64] {
        &self.omega
    }

    /// Rabi frequency `Ω_L` that entered the drive terms.
    pub fn rabi(&self) -> f64 {
        self.rabi
    }

    pub fn spec(&self) -> &MediumSpec {
        &self.spec
    }

    pub fn drive(&self) -> &DriveSpec {
        &self.drive
    }

    /// Exponential fits (hopping, interaction) for long-range media.
    pub fn fits(&self) -> Option<&(ExpFit, ExpFit)> {
        self.fits.as_ref()
    }

    /// `Z s + Ω`.
    pub fn rhs_into(&self, s: &[C64], out: &mut [C64]) {
        self.z.mul_vec_into(s, out);
        for (o, w) in out.iter_mut().zip(&self.omega) {
            *o += w;
        }
    }

    /// Same generator with the drive vector replaced, `Z` untouched.
    pub fn with_omega(&self, omega: Vec<C64>) -> Result<Self> {
        if omega.len() != self.dim() {
            return Err(QleError::LengthMismatch { expected: self.dim(), got: omega.len() });
        }
        Ok(Self { omega, ..self.clone() })
    }
}

/// Exponential fits of the long-range couplings, fitted over
/// `r = 1..=max(N-1, L)`. `None` for nearest-neighbor media.
pub fn fitted_couplings(spec: &MediumSpec) -> Result<Option<(ExpFit, ExpFit)>> {
    match spec.range {
        CouplingRange::NearestNeighbor => Ok(None),
        CouplingRange::LongRange { alpha, beta, terms } => {
            let rmax = spec.n().saturating_sub(1).max(terms);
            Ok(Some((fit_powerlaw(alpha, terms, rmax)?, fit_powerlaw(beta, terms, rmax)?)))
        }
    }
}

/// Two-site couplings `(i, j, hop, zz)` with `i < j`, meaning the term
/// `hop·(σ_i†σ_j + σ_iσ_j†) + zz·n_i n_j` of the medium Hamiltonian.
pub fn pair_couplings(spec: &MediumSpec) -> Result<Vec<(usize, usize, f64, f64)>> {
    let n = spec.n();
    Ok(match fitted_couplings(spec)? {
        None => (1..n).map(|i| (i, i + 1, 2.0 * spec.jx, 4.0 * spec.jz)).collect(),
        Some((fx, fz)) => {
            let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
            for i in 1..n {
                for j in i + 1..=n {
                    out.push((i, j, 2.0 * spec.jx * fx.eval(j - i), 4.0 * spec.jz * fz.eval(j - i)));
                }
            }
            out
        }
    })
}

/// `table[in][out]`: coefficient of local digit `out` produced from digit `in`.
type SiteTable = [[C64; 4]; 4];
/// `table[in_pair][out_pair]` with pair code `4 d_i + d_j`.
type PairTable = [[C64; 16]; 16];

struct SiteTerm {
    site: usize,
    table: SiteTable,
}

struct PairTerm {
    sites: (usize, usize),
    table: PairTable,
}

fn site_table(action: impl Fn(Mat2) -> Mat2) -> SiteTable {
    let mut t = [[ZERO; 4]; 4];
    for op in LocalOp::ALL.into_iter().skip(1) {
        t[op.digit() as usize] = action(op.matrix()).coefficients();
    }
    t
}

/// Table of `-i[a ⊗ b, Σ_k L_k ⊗ R_k]`.
fn pair_table(terms: &[(Mat2, Mat2)]) -> PairTable {
    let mut t = [[ZERO; 16]; 16];
    for a in LocalOp::ALL {
        for b in LocalOp::ALL {
            if a == LocalOp::Identity && b == LocalOp::Identity {
                continue;
            }
            let row = &mut t[4 * a.digit() as usize + b.digit() as usize];
            let (am, bm) = (a.matrix(), b.matrix());
            for &(l, r) in terms {
                for (sign, x, y) in [(-I, am * l, bm * r), (I, l * am, r * bm)] {
                    let (cx, cy) = (x.coefficients(), y.coefficients());
                    for p in 0..4 {
                        if cx[p] == ZERO {
                            continue;
                        }
                        for q in 0..4 {
                            row[4 * p + q] += sign * cx[p] * cy[q];
                        }
                    }
                }
            }
        }
    }
    t
}

fn bond_table(bond: &BondMpo) -> PairTable {
    let terms: Vec<(Mat2, Mat2)> = bond.terms().collect();
    pair_table(&terms)
}

fn coupling_table(hop: f64, zz: f64) -> PairTable {
    let raise = LocalOp::Raise.matrix();
    let lower = LocalOp::Lower.matrix();
    let num = LocalOp::Number.matrix();
    pair_table(&[(raise.scale_re(hop), lower), (lower.scale_re(hop), raise), (num.scale_re(zz), num)])
}

/// `σ†[a, σ] - [a, σ†]σ`
fn decay(a: Mat2) -> Mat2 {
    let raise = LocalOp::Raise.matrix();
    let lower = LocalOp::Lower.matrix();
    raise * a.commutator(lower) - a.commutator(raise) * lower
}

/// `[n, [a, n]]`
fn dephase(a: Mat2) -> Mat2 {
    let num = LocalOp::Number.matrix();
    num.commutator(a.commutator(num))
}

fn single_site_terms(spec: &MediumSpec, rabi: f64, omega_p: f64) -> Vec<SiteTerm> {
    let n = spec.n();
    let raise = LocalOp::Raise.matrix();
    let lower = LocalOp::Lower.matrix();
    let num = LocalOp::Number.matrix();
    let mut terms = Vec::new();
    if n == 1 {
        let d = spec.omega[0] - omega_p;
        if d != 0.0 {
            terms.push(SiteTerm { site: 1, table: site_table(|a| a.commutator(num).scale(-I * d)) });
        }
    }
    if spec.gamma_l != 0.0 {
        terms.push(SiteTerm { site: 1, table: site_table(|a| decay(a).scale_re(spec.gamma_l)) });
    }
    if rabi != 0.0 {
        let drive = |a: Mat2| (a.commutator(lower) + a.commutator(raise)).scale(-I * rabi);
        terms.push(SiteTerm { site: 1, table: site_table(drive) });
    }
    if spec.gamma_r != 0.0 {
        terms.push(SiteTerm { site: n, table: site_table(|a| decay(a).scale_re(spec.gamma_r)) });
    }
    for site in 1..=n {
        if spec.gamma_lambda != 0.0 {
            terms.push(SiteTerm { site, table: site_table(|a| dephase(a).scale_re(spec.gamma_lambda)) });
        }
        if spec.gamma_gamma != 0.0 {
            terms.push(SiteTerm { site, table: site_table(|a| decay(a).scale_re(spec.gamma_gamma)) });
        }
    }
    terms
}

fn hamiltonian_terms(spec: &MediumSpec, omega_p: f64, homogeneous: bool) -> Result<Vec<PairTerm>> {
    let n = spec.n();
    if let CouplingRange::LongRange { .. } = spec.range {
        if n < 2 {
            return Ok(Vec::new());
        }
        let mut terms: Vec<PairTerm> = pair_couplings(spec)?
            .into_iter()
            .map(|(i, j, hop, zz)| PairTerm { sites: (i, j), table: coupling_table(hop, zz) })
            .collect();
        // on-site detunings, folded into the nearest-neighbor pairs as
        // `δω_i n_i ⊗ I` with the last site carried by the final pair
        for term in terms.iter_mut() {
            let (i, j) = term.sites;
            if j != i + 1 {
                continue;
            }
            let num = LocalOp::Number.matrix();
            let mut extra = vec![(num.scale_re(spec.omega[i - 1] - omega_p), Mat2::IDENTITY)];
            if j == n {
                extra.push((Mat2::IDENTITY, num.scale_re(spec.omega[j - 1] - omega_p)));
            }
            let t = pair_table(&extra);
            for (row, add) in term.table.iter_mut().zip(t.iter()) {
                for (x, y) in row.iter_mut().zip(add) {
                    *x += y;
                }
            }
        }
        return Ok(terms);
    }
    if homogeneous && n >= 4 {
        let first = bond_table(&bond_mpo(1, spec, omega_p)?);
        let bulk = bond_table(&bond_mpo(2, spec, omega_p)?);
        let last = bond_table(&bond_mpo(n - 1, spec, omega_p)?);
        return Ok((1..n)
            .map(|i| {
                let table = if i == 1 {
                    first
                } else if i == n - 1 {
                    last
                } else {
                    bulk
                };
                PairTerm { sites: (i, i + 1), table }
            })
            .collect());
    }
    (1..n).map(|i| Ok(PairTerm { sites: (i, i + 1), table: bond_table(&bond_mpo(i, spec, omega_p)?) })).collect()
}

pub fn assemble(spec: &MediumSpec, drive: &DriveSpec) -> Result<Generator> {
    assemble_with(spec, drive, &AssembleOptions::default())
}

pub fn assemble_with(spec: &MediumSpec, drive: &DriveSpec, opts: &AssembleOptions) -> Result<Generator> {
    spec.validate()?;
    let n = spec.n();
    if n > opts.n_cap {
        return Err(QleError::SizeCap { n, cap: opts.n_cap });
    }
    if drive.side != DriveSide::Left {
        return Err(QleError::InvalidParameter { name: "side", value: 1.0, reason: "only left driving is supported" });
    }
    let rabi = drive.rabi(spec.gamma_l)?;
    let homogeneous = match opts.path {
        AssemblyPath::Auto => spec.is_homogeneous(),
        AssemblyPath::Generic => false,
        AssemblyPath::Homogeneous => {
            if !spec.is_homogeneous() {
                return Err(QleError::InvalidParameter {
                    name: "omega",
                    value: f64::NAN,
                    reason: "homogeneous assembly needs equal transition frequencies",
                });
            }
            true
        }
    };
    let map = LabelMap::new(n)?;
    let sites = single_site_terms(spec, rabi, drive.omega_p);
    let pairs = hamiltonian_terms(spec, drive.omega_p, homogeneous)?;
    let (z, omega) = build(&map, &sites, &pairs);
    Ok(Generator {
        map: Arc::new(map),
        z,
        omega,
        rabi,
        dissipative: spec.has_dissipation(),
        fits: fitted_couplings(spec)?,
        spec: spec.clone(),
        drive: *drive,
    })
}

fn build(map: &LabelMap, sites: &[SiteTerm], pairs: &[PairTerm]) -> (SparseMatrix, Vec<C64>) {
    let n = map.n();
    let dim = map.dim();
    let shift = |site: usize| 2 * (n - site);
    let mut acc = vec![ZERO; 1usize << (2 * n)];
    let mut touched: Vec<u32> = Vec::new();
    let mut row_ptr = Vec::with_capacity(dim + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    let mut omega = vec![ZERO; dim];
    row_ptr.push(0);

    let mut row_entries: Vec<(usize, C64)> = Vec::new();
    for (row, &code) in map.codes().iter().enumerate() {
        let mut push = |out: u32, v: C64| {
            if acc[out as usize] == ZERO {
                touched.push(out);
            }
            acc[out as usize] += v;
        };
        for term in sites {
            let s = shift(term.site);
            let d = digit_at(code, n, term.site) as usize;
            if d == 0 {
                continue;
            }
            let base = code & !(3 << s);
            for (out, &v) in term.table[d].iter().enumerate() {
                if v != ZERO {
                    push(base | ((out as u32) << s), v);
                }
            }
        }
        for term in pairs {
            let (i, j) = term.sites;
            let (si, sj) = (shift(i), shift(j));
            let di = digit_at(code, n, i) as usize;
            let dj = digit_at(code, n, j) as usize;
            if di == 0 && dj == 0 {
                continue;
            }
            let base = code & !(3 << si) & !(3 << sj);
            for (out, &v) in term.table[4 * di + dj].iter().enumerate() {
                if v != ZERO {
                    let o = base | (((out >> 2) as u32) << si) | (((out & 3) as u32) << sj);
                    push(o, v);
                }
            }
        }
        row_entries.clear();
        for &out in &touched {
            let v = std::mem::replace(&mut acc[out as usize], ZERO);
            if v == ZERO {
                continue;
            }
            match map.index_of_code(out) {
                Some(col) => row_entries.push((col, v)),
                None => omega[row] += v,
            }
        }
        touched.clear();
        row_entries.sort_unstable_by_key(|e| e.0);
        for &(c, v) in &row_entries {
            cols.push(c);
            vals.push(v);
        }
        row_ptr.push(cols.len());
    }
    (SparseMatrix::from_parts(dim, dim, row_ptr, cols, vals), omega)
}
