use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{QleError, Result};
use crate::generator::{DriveSpec, MediumSpec};

/// Local digits `(site 1, site 2)` of the two-atom variables, in the order
/// `(S1*, S1, S11, S2*, S3*, S12*, S112*, S2, S12, S3, S112, S22, S122*, S122, S1122)`.
pub const TWO_ATOM_DIGITS: [(u8, u8); 15] = [
    (1, 0),
    (2, 0),
    (3, 0),
    (0, 1),
    (1, 1),
    (2, 1),
    (3, 1),
    (0, 2),
    (1, 2),
    (2, 2),
    (3, 2),
    (0, 3),
    (1, 3),
    (2, 3),
    (3, 3),
];

#[derive(Clone, Copy, PartialEq, Eq)]
enum V {
    S1c,
    S1,
    S11,
    S2c,
    S3c,
    S12c,
    S112c,
    S2,
    S12,
    S3,
    S112,
    S22,
    S122c,
    S122,
    S1122,
}

impl V {
    fn conj(self) -> V {
        use V::*;
        match self {
            S1c => S1,
            S1 => S1c,
            S2c => S2,
            S2 => S2c,
            S3c => S3,
            S3 => S3c,
            S12c => S12,
            S12 => S12c,
            S112c => S112,
            S112 => S112c,
            S122c => S122,
            S122 => S122c,
            v => v,
        }
    }
}

/// Hand-written 15-variable two-atom system, lossless or with dephasing and
/// nonradiative decay, ordered as [`TWO_ATOM_DIGITS`]. Does not use the
/// generator machinery.
pub fn two_atom_reference(spec: &MediumSpec, drive: &DriveSpec) -> Result<(Mat<C64>, Vec<C64>)> {
    spec.validate()?;
    if spec.n() != 2 {
        return Err(QleError::LengthMismatch { expected: 2, got: spec.n() });
    }
    use V::*;
    let i = C64::new(0.0, 1.0);
    let re = |x: f64| C64::new(x, 0.0);
    let w = drive.rabi(spec.gamma_l)?;
    let (d1, d2) = (spec.omega[0] - drive.omega_p, spec.omega[1] - drive.omega_p);
    let (jx, jz) = (spec.jx, spec.jz);
    let gl = spec.gamma_l + spec.gamma_gamma;
    let gr = spec.gamma_r + spec.gamma_gamma;
    let gd = spec.gamma_lambda;

    let rows: Vec<(V, Vec<(V, C64)>, C64)> = vec![
        (
            S1,
            vec![
                (S1, -(i * d1 + gl + gd)),
                (S122, -4.0 * i * jz),
                (S112, 4.0 * i * jx),
                (S2, -2.0 * i * jx),
                (S11, 2.0 * i * w),
            ],
            -i * w,
        ),
        (
            S2,
            vec![(S2, -(i * d2 + gr + gd)), (S112, -4.0 * i * jz), (S122, 4.0 * i * jx), (S1, -2.0 * i * jx)],
            re(0.0),
        ),
        (
            S11,
            vec![(S11, re(-2.0 * gl)), (S12, -2.0 * i * jx), (S12c, 2.0 * i * jx), (S1, i * w), (S1c, -i * w)],
            re(0.0),
        ),
        (S22, vec![(S22, re(-2.0 * gr)), (S12, 2.0 * i * jx), (S12c, -2.0 * i * jx)], re(0.0)),
        (S3, vec![(S3, -(i * (d1 + d2 + 4.0 * jz) + gl + gr + 2.0 * gd)), (S112, 2.0 * i * w), (S2, -i * w)], re(0.0)),
        (
            S12,
            vec![
                (S12, i * (spec.omega[0] - spec.omega[1]) - gl - gr - 2.0 * gd),
                (S22, 2.0 * i * jx),
                (S11, -2.0 * i * jx),
                (S2, i * w),
                (S112, -2.0 * i * w),
            ],
            re(0.0),
        ),
        (
            S122,
            vec![
                (S122, -(i * (d1 + 4.0 * jz) + gl + 2.0 * gr + gd)),
                (S112, 2.0 * i * jx),
                (S1122, 2.0 * i * w),
                (S22, -i * w),
            ],
            re(0.0),
        ),
        (
            S112,
            vec![(S112, -(i * (d2 + 4.0 * jz) + 2.0 * gl + gr + gd)), (S122, 2.0 * i * jx), (S3, i * w), (S12, -i * w)],
            re(0.0),
        ),
        (S1122, vec![(S1122, re(-2.0 * (gl + gr))), (S122, i * w), (S122c, -i * w)], re(0.0)),
    ];

    let mut z = Mat::<C64>::zeros(15, 15);
    let mut omega = vec![C64::new(0.0, 0.0); 15];
    let self_conjugate = |v: V| v.conj() == v;
    for (var, coeffs, constant) in &rows {
        for &(col, c) in coeffs {
            z[(*var as usize, col as usize)] += c;
        }
        omega[*var as usize] += constant;
        if !self_conjugate(*var) {
            let row = var.conj() as usize;
            for &(col, c) in coeffs {
                z[(row, col.conj() as usize)] += c.conj();
            }
            omega[row] += constant.conj();
        }
    }
    Ok((z, omega))
}
