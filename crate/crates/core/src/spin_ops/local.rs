use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64 as C64;

use crate::error::{QleError, Result};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// A 2x2 complex matrix in the ground-first basis `(|g>, |e>)`.
#[derive(Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[ZERO, ZERO], [ZERO, ZERO]]);
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);

    pub fn scale(self, s: C64) -> Mat2 {
        let m = self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn scale_re(self, s: f64) -> Mat2 {
        self.scale(C64::new(s, 0.0))
    }

    pub fn dagger(self) -> Mat2 {
        let m = self.0;
        Mat2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn commutator(self, other: Mat2) -> Mat2 {
        self * other - other * self
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().flatten().all(|z| *z == ZERO)
    }

    /// Coefficients of this matrix on the operator basis `{I, σ†, σ, σ†σ}`.
    ///
    /// The basis is complete on 2x2 matrices, so the expansion is exact:
    /// `m = m00 I + m10 σ† + m01 σ + (m11 - m00) σ†σ`.
    pub fn coefficients(&self) -> [C64; 4] {
        let m = self.0;
        [m[0][0], m[1][0], m[0][1], m[1][1] - m[0][0]]
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        worst
    }
}

impl fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}, {:?}]", self.0[0], self.0[1])
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (self.0, rhs.0);
        let mut out = [[ZERO; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Mat2(out)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (self.0, rhs.0);
        Mat2([[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]])
    }
}

impl AddAssign for Mat2 {
    fn add_assign(&mut self, rhs: Mat2) {
        *self = *self + rhs;
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        self + (-rhs)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale_re(-1.0)
    }
}

/// One factor of the local operator basis `{I, σ†, σ, σ†σ}`.
///
/// The discriminant is the base-4 digit used in [`OperatorLabel`](super::OperatorLabel).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum LocalOp {
    Identity = 0,
    Raise = 1,
    Lower = 2,
    Number = 3,
}

impl LocalOp {
    pub const ALL: [LocalOp; 4] = [LocalOp::Identity, LocalOp::Raise, LocalOp::Lower, LocalOp::Number];

    pub fn from_digit(d: u8) -> Result<Self> {
        Self::ALL.get(d as usize).copied().ok_or(QleError::InvalidDigit(d))
    }

    pub fn digit(self) -> u8 {
        self as u8
    }

    pub fn matrix(self) -> Mat2 {
        match self {
            LocalOp::Identity => Mat2::IDENTITY,
            // σ† = |e><g|: row e, column g
            LocalOp::Raise => Mat2([[ZERO, ZERO], [ONE, ZERO]]),
            LocalOp::Lower => Mat2([[ZERO, ONE], [ZERO, ZERO]]),
            LocalOp::Number => Mat2([[ZERO, ZERO], [ZERO, ONE]]),
        }
    }

    /// Hermitian conjugate; swaps raise and lower.
    pub fn conjugate(self) -> Self {
        match self {
            LocalOp::Raise => LocalOp::Lower,
            LocalOp::Lower => LocalOp::Raise,
            other => other,
        }
    }

    /// Net excitation carried by the operator (+1 for σ†, -1 for σ).
    pub fn charge(self) -> i32 {
        match self {
            LocalOp::Raise => 1,
            LocalOp::Lower => -1,
            _ => 0,
        }
    }
}

impl fmt::Display for LocalOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LocalOp::Identity => "I",
            LocalOp::Raise => "σ†",
            LocalOp::Lower => "σ",
            LocalOp::Number => "n",
        };
        f.write_str(s)
    }
}
