use std::fmt;

use super::LocalOp;
use crate::error::{QleError, Result};

/// Largest chain length the packed `u32` label codes can address.
pub const MAX_SITES: usize = 15;

/// One element of `{I, σ†, σ, σ†σ}^{⊗N}`, site 1 first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OperatorLabel {
    ops: Vec<LocalOp>,
}

impl OperatorLabel {
    pub fn new(ops: Vec<LocalOp>) -> Result<Self> {
        if ops.is_empty() {
            return Err(QleError::EmptyChain);
        }
        if ops.len() > MAX_SITES {
            return Err(QleError::SizeCap { n: ops.len(), cap: MAX_SITES });
        }
        Ok(Self { ops })
    }

    pub fn from_digits(digits: &[u8]) -> Result<Self> {
        let ops = digits.iter().map(|&d| LocalOp::from_digit(d)).collect::<Result<Vec<_>>>()?;
        Self::new(ops)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(vec![LocalOp::Identity; n])
    }

    /// `op` at `site` (1-based), identity elsewhere.
    pub fn single(n: usize, site: usize, op: LocalOp) -> Result<Self> {
        Self::with_ops(n, &[(site, op)])
    }

    /// Identity everywhere except the listed `(site, op)` pairs (1-based sites).
    pub fn with_ops(n: usize, placed: &[(usize, LocalOp)]) -> Result<Self> {
        let mut ops = vec![LocalOp::Identity; n];
        for &(site, op) in placed {
            if site == 0 || site > n {
                return Err(QleError::LengthMismatch { expected: n, got: site });
            }
            ops[site - 1] = op;
        }
        Self::new(ops)
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[LocalOp] {
        &self.ops
    }

    /// Operator at `site` (1-based).
    pub fn op(&self, site: usize) -> LocalOp {
        self.ops[site - 1]
    }

    pub fn digits(&self) -> Vec<u8> {
        self.ops.iter().map(|o| o.digit()).collect()
    }

    pub fn conjugate(&self) -> Self {
        Self { ops: self.ops.iter().map(|o| o.conjugate()).collect() }
    }

    pub fn is_identity(&self) -> bool {
        self.ops.iter().all(|&o| o == LocalOp::Identity)
    }

    /// True for products of identities and number operators.
    pub fn is_population(&self) -> bool {
        self.ops.iter().all(|&o| matches!(o, LocalOp::Identity | LocalOp::Number))
    }

    /// Sites (1-based) carrying a number operator.
    pub fn number_sites(&self) -> Vec<usize> {
        self.ops.iter().enumerate().filter(|(_, &o)| o == LocalOp::Number).map(|(i, _)| i + 1).collect()
    }

    pub fn charge(&self) -> i32 {
        self.ops.iter().map(|o| o.charge()).sum()
    }

    /// Packed base-4 code with site 1 as the most significant digit.
    pub fn code(&self) -> u32 {
        self.ops.iter().fold(0u32, |acc, o| (acc << 2) | o.digit() as u32)
    }

    pub fn from_code(n: usize, code: u32) -> Result<Self> {
        if n == 0 {
            return Err(QleError::EmptyChain);
        }
        if n > MAX_SITES {
            return Err(QleError::SizeCap { n, cap: MAX_SITES });
        }
        let ops = (1..=n).map(|site| digit_at(code, n, site)).collect();
        Self::new(ops)
    }
}

impl fmt::Display for OperatorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, op) in self.ops.iter().enumerate() {
            if i > 0 {
                f.write_str("⊗")?;
            }
            write!(f, "{op}")?;
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn digit_at(code: u32, n: usize, site: usize) -> LocalOp {
    match (code >> (2 * (n - site))) & 3 {
        0 => LocalOp::Identity,
        1 => LocalOp::Raise,
        2 => LocalOp::Lower,
        _ => LocalOp::Number,
    }
}

#[inline]
pub(crate) fn conjugate_code(code: u32, n: usize) -> u32 {
    // swap digits 1 <-> 2, keep 0 and 3
    let mut out = code;
    for site in 0..n {
        let shift = 2 * site;
        let d = (code >> shift) & 3;
        if d == 1 || d == 2 {
            out ^= 3 << shift;
        }
    }
    out
}

const UNINDEXED: u32 = u32::MAX;

/// Bijection between the `4^N - 1` non-identity labels and row indices.
///
/// The table order puts `σ₁†⊗I…` at index 0 and `σ₁⊗I…` at index 1, so the
/// drive vector has its two nonzero entries first; every other label follows
/// in increasing code order. Callers should always go through the table.
#[derive(Clone, Debug)]
pub struct LabelMap {
    n: usize,
    codes: Vec<u32>,
    index: Vec<u32>,
}

impl LabelMap {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(QleError::EmptyChain);
        }
        if n > MAX_SITES {
            return Err(QleError::SizeCap { n, cap: MAX_SITES });
        }
        let total = 1u32 << (2 * n);
        let raise1 = 1u32 << (2 * (n - 1));
        let lower1 = 2u32 << (2 * (n - 1));
        let mut codes = Vec::with_capacity(total as usize - 1);
        codes.push(raise1);
        codes.push(lower1);
        codes.extend((1..total).filter(|&c| c != raise1 && c != lower1));
        let mut index = vec![UNINDEXED; total as usize];
        for (i, &c) in codes.iter().enumerate() {
            index[c as usize] = i as u32;
        }
        Ok(Self { n, codes, index })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of indexed labels, `4^N - 1`.
    pub fn dim(&self) -> usize {
        self.codes.len()
    }

    pub fn index_of(&self, label: &OperatorLabel) -> Option<usize> {
        if label.len() != self.n {
            return None;
        }
        self.index_of_code(label.code())
    }

    pub fn index_of_code(&self, code: u32) -> Option<usize> {
        match self.index.get(code as usize) {
            Some(&i) if i != UNINDEXED => Some(i as usize),
            _ => None,
        }
    }

    pub fn code(&self, idx: usize) -> u32 {
        self.codes[idx]
    }

    pub fn label(&self, idx: usize) -> OperatorLabel {
        OperatorLabel::from_code(self.n, self.codes[idx]).expect("map holds valid codes")
    }

    pub fn conjugate_index(&self, idx: usize) -> usize {
        let c = conjugate_code(self.codes[idx], self.n);
        self.index[c as usize] as usize
    }

    /// Index of the label with `op` on `site`, identity elsewhere.
    pub fn single_site(&self, site: usize, op: LocalOp) -> Option<usize> {
        if site == 0 || site > self.n || op == LocalOp::Identity {
            return None;
        }
        self.index_of_code((op.digit() as u32) << (2 * (self.n - site)))
    }

    /// Index of the population label with number operators on `sites`.
    pub fn population(&self, sites: &[usize]) -> Option<usize> {
        let mut code = 0u32;
        for &s in sites {
            if s == 0 || s > self.n {
                return None;
            }
            code |= 3 << (2 * (self.n - s));
        }
        self.index_of_code(code)
    }

    pub fn codes(&self) -> &[u32] {
        &self.codes
    }
}

/// Builds the label/index bijection for a chain of `n` sites.
pub fn label_index_map(n: usize) -> Result<LabelMap> {
    LabelMap::new(n)
}
