//! Steady states and transient integration of `dS/dt = Z S + Ω`.

mod integrate;
mod precond;
mod reference;
mod steady;

use std::sync::Arc;

use num_complex::Complex64 as C64;

pub use integrate::{evolve, evolve_with, relax, EvolveOptions, Relaxation, Trajectory};
pub use reference::{two_atom_reference, TWO_ATOM_DIGITS};
pub use steady::{steady_state, steady_state_with, SteadyBackend, SteadyOptions, DIRECT_MAX_DIM};

use crate::error::{QleError, Result};
use crate::generator::Generator;
use crate::spin_ops::{LabelMap, OperatorLabel};

/// Expectation values of all non-identity labels at one time, aligned to a
/// generator's label map.
#[derive(Clone, Debug)]
pub struct StateVector {
    map: Arc<LabelMap>,
    values: Vec<C64>,
    time: f64,
}

impl StateVector {
    pub fn new(map: Arc<LabelMap>, values: Vec<C64>, time: f64) -> Result<Self> {
        if values.len() != map.dim() {
            return Err(QleError::LengthMismatch { expected: map.dim(), got: values.len() });
        }
        Ok(Self { map, values, time })
    }

    /// All atoms in the ground state.
    pub fn ground(gen: &Generator) -> Self {
        Self { map: gen.shared_map(), values: vec![C64::new(0.0, 0.0); gen.dim()], time: 0.0 }
    }

    /// All atoms in the excited state: every pure-population label is 1,
    /// coherences vanish.
    pub fn excited(gen: &Generator) -> Self {
        let map = gen.shared_map();
        let values = map
            .codes()
            .iter()
            .map(|&c| {
                let label = OperatorLabel::from_code(map.n(), c).expect("valid code");
                if label.is_population() {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect();
        Self { map, values, time: 0.0 }
    }

    pub fn n(&self) -> usize {
        self.map.n()
    }

    pub fn map(&self) -> &LabelMap {
        &self.map
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn get(&self, label: &OperatorLabel) -> Option<C64> {
        self.map.index_of(label).map(|i| self.values[i])
    }

    /// Joint excitation probability of `sites`.
    pub fn population(&self, sites: &[usize]) -> Option<f64> {
        self.map.population(sites).map(|i| self.values[i].re)
    }

    /// Largest violation of `S[ℓ*] = conj(S[ℓ])`.
    pub fn hermiticity_error(&self) -> f64 {
        (0..self.values.len())
            .map(|i| (self.values[self.map.conjugate_index(i)] - self.values[i].conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}
