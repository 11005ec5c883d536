use serde::{Deserialize, Serialize};

use crate::error::{check_finite, check_nonneg, QleError, Result};

/// Photon group velocity. Numerics use `v_g = 1` throughout.
pub const GROUP_VELOCITY: f64 = 1.0;

/// Range of the spin-spin couplings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CouplingRange {
    NearestNeighbor,
    /// `2Jx/|i-j|^alpha` hopping and `4Jz/|i-j|^beta` interaction, each
    /// approximated by a sum of `terms` exponentials.
    LongRange {
        alpha: f64,
        beta: f64,
        terms: usize,
    },
}

/// Physical description of the atomic chain. Frequencies and rates are in
/// units of the reference transition frequency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MediumSpec {
    /// Transition frequency of each site; the chain length is `omega.len()`.
    pub omega: Vec<f64>,
    pub jx: f64,
    pub jz: f64,
    pub gamma_l: f64,
    pub gamma_r: f64,
    /// Pure-dephasing rate.
    pub gamma_lambda: f64,
    /// Nonradiative decay rate.
    pub gamma_gamma: f64,
    pub range: CouplingRange,
}

impl MediumSpec {
    /// Homogeneous chain with the two-atom figure defaults
    /// (`Jx = Jz = 0.05`, `Γ_L = Γ_R = 0.1`, no losses).
    pub fn uniform(n: usize, omega: f64) -> Self {
        Self {
            omega: vec![omega; n],
            jx: 0.05,
            jz: 0.05,
            gamma_l: 0.1,
            gamma_r: 0.1,
            gamma_lambda: 0.0,
            gamma_gamma: 0.0,
            range: CouplingRange::NearestNeighbor,
        }
    }

    pub fn with_couplings(mut self, jx: f64, jz: f64) -> Self {
        self.jx = jx;
        self.jz = jz;
        self
    }

    pub fn with_baths(mut self, gamma_l: f64, gamma_r: f64) -> Self {
        self.gamma_l = gamma_l;
        self.gamma_r = gamma_r;
        self
    }

    pub fn with_losses(mut self, gamma_lambda: f64, gamma_gamma: f64) -> Self {
        self.gamma_lambda = gamma_lambda;
        self.gamma_gamma = gamma_gamma;
        self
    }

    pub fn with_range(mut self, range: CouplingRange) -> Self {
        self.range = range;
        self
    }

    pub fn n(&self) -> usize {
        self.omega.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.omega.is_empty() {
            return Err(QleError::EmptyChain);
        }
        for &w in &self.omega {
            check_finite("omega", w)?;
        }
        check_finite("jx", self.jx)?;
        check_finite("jz", self.jz)?;
        check_nonneg("gamma_l", self.gamma_l)?;
        check_nonneg("gamma_r", self.gamma_r)?;
        check_nonneg("gamma_lambda", self.gamma_lambda)?;
        check_nonneg("gamma_gamma", self.gamma_gamma)?;
        if let CouplingRange::LongRange { alpha, beta, terms } = self.range {
            for (name, v) in [("alpha", alpha), ("beta", beta)] {
                if !(v.is_finite() && v > 0.0) {
                    return Err(QleError::InvalidParameter { name, value: v, reason: "must be positive" });
                }
            }
            if terms == 0 {
                return Err(QleError::InvalidParameter {
                    name: "terms",
                    value: 0.0,
                    reason: "need at least one exponential",
                });
            }
        }
        Ok(())
    }

    pub fn is_homogeneous(&self) -> bool {
        self.omega.windows(2).all(|w| w[0] == w[1])
    }

    pub fn is_lossless(&self) -> bool {
        self.gamma_lambda == 0.0 && self.gamma_gamma == 0.0
    }

    /// Detunings `ω_i - ω_p`.
    pub fn detunings(&self, omega_p: f64) -> Vec<f64> {
        self.omega.iter().map(|w| w - omega_p).collect()
    }

    pub(crate) fn has_dissipation(&self) -> bool {
        self.gamma_l > 0.0 || self.gamma_r > 0.0 || self.gamma_gamma > 0.0 || self.gamma_lambda > 0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriveSide {
    Left,
    /// Reserved; only left driving is modelled.
    Right,
}

/// Monochromatic coherent drive incident on the chain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    pub omega_p: f64,
    /// Incident intensity `I_in = E_p² / (2π v_g²)`.
    pub intensity: f64,
    pub side: DriveSide,
}

impl DriveSpec {
    pub fn from_intensity(omega_p: f64, intensity: f64) -> Result<Self> {
        check_finite("omega_p", omega_p)?;
        check_nonneg("intensity", intensity)?;
        Ok(Self { omega_p, intensity, side: DriveSide::Left })
    }

    pub fn from_amplitude(omega_p: f64, amplitude: f64) -> Result<Self> {
        check_nonneg("amplitude", amplitude)?;
        let intensity = amplitude * amplitude / (2.0 * std::f64::consts::PI * GROUP_VELOCITY * GROUP_VELOCITY);
        Self::from_intensity(omega_p, intensity)
    }

    pub fn amplitude(&self) -> f64 {
        (2.0 * std::f64::consts::PI * GROUP_VELOCITY * GROUP_VELOCITY * self.intensity).sqrt()
    }

    pub fn with_omega_p(mut self, omega_p: f64) -> Self {
        self.omega_p = omega_p;
        self
    }

    /// Rabi frequency seen by the boundary atom.
    pub fn rabi(&self, gamma_l: f64) -> Result<f64> {
        rabi_from_intensity(self.intensity, gamma_l)
    }
}

/// `Ω_L = sqrt(2 Γ_L v_g I_in)`, from `Ω_L = g_L E_p / v_g`,
/// `Γ_L = π g_L² / v_g` and `I_in = E_p² / (2π v_g²)`.
pub fn rabi_from_intensity(intensity: f64, gamma_l: f64) -> Result<f64> {
    check_nonneg("intensity", intensity)?;
    check_nonneg("gamma_l", gamma_l)?;
    Ok((2.0 * gamma_l * GROUP_VELOCITY * intensity).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rabi_reference_values() {
        let w = rabi_from_intensity(1.6e-5, 0.1).unwrap();
        assert!((w - 0.0018).abs() < 5e-5, "{w}");
        assert_eq!(rabi_from_intensity(0.0, 0.1).unwrap(), 0.0);
        let w = rabi_from_intensity(0.04, 0.1).unwrap();
        assert!((w - 0.008f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn amplitude_and_intensity_agree() {
        // E_p = 0.5 corresponds to I_in ≈ 0.04
        let d = DriveSpec::from_amplitude(1.0, 0.5).unwrap();
        assert!((d.intensity - 0.25 / (2.0 * std::f64::consts::PI)).abs() < 1e-15);
        assert!((d.intensity - 0.04).abs() < 1e-3);
        assert!((d.amplitude() - 0.5).abs() < 1e-14);
        // E_p = 0.01 ↔ I_in = 1.6e-5
        let d = DriveSpec::from_amplitude(1.0, 0.01).unwrap();
        assert!((d.intensity - 1.6e-5).abs() < 1e-7);
    }

    #[test]
    fn negative_inputs_rejected() {
        assert!(rabi_from_intensity(-1.0, 0.1).is_err());
        assert!(rabi_from_intensity(1.0, -0.1).is_err());
        assert!(DriveSpec::from_intensity(1.0, -1e-3).is_err());
    }

    #[test]
    fn validation() {
        assert!(MediumSpec::uniform(3, 1.0).validate().is_ok());
        assert_eq!(MediumSpec::uniform(0, 1.0).validate(), Err(QleError::EmptyChain));
        assert!(MediumSpec::uniform(2, 1.0).with_baths(-0.1, 0.1).validate().is_err());
        let lr = MediumSpec::uniform(3, 1.0).with_range(CouplingRange::LongRange { alpha: 0.0, beta: 1.0, terms: 2 });
        assert!(lr.validate().is_err());
    }
}
