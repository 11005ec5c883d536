#![allow(dead_code)]

use qle_core::generator::{DriveSpec, MediumSpec};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random dissipative chain with optional loss channels.
pub fn random_spec(rng: &mut ChaCha8Rng, n: usize, losses: bool) -> MediumSpec {
    let omega = (0..n).map(|_| rng.gen_range(0.8..1.2)).collect();
    let mut spec = MediumSpec::uniform(n, 1.0)
        .with_couplings(rng.gen_range(0.0..0.2), rng.gen_range(0.0..0.2))
        .with_baths(rng.gen_range(0.02..0.3), rng.gen_range(0.02..0.3));
    spec.omega = omega;
    if losses {
        spec = spec.with_losses(rng.gen_range(0.0..0.1), rng.gen_range(0.0..0.1));
    }
    spec
}

pub fn random_drive(rng: &mut ChaCha8Rng) -> DriveSpec {
    DriveSpec::from_intensity(rng.gen_range(0.8..1.2), rng.gen_range(1e-4..0.3)).unwrap()
}
