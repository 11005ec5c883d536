mod common;

use common::{random_drive, random_spec};
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use qle_core::generator::{
    assemble, assemble_with, AssembleOptions, AssemblyPath, CouplingRange, DriveSide, DriveSpec, MediumSpec,
};
use qle_core::spin_ops::{brute_force_generator, LocalOp, OperatorLabel};
use qle_core::QleError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn idx(gen: &qle_core::generator::Generator, digits: &[u8]) -> usize {
    gen.map().index_of(&OperatorLabel::from_digits(digits).unwrap()).unwrap()
}

#[test]
fn matches_dense_commutator_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..=4 {
        for losses in [false, true] {
            for _ in 0..3 {
                let spec = random_spec(&mut rng, n, losses);
                let drive = random_drive(&mut rng);
                let gen = assemble(&spec, &drive).unwrap();
                let oracle = brute_force_generator(&spec, &drive).unwrap();
                assert!(gen.z().max_abs_diff_dense(&oracle.z) <= 1e-13, "n={n} losses={losses}");
                let dw = gen.omega().iter().zip(&oracle.omega).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                assert!(dw <= 1e-13);
            }
        }
    }
}

#[test]
fn drive_vector_has_two_entries() {
    let spec = MediumSpec::uniform(3, 1.0);
    let drive = DriveSpec::from_intensity(1.0, 0.04).unwrap();
    let gen = assemble(&spec, &drive).unwrap();
    let w = gen.rabi();
    assert!((w - 0.008f64.sqrt()).abs() < 1e-15);
    let raise = gen.map().single_site(1, LocalOp::Raise).unwrap();
    let lower = gen.map().single_site(1, LocalOp::Lower).unwrap();
    assert_eq!((raise, lower), (0, 1));
    assert_eq!(gen.omega()[raise], C64::new(0.0, w));
    assert_eq!(gen.omega()[lower], C64::new(0.0, -w));
    assert_eq!(gen.omega().iter().filter(|v| v.norm() > 0.0).count(), 2);
}

#[test]
fn two_atom_row_coefficients() {
    let (w1, wp, jx, jz, gl) = (1.03, 0.98, 0.07, 0.04, 0.12);
    let mut spec = MediumSpec::uniform(2, 1.0).with_couplings(jx, jz).with_baths(gl, 0.09);
    spec.omega = vec![w1, 0.95];
    let drive = DriveSpec::from_intensity(wp, 0.02).unwrap();
    let gen = assemble(&spec, &drive).unwrap();
    let w = gen.rabi();
    let i = C64::new(0.0, 1.0);
    let row = idx(&gen, &[2, 0]);
    let z = gen.z();
    let close = |a: C64, b: C64| (a - b).norm() < 1e-14;
    assert!(close(z.get(row, row), -(i * (w1 - wp) + gl)));
    assert!(close(z.get(row, idx(&gen, &[3, 2])), 4.0 * i * jx));
    assert!(close(z.get(row, idx(&gen, &[0, 2])), -2.0 * i * jx));
    assert!(close(z.get(row, idx(&gen, &[2, 3])), -4.0 * i * jz));
    assert!(close(z.get(row, idx(&gen, &[3, 0])), 2.0 * i * w));
    assert_eq!(z.row(row).0.len(), 5);
    assert!(close(gen.omega()[row], -i * w));
}

#[test]
fn closed_undriven_chain_is_diagonal_and_imaginary() {
    let mut spec = MediumSpec::uniform(3, 1.0).with_couplings(0.0, 0.0).with_baths(0.0, 0.0);
    spec.omega = vec![0.9, 1.0, 1.3];
    let drive = DriveSpec::from_intensity(1.1, 0.0).unwrap();
    let gen = assemble(&spec, &drive).unwrap();
    assert!(!gen.is_dissipative());
    assert!(gen.omega().iter().all(|v| *v == C64::new(0.0, 0.0)));
    for (r, c, v) in gen.z().iter() {
        assert_eq!(r, c);
        assert_eq!(v.re, 0.0);
    }
}

#[test]
fn homogeneous_path_equals_generic_path() {
    for n in 2..=6 {
        let spec = MediumSpec::uniform(n, 1.0).with_couplings(0.05, 0.13).with_losses(0.02, 0.01);
        let drive = DriveSpec::from_intensity(0.97, 0.16).unwrap();
        let fast =
            assemble_with(&spec, &drive, &AssembleOptions { path: AssemblyPath::Homogeneous, ..Default::default() })
                .unwrap();
        let generic =
            assemble_with(&spec, &drive, &AssembleOptions { path: AssemblyPath::Generic, ..Default::default() })
                .unwrap();
        assert!(fast.z().max_abs_diff(generic.z()) <= 1e-15, "n={n}");
        assert_eq!(fast.omega(), generic.omega());
    }
}

#[test]
fn homogeneous_path_rejects_disorder() {
    let mut spec = MediumSpec::uniform(3, 1.0);
    spec.omega[1] = 1.1;
    let drive = DriveSpec::from_intensity(1.0, 0.01).unwrap();
    let opts = AssembleOptions { path: AssemblyPath::Homogeneous, ..Default::default() };
    assert!(matches!(assemble_with(&spec, &drive, &opts), Err(QleError::InvalidParameter { .. })));
}

#[test]
fn zero_loss_rates_reproduce_lossless_generator() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let spec = random_spec(&mut rng, 4, false);
    let drive = random_drive(&mut rng);
    let a = assemble(&spec, &drive).unwrap();
    let b = assemble(&spec.clone().with_losses(0.0, 0.0), &drive).unwrap();
    assert_eq!(a.z(), b.z());
    assert_eq!(a.omega(), b.omega());
}

#[test]
fn size_cap_and_drive_side_are_enforced() {
    let drive = DriveSpec::from_intensity(1.0, 0.01).unwrap();
    let err = assemble(&MediumSpec::uniform(9, 1.0), &drive).unwrap_err();
    assert!(matches!(err, QleError::SizeCap { n: 9, cap: 8 }));
    let opts = AssembleOptions { n_cap: 3, ..Default::default() };
    assert!(matches!(assemble_with(&MediumSpec::uniform(4, 1.0), &drive, &opts), Err(QleError::SizeCap { .. })));
    let right = DriveSpec { side: DriveSide::Right, ..drive };
    assert!(assemble(&MediumSpec::uniform(2, 1.0), &right).is_err());
    assert!(matches!(assemble(&MediumSpec::uniform(0, 1.0), &drive), Err(QleError::EmptyChain)));
}

#[test]
fn steep_long_range_reduces_to_nearest_neighbour() {
    let nn = MediumSpec::uniform(4, 1.0).with_couplings(0.05, 0.05);
    let lr = nn.clone().with_range(CouplingRange::LongRange { alpha: 20.0, beta: 20.0, terms: 1 });
    let drive = DriveSpec::from_intensity(1.0, 0.16).unwrap();
    let a = assemble(&nn, &drive).unwrap();
    let b = assemble(&lr, &drive).unwrap();
    assert!(a.z().max_abs_diff(b.z()) < 1e-5);
    assert!(b.fits().is_some());
}

#[test]
fn long_range_generator_matches_oracle() {
    let spec = MediumSpec::uniform(4, 1.0).with_couplings(0.05, 0.04).with_range(CouplingRange::LongRange {
        alpha: 3.0,
        beta: 2.0,
        terms: 2,
    });
    let drive = DriveSpec::from_intensity(1.02, 0.05).unwrap();
    let gen = assemble(&spec, &drive).unwrap();
    let oracle = brute_force_generator(&spec, &drive).unwrap();
    assert!(gen.z().max_abs_diff_dense(&oracle.z) <= 1e-13);
}

fn conjugation_error(gen: &qle_core::generator::Generator) -> f64 {
    let map = gen.map();
    let mut worst: f64 = 0.0;
    for (r, c, v) in gen.z().iter() {
        let rc = map.conjugate_index(r);
        let cc = map.conjugate_index(c);
        worst = worst.max((gen.z().get(rc, cc) - v.conj()).norm());
    }
    for (i, w) in gen.omega().iter().enumerate() {
        worst = worst.max((gen.omega()[map.conjugate_index(i)] - w.conj()).norm());
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn conjugation_pairing(seed in any::<u64>(), n in 1usize..=5, losses in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gen = assemble(&random_spec(&mut rng, n, losses), &random_drive(&mut rng)).unwrap();
        prop_assert!(conjugation_error(&gen) <= 1e-15);
    }

    #[test]
    fn row_sparsity_is_linear_in_n(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gen = assemble(&random_spec(&mut rng, n, true), &random_drive(&mut rng)).unwrap();
        // one-site terms reach at most 3 other digits per site, bonds at most 15 per bond
        prop_assert!(gen.z().max_row_nnz() <= 1 + 3 * n + 15 * (n - 1));
    }

    #[test]
    fn long_range_row_sparsity_is_bounded(seed in any::<u64>(), n in 2usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = random_spec(&mut rng, n, false)
            .with_range(CouplingRange::LongRange { alpha: 2.0, beta: 3.0, terms: 2 });
        let gen = assemble(&spec, &random_drive(&mut rng)).unwrap();
        prop_assert!(gen.z().max_row_nnz() <= 1 + 3 * n + 15 * n * (n - 1) / 2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn spectrum_is_stable(seed in any::<u64>(), n in 1usize..=4, losses in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gen = assemble(&random_spec(&mut rng, n, losses), &random_drive(&mut rng)).unwrap();
        let eig = gen.z().to_dense().eigenvalues().unwrap();
        let max_re = eig.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(max_re <= 1e-12, "max Re = {max_re}");
    }
}
