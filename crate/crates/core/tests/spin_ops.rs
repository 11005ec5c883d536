use faer::Mat;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use qle_core::generator::{pair_couplings, CouplingRange, MediumSpec};
use qle_core::longrange_fit::fit_powerlaw;
use qle_core::spin_ops::dense::{embed, kron, max_abs_diff};
use qle_core::spin_ops::{bond_mpo, label_index_map, longrange_mpo, medium_hamiltonian, LocalOp, OperatorLabel};

fn embed_bond(b: &Mat<C64>, site: usize, n: usize) -> Mat<C64> {
    let left = Mat::<C64>::identity(1 << (site - 1), 1 << (site - 1));
    let right = Mat::<C64>::identity(1 << (n - site - 1), 1 << (n - site - 1));
    kron(&kron(&left, b), &right)
}

fn bond_sum(spec: &MediumSpec, omega_p: f64) -> Mat<C64> {
    let n = spec.n();
    let mut h = Mat::<C64>::zeros(1 << n, 1 << n);
    for i in 1..n {
        h += embed_bond(&bond_mpo(i, spec, omega_p).unwrap().product(), i, n);
    }
    h
}

/// `Σ δω_i n_i + Σ_{i<j} c_x(|i-j|) (σ_i†σ_j + h.c.) + c_z(|i-j|) n_i n_j` from
/// single-site embeddings.
fn direct_hamiltonian(
    spec: &MediumSpec,
    omega_p: f64,
    cx: impl Fn(usize) -> f64,
    cz: impl Fn(usize) -> f64,
) -> Mat<C64> {
    let n = spec.n();
    let (up, down, num) = (LocalOp::Raise.matrix(), LocalOp::Lower.matrix(), LocalOp::Number.matrix());
    let mut h = Mat::<C64>::zeros(1 << n, 1 << n);
    for i in 1..=n {
        h += embed(&num, i, n) * faer::Scale(C64::new(spec.omega[i - 1] - omega_p, 0.0));
        for j in i + 1..=n {
            let hop = &embed(&up, i, n) * &embed(&down, j, n) + &embed(&down, i, n) * &embed(&up, j, n);
            h += hop * faer::Scale(C64::new(cx(j - i), 0.0));
            h += (&embed(&num, i, n) * &embed(&num, j, n)) * faer::Scale(C64::new(cz(j - i), 0.0));
        }
    }
    h
}

#[test]
fn label_counts_and_drive_labels() {
    for n in 1..=4 {
        let map = label_index_map(n).unwrap();
        assert_eq!(map.dim(), (1 << (2 * n)) - 1);
        assert!(map.index_of(&OperatorLabel::identity(n).unwrap()).is_none());
        assert_eq!(map.single_site(1, LocalOp::Raise), Some(0));
        assert_eq!(map.single_site(1, LocalOp::Lower), Some(1));
    }
}

#[test]
fn bond_entries_at_figure_couplings() {
    let spec = MediumSpec::uniform(2, 1.0).with_couplings(0.05, 0.05);
    let b = bond_mpo(1, &spec, 1.0).unwrap().product();
    // basis |gg>, |ge>, |eg>, |ee>
    assert!((b[(1, 2)] - C64::new(0.1, 0.0)).norm() < 1e-15);
    assert!((b[(2, 1)] - C64::new(0.1, 0.0)).norm() < 1e-15);
    assert!((b[(3, 3)] - C64::new(0.2, 0.0)).norm() < 1e-15);
    assert_eq!(b[(0, 0)], C64::new(0.0, 0.0));
}

#[test]
fn bonds_sum_to_the_medium_hamiltonian() {
    for n in 2..=6 {
        let mut spec = MediumSpec::uniform(n, 1.0).with_couplings(0.07, 0.03);
        spec.omega = (0..n).map(|i| 0.9 + 0.05 * i as f64).collect();
        let wp = 0.97;
        let h = bond_sum(&spec, wp);
        let direct =
            direct_hamiltonian(&spec, wp, |r| if r == 1 { 0.14 } else { 0.0 }, |r| if r == 1 { 0.12 } else { 0.0 });
        assert!(max_abs_diff(&h, &direct) < 1e-15, "n={n}");
        assert!(max_abs_diff(&h, &medium_hamiltonian(&spec, wp).unwrap()) < 1e-15);
    }
}

#[test]
fn long_range_mpo_contracts_to_fitted_hamiltonian() {
    let n = 5;
    let spec = MediumSpec::uniform(n, 1.0).with_couplings(0.05, 0.04).with_range(CouplingRange::LongRange {
        alpha: 2.0,
        beta: 3.0,
        terms: 2,
    });
    let fx = fit_powerlaw(2.0, 2, n - 1).unwrap();
    let fz = fit_powerlaw(3.0, 2, n - 1).unwrap();
    let mpo = longrange_mpo(&spec, 1.0, &fx, &fz).unwrap();
    assert_eq!(mpo.bond_dimension(), 8);
    let h = mpo.contract(n).unwrap();
    let fitted = direct_hamiltonian(&spec, 1.0, |r| 0.1 * fx.eval(r), |r| 0.16 * fz.eval(r));
    assert!(max_abs_diff(&h, &fitted) < 1e-14);
    assert!(max_abs_diff(&h, &medium_hamiltonian(&spec, 1.0).unwrap()) < 1e-14);
    // against the exact power law, within the fit error times the coupling scale
    let exact = direct_hamiltonian(&spec, 1.0, |r| 0.1 / (r as f64).powi(2), |r| 0.16 / (r as f64).powi(3));
    let bound = (0.1 * fx.max_abs_error() + 0.16 * fz.max_abs_error()) * (n * n) as f64;
    assert!(max_abs_diff(&h, &exact) <= bound);
    assert!(mpo.contract(4).is_err());
}

#[test]
fn steep_long_range_mpo_is_nearest_neighbour() {
    let n = 4;
    let nn = MediumSpec::uniform(n, 1.0).with_couplings(0.05, 0.05);
    let lr = nn.clone().with_range(CouplingRange::LongRange { alpha: 20.0, beta: 20.0, terms: 1 });
    let f = fit_powerlaw(20.0, 1, n - 1).unwrap();
    let h = longrange_mpo(&lr, 1.0, &f, &f).unwrap().contract(n).unwrap();
    let bound = 2.0 * 0.05 * 2f64.powi(-20) * (n * n) as f64;
    assert!(max_abs_diff(&h, &bond_sum(&nn, 1.0)) <= bound);
}

#[test]
fn pair_couplings_list_every_pair_for_long_range() {
    let spec = MediumSpec::uniform(4, 1.0).with_range(CouplingRange::LongRange { alpha: 1.0, beta: 1.0, terms: 2 });
    assert_eq!(pair_couplings(&spec).unwrap().len(), 6);
    assert_eq!(pair_couplings(&MediumSpec::uniform(4, 1.0)).unwrap().len(), 3);
}

proptest! {
    #[test]
    fn conjugation_is_an_involution(digits in proptest::collection::vec(0u8..4, 1..=8)) {
        let label = OperatorLabel::from_digits(&digits).unwrap();
        let c = label.conjugate();
        prop_assert_eq!(c.conjugate(), label.clone());
        prop_assert_eq!(c.charge(), -label.charge());
        let map = label_index_map(digits.len()).unwrap();
        if let Some(i) = map.index_of(&label) {
            let j = map.conjugate_index(i);
            prop_assert_eq!(map.label(j), c);
            prop_assert_eq!(map.conjugate_index(j), i);
        }
    }

    #[test]
    fn label_codes_round_trip(n in 1usize..=6, raw in any::<u32>()) {
        let code = raw % (1u32 << (2 * n));
        let label = OperatorLabel::from_code(n, code).unwrap();
        prop_assert_eq!(label.code(), code);
        prop_assert_eq!(label.len(), n);
    }
}
