mod common;

use common::*;
use proptest::prelude::*;
use proxygap_core::linalg::matrix::kron_vec;
use proxygap_core::linalg::*;
use proxygap_core::models::chains::{heisenberg_chain, heisenberg_pauli, total_z_diag, HeisenbergParams};
use proxygap_core::models::{bell_staircase, dicke_state};
use proxygap_core::oracle::{alpha_product_bruteforce, min_energy_product};
use proxygap_core::thermo::{beta_from_energy, gibbs_at, gibbs_weights, impurity, linear_entropy_max_spectrum};
use proxygap_core::witness::sampling::{haar_vector, random_product_state, sample_separable};
use proxygap_core::witness::{dicke_witness, max_schmidt_overlap, projector_witness};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn eigh_reconstructs(seed in any::<u64>(), d in 1usize..=64) {
        let m = random_hermitian(d, &mut rng(seed));
        let s = eigh(&m).unwrap();
        prop_assert!(s.reconstruct().sub(&m).frobenius_norm() <= 1e-10 * m.frobenius_norm());
    }

    #[test]
    fn exp_trace(seed in any::<u64>(), d in 1usize..=32) {
        let m = random_hermitian(d, &mut rng(seed));
        let s = eigh(&m).unwrap();
        let t = spectral_fn(&s, vec![d], f64::exp).unwrap().trace();
        let direct: f64 = s.eigenvalues.iter().map(|x| x.exp()).sum();
        prop_assert!((t - direct).abs() <= 1e-10 * direct);
    }

    #[test]
    fn partial_transpose_properties(seed in any::<u64>(), subset in prop::sample::subsequence(vec![0usize, 1, 2], 1..3)) {
        let m = HermitianOperator::qubits(random_hermitian(8, &mut rng(seed)), 3).unwrap();
        let cut = Bipartition::new(subset, 3).unwrap();
        let pt = partial_transpose(&m, &cut).unwrap();
        prop_assert!((pt.trace() - m.trace()).abs() < 1e-12);
        prop_assert!(pt.matrix().hermiticity_defect() < 1e-12);
        let back = partial_transpose(&pt, &cut).unwrap();
        prop_assert!(back.matrix().sub(m.matrix()).max_abs() == 0.0);
    }

    #[test]
    fn psd_projection_idempotent(seed in any::<u64>(), d in 1usize..=16) {
        let m = random_hermitian(d, &mut rng(seed));
        let p = psd_project_matrix(&m).unwrap();
        let pp = psd_project_matrix(&p).unwrap();
        let scale = m.frobenius_norm();
        prop_assert!(eigvalsh(&p).unwrap()[0] >= -1e-12 * scale);
        prop_assert!(pp.sub(&p).max_abs() <= 1e-12 * scale);
    }

    #[test]
    fn xxz_conserves_magnetization(j in -2.0f64..2.0, jz in -2.0f64..2.0, b in -1.0f64..1.0, n in 2usize..=6) {
        let h = heisenberg_chain(&HeisenbergParams { n, jx: j, jy: j, jz, b, periodic: true }).unwrap();
        let z = Matrix::from_diag(&total_z_diag(n));
        prop_assert!(h.matrix().commutator_norm(&z) <= 1e-10);
    }

    #[test]
    fn relabelled_ring_has_same_spectrum(jx in -2.0f64..2.0, jy in -2.0f64..2.0, jz in -2.0f64..2.0, n in 3usize..=6) {
        let p = HeisenbergParams { n, jx, jy, jz, b: 0.3, periodic: true };
        let a = heisenberg_chain(&p).unwrap().eigenvalues().unwrap();
        // Sites visited in reverse order give the same ring.
        let mut sum = proxygap_core::models::PauliSum::new(n);
        for i in 0..n {
            let (u, v) = (n - 1 - i, (2 * n - 2 - i) % n);
            sum.add(-jx, &[(u, 'x'), (v, 'x')]).add(-jy, &[(u, 'y'), (v, 'y')]).add(-jz, &[(u, 'z'), (v, 'z')]);
            sum.add(0.3, &[(i, 'z')]);
        }
        let b = sum.to_dense().unwrap().eigenvalues().unwrap();
        prop_assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-9));
    }

    #[test]
    fn dicke_is_magnetization_eigenvector(n in 1usize..=10, m_frac in 0.0f64..=1.0) {
        let m = (m_frac * n as f64).round() as usize;
        let psi = dicke_state(n, m).unwrap();
        let z = total_z_diag(n);
        let target = n as f64 - 2.0 * m as f64;
        prop_assert!(psi.iter().zip(&z).all(|(a, zi)| a.norm() == 0.0 || (zi - target).abs() < 1e-12));
    }

    #[test]
    fn schmidt_overlap_local_unitary_invariant(seed in any::<u64>(), subset in prop::sample::subsequence(vec![0usize, 1, 2], 1..3)) {
        let mut r = rng(seed);
        let psi = haar_vector(8, &mut r);
        let u: Vec<Matrix> = (0..3).map(|_| eigh(&random_hermitian(2, &mut r)).unwrap().eigenvectors).collect();
        let full = Matrix::from_fn(8, 8, |i, j| {
            (0..3).map(|k| u[k][((i >> (2 - k)) & 1, (j >> (2 - k)) & 1)]).product()
        });
        let rotated = full.matvec(&psi);
        let cut = Bipartition::new(subset, 3).unwrap();
        let a = max_schmidt_overlap(&psi, &[2, 2, 2], &cut).unwrap();
        let b = max_schmidt_overlap(&rotated, &[2, 2, 2], &cut).unwrap();
        prop_assert!((a - b).abs() < 1e-10);
        let pa = alpha_product_bruteforce(&psi, &[2, 2, 2], 12, 7).unwrap();
        let pb = alpha_product_bruteforce(&rotated, &[2, 2, 2], 12, 7).unwrap();
        prop_assert!((pa - pb).abs() < 1e-6, "{pa} vs {pb}");
    }
}

#[test]
fn bell_staircase_spectrum_is_integer_ladder() {
    for n in [2, 4, 6] {
        let s = bell_staircase(n).unwrap();
        let dense = eigvalsh(&s.reconstruct()).unwrap();
        for (k, e) in dense.iter().enumerate() {
            assert!((e - k as f64).abs() < 1e-9);
        }
        // Every eigenvector is maximally entangled across the halves.
        let d = 1usize << (n / 2);
        let halves = Bipartition::new((0..n / 2).collect(), n).unwrap();
        for k in [0, d * d - 1] {
            let o = max_schmidt_overlap(&s.eigenvector(k), &vec![2; n], &halves).unwrap();
            assert!((o - 1.0 / d as f64).abs() < 1e-12);
        }
    }
}

#[test]
fn dicke_witness_nonnegative_on_product_states() {
    let w = dicke_witness(4, 2).unwrap();
    let mut r = rng(2024);
    let worst = (0..10_000)
        .map(|_| w.operator.expectation(&sample_separable(&w.class, &[2, 2, 2, 2], &mut r)))
        .fold(f64::INFINITY, f64::min);
    assert!(worst >= -1e-9, "{worst}");
    // Not a biseparability witness.
    let pair = dicke_state(2, 1).unwrap();
    assert!(w.operator.expectation(&kron_vec(&pair, &pair)) < -0.5);
}

#[test]
fn projector_witness_nonnegative_on_its_class() {
    let mut r = rng(99);
    let psi = haar_vector(8, &mut r);
    let (w, _) = projector_witness(&[psi], &[2, 2, 2], None, 4).unwrap();
    let worst = (0..10_000)
        .map(|_| w.operator.expectation(&sample_separable(&w.class, &[2, 2, 2], &mut r)))
        .fold(f64::INFINITY, f64::min);
    assert!(worst >= -1e-9, "{worst}");
}

#[test]
fn dicke_witness_couples_neighbouring_sectors_only() {
    let n = 5;
    let w = dicke_witness(n, 2).unwrap();
    let m = w.operator.matrix();
    for i in 0..1usize << n {
        for j in 0..1usize << n {
            let dk = (i.count_ones() as i64 - j.count_ones() as i64).abs();
            if dk > 1 {
                assert_eq!(m[(i, j)].norm(), 0.0);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn entropy_slope_is_beta(seed in any::<u64>(), frac in 0.1f64..0.9) {
        let spec = random_hermitian(6, &mut rng(seed));
        let spec = eigvalsh(&spec).unwrap();
        let mean = spec.iter().sum::<f64>() / 6.0;
        let e = spec[0] + frac * (mean - spec[0]);
        let beta = beta_from_energy(&spec, e).unwrap();
        let h = 1e-5 * (mean - spec[0]);
        let s = |x: f64| gibbs_at(&spec, beta_from_energy(&spec, x).unwrap()).unwrap().entropy;
        let slope = (s(e + h) - s(e - h)) / (2.0 * h);
        prop_assert!(rel_close(slope, beta, 1e-4, 1e-6), "{slope} vs {beta}");
    }

    #[test]
    fn entropy_concave_in_energy(seed in any::<u64>(), a in 0.05f64..0.95, b in 0.05f64..0.95) {
        let spec = eigvalsh(&random_hermitian(6, &mut rng(seed))).unwrap();
        let mean = spec.iter().sum::<f64>() / 6.0;
        let (ea, eb) = (spec[0] + a * (mean - spec[0]), spec[0] + b * (mean - spec[0]));
        let s = |x: f64| gibbs_at(&spec, beta_from_energy(&spec, x).unwrap()).unwrap().entropy;
        prop_assert!(s(0.5 * (ea + eb)) >= 0.5 * (s(ea) + s(eb)) - 1e-9);
    }

    #[test]
    fn linear_maximum_beats_gibbs_impurity(seed in any::<u64>(), frac in 0.05f64..0.95) {
        let spec = eigvalsh(&random_hermitian(8, &mut rng(seed))).unwrap();
        let mean = spec.iter().sum::<f64>() / 8.0;
        let e = spec[0] + frac * (mean - spec[0]);
        let beta = beta_from_energy(&spec, e).unwrap();
        let lin = linear_entropy_max_spectrum(&spec, e).unwrap();
        prop_assert!(lin.value >= impurity(&gibbs_weights(&spec, beta)) - 1e-12);
    }

    #[test]
    fn gibbs_shift_invariance(seed in any::<u64>(), beta in 0.0f64..5.0, c in -10.0f64..10.0) {
        let spec = eigvalsh(&random_hermitian(6, &mut rng(seed))).unwrap();
        let shifted: Vec<f64> = spec.iter().map(|x| x + c).collect();
        let (a, b) = (gibbs_at(&spec, beta).unwrap(), gibbs_at(&shifted, beta).unwrap());
        prop_assert!((a.entropy - b.entropy).abs() < 1e-10);
        prop_assert!((a.energy + c - b.energy).abs() < 1e-10 * (1.0 + c.abs()));
    }
}

#[test]
fn product_minimum_above_ground_energy() {
    let mut r = rng(8);
    for n in 2..=4 {
        let h = random_qubit_hamiltonian(n, &mut r);
        let e0 = h.eigenvalues().unwrap()[0];
        let m = min_energy_product(&h, 20, 5).unwrap();
        assert!(m.energy >= e0 - 1e-10);
        assert!((h.expectation(&m.best.vector) - m.energy).abs() < 1e-9);
    }
    // A product ground state is reached exactly.
    let hp = heisenberg_pauli(&HeisenbergParams::xxx(4, 1.0, 0.0)).unwrap().to_dense().unwrap();
    let m = min_energy_product(&hp, 20, 5).unwrap();
    assert!((m.energy - hp.eigenvalues().unwrap()[0]).abs() < 1e-9);
}

#[test]
fn overlap_bounds_and_determinism() {
    let mut r = rng(12);
    for n in 2..=4 {
        let psi = haar_vector(1 << n, &mut r);
        let a = alpha_product_bruteforce(&psi, &vec![2; n], 10, 3).unwrap();
        assert!(a <= 1.0 + 1e-12 && a >= 1.0 / (1 << n) as f64 - 1e-12);
        assert_eq!(a, alpha_product_bruteforce(&psi, &vec![2; n], 10, 3).unwrap());
    }
    let product = random_product_state(&[2, 2, 2], &mut r);
    assert!((alpha_product_bruteforce(&product, &[2, 2, 2], 5, 1).unwrap() - 1.0).abs() < 1e-9);
    let h = random_qubit_hamiltonian(3, &mut r);
    assert_eq!(min_energy_product(&h, 8, 21).unwrap().energy, min_energy_product(&h, 8, 21).unwrap().energy);
    let d42 = dicke_state(4, 2).unwrap();
    let exact = max_schmidt_overlap(&d42, &[2, 2, 2, 2], &Bipartition::new(vec![0, 1], 4).unwrap()).unwrap();
    assert!(alpha_product_bruteforce(&d42, &[2, 2, 2, 2], 20, 2).unwrap() <= exact + 1e-9);
}
