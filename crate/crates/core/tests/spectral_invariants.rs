use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spectral_corners::classify::{analytic_classification, extreme_eigenvalues_by_size};
use spectral_corners::families::{dense_truncation, entry, DenseSymMatrix, FamilyParams};
use spectral_corners::fastops::LinearOperatorHandle;
use spectral_corners::spectra::{eig_dense, eig_dense_full, inertia, lanczos_extremes, DEFAULT_ZERO_TOL};

fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> DenseSymMatrix {
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v: f64 = rng.gen_range(-1.0..1.0);
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    DenseSymMatrix::from_row_major(n, 1, data).unwrap()
}

#[test]
fn jacobi_reconstructs_random_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..20 {
        let n = 64;
        let m = random_symmetric(n, &mut rng);
        let e = eig_dense_full(&m).unwrap();
        assert!(e.off_norm <= 1e-12 * m.frobenius());
        let q = &e.vectors;
        let mut orth: f64 = 0.0;
        let mut recon = 0.0;
        for i in 0..n {
            for j in 0..n {
                let qtq: f64 = (0..n).map(|k| q[k * n + i] * q[k * n + j]).sum();
                orth = orth.max((qtq - if i == j { 1.0 } else { 0.0 }).abs());
                let qlq: f64 = (0..n).map(|k| q[i * n + k] * e.values[k] * q[j * n + k]).sum();
                recon += (qlq - m.get(i, j)).powi(2);
            }
        }
        assert!(orth <= 1e-10, "orthogonality {orth}");
        assert!(recon.sqrt() <= 1e-9 * m.frobenius(), "reconstruction {}", recon.sqrt());
        let s = eig_dense(&m).unwrap();
        assert!(s.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        assert_eq!(s.n_pos + s.n_neg + s.n_zero, n);
        let sum: f64 = s.eigenvalues.iter().sum();
        assert!((sum - s.trace).abs() <= 1e-8 * s.frobenius);
    }
}

fn family_points() -> Vec<FamilyParams> {
    vec![
        FamilyParams::a(1.0, 1.0, 0.5).unwrap(),
        FamilyParams::a(-0.5, 2.0, 0.5).unwrap(),
        FamilyParams::b(1.0, 1.0).unwrap(),
        FamilyParams::b(-0.5, 2.0).unwrap(),
        FamilyParams::c(2.0, 0.5).unwrap(),
        FamilyParams::c(-0.5, 2.0).unwrap(),
    ]
}

#[test]
fn cauchy_interlacing() {
    for p in family_points() {
        let big = eig_dense(&dense_truncation(&p, 33).unwrap()).unwrap().eigenvalues;
        let small = eig_dense(&dense_truncation(&p, 32).unwrap()).unwrap().eigenvalues;
        // descending order: big[k] >= small[k] >= big[k + 1]
        for k in 0..32 {
            assert!(big[k] >= small[k] - 1e-9, "{p} k={k}");
            assert!(small[k] >= big[k + 1] - 1e-9, "{p} k={k}");
        }
    }
}

#[test]
fn lanczos_matches_dense_extremes() {
    for p in family_points() {
        let dense = eig_dense(&dense_truncation(&p, 64).unwrap()).unwrap();
        let h = LinearOperatorHandle::new(&p, 64).unwrap();
        let r = lanczos_extremes(&h, 2, 64).unwrap();
        let scale = dense.spectral_radius();
        for k in 0..2 {
            assert!((r.top[k].value - dense.eigenvalues[k]).abs() <= 1e-8 * scale, "{p}");
            assert!((r.bottom[k].value - dense.eigenvalues[63 - k]).abs() <= 1e-8 * scale, "{p}");
        }
    }
}

#[test]
fn psd_verdicts_have_no_negative_eigenvalues() {
    let points = [
        FamilyParams::a(1.0, 1.0, 0.5).unwrap(),
        FamilyParams::a(0.5, -0.2, 0.7).unwrap(),
        FamilyParams::a(2.0, 0.0, 0.25).unwrap(),
        FamilyParams::a(0.0, 1.0, 0.5).unwrap(),
        FamilyParams::b(1.0, 1.0).unwrap(),
        FamilyParams::b(0.3, 2.0).unwrap(),
        FamilyParams::b(2.5, 0.5).unwrap(),
        FamilyParams::b(0.0, 1.5).unwrap(),
        FamilyParams::c(1.0, 0.5).unwrap(),
        FamilyParams::c(3.0, 2.0).unwrap(),
        FamilyParams::c(0.5, 0.0).unwrap(),
        FamilyParams::c(2.0, -0.3).unwrap(),
    ];
    for p in points {
        assert!(analytic_classification(&p).psd);
        let s = eig_dense(&dense_truncation(&p, 128).unwrap()).unwrap();
        let i = inertia(&s, DEFAULT_ZERO_TOL).unwrap();
        assert_eq!(i.n_neg, 0, "{p}: {:?}", i);
    }
}

#[test]
fn psd_trace_is_diagonal_sum() {
    for p in [FamilyParams::b(1.0, 1.5).unwrap(), FamilyParams::c(2.0, 1.0).unwrap()] {
        let m = dense_truncation(&p, 200).unwrap();
        let s = eig_dense(&m).unwrap();
        let diag: f64 = (1..=200u64).map(|n| entry(&p, n, n).unwrap()).sum();
        let eig_sum: f64 = s.eigenvalues.iter().sum();
        assert!((eig_sum - diag).abs() <= 1e-10 * diag);
    }
}

#[test]
fn trace_class_matches_diagonal_summability() {
    let diag_sum = |p: &FamilyParams, n: u64| -> f64 {
        (p.origin()..p.origin() + n).map(|k| entry(p, k, k).unwrap()).sum()
    };
    let cases = [
        (FamilyParams::a(1.0, 1.0, 0.5).unwrap(), true),
        (FamilyParams::b(1.0, 1.5).unwrap(), true),
        (FamilyParams::c(1.0, 1.5).unwrap(), true),
        (FamilyParams::c(1.0, 0.5).unwrap(), false),
        (FamilyParams::b(2.0, 0.8).unwrap(), false),
        (FamilyParams::a(1.0, 0.0, 0.5).unwrap(), false),
    ];
    for (p, trace_class) in cases {
        let v = analytic_classification(&p);
        assert_eq!(v.trace_class == spectral_corners::classify::TriState::Yes, trace_class, "{p}");
        let (s11, s12) = (diag_sum(&p, 1 << 11), diag_sum(&p, 1 << 12));
        let growth = (s12 - s11) / s11;
        if trace_class {
            assert!(growth < 0.01, "{p}: {growth}");
        } else {
            assert!(growth >= 0.01, "{p}: {growth}");
        }
    }
}

#[test]
fn warm_started_extremes_are_monotone() {
    let sizes = [32, 64, 128, 256, 512];
    for p in family_points() {
        let (tops, bottoms) = extreme_eigenvalues_by_size(&p, &sizes, 200, 1e-10, 0).unwrap();
        assert_eq!(tops.len(), sizes.len());
        for w in tops.windows(2) {
            assert!(w[1].1 >= w[0].1 - 1e-9 * w[0].1.abs(), "{p}: {tops:?}");
        }
        if p.tau() < 0.0 {
            for w in bottoms.windows(2) {
                assert!(w[1].1 <= w[0].1 + 1e-9 * w[0].1.abs(), "{p}: {bottoms:?}");
            }
        }
    }
}

#[test]
fn negative_tau_inertia_patterns() {
    let a = FamilyParams::a(-0.5, 2.0, 0.5).unwrap();
    let s = eig_dense(&dense_truncation(&a, 128).unwrap()).unwrap();
    assert!(s.n_pos <= 1);
    let b = FamilyParams::b(-0.5, 2.0).unwrap();
    let s = eig_dense(&dense_truncation(&b, 128).unwrap()).unwrap();
    assert_eq!(s.n_pos, 1);
    assert!(s.n_neg >= 20);
}
