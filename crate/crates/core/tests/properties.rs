use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spectral_corners::classify::{analytic_classification, compact_region, TriState};
use spectral_corners::families::{
    a_entry_max_form, c_entry_lcm_form, dense_truncation, entry, scaling_check, tensor_factor_entry, Family,
    FamilyParams,
};
use spectral_corners::fastops::{LinearOperatorHandle, SymOperator};
use spectral_corners::identities::{verify_halfplane_poisson, verify_polarization_a, verify_quadform_a, CoefficientVector};
use spectral_corners::ntheory::{euler_phi, gcd, gcd_lcm, jordan_totient, jordan_totient_divisor_sum, mobius, factorize};

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![Just(Family::A), Just(Family::B), Just(Family::C)]
}

fn params() -> impl Strategy<Value = FamilyParams> {
    (family(), -2.5f64..2.5, -2.5f64..2.5, 0.1f64..0.9)
        .prop_map(|(f, tau, rho, q)| FamilyParams::new(f, tau, rho, (f == Family::A).then_some(q)).unwrap())
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) || (a - b).abs() < 1e-300
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn entries_are_symmetric(p in params(), n in 0u64..500, m in 0u64..500) {
        let (n, m) = (n + p.origin(), m + p.origin());
        match (entry(&p, n, m), entry(&p, m, n)) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "asymmetric outcome {:?} vs {:?}", a, b),
        }
    }

    #[test]
    // The max form multiplies three separately rounded powers; the domain keeps
    // each factor a normal double so the comparison measures the algebra,
    // not subnormal underflow.
    fn alternative_forms_agree(tau in -2.5f64..2.5, rho in -2.5f64..2.5, q in 0.3f64..0.9,
                               n in 1u64..200, m in 1u64..200) {
        let a = FamilyParams::a(tau, rho, q).unwrap();
        prop_assert!(close(entry(&a, n, m).unwrap(), a_entry_max_form(tau, rho, q, n, m), 1e-12));
        let c = FamilyParams::c(tau, rho).unwrap();
        prop_assert!(close(entry(&c, n, m).unwrap(), c_entry_lcm_form(tau, rho, n, m).unwrap(), 1e-12));
    }

    #[test]
    fn tensor_factorisation_of_c(tau in -2.0f64..2.0, rho in -2.0f64..2.0, n in 1u64..3000, m in 1u64..3000) {
        let c = FamilyParams::c(tau, rho).unwrap();
        prop_assert!(close(entry(&c, n, m).unwrap(), tensor_factor_entry(&c, n, m).unwrap(), 1e-11));
    }

    #[test]
    fn scaling_law(p in params(), k in 1u64..20, n in 0u64..100, m in 0u64..100) {
        let (n, m) = (n + p.origin(), m + p.origin());
        prop_assert!(scaling_check(&p, k, n, m).unwrap().passed());
    }

    #[test]
    fn gcd_lcm_product(n in 1u64..1_000_000, m in 1u64..1_000_000) {
        let (g, l) = gcd_lcm(n, m).unwrap();
        prop_assert_eq!(g as u128 * l as u128, n as u128 * m as u128);
        prop_assert_eq!(g, gcd(m, n));
        prop_assert_eq!(n % g, 0);
        prop_assert_eq!(l % m, 0);
    }

    #[test]
    fn jordan_totient_inverts_powers(n in 1u64..5000, t in -2.0f64..3.0) {
        let f = factorize(n).unwrap();
        // both sums cancel for t <= 0; measure against the size of their terms
        let terms: f64 = f.divisors().iter().map(|&d| (d as f64).powf(t)).sum();
        let sum: f64 = f.divisors().iter().map(|&d| jordan_totient(d, t).unwrap()).sum();
        prop_assert!((sum - (n as f64).powf(t)).abs() <= 1e-12 * terms);
        let (j, js) = (jordan_totient(n, t).unwrap(), jordan_totient_divisor_sum(n, t).unwrap());
        prop_assert!((j - js).abs() <= 1e-12 * terms, "{} vs {}", j, js);
        prop_assert!(close(jordan_totient(n, 1.0).unwrap(), euler_phi(n).unwrap() as f64, 1e-12));
    }

    #[test]
    fn mobius_sums_vanish(n in 2u64..100_000) {
        let s: i64 = factorize(n).unwrap().divisors().iter().map(|&d| mobius(d).unwrap() as i64).sum();
        prop_assert_eq!(s, 0);
    }

    #[test]
    fn fast_matvec_matches_dense(p in params(), size in 1usize..96, seed in any::<u64>()) {
        let h = LinearOperatorHandle::new(&p, size).unwrap();
        let dense = dense_truncation(&p, size).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..size).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let fast = h.apply(&x).unwrap();
        let slow = dense.matvec(&x).unwrap();
        let scale: f64 = (0..size)
            .map(|i| dense.row(i).iter().zip(&x).map(|(a, b)| (a * b).abs()).sum::<f64>())
            .fold(0.0, f64::max);
        for (f, s) in fast.iter().zip(&slow) {
            prop_assert!((f - s).abs() <= 1e-12 * scale, "{} vs {}", f, s);
        }
    }

    #[test]
    fn halfplane_kernel_is_symmetric(tau in 0.2f64..3.0, n in 1u64..40, m in 1u64..40) {
        let a = verify_halfplane_poisson(tau, n, m, None, 0).unwrap();
        let b = verify_halfplane_poisson(tau, m, n, None, 0).unwrap();
        prop_assert!((a.lhs - b.lhs).abs() <= 1e-12);
        prop_assert!(a.passed());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn circle_form_polarizes(tau in 0.5f64..3.0, rho in -1.0f64..2.0, n in 0usize..12, m in 0usize..12) {
        let p = FamilyParams::a(tau, rho, 0.5).unwrap();
        prop_assert!(verify_polarization_a(&p, n, m, 1024).unwrap().passed());
    }

    #[test]
    fn circle_form_of_single_index(tau in 0.5f64..3.0, rho in -1.0f64..2.0, n in 0usize..20) {
        let p = FamilyParams::a(tau, rho, 0.5).unwrap();
        let f = CoefficientVector::basis(n + 1, n).unwrap();
        let r = verify_quadform_a(&p, &f, 1024).unwrap();
        prop_assert!(r.passed());
        prop_assert!(close(r.rhs, entry(&p, n as u64, n as u64).unwrap(), 1e-12));
    }
}

#[test]
fn classifier_is_consistent_on_random_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(10_000);
    for _ in 0..10_000 {
        let fam = Family::ALL[rng.gen_range(0..3)];
        let (tau, rho) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let p = FamilyParams::new(fam, tau, rho, (fam == Family::A).then_some(0.5)).unwrap();
        let v = analytic_classification(&p);
        if v.trace_class == TriState::Yes {
            assert!(v.compact, "{p}");
        }
        if v.compact {
            assert!(v.bounded, "{p}");
        }
        assert_eq!(v.psd, tau >= 0.0);
        let (a, b) = compact_region(fam);
        assert_eq!(v.compact, rho > a && rho + tau > b, "{p}");
    }
}
