use proptest::prelude::*;

use qsrlab::entropies::{
    d_half, dh_eps, dmax, fidelity, hmax_cond, hmin_cond, purified_distance, relative_entropy,
};
use qsrlab::linalg::{eig_hermitian, partial_trace};
use qsrlab::protocol::index_split;
use qsrlab::random::{random_density, random_hermitian, seeded_rng};
use qsrlab::ComplexMatrix;

fn pair(seed: u64, d: usize) -> (ComplexMatrix, ComplexMatrix) {
    let mut rng = seeded_rng(seed);
    (random_density(&mut rng, d), random_density(&mut rng, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigendecomposition_rebuilds_the_matrix(seed in any::<u64>(), d in 1usize..12) {
        let m = random_hermitian(&mut seeded_rng(seed), d);
        let e = eig_hermitian(&m).unwrap();
        let back = e.rebuild(|l| l);
        prop_assert!(back.max_abs_diff(&m) <= 1e-10 * (1.0 + m.max_abs()));
        prop_assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn fidelity_is_symmetric_and_bounded(seed in any::<u64>(), d in 2usize..6) {
        let (r, s) = pair(seed, d);
        let f = fidelity(&r, &s).unwrap();
        prop_assert!((f - fidelity(&s, &r).unwrap()).abs() <= 1e-9);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&f));
        prop_assert!((fidelity(&r, &r).unwrap() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn purified_distance_obeys_the_triangle_inequality(seed in any::<u64>(), d in 2usize..5) {
        let mut rng = seeded_rng(seed);
        let (a, b, c) = (
            random_density(&mut rng, d),
            random_density(&mut rng, d),
            random_density(&mut rng, d),
        );
        let ab = purified_distance(&a, &b).unwrap();
        let bc = purified_distance(&b, &c).unwrap();
        let ac = purified_distance(&a, &c).unwrap();
        prop_assert!(ac <= ab + bc + 1e-9);
    }

    #[test]
    fn partial_trace_does_not_decrease_fidelity(seed in any::<u64>()) {
        let (r, s) = pair(seed, 6);
        let f = fidelity(&r, &s).unwrap();
        let rr = partial_trace(&r, &[2, 3], &[0]).unwrap();
        let ss = partial_trace(&s, &[2, 3], &[0]).unwrap();
        prop_assert!(fidelity(&rr, &ss).unwrap() >= f - 1e-9);
    }

    #[test]
    fn divergences_are_ordered(seed in any::<u64>(), d in 2usize..6) {
        let (r, s) = pair(seed, d);
        let dh0 = dh_eps(&r, &s, 0.0).unwrap().value.to_f64();
        let half = d_half(&r, &s).unwrap().to_f64();
        let rel = relative_entropy(&r, &s).unwrap().to_f64();
        let max = dmax(&r, &s).unwrap().value.to_f64();
        prop_assert!(dh0 <= half + 1e-8);
        prop_assert!(half <= rel + 1e-8);
        prop_assert!(rel <= max + 1e-8);
    }

    #[test]
    fn hypothesis_testing_grows_with_eps(seed in any::<u64>(), d in 2usize..6) {
        let (r, s) = pair(seed, d);
        let mut last = f64::NEG_INFINITY;
        for eps in [0.0, 0.05, 0.2, 0.5, 0.8] {
            let v = dh_eps(&r, &s, eps).unwrap().value.to_f64();
            prop_assert!(v >= last - 1e-9);
            last = v;
        }
    }

    #[test]
    fn min_entropy_is_below_max_entropy(seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let rho = random_density(&mut rng, 4);
        let lo = hmin_cond(&rho, 2, 2).unwrap().value.to_f64();
        let hi = hmax_cond(&rho, 2, 2).unwrap().value.to_f64();
        prop_assert!(lo <= hi + 1e-6);
        prop_assert!((-1.0 - 1e-6..=1.0 + 1e-6).contains(&lo));
    }

    #[test]
    fn index_split_is_a_bijection(n in 1usize..40, b in 1usize..10) {
        prop_assume!(b <= n);
        let mut seen = std::collections::HashSet::new();
        for j in 1..=n {
            let (j1, j2) = index_split(j, n, b).unwrap();
            prop_assert!(j2 >= 1 && j2 <= b);
            prop_assert!(seen.insert((j1, j2)));
        }
    }
}
