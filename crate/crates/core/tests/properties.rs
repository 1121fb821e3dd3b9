use proptest::prelude::*;

use snfkn_core::gen::{gen_dictator, FamilyMode};
use snfkn_core::l2::{expected_pair_overlap, sparse_representation, sporadic_representation, AnchorScan, CosetFamily};
use snfkn_core::linfn::{
    centered_sq_norm, closeness_to_linear, degree_le1_projection, dist_to_boolean, distance_l2_between, l2_between,
};
use snfkn_core::numeric::dist_01;
use snfkn_core::perm::{avoid_probability, enumerate_permutations};
use snfkn_core::report::{Metric, Orientation, Strategy as Mode};
use snfkn_core::{CellSet, Grid, LinearFunction, ValueTable};

fn linear(n: usize, amp: f64) -> impl proptest::strategy::Strategy<Value = LinearFunction> {
    (
        -amp..amp,
        proptest::collection::vec(-amp..amp, n * n),
    )
        .prop_map(move |(c, v)| LinearFunction::new(c, Grid::from_vec(n, v).unwrap()).unwrap())
}

fn near_sparse(n: usize) -> impl proptest::strategy::Strategy<Value = LinearFunction> {
    (
        0i32..2,
        proptest::collection::vec(prop_oneof![4 => Just(0.0), 1 => Just(1.0), 1 => Just(-1.0)], n * n),
        proptest::collection::vec(-0.05..0.05f64, n * n),
    )
        .prop_map(move |(c, base, noise)| {
            let v = base.iter().zip(&noise).map(|(b, e)| b + e / n as f64).collect();
            LinearFunction::new(f64::from(c), Grid::from_vec(n, v).unwrap()).unwrap()
        })
}

fn cells(n: usize, max: usize) -> impl proptest::strategy::Strategy<Value = CellSet> {
    proptest::collection::vec((0..n, 0..n), 0..=max).prop_map(move |v| CellSet::new(n, v).unwrap())
}

fn values_equal(f: &LinearFunction, g: &LinearFunction, tol: f64) -> bool {
    enumerate_permutations(f.n(), 10)
        .unwrap()
        .all(|p| (f.evaluate(&p).unwrap() - g.evaluate(&p).unwrap()).abs() <= tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn recenter_preserves_values(f in (2usize..=6).prop_flat_map(|n| linear(n, 2.0)), a in 0usize..36, b in 0usize..36) {
        let n = f.n();
        let g = f.recenter((a % n, b % n));
        prop_assert!(values_equal(&f, &g, 1e-10));
        prop_assert!(g.coeff().row(a % n).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn centered_norm_matches_enumeration(f in (2usize..=6).prop_flat_map(|n| linear(n, 1.0))) {
        let n = f.n();
        let perms: Vec<_> = enumerate_permutations(n, 10).unwrap().collect();
        let mean_part: f64 = perms.iter().map(|p| {
            let v: f64 = (0..n).map(|i| f.coeff()[(i, p.apply(i))]).sum::<f64>() - f.coeff().total() / n as f64;
            v * v
        }).sum::<f64>() / perms.len() as f64;
        prop_assert!((centered_sq_norm(f.coeff()) - mean_part).abs() < 1e-10);
    }

    #[test]
    fn l2_distance_matches_enumeration(f in (2usize..=5).prop_flat_map(|n| linear(n, 1.0)), seed in 0u64..1000) {
        let g = snfkn_core::gen::apply_noise(&f, snfkn_core::gen::NoiseModel::Uniform { amplitude: 0.5 }, seed).unwrap();
        let exact = distance_l2_between(&f, &g).unwrap();
        let brute = l2_between(&f, &g, Mode::Exact, 10).unwrap().value;
        prop_assert!((exact - brute).abs() < 1e-10);
    }

    #[test]
    fn sporadic_round_trip(f in (2usize..=6).prop_flat_map(near_sparse)) {
        let s = sparse_representation(&f, AnchorScan::Full);
        let sp = sporadic_representation(&s);
        prop_assert!(sp.r_grid.as_slice().iter().all(|v| (-3..=3).contains(v)));
        prop_assert!(values_equal(&s.function(), &sp.function(), 1e-12));
        let resid = l2_between(&f, &s.function(), Mode::Exact, 10).unwrap().value;
        prop_assert!((resid - s.residual_l2sq).abs() < 1e-10);
    }

    #[test]
    fn avoidance_is_monotone(s in (3usize..=7).prop_flat_map(|n| cells(n, 2 * n)), extra in (0usize..7, 0usize..7)) {
        let n = s.n();
        let p = avoid_probability(&s, Mode::Exact).unwrap().measurement.value;
        let mut t = s.clone();
        t.insert((extra.0 % n, extra.1 % n)).unwrap();
        let q = avoid_probability(&t, Mode::Exact).unwrap().measurement.value;
        prop_assert!(q <= p + 1e-15);
    }

    #[test]
    fn pair_overlap_sandwich(s in (3usize..=6).prop_flat_map(|n| cells(n, 2 * n))) {
        let c = CosetFamily::new(s);
        let h = c.sum_function();
        let (mut hh, mut d2) = (0.0, 0.0);
        let perms: Vec<_> = enumerate_permutations(c.n(), 10).unwrap().collect();
        for p in &perms {
            let v = h.evaluate(p).unwrap();
            hh += v * (v - 1.0);
            d2 += dist_01(v).powi(2);
        }
        let k = perms.len() as f64;
        prop_assert!((hh / k - expected_pair_overlap(&c)).abs() < 1e-12);
        prop_assert!(d2 / k <= hh / k + 1e-12 && hh / k <= 2.0 * d2 / k + 1e-12);
    }

    #[test]
    fn l2_to_boolean_below_any_dictator(f in (3usize..=6).prop_flat_map(|n| linear(n, 1.0)), idx in 0usize..6, col in any::<bool>(), flip in any::<bool>()) {
        let n = f.n();
        let o = if col { Orientation::Col } else { Orientation::Row };
        let mut g = gen_dictator(n, o, idx % n, &[idx % n]).unwrap();
        if flip {
            g = g.complement();
        }
        let eps = dist_to_boolean(&f, Metric::L2, Mode::Exact, 10, 1e-9).unwrap().value;
        prop_assert!(eps <= distance_l2_between(&f, &g).unwrap() + 1e-12);
    }

    #[test]
    fn projection_beats_random_linear(bits in proptest::collection::vec(any::<bool>(), 24), g in linear(4, 1.0)) {
        let t = ValueTable::new(4, bits.iter().map(|&b| f64::from(u8::from(b))).collect()).unwrap();
        let best = closeness_to_linear(&t);
        let f = degree_le1_projection(&t);
        prop_assert!((l2_between(&t, &f, Mode::Exact, 10).unwrap().value - best).abs() < 1e-10);
        prop_assert!(best <= l2_between(&t, &g, Mode::Exact, 10).unwrap().value + 1e-12);
    }

    #[test]
    fn family_generator_is_deterministic(n in 3usize..20, seed in any::<u64>()) {
        let a = snfkn_core::gen::gen_disjoint_family(n, n, FamilyMode::Uniform, seed).unwrap();
        let b = snfkn_core::gen::gen_disjoint_family(n, n, FamilyMode::Uniform, seed).unwrap();
        prop_assert_eq!(a, b);
    }
}
