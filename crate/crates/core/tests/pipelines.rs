use snfkn_core::gen::{apply_noise, apply_noise_table, gen_dictator, gen_tightness, NoiseModel};
use snfkn_core::l0::analyze_l0;
use snfkn_core::l2::{analyze_l2, family_approximant, AnalysisOptions, L2Input};
use snfkn_core::linf::{dictator_decision_linf, LinfOptions};
use snfkn_core::linfn::{disagreement, dist_to_boolean, l2_between};
use snfkn_core::numeric::round_01;
use snfkn_core::perm::enumerate_permutations;
use snfkn_core::report::{Dictator, Metric, Orientation, Strategy, Verdict};

fn opts() -> AnalysisOptions {
    AnalysisOptions::default()
}

#[test]
fn sampled_exact_dictators_through_l2() {
    for n in [5usize, 7, 8] {
        for (o, idx, t) in [
            (Orientation::Row, 0, vec![1]),
            (Orientation::Col, n - 1, vec![0, 2]),
            (Orientation::Row, n / 2, (0..n / 2).collect::<Vec<_>>()),
        ] {
            let f = gen_dictator(n, o, idx, &t).unwrap();
            let r = analyze_l2(L2Input::Linear(&f), &opts()).unwrap();
            assert_eq!(r.disagreement.unwrap().value, 0.0, "n={n} {o} {t:?}");
            assert_eq!(r.closeness.value, 0.0);
        }
    }
}

#[test]
fn reported_closeness_reverifies_independently() {
    let base = gen_dictator(7, Orientation::Col, 2, &[1, 3]).unwrap();
    for seed in 0..5 {
        let f = apply_noise(&base, NoiseModel::Uniform { amplitude: 0.2 / 7.0 }, seed).unwrap();
        let r = analyze_l2(L2Input::Linear(&f), &opts()).unwrap();
        let g = family_approximant(&r.family, r.flipped);
        let brute = l2_between(&f, &g, Strategy::Exact, 10).unwrap().value;
        assert!((brute - r.closeness.value).abs() < 1e-10);
        let dis = disagreement(&f, &g, Strategy::Exact, 10, 1e-9).unwrap().value;
        assert_eq!(dis, r.disagreement.unwrap().value);
    }
}

#[test]
fn larger_noise_never_lowers_epsilon_on_average() {
    let base = gen_dictator(7, Orientation::Row, 3, &[0, 5]).unwrap();
    let mut means = Vec::new();
    for amp in [0.05, 0.1, 0.2, 0.4] {
        let mut total = 0.0;
        for seed in 0..20 {
            let f = apply_noise(&base, NoiseModel::Uniform { amplitude: amp / 7.0 }, seed).unwrap();
            total += analyze_l2(L2Input::Linear(&f), &opts()).unwrap().epsilon.value;
        }
        means.push(total / 20.0);
    }
    assert!(means.windows(2).all(|w| w[0] <= w[1]), "{means:?}");
}

#[test]
fn noisy_table_recovery_n7() {
    let f = gen_dictator(7, Orientation::Row, 1, &[2, 4]).unwrap();
    let t = apply_noise_table(&f.table(10).unwrap(), NoiseModel::FlipOutputs { prob: 0.01 }, 11).unwrap();
    let r = analyze_l2(L2Input::Table(&t), &opts()).unwrap();
    assert_eq!(r.verdict, Verdict::Family);
    assert!(r.disagreement_max.unwrap().value <= 25.0 * r.epsilon.value);
}

#[test]
fn tightness_example_in_l0() {
    let f = gen_tightness(10, 0.2, 0.02).unwrap();
    let eps = dist_to_boolean(&f, Metric::L0, Strategy::Exact, 10, 1e-9).unwrap();
    assert!((eps.value - 1.0 / 90.0).abs() < 1e-12);
    let r = analyze_l0(&f, &opts()).unwrap();
    assert!((r.epsilon.value - 1.0 / 90.0).abs() < 1e-12);
}

#[test]
fn dictator_mode_balance() {
    let f = gen_tightness(8, 0.5, 0.0).unwrap();
    let o = AnalysisOptions { delta: Some(0.25), ..opts() };
    let r = analyze_l2(L2Input::Linear(&f), &o).unwrap();
    assert_eq!(r.verdict, Verdict::Dictator);
    assert_eq!(r.dictator_disagreement.unwrap().value, 0.0);
    let small = gen_dictator(8, Orientation::Row, 0, &[0]).unwrap();
    let o = AnalysisOptions { delta: Some(0.5), ..opts() };
    let r = analyze_l2(L2Input::Linear(&small), &o).unwrap();
    assert_eq!(r.verdict, Verdict::ConstantZero);
    assert!((r.dictator_disagreement.unwrap().value - 1.0 / 8.0).abs() < 1e-12);
}

#[test]
fn linf_pointwise_n8() {
    let f = gen_dictator(8, Orientation::Col, 6, &[1, 2, 5]).unwrap().complement();
    let f = apply_noise(&f, NoiseModel::Uniform { amplitude: 0.02 / 8.0 }, 4).unwrap();
    let o = LinfOptions { epsilon: 0.02, ..LinfOptions::default() };
    let dec = dictator_decision_linf(&f, &o).unwrap();
    let want = Dictator { orientation: Orientation::Col, index: 6, targets: vec![1, 2, 5], flipped: true };
    assert!(dec.dictator.same_function(&want, 8));
    for p in enumerate_permutations(8, 10).unwrap() {
        assert_eq!(round_01(f.evaluate(&p).unwrap()), dec.dictator.eval(p.image()));
    }
}
