use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;

use finitegap::bandset::{solve_equilibrium, FiniteGapSet};
use finitegap::isotorus::{torus_jacobi, DirichletData, DistanceOptions};
use finitegap::jacobi::{strip_coefficients, JacobiParams, PointMass, SpectralMeasure};
use finitegap::sumrules::*;

fn free_set() -> FiniteGapSet {
    FiniteGapSet::new(&[-2.0, 2.0]).unwrap()
}

fn one_gap() -> FiniteGapSet {
    FiniteGapSet::new(&[-2.0, -0.3, 0.4, 1.7]).unwrap()
}

fn perturbed_free(shape: Shape, target: Target, n: usize) -> JacobiParams {
    let spec = PerturbationSpec::new(shape, target).unwrap();
    apply_perturbation(&JacobiParams::free(), &spec, n).unwrap().params
}

#[test]
fn b_sums() {
    let free = JacobiParams::free();
    let j = perturbed_free(Shape::L1 { rate: 2.0, amplitude: 1.0 }, Target::B, 1 << 16);
    let d = b_sum(&j, &free, 1 << 16, 1e-6).unwrap();
    assert_eq!(d.verdict, Verdict::Convergent);
    assert!((d.value - PI * PI / 6.0).abs() < 1e-6, "{}", d.value);

    let theta = 2f64.sqrt() - 1.0;
    let shape = Shape::Oscillatory { frequency: theta, amplitude: 1.0, decay: 1.0, phase: 0.0 };
    let j = perturbed_free(shape, Target::B, 1 << 14);
    let d = b_sum(&j, &free, 1 << 14, 1e-3).unwrap();
    assert_eq!(d.verdict, Verdict::Convergent);
    // Σ cos(2πθn)/n = -log(2 sin πθ)
    let exact = -(2.0 * (PI * theta).sin()).ln();
    assert!((d.value - exact).abs() < 1e-3, "{} vs {exact}", d.value);
}

#[test]
fn square_sums() {
    let free = JacobiParams::free();
    let j = perturbed_free(Shape::L2NotL1 { rate: 1.0, amplitude: 1.0 }, Target::B, 1 << 16);
    let d = ks_l2(&j, &free, 1 << 16, 1e-6).unwrap();
    assert!((d.value - PI * PI / 6.0).abs() < 1e-6);
    let j = perturbed_free(Shape::Random { seed: 1, amplitude: 0.0, rate: 1.0 }, Target::Both, 64);
    assert_eq!(ks_l2(&j, &free, 64, 1e-12).unwrap().value, 0.0);
    let spec = PerturbationSpec { shape: Shape::L2NotL1 { rate: 0.4, amplitude: 1.0 }, target: Target::B };
    let (_, db) = spec.deltas(4096);
    let d = diagnose(&db.iter().map(|x| x * x).collect::<Vec<_>>(), 1e-6);
    assert_eq!(d.verdict, Verdict::Divergent);
}

#[test]
fn relative_product_matches_direct_series() {
    let e = one_gap();
    let dd = DirichletData::from_angles(&e, &[2.3]).unwrap();
    let tp = torus_jacobi(&e, &dd, 800).unwrap();
    let spec = PerturbationSpec::new(Shape::L1 { rate: 2.0, amplitude: 0.2 }, Target::A).unwrap();
    let p = apply_perturbation(&tp.params, &spec, 800).unwrap();
    let direct: f64 = p.delta_a.iter().zip(tp.params.head_a()).map(|(d, a)| ((a + d) / a).ln()).sum();
    let prod = a_product(&p.params, ProductReference::Params(&tp.params), 800).unwrap();
    assert!((prod.ln() - direct).abs() < 1e-12);
    assert_eq!(a_product(&tp.params, ProductReference::Params(&tp.params), 800).unwrap(), 1.0);
}

#[test]
fn jost_coefficient() {
    let e = one_gap();
    let dd = DirichletData::from_angles(&e, &[0.9]).unwrap();
    let tp = torus_jacobi(&e, &dd, 300).unwrap();
    let spec = PerturbationSpec::new(Shape::Random { seed: 7, amplitude: 0.3, rate: 1.5 }, Target::Both).unwrap();
    let p = apply_perturbation(&tp.params, &spec, 300).unwrap();
    let jc = jost_check(&p.params, &tp.params, 300, 1e3).unwrap();
    assert!((jc.extracted - jc.expected).abs() < 1e-8 * (1.0 + jc.expected.abs()), "{jc:?}");
    assert!((jc.constant - jc.expected_constant).abs() < 1e-8);
}

#[test]
fn szego_ratio_for_perturbed_torus_point() {
    let e = one_gap();
    let dd = DirichletData::from_angles(&e, &[4.0]).unwrap();
    let tp = torus_jacobi(&e, &dd, 1024).unwrap();
    let spec = PerturbationSpec::new(Shape::L1 { rate: 3.0, amplitude: 0.3 }, Target::Both).unwrap();
    let p = apply_perturbation(&tp.params, &spec, 1024).unwrap();
    for z in [Complex64::new(3.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(-2.5, 0.5)] {
        let r = szego_ratios(&p.params, &tp.params, z, &[256, 512, 1024]).unwrap();
        assert!((r[2] - r[1]).norm() < (r[1] - r[0]).norm() + 1e-12);
        assert!((r[2] - r[1]).norm() < 1e-4);
    }
    assert_eq!(szego_ratio(&tp.params, &tp.params, Complex64::new(3.0, 0.0), 512).unwrap(), Complex64::new(1.0, 0.0));
}

#[test]
fn equilibrium_szego_integral_converges() {
    let e = one_gap();
    let mu = SpectralMeasure::equilibrium(&solve_equilibrium(&e).unwrap()).unwrap();
    let v = szego_integral(&mu, SzegoWeight::Distance, -0.5).unwrap();
    assert!(v.is_finite());
    let quasi = szego_integral(&mu, SzegoWeight::Distance, 0.5).unwrap();
    assert!(quasi.is_finite());
}

#[test]
fn oscillatory_conditions_far_from_resonance() {
    let e = one_gap();
    let eq = solve_equilibrium(&e).unwrap();
    let omega = &eq.harmonic_measures()[..1];
    let theta = (5f64.sqrt() - 1.0) / 2.0 * 0.37;
    let ks = k_vectors(1, 5);
    let nearest = ks.iter().map(|k| {
        let f = k_frequency(k, omega);
        let d = |x: f64| (x - x.round()).abs();
        d(theta - f).min(d(theta + f))
    });
    assert!(nearest.fold(f64::INFINITY, f64::min) > 1e-2);
    let s = oscillatory_spec(omega, &Frequency::Value(theta), 1.0, 1.0, 0.0, Target::A).unwrap();
    assert!(s.warnings.is_empty());
    let r = oscillatory_conditions(&s.spec, omega, &ks, 1 << 16, 1e-3).unwrap();
    assert_eq!(r.limits_verdict, Verdict::Convergent);
    assert_eq!(r.l2_verdict, Verdict::Convergent);
    assert!(r.l2_tail_bound.unwrap() < 1e-4);
}

#[test]
fn three_conditions_for_equilibrium() {
    let cfg = ExperimentConfig {
        name: "eq".into(),
        job: Job::ThreeCondition {
            set: one_gap(),
            family: MeasureFamily::Equilibrium { atoms: vec![] },
            which_two: [Condition::A, Condition::B],
            size: 200,
            grid: DistanceOptions { positions: 16, refine_tol: 1e-9 },
        },
    };
    let rep = run_experiment(&cfg).unwrap();
    for v in ["eigenvalue_sum", "szego_integral", "a_product_bounded", "implication", "approach_to_torus"] {
        assert_eq!(rep.status(v), Some(Status::Holds), "{v}: {:?}", rep.verdicts);
    }
    assert!(rep.quantity("approach_200").unwrap() < 1e-8);
    assert!(!rep.hard_violation);
}

#[test]
fn three_conditions_with_dead_band() {
    let cfg = ExperimentConfig {
        name: "dead".into(),
        job: Job::ThreeCondition {
            set: one_gap(),
            family: MeasureFamily::EquilibriumDeadBand { dead: [0.8, 1.0], atoms: vec![] },
            which_two: [Condition::A, Condition::B],
            size: 1000,
            grid: DistanceOptions::default(),
        },
    };
    let rep = run_experiment(&cfg).unwrap();
    assert_eq!(rep.quantity("szego_integral"), Some(f64::NEG_INFINITY));
    assert_eq!(rep.status("szego_integral"), Some(Status::Fails));
    assert_eq!(rep.status("eigenvalue_sum"), Some(Status::Holds));
    assert_ne!(rep.status("a_product_bounded"), Some(Status::Holds));
    assert!(rep.status("approach_to_torus").is_none());
    assert!(!rep.hard_violation);
    let json = serde_json::to_string(&rep).unwrap();
    assert!(json.contains(r#""-inf""#));
}

#[test]
fn three_conditions_for_semicircle_with_atom() {
    let cfg = ExperimentConfig {
        name: "semi".into(),
        job: Job::ThreeCondition {
            set: free_set(),
            family: MeasureFamily::Semicircle { atoms: vec![PointMass { position: 3.0, weight: 0.1 }] },
            which_two: [Condition::B, Condition::C],
            size: 400,
            grid: DistanceOptions::default(),
        },
    };
    let rep = run_experiment(&cfg).unwrap();
    for v in ["eigenvalue_sum", "szego_integral", "a_product_bounded", "implication"] {
        assert_eq!(rep.status(v), Some(Status::Holds), "{v}: {:?}", rep.verdicts);
    }
    assert_eq!(rep.quantity("truncation_eigenvalue_count"), Some(1.0));
}

#[test]
fn cesaro_decay_for_measure_with_atoms() {
    let e = free_set();
    let mu = SpectralMeasure::equilibrium(&solve_equilibrium(&e).unwrap())
        .unwrap()
        .with_point_masses(&[
            PointMass { position: 2.5, weight: 0.05 },
            PointMass { position: -3.0, weight: 0.05 },
            PointMass { position: 3.5, weight: 0.05 },
        ])
        .unwrap();
    let j = strip_coefficients(&Arc::new(mu), 400).unwrap();
    let c = cesaro_distance(&j, &e, 300, &DistanceOptions::default()).unwrap();
    assert!(c.distances[299] < c.distances[0] / 5.0);
}

#[test]
fn cesaro_for_torus_point() {
    let e = one_gap();
    let dd = DirichletData::from_angles(&e, &[2.0]).unwrap();
    let tp = torus_jacobi(&e, &dd, 120).unwrap();
    let c = cesaro_distance(&tp.params, &e, 8, &DistanceOptions::default()).unwrap();
    assert!(c.averages.iter().all(|x| *x < 1e-6), "{:?}", c.averages);
}

#[test]
fn lieb_thirring_finite_gap_constant() {
    let e = one_gap();
    let cfg = ExperimentConfig {
        name: "ltfg".into(),
        job: Job::LiebThirring {
            set: e.clone(),
            base: BaseSpec::Torus { dirichlet: DirichletData::from_angles(&e, &[1.0]).unwrap() },
            perturbation: PerturbationSpec::new(Shape::SingleSite { index: 3, value: 2.0 }, Target::B).unwrap(),
            size: 400,
            truncation: 400,
        },
    };
    let rep = run_experiment(&cfg).unwrap();
    assert!(rep.quantity("eigenvalue_sum").unwrap() > 0.0);
    assert!((rep.quantity("l1_distance").unwrap() - 2.0).abs() < 1e-9);
    assert!(rep.quantity("constant_estimate").unwrap().is_finite());
}

fn finite_perturbation() -> impl Strategy<Value = JacobiParams> {
    (1usize..=30).prop_flat_map(|n| {
        (prop::collection::vec(-0.5f64..0.5, n), prop::collection::vec(-2.0f64..2.0, n)).prop_map(|(da, b)| {
            JacobiParams::new(da.iter().map(|d| 1.0 + d).collect(), b, finitegap::jacobi::Tail::Free).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lieb_thirring_bound_on_finite_perturbations(j in finite_perturbation()) {
        let r = lt_free_bound(&j, 300).unwrap();
        prop_assert!(r.holds, "lhs {} > rhs {}", r.lhs, r.rhs);
        // the finite-gap form on one band is comparable within [2, √(X+2)]
        let fg = lt_sum(&r.eigenvalues, &free_set(), 0.5).unwrap();
        let x_max = r.eigenvalues.iter().map(|x| x.abs()).fold(2.0, f64::max);
        prop_assert!(r.lhs >= 2.0 * fg - 1e-12 && r.lhs <= (x_max + 2.0).sqrt() * fg + 1e-12);
    }

    #[test]
    fn eigenvalue_sums_are_monotone(
        evs in prop::collection::vec(prop_oneof![-6.0f64..-2.0, 2.0f64..6.0, -0.3f64..0.4], 0..12),
        extra in 2.0f64..8.0,
        push in 0.0f64..1.0,
    ) {
        let e = one_gap();
        for p in [0.5, 1.0, 1.5] {
            let base = lt_sum(&evs, &e, p).unwrap();
            let mut more = evs.clone();
            more.push(extra);
            prop_assert!(lt_sum(&more, &e, p).unwrap() >= base);
            let pushed: Vec<f64> = evs.iter().map(|x| if *x > 1.7 { x + push } else if *x < -2.0 { x - push } else { *x }).collect();
            prop_assert!(lt_sum(&pushed, &e, p).unwrap() >= base - 1e-12);
        }
        prop_assert!(lt_sum(&evs, &e, 0.0).is_err());
    }

    #[test]
    fn random_perturbations_are_reproducible(seed in any::<u64>(), amplitude in 0.0f64..0.5, rate in 1.1f64..3.0) {
        let spec = PerturbationSpec::new(Shape::Random { seed, amplitude, rate }, Target::Both).unwrap();
        let (a1, b1) = spec.deltas(200);
        let (a2, b2) = spec.deltas(200);
        prop_assert_eq!(&a1, &a2);
        prop_assert_eq!(&b1, &b2);
        for (n, (da, db)) in a1.iter().zip(&b1).enumerate() {
            let bound = amplitude * ((n + 1) as f64).powf(-rate) + 1e-15;
            prop_assert!(da.abs() <= bound && db.abs() <= bound);
        }
    }

    #[test]
    fn geometric_series_converge(ratio in -0.9f64..0.9) {
        let terms: Vec<f64> = (0..4096).map(|k| ratio.powi(k + 1)).collect();
        let d = diagnose(&terms, 1e-8);
        prop_assert_eq!(d.verdict, Verdict::Convergent);
        prop_assert!((d.value - ratio / (1.0 - ratio)).abs() < 1e-8);
    }
}
