use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use proptest::prelude::*;
use teleport_core::analytic::{closed_form_angles, closed_form_fidelity, Convention};
use teleport_core::channels::{
    apply_channel, bit_flip, depolarizing, noisy_resource, sign_flip, BobNoise, ChannelNoise,
    PerOperation,
};
use teleport_core::linalg::{
    fidelity_pure, partial_trace, DensityMatrix, Ket, Operator, Tensor, C64,
};
use teleport_core::optimize::{maximize_by_coefficients, maximize_by_grid, oracle_evaluator};
use teleport_core::protocol::{
    run_protocol, AverageMeasure, InputState, MeasurementBasis, Teleporter,
};

fn ket(dim: usize) -> impl Strategy<Value = Ket> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim)
        .prop_filter("nonzero", |v| {
            v.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-3
        })
        .prop_map(|v| {
            let norm = v.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
            Ket::new(
                v.into_iter()
                    .map(|(a, b)| C64::new(a / norm, b / norm))
                    .collect(),
            )
            .unwrap()
        })
}

fn operator(dim: usize) -> impl Strategy<Value = Operator> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim).prop_map(move |v| {
        Operator::new(dim, v.into_iter().map(|(a, b)| C64::new(a, b)).collect()).unwrap()
    })
}

/// Mixed state from a random Gram matrix.
fn density(dim: usize) -> impl Strategy<Value = DensityMatrix> {
    operator(dim).prop_map(|a| {
        let gram = a.matmul(&a.dagger()).unwrap();
        let tr = gram.trace().re;
        DensityMatrix::new(gram.scale_real(1.0 / tr)).unwrap()
    })
}

fn channel() -> impl Strategy<Value = ChannelNoise> {
    prop_oneof![
        Just(ChannelNoise::Pure),
        (0.0f64..=1.0).prop_map(ChannelNoise::Werner),
        (0.0f64..=1.0).prop_map(ChannelNoise::BitFlipEach),
        (0.0f64..=1.0).prop_map(ChannelNoise::SignFlipEach),
        (0.0f64..=0.75).prop_map(ChannelNoise::DepolarizeEach),
    ]
}

fn per_op(max: f64) -> impl Strategy<Value = PerOperation> {
    (0.0..=max, 0.0..=max, 0.0..=max, 0.0..=max)
        .prop_map(|(i, z, x, y)| PerOperation::new(i, z, x, y))
}

fn bob() -> impl Strategy<Value = BobNoise> {
    prop_oneof![
        Just(BobNoise::Ideal),
        per_op(0.75).prop_map(BobNoise::DepolarizingPerOp),
        per_op(1.0).prop_map(BobNoise::BitFlipPerOp),
        per_op(1.0).prop_map(BobNoise::SignFlipPerOp),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn tensor_is_associative(a in operator(2), b in operator(2), c in operator(2)) {
        let left = a.tensor(&b).unwrap().tensor(&c).unwrap();
        let right = a.tensor(&b.tensor(&c).unwrap()).unwrap();
        prop_assert!(left.max_abs_diff(&right).unwrap() < 1e-14);
    }

    #[test]
    fn dagger_reverses_products(a in operator(4), b in operator(4)) {
        let lhs = a.matmul(&b).unwrap().dagger();
        let rhs = b.dagger().matmul(&a.dagger()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-14);
    }

    #[test]
    fn partial_trace_keeps_trace_and_positivity(rho in density(8), keep in prop::sample::subsequence(vec![0usize, 1, 2], 1..=2)) {
        let reduced = partial_trace(&rho, &keep).unwrap();
        prop_assert!((reduced.trace() - 1.0).abs() < 1e-12);
        prop_assert!(reduced.validate().is_ok());
    }

    #[test]
    fn partial_trace_of_product_recovers_factor(a in density(2), b in density(4)) {
        let joint = a.tensor(&b).unwrap();
        prop_assert!(partial_trace(&joint, &[0]).unwrap().max_abs_diff(&a).unwrap() < 1e-14);
        prop_assert!(partial_trace(&joint, &[1, 2]).unwrap().max_abs_diff(&b).unwrap() < 1e-14);
    }

    #[test]
    fn fidelity_is_bounded(psi in ket(2), rho in density(2)) {
        let f = fidelity_pure(&psi, &rho).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f));
        prop_assert!((fidelity_pure(&psi, &DensityMatrix::pure(&psi)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn channels_preserve_density_matrices(rho in density(4), p in 0.0f64..=1.0, target in 0usize..2) {
        for ch in [depolarizing(p * 0.75).unwrap(), bit_flip(p).unwrap(), sign_flip(p).unwrap()] {
            prop_assert!(ch.completeness_defect() < 1e-12);
            let out = apply_channel(&ch, &rho, target).unwrap();
            prop_assert!(out.validate().is_ok());
        }
    }

    #[test]
    fn noisy_resources_are_states(theta in 0.0f64..=FRAC_PI_4, noise in channel()) {
        prop_assert!(noisy_resource(theta, noise).unwrap().validate().is_ok());
    }

    #[test]
    fn outcome_probabilities_sum_to_one(
        theta in 0.0f64..=FRAC_PI_4,
        phi in 0.0f64..=FRAC_PI_2,
        phi_prime in 0.0f64..=FRAC_PI_2,
        gamma in 0.0f64..PI,
        lambda in 0.0f64..(2.0 * PI),
        noise in channel(),
        bob in bob(),
    ) {
        let resource = noisy_resource(theta, noise).unwrap();
        let basis = MeasurementBasis::new(phi, phi_prime).unwrap();
        let reports = run_protocol(&InputState::new(gamma, lambda).unwrap(), &resource, &basis, &bob).unwrap();
        let total: f64 = reports.iter().map(|r| r.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for r in &reports {
            prop_assert!(r.bob_state.validate().is_ok());
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&r.conditional_fidelity));
        }
    }

    #[test]
    fn phase_invariance_without_bit_flips(
        theta in 0.0f64..=FRAC_PI_4,
        phi in 0.0f64..=FRAC_PI_2,
        phi_prime in 0.0f64..=FRAC_PI_2,
        lambda in 0.0f64..(2.0 * PI),
        p in 0.0f64..=0.7,
        bob in bob(),
    ) {
        prop_assume!(!matches!(bob, BobNoise::BitFlipPerOp(_)));
        let basis = MeasurementBasis::new(phi, phi_prime).unwrap();
        for noise in [ChannelNoise::Pure, ChannelNoise::Werner(p), ChannelNoise::SignFlipEach(p), ChannelNoise::DepolarizeEach(p)] {
            let tele = Teleporter::new(theta, noise, bob).unwrap();
            let f0 = tele.average_fidelity_at_phase(&basis, 0.0, 8).unwrap();
            let f = tele.average_fidelity_at_phase(&basis, lambda, 8).unwrap();
            prop_assert!((f - f0).abs() < 1e-12);
        }
    }

    #[test]
    fn quadrature_order_does_not_matter(
        theta in 0.0f64..=FRAC_PI_4,
        phi in 0.0f64..=FRAC_PI_2,
        phi_prime in 0.0f64..=FRAC_PI_2,
        noise in channel(),
        bob in bob(),
    ) {
        let tele = Teleporter::new(theta, noise, bob).unwrap();
        let basis = MeasurementBasis::new(phi, phi_prime).unwrap();
        for measure in [AverageMeasure::UniformGamma, AverageMeasure::Haar] {
            let a = tele.average_fidelity(&basis, measure, 8).unwrap();
            let b = tele.average_fidelity(&basis, measure, 24).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn c_form_reconstructs_every_model(
        theta in 0.0f64..=FRAC_PI_4,
        phi in 0.0f64..=FRAC_PI_2,
        phi_prime in 0.0f64..=FRAC_PI_2,
        noise in channel(),
        bob in bob(),
        haar in any::<bool>(),
    ) {
        let measure = if haar { AverageMeasure::Haar } else { AverageMeasure::UniformGamma };
        let tele = Teleporter::new(theta, noise, bob).unwrap();
        let terms = tele.extract_terms(measure, 8).unwrap();
        let eval = oracle_evaluator(&tele, measure, 8);
        prop_assert!((terms.evaluate(phi, phi_prime) - eval(phi, phi_prime)).abs() < 1e-10);
    }

    #[test]
    fn closed_forms_match_oracle(
        theta in 0.0f64..=FRAC_PI_4,
        phi in 0.0f64..=FRAC_PI_2,
        phi_prime in 0.0f64..=FRAC_PI_2,
        noise in channel(),
        p in per_op(0.75),
    ) {
        let bob = BobNoise::DepolarizingPerOp(p);
        let f = closed_form_fidelity(theta, phi, phi_prime, &noise, &bob, Convention::SIMULATION).unwrap();
        let tele = Teleporter::new(theta, noise, bob).unwrap();
        let oracle = oracle_evaluator(&tele, AverageMeasure::UniformGamma, 8)(phi, phi_prime);
        prop_assert!((f - oracle).abs() < 1e-10);
    }

    #[test]
    fn werner_mixing_is_linear(
        theta in 0.0f64..=FRAC_PI_4,
        phi in 0.0f64..=FRAC_PI_2,
        phi_prime in 0.0f64..=FRAC_PI_2,
        p_w in 0.0f64..=1.0,
        bob in bob(),
    ) {
        let basis = MeasurementBasis::new(phi, phi_prime).unwrap();
        let pure = Teleporter::new(theta, ChannelNoise::Pure, bob).unwrap()
            .average_fidelity(&basis, AverageMeasure::UniformGamma, 8).unwrap();
        let mixed = Teleporter::new(theta, ChannelNoise::Werner(p_w), bob).unwrap()
            .average_fidelity(&basis, AverageMeasure::UniformGamma, 8).unwrap();
        prop_assert!(((mixed - 0.5) - p_w * (pure - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn coefficient_optimum_beats_bell_and_closed_form_agrees(
        theta in 0.05f64..=0.78,
        noise in channel(),
        p in per_op(0.75),
    ) {
        let bob = BobNoise::DepolarizingPerOp(p);
        let tele = Teleporter::new(theta, noise, bob).unwrap();
        let eval = oracle_evaluator(&tele, AverageMeasure::UniformGamma, 8);
        let best = maximize_by_coefficients(&eval);
        prop_assert!(best.f_star >= eval(FRAC_PI_4, FRAC_PI_4) - 1e-12);
        let (phi, phi_prime) = closed_form_angles(theta, &noise, &bob, Convention::SIMULATION).unwrap();
        prop_assert!((eval(phi, phi_prime) - best.f_star).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn grid_dominates_and_agrees_with_coefficients(
        theta in 0.1f64..=0.75,
        noise in channel(),
        bob in bob(),
    ) {
        let tele = Teleporter::new(theta, noise, bob).unwrap();
        let eval = oracle_evaluator(&tele, AverageMeasure::UniformGamma, 8);
        let grid = maximize_by_grid(&eval, 33, 6).unwrap();
        let coeff = maximize_by_coefficients(&eval);
        prop_assert!((grid.f_star - coeff.f_star).abs() <= 1e-9);
        prop_assert!(grid.f_star >= eval(FRAC_PI_4, FRAC_PI_4) - 1e-12);
        prop_assert!(grid.history.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!((0.0..=FRAC_PI_2).contains(&grid.phi_star));
        prop_assert!((0.0..=FRAC_PI_2).contains(&grid.phi_prime_star));
    }
}
