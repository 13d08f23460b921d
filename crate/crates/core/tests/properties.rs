use proptest::prelude::*;

use qsm_core::measures::{
    blp_measure, cp_divisibility_scan, holevo_curve, holevo_dephasing_closed_form, sss_measure, uniform_grid,
    HolevoEnsemble, MeasureForm, ReferenceMode, SssConfig,
};
use qsm_core::numerics::{hermitian_eig, trace_norm, von_neumann_entropy, ComplexMatrix};
use qsm_core::quantum::{
    apply_kraus, family_constant, is_cptp, DensityMatrix, DephasingNormalization, GeneratorSnapshot, JumpStructure,
};
use qsm_core::semimarkov::{evolve_timelocal, DephasingSemiMarkov, NonUnitalSemiMarkov, SemiMarkovFamily};
use qsm_core::{Complex, Matrix};

fn hermitian(n: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-1.0f64..1.0, 2 * n * n).prop_map(move |v| {
        let m = ComplexMatrix::from_fn(n, n, |i, j| Complex::new(v[2 * (i * n + j)], v[2 * (i * n + j) + 1]));
        m.hermitian_part()
    })
}

fn unitary(n: usize) -> impl Strategy<Value = Matrix> {
    hermitian(n).prop_map(|h| hermitian_eig(&h).unwrap().eigenvectors)
}

fn density(n: usize) -> impl Strategy<Value = DensityMatrix<f64>> {
    hermitian(n).prop_map(move |h| {
        let g = &h * &h;
        let shifted = &g + &ComplexMatrix::identity(n).scale_real(1e-3);
        let tr = shifted.trace().re;
        DensityMatrix::new(shifted.scale_real(1.0 / tr)).unwrap()
    })
}

fn ket2() -> impl Strategy<Value = DensityMatrix<f64>> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
        .prop_filter("non-zero ket", |(a, b, c, d)| a * a + b * b + c * c + d * d > 1e-3)
        .prop_map(|(a, b, c, d)| DensityMatrix::pure(&[Complex::new(a, b), Complex::new(c, d)]).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_norm_is_unitarily_invariant(h in hermitian(3), u in unitary(3)) {
        let rotated = &(&u * &h) * &u.adjoint();
        let a = trace_norm(&h).unwrap();
        prop_assert!((a - trace_norm(&rotated).unwrap()).abs() < 1e-12 * (1.0 + a));
    }

    #[test]
    fn trace_norm_triangle_inequality(a in hermitian(3), b in hermitian(3)) {
        let sum = trace_norm(&(&a + &b)).unwrap();
        prop_assert!(sum <= trace_norm(&a).unwrap() + trace_norm(&b).unwrap() + 1e-12);
    }

    #[test]
    fn entropy_is_unitarily_invariant(rho in density(3), u in unitary(3)) {
        let rotated = &(&u * rho.matrix()) * &u.adjoint();
        let a = rho.entropy().unwrap();
        let b = von_neumann_entropy(&rotated).unwrap();
        prop_assert!((a - b).abs() < 1e-10);
        prop_assert!(a >= -1e-12 && a <= 3f64.log2() + 1e-12);
    }

    #[test]
    fn dephasing_maps_preserve_states(p in 0.0f64..4.0, t in 0.0f64..10.0, rho in ket2()) {
        let proc = DephasingSemiMarkov::new(1.0, p).unwrap();
        let out = apply_kraus(&proc.kraus_at(t).unwrap(), &rho).unwrap();
        prop_assert!((out.matrix().trace().re - 1.0).abs() < 1e-12);
        prop_assert!(hermitian_eig(out.matrix()).unwrap().min_eigenvalue() > -1e-12);
        prop_assert!(is_cptp(&proc.map_at(t).unwrap().choi()).unwrap().is_cptp);
    }

    #[test]
    fn nonunital_maps_are_cptp(lambda in 0.0f64..3.0, t in 0.0f64..20.0, rho in ket2()) {
        let proc = NonUnitalSemiMarkov::new(lambda).unwrap();
        let map = proc.map_at(t).unwrap();
        prop_assert!(is_cptp(&map.choi()).unwrap().is_cptp);
        let out = map.apply(&rho).unwrap();
        prop_assert!((out.matrix().trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn choi_kraus_round_trip(lambda in 0.0f64..3.0, t in 0.0f64..5.0) {
        let choi = NonUnitalSemiMarkov::new(lambda).unwrap().choi_at(t).unwrap();
        let again = choi.to_kraus().unwrap().choi();
        prop_assert!(again.matrix().max_abs_diff(choi.matrix()) < 1e-12);
        prop_assert!(choi.superoperator().choi() == choi);
    }

    #[test]
    fn generator_choi_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, d in 2usize..5) {
        for jump in [JumpStructure::Projector, JumpStructure::DephasingZ(DephasingNormalization::PerDimension)] {
            let ca = GeneratorSnapshot::new(d, a, jump).unwrap().choi().unwrap();
            let cb = GeneratorSnapshot::new(d, b, jump).unwrap().choi().unwrap();
            let cab = GeneratorSnapshot::new(d, a + b, jump).unwrap().choi().unwrap();
            prop_assert!(cab.matrix().max_abs_diff(&(ca.matrix() + cb.matrix())) < 1e-13);
            let c: f64 = family_constant(d, jump).unwrap();
            prop_assert!((trace_norm(&(ca.matrix() - cb.matrix())).unwrap() - c * (a - b).abs()).abs() < 1e-11);
        }
    }

    #[test]
    fn rate_matches_finite_difference(idx in 0usize..3, t in 0.05f64..8.0) {
        let (s, p) = [(1.0, 0.05), (1.0, 0.125), (1.0, 3.0)][idx];
        let proc = DephasingSemiMarkov::new(s, p).unwrap();
        let near_pole = proc.zeros_of_q(9.0).iter().any(|z| (z - t).abs() < 0.05);
        prop_assume!(!near_pole);
        let h = 1e-5;
        let fd = -0.5 * ((proc.q(t + h).abs().ln() - proc.q(t - h).abs().ln()) / (2.0 * h));
        let exact = proc.rate(t).unwrap();
        prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1e-3), "fd {fd} exact {exact}");
        let dq = (proc.q(t + h) - proc.q(t - h)) / (2.0 * h);
        prop_assert!((dq - proc.q_derivative(t)).abs() < 1e-8);
    }

    #[test]
    fn q_is_continuous_across_the_boundary(s in 0.5f64..3.0, t in 0.0f64..20.0) {
        let p = s * s / 8.0;
        let below = DephasingSemiMarkov::new(s, p * (1.0 - 1e-9)).unwrap().q(t);
        let at = DephasingSemiMarkov::new(s, p).unwrap().q(t);
        let above = DephasingSemiMarkov::new(s, p * (1.0 + 1e-9)).unwrap().q(t);
        prop_assert!((below - at).abs() <= 1e-6 && (above - at).abs() <= 1e-6);
    }

    #[test]
    fn divisible_coherence_is_monotone(s in 0.2f64..3.0, frac in 0.0f64..=1.0) {
        let proc = DephasingSemiMarkov::new(s, frac * s * s / 8.0).unwrap();
        let mut prev = 1.0f64;
        for t in uniform_grid(40.0 / s, 2000) {
            let q = proc.q(t);
            prop_assert!(q.abs() <= 1.0 + 1e-15);
            prop_assert!(q.abs() <= prev + 1e-15);
            prev = q.abs();
        }
    }

    #[test]
    fn timelocal_matches_map(p in 0.0f64..0.125, lambda in 0.0f64..2.0, rho in ket2()) {
        let grid = uniform_grid(3.0, 6);
        let deph = DephasingSemiMarkov::new(1.0, p).unwrap();
        let nonunital = NonUnitalSemiMarkov::new(lambda).unwrap();
        let families: [&dyn SemiMarkovFamily<f64>; 2] = [&deph, &nonunital];
        for family in families {
            let traj = evolve_timelocal(family, &rho, &grid).unwrap();
            for (t, state) in traj.times.iter().zip(&traj.states) {
                let exact = family.map_at(*t).unwrap().apply(&rho).unwrap();
                prop_assert!(state.max_abs_diff(exact.matrix()) < 1e-6);
            }
        }
    }

    #[test]
    fn timelocal_before_first_pole(t_end in 0.1f64..0.7, rho in ket2()) {
        let proc = DephasingSemiMarkov::new(1.0, 3.0).unwrap();
        let grid = uniform_grid(t_end, 5);
        let traj = evolve_timelocal(&proc, &rho, &grid).unwrap();
        let exact = proc.map_at(t_end).unwrap().apply(&rho).unwrap();
        prop_assert!(traj.states.last().unwrap().max_abs_diff(exact.matrix()) < 1e-6);
    }

    #[test]
    fn true_minimum_never_exceeds_reference(p in 0.0f64..4.0, horizon in 0.2f64..2.0) {
        let proc = DephasingSemiMarkov::new(1.0, p).unwrap();
        let base = SssConfig::default().with_horizon(horizon);
        let paper = sss_measure(&proc, &base).unwrap();
        let best = sss_measure(&proc, &base.with_mode(ReferenceMode::TrueMinimum)).unwrap();
        prop_assert!(best.xi <= paper.xi + 1e-9);
        prop_assert!(paper.zeta >= 0.0 && paper.zeta < 1.0);
        prop_assert!((paper.zeta - paper.xi / (1.0 + paper.xi)).abs() < 1e-12);
        prop_assert_eq!(paper.zeta == 0.0, paper.xi == 0.0);
    }

    #[test]
    fn choi_form_factorizes(p in 0.0f64..0.5, lambda in 0.1f64..2.0, d in 2usize..4) {
        let config = SssConfig::default().with_form(MeasureForm::Choi);
        let deph = DephasingSemiMarkov::new(1.0, p)
            .unwrap()
            .with_choi_generator(d, DephasingNormalization::PerDimension)
            .unwrap();
        let nonunital = NonUnitalSemiMarkov::new(lambda).unwrap();
        let families: [&dyn SemiMarkovFamily<f64>; 2] = [&deph, &nonunital];
        for family in families {
            let choi = sss_measure(family, &config).unwrap();
            let rate = sss_measure(family, &config.with_form(MeasureForm::Rate)).unwrap();
            let details = choi.choi.unwrap();
            prop_assert!((details.normalized - rate.xi).abs() <= 1e-6 * (1.0 + rate.xi));
        }
    }

    #[test]
    fn blp_vanishes_exactly_without_violations(p in 0.0f64..0.6) {
        let proc = DephasingSemiMarkov::new(1.0, p).unwrap();
        let grid = uniform_grid(12.0, 1200);
        let report = cp_divisibility_scan(&proc, &grid).unwrap();
        let blp = blp_measure(&proc, &grid, (&DensityMatrix::plus(), &DensityMatrix::minus())).unwrap();
        prop_assert_eq!(blp.value == 0.0, report.is_divisible());
    }

    #[test]
    fn holevo_matrix_path_matches_closed_form(p in 0.0f64..4.0, t in 0.0f64..8.0) {
        let proc = DephasingSemiMarkov::new(1.0, p).unwrap();
        let curve = holevo_curve(&proc, &HolevoEnsemble::plus_minus(), &[t]).unwrap();
        let expected = holevo_dephasing_closed_form(proc.q(t)).unwrap();
        prop_assert!((curve[0].1 - expected).abs() < 1e-8);
    }
}

#[test]
fn true_minimum_matches_sample_median() {
    for (s, p) in [(1.0, 0.1), (1.0, 0.5), (2.0, 0.3)] {
        let proc = DephasingSemiMarkov::new(s, p).unwrap();
        let config = SssConfig::default().with_mode(ReferenceMode::TrueMinimum);
        let r = sss_measure(&proc, &config).unwrap();
        let n = 2_000_001;
        let mut samples: Vec<f64> = (0..n).map(|k| proc.rate(k as f64 / (n - 1) as f64).unwrap()).collect();
        let mid = n / 2;
        let (_, median, _) = samples.select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).unwrap());
        assert!(
            (r.gamma_ref - *median).abs() < 1e-6,
            "s={s} p={p}: {} vs {median}",
            r.gamma_ref
        );
    }
}

#[test]
fn paper_measure_is_monotone_in_p() {
    let mut prev = -1.0;
    for k in 0..=10 {
        let p = 0.05 * k as f64;
        let xi = sss_measure(&DephasingSemiMarkov::new(1.0, p).unwrap(), &SssConfig::default())
            .unwrap()
            .xi;
        if k == 0 {
            assert_eq!(xi, 0.0);
        }
        assert!(xi >= prev);
        prev = xi;
    }
}

#[test]
fn dephasing_family_constant_is_dimension_independent() {
    let jump = JumpStructure::DephasingZ(DephasingNormalization::PerDimension);
    let c2: f64 = family_constant(2, jump).unwrap();
    for d in 3..7 {
        let c: f64 = family_constant(d, jump).unwrap();
        assert!((c - c2).abs() < 1e-9, "d = {d}: {c}");
    }
}

#[test]
fn f32_instantiation_runs() {
    let proc = DephasingSemiMarkov::<f32>::new(1.0, 0.1).unwrap();
    assert!((proc.q(1.0) - DephasingSemiMarkov::<f64>::new(1.0, 0.1).unwrap().q(1.0) as f32).abs() < 1e-6);
    let r = sss_measure(&NonUnitalSemiMarkov::<f32>::new(1.0).unwrap(), &SssConfig::default()).unwrap();
    assert!((r.xi - 1f32.cosh().ln()).abs() < 1e-5);
}
