use proptest::prelude::*;

use qrw_core::cocycle::{
    chaos_series_element, cpc_semigroup, qs_element, semigroup_element_vacuum, semigroup_superop, Truncation,
};
use qrw_core::generators::{add_delta, adjoint_gen, homgen};
use qrw_core::linops::C64;
use qrw_core::random::{random_generator, random_gksl, random_operator, random_step_function, random_vec, rng, Prng, WMode};
use qrw_core::signals::StepFunction;
use qrw_core::toywalk::ExpVectorLabel;

fn step(g: &mut Prng, d_k: usize, horizon: f64) -> StepFunction {
    random_step_function(g, d_k, 3, 0.25, horizon, 1.0)
}

fn label(g: &mut Prng, d_h: usize, d_k: usize, horizon: f64) -> ExpVectorLabel {
    ExpVectorLabel::new(random_vec(g, d_h, 1.0), step(g, d_k, horizon))
}

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cocycle_law(seed in any::<u64>(), s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let mut g = rng(seed);
        let psi = random_generator(&mut g, 2, 1, 0.7);
        let (f, gg) = (step(&mut g, 1, 2.0), step(&mut g, 1, 2.0));
        let joint = semigroup_superop(&psi, s + t, &gg, &f).unwrap();
        let early = semigroup_superop(&psi, s, &gg, &f).unwrap();
        let late = semigroup_superop(&psi, t, &gg.shift(s), &f.shift(s)).unwrap();
        let split = early.compose(&late);
        prop_assert!(joint.max_abs_diff(&split) <= 1e-10 * joint.matrix().max_abs().max(1.0));
    }

    #[test]
    fn vacuum_elements_ignore_the_future(seed in any::<u64>(), t in 0.0f64..1.5) {
        let mut g = rng(seed);
        let psi = random_generator(&mut g, 2, 1, 0.7);
        let a = random_operator(&mut g, &[2], &[2], 1.0);
        let bra = label(&mut g, 2, 1, 2.0);
        let ket = label(&mut g, 2, 1, 2.0);
        // Keep both functions on [0, t) and put unrelated values after t.
        let mut splice = |f: &StepFunction| -> StepFunction {
            let (z1, z2) = (random_vec(&mut g, 1, 2.0), random_vec(&mut g, 1, 2.0));
            let late = StepFunction::from_pieces(1, &[(t, t + 0.5, z1), (t + 0.5, t + 1.5, z2)]).unwrap();
            f.truncate(t).zip_with(&late, |a, b| vec![a[0] + b[0]]).unwrap()
        };
        let bra2 = ExpVectorLabel::new(bra.u.clone(), splice(&bra.f));
        let ket2 = ExpVectorLabel::new(ket.u.clone(), splice(&ket.f));
        let v1 = semigroup_element_vacuum(&psi, t, &a, &bra, &ket).unwrap();
        let v2 = semigroup_element_vacuum(&psi, t, &a, &bra2, &ket2).unwrap();
        prop_assert!(close(v1, v2, 1e-12));
    }

    #[test]
    fn elements_are_hermitian(seed in any::<u64>(), t in 0.0f64..1.5) {
        let mut g = rng(seed);
        let psi = random_generator(&mut g, 2, 2, 0.5);
        let a = random_operator(&mut g, &[2], &[2], 1.0);
        let bra = label(&mut g, 2, 2, 2.0);
        let ket = label(&mut g, 2, 2, 2.0);
        let lhs = semigroup_element_vacuum(&psi, t, &a, &bra, &ket).unwrap().conj();
        let rhs = semigroup_element_vacuum(&adjoint_gen(&psi), t, &a.adjoint(), &ket, &bra).unwrap();
        prop_assert!(close(lhs, rhs, 1e-10));
    }

    #[test]
    fn identity_switch_within_support(seed in any::<u64>(), extra in 0.0f64..1.0) {
        let mut g = rng(seed);
        let theta = random_generator(&mut g, 2, 1, 0.5);
        let a = random_operator(&mut g, &[2], &[2], 1.0);
        let bra = label(&mut g, 2, 1, 1.0);
        let ket = label(&mut g, 2, 1, 1.0);
        let t = 1.0 + extra;
        let qs = qs_element(&theta, t, &a, &bra, &ket).unwrap();
        let vac = semigroup_element_vacuum(&add_delta(&theta), t, &a, &bra, &ket).unwrap();
        prop_assert!(close(qs, vac, 1e-12));
    }

    #[test]
    fn series_within_tail_bound(seed in any::<u64>(), m in 0usize..8, t in 0.1f64..1.0) {
        let mut g = rng(seed);
        let psi = random_generator(&mut g, 2, 1, 0.4);
        let a = random_operator(&mut g, &[2], &[2], 1.0);
        let bra = label(&mut g, 2, 1, 1.0);
        let ket = label(&mut g, 2, 1, 1.0);
        let exact = semigroup_element_vacuum(&psi, t, &a, &bra, &ket).unwrap();
        let (v, bound) = chaos_series_element(&psi, t, &a, &bra, &ket, Truncation::Fixed(m)).unwrap();
        prop_assert!((v - exact).norm() <= bound.remainder() + 1e-10);
    }

    #[test]
    fn dilation_semigroup_contracts(seed in any::<u64>(), t in 0.0f64..3.0) {
        let mut g = rng(seed);
        let data = random_gksl(&mut g, 2, 1, 0.8, WMode::Random);
        let a = random_operator(&mut g, &[2], &[2], 1.0);
        let ta = cpc_semigroup(&homgen(&data), t, &a).unwrap();
        prop_assert!(ta.op_norm() <= a.op_norm() * (1.0 + 1e-10));
    }
}
