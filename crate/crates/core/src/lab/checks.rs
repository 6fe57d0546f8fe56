//! Dilation, walk-homomorphism and decomposition checks.

use serde::Serialize;

use crate::cocycle::cpc_semigroup;
use crate::error::Result;
use crate::generators::{gkls_superop, homgen, repeated_interaction, walk_power, Budget, GKSLData, Generator};
use crate::lab::report::{CheckLine, SuiteReport};
use crate::linops::{norm, Operator, EXPM_TOL};
use crate::random::{random_generator, random_operator, random_step_function, random_vec, rng};
use crate::toywalk::{decomposition_residual, walk_element_vacuum, ExpVectorLabel, ToyEmbedding};

fn units(d: usize) -> Vec<Operator> {
    (0..d * d).map(|k| Operator::unit(d, k % d, k / d)).collect()
}

/// T_t from the compressed dilation generator against exp(tL), and the
/// semigroup law T_{s+t} = T_s ∘ T_t, on the matrix units.
pub fn dilation_check(data: &GKSLData, t_grid: &[f64], tol: f64) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("dilation");
    let psi = homgen(data);
    let l = gkls_superop(data);
    let basis = units(data.d_h);
    let mut dev = 0.0f64;
    for &t in t_grid {
        let et = l.exp(t, EXPM_TOL);
        for a in &basis {
            let lhs = cpc_semigroup(&psi, t, a)?;
            dev = dev.max(lhs.max_abs_diff(&et.apply(a)?));
        }
    }
    rep.push(CheckLine::within("cpc_vs_gksl_exponential", dev, tol));
    let mut law = 0.0f64;
    for &s in t_grid {
        for &t in t_grid {
            for a in &basis {
                let joint = cpc_semigroup(&psi, s + t, a)?;
                let split = cpc_semigroup(&psi, s, &cpc_semigroup(&psi, t, a)?)?;
                law = law.max(joint.max_abs_diff(&split));
            }
        }
    }
    rep.push(CheckLine::within("semigroup_law", law, tol));
    let mut contr = 0.0f64;
    for &t in t_grid {
        for a in &basis {
            contr = contr.max(cpc_semigroup(&psi, t, a)?.op_norm() - a.op_norm());
        }
    }
    rep.push(CheckLine::within("contractive", contr, tol));
    Ok(rep)
}

/// Deviations of φ_h^{(m)} from multiplicativity, adjoint preservation and
/// unitality, the maxima taken over matrix units.
#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct HomDeviation {
    pub m: usize,
    pub multiplicative: f64,
    pub adjoint: f64,
    pub unital: f64,
}

pub fn hom_deviations(phi: &Generator, m: usize, budget: Budget) -> Result<HomDeviation> {
    let d = phi.d_h();
    let basis = units(d);
    let images: Vec<Operator> = basis.iter().map(|a| walk_power(phi, m, a, budget)).collect::<Result<_>>()?;
    let mut mult = 0.0f64;
    for (a, pa) in basis.iter().zip(&images) {
        for (b, pb) in basis.iter().zip(&images) {
            let pab = walk_power(phi, m, &(a * b), budget)?;
            mult = mult.max(pab.max_abs_diff(&(pa * pb)));
        }
    }
    let mut adj = 0.0f64;
    for (a, pa) in basis.iter().zip(&images) {
        adj = adj.max(walk_power(phi, m, &a.adjoint(), budget)?.max_abs_diff(&pa.adjoint()));
    }
    let one = walk_power(phi, m, &Operator::identity(&[d]), budget)?;
    let unital = one.max_abs_diff(&Operator::identity(one.row_factors()));
    Ok(HomDeviation { m, multiplicative: mult, adjoint: adj, unital })
}

/// Homomorphism deviations of the repeated-interaction walk for m ≤ m_max,
/// and the contraction bound |⟨vε(g), J_t(a) uε(f)⟩| ≤ ‖a‖ ‖v‖∏‖ĝ_k‖ ‖u‖∏‖f̂_k‖
/// on seeded samples.
pub fn multiplicativity_check(data: &GKSLData, h: f64, m_max: usize, tol: f64, seed: u64, budget: Budget) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new(format!("multiplicativity h={h}"));
    rep.seed = Some(seed);
    let phi = repeated_interaction(data, h)?;
    for m in 0..=m_max {
        let dev = hom_deviations(&phi, m, budget)?;
        rep.push(CheckLine::within(format!("m{m}_multiplicative"), dev.multiplicative, tol));
        rep.push(CheckLine::within(format!("m{m}_adjoint"), dev.adjoint, tol));
        rep.push(CheckLine::within(format!("m{m}_unital"), dev.unital, tol));
    }
    let mut r = rng(seed);
    let mut excess = f64::NEG_INFINITY;
    let d = data.d_h;
    for _ in 0..8 {
        let a = random_operator(&mut r, &[d], &[d], 1.0);
        let bra = ExpVectorLabel::new(random_vec(&mut r, d, 1.0), random_step_function(&mut r, data.d_k, 3, 0.25, 1.0, 1.0));
        let ket = ExpVectorLabel::new(random_vec(&mut r, d, 1.0), random_step_function(&mut r, data.d_k, 3, 0.25, 1.0, 1.0));
        let t = 1.0;
        let v = walk_element_vacuum(&phi, h, t, &a, &bra, &ket)?;
        let n = crate::signals::grid_index(t, h);
        let emb = ToyEmbedding::for_functions(h, &[&bra.f, &ket.f]);
        let side = |l: &ExpVectorLabel| -> f64 { norm(&l.u) * (0..n).map(|k| norm(&emb.slot_vector(&l.f, k))).product::<f64>() };
        let bound = a.op_norm() * side(&bra) * side(&ket);
        excess = excess.max(v.norm() - bound * (1.0 + 1e-12));
    }
    rep.push(CheckLine::verdict("walk_element_contraction", excess <= 0.0, excess));
    Ok(rep)
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct DecompositionRow {
    pub instance: usize,
    pub n: usize,
    pub residual: f64,
}

/// Decomposition residuals for `count` seeded random generators (d_h, d_k)
/// at step h and all n ≤ n_max.
pub fn decomposition_suite(
    count: usize,
    d_h: usize,
    d_k: usize,
    h: f64,
    n_max: usize,
    seed: u64,
    budget: Budget,
) -> Result<Vec<DecompositionRow>> {
    budget.check(d_h, d_k + 1, n_max)?;
    let mut r = rng(seed);
    let mut rows = Vec::new();
    let horizon = (n_max as f64 * h).max(h);
    for instance in 0..count {
        let phi = random_generator(&mut r, d_h, d_k, 1.0);
        let a = random_operator(&mut r, &[d_h], &[d_h], 1.0);
        let bra = ExpVectorLabel::new(random_vec(&mut r, d_h, 1.0), random_step_function(&mut r, d_k, 3, h / 2.0, horizon, 1.0));
        let ket = ExpVectorLabel::new(random_vec(&mut r, d_h, 1.0), random_step_function(&mut r, d_k, 3, h / 2.0, horizon, 1.0));
        for n in 0..=n_max {
            let residual = decomposition_residual(&phi, h, n, &a, &bra, &ket, budget)?;
            rows.push(DecompositionRow { instance, n, residual });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{ampliation, re};
    use crate::linops::{expm, I};
    use crate::random::{random_gksl, random_hermitian, WMode};

    #[test]
    fn dilation_on_random_data() {
        let mut r = rng(41);
        let data = random_gksl(&mut r, 2, 1, 0.7, WMode::Random);
        let rep = dilation_check(&data, &[0.1, 1.0], 1e-10).unwrap();
        assert!(rep.passed(), "{}", rep.summary());
    }

    #[test]
    fn pure_hamiltonian_semigroup_is_conjugation() {
        let mut r = rng(42);
        let g = random_hermitian(&mut r, 2, 1.0);
        let data = GKSLData::new(g.clone(), ampliation(2, 1), Operator::zeros(&[2], &[2]), Operator::identity(&[2])).unwrap();
        let a = random_operator(&mut r, &[2], &[2], 1.0);
        let t = 0.8;
        let u = expm(&g.scale(I * t), EXPM_TOL).unwrap();
        let want = &(&u.adjoint() * &a) * &u;
        assert!(cpc_semigroup(&homgen(&data), t, &a).unwrap().max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn scalar_commutative_data_is_static() {
        let one = Operator::identity(&[1]);
        let data = GKSLData::new(Operator::zeros(&[1], &[1]), ampliation(1, 1), Operator::from_rows(&[vec![re(0.7)]]).unwrap(), one).unwrap();
        let a = Operator::from_rows(&[vec![re(2.5)]]).unwrap();
        for t in [0.0, 0.5, 3.0] {
            assert!(cpc_semigroup(&homgen(&data), t, &a).unwrap().max_abs_diff(&a) < 1e-14);
        }
        let rep = multiplicativity_check(&data, 0.1, 4, 1e-12, 1, Budget::default()).unwrap();
        assert!(rep.passed(), "{}", rep.summary());
    }

    #[test]
    fn repeated_interaction_is_homomorphic() {
        let mut r = rng(43);
        let data = random_gksl(&mut r, 2, 1, 0.7, WMode::Random);
        for h in [0.1, 0.01] {
            let rep = multiplicativity_check(&data, h, 3, 1e-10, 7, Budget::default()).unwrap();
            assert!(rep.passed(), "{}", rep.summary());
            assert_eq!(rep.check("m0_multiplicative").unwrap().value, 0.0);
        }
    }

    #[test]
    fn decomposition_rows_are_rounding_level() {
        let rows = decomposition_suite(3, 2, 1, 0.5, 4, 5, Budget::default()).unwrap();
        assert_eq!(rows.len(), 15);
        assert!(rows.iter().all(|r| r.residual <= 1e-12));
        assert!(decomposition_suite(1, 2, 1, 0.5, 12, 5, Budget::default()).is_err());
    }
}
