//! Generators φ: B(h) → B(h⊗k̂), their walk powers, scalings, deficits,
//! compressions and adjoints, plus the GKSL, Hudson–Parthasarathy and
//! scalar-example builders.
//!
//! Vectorization is column-major throughout: the action matrix of a
//! generator maps `vec(a)` (length d_h²) to `vec(φ(a))` (length (d_h·d_khat)²).
//!
//! Slot convention for walk powers: in φ^{(n)}(a) on h⊗k̂^{⊗n}, slot 0 sits
//! next to h. The lift that builds φ^{(n+1)} from φ^{(n)} inserts its new
//! slot at position 0, so the first application of φ ends up in the
//! rightmost slot, and compressing the rightmost slot of φ^{(n)}(a) with
//! x, y gives φ^{(n-1)}(E^x φ(a) E_y). On toy Fock space slot i is time
//! cell i.

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, QrwError, Result};
use crate::linops::{expm, kron, KhatBasis, Operator, SuperOp, C64, I, ONE, ZERO};

/// Default cap on the materialized dimension d_h·d_khat^n.
pub const DEFAULT_MAX_DIM: usize = 4096;

/// Tolerance of the exponentials inside the repeated-interaction generator.
pub const RI_EXPM_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_dim: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_dim: DEFAULT_MAX_DIM }
    }
}

impl Budget {
    pub fn new(max_dim: usize) -> Self {
        Budget { max_dim }
    }

    /// Checks d_h·d_khat^n ≤ max_dim.
    pub fn check(&self, d_h: usize, d_khat: usize, n: usize) -> Result<usize> {
        let mut dim = d_h;
        for _ in 0..n {
            dim = dim.saturating_mul(d_khat);
            if dim > self.max_dim {
                return Err(QrwError::Budget { needed: dim, limit: self.max_dim });
            }
        }
        if dim > self.max_dim {
            return Err(QrwError::Budget { needed: dim, limit: self.max_dim });
        }
        Ok(dim)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Adaptedness {
    Vacuum,
    Identity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// A linear map φ: B(ℂ^{d_h}) → B(ℂ^{d_h} ⊗ k̂).
#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    d_h: usize,
    d_k: usize,
    action: Operator,
}

impl Generator {
    pub fn new(d_h: usize, d_k: usize, action: Operator) -> Result<Self> {
        let big = d_h * (d_k + 1);
        if action.rows() != big * big || action.cols() != d_h * d_h {
            return dim_err(format!(
                "action must be {}x{} for d_h={d_h}, d_k={d_k}; got {}x{}",
                big * big,
                d_h * d_h,
                action.rows(),
                action.cols()
            ));
        }
        let action = action.with_factors(&[big * big], &[d_h * d_h])?;
        Ok(Generator { d_h, d_k, action })
    }

    pub fn zero(d_h: usize, d_k: usize) -> Self {
        let big = d_h * (d_k + 1);
        Generator { d_h, d_k, action: Operator::zeros(&[big * big], &[d_h * d_h]) }
    }

    /// Tabulates a linear map from its values on the matrix units of B(h).
    pub fn from_fn(d_h: usize, d_k: usize, f: impl Fn(&Operator) -> Operator) -> Self {
        let big = d_h * (d_k + 1);
        let mut action = Operator::zeros(&[big * big], &[d_h * d_h]);
        for j in 0..d_h {
            for i in 0..d_h {
                let img = f(&Operator::unit(d_h, i, j));
                assert_eq!((img.rows(), img.cols()), (big, big), "image must live on h⊗k̂");
                for (r, z) in img.vec_col().into_iter().enumerate() {
                    action.set(r, i + j * d_h, z);
                }
            }
        }
        Generator { d_h, d_k, action }
    }

    pub fn d_h(&self) -> usize {
        self.d_h
    }
    pub fn d_k(&self) -> usize {
        self.d_k
    }
    pub fn d_khat(&self) -> usize {
        self.d_k + 1
    }
    pub fn khat(&self) -> KhatBasis {
        KhatBasis::new(self.d_k)
    }
    pub fn action(&self) -> &Operator {
        &self.action
    }

    pub fn apply(&self, a: &Operator) -> Result<Operator> {
        if a.rows() != self.d_h || a.cols() != self.d_h {
            return dim_err(format!("generator on d_h={} applied to {}x{}", self.d_h, a.rows(), a.cols()));
        }
        let v = self.action.apply(&a.vec_col())?;
        let f = [self.d_h, self.d_khat()];
        Operator::from_vec_col(&v, &f, &f)
    }

    fn same_dims(&self, other: &Generator) -> Result<()> {
        if self.d_h != other.d_h || self.d_k != other.d_k {
            return dim_err(format!(
                "generators on (d_h,d_k)=({},{}) and ({},{})",
                self.d_h, self.d_k, other.d_h, other.d_k
            ));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Generator) -> Result<Generator> {
        self.same_dims(other)?;
        Ok(Generator { action: &self.action + &other.action, ..self.clone() })
    }

    pub fn try_sub(&self, other: &Generator) -> Result<Generator> {
        self.same_dims(other)?;
        Ok(Generator { action: &self.action - &other.action, ..self.clone() })
    }

    pub fn scale_by(&self, z: C64) -> Generator {
        Generator { action: self.action.scale(z), ..self.clone() }
    }

    pub fn max_abs_diff(&self, other: &Generator) -> f64 {
        self.action.max_abs_diff(&other.action)
    }

    /// Spectral norm of the action matrix.
    pub fn action_norm(&self) -> f64 {
        self.action.op_norm()
    }

    /// An upper bound for ‖φ‖_k̂ = d_khat·‖φ‖ with ‖φ‖ the operator-norm to
    /// operator-norm bound of φ; ‖φ(a)‖ ≤ ‖φ(a)‖_F ≤ A‖a‖_F ≤ A√d_h‖a‖.
    pub fn khat_norm(&self) -> f64 {
        self.d_khat() as f64 * (self.d_h as f64).sqrt() * self.action_norm()
    }
}

/// a ↦ a⊗Δ⊥.
pub fn vacuum_embedding(d_h: usize, d_k: usize) -> Generator {
    let dp = KhatBasis::new(d_k).delta_perp();
    Generator::from_fn(d_h, d_k, |a| kron(a, &dp))
}

/// a ↦ a⊗I_k̂.
pub fn identity_embedding(d_h: usize, d_k: usize) -> Generator {
    let id = Operator::identity(&[d_k + 1]);
    Generator::from_fn(d_h, d_k, |a| kron(a, &id))
}

/// a ↦ a⊗Δ.
pub fn delta_embedding(d_h: usize, d_k: usize) -> Generator {
    let d = KhatBasis::new(d_k).delta();
    Generator::from_fn(d_h, d_k, |a| kron(a, &d))
}

/// The lift φ ⊗ id over a trailing block: T on h⊗K ↦ operator on h⊗k̂⊗K,
/// the new slot placed directly after h.
pub fn lift(phi: &Generator, t: &Operator) -> Result<Operator> {
    let d_h = phi.d_h;
    let dkh = phi.d_khat();
    if t.row_factors().first() != Some(&d_h) || t.col_factors().first() != Some(&d_h) || !t.is_square() {
        return dim_err("lift expects a square operator with leading factor d_h");
    }
    let dim_k = t.rows() / d_h;
    let mut factors = vec![d_h, dkh];
    factors.extend_from_slice(&t.row_factors()[1..]);
    let mut out = Operator::zeros(&factors, &factors);
    let big = d_h * dkh;
    let mut block = Operator::zeros(&[d_h], &[d_h]);
    for p in 0..dim_k {
        for q in 0..dim_k {
            let mut nonzero = false;
            for i in 0..d_h {
                for j in 0..d_h {
                    let z = t.get(i * dim_k + p, j * dim_k + q);
                    nonzero |= z != ZERO;
                    block.set(i, j, z);
                }
            }
            if !nonzero {
                continue;
            }
            let img = phi.apply(&block)?;
            for r in 0..big {
                for c in 0..big {
                    out.set(r * dim_k + p, c * dim_k + q, img.get(r, c));
                }
            }
        }
    }
    Ok(out)
}

/// φ^{(n)}(a) on h⊗k̂^{⊗n}, materialized.
pub fn walk_power(phi: &Generator, n: usize, a: &Operator, budget: Budget) -> Result<Operator> {
    budget.check(phi.d_h, phi.d_khat(), n)?;
    if a.rows() != phi.d_h || a.cols() != phi.d_h {
        return dim_err(format!("walk power of a d_h={} generator at a {}x{}", phi.d_h, a.rows(), a.cols()));
    }
    let mut x = a.clone().with_factors(&[phi.d_h], &[phi.d_h])?;
    for _ in 0..n {
        x = lift(phi, &x)?;
    }
    Ok(x)
}

fn slot_weight(s: usize, root: f64) -> f64 {
    if s == 0 {
        root
    } else {
        1.0
    }
}

/// Conjugation by I⊗Ξ_h^{⊗m} of an operator on h⊗k̂^{⊗m}; the number of
/// slots is read from the factor list.
pub fn scale_slots(x: &Operator, h: f64) -> Result<Operator> {
    let rf = x.row_factors();
    if rf.is_empty() || rf != x.col_factors() {
        return dim_err("scale_slots expects matching factor lists h, k̂, …, k̂");
    }
    let slots = &rf[1..];
    let root = h.powf(-0.5);
    let weight = |mut idx: usize| {
        let mut w = 1.0;
        for &d in slots.iter().rev() {
            w *= slot_weight(idx % d, root);
            idx /= d;
        }
        w
    };
    let wr: Vec<f64> = (0..x.rows()).map(weight).collect();
    Ok(Operator::from_fn(rf, rf, |i, j| x.get(i, j) * (wr[i] * wr[j])))
}

/// s_h(φ): a ↦ (I⊗Ξ_h) φ(a) (I⊗Ξ_h).
pub fn scale(phi: &Generator, h: f64) -> Generator {
    let dkh = phi.d_khat();
    let root = h.powf(-0.5);
    let big = phi.d_h * dkh;
    let mut action = phi.action.clone();
    for c in 0..big {
        for r in 0..big {
            let w = slot_weight(r % dkh, root) * slot_weight(c % dkh, root);
            if w == 1.0 {
                continue;
            }
            let row = r + c * big;
            for col in 0..action.cols() {
                action.set(row, col, action.get(row, col) * w);
            }
        }
    }
    Generator { action, ..phi.clone() }
}

/// φ♭(a) = φ(a) − a⊗Δ⊥.
pub fn vacuum_deficit(phi: &Generator) -> Generator {
    phi.try_sub(&vacuum_embedding(phi.d_h, phi.d_k)).expect("same dims")
}

/// φ★(a) = φ(a) − a⊗I.
pub fn identity_deficit(phi: &Generator) -> Generator {
    phi.try_sub(&identity_embedding(phi.d_h, phi.d_k)).expect("same dims")
}

/// θ ↦ θ + ·⊗Δ, the vacuum-adapted generator of the identity-adapted cocycle.
pub fn add_delta(theta: &Generator) -> Generator {
    theta.try_add(&delta_embedding(theta.d_h, theta.d_k)).expect("same dims")
}

/// ψ^x_y: a ↦ E^x ψ(a) E_y as a superoperator on B(h).
pub fn compress_gen(psi: &Generator, x: &[C64], y: &[C64]) -> Result<SuperOp> {
    let dkh = psi.d_khat();
    if x.len() != dkh || y.len() != dkh {
        return dim_err(format!("compression vectors must have length {dkh}"));
    }
    let d = psi.d_h;
    let big = d * dkh;
    let mut mat = Operator::zeros(&[d * d], &[d * d]);
    let weights: Vec<(usize, usize, C64)> = (0..dkh)
        .flat_map(|s| (0..dkh).map(move |t| (s, t)))
        .map(|(s, t)| (s, t, x[s].conj() * y[t]))
        .filter(|(_, _, w)| *w != ZERO)
        .collect();
    for j in 0..d {
        for i in 0..d {
            let out_row = i + j * d;
            for col in 0..d * d {
                let mut acc = ZERO;
                for &(s, t, w) in &weights {
                    let r = (i * dkh + s) + (j * dkh + t) * big;
                    acc += w * psi.action.get(r, col);
                }
                mat.set(out_row, col, acc);
            }
        }
    }
    SuperOp::from_matrix(d, mat)
}

/// φ†(a) = φ(a*)*.
pub fn adjoint_gen(phi: &Generator) -> Generator {
    Generator::from_fn(phi.d_h, phi.d_k, |a| phi.apply(&a.adjoint()).expect("dims").adjoint())
}

/// The generator φ_h whose scaled deficit equals `limit` exactly:
/// φ_h(a) = a⊗Δ⊥ (or a⊗I) + s_{1/h}(limit)(a).
pub fn euler_family(limit: &Generator, h: f64, adaptedness: Adaptedness) -> Generator {
    let base = match adaptedness {
        Adaptedness::Vacuum => vacuum_embedding(limit.d_h, limit.d_k),
        Adaptedness::Identity => identity_embedding(limit.d_h, limit.d_k),
    };
    base.try_add(&scale(limit, 1.0 / h)).expect("same dims")
}

/// a ↦ (a⊗I_k̂)F (left) or F(a⊗I_k̂) (right).
pub fn hp_generator(f: &Operator, side: Side, d_k: usize) -> Result<Generator> {
    let dkh = d_k + 1;
    if !f.is_square() || !f.rows().is_multiple_of(dkh) {
        return dim_err(format!("F must be square with dimension divisible by {dkh}"));
    }
    let d_h = f.rows() / dkh;
    let fac = [d_h, dkh];
    let f = f.clone().with_factors(&fac, &fac)?;
    let id = Operator::identity(&[dkh]);
    Ok(Generator::from_fn(d_h, d_k, |a| {
        let amp = kron(a, &id);
        match side {
            Side::Left => &amp * &f,
            Side::Right => &f * &amp,
        }
    }))
}

/// The scalar example walk generator: φ(1) = [[1, √h], [√h, 1+c]].
pub fn example7_walk(c: f64, h: f64) -> Generator {
    let s = h.sqrt();
    let m = Operator::from_real(&[&[1.0, s], &[s, 1.0 + c]]).with_factors(&[1, 2], &[1, 2]).unwrap();
    Generator::from_fn(1, 1, |a| m.scale(a.get(0, 0)))
}

/// The scalar example identity-adapted generator: θ(1) = [[0, 1], [1, c]].
pub fn example7_theta(c: f64) -> Generator {
    let m = Operator::from_real(&[&[0.0, 1.0], &[1.0, c]]).with_factors(&[1, 2], &[1, 2]).unwrap();
    Generator::from_fn(1, 1, |a| m.scale(a.get(0, 0)))
}

/// Data (g, π, r, w) of a bounded GKSL generator and its dilation.
#[derive(Clone, Debug, PartialEq)]
pub struct GKSLData {
    pub d_h: usize,
    pub d_k: usize,
    /// Hermitian d_h×d_h.
    pub g: Operator,
    /// Superoperator matrix of π: B(h) → B(h⊗k), shape (d_h·d_k)² × d_h².
    pub pi: Operator,
    /// d_h × (d_h·d_k), an element of B(h⊗k, h).
    pub r: Operator,
    /// (d_h·d_k) × (d_h·d_k) co-isometry.
    pub w: Operator,
}

/// The ampliation a ↦ a⊗I_k as a superoperator matrix.
pub fn ampliation(d_h: usize, d_k: usize) -> Operator {
    pi_conjugated(&Operator::identity(&[d_h, d_k]), d_h, d_k)
}

/// a ↦ u*(a⊗I_k)u for a unitary u on h⊗k.
pub fn pi_conjugated(u: &Operator, d_h: usize, d_k: usize) -> Operator {
    let id = Operator::identity(&[d_k]);
    let ud = u.adjoint();
    let big = d_h * d_k;
    let mut m = Operator::zeros(&[big * big], &[d_h * d_h]);
    for j in 0..d_h {
        for i in 0..d_h {
            let img = &(&ud * &kron(&Operator::unit(d_h, i, j), &id)) * u;
            for (r, z) in img.vec_col().into_iter().enumerate() {
                m.set(r, i + j * d_h, z);
            }
        }
    }
    m
}

impl GKSLData {
    pub fn new(g: Operator, pi: Operator, r: Operator, w: Operator) -> Result<Self> {
        let d_h = g.rows();
        if !g.is_square() || d_h == 0 {
            return Err(QrwError::InvalidData("g must be square".into()));
        }
        if r.rows() != d_h || !r.cols().is_multiple_of(d_h) || r.cols() == 0 {
            return Err(QrwError::InvalidData(format!("r must be {d_h} x (d_h·d_k), got {}x{}", r.rows(), r.cols())));
        }
        let d_k = r.cols() / d_h;
        let big = d_h * d_k;
        if pi.rows() != big * big || pi.cols() != d_h * d_h {
            return Err(QrwError::InvalidData(format!("pi must be {}x{}", big * big, d_h * d_h)));
        }
        if w.rows() != big || w.cols() != big {
            return Err(QrwError::InvalidData(format!("w must be {big}x{big}")));
        }
        let data = GKSLData {
            d_h,
            d_k,
            g: g.with_factors(&[d_h], &[d_h])?,
            pi: pi.with_factors(&[big * big], &[d_h * d_h])?,
            r: r.with_factors(&[d_h], &[d_h, d_k])?,
            w: w.with_factors(&[d_h, d_k], &[d_h, d_k])?,
        };
        Ok(data)
    }

    /// Checks the structural invariants to 1e-10.
    pub fn validate(&self) -> Result<()> {
        let tol = 1e-10;
        if self.g.max_abs_diff(&self.g.adjoint()) > tol {
            return Err(QrwError::InvalidData("g is not Hermitian".into()));
        }
        let big = self.d_h * self.d_k;
        if (&self.w * &self.w.adjoint()).max_abs_diff(&Operator::identity(&[self.d_h, self.d_k])) > tol {
            return Err(QrwError::InvalidData("w is not a co-isometry".into()));
        }
        let id = Operator::identity(&[self.d_h]);
        if self.pi_apply(&id).max_abs_diff(&Operator::identity(&[self.d_h, self.d_k])) > tol {
            return Err(QrwError::InvalidData("pi is not unital".into()));
        }
        for i in 0..self.d_h {
            for j in 0..self.d_h {
                let e = Operator::unit(self.d_h, i, j);
                let pe = self.pi_apply(&e);
                if self.pi_apply(&e.adjoint()).max_abs_diff(&pe.adjoint()) > tol {
                    return Err(QrwError::InvalidData("pi does not preserve adjoints".into()));
                }
                for k in 0..self.d_h {
                    for l in 0..self.d_h {
                        let f = Operator::unit(self.d_h, k, l);
                        let lhs = self.pi_apply(&(&e * &f));
                        let rhs = &pe * &self.pi_apply(&f);
                        if lhs.max_abs_diff(&rhs) > tol {
                            return Err(QrwError::InvalidData("pi is not multiplicative".into()));
                        }
                    }
                }
            }
        }
        debug_assert_eq!(self.w.rows(), big);
        Ok(())
    }

    pub fn pi_apply(&self, a: &Operator) -> Operator {
        let v = self.pi.apply(&a.vec_col()).expect("dims");
        let f = [self.d_h, self.d_k];
        Operator::from_vec_col(&v, &f, &f).expect("dims")
    }

    /// π̂(a) = diag(a, π(a)) on h ⊕ (h⊗k), in direct-sum layout.
    fn pi_hat_direct(&self, a: &Operator) -> Operator {
        direct_sum(a, &self.pi_apply(a))
    }
}

/// L(a) = i[a,g] − ½{a, rr*} + r π(a) r*.
pub fn gkls_apply(data: &GKSLData, a: &Operator) -> Result<Operator> {
    if a.rows() != data.d_h || a.cols() != data.d_h {
        return dim_err("gkls_apply expects a d_h x d_h operator");
    }
    let a = a.clone().with_factors(&[data.d_h], &[data.d_h])?;
    let rr = &data.r * &data.r.adjoint();
    let comm = &(&a * &data.g) - &(&data.g * &a);
    let anti = &(&a * &rr) + &(&rr * &a);
    let jump = &(&data.r * &data.pi_apply(&a)) * &data.r.adjoint();
    Ok(&(&comm.scale(I) - &anti.scale_re(0.5)) + &jump)
}

/// The GKSL map L as a superoperator.
pub fn gkls_superop(data: &GKSLData) -> SuperOp {
    SuperOp::from_fn(data.d_h, |a| gkls_apply(data, a).expect("dims"))
}

fn direct_sum(p: &Operator, s: &Operator) -> Operator {
    let (n1, n2) = (p.rows(), s.rows());
    Operator::from_fn(&[n1 + n2], &[n1 + n2], |i, j| match (i < n1, j < n1) {
        (true, true) => p.get(i, j),
        (false, false) => s.get(i - n1, j - n1),
        _ => ZERO,
    })
}

/// Assembles [[p, q], [r, s]] on h ⊕ (h⊗k) in direct-sum layout.
fn direct_blocks(p: &Operator, q: &Operator, r: &Operator, s: &Operator) -> Operator {
    let (n1, n2) = (p.rows(), s.rows());
    Operator::from_fn(&[n1 + n2], &[n1 + n2], |i, j| match (i < n1, j < n1) {
        (true, true) => p.get(i, j),
        (true, false) => q.get(i, j - n1),
        (false, true) => r.get(i - n1, j),
        (false, false) => s.get(i - n1, j - n1),
    })
}

/// Position in the direct-sum layout h ⊕ (h⊗k) of Kronecker index (i, s) of h⊗k̂.
fn direct_index(d_k: usize, d_h: usize, kron_idx: usize) -> usize {
    let dkh = d_k + 1;
    let (i, s) = (kron_idx / dkh, kron_idx % dkh);
    if s == 0 {
        i
    } else {
        d_h + i * d_k + (s - 1)
    }
}

/// Reorders an operator on h ⊕ (h⊗k) into the Kronecker layout of h⊗k̂.
pub fn from_direct_sum(m: &Operator, d_h: usize, d_k: usize) -> Operator {
    let f = [d_h, d_k + 1];
    Operator::from_fn(&f, &f, |r, c| m.get(direct_index(d_k, d_h, r), direct_index(d_k, d_h, c)))
}

/// Splits T on h⊗k̂ into its blocks [[p, q], [r, s]] over k̂ = ℂ⊕k.
pub fn khat_blocks(t: &Operator, d_h: usize, d_k: usize) -> [Operator; 4] {
    let big = d_h * (d_k + 1);
    let mut direct = Operator::zeros(&[big], &[big]);
    for r in 0..big {
        for c in 0..big {
            direct.set(direct_index(d_k, d_h, r), direct_index(d_k, d_h, c), t.get(r, c));
        }
    }
    let n2 = d_h * d_k;
    let sub = |r0: usize, c0: usize, nr: usize, nc: usize| Operator::from_fn(&[nr], &[nc], |i, j| direct.get(r0 + i, c0 + j));
    [sub(0, 0, d_h, d_h), sub(0, d_h, d_h, n2), sub(d_h, 0, n2, d_h), sub(d_h, d_h, n2, n2)]
}

/// Assembles T on h⊗k̂ from its blocks over k̂ = ℂ⊕k.
pub fn from_khat_blocks(p: &Operator, q: &Operator, r: &Operator, s: &Operator, d_h: usize, d_k: usize) -> Operator {
    from_direct_sum(&direct_blocks(p, q, r, s), d_h, d_k)
}

/// ψ(a) = B*π̂(a)B + A*π̂(a)C + C*π̂(a)A.
pub fn homgen(data: &GKSLData) -> Generator {
    let (d_h, d_k) = (data.d_h, data.d_k);
    let n2 = d_h * d_k;
    let z11 = Operator::zeros(&[d_h], &[d_h]);
    let z12 = Operator::zeros(&[d_h], &[n2]);
    let z21 = Operator::zeros(&[n2], &[d_h]);
    let z22 = Operator::zeros(&[n2], &[n2]);
    let rr = &data.r * &data.r.adjoint();
    let a_op = direct_blocks(&Operator::identity(&[d_h]), &z12, &z21, &z22);
    let b_op = direct_blocks(&z11, &z12, &data.r.adjoint(), &data.w);
    let c_top = &data.g.scale(I) - &rr.scale_re(0.5);
    let c_op = direct_blocks(&c_top, &(-&(&data.r * &data.w)), &z21, &z22);
    let (ad, bd, cd) = (a_op.adjoint(), b_op.adjoint(), c_op.adjoint());
    Generator::from_fn(d_h, d_k, |a| {
        let ph = data.pi_hat_direct(a);
        let m = &(&(&(&bd * &ph) * &b_op) + &(&(&ad * &ph) * &c_op)) + &(&(&cd * &ph) * &a_op);
        from_direct_sum(&m, d_h, d_k)
    })
}

/// ψ in the explicit 2×2 block form
/// [[L(a), rπ(a)w − a r w], [w*π(a)r* − w*r*a, w*π(a)w]].
pub fn homgen_blocks(data: &GKSLData) -> Generator {
    let (d_h, d_k) = (data.d_h, data.d_k);
    let (r, w) = (&data.r, &data.w);
    let (rd, wd) = (r.adjoint(), w.adjoint());
    Generator::from_fn(d_h, d_k, |a| {
        let a = a.clone().with_factors(&[d_h], &[d_h]).unwrap();
        let pa = data.pi_apply(&a);
        let p = gkls_apply(data, &a).unwrap();
        let q = &(&(r * &pa) * w) - &(&(&a * r) * w);
        let rb = &(&(&wd * &pa) * &rd) - &(&(&wd * &rd) * &a);
        let s = &(&wd * &pa) * w;
        from_khat_blocks(&p, &q, &rb, &s, d_h, d_k)
    })
}

/// φ_h(a) = V_h* U_h* π̂(a) U_h V_h with U_h = e^{√h R}, R = [[0, −r], [r*, 0]],
/// V_h = diag(e^{ihg}, w e^{ih g⊗I_k}).
pub fn repeated_interaction(data: &GKSLData, h: f64) -> Result<Generator> {
    data.validate()?;
    let (d_h, d_k) = (data.d_h, data.d_k);
    let n2 = d_h * d_k;
    let big = d_h + n2;
    let rmat = direct_blocks(
        &Operator::zeros(&[d_h], &[d_h]),
        &(-&data.r),
        &data.r.adjoint(),
        &Operator::zeros(&[n2], &[n2]),
    );
    let u = expm(&rmat.scale_re(h.sqrt()), RI_EXPM_TOL)?;
    let eg = expm(&data.g.scale(C64::new(0.0, h)), RI_EXPM_TOL)?;
    let egk = kron(&eg, &Operator::identity(&[d_k]));
    let v = direct_sum(&eg, &(&data.w * &egk));
    let wmat = &u * &v;
    let wd = wmat.adjoint();
    debug_assert_eq!(wmat.rows(), big);
    Ok(Generator::from_fn(d_h, d_k, |a| {
        let m = &(&wd * &data.pi_hat_direct(a)) * &wmat;
        from_direct_sum(&m, d_h, d_k)
    }))
}

/// Scalar helper: C64 from a real.
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// The unit of the scalar example algebra.
pub fn scalar_one() -> Operator {
    Operator::scalar(ONE)
}
