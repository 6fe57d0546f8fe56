//! Matrix elements of quantum random walks embedded in toy Fock space.
//!
//! D_h sends u ε(f) to u ⊗ f̂(0;h) ⊗ f̂(1;h) ⊗ …, slot n carrying the
//! hat-lifted mean of f over [nh, (n+1)h). Elements are evaluated by
//! compressing one slot at a time, latest slot first, so that only
//! d_h×d_h operators are ever stored.

use crate::error::{dim_err, Result};
use crate::generators::{compress_gen, scale, vacuum_deficit, walk_power, Budget, Generator};
use crate::linops::{inner, kron_vec, norm, KhatBasis, Operator, C64, ONE};
use crate::signals::{active_cells, discretize, grid_index, StepFunction};

/// The label (u, f) of the vector u ε(f).
#[derive(Clone, Debug, PartialEq)]
pub struct ExpVectorLabel {
    pub u: Vec<C64>,
    pub f: StepFunction,
}

impl ExpVectorLabel {
    pub fn new(u: Vec<C64>, f: StepFunction) -> Self {
        ExpVectorLabel { u, f }
    }

    /// ‖u ε(f)‖ = ‖u‖ e^{‖f‖²/2}.
    pub fn norm(&self) -> f64 {
        norm(&self.u) * (0.5 * self.f.norm_sq(0.0, f64::INFINITY)).exp()
    }
}

/// Toy-space geometry: step size and number of slots that see the test data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToyEmbedding {
    pub h: f64,
    pub n_active: usize,
}

impl ToyEmbedding {
    pub fn for_functions(h: f64, fs: &[&StepFunction]) -> Self {
        let n_active = fs.iter().map(|f| active_cells(f, h)).max().unwrap_or(0);
        ToyEmbedding { h, n_active }
    }

    /// f̂(n;h) = (1, f(n;h)).
    pub fn slot_vector(&self, f: &StepFunction, n: usize) -> Vec<C64> {
        KhatBasis::new(f.d_k()).hat(&discretize(f, self.h, n))
    }
}

fn check_labels(phi: &Generator, bra: &ExpVectorLabel, ket: &ExpVectorLabel) -> Result<()> {
    if bra.u.len() != phi.d_h() || ket.u.len() != phi.d_h() {
        return dim_err(format!("test vectors must have length d_h = {}", phi.d_h()));
    }
    if bra.f.d_k() != phi.d_k() || ket.f.d_k() != phi.d_k() {
        return dim_err(format!("test functions must be C^{}-valued", phi.d_k()));
    }
    Ok(())
}

/// E^{ĝ(0)}⋯ compression of φ^{(n)}(a): the composition
/// φ^{ĝ_0}_{f̂_0} ∘ ⋯ ∘ φ^{ĝ_{n-1}}_{f̂_{n-1}} applied to a.
pub fn walk_head(phi: &Generator, h: f64, n: usize, a: &Operator, g: &StepFunction, f: &StepFunction) -> Result<Operator> {
    let emb = ToyEmbedding { h, n_active: n };
    let mut b = a.clone();
    for k in (0..n).rev() {
        let step = compress_gen(phi, &emb.slot_vector(g, k), &emb.slot_vector(f, k))?;
        b = step.apply(&b)?;
    }
    Ok(b)
}

/// ⟨v ε(g), J^{φ,h}_t(a) u ε(f)⟩ for the vacuum-embedded walk.
pub fn walk_element_vacuum(
    phi: &Generator,
    h: f64,
    t: f64,
    a: &Operator,
    bra: &ExpVectorLabel,
    ket: &ExpVectorLabel,
) -> Result<C64> {
    check_labels(phi, bra, ket)?;
    let n = grid_index(t, h);
    let head = walk_head(phi, h, n, a, &bra.f, &ket.f)?;
    // Slots beyond n carry Δ⊥ and ⟨x̂, Δ⊥ ŷ⟩ = 1·1.
    head.sandwich(&bra.u, &ket.u)
}

/// ∏_{m≥n} (1 + ⟨g(m;h), f(m;h)⟩) = ∏_{m≥n} ⟨ĝ(m;h), f̂(m;h)⟩, finite by compact support.
pub fn identity_tail(h: f64, n: usize, g: &StepFunction, f: &StepFunction) -> C64 {
    let end = active_cells(g, h).min(active_cells(f, h));
    (n..end).map(|m| ONE + inner(&discretize(g, h, m), &discretize(f, h, m))).product()
}

/// ⟨v ε(g), K^{φ,h}_t(a) u ε(f)⟩ for the identity-embedded walk.
pub fn walk_element_identity(
    phi: &Generator,
    h: f64,
    t: f64,
    a: &Operator,
    bra: &ExpVectorLabel,
    ket: &ExpVectorLabel,
) -> Result<C64> {
    check_labels(phi, bra, ket)?;
    let n = grid_index(t, h);
    let head = walk_head(phi, h, n, a, &bra.f, &ket.f)?;
    Ok(head.sandwich(&bra.u, &ket.u)? * identity_tail(h, n, &bra.f, &ket.f))
}

fn product_vector(u: &[C64], slots: &[Vec<C64>]) -> Vec<C64> {
    slots.iter().fold(u.to_vec(), |acc, y| kron_vec(&acc, y))
}

/// Vacuum walk element by contracting the materialized φ^{(n)}(a).
pub fn walk_element_vacuum_materialized(
    phi: &Generator,
    h: f64,
    t: f64,
    a: &Operator,
    bra: &ExpVectorLabel,
    ket: &ExpVectorLabel,
    budget: Budget,
) -> Result<C64> {
    check_labels(phi, bra, ket)?;
    let n = grid_index(t, h);
    let big = walk_power(phi, n, a, budget)?;
    let emb = ToyEmbedding { h, n_active: n };
    let gs: Vec<_> = (0..n).map(|k| emb.slot_vector(&bra.f, k)).collect();
    let fs: Vec<_> = (0..n).map(|k| emb.slot_vector(&ket.f, k)).collect();
    big.sandwich(&product_vector(&bra.u, &gs), &product_vector(&ket.u, &fs))
}

/// ‖φ^{(n)}(a)(u ⊗ f̂(0;h) ⊗ ⋯ ⊗ f̂(n−1;h))‖ with n = ⌊t/h⌋.
///
/// The squared norm is a Hermitian form in vec(a); it is carried slot by
/// slot as G ↦ Σ_s C_s* G C_s with C_s = φ^{e_s}_{f̂_k}, starting from
/// G_0(b, b') = ⟨bu, b'u⟩.
pub fn walk_vector_norm(phi: &Generator, h: f64, t: f64, a: &Operator, ket: &ExpVectorLabel) -> Result<f64> {
    check_labels(phi, ket, ket)?;
    let d = phi.d_h();
    let n = grid_index(t, h);
    let emb = ToyEmbedding { h, n_active: n };
    let kb = phi.khat();
    let u = &ket.u;
    let mut gram = Operator::from_fn(&[d * d], &[d * d], |al, be| {
        let (i, j) = (al % d, al / d);
        let (i2, j2) = (be % d, be / d);
        if i == i2 {
            u[j].conj() * u[j2]
        } else {
            C64::new(0.0, 0.0)
        }
    });
    for k in 0..n {
        let y = emb.slot_vector(&ket.f, k);
        let mut next = Operator::zeros(&[d * d], &[d * d]);
        for s in 0..kb.d_khat() {
            let c = compress_gen(phi, &kb.basis(s), &y)?;
            let cm = c.matrix();
            next = &next + &(&(&cm.adjoint() * &gram) * cm);
        }
        gram = next;
    }
    let v = a.vec_col();
    Ok(gram.sandwich(&v, &v)?.re.max(0.0).sqrt())
}

/// Norm of K^{φ,h}_t(a) u ε(f): the head norm times ∏_{m≥n} ‖f̂(m;h)‖.
pub fn walk_vector_norm_identity(phi: &Generator, h: f64, t: f64, a: &Operator, ket: &ExpVectorLabel) -> Result<f64> {
    let head = walk_vector_norm(phi, h, t, a, ket)?;
    let n = grid_index(t, h);
    let tail: f64 = (n..active_cells(&ket.f, h))
        .map(|m| (1.0 + norm(&discretize(&ket.f, h, m)).powi(2)).sqrt())
        .product();
    Ok(head * tail)
}

/// Walk-vector norm through the materialized φ^{(n)}(a).
pub fn walk_vector_norm_materialized(
    phi: &Generator,
    h: f64,
    t: f64,
    a: &Operator,
    ket: &ExpVectorLabel,
    budget: Budget,
) -> Result<f64> {
    check_labels(phi, ket, ket)?;
    let n = grid_index(t, h);
    let big = walk_power(phi, n, a, budget)?;
    let emb = ToyEmbedding { h, n_active: n };
    let fs: Vec<_> = (0..n).map(|k| emb.slot_vector(&ket.f, k)).collect();
    Ok(norm(&big.apply(&product_vector(&ket.u, &fs))?))
}

/// Visits strictly increasing m-tuples of {0..n-1} in lexicographic order.
pub fn for_each_increasing(n: usize, m: usize, mut visit: impl FnMut(&[usize])) {
    if m > n {
        return;
    }
    let mut p: Vec<usize> = (0..m).collect();
    loop {
        visit(&p);
        let mut i = m;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if p[i] < n - m + i {
                p[i] += 1;
                for j in i + 1..m {
                    p[j] = p[j - 1] + 1;
                }
                break;
            }
        }
        if m == 0 {
            return;
        }
    }
}

/// Σ over increasing p with (p_m + 1)h ≤ t of the contraction of s_{1/h}(X)
/// against ĝ(p_i;h) (bra) and f̂(p_i;h) (ket) at the legs, ω elsewhere.
pub fn discrete_iterated_integral(
    x: &Operator,
    m: usize,
    h: f64,
    t: f64,
    bra: &ExpVectorLabel,
    ket: &ExpVectorLabel,
) -> Result<C64> {
    let d_h = bra.u.len();
    let d_k = bra.f.d_k();
    let kb = KhatBasis::new(d_k);
    let mut want = vec![d_h];
    want.extend(std::iter::repeat_n(kb.d_khat(), m));
    if x.row_factors() != want.as_slice() || x.col_factors() != want.as_slice() {
        return dim_err(format!("X must have factors {:?}, got {:?}", want, x.row_factors()));
    }
    if m == 0 {
        return x.sandwich(&bra.u, &ket.u);
    }
    let n = grid_index(t, h);
    let rt = h.sqrt();
    // Ξ_{1/h} x̂ = (√h, x).
    let leg = |f: &StepFunction, k: usize| -> Vec<C64> {
        let mut v = kb.hat(&discretize(f, h, k));
        v[0] *= rt;
        v
    };
    let gl: Vec<_> = (0..n).map(|k| leg(&bra.f, k)).collect();
    let fl: Vec<_> = (0..n).map(|k| leg(&ket.f, k)).collect();
    let mut acc = C64::new(0.0, 0.0);
    let mut err = None;
    for_each_increasing(n, m, |p| {
        let bv = p.iter().fold(bra.u.clone(), |v, &k| kron_vec(&v, &gl[k]));
        let kv = p.iter().fold(ket.u.clone(), |v, &k| kron_vec(&v, &fl[k]));
        match x.sandwich(&bv, &kv) {
            Ok(z) => acc += z,
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(acc),
    }
}

/// |J_{nh} element − Σ_m discrete integral of s_h(φ♭)^{(m)}(a)|.
pub fn decomposition_residual(
    phi: &Generator,
    h: f64,
    n: usize,
    a: &Operator,
    bra: &ExpVectorLabel,
    ket: &ExpVectorLabel,
    budget: Budget,
) -> Result<f64> {
    budget.check(phi.d_h(), phi.d_khat(), n)?;
    let t = n as f64 * h;
    let lhs = walk_element_vacuum(phi, h, t, a, bra, ket)?;
    let zeta = scale(&vacuum_deficit(phi), h);
    let mut rhs = C64::new(0.0, 0.0);
    for m in 0..=n {
        let x = walk_power(&zeta, m, a, budget)?;
        rhs += discrete_iterated_integral(&x, m, h, t, bra, ket)?;
    }
    Ok((lhs - rhs).norm())
}

/// e^{‖f‖²} − ∏_m (1 + ‖f(m;h)‖²) = ‖ε(f)‖² − ‖D_h ε(f)‖².
pub fn embedding_defect(f: &StepFunction, h: f64) -> f64 {
    let full = f.norm_sq(0.0, f64::INFINITY).exp();
    let toy: f64 = (0..active_cells(f, h)).map(|m| 1.0 + norm(&discretize(f, h, m)).powi(2)).product();
    full - toy
}
