//! Limit objects: vacuum cocycles through their semigroup decomposition on
//! step functions, identity-adapted cocycles through the Δ switch, exact
//! simplex integrals, the chaos series and its tail bound.
//!
//! For step f, g the compression a ↦ E^{vε(g)} j_t(a) E_{uε(f)} factors over
//! the common cell grid τ_0 < ⋯ < τ_K = t as
//! exp(ℓ_0 ψ^{ĝ_0}_{f̂_0}) ∘ ⋯ ∘ exp(ℓ_{K−1} ψ^{ĝ_{K−1}}_{f̂_{K−1}}),
//! earliest cell outermost.

use crate::error::{dim_err, QrwError, Result};
use crate::generators::{add_delta, compress_gen, Generator};
use crate::linops::{inner, kron_vec, norm, KhatBasis, Operator, SuperOp, C64, EXPM_TOL, ZERO};
use crate::signals::{common_grid, factorial, l2_inner, StepFunction};
use crate::toywalk::ExpVectorLabel;

/// Default tolerance for bound-selected truncation.
pub const DEFAULT_SERIES_TOL: f64 = 1e-8;
/// Default cap on the truncation order.
pub const DEFAULT_SERIES_CAP: usize = 12;

/// Cells [τ_k, τ_{k+1}) of the refined grid on [0, t) with their lengths
/// and the hat-lifted values of g (bra) and f (ket).
#[derive(Clone, Debug)]
pub struct CellGrid {
    pub cells: Vec<(f64, f64)>,
    pub g_hat: Vec<Vec<C64>>,
    pub f_hat: Vec<Vec<C64>>,
}

impl CellGrid {
    pub fn new(t: f64, g: &StepFunction, f: &StepFunction) -> Self {
        let grid = common_grid(&[g, f], t);
        let kb = KhatBasis::new(f.d_k());
        let cells: Vec<(f64, f64)> = grid.windows(2).map(|w| (w[0], w[1])).collect();
        let g_hat = cells.iter().map(|c| kb.hat(&g.eval(c.0))).collect();
        let f_hat = cells.iter().map(|c| kb.hat(&f.eval(c.0))).collect();
        CellGrid { cells, g_hat, f_hat }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn length(&self, k: usize) -> f64 {
        self.cells[k].1 - self.cells[k].0
    }
}

fn check_labels(psi: &Generator, bra: &ExpVectorLabel, ket: &ExpVectorLabel) -> Result<()> {
    if bra.u.len() != psi.d_h() || ket.u.len() != psi.d_h() {
        return dim_err(format!("test vectors must have length d_h = {}", psi.d_h()));
    }
    if bra.f.d_k() != psi.d_k() || ket.f.d_k() != psi.d_k() {
        return dim_err(format!("test functions must be C^{}-valued", psi.d_k()));
    }
    Ok(())
}

/// The superoperator a ↦ E^{ε(g)} j_t(a) E_{ε(f)} on B(h).
pub fn semigroup_superop(psi: &Generator, t: f64, g: &StepFunction, f: &StepFunction) -> Result<SuperOp> {
    let grid = CellGrid::new(t, g, f);
    let mut acc = SuperOp::identity(psi.d_h());
    for k in 0..grid.len() {
        let gen = compress_gen(psi, &grid.g_hat[k], &grid.f_hat[k])?;
        acc = acc.compose(&gen.exp(grid.length(k), EXPM_TOL));
    }
    Ok(acc)
}

/// ⟨v ε(g), j^ψ_t(a) u ε(f)⟩ for the vacuum-adapted cocycle.
pub fn semigroup_element_vacuum(psi: &Generator, t: f64, a: &Operator, bra: &ExpVectorLabel, ket: &ExpVectorLabel) -> Result<C64> {
    check_labels(psi, bra, ket)?;
    let grid = CellGrid::new(t, &bra.f, &ket.f);
    // Apply latest cell first: d_h×d_h work per cell instead of composing superoperators.
    let mut b = a.clone();
    for k in (0..grid.len()).rev() {
        let gen = compress_gen(psi, &grid.g_hat[k], &grid.f_hat[k])?;
        b = gen.exp(grid.length(k), EXPM_TOL).apply(&b)?;
    }
    b.sandwich(&bra.u, &ket.u)
}

/// ⟨v ε(g), k^θ_t(a) u ε(f)⟩ for the identity-adapted cocycle with generator θ.
pub fn qs_element(theta: &Generator, t: f64, a: &Operator, bra: &ExpVectorLabel, ket: &ExpVectorLabel) -> Result<C64> {
    let head = semigroup_element_vacuum(&add_delta(theta), t, a, bra, ket)?;
    Ok(head * l2_inner(&bra.f, &ket.f, t, f64::INFINITY).exp())
}

/// T_t(a) = exp(t ψ^ω_ω)(a).
pub fn cpc_semigroup(psi: &Generator, t: f64, a: &Operator) -> Result<Operator> {
    let om = psi.khat().omega();
    compress_gen(psi, &om, &om)?.exp(t, EXPM_TOL).apply(a)
}

fn check_order(x: &Operator, m: usize, d_h: usize, d_k: usize) -> Result<()> {
    let mut want = vec![d_h];
    want.extend(std::iter::repeat_n(d_k + 1, m));
    if x.row_factors() != want.as_slice() || x.col_factors() != want.as_slice() {
        return dim_err(format!("X must have factors {:?}, got {:?}", want, x.row_factors()));
    }
    Ok(())
}

/// Visits nondecreasing m-tuples of {0..n-1} in lexicographic order.
pub fn for_each_nondecreasing(n: usize, m: usize, mut visit: impl FnMut(&[usize])) {
    if m == 0 {
        visit(&[]);
        return;
    }
    if n == 0 {
        return;
    }
    let mut p = vec![0usize; m];
    loop {
        visit(&p);
        let mut i = m;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if p[i] < n - 1 {
                p[i] += 1;
                for j in i + 1..m {
                    p[j] = p[i];
                }
                break;
            }
        }
    }
}

/// Lebesgue measure of {t_1 < ⋯ < t_m : t_i ∈ cell k_i} for nondecreasing k:
/// a cell holding r of the times contributes ℓ^r / r!.
fn ordered_cell_measure(k: &[usize], len: impl Fn(usize) -> f64) -> f64 {
    let mut w = 1.0;
    let mut i = 0;
    while i < k.len() {
        let mut j = i;
        while j < k.len() && k[j] == k[i] {
            j += 1;
        }
        let r = j - i;
        w *= len(k[i]).powi(r as i32) / factorial(r);
        i = j;
    }
    w
}

/// ∫_{Δ_m(t)} ⟨v ⊗ ĝ(t_1) ⊗ ⋯ ⊗ ĝ(t_m), X (u ⊗ f̂(t_1) ⊗ ⋯ ⊗ f̂(t_m))⟩ dt.
pub fn qs_integral_element(x: &Operator, m: usize, t: f64, bra: &ExpVectorLabel, ket: &ExpVectorLabel) -> Result<C64> {
    check_order(x, m, bra.u.len(), bra.f.d_k())?;
    let grid = CellGrid::new(t, &bra.f, &ket.f);
    let mut acc = ZERO;
    let mut err = None;
    for_each_nondecreasing(grid.len(), m, |k| {
        let w = ordered_cell_measure(k, |c| grid.length(c));
        let bv = k.iter().fold(bra.u.clone(), |v, &c| kron_vec(&v, &grid.g_hat[c]));
        let kv = k.iter().fold(ket.u.clone(), |v, &c| kron_vec(&v, &grid.f_hat[c]));
        match x.sandwich(&bv, &kv) {
            Ok(z) => acc += z * w,
            Err(e) => err = Some(e),
        }
    });
    err.map_or(Ok(acc), Err)
}

/// The same integral over the box region Δ^h_m(t), with P_(h)f in place of
/// f in the legs.
pub fn modified_integral_element(x: &Operator, m: usize, h: f64, t: f64, bra: &ExpVectorLabel, ket: &ExpVectorLabel) -> Result<C64> {
    check_order(x, m, bra.u.len(), bra.f.d_k())?;
    if m == 0 {
        return x.sandwich(&bra.u, &ket.u);
    }
    let n = crate::signals::grid_index(t, h);
    let kb = KhatBasis::new(bra.f.d_k());
    // ∫_box ĝ(s) ds = (h, ∫_box g) and P_(h)f is the box mean of f.
    let box_g: Vec<Vec<C64>> = (0..n)
        .map(|p| {
            let (a, b) = (p as f64 * h, (p + 1) as f64 * h);
            let mut v = vec![C64::new(h, 0.0)];
            v.extend(bra.f.integral(a, b));
            v
        })
        .collect();
    let mean_f: Vec<Vec<C64>> = (0..n)
        .map(|p| {
            let (a, b) = (p as f64 * h, (p + 1) as f64 * h);
            kb.hat(&ket.f.integral(a, b).into_iter().map(|z| z / h).collect::<Vec<_>>())
        })
        .collect();
    let mut acc = ZERO;
    let mut err = None;
    crate::toywalk::for_each_increasing(n, m, |p| {
        let bv = p.iter().fold(bra.u.clone(), |v, &c| kron_vec(&v, &box_g[c]));
        let kv = p.iter().fold(ket.u.clone(), |v, &c| kron_vec(&v, &mean_f[c]));
        match x.sandwich(&bv, &kv) {
            Ok(z) => acc += z,
            Err(e) => err = Some(e),
        }
    });
    err.map_or(Ok(acc), Err)
}

/// Bound on the m-th chaos term of a matrix element:
/// prefactor · c_t^m ‖ψ‖^m ‖1_{[0,t)} f̂‖^m / √m!, with c_t = √(2 max{t, 1}).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailBound {
    pub m: usize,
    pub t: f64,
    pub c_t: f64,
    pub gen_norm: f64,
    pub f_norm: f64,
    /// ‖v‖ e^{‖1_{[0,t)}g‖²/2} ‖a‖ ‖u‖.
    pub prefactor: f64,
}

impl TailBound {
    pub fn new(m: usize, t: f64, gen_norm: f64, f_norm: f64, prefactor: f64) -> Self {
        TailBound { m, t, c_t: (2.0 * t.max(1.0)).sqrt(), gen_norm, f_norm, prefactor }
    }

    /// Bound data for the series of ⟨vε(g), j^ψ_t(a) uε(f)⟩.
    pub fn for_element(psi: &Generator, t: f64, a: &Operator, bra: &ExpVectorLabel, ket: &ExpVectorLabel, m: usize) -> Self {
        let f_norm = (t + ket.f.norm_sq(0.0, t)).sqrt();
        let prefactor = norm(&bra.u) * (0.5 * bra.f.norm_sq(0.0, t)).exp() * a.op_norm() * norm(&ket.u);
        TailBound::new(m, t, psi.khat_norm(), f_norm, prefactor)
    }

    fn ln_term(&self, k: usize) -> f64 {
        let x = self.c_t * self.gen_norm * self.f_norm;
        if x == 0.0 {
            return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
        }
        k as f64 * x.ln() - 0.5 * ln_factorial(k)
    }

    /// c_t^m ‖ψ‖^m ‖1_{[0,t)} f̂‖^m / √m!.
    pub fn value(&self) -> f64 {
        self.ln_term(self.m).exp()
    }

    /// prefactor · Σ_{k>m} c_t^k ‖ψ‖^k ‖1_{[0,t)} f̂‖^k / √k!.
    pub fn remainder(&self) -> f64 {
        if self.prefactor == 0.0 {
            return 0.0;
        }
        let x = self.c_t * self.gen_norm * self.f_norm;
        if x == 0.0 {
            return 0.0;
        }
        // Terms peak near k ≈ x² and then fall off faster than geometrically.
        let peak = (x * x).ceil() as usize;
        let mut sum = 0.0;
        let mut k = self.m + 1;
        loop {
            let term = (self.ln_term(k) + self.prefactor.ln()).exp();
            sum += term;
            if (k > peak && term <= sum * 1e-18) || !sum.is_finite() || k > self.m + 100_000 {
                return sum;
            }
            k += 1;
        }
    }
}

fn ln_factorial(k: usize) -> f64 {
    (1..=k).map(|i| (i as f64).ln()).sum()
}

/// Truncation rule for the chaos series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Truncation {
    /// Sum orders 0..=M.
    Fixed(usize),
    /// Smallest M whose remainder bound is below `tol`, failing beyond `cap`.
    Tol { tol: f64, cap: usize },
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation::Tol { tol: DEFAULT_SERIES_TOL, cap: DEFAULT_SERIES_CAP }
    }
}

/// Orders 0..=m_max of the chaos series of ⟨vε(g), j^ψ_t(a) uε(f)⟩.
///
/// The m-th term is the degree-m part of the ordered product
/// ∏_k exp(ℓ_k L_k), L_k = ψ^{ĝ_k}_{f̂_k}, obtained cell by cell from the
/// latest: Q_k[m] = Σ_r (ℓ_k L_k)^r / r! · Q_{k+1}[m − r].
pub fn chaos_series_terms(psi: &Generator, t: f64, a: &Operator, bra: &ExpVectorLabel, ket: &ExpVectorLabel, m_max: usize) -> Result<Vec<C64>> {
    check_labels(psi, bra, ket)?;
    let grid = CellGrid::new(t, &bra.f, &ket.f);
    let d = psi.d_h();
    let mut q: Vec<Operator> = (0..=m_max)
        .map(|m| if m == 0 { a.clone() } else { Operator::zeros(&[d], &[d]) })
        .collect();
    for k in (0..grid.len()).rev() {
        let l = compress_gen(psi, &grid.g_hat[k], &grid.f_hat[k])?;
        let len = grid.length(k);
        let mut next = q.clone();
        for (j, src) in q.iter().enumerate() {
            // (ℓL)^r/r! q[j] feeds order j + r.
            let mut b = src.clone();
            for r in 1..=m_max - j {
                b = l.apply(&b)?.scale_re(len / r as f64);
                next[j + r] = &next[j + r] + &b;
            }
        }
        q = next;
    }
    q.iter().map(|b| b.sandwich(&bra.u, &ket.u)).collect()
}

/// Truncated chaos series of ⟨vε(g), j^ψ_t(a) uε(f)⟩ with the tail bound at
/// the chosen order.
pub fn chaos_series_element(
    psi: &Generator,
    t: f64,
    a: &Operator,
    bra: &ExpVectorLabel,
    ket: &ExpVectorLabel,
    trunc: Truncation,
) -> Result<(C64, TailBound)> {
    let m = match trunc {
        Truncation::Fixed(m) => m,
        Truncation::Tol { tol, cap } => {
            let mut m = 0;
            loop {
                let b = TailBound::for_element(psi, t, a, bra, ket, m);
                let tail = b.remainder();
                if tail < tol {
                    break m;
                }
                if m >= cap {
                    return Err(QrwError::TruncationCap { cap, tail, tol });
                }
                m += 1;
            }
        }
    };
    let terms = chaos_series_terms(psi, t, a, bra, ket, m)?;
    Ok((terms.iter().sum(), TailBound::for_element(psi, t, a, bra, ket, m)))
}

/// ‖j^ψ_t(a) u ε(f)‖ for the vacuum-adapted cocycle.
///
/// The squared norm is the Hermitian form vec(a)* G vec(a) where G evolves
/// over each cell by dG/ds = A*G + GA + Σ_j B_j* G B_j, with A = ψ^ω_{f̂}
/// and B_j = ψ^{e_j}_{f̂}; G_0(b, b') = ⟨bu, b'u⟩.
pub fn cocycle_vector_norm(psi: &Generator, t: f64, a: &Operator, ket: &ExpVectorLabel) -> Result<f64> {
    check_labels(psi, ket, ket)?;
    let d = psi.d_h();
    let d2 = d * d;
    let kb = psi.khat();
    let u = &ket.u;
    let mut gram = Operator::from_fn(&[d2], &[d2], |al, be| if al % d == be % d { u[al / d].conj() * u[be / d] } else { ZERO });
    let grid = CellGrid::new(t, &ket.f, &ket.f);
    for k in 0..grid.len() {
        let y = &grid.f_hat[k];
        let am = compress_gen(psi, &kb.omega(), y)?.matrix().clone();
        let bs: Vec<Operator> = (1..kb.d_khat())
            .map(|j| compress_gen(psi, &kb.basis(j), y).map(|s| s.matrix().clone()))
            .collect::<Result<_>>()?;
        let am_adj = am.adjoint();
        let gen = SuperOp::from_fn(d2, |e| {
            let mut out = &(&am_adj * e) + &(e * &am);
            for b in &bs {
                out = &out + &(&(&b.adjoint() * e) * b);
            }
            out
        });
        gram = gen.exp(grid.length(k), EXPM_TOL).apply(&gram)?;
    }
    let v = a.vec_col();
    Ok(gram.sandwich(&v, &v)?.re.max(0.0).sqrt())
}

/// ‖k^θ_t(a) u ε(f)‖ = ‖j^{θ+·⊗Δ}_t(a) u ε(1_{[0,t)}f)‖ · e^{‖1_{[t,∞)}f‖²/2}.
pub fn qs_vector_norm(theta: &Generator, t: f64, a: &Operator, ket: &ExpVectorLabel) -> Result<f64> {
    let head = cocycle_vector_norm(&add_delta(theta), t, a, ket)?;
    Ok(head * (0.5 * ket.f.norm_sq(t, f64::INFINITY)).exp())
}

/// ⟨ε(g), ε(f)⟩ paired with ⟨v, u⟩.
pub fn exp_label_inner(bra: &ExpVectorLabel, ket: &ExpVectorLabel) -> C64 {
    inner(&bra.u, &ket.u) * l2_inner(&bra.f, &ket.f, 0.0, f64::INFINITY).exp()
}
