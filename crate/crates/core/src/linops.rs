//! Dense complex linear algebra on tensor products of finite-dimensional spaces.
//!
//! Every [`Operator`] carries the factor dimensions of its row and column
//! spaces so that slot-indexed compressions stay unambiguous. Entries are
//! stored row-major; a row index over `d_0 ⊗ d_1 ⊗ …` is the usual
//! Kronecker (left factor most significant) index.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{dim_err, QrwError, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Default truncation tolerance for [`expm`].
pub const EXPM_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    rows: usize,
    cols: usize,
    row_factors: Vec<usize>,
    col_factors: Vec<usize>,
    data: Vec<C64>,
}

fn product(f: &[usize]) -> usize {
    f.iter().product()
}

impl Operator {
    pub fn zeros(row_factors: &[usize], col_factors: &[usize]) -> Self {
        let rows = product(row_factors);
        let cols = product(col_factors);
        Operator {
            rows,
            cols,
            row_factors: row_factors.to_vec(),
            col_factors: col_factors.to_vec(),
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(factors: &[usize]) -> Self {
        let mut out = Self::zeros(factors, factors);
        for i in 0..out.rows {
            out.data[i * out.cols + i] = ONE;
        }
        out
    }

    /// A 1×1 operator.
    pub fn scalar(z: C64) -> Self {
        Operator {
            rows: 1,
            cols: 1,
            row_factors: vec![1],
            col_factors: vec![1],
            data: vec![z],
        }
    }

    pub fn from_fn(
        row_factors: &[usize],
        col_factors: &[usize],
        f: impl Fn(usize, usize) -> C64,
    ) -> Self {
        let mut out = Self::zeros(row_factors, col_factors);
        for i in 0..out.rows {
            for j in 0..out.cols {
                out.data[i * out.cols + j] = f(i, j);
            }
        }
        out
    }

    pub fn from_data(row_factors: &[usize], col_factors: &[usize], data: Vec<C64>) -> Result<Self> {
        let rows = product(row_factors);
        let cols = product(col_factors);
        if data.len() != rows * cols {
            return dim_err(format!(
                "{} entries supplied for a {}x{} operator",
                data.len(),
                rows,
                cols
            ));
        }
        Ok(Operator {
            rows,
            cols,
            row_factors: row_factors.to_vec(),
            col_factors: col_factors.to_vec(),
            data,
        })
    }

    /// Builds a single-factor operator from nested rows.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return dim_err("ragged rows");
        }
        Self::from_data(&[r], &[c], rows.concat())
    }

    pub fn from_real(rows: &[&[f64]]) -> Self {
        let data: Vec<Vec<C64>> = rows
            .iter()
            .map(|row| row.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&data).expect("rectangular literal")
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        Self::from_fn(&[n], &[n], |i, j| if i == j { entries[i] } else { ZERO })
    }

    /// Relabels the factor structure without touching entries.
    pub fn with_factors(mut self, row_factors: &[usize], col_factors: &[usize]) -> Result<Self> {
        if product(row_factors) != self.rows || product(col_factors) != self.cols {
            return dim_err(format!(
                "factors {:?}x{:?} do not fit a {}x{} operator",
                row_factors, col_factors, self.rows, self.cols
            ));
        }
        self.row_factors = row_factors.to_vec();
        self.col_factors = col_factors.to_vec();
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn row_factors(&self) -> &[usize] {
        &self.row_factors
    }
    pub fn col_factors(&self) -> &[usize] {
        &self.col_factors
    }
    pub fn data(&self) -> &[C64] {
        &self.data
    }
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, z: C64) {
        self.data[i * self.cols + j] = z;
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        self.data.chunks(self.cols.max(1)).map(|c| c.to_vec()).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(&self.col_factors, &self.row_factors, |i, j| self.get(j, i).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(&self.col_factors, &self.row_factors, |i, j| self.get(j, i))
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|z| *z = f(*z));
        out
    }

    pub fn scale(&self, z: C64) -> Self {
        self.map(|w| w * z)
    }

    pub fn scale_re(&self, x: f64) -> Self {
        self.map(|w| w * x)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let mut out = self.clone();
        out.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a += b);
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let mut out = self.clone();
        out.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a -= b);
        Ok(out)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return dim_err(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            ));
        }
        let mut out = Self::zeros(&self.row_factors, &other.col_factors);
        let n = other.cols;
        for i in 0..self.rows {
            let orow = &mut out.data[i * n..(i + 1) * n];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return dim_err(format!(
                "shape {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            ));
        }
        Ok(())
    }

    pub fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.cols {
            return dim_err(format!("vector of length {} for {} columns", x.len(), self.cols));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    /// ⟨x, T y⟩, conjugate-linear in `x`.
    pub fn sandwich(&self, x: &[C64], y: &[C64]) -> Result<C64> {
        if x.len() != self.rows {
            return dim_err(format!("bra of length {} for {} rows", x.len(), self.rows));
        }
        let ty = self.apply(y)?;
        Ok(inner(x, &ty))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Largest entrywise modulus of `self − other`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Operator (spectral) norm by power iteration on T*T.
    pub fn op_norm(&self) -> f64 {
        op_norm(self)
    }

    /// Column-major vectorization: `vec(a)[i + j·rows] = a[i, j]`.
    pub fn vec_col(&self) -> Vec<C64> {
        let mut v = vec![ZERO; self.rows * self.cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                v[i + j * self.rows] = self.get(i, j);
            }
        }
        v
    }

    /// Inverse of [`Operator::vec_col`].
    pub fn from_vec_col(v: &[C64], row_factors: &[usize], col_factors: &[usize]) -> Result<Self> {
        let rows = product(row_factors);
        let cols = product(col_factors);
        if v.len() != rows * cols {
            return dim_err(format!("vector of length {} for {}x{}", v.len(), rows, cols));
        }
        Ok(Self::from_fn(row_factors, col_factors, |i, j| v[i + j * rows]))
    }

    /// The matrix unit `|i⟩⟨j|` on a `d`-dimensional space.
    pub fn unit(d: usize, i: usize, j: usize) -> Self {
        let mut e = Self::zeros(&[d], &[d]);
        e.set(i, j, ONE);
        e
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        self.try_add(rhs).expect("operator shapes must agree")
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        self.try_sub(rhs).expect("operator shapes must agree")
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.matmul(rhs).expect("inner dimensions must agree")
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.map(|z| -z)
    }
}

/// Kronecker product; factor lists are concatenated.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    let rf: Vec<usize> = a.row_factors.iter().chain(&b.row_factors).copied().collect();
    let cf: Vec<usize> = a.col_factors.iter().chain(&b.col_factors).copied().collect();
    let mut out = Operator::zeros(&rf, &cf);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let s = a.get(i, j);
            if s == ZERO {
                continue;
            }
            for p in 0..b.rows {
                let row = i * b.rows + p;
                for q in 0..b.cols {
                    out.data[row * out.cols + j * b.cols + q] = s * b.get(p, q);
                }
            }
        }
    }
    out
}

/// `E^x T E_y` over the trailing factor `K` of `T`'s row and column spaces.
pub fn compress(t: &Operator, x: &[C64], y: &[C64]) -> Result<Operator> {
    let (Some(&kr), Some(&kc)) = (t.row_factors.last(), t.col_factors.last()) else {
        return dim_err("operator has no tensor factors");
    };
    if kr != x.len() || kc != y.len() {
        return dim_err(format!(
            "trailing factors {}x{} vs vectors of length {} and {}",
            kr,
            kc,
            x.len(),
            y.len()
        ));
    }
    let rf = &t.row_factors[..t.row_factors.len() - 1];
    let cf = &t.col_factors[..t.col_factors.len() - 1];
    let (hr, hc) = (product(rf), product(cf));
    let mut out = Operator::zeros(
        if rf.is_empty() { &[1] } else { rf },
        if cf.is_empty() { &[1] } else { cf },
    );
    for i in 0..hr {
        for j in 0..hc {
            let mut acc = ZERO;
            for (p, xp) in x.iter().enumerate() {
                if *xp == ZERO {
                    continue;
                }
                let row = (i * kr + p) * t.cols;
                let s: C64 = y
                    .iter()
                    .enumerate()
                    .map(|(q, yq)| t.data[row + j * kc + q] * yq)
                    .sum();
                acc += xp.conj() * s;
            }
            out.data[i * hc + j] = acc;
        }
    }
    Ok(out)
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
pub fn expm(a: &Operator, tol: f64) -> Result<Operator> {
    if !a.is_square() {
        return Err(QrwError::NotSquare { rows: a.rows, cols: a.cols });
    }
    let norm = a.one_norm();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let b = a.scale_re(0.5f64.powi(squarings));
    // Squaring amplifies the Taylor remainder roughly by 2^s.
    let inner_tol = (tol * 0.5f64.powi(squarings)).max(f64::EPSILON * 1e-3);
    let mut result = Operator::identity(&a.row_factors).with_factors(&a.row_factors, &a.col_factors)?;
    let mut term = result.clone();
    for k in 1..=60 {
        term = (&term * &b).scale_re(1.0 / k as f64);
        result = &result + &term;
        if term.one_norm() <= inner_tol {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    Ok(result)
}

/// Spectral norm by power iteration on T*T, relative convergence 1e-10.
pub fn op_norm(t: &Operator) -> f64 {
    if t.data.iter().all(|z| *z == ZERO) {
        return 0.0;
    }
    // Fixed, generic start vector: deterministic and not orthogonal to anything structured.
    let mut x: Vec<C64> = (0..t.cols)
        .map(|i| {
            let a = ((i * 7919 + 13) % 101) as f64 / 101.0 + 0.5;
            let b = ((i * 104_729 + 7) % 97) as f64 / 97.0 - 0.5;
            C64::new(a, b)
        })
        .collect();
    normalize(&mut x);
    let adj = t.adjoint();
    let mut lambda = 0.0;
    for _ in 0..20_000 {
        let y = t.apply(&x).expect("shape");
        let next = y.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let mut z = adj.apply(&y).expect("shape");
        let zn = norm(&z);
        if zn == 0.0 {
            return next.sqrt();
        }
        z.iter_mut().for_each(|c| *c /= zn);
        x = z;
        if (next - lambda).abs() <= 1e-10 * next {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda.sqrt()
}

/// ⟨x, y⟩, conjugate-linear in `x`.
pub fn inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(x: &mut [C64]) {
    let n = norm(x);
    if n > 0.0 {
        x.iter_mut().for_each(|z| *z /= n);
    }
}

pub fn kron_vec(x: &[C64], y: &[C64]) -> Vec<C64> {
    x.iter().flat_map(|a| y.iter().map(move |b| a * b)).collect()
}

pub fn real_vec(x: &[f64]) -> Vec<C64> {
    x.iter().map(|&v| C64::new(v, 0.0)).collect()
}

/// The extended multiplicity space k̂ = ℂ ⊕ k with vacuum vector ω.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KhatBasis {
    pub d_k: usize,
}

impl KhatBasis {
    pub fn new(d_k: usize) -> Self {
        KhatBasis { d_k }
    }

    pub fn d_khat(&self) -> usize {
        self.d_k + 1
    }

    pub fn omega(&self) -> Vec<C64> {
        self.basis(0)
    }

    pub fn basis(&self, s: usize) -> Vec<C64> {
        let mut e = vec![ZERO; self.d_khat()];
        e[s] = ONE;
        e
    }

    /// x̂ = (1, x).
    pub fn hat(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.d_k, "hat-lift expects a vector in k");
        std::iter::once(ONE).chain(x.iter().copied()).collect()
    }

    /// Δ, the projection onto k.
    pub fn delta(&self) -> Operator {
        let mut d = Operator::identity(&[self.d_khat()]);
        d.set(0, 0, ZERO);
        d
    }

    /// Δ⊥ = |ω⟩⟨ω|.
    pub fn delta_perp(&self) -> Operator {
        Operator::unit(self.d_khat(), 0, 0)
    }

    /// Ξ_h = diag(h^{-1/2}, I_k).
    pub fn xi(&self, h: f64) -> Operator {
        let mut x = Operator::identity(&[self.d_khat()]);
        x.set(0, 0, C64::new(h.powf(-0.5), 0.0));
        x
    }
}

/// A linear map on B(ℂ^d), stored as the d²×d² matrix acting on
/// column-major vectorizations.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperOp {
    d: usize,
    mat: Operator,
}

impl SuperOp {
    pub fn identity(d: usize) -> Self {
        SuperOp { d, mat: Operator::identity(&[d * d]) }
    }

    pub fn zero(d: usize) -> Self {
        SuperOp { d, mat: Operator::zeros(&[d * d], &[d * d]) }
    }

    pub fn from_matrix(d: usize, mat: Operator) -> Result<Self> {
        if mat.rows != d * d || mat.cols != d * d {
            return dim_err(format!("superoperator on B(C^{d}) needs a {0}x{0} matrix", d * d));
        }
        let mat = mat.with_factors(&[d * d], &[d * d])?;
        Ok(SuperOp { d, mat })
    }

    /// Tabulates a linear map from its values on the matrix units.
    pub fn from_fn(d: usize, f: impl Fn(&Operator) -> Operator) -> Self {
        let mut mat = Operator::zeros(&[d * d], &[d * d]);
        for j in 0..d {
            for i in 0..d {
                let col = i + j * d;
                let img = f(&Operator::unit(d, i, j)).vec_col();
                for (r, z) in img.into_iter().enumerate() {
                    mat.set(r, col, z);
                }
            }
        }
        SuperOp { d, mat }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &Operator {
        &self.mat
    }

    pub fn apply(&self, a: &Operator) -> Result<Operator> {
        if a.rows != self.d || a.cols != self.d {
            return dim_err(format!("superoperator on dim {} applied to {}x{}", self.d, a.rows, a.cols));
        }
        let v = self.mat.apply(&a.vec_col())?;
        Operator::from_vec_col(&v, a.row_factors(), a.col_factors())
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &SuperOp) -> SuperOp {
        SuperOp { d: self.d, mat: &self.mat * &inner.mat }
    }

    pub fn add(&self, other: &SuperOp) -> SuperOp {
        SuperOp { d: self.d, mat: &self.mat + &other.mat }
    }

    pub fn scale_re(&self, x: f64) -> SuperOp {
        SuperOp { d: self.d, mat: self.mat.scale_re(x) }
    }

    pub fn adjoint(&self) -> SuperOp {
        SuperOp { d: self.d, mat: self.mat.adjoint() }
    }

    /// exp(t·self).
    pub fn exp(&self, t: f64, tol: f64) -> SuperOp {
        SuperOp { d: self.d, mat: expm(&self.mat.scale_re(t), tol).expect("square") }
    }

    pub fn max_abs_diff(&self, other: &SuperOp) -> f64 {
        self.mat.max_abs_diff(&other.mat)
    }
}
