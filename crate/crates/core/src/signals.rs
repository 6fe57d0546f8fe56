//! k-valued step functions on [0,∞), their L² geometry, the toy-space
//! discretization f(n;h), the grid projection P_(h) and simplex measures.

use crate::error::{QrwError, Result};
use crate::linops::{inner, C64, ZERO};

/// Relative slack used when deciding which grid cell a time falls in.
const SEAM_EPS: f64 = 1e-9;

/// A right-continuous, compactly supported step function [0,∞) → ℂ^{d_k}.
///
/// Value `values[i]` holds on `[breakpoints[i], breakpoints[i+1])`, the last
/// one on `[breakpoints[K-1], support_end)`; the function is 0 afterwards.
/// The zero function may be stored with no breakpoints at all.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction {
    d_k: usize,
    breakpoints: Vec<f64>,
    values: Vec<Vec<C64>>,
    support_end: f64,
}

impl StepFunction {
    pub fn new(d_k: usize, breakpoints: Vec<f64>, values: Vec<Vec<C64>>, support_end: f64) -> Result<Self> {
        let bad = |m: String| Err(QrwError::StepFunction(m));
        if d_k == 0 {
            return bad("d_k must be positive".into());
        }
        if breakpoints.len() != values.len() {
            return bad(format!("{} breakpoints but {} values", breakpoints.len(), values.len()));
        }
        if breakpoints.is_empty() {
            return Ok(Self::zero(d_k));
        }
        if breakpoints[0] != 0.0 {
            return bad(format!("first breakpoint must be 0, got {}", breakpoints[0]));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) || !support_end.is_finite() {
            return bad("breakpoints and support end must be finite".into());
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return bad("breakpoints must be strictly increasing".into());
        }
        if support_end <= *breakpoints.last().unwrap() {
            return bad(format!("support end {support_end} leaves a zero-length last interval"));
        }
        if let Some(v) = values.iter().find(|v| v.len() != d_k) {
            return bad(format!("value of length {} for d_k = {d_k}", v.len()));
        }
        if values.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return bad("values must be finite".into());
        }
        Ok(StepFunction { d_k, breakpoints, values, support_end })
    }

    pub fn zero(d_k: usize) -> Self {
        StepFunction { d_k, breakpoints: Vec::new(), values: Vec::new(), support_end: 0.0 }
    }

    /// `value · 1_{[start,end)}`.
    pub fn indicator(start: f64, end: f64, value: Vec<C64>) -> Result<Self> {
        let d_k = value.len();
        Self::from_pieces(d_k, &[(start, end, value)])
    }

    /// Scalar (d_k = 1) `v · 1_{[start,end)}`.
    pub fn scalar_indicator(start: f64, end: f64, v: f64) -> Self {
        Self::indicator(start, end, vec![C64::new(v, 0.0)]).expect("valid indicator")
    }

    /// Builds a step function from disjoint, ordered pieces `(start, end, value)`;
    /// gaps are zero.
    pub fn from_pieces(d_k: usize, pieces: &[(f64, f64, Vec<C64>)]) -> Result<Self> {
        let mut bps = Vec::new();
        let mut vals = Vec::new();
        let mut cursor = 0.0;
        for (a, b, v) in pieces {
            if !(a < b) || *a < cursor {
                return Err(QrwError::StepFunction(format!("piece [{a},{b}) overlaps or is empty")));
            }
            if *a > cursor {
                bps.push(cursor);
                vals.push(vec![ZERO; d_k]);
            }
            bps.push(*a);
            vals.push(v.clone());
            cursor = *b;
        }
        if bps.is_empty() {
            return Ok(Self::zero(d_k));
        }
        Self::new(d_k, bps, vals, cursor)
    }

    /// Builds a step function from cell boundaries `grid[0]=0 < … < grid[K]`
    /// and one value per cell.
    pub fn from_grid(d_k: usize, grid: &[f64], values: Vec<Vec<C64>>) -> Result<Self> {
        if grid.len() < 2 {
            return Ok(Self::zero(d_k));
        }
        if values.len() != grid.len() - 1 {
            return Err(QrwError::StepFunction("one value per grid cell required".into()));
        }
        Self::new(d_k, grid[..grid.len() - 1].to_vec(), values, grid[grid.len() - 1])
    }

    pub fn d_k(&self) -> usize {
        self.d_k
    }
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }
    pub fn values(&self) -> &[Vec<C64>] {
        &self.values
    }
    pub fn support_end(&self) -> f64 {
        self.support_end
    }

    /// Iterates `(start, end, value)` over the intervals of the representation.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, &[C64])> + '_ {
        (0..self.breakpoints.len()).map(move |i| {
            let end = self.breakpoints.get(i + 1).copied().unwrap_or(self.support_end);
            (self.breakpoints[i], end, self.values[i].as_slice())
        })
    }

    /// Right-continuous evaluation.
    pub fn eval(&self, s: f64) -> Vec<C64> {
        if s < 0.0 || s >= self.support_end {
            return vec![ZERO; self.d_k];
        }
        let idx = self.breakpoints.partition_point(|&b| b <= s);
        self.values[idx - 1].clone()
    }

    /// ∫_from^to f(s) ds, exact.
    pub fn integral(&self, from: f64, to: f64) -> Vec<C64> {
        let mut acc = vec![ZERO; self.d_k];
        for (a, b, v) in self.pieces() {
            let len = b.min(to) - a.max(from);
            if len > 0.0 {
                acc.iter_mut().zip(v).for_each(|(x, y)| *x += y * len);
            }
        }
        acc
    }

    /// ∫_from^to ‖f(s)‖² ds.
    pub fn norm_sq(&self, from: f64, to: f64) -> f64 {
        l2_inner(self, self, from, to).re
    }

    /// `1_{[0,t)} f`.
    pub fn truncate(&self, t: f64) -> StepFunction {
        if t >= self.support_end {
            return self.clone();
        }
        let k = self.breakpoints.partition_point(|&b| b < t);
        if k == 0 || t <= 0.0 {
            return Self::zero(self.d_k);
        }
        StepFunction {
            d_k: self.d_k,
            breakpoints: self.breakpoints[..k].to_vec(),
            values: self.values[..k].to_vec(),
            support_end: t,
        }
    }

    /// `s ↦ f(s + shift)`.
    pub fn shift(&self, shift: f64) -> StepFunction {
        if shift >= self.support_end {
            return Self::zero(self.d_k);
        }
        let mut bps = vec![0.0];
        let mut vals = vec![self.eval(shift)];
        for (b, v) in self.breakpoints.iter().zip(&self.values) {
            if *b > shift {
                bps.push(b - shift);
                vals.push(v.clone());
            }
        }
        StepFunction { d_k: self.d_k, breakpoints: bps, values: vals, support_end: self.support_end - shift }
    }

    /// Pointwise combination on a common refinement.
    pub fn zip_with(&self, other: &StepFunction, op: impl Fn(&[C64], &[C64]) -> Vec<C64>) -> Result<StepFunction> {
        let end = self.support_end.max(other.support_end);
        let grid = common_grid(&[self, other], end);
        let d_k = op(&vec![ZERO; self.d_k], &vec![ZERO; other.d_k]).len();
        let vals = grid.windows(2).map(|w| op(&self.eval(w[0]), &other.eval(w[0]))).collect();
        StepFunction::from_grid(d_k, &grid, vals)
    }
}

/// Sorted cell boundaries `0 = τ_0 < … < τ_K = t` refining every breakpoint
/// and support end of `fs` below `t`.
pub fn common_grid(fs: &[&StepFunction], t: f64) -> Vec<f64> {
    let mut pts: Vec<f64> = vec![0.0];
    for f in fs {
        pts.extend(f.breakpoints.iter().copied().filter(|&b| b > 0.0 && b < t));
        if f.support_end > 0.0 && f.support_end < t {
            pts.push(f.support_end);
        }
    }
    if t > 0.0 {
        pts.push(t);
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    pts
}

/// Index n with t ∈ [nh, (n+1)h); a t within rounding of a grid point is
/// assigned to the step starting there.
pub fn grid_index(t: f64, h: f64) -> usize {
    let r = t / h;
    let k = r.round();
    if (r - k).abs() <= SEAM_EPS * r.abs().max(1.0) {
        k.max(0.0) as usize
    } else {
        r.floor().max(0.0) as usize
    }
}

/// f(n;h) = h^{-1/2} ∫_{nh}^{(n+1)h} f.
pub fn discretize(f: &StepFunction, h: f64, n: usize) -> Vec<C64> {
    let a = n as f64 * h;
    let b = (n + 1) as f64 * h;
    f.integral(a, b).into_iter().map(|z| z / h.sqrt()).collect()
}

/// Number of grid cells of width h meeting the support of f.
pub fn active_cells(f: &StepFunction, h: f64) -> usize {
    if f.support_end <= 0.0 {
        return 0;
    }
    let n = grid_index(f.support_end, h);
    if (n as f64) * h >= f.support_end * (1.0 - SEAM_EPS) {
        n
    } else {
        n + 1
    }
}

/// P_(h) f: the cell average of f on each cell of the grid hℤ_+.
pub fn project(f: &StepFunction, h: f64) -> StepFunction {
    let n = active_cells(f, h);
    if n == 0 {
        return StepFunction::zero(f.d_k);
    }
    let grid: Vec<f64> = (0..=n).map(|k| k as f64 * h).collect();
    let vals = (0..n)
        .map(|k| f.integral(grid[k], grid[k + 1]).into_iter().map(|z| z / h).collect())
        .collect();
    StepFunction::from_grid(f.d_k, &grid, vals).expect("grid is increasing")
}

/// ∫_from^to ⟨f(s), g(s)⟩ ds, conjugate-linear in f; `to` may be infinite.
pub fn l2_inner(f: &StepFunction, g: &StepFunction, from: f64, to: f64) -> C64 {
    let end = f.support_end.min(g.support_end).min(to);
    if end <= from {
        return ZERO;
    }
    let grid = common_grid(&[f, g], end);
    grid.windows(2)
        .filter(|w| w[1] > from)
        .map(|w| {
            let len = w[1] - w[0].max(from);
            inner(&f.eval(w[0].max(from)), &g.eval(w[0].max(from))) * len
        })
        .sum()
}

/// ⟨ε(f), ε(g)⟩ = exp⟨f, g⟩.
pub fn exp_inner(f: &StepFunction, g: &StepFunction) -> C64 {
    l2_inner(f, g, 0.0, f64::INFINITY).exp()
}

/// Δ_m(t) (continuous, `h = None`) or its discrete sub-region Δ_m^h(t).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimplexRegion {
    pub m: usize,
    pub t: f64,
    pub h: Option<f64>,
}

pub fn simplex_box_measure(region: SimplexRegion) -> Result<f64> {
    let SimplexRegion { m, t, h } = region;
    if m < 1 {
        return Err(QrwError::Config("simplex order must be at least 1".into()));
    }
    Ok(match h {
        Some(h) => binomial(grid_index(t, h), m) * h.powi(m as i32),
        None => t.powi(m as i32) / factorial(m),
    })
}

pub fn factorial(m: usize) -> f64 {
    (1..=m).map(|k| k as f64).product()
}

pub fn binomial(n: usize, m: usize) -> f64 {
    if m > n {
        return 0.0;
    }
    (0..m).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(v: &[C64]) -> f64 {
        v[0].re
    }

    #[test]
    fn constructor_validates() {
        let one = vec![C64::new(1.0, 0.0)];
        assert!(StepFunction::new(1, vec![0.5], vec![one.clone()], 1.0).is_err());
        assert!(StepFunction::new(1, vec![0.0, 0.0], vec![one.clone(), one.clone()], 1.0).is_err());
        assert!(StepFunction::new(1, vec![0.0], vec![one.clone()], 0.0).is_err());
        assert!(StepFunction::new(2, vec![0.0], vec![one.clone()], 1.0).is_err());
        assert!(StepFunction::new(1, vec![0.0], vec![one], 1.0).is_ok());
    }

    #[test]
    fn right_continuous_eval() {
        let f = StepFunction::from_pieces(1, &[(0.5, 1.0, vec![C64::new(2.0, 0.0)])]).unwrap();
        assert_eq!(re(&f.eval(0.49)), 0.0);
        assert_eq!(re(&f.eval(0.5)), 2.0);
        assert_eq!(re(&f.eval(1.0)), 0.0);
    }

    #[test]
    fn discretize_examples() {
        let f = StepFunction::scalar_indicator(0.0, 1.0, 1.0);
        assert!((re(&discretize(&f, 0.25, 0)) - 0.5).abs() < 1e-15);
        assert_eq!(re(&discretize(&StepFunction::zero(1), 0.3, 4)), 0.0);
        assert!((re(&discretize(&f, 0.4, 2)) - 0.316_227_766_016_838).abs() < 1e-12);
    }

    #[test]
    fn project_examples() {
        let f = StepFunction::scalar_indicator(0.0, 0.5, 1.0);
        let p = project(&f, 1.0);
        assert_eq!(re(&p.eval(0.7)), 0.5);
        assert_eq!(re(&p.eval(1.2)), 0.0);

        let g = StepFunction::from_pieces(1, &[(0.0, 0.5, vec![C64::new(3.0, 1.0)]), (0.5, 1.5, vec![C64::new(-1.0, 0.0)])]).unwrap();
        let pg = project(&g, 0.5);
        for s in [0.1, 0.6, 1.2, 1.7] {
            assert!((pg.eval(s)[0] - g.eval(s)[0]).norm() < 1e-15);
        }
        let p1 = project(&g, 0.4);
        let pp = project(&p1, 0.4);
        assert_eq!(pp.breakpoints(), p1.breakpoints());
        for (x, y) in pp.values().iter().zip(p1.values()) {
            assert!((x[0] - y[0]).norm() < 1e-14);
        }
    }

    #[test]
    fn inner_products() {
        let f = StepFunction::scalar_indicator(0.0, 1.0, 1.0);
        let g = StepFunction::scalar_indicator(0.5, 2.0, 2.0);
        assert!((l2_inner(&f, &f, 0.0, f64::INFINITY).re - 1.0).abs() < 1e-15);
        assert_eq!(l2_inner(&f, &StepFunction::zero(1), 0.0, f64::INFINITY), ZERO);
        assert!((l2_inner(&f, &g, 0.0, f64::INFINITY).re - 1.0).abs() < 1e-15);
        assert!((l2_inner(&f, &g, 0.75, f64::INFINITY).re - 0.5).abs() < 1e-15);

        assert!((exp_inner(&StepFunction::zero(1), &g).re - 1.0).abs() < 1e-15);
        assert!((exp_inner(&f, &f).re - std::f64::consts::E).abs() < 1e-14);
        let t = 0.3;
        let ft = StepFunction::scalar_indicator(0.0, t, 1.0);
        assert!((exp_inner(&f, &ft).re - t.exp()).abs() < 1e-14);
    }

    #[test]
    fn inner_product_conjugate_linear_in_first() {
        let f = StepFunction::indicator(0.0, 1.0, vec![C64::new(0.0, 1.0)]).unwrap();
        let g = StepFunction::scalar_indicator(0.0, 1.0, 1.0);
        assert!((l2_inner(&f, &g, 0.0, f64::INFINITY) - C64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn simplex_measures() {
        let m = |m, t, h| simplex_box_measure(SimplexRegion { m, t, h }).unwrap();
        assert!((m(2, 1.0, None) - 0.5).abs() < 1e-15);
        assert!((m(2, 1.0, Some(0.25)) - 0.375).abs() < 1e-15);
        assert_eq!(m(3, 0.5, Some(0.2)), 0.0);
        assert!(simplex_box_measure(SimplexRegion { m: 0, t: 1.0, h: None }).is_err());
    }

    #[test]
    fn grid_index_seams() {
        assert_eq!(grid_index(1.0, 0.1), 10);
        assert_eq!(grid_index(0.3, 0.1), 3);
        assert_eq!(grid_index(0.35, 0.1), 3);
        assert_eq!(grid_index(0.0, 0.5), 0);
    }

    #[test]
    fn shift_and_truncate() {
        let f = StepFunction::from_pieces(1, &[(0.0, 1.0, vec![C64::new(1.0, 0.0)]), (1.0, 2.0, vec![C64::new(5.0, 0.0)])]).unwrap();
        let s = f.shift(0.5);
        assert_eq!(re(&s.eval(0.0)), 1.0);
        assert_eq!(re(&s.eval(0.6)), 5.0);
        assert_eq!(s.support_end(), 1.5);
        let t = f.truncate(1.5);
        assert_eq!(re(&t.eval(1.2)), 5.0);
        assert_eq!(re(&t.eval(1.6)), 0.0);
        assert_eq!(f.truncate(0.0), StepFunction::zero(1));
    }
}
