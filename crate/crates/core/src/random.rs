//! Seeded random instances for property suites and CLI experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::generators::{pi_conjugated, GKSLData, Generator};
use crate::linops::{expm, Operator, C64, EXPM_TOL, I};
use crate::signals::StepFunction;

pub type Prng = ChaCha8Rng;

pub fn rng(seed: u64) -> Prng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_c64(r: &mut Prng, scale: f64) -> C64 {
    C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)) * scale
}

pub fn random_vec(r: &mut Prng, n: usize, scale: f64) -> Vec<C64> {
    (0..n).map(|_| random_c64(r, scale)).collect()
}

pub fn random_operator(r: &mut Prng, row_factors: &[usize], col_factors: &[usize], scale: f64) -> Operator {
    let rows: usize = row_factors.iter().product();
    let cols: usize = col_factors.iter().product();
    Operator::from_data(row_factors, col_factors, random_vec(r, rows * cols, scale)).expect("sized")
}

pub fn random_hermitian(r: &mut Prng, d: usize, scale: f64) -> Operator {
    let a = random_operator(r, &[d], &[d], scale);
    (&a + &a.adjoint()).scale_re(0.5)
}

pub fn random_unitary(r: &mut Prng, d: usize) -> Operator {
    let h = random_hermitian(r, d, 2.0);
    expm(&h.scale(I), EXPM_TOL).expect("square")
}

/// A generator whose action matrix has i.i.d. entries uniform in the square of
/// half-width `scale / √(d_h²)`.
pub fn random_generator(r: &mut Prng, d_h: usize, d_k: usize, scale: f64) -> Generator {
    let big = d_h * (d_k + 1);
    let a = random_operator(r, &[big * big], &[d_h * d_h], scale / d_h as f64);
    Generator::new(d_h, d_k, a).expect("sized")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WMode {
    Identity,
    Random,
}

/// Random (g, π, r, w): π is the ampliation conjugated by a random unitary,
/// `scale` controls g and r.
pub fn random_gksl(r: &mut Prng, d_h: usize, d_k: usize, scale: f64, w: WMode) -> GKSLData {
    let g = random_hermitian(r, d_h, scale);
    let u = random_unitary(r, d_h * d_k);
    let pi = pi_conjugated(&u, d_h, d_k);
    let rr = random_operator(r, &[d_h], &[d_h, d_k], scale);
    let w = match w {
        WMode::Identity => Operator::identity(&[d_h, d_k]),
        WMode::Random => random_unitary(r, d_h * d_k),
    };
    GKSLData::new(g, pi, rr, w).expect("consistent shapes")
}

/// A step function with at most `max_pieces` pieces, breakpoints on the grid
/// `grid_step·ℤ` inside [0, horizon], values of modulus ≤ `scale`.
pub fn random_step_function(
    r: &mut Prng,
    d_k: usize,
    max_pieces: usize,
    grid_step: f64,
    horizon: f64,
    scale: f64,
) -> StepFunction {
    let cells = (horizon / grid_step).round() as usize;
    let pieces = r.gen_range(1..=max_pieces.max(1)).min(cells.max(1));
    let mut cuts: Vec<usize> = (1..cells).collect();
    // Partial Fisher–Yates to pick pieces-1 distinct interior cut points.
    for i in 0..(pieces - 1).min(cuts.len()) {
        let j = r.gen_range(i..cuts.len());
        cuts.swap(i, j);
    }
    let mut chosen: Vec<usize> = cuts[..(pieces - 1).min(cuts.len())].to_vec();
    chosen.sort_unstable();
    let mut grid = vec![0.0];
    grid.extend(chosen.iter().map(|&c| c as f64 * grid_step));
    grid.push(cells as f64 * grid_step);
    let vals = (0..grid.len() - 1).map(|_| random_vec(r, d_k, scale)).collect();
    StepFunction::from_grid(d_k, &grid, vals).expect("increasing grid")
}
