//! Seeded random instances with a known feasible point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::LpProblem;
use crate::sparse::SparseMatrix;

/// Shape of a generated instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorShape {
    pub n: usize,
    pub inequalities: usize,
    pub equalities: usize,
    /// Percentage of structural nonzeros, 1..=100.
    pub density_pct: u32,
}

/// Magnitude in `[0.1, 2]` with a random sign, rounded to two decimals.
/// Tiny coefficients make near-degenerate rows that need hundreds of
/// thousands of PDHG iterations, so they are excluded.
fn coefficient(rng: &mut ChaCha8Rng) -> f64 {
    let mag: f64 = rng.random_range(0.1..=2.0);
    let mag = (mag * 100.0).round() / 100.0;
    if rng.random_bool(0.5) {
        mag
    } else {
        -mag
    }
}

fn sparse_rows(
    rng: &mut ChaCha8Rng,
    rows: usize,
    cols: usize,
    density_pct: u32,
) -> Vec<(usize, usize, f64)> {
    let mut trip = Vec::new();
    for r in 0..rows {
        let before = trip.len();
        for c in 0..cols {
            if rng.random_range(0..100) < density_pct {
                trip.push((r, c, coefficient(rng)));
            }
        }
        if trip.len() == before {
            let c = rng.random_range(0..cols);
            trip.push((r, c, coefficient(rng)));
        }
    }
    trip
}

/// A feasible LP with a finite optimum.
///
/// A point `x*` strictly inside the bounds is drawn first; inequality
/// right-hand sides are `G x*` minus a random slack (zero for roughly half
/// the rows) and `b = A x*`. Variables are boxed or bounded below only;
/// the latter get positive costs, which keeps the objective bounded.
pub fn random_feasible_lp(shape: GeneratorShape, seed: u64) -> LpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = shape.n.max(1);
    let density = shape.density_pct.clamp(1, 100);

    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    let mut c = Vec::with_capacity(n);
    let mut x_star = Vec::with_capacity(n);
    for _ in 0..n {
        let l = if rng.random_bool(0.5) { 0.0 } else { -1.0 };
        let boxed = rng.random_bool(0.7);
        let u = if boxed {
            l + rng.random_range(1.0..4.0)
        } else {
            f64::INFINITY
        };
        let span = if boxed { u - l } else { 2.0 };
        x_star.push(l + span * rng.random_range(0.1..0.9));
        let cost = coefficient(&mut rng);
        c.push(if boxed { cost } else { cost.abs() });
        lower.push(l);
        upper.push(u);
    }

    let g_trip = sparse_rows(&mut rng, shape.inequalities, n, density);
    let a_trip = sparse_rows(&mut rng, shape.equalities, n, density);
    let g = SparseMatrix::from_triplets(shape.inequalities, n, &g_trip)
        .expect("generated triplets are in range");
    let a = SparseMatrix::from_triplets(shape.equalities, n, &a_trip)
        .expect("generated triplets are in range");

    let h = g
        .mul_vec(&x_star)
        .into_iter()
        .map(|v| {
            if rng.random_bool(0.5) {
                v
            } else {
                v - rng.random_range(0.0..1.0)
            }
        })
        .collect();
    let b = a.mul_vec(&x_star);

    LpProblem {
        name: format!("random-{seed}"),
        c,
        g,
        h,
        a,
        b,
        lower,
        upper,
        objective_offset: 0.0,
    }
}

/// Random sparse matrix with entries whose magnitudes span several orders
/// of magnitude. Every row and column has at least one nonzero.
pub fn random_badly_scaled_matrix(rows: usize, cols: usize, density_pct: u32, seed: u64) -> SparseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trip = Vec::new();
    let mut col_hit = vec![false; cols];
    let value = |rng: &mut ChaCha8Rng| {
        let mag = 10f64.powf(rng.random_range(-3.0..3.0));
        if rng.random_bool(0.5) {
            mag
        } else {
            -mag
        }
    };
    for r in 0..rows {
        let mut hit = false;
        for (c, seen) in col_hit.iter_mut().enumerate() {
            if rng.random_range(0..100) < density_pct {
                trip.push((r, c, value(&mut rng)));
                hit = true;
                *seen = true;
            }
        }
        if !hit {
            let c = rng.random_range(0..cols);
            trip.push((r, c, value(&mut rng)));
            col_hit[c] = true;
        }
    }
    for (c, seen) in col_hit.iter().enumerate() {
        if !seen {
            let r = rng.random_range(0..rows);
            trip.push((r, c, value(&mut rng)));
        }
    }
    SparseMatrix::from_triplets(rows, cols, &trip).expect("generated triplets are in range")
}
