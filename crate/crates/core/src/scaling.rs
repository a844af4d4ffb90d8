//! Ruiz equilibration.
//!
//! The scaled problem uses `K~ = D_r^-1 K D_c^-1`, `x~ = D_c x`,
//! `c~ = D_c^-1 c`, `q~ = D_r^-1 q` and `y~ = D_r y`, which keeps the
//! reduced costs consistent: `c~ - K~'y~ = D_c^-1 (c - K'y)`.

use crate::error::{Error, Result};
use crate::linalg::StackedK;
use crate::model::LpProblem;

/// Diagonals of `D_r` and `D_c`. The scaled matrix divides row `j` by
/// `d_row[j]` and column `i` by `d_col[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingData {
    pub d_row: Vec<f64>,
    pub d_col: Vec<f64>,
    pub iterations_used: usize,
}

impl ScalingData {
    pub fn identity(nrows: usize, ncols: usize) -> Self {
        ScalingData {
            d_row: vec![1.0; nrows],
            d_col: vec![1.0; ncols],
            iterations_used: 0,
        }
    }

    /// Multiplicative row factors, i.e. `K~ = diag(row_factors) K diag(col_factors)`.
    pub fn row_factors(&self) -> Vec<f64> {
        self.d_row.iter().map(|d| 1.0 / d).collect()
    }

    pub fn col_factors(&self) -> Vec<f64> {
        self.d_col.iter().map(|d| 1.0 / d).collect()
    }

    /// Maps an original iterate into scaled space.
    pub fn scale_iterate(&self, x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (
            x.iter().zip(&self.d_col).map(|(v, d)| v * d).collect(),
            y.iter().zip(&self.d_row).map(|(v, d)| v * d).collect(),
        )
    }
}

/// Iterative Ruiz scaling of `K` in the infinity norm.
///
/// Stops once every nonzero row and column of the scaled matrix has
/// infinity norm within `tol` of one, or after `max_iter` rounds.
pub fn ruiz_equilibrate(k: &StackedK, max_iter: usize, tol: f64) -> Result<ScalingData> {
    if max_iter == 0 {
        return Err(Error::InvalidInput("Ruiz scaling needs max_iter >= 1".into()));
    }
    let mut scaled = k.matrix().clone();
    let mut data = ScalingData::identity(scaled.nrows(), scaled.ncols());

    for it in 1..=max_iter {
        let row_div: Vec<f64> = scaled.row_inf_norms().iter().map(|&n| divisor(n)).collect();
        let col_div: Vec<f64> = scaled.col_inf_norms().iter().map(|&n| divisor(n)).collect();
        let row_mul: Vec<f64> = row_div.iter().map(|d| 1.0 / d).collect();
        let col_mul: Vec<f64> = col_div.iter().map(|d| 1.0 / d).collect();
        scaled = scaled.scale(&row_mul, &col_mul);
        data.d_row.iter_mut().zip(&row_div).for_each(|(d, r)| *d *= r);
        data.d_col.iter_mut().zip(&col_div).for_each(|(d, c)| *d *= c);
        data.iterations_used = it;

        let within = |n: &f64| *n == 0.0 || (n - 1.0).abs() <= tol;
        if scaled.row_inf_norms().iter().all(within) && scaled.col_inf_norms().iter().all(within) {
            break;
        }
    }
    Ok(data)
}

fn divisor(norm: f64) -> f64 {
    if norm > 0.0 && norm.is_finite() {
        norm.sqrt()
    } else {
        1.0
    }
}

/// Builds the scaled problem. Infinite bounds stay infinite.
pub fn apply_scaling(problem: &LpProblem, s: &ScalingData) -> LpProblem {
    let m1 = problem.num_inequalities();
    let (row_g, row_a) = s.d_row.split_at(m1);
    let inv = |d: &[f64]| d.iter().map(|v| 1.0 / v).collect::<Vec<_>>();
    let col_mul = inv(&s.d_col);

    LpProblem {
        name: problem.name.clone(),
        c: problem.c.iter().zip(&s.d_col).map(|(c, d)| c / d).collect(),
        g: problem.g.scale(&inv(row_g), &col_mul),
        h: problem.h.iter().zip(row_g).map(|(h, d)| h / d).collect(),
        a: problem.a.scale(&inv(row_a), &col_mul),
        b: problem.b.iter().zip(row_a).map(|(b, d)| b / d).collect(),
        lower: problem.lower.iter().zip(&s.d_col).map(|(l, d)| l * d).collect(),
        upper: problem.upper.iter().zip(&s.d_col).map(|(u, d)| u * d).collect(),
        objective_offset: problem.objective_offset,
    }
}

/// Maps a scaled iterate back: `x = D_c^-1 x~`, `y = D_r^-1 y~`.
pub fn unscale_iterate(x: &[f64], y: &[f64], s: &ScalingData) -> (Vec<f64>, Vec<f64>) {
    (
        x.iter().zip(&s.d_col).map(|(v, d)| v / d).collect(),
        y.iter().zip(&s.d_row).map(|(v, d)| v / d).collect(),
    )
}
