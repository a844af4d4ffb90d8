//! Products with the stacked constraint matrix, spectral-norm estimation,
//! the primal-weighted norm and the projections used by PDHG.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::model::{BoundClass, LpProblem};
use crate::sparse::SparseMatrix;

/// `K = (G; A)` together with a transposed copy for fast `K'y` products.
///
/// Rows `0..m1` are inequality rows and `m1..` are equality rows. Every
/// product is counted, so the solver can report matrix-vector work.
#[derive(Debug)]
pub struct StackedK {
    k: SparseMatrix,
    kt: SparseMatrix,
    m1: usize,
    products: AtomicU64,
}

impl Clone for StackedK {
    fn clone(&self) -> Self {
        StackedK {
            k: self.k.clone(),
            kt: self.kt.clone(),
            m1: self.m1,
            products: AtomicU64::new(self.product_count()),
        }
    }
}

impl StackedK {
    pub fn new(g: &SparseMatrix, a: &SparseMatrix) -> Result<Self> {
        let k = g.vstack(a)?;
        Ok(Self::from_matrix(k, g.nrows()))
    }

    pub fn from_problem(problem: &LpProblem) -> Result<Self> {
        Self::new(&problem.g, &problem.a)
    }

    /// Wraps an already stacked matrix whose first `m1` rows are inequalities.
    pub fn from_matrix(k: SparseMatrix, m1: usize) -> Self {
        assert!(m1 <= k.nrows());
        let kt = k.transpose();
        StackedK {
            k,
            kt,
            m1,
            products: AtomicU64::new(0),
        }
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.k
    }

    pub fn transposed(&self) -> &SparseMatrix {
        &self.kt
    }

    /// Number of inequality rows.
    pub fn m1(&self) -> usize {
        self.m1
    }

    pub fn nrows(&self) -> usize {
        self.k.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.k.ncols()
    }

    /// Products with `K` or `K'` performed so far; a batched product with
    /// `w` columns counts `w` times.
    pub fn product_count(&self) -> u64 {
        self.products.load(Ordering::Relaxed)
    }

    /// `Kv`, or `K'v` when `transposed` is set.
    pub fn apply(&self, v: &[f64], transposed: bool) -> Result<Vec<f64>> {
        let (mat, want) = if transposed {
            (&self.kt, self.nrows())
        } else {
            (&self.k, self.ncols())
        };
        if v.len() != want {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} for a product expecting {}",
                v.len(),
                want
            )));
        }
        self.products.fetch_add(1, Ordering::Relaxed);
        Ok(mat.mul_vec(v))
    }

    pub(crate) fn mul_into(&self, x: &[f64], out: &mut [f64]) {
        self.products.fetch_add(1, Ordering::Relaxed);
        self.k.mul_vec_into(x, out);
    }

    pub(crate) fn mul_t_into(&self, y: &[f64], out: &mut [f64]) {
        self.products.fetch_add(1, Ordering::Relaxed);
        self.kt.mul_vec_into(y, out);
    }

    pub(crate) fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.nrows()];
        self.mul_into(x, &mut out);
        out
    }

    pub(crate) fn mul_t(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ncols()];
        self.mul_t_into(y, &mut out);
        out
    }

    /// `K X` for a row-major dense block with `width` columns.
    pub(crate) fn mul_dense_into(&self, x: &[f64], width: usize, out: &mut [f64]) {
        self.products.fetch_add(width as u64, Ordering::Relaxed);
        self.k.mul_dense_into(x, width, out);
    }

    /// `K' Y` for a row-major dense block with `width` columns.
    pub(crate) fn mul_t_dense_into(&self, y: &[f64], width: usize, out: &mut [f64]) {
        self.products.fetch_add(width as u64, Ordering::Relaxed);
        self.kt.mul_dense_into(y, width, out);
    }
}

/// Result of power iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    /// Set when the iteration collapsed to the zero vector, which happens
    /// for an all-zero matrix (or an all-ones start in its null space).
    pub degenerate: bool,
}

/// Estimates `||K||_2` by power iteration on `K'K` from the all-ones vector.
pub fn spectral_norm_estimate(k: &StackedK, n_iter: usize) -> Result<NormEstimate> {
    if n_iter == 0 {
        return Err(Error::InvalidInput(
            "power iteration needs at least one round".into(),
        ));
    }
    let mut b = vec![1.0; k.ncols()];
    let mut kb = vec![0.0; k.nrows()];
    for _ in 0..n_iter {
        k.mul_into(&b, &mut kb);
        k.mul_t_into(&kb, &mut b);
        let norm = norm2(&b);
        if norm == 0.0 || !norm.is_finite() {
            return Ok(NormEstimate {
                value: 0.0,
                degenerate: true,
            });
        }
        b.iter_mut().for_each(|v| *v /= norm);
    }
    k.mul_into(&b, &mut kb);
    Ok(NormEstimate {
        value: norm2(&kb),
        degenerate: false,
    })
}

/// `sqrt(omega ||x||^2 + ||y||^2 / omega)`.
pub fn omega_norm(x: &[f64], y: &[f64], omega: f64) -> f64 {
    (omega * dot(x, x) + dot(y, y) / omega).sqrt()
}

/// Componentwise clamp of `v` into `[lower, upper]`.
pub fn proj_box(v: &[f64], lower: &[f64], upper: &[f64]) -> Vec<f64> {
    let mut out = v.to_vec();
    proj_box_in_place(&mut out, lower, upper);
    out
}

pub fn proj_box_in_place(v: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((x, &l), &u) in v.iter_mut().zip(lower).zip(upper) {
        *x = x.max(l).min(u);
    }
}

/// Clamps the first `m1` entries (the inequality multipliers) at zero.
pub fn proj_dual_cone(y: &[f64], m1: usize) -> Vec<f64> {
    let mut out = y.to_vec();
    proj_dual_cone_in_place(&mut out, m1);
    out
}

pub fn proj_dual_cone_in_place(y: &mut [f64], m1: usize) {
    for v in &mut y[..m1] {
        *v = v.max(0.0);
    }
}

/// Projects reduced costs onto the set allowed by each bound class.
pub fn proj_lambda(w: &[f64], classes: &[BoundClass]) -> Vec<f64> {
    w.iter()
        .zip(classes)
        .map(|(&v, class)| match class {
            BoundClass::Free => 0.0,
            BoundClass::UpperOnly => v.min(0.0),
            BoundClass::LowerOnly => v.max(0.0),
            BoundClass::Boxed => v,
        })
        .collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stacked(rows: &[Vec<f64>]) -> StackedK {
        StackedK::from_matrix(SparseMatrix::from_dense(rows).unwrap(), rows.len())
    }

    #[test]
    fn products_match_hand_values() {
        let id = stacked(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(id.apply(&[3.0, 7.0], false).unwrap(), vec![3.0, 7.0]);
        let k = stacked(&[vec![1.0, 2.0], vec![0.0, 3.0]]);
        assert_eq!(k.apply(&[1.0, 1.0], false).unwrap(), vec![3.0, 3.0]);
        assert_eq!(k.apply(&[1.0, 1.0], true).unwrap(), vec![1.0, 5.0]);
        assert_eq!(k.product_count(), 2);
    }

    #[test]
    fn product_length_mismatch() {
        let k = stacked(&[vec![1.0, 2.0, 3.0]]);
        assert!(k.apply(&[1.0], false).is_err());
        assert!(k.apply(&[1.0, 2.0], true).is_err());
    }

    #[test]
    fn power_iteration_small_cases() {
        let id = stacked(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ]);
        assert!((spectral_norm_estimate(&id, 10).unwrap().value - 1.0).abs() < 1e-15);
        let d = stacked(&[vec![3.0, 0.0], vec![0.0, 4.0]]);
        assert!((spectral_norm_estimate(&d, 20).unwrap().value - 4.0).abs() < 1e-6);
        let nil = stacked(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
        assert_eq!(spectral_norm_estimate(&nil, 5).unwrap().value, 1.0);
        assert_eq!(spectral_norm_estimate(&nil, 1).unwrap().value, 1.0);
    }

    #[test]
    fn power_iteration_zero_matrix_is_degenerate() {
        let z = StackedK::from_matrix(SparseMatrix::zeros(2, 2), 2);
        let est = spectral_norm_estimate(&z, 3).unwrap();
        assert_eq!(est.value, 0.0);
        assert!(est.degenerate);
        assert!(spectral_norm_estimate(&z, 0).is_err());
    }

    #[test]
    fn omega_norm_values() {
        assert_eq!(omega_norm(&[3.0, 4.0], &[0.0], 1.0), 5.0);
        assert!((omega_norm(&[1.0], &[2.0], 4.0) - 5f64.sqrt()).abs() < 1e-15);
        assert_eq!(omega_norm(&[0.0], &[0.0], 7.0), 0.0);
    }

    #[test]
    fn box_projection() {
        let inf = f64::INFINITY;
        assert_eq!(
            proj_box(&[2.0, -3.0, 5.0], &[0.0; 3], &[4.0; 3]),
            vec![2.0, 0.0, 4.0]
        );
        assert_eq!(proj_box(&[-8.0, 9.0], &[-inf; 2], &[inf; 2]), vec![-8.0, 9.0]);
        assert_eq!(proj_box(&[1.5], &[2.0], &[3.0]), vec![2.0]);
    }

    #[test]
    fn dual_cone_projection() {
        assert_eq!(proj_dual_cone(&[-1.0, 2.0, 3.0], 2), vec![0.0, 2.0, 3.0]);
        assert_eq!(proj_dual_cone(&[-1.0, -2.0], 0), vec![-1.0, -2.0]);
        assert_eq!(proj_dual_cone(&[-5.0, -5.0], 2), vec![0.0, 0.0]);
    }

    #[test]
    fn lambda_projection() {
        use BoundClass::*;
        assert_eq!(proj_lambda(&[5.0], &[Free]), vec![0.0]);
        assert_eq!(proj_lambda(&[-2.0, 2.0], &[LowerOnly, LowerOnly]), vec![0.0, 2.0]);
        assert_eq!(proj_lambda(&[-2.0, 2.0], &[Boxed, Boxed]), vec![-2.0, 2.0]);
        assert_eq!(proj_lambda(&[-2.0, 2.0], &[UpperOnly, UpperOnly]), vec![-2.0, 0.0]);
    }
}
