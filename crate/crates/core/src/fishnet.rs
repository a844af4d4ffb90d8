//! Fishnet casting: a multistart warm-start heuristic.
//!
//! A population of primal points is drawn from a normal distribution whose
//! spread is the spectral norm of `K`, evolved with batched fixed-step
//! PDHG, halved by duality gap and periodically refilled with random
//! convex combinations of the survivors until a single point remains.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::PreparedLp;
use crate::kkt::convergence_info;
use crate::linalg::spectral_norm_estimate;
use crate::pdhg::{PrimalDualIterate, StepSizes};
use crate::restart::initialize_primal_weight;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FishnetConfig {
    /// The population starts with `2^p` points.
    pub p: u32,
    /// Fixed-step PDHG iterations between culls.
    pub k: usize,
    pub seed: u64,
}

impl Default for FishnetConfig {
    fn default() -> Self {
        FishnetConfig {
            p: 5,
            k: 100,
            seed: 0,
        }
    }
}

/// Row-major dense block whose columns are individual points.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseBlock {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseBlock {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseBlock {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Self {
        let mut block = DenseBlock::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            block.set_column(j, col);
        }
        block
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn set_column(&mut self, c: usize, values: &[f64]) {
        assert_eq!(values.len(), self.rows);
        for (r, v) in values.iter().enumerate() {
            self.data[r * self.cols + c] = *v;
        }
    }

    fn select_columns(&self, keep: &[usize]) -> DenseBlock {
        let mut out = DenseBlock::zeros(self.rows, keep.len());
        for r in 0..self.rows {
            for (j, &c) in keep.iter().enumerate() {
                out.data[r * keep.len() + j] = self.get(r, c);
            }
        }
        out
    }
}

/// Primal and dual candidates side by side; column `j` of `x` pairs with
/// column `j` of `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointBatch {
    pub x: DenseBlock,
    pub y: DenseBlock,
    pub rng_seed: u64,
}

impl PointBatch {
    pub fn width(&self) -> usize {
        self.x.cols()
    }

    pub fn point(&self, j: usize) -> PrimalDualIterate {
        PrimalDualIterate::new(self.x.column(j), self.y.column(j))
    }
}

fn casting_radius(lp: &PreparedLp) -> f64 {
    match spectral_norm_estimate(&lp.k, 20) {
        Ok(est) if est.value > 0.0 && est.value.is_finite() => est.value,
        _ => 1.0,
    }
}

/// Draws `2^p` primal points with per-coordinate standard deviation
/// `||K||_2`, clamps them into the bounds and sets `Y = K X`. Column 0 is
/// replaced by the solver's cold start (projected origin, zero duals).
pub fn spectral_cast(lp: &PreparedLp, p: u32, seed: u64) -> Result<PointBatch> {
    if p < 1 {
        return Err(Error::InvalidInput("fishnet needs p >= 1".into()));
    }
    if p > 20 {
        return Err(Error::InvalidInput(format!("fishnet population 2^{p} is too large")));
    }
    let width = 1usize << p;
    let n = lp.n();
    let radius = casting_radius(lp);
    let normal = Normal::new(0.0, radius)
        .map_err(|e| Error::InvalidInput(format!("casting distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut x = DenseBlock::zeros(n, width);
    let (lower, upper) = (lp.lower(), lp.upper());
    for j in 1..width {
        let col: Vec<f64> = (0..n)
            .map(|i| normal.sample(&mut rng).max(lower[i]).min(upper[i]))
            .collect();
        x.set_column(j, &col);
    }
    let origin = PrimalDualIterate::projected_origin(lp);
    x.set_column(0, &origin.x);

    let mut y = DenseBlock::zeros(lp.m(), width);
    lp.k.mul_dense_into(&x.data, width, &mut y.data);
    y.set_column(0, &origin.y);

    Ok(PointBatch { x, y, rng_seed: seed })
}

/// One fixed-step PDHG iteration applied to every column at once.
pub fn batch_pdhg_step(batch: &PointBatch, steps: StepSizes, theta: f64, lp: &PreparedLp) -> PointBatch {
    let w = batch.width();
    let (n, m) = (lp.n(), lp.m());
    let tau = steps.tau();
    let sigma = steps.sigma();
    let c = lp.c();
    let (lower, upper) = (lp.lower(), lp.upper());

    let mut kty = vec![0.0; n * w];
    lp.k.mul_t_dense_into(&batch.y.data, w, &mut kty);

    let mut x = batch.x.clone();
    let mut x_bar = DenseBlock::zeros(n, w);
    for i in 0..n {
        for b in 0..w {
            let idx = i * w + b;
            let mut v = x.data[idx];
            v -= tau * (c[i] - kty[idx]);
            v = v.max(lower[i]).min(upper[i]);
            x.data[idx] = v;
            x_bar.data[idx] = v + theta * (v - batch.x.data[idx]);
        }
    }

    let mut k_xbar = vec![0.0; m * w];
    lp.k.mul_dense_into(&x_bar.data, w, &mut k_xbar);
    let mut y = batch.y.clone();
    for j in 0..m {
        for b in 0..w {
            let idx = j * w + b;
            let mut v = y.data[idx];
            v += sigma * (lp.q[j] - k_xbar[idx]);
            if j < lp.m1() {
                v = v.max(0.0);
            }
            y.data[idx] = v;
        }
    }
    PointBatch {
        x,
        y,
        rng_seed: batch.rng_seed,
    }
}

/// Indices of the `ceil(len / 2)` smallest gaps, in increasing index order.
/// Ties go to the lower index; NaN gaps rank last.
pub fn select_survivors(gaps: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..gaps.len()).collect();
    let key = |i: usize| if gaps[i].is_nan() { f64::INFINITY } else { gaps[i] };
    order.sort_by(|&a, &b| key(a).total_cmp(&key(b)).then(a.cmp(&b)));
    order.truncate(gaps.len().div_ceil(2));
    order.sort_unstable();
    order
}

/// Absolute duality gap of every column.
pub fn column_gaps(batch: &PointBatch, lp: &PreparedLp) -> Vec<f64> {
    (0..batch.width())
        .map(|j| {
            let info = convergence_info(lp, &batch.x.column(j), &batch.y.column(j));
            info.gap_abs
        })
        .collect()
}

/// Drops the worse half of the columns by duality gap.
pub fn cull_points(batch: &PointBatch, lp: &PreparedLp) -> PointBatch {
    if batch.width() <= 1 {
        return batch.clone();
    }
    let keep = select_survivors(&column_gaps(batch, lp));
    PointBatch {
        x: batch.x.select_columns(&keep),
        y: batch.y.select_columns(&keep),
        rng_seed: batch.rng_seed,
    }
}

/// Convex combination of the batch columns with the given weights.
pub fn convex_combination(batch: &PointBatch, weights: &[f64]) -> PrimalDualIterate {
    assert_eq!(weights.len(), batch.width());
    let combine = |block: &DenseBlock| {
        (0..block.rows())
            .map(|r| {
                weights
                    .iter()
                    .enumerate()
                    .map(|(c, w)| w * block.get(r, c))
                    .sum::<f64>()
            })
            .collect::<Vec<_>>()
    };
    PrimalDualIterate::new(combine(&batch.x), combine(&batch.y))
}

/// Keeps the current columns and appends as many random convex
/// combinations of them. Weights are standard normal draws clipped at
/// zero and normalized to sum to one.
pub fn repopulate(batch: &PointBatch, seed: u64) -> PointBatch {
    let parents = batch.width();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs: Vec<Vec<f64>> = (0..parents).map(|j| batch.x.column(j)).collect();
    let mut ys: Vec<Vec<f64>> = (0..parents).map(|j| batch.y.column(j)).collect();
    for _ in 0..parents {
        let mut weights: Vec<f64> = (0..parents)
            .map(|_| {
                let w: f64 = StandardNormal.sample(&mut rng);
                w.max(0.0)
            })
            .collect();
        let total: f64 = weights.iter().sum();
        if total > 0.0 {
            weights.iter_mut().for_each(|w| *w /= total);
        } else {
            weights.iter_mut().for_each(|w| *w = 1.0 / parents as f64);
        }
        let child = convex_combination(batch, &weights);
        xs.push(child.x);
        ys.push(child.y);
    }
    PointBatch {
        x: DenseBlock::from_columns(batch.x.rows(), &xs),
        y: DenseBlock::from_columns(batch.y.rows(), &ys),
        rng_seed: batch.rng_seed,
    }
}

#[derive(Debug, Clone)]
pub struct FishnetOutcome {
    pub start: PrimalDualIterate,
    /// Population size after casting and after every loop.
    pub trajectory: Vec<usize>,
    /// Absolute duality gap of the returned point.
    pub gap: f64,
    /// Absolute duality gap of the cold start.
    pub origin_gap: f64,
    /// Set when the survivor was worse than the cold start and the cold
    /// start was returned instead.
    pub fell_back_to_origin: bool,
}

/// Runs the fishnet loop and returns a warm start.
pub fn run_fishnet(lp: &PreparedLp, config: &FishnetConfig) -> Result<FishnetOutcome> {
    if config.k == 0 {
        return Err(Error::InvalidInput("fishnet needs k >= 1".into()));
    }
    let mut batch = spectral_cast(lp, config.p, config.seed)?;
    let steps = StepSizes::new(
        0.9 / casting_radius(lp),
        initialize_primal_weight(lp.c(), &lp.q, 1e-6),
    );

    let mut trajectory = vec![batch.width()];
    let mut loop_index = 0u64;
    let mut width = batch.width();
    while width > 1 {
        for _ in 0..config.k {
            batch = batch_pdhg_step(&batch, steps, 1.0, lp);
        }
        if batch.x.data.iter().chain(&batch.y.data).any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure("fishnet batch diverged".into()));
        }
        batch = cull_points(&batch, lp);
        if loop_index % 2 == 1 && width > 2 {
            let seed = config
                .seed
                .wrapping_add(loop_index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
            batch = repopulate(&batch, seed);
        }
        loop_index += 1;
        width = batch.width();
        trajectory.push(width);
    }

    let survivor = batch.point(0);
    let gap = convergence_info(lp, &survivor.x, &survivor.y).gap_abs;
    let origin = PrimalDualIterate::projected_origin(lp);
    let origin_gap = convergence_info(lp, &origin.x, &origin.y).gap_abs;
    let (start, gap, fell_back) = if gap <= origin_gap {
        (survivor, gap, false)
    } else {
        (origin, origin_gap, true)
    };
    Ok(FishnetOutcome {
        start,
        trajectory,
        gap,
        origin_gap,
        fell_back_to_origin: fell_back,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LpProblem;
    use crate::sparse::SparseMatrix;

    fn simple_lp(lower: f64, upper: f64) -> PreparedLp {
        PreparedLp::new(LpProblem {
            name: "f".into(),
            c: vec![1.0, 2.0],
            g: SparseMatrix::from_dense(&[vec![1.0, 1.0]]).unwrap(),
            h: vec![1.0],
            a: SparseMatrix::zeros(0, 2),
            b: vec![],
            lower: vec![lower; 2],
            upper: vec![upper; 2],
            objective_offset: 0.0,
        })
        .unwrap()
    }

    #[test]
    fn cast_sizes_and_determinism() {
        let lp = simple_lp(0.0, 10.0);
        let a = spectral_cast(&lp, 5, 7).unwrap();
        assert_eq!(a.width(), 32);
        assert_eq!(a, spectral_cast(&lp, 5, 7).unwrap());
        assert_ne!(a, spectral_cast(&lp, 5, 8).unwrap());
        assert!(spectral_cast(&lp, 0, 7).is_err());
    }

    #[test]
    fn fixed_variables_pin_every_column() {
        let lp = simple_lp(2.0, 2.0);
        let batch = spectral_cast(&lp, 3, 1).unwrap();
        for j in 0..batch.width() {
            assert_eq!(batch.x.column(j), vec![2.0, 2.0]);
        }
    }

    #[test]
    fn survivors_are_the_better_half() {
        assert_eq!(select_survivors(&[0.5, 0.1, 0.9, 0.2]), vec![1, 3]);
        assert_eq!(select_survivors(&[0.3; 4]), vec![0, 1]);
        assert_eq!(select_survivors(&[0.7, 0.2]), vec![1]);
        assert_eq!(select_survivors(&[0.7, 0.2, 0.1]), vec![1, 2]);
        assert_eq!(select_survivors(&[f64::NAN, 0.2]), vec![1]);
    }

    #[test]
    fn single_column_survives_culling() {
        let lp = simple_lp(0.0, 10.0);
        let batch = PointBatch {
            x: DenseBlock::from_columns(2, &[vec![1.0, 1.0]]),
            y: DenseBlock::from_columns(1, &[vec![0.0]]),
            rng_seed: 0,
        };
        assert_eq!(cull_points(&batch, &lp), batch);
    }

    #[test]
    fn convex_combination_arithmetic() {
        let batch = PointBatch {
            x: DenseBlock::from_columns(1, &[vec![0.0], vec![4.0]]),
            y: DenseBlock::from_columns(1, &[vec![2.0], vec![6.0]]),
            rng_seed: 0,
        };
        let child = convex_combination(&batch, &[0.5, 0.5]);
        assert_eq!(child.x, vec![2.0]);
        assert_eq!(child.y, vec![4.0]);
    }

    #[test]
    fn repopulation_doubles_and_preserves_identical_parents() {
        let col = vec![1.5, -0.5];
        let batch = PointBatch {
            x: DenseBlock::from_columns(2, &vec![col.clone(); 4]),
            y: DenseBlock::from_columns(1, &vec![vec![3.0]; 4]),
            rng_seed: 0,
        };
        let out = repopulate(&batch, 11);
        assert_eq!(out.width(), 8);
        for j in 0..8 {
            for (a, b) in out.x.column(j).iter().zip(&col) {
                assert!((a - b).abs() < 1e-15);
            }
            assert!((out.y.get(0, j) - 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn two_points_take_one_loop() {
        let lp = simple_lp(0.0, 10.0);
        let cfg = FishnetConfig { p: 1, k: 5, seed: 3 };
        let out = run_fishnet(&lp, &cfg).unwrap();
        assert_eq!(out.trajectory, vec![2, 1]);
        let again = run_fishnet(&lp, &cfg).unwrap();
        assert_eq!(out.start, again.start);
    }
}
