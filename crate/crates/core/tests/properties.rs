mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::dense_spectral_norm;
use pdlp::fishnet::{batch_pdhg_step, run_fishnet, spectral_cast, FishnetConfig};
use pdlp::kkt::{check_termination, convergence_info, kkt_error, ConvergenceInfo};
use pdlp::linalg::{
    norm2, proj_box, proj_dual_cone, proj_lambda, spectral_norm_estimate, StackedK,
};
use pdlp::model::{bound_class, validate};
use pdlp::pdhg::{pdhg_step, PrimalDualIterate, StepSizes};
use pdlp::restart::primal_weight_update;
use pdlp::scaling::{apply_scaling, ruiz_equilibrate, unscale_iterate};
use pdlp::{BoundClass, LpProblem, PreparedLp, SparseMatrix};

/// A problem together with a feasible primal point and a dual point whose
/// reduced costs lie exactly in the cone allowed by the bounds.
struct Pair {
    problem: LpProblem,
    x: Vec<f64>,
    y: Vec<f64>,
}

fn bounds_for(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let lo = rng.random_range(-3.0..3.0);
    match rng.random_range(0..5) {
        0 => (f64::NEG_INFINITY, f64::INFINITY),
        1 => (f64::NEG_INFINITY, lo),
        2 => (lo, f64::INFINITY),
        3 => (lo, lo),
        _ => (lo, lo + rng.random_range(0.1..4.0)),
    }
}

fn random_pair(n: usize, m1: usize, m2: usize, seed: u64) -> Pair {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut lower, mut upper, mut x) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..n {
        let (l, u) = bounds_for(&mut rng);
        let lo = if l.is_finite() { l } else { u.min(0.0) - 2.0 };
        let hi = if u.is_finite() { u } else { lo + 4.0 };
        x.push(if lo == hi { lo } else { rng.random_range(lo..=hi) });
        lower.push(l);
        upper.push(u);
    }
    let triplets = |rows: usize, rng: &mut ChaCha8Rng| {
        let mut t = Vec::new();
        for r in 0..rows {
            for c in 0..n {
                if rng.random_bool(0.6) {
                    t.push((r, c, rng.random_range(-2.0..2.0)));
                }
            }
        }
        SparseMatrix::from_triplets(rows, n, &t).unwrap()
    };
    let g = triplets(m1, &mut rng);
    let a = triplets(m2, &mut rng);
    let h: Vec<f64> = g
        .mul_vec(&x)
        .iter()
        .map(|v| v - rng.random_range(0.0..1.0))
        .collect();
    let b = a.mul_vec(&x);
    let y: Vec<f64> = (0..m1 + m2)
        .map(|j| {
            let v: f64 = rng.random_range(-2.0..2.0);
            if j < m1 {
                v.abs()
            } else {
                v
            }
        })
        .collect();
    let k = g.vstack(&a).unwrap();
    let kty = k.transpose().mul_vec(&y);
    let c = (0..n)
        .map(|i| {
            let v = rng.random_range(0.0..2.0);
            let lambda = match (lower[i].is_finite(), upper[i].is_finite()) {
                (false, false) => 0.0,
                (false, true) => -v,
                (true, false) => v,
                (true, true) => v - 1.0,
            };
            kty[i] + lambda
        })
        .collect();
    Pair {
        problem: LpProblem::new("pair", c, g, h, a, b, lower, upper).unwrap(),
        x,
        y,
    }
}

fn dims() -> impl Strategy<Value = (usize, usize, usize, u64)> {
    (1usize..7, 0usize..6, 0usize..3, any::<u64>())
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt()
}

proptest! {
    #[test]
    fn box_projection_is_idempotent_and_nonexpansive(
        (n, _, _, seed) in dims(),
        a in prop::collection::vec(-10.0..10.0f64, 6),
        b in prop::collection::vec(-10.0..10.0f64, 6),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lower, upper): (Vec<f64>, Vec<f64>) = (0..n).map(|_| bounds_for(&mut rng)).unzip();
        let (a, b) = (&a[..n], &b[..n]);
        let pa = proj_box(a, &lower, &upper);
        prop_assert_eq!(&proj_box(&pa, &lower, &upper), &pa);
        prop_assert!(dist(&pa, &proj_box(b, &lower, &upper)) <= dist(a, b) + 1e-12);
    }

    #[test]
    fn cone_projections_are_idempotent_and_nonexpansive(
        a in prop::collection::vec(-10.0..10.0f64, 8),
        b in prop::collection::vec(-10.0..10.0f64, 8),
        m1 in 0usize..=8,
        classes in prop::collection::vec(0u8..4, 8),
    ) {
        let pa = proj_dual_cone(&a, m1);
        prop_assert_eq!(&proj_dual_cone(&pa, m1), &pa);
        prop_assert!(dist(&pa, &proj_dual_cone(&b, m1)) <= dist(&a, &b) + 1e-12);

        let classes: Vec<BoundClass> = classes
            .iter()
            .map(|c| [BoundClass::Free, BoundClass::UpperOnly, BoundClass::LowerOnly, BoundClass::Boxed][*c as usize])
            .collect();
        let la = proj_lambda(&a, &classes);
        prop_assert_eq!(&proj_lambda(&la, &classes), &la);
        prop_assert!(dist(&la, &proj_lambda(&b, &classes)) <= dist(&a, &b) + 1e-12);
    }

    #[test]
    fn bound_class_follows_finiteness(lo in -5.0..5.0f64, width in 0.0..5.0f64, pattern in 0u8..4) {
        let l = if pattern & 1 == 0 { lo } else { f64::NEG_INFINITY };
        let u = if pattern & 2 == 0 { lo + width } else { f64::INFINITY };
        let expected = match (l.is_finite(), u.is_finite()) {
            (false, false) => BoundClass::Free,
            (false, true) => BoundClass::UpperOnly,
            (true, false) => BoundClass::LowerOnly,
            (true, true) => BoundClass::Boxed,
        };
        prop_assert_eq!(bound_class(l, u).unwrap(), expected);
        prop_assert_eq!(bound_class(l, u).unwrap(), bound_class(l, u).unwrap());
        if width > 0.0 && l.is_finite() && u.is_finite() {
            prop_assert!(bound_class(u, l).is_err());
        }
    }

    #[test]
    fn valid_problems_stack((n, m1, m2, seed) in dims()) {
        let p = random_pair(n, m1, m2, seed).problem;
        prop_assert!(validate(&p).is_empty());
        let k = p.stacked_matrix().unwrap();
        prop_assert_eq!(k.nrows(), m1 + m2);
        prop_assert_eq!(k.ncols(), n);
    }

    #[test]
    fn products_match_dense_oracle(
        rows in 1usize..100,
        cols in 1usize..100,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dense: Vec<Vec<f64>> = (0..rows)
            .map(|_| (0..cols).map(|_| if rng.random_bool(0.2) { rng.random_range(-5.0..5.0) } else { 0.0 }).collect())
            .collect();
        let k = StackedK::from_matrix(SparseMatrix::from_dense(&dense).unwrap(), rows);
        let v: Vec<f64> = (0..cols).map(|_| rng.random_range(-1.0..1.0)).collect();
        let w: Vec<f64> = (0..rows).map(|_| rng.random_range(-1.0..1.0)).collect();
        let kv = k.apply(&v, false).unwrap();
        let ktw = k.apply(&w, true).unwrap();
        for r in 0..rows {
            let want: f64 = (0..cols).map(|c| dense[r][c] * v[c]).sum();
            prop_assert!((kv[r] - want).abs() <= 1e-12);
        }
        for c in 0..cols {
            let want: f64 = (0..rows).map(|r| dense[r][c] * w[r]).sum();
            prop_assert!((ktw[c] - want).abs() <= 1e-12);
        }
    }

    #[test]
    fn power_iteration_never_overestimates((n, m1, m2, seed) in dims()) {
        let p = random_pair(n, m1.max(1), m2, seed).problem;
        let k = StackedK::from_problem(&p).unwrap();
        let est = spectral_norm_estimate(&k, 20).unwrap();
        let exact = dense_spectral_norm(&k.matrix().to_dense());
        prop_assert!(est.value <= exact + 1e-6);
        // Power iterates never lose ground on the all-ones start.
        let ones = vec![1.0 / (n as f64).sqrt(); n];
        prop_assert!(est.degenerate || est.value + 1e-12 >= norm2(&k.apply(&ones, false).unwrap()));
    }

    #[test]
    fn scaling_round_trip_and_objective((n, m1, m2, seed) in dims()) {
        let pair = random_pair(n, m1, m2, seed);
        let p = &pair.problem;
        let k = StackedK::from_problem(p).unwrap();
        let s = ruiz_equilibrate(&k, 10, 1e-4).unwrap();
        let (sx, sy) = s.scale_iterate(&pair.x, &pair.y);
        let (ux, uy) = unscale_iterate(&sx, &sy, &s);
        for (a, b) in ux.iter().chain(&uy).zip(pair.x.iter().chain(&pair.y)) {
            prop_assert!((a - b).abs() <= 1e-14 * (1.0 + b.abs()));
        }
        let scaled = apply_scaling(p, &s);
        let obj: f64 = p.c.iter().zip(&pair.x).map(|(a, b)| a * b).sum();
        let sobj: f64 = scaled.c.iter().zip(&sx).map(|(a, b)| a * b).sum();
        prop_assert!((obj - sobj).abs() <= 1e-12 * (1.0 + obj.abs()));
        let slp = PreparedLp::new(scaled).unwrap();
        let info = convergence_info(&slp, &sx, &sy);
        prop_assert!(info.primal_residual_norm <= 1e-10);
    }

    #[test]
    fn weak_duality_on_feasible_pairs((n, m1, m2, seed) in dims()) {
        let pair = random_pair(n, m1, m2, seed);
        let lp = PreparedLp::new(pair.problem).unwrap();
        let info = convergence_info(&lp, &pair.x, &pair.y);
        prop_assert!(info.primal_residual_norm <= 1e-10);
        prop_assert!(info.dual_residual_norm <= 1e-10);
        let scale = 1.0 + info.primal_objective.abs() + info.dual_objective.abs();
        prop_assert!(info.dual_objective <= info.primal_objective + 1e-10 * scale);
    }

    #[test]
    fn zero_kkt_error_iff_every_tolerance_passes(
        parts in prop::collection::vec(prop_oneof![Just(0.0), 1e-3..10.0f64], 3),
        objective in -10.0..10.0f64,
        omega in 0.1..10.0f64,
    ) {
        let info = ConvergenceInfo {
            lambda: vec![],
            primal_objective: objective,
            dual_objective: objective + parts[0],
            gap_abs: parts[0],
            primal_residual_norm: parts[1],
            dual_residual_norm: parts[2],
        };
        let zero = kkt_error(&info, omega).unwrap() == 0.0;
        let passes_tiny = check_termination(&info, 1.0, 1.0, 1e-12);
        prop_assert_eq!(zero, passes_tiny);
        if zero {
            prop_assert!(check_termination(&info, 1.0, 1.0, 1e-300));
        }
    }

    #[test]
    fn infinite_bounds_give_finite_metrics(
        (n, m1, m2, seed) in dims(),
        shift in -50.0..50.0f64,
    ) {
        let pair = random_pair(n, m1, m2, seed);
        let lp = PreparedLp::new(pair.problem).unwrap();
        let x = proj_box(&pair.x.iter().map(|v| v + shift).collect::<Vec<_>>(), lp.lower(), lp.upper());
        let y: Vec<f64> = pair.y.iter().map(|v| v - shift).collect();
        let info = convergence_info(&lp, &x, &y);
        prop_assert!(info.primal_objective.is_finite() && info.dual_objective.is_finite());
        prop_assert!(info.primal_residual_norm.is_finite() && info.dual_residual_norm.is_finite());
        for (l, class) in info.lambda.iter().zip(&lp.classes) {
            match class {
                BoundClass::Free => prop_assert_eq!(*l, 0.0),
                BoundClass::LowerOnly => prop_assert!(*l >= 0.0),
                BoundClass::UpperOnly => prop_assert!(*l <= 0.0),
                BoundClass::Boxed => {}
            }
        }
    }

    #[test]
    fn steps_stay_feasible(
        (n, m1, m2, seed) in dims(),
        eta in 0.01..2.0f64,
        omega in 0.1..10.0f64,
        theta in 0.0..=1.0f64,
    ) {
        let pair = random_pair(n, m1, m2, seed);
        let lp = PreparedLp::new(pair.problem).unwrap();
        let mut z = PrimalDualIterate::new(vec![3.0; n], vec![-1.0; m1 + m2]);
        for _ in 0..5 {
            z = pdhg_step(&z, StepSizes::new(eta, omega), theta, &lp);
            for ((v, l), u) in z.x.iter().zip(lp.lower()).zip(lp.upper()) {
                prop_assert!(*v >= *l && *v <= *u);
            }
            prop_assert!(z.y[..m1].iter().all(|v| *v >= 0.0));
        }
    }

    #[test]
    fn primal_weight_depends_only_on_the_ratio(
        dx in prop::collection::vec(-5.0..5.0f64, 3),
        dy in prop::collection::vec(-5.0..5.0f64, 4),
        k in 0.01..100.0f64,
        omega in 0.01..100.0f64,
    ) {
        prop_assume!(norm2(&dx) > 1e-3 && norm2(&dy) > 1e-3);
        let zx = vec![0.0; 3];
        let zy = vec![0.0; 4];
        let kx: Vec<f64> = dx.iter().map(|v| v * k).collect();
        let ky: Vec<f64> = dy.iter().map(|v| v * k).collect();
        let a = primal_weight_update(&dx, &zx, &dy, &zy, omega, 1e-6);
        let b = primal_weight_update(&kx, &zx, &ky, &zy, omega, 1e-6);
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn batched_step_matches_columns(
        (n, m1, m2, seed) in dims(),
        p in 1u32..5,
        theta in 0.0..=1.0f64,
    ) {
        let pair = random_pair(n, m1, m2, seed);
        let lp = PreparedLp::new(pair.problem).unwrap();
        let batch = spectral_cast(&lp, p, seed).unwrap();
        let steps = StepSizes::new(0.1, 0.7);
        let stepped = batch_pdhg_step(&batch, steps, theta, &lp);
        prop_assert_eq!(stepped.x.cols(), stepped.y.cols());
        for j in 0..batch.width() {
            let want = pdhg_step(&batch.point(j), steps, theta, &lp);
            let got = stepped.point(j);
            for (a, b) in got.x.iter().chain(&got.y).zip(want.x.iter().chain(&want.y)) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
            for ((v, l), u) in got.x.iter().zip(lp.lower()).zip(lp.upper()) {
                prop_assert!(*v >= *l && *v <= *u);
            }
        }
    }

    #[test]
    fn fishnet_start_is_feasible_and_no_worse((n, m1, m2, seed) in dims(), p in 1u32..5) {
        let pair = random_pair(n, m1, m2, seed);
        let lp = PreparedLp::new(pair.problem).unwrap();
        let out = run_fishnet(&lp, &FishnetConfig { p, k: 10, seed }).unwrap();
        for ((v, l), u) in out.start.x.iter().zip(lp.lower()).zip(lp.upper()) {
            prop_assert!(*v >= *l && *v <= *u);
        }
        prop_assert!(out.start.y[..m1].iter().all(|v| *v >= 0.0));
        prop_assert!(out.gap <= out.origin_gap);
        prop_assert_eq!(*out.trajectory.last().unwrap(), 1);
    }
}
