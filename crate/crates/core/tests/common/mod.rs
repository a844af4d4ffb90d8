//! Shared oracles and instance suites for the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use pdlp::generate::{random_feasible_lp, GeneratorShape};
use pdlp::mps::read_mps_file;
use pdlp::LpProblem;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures/mps")
        .join(name)
}

pub fn load(name: &str) -> LpProblem {
    read_mps_file(fixture(name))
        .unwrap_or_else(|e| panic!("{name}: {e}"))
        .problem
}

/// Fixtures with a finite optimum and the hand-derived optimal value
/// (objective constant included).
pub const OPTIMAL_FIXTURES: [(&str, f64); 13] = [
    ("tiny.mps", 1.0),
    ("production.mps", -36.0),
    ("diet.mps", 2.25),
    ("degenerate.mps", -2.0),
    ("ranges.mps", 2.5),
    ("bounds.mps", -9.5),
    ("negative_up.mps", -3.0),
    ("fx_conflict.mps", 5.0),
    ("objconst.mps", 6.0),
    ("transport.mps", 465.0),
    ("blend_free.mps", 21.9),
    ("equality_mix.mps", -2.0),
    ("multi_set.mps", 2.0),
];

/// Shape of the `i`-th instance of the random suite.
pub fn suite_shape(i: u64) -> GeneratorShape {
    let n = 2 + (i % 5) as usize;
    GeneratorShape {
        n,
        inequalities: 1 + ((i * 7) % 6) as usize,
        equalities: ((i * 3) % 3) as usize % n,
        density_pct: 60,
    }
}

/// Random bounded feasible instances, `count` of them from `seed0`.
pub fn random_suite(seed0: u64, count: u64) -> Vec<LpProblem> {
    (0..count)
        .map(|i| random_feasible_lp(suite_shape(i), seed0 + i))
        .collect()
}

fn combinations(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f);
}

/// Minimum of `c'x + offset` over all vertices of the feasible set, by
/// solving every square system of active constraints. Returns `None` when
/// no vertex is feasible. Only meaningful for pointed, bounded problems.
pub fn vertex_enumeration(p: &LpProblem) -> Option<(f64, Vec<f64>)> {
    let n = p.c.len();
    let g = p.g.to_dense();
    let a = p.a.to_dense();
    // Inequalities as (row, rhs) meaning row'x >= rhs.
    let mut ineq: Vec<(Vec<f64>, f64)> = g.iter().cloned().zip(p.h.iter().copied()).collect();
    for i in 0..n {
        let mut e = vec![0.0; n];
        if p.lower[i].is_finite() {
            e[i] = 1.0;
            ineq.push((e.clone(), p.lower[i]));
        }
        if p.upper[i].is_finite() {
            e[i] = -1.0;
            ineq.push((e, -p.upper[i]));
        }
    }
    let m2 = a.len();
    if m2 > n {
        return None;
    }
    let feasible = |x: &[f64]| {
        let dot = |r: &[f64]| r.iter().zip(x).map(|(u, v)| u * v).sum::<f64>();
        ineq.iter().all(|(r, h)| dot(r) >= h - 1e-9 * (1.0 + h.abs()))
            && a.iter()
                .zip(&p.b)
                .all(|(r, b)| (dot(r) - b).abs() <= 1e-9 * (1.0 + b.abs()))
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    combinations(ineq.len(), n - m2, &mut |subset| {
        let mut mat = DMatrix::<f64>::zeros(n, n);
        let mut rhs = DVector::<f64>::zeros(n);
        for (r, row) in a.iter().enumerate() {
            for j in 0..n {
                mat[(r, j)] = row[j];
            }
            rhs[r] = p.b[r];
        }
        for (k, &s) in subset.iter().enumerate() {
            for j in 0..n {
                mat[(m2 + k, j)] = ineq[s].0[j];
            }
            rhs[m2 + k] = ineq[s].1;
        }
        let lu = mat.lu();
        if lu.determinant().abs() < 1e-10 {
            return;
        }
        let Some(x) = lu.solve(&rhs) else { return };
        let x: Vec<f64> = x.iter().copied().collect();
        if !feasible(&x) {
            return;
        }
        let obj = p.c.iter().zip(&x).map(|(c, v)| c * v).sum::<f64>() + p.objective_offset;
        if best.as_ref().is_none_or(|(b, _)| obj < *b) {
            best = Some((obj, x));
        }
    });
    best
}

/// Largest singular value by dense SVD.
pub fn dense_spectral_norm(rows: &[Vec<f64>]) -> f64 {
    let singular = dense_singular_values(rows);
    singular[0]
}

/// Singular values in decreasing order.
pub fn dense_singular_values(rows: &[Vec<f64>]) -> Vec<f64> {
    let m = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    let mat = DMatrix::from_fn(m, n, |i, j| rows[i][j]);
    let mut s: Vec<f64> = mat.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Independent re-evaluation of the relative termination test on the
/// original data: objectives, residuals and reduced costs are recomputed
/// densely from `(x, y)`.
pub fn independently_optimal(p: &LpProblem, x: &[f64], y: &[f64], eps: f64) -> bool {
    let n = p.c.len();
    let g = p.g.to_dense();
    let a = p.a.to_dense();
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    let m1 = g.len();
    let mut primal_sq = 0.0;
    for (r, h) in g.iter().zip(&p.h) {
        let v = (h - dot(r, x)).max(0.0);
        primal_sq += v * v;
    }
    for (r, b) in a.iter().zip(&p.b) {
        let v = dot(r, x) - b;
        primal_sq += v * v;
    }
    let mut reduced = p.c.clone();
    for (j, r) in g.iter().chain(a.iter()).enumerate() {
        for i in 0..n {
            reduced[i] -= r[i] * y[j];
        }
    }
    let mut dual_sq = 0.0;
    let mut bound_term = 0.0;
    for (i, &w) in reduced.iter().enumerate() {
        let (l, u) = (p.lower[i], p.upper[i]);
        let lam = match (l.is_finite(), u.is_finite()) {
            (false, false) => 0.0,
            (false, true) => w.min(0.0),
            (true, false) => w.max(0.0),
            (true, true) => w,
        };
        dual_sq += (w - lam) * (w - lam);
        if lam > 0.0 {
            bound_term += l * lam;
        } else if lam < 0.0 {
            bound_term += u * lam;
        }
    }
    let q: Vec<f64> = p.h.iter().chain(&p.b).copied().collect();
    let dual_cone_ok = y[..m1].iter().all(|&v| v >= 0.0);
    let primal_obj = dot(&p.c, x);
    let dual_obj = dot(&q, y) + bound_term;
    let q_norm = dot(&q, &q).sqrt();
    let c_norm = dot(&p.c, &p.c).sqrt();
    let in_box = x
        .iter()
        .zip(p.lower.iter().zip(&p.upper))
        .all(|(v, (l, u))| *v >= *l && *v <= *u);
    in_box
        && dual_cone_ok
        && (dual_obj - primal_obj).abs() <= eps * (1.0 + dual_obj.abs() + primal_obj.abs())
        && primal_sq.sqrt() <= eps * (1.0 + q_norm)
        && dual_sq.sqrt() <= eps * (1.0 + c_norm)
}
