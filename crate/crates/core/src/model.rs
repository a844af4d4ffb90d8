//! In-memory linear programs of the form
//!
//! ```text
//! min  c'x   s.t.  Gx >= h,  Ax = b,  l <= x <= u
//! ```
//!
//! Infinite bounds are stored as IEEE infinities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// Finiteness pattern of a variable's bounds.
///
/// Each class fixes the set the reduced cost may live in: `{0}` for free
/// variables, the nonpositive half-line when only the upper bound is
/// finite, the nonnegative half-line when only the lower bound is finite,
/// and the whole line for boxed variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundClass {
    Free,
    UpperOnly,
    LowerOnly,
    Boxed,
}

/// Classifies a pair of bounds. Crossed bounds are a precondition
/// violation and are rejected.
pub fn bound_class(lower: f64, upper: f64) -> Result<BoundClass> {
    if lower.is_nan() || upper.is_nan() || lower > upper {
        return Err(Error::InvalidInput(format!(
            "bounds [{lower}, {upper}] are crossed or NaN"
        )));
    }
    Ok(classify(lower, upper))
}

pub(crate) fn classify(lower: f64, upper: f64) -> BoundClass {
    match (lower.is_finite(), upper.is_finite()) {
        (false, false) => BoundClass::Free,
        (false, true) => BoundClass::UpperOnly,
        (true, false) => BoundClass::LowerOnly,
        (true, true) => BoundClass::Boxed,
    }
}

/// A linear program in inequality/equality/bounds form.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub name: String,
    pub c: Vec<f64>,
    /// Inequality rows, sense `>=`.
    pub g: SparseMatrix,
    pub h: Vec<f64>,
    /// Equality rows.
    pub a: SparseMatrix,
    pub b: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Constant added to reported objective values. Never part of `c`.
    pub objective_offset: f64,
}

impl LpProblem {
    /// Builds a problem and rejects it if [`validate`] reports anything.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        c: Vec<f64>,
        g: SparseMatrix,
        h: Vec<f64>,
        a: SparseMatrix,
        b: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self> {
        let p = LpProblem {
            name: name.into(),
            c,
            g,
            h,
            a,
            b,
            lower,
            upper,
            objective_offset: 0.0,
        };
        let issues = validate(&p);
        if issues.is_empty() {
            Ok(p)
        } else {
            Err(Error::InvalidProblem(issues))
        }
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn num_inequalities(&self) -> usize {
        self.h.len()
    }

    pub fn num_equalities(&self) -> usize {
        self.b.len()
    }

    /// Bound class of every variable. Assumes the problem is valid.
    pub fn bound_classes(&self) -> Vec<BoundClass> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&l, &u)| classify(l, u))
            .collect()
    }

    /// The stacked right-hand side `q = (h; b)`.
    pub fn rhs(&self) -> Vec<f64> {
        let mut q = self.h.clone();
        q.extend_from_slice(&self.b);
        q
    }

    /// The stacked constraint matrix `K = (G; A)`.
    pub fn stacked_matrix(&self) -> Result<SparseMatrix> {
        self.g.vstack(&self.a)
    }
}

/// Lists every invariant violation in `problem`. An empty list means the
/// problem is well formed.
pub fn validate(problem: &LpProblem) -> Vec<String> {
    let mut issues = Vec::new();
    let n = problem.c.len();
    if problem.lower.len() != n {
        issues.push(format!(
            "dimension mismatch c vs l ({} vs {})",
            n,
            problem.lower.len()
        ));
    }
    if problem.upper.len() != n {
        issues.push(format!(
            "dimension mismatch c vs u ({} vs {})",
            n,
            problem.upper.len()
        ));
    }
    if problem.g.ncols() != n {
        issues.push(format!(
            "dimension mismatch c vs G ({} vs {} columns)",
            n,
            problem.g.ncols()
        ));
    }
    if problem.a.ncols() != n {
        issues.push(format!(
            "dimension mismatch c vs A ({} vs {} columns)",
            n,
            problem.a.ncols()
        ));
    }
    if problem.g.nrows() != problem.h.len() {
        issues.push(format!(
            "dimension mismatch G vs h ({} rows vs {})",
            problem.g.nrows(),
            problem.h.len()
        ));
    }
    if problem.a.nrows() != problem.b.len() {
        issues.push(format!(
            "dimension mismatch A vs b ({} rows vs {})",
            problem.a.nrows(),
            problem.b.len()
        ));
    }

    for (name, v) in [("c", &problem.c), ("h", &problem.h), ("b", &problem.b)] {
        if let Some(i) = v.iter().position(|x| !x.is_finite()) {
            issues.push(format!("non-finite value in {name} at index {i}"));
        }
    }
    for (name, m) in [("G", &problem.g), ("A", &problem.a)] {
        if m.triplets().any(|(_, _, v)| !v.is_finite()) {
            issues.push(format!("non-finite entry in {name}"));
        }
    }
    for (i, (&l, &u)) in problem.lower.iter().zip(&problem.upper).enumerate() {
        if l.is_nan() || u.is_nan() {
            issues.push(format!("NaN bound at index {i}"));
        } else if l > u {
            issues.push(format!("bound crossing at index {i}"));
        } else if l == f64::INFINITY || u == f64::NEG_INFINITY {
            issues.push(format!("empty bound interval at index {i}"));
        }
    }
    if !problem.objective_offset.is_finite() {
        issues.push("non-finite objective offset".into());
    }
    issues
}
