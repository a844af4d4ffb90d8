use crate::error::{Error, Result};
use crate::linalg::{norm2, StackedK};
use crate::model::{validate, BoundClass, LpProblem};

/// A validated problem with the derived data every iteration needs:
/// the stacked matrix, the stacked right-hand side and the bound classes.
#[derive(Debug, Clone)]
pub struct PreparedLp {
    pub problem: LpProblem,
    pub k: StackedK,
    pub q: Vec<f64>,
    pub classes: Vec<BoundClass>,
    pub c_norm: f64,
    pub q_norm: f64,
}

impl PreparedLp {
    pub fn new(problem: LpProblem) -> Result<Self> {
        let issues = validate(&problem);
        if !issues.is_empty() {
            return Err(Error::InvalidProblem(issues));
        }
        let k = StackedK::from_problem(&problem)?;
        let q = problem.rhs();
        let classes = problem.bound_classes();
        let c_norm = norm2(&problem.c);
        let q_norm = norm2(&q);
        Ok(PreparedLp {
            problem,
            k,
            q,
            classes,
            c_norm,
            q_norm,
        })
    }

    pub fn n(&self) -> usize {
        self.problem.num_vars()
    }

    pub fn m1(&self) -> usize {
        self.k.m1()
    }

    /// Total constraint rows `m1 + m2`.
    pub fn m(&self) -> usize {
        self.k.nrows()
    }

    pub fn lower(&self) -> &[f64] {
        &self.problem.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.problem.upper
    }

    pub fn c(&self) -> &[f64] {
        &self.problem.c
    }
}
