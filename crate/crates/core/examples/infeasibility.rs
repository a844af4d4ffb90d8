//! Infeasible and unbounded problems end with a certificate instead of
//! running to the iteration limit.

use pdlp::{solve, LpProblem, SolveStatus, SolverConfig, SparseMatrix};

fn one_row_problem(name: &str, c: Vec<f64>, row: Vec<Vec<f64>>, h: Vec<f64>) -> pdlp::Result<LpProblem> {
    let n = c.len();
    LpProblem::new(
        name,
        c,
        SparseMatrix::from_dense(&row)?,
        h,
        SparseMatrix::zeros(0, n),
        vec![],
        vec![0.0; n],
        vec![f64::INFINITY; n],
    )
}

fn main() -> pdlp::Result<()> {
    // x >= 1 and -x >= 0 cannot both hold.
    let infeasible = one_row_problem("contradiction", vec![1.0], vec![vec![1.0], vec![-1.0]], vec![1.0, 0.0])?;
    // min -x - y with x - y >= 0 decreases without bound along (1, 1).
    let unbounded = one_row_problem("ray", vec![-1.0, -1.0], vec![vec![1.0, -1.0]], vec![0.0])?;

    for p in [&infeasible, &unbounded] {
        let r = solve(p, &SolverConfig::default())?;
        let note = match r.status {
            SolveStatus::PrimalInfeasible => "no x satisfies the constraints",
            SolveStatus::DualInfeasible => "objective is unbounded below",
            _ => "unexpected",
        };
        println!("{:<14} {:<18} after {:>5} iterations: {note}", p.name, r.status, r.iterations);
    }
    Ok(())
}
