//! Solve a small production-planning LP built in code, or an MPS file
//! given on the command line.
//!
//!     cargo run --example solve_lp [-- path/to/model.mps]

use pdlp::mps::read_mps_file;
use pdlp::{solve, LpProblem, SolverConfig, SparseMatrix};

fn production_plan() -> pdlp::Result<LpProblem> {
    // max 3 doors + 5 windows, written as a minimization with >= rows:
    //   -doors            >= -4
    //   -2 windows        >= -12
    //   -3 doors - 2 win  >= -18
    let g = SparseMatrix::from_dense(&[
        vec![-1.0, 0.0],
        vec![0.0, -2.0],
        vec![-3.0, -2.0],
    ])?;
    LpProblem::new(
        "production",
        vec![-3.0, -5.0],
        g,
        vec![-4.0, -12.0, -18.0],
        SparseMatrix::zeros(0, 2),
        vec![],
        vec![0.0, 0.0],
        vec![f64::INFINITY, f64::INFINITY],
    )
}

fn main() -> pdlp::Result<()> {
    let problem = match std::env::args().nth(1) {
        Some(path) => read_mps_file(path)?.problem,
        None => production_plan()?,
    };
    let result = solve(&problem, &SolverConfig::default())?;

    println!("{}: {}", problem.name, result.status);
    println!("objective {:.6}  (dual {:.6})", result.primal_objective, result.dual_objective);
    println!("x = {:?}", result.x);
    println!(
        "{} iterations, {} restarts, {} matvecs",
        result.iterations, result.restarts, result.matvec_count
    );
    Ok(())
}
