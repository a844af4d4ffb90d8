//! Iterations needed by plain PDHG for different extrapolation weights.

use pdlp::generate::{random_feasible_lp, GeneratorShape};
use pdlp::{solve, SolveStatus, SolverConfig};

fn main() -> pdlp::Result<()> {
    let suite: Vec<_> = (0..10u64)
        .map(|i| {
            let shape = GeneratorShape {
                n: 3 + (i % 4) as usize,
                inequalities: 2 + (i % 3) as usize,
                equalities: (i % 2) as usize,
                density_pct: 60,
            };
            random_feasible_lp(shape, 100 + i)
        })
        .collect();

    for theta in [1.0, 0.75, 0.5, 0.25, 0.1] {
        let cfg = SolverConfig {
            theta,
            ..SolverConfig::baseline()
        };
        let mut total = 0;
        let mut solved = 0;
        for p in &suite {
            let r = solve(p, &cfg)?;
            total += r.iterations;
            solved += usize::from(r.status == SolveStatus::Optimal);
        }
        println!(
            "theta {theta:<4}: mean {:>7.1} iterations, {solved}/{} optimal",
            total as f64 / suite.len() as f64,
            suite.len()
        );
    }
    Ok(())
}
