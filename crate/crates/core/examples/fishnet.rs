//! Fishnet casting: evolve a population of random starts, keep the better
//! half by duality gap, and warm-start the solver from the survivor.

use pdlp::fishnet::{run_fishnet, FishnetConfig};
use pdlp::generate::{random_feasible_lp, GeneratorShape};
use pdlp::{solve, PreparedLp, SolverConfig};

fn main() -> pdlp::Result<()> {
    let shape = GeneratorShape {
        n: 12,
        inequalities: 8,
        equalities: 3,
        density_pct: 40,
    };
    let problem = random_feasible_lp(shape, 3);
    let lp = PreparedLp::new(problem.clone())?;

    for p in 1..=5 {
        let out = run_fishnet(&lp, &FishnetConfig { p, k: 50, seed: 1 })?;
        println!(
            "p = {p}: population {:?}, gap {:.3e} (origin {:.3e}){}",
            out.trajectory,
            out.gap,
            out.origin_gap,
            if out.fell_back_to_origin { ", kept origin" } else { "" }
        );
    }

    let cold = solve(&problem, &SolverConfig::default())?;
    let warm = solve(
        &problem,
        &SolverConfig {
            enable_fishnet: true,
            ..SolverConfig::default()
        },
    )?;
    println!("cold start: {} iterations, {} matvecs", cold.iterations, cold.matvec_count);
    println!("fishnet:    {} iterations, {} matvecs", warm.iterations, warm.matvec_count);
    Ok(())
}
