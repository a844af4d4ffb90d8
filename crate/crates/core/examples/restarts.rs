//! Trace restart decisions through an observer and compare with a run
//! that never restarts.

use pdlp::solver::{CheckEvent, SolveObserver};
use pdlp::generate::{random_feasible_lp, GeneratorShape};
use pdlp::{solve, Solver, SolverConfig};

struct Trace;

impl SolveObserver for Trace {
    fn on_check(&mut self, e: &CheckEvent) {
        let avg = e.kkt_average.map_or("-".to_string(), |v| format!("{v:.3e}"));
        let restart = e.restart.map_or(String::new(), |r| format!("  restart ({r:?})"));
        println!(
            "{:>6}  kkt {:.3e}  avg {avg:>9}  omega {:.3}{restart}",
            e.iteration, e.kkt_current, e.omega
        );
    }
}

fn main() -> pdlp::Result<()> {
    let shape = GeneratorShape {
        n: 15,
        inequalities: 10,
        equalities: 4,
        density_pct: 40,
    };
    let problem = random_feasible_lp(shape, 11);
    let cfg = SolverConfig {
        check_interval: 50,
        enable_primal_weight_updates: true,
        ..SolverConfig::default()
    };

    let mut trace = Trace;
    let restarted = Solver::new(cfg.clone()).observer(&mut trace).solve(&problem)?;
    let plain = solve(
        &problem,
        &SolverConfig {
            enable_restarts: false,
            ..cfg
        },
    )?;
    println!(
        "with restarts: {} iterations ({} restarts); without: {} iterations",
        restarted.iterations, restarted.restarts, plain.iterations
    );
    Ok(())
}
