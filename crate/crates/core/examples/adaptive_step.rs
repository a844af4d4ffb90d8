//! The adaptive step size next to the fixed 0.9/||K|| step.

use pdlp::solver::{SolveObserver, StepEvent};
use pdlp::generate::{random_feasible_lp, GeneratorShape};
use pdlp::{PreparedLp, Solver, SolverConfig};
use pdlp::pdhg::StepSizes;

#[derive(Default)]
struct Steps {
    initial: f64,
    etas: Vec<f64>,
}

impl SolveObserver for Steps {
    fn on_start(&mut self, _scaled: &PreparedLp, steps: StepSizes) {
        self.initial = steps.eta;
    }

    fn on_step(&mut self, e: &StepEvent<'_>) {
        self.etas.push(e.eta);
    }
}

fn main() -> pdlp::Result<()> {
    let shape = GeneratorShape {
        n: 20,
        inequalities: 12,
        equalities: 5,
        density_pct: 30,
    };
    let problem = random_feasible_lp(shape, 5);
    for adaptive in [false, true] {
        let cfg = SolverConfig {
            enable_adaptive_step: adaptive,
            ..SolverConfig::default()
        };
        let mut steps = Steps::default();
        let r = Solver::new(cfg).observer(&mut steps).solve(&problem)?;
        let max = steps.etas.iter().copied().fold(0.0, f64::max);
        let mean = steps.etas.iter().sum::<f64>() / steps.etas.len().max(1) as f64;
        println!(
            "adaptive={adaptive:<5} {}: {} iterations, {} matvecs, eta start {:.4} mean {:.4} max {:.4}",
            r.status, r.iterations, r.matvec_count, steps.initial, mean, max
        );
    }
    Ok(())
}
