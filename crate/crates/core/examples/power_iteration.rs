//! Convergence of the power-iteration estimate of the spectral norm.

use pdlp::generate::{random_feasible_lp, GeneratorShape};
use pdlp::linalg::{spectral_norm_estimate, StackedK};

fn main() -> pdlp::Result<()> {
    let shape = GeneratorShape {
        n: 40,
        inequalities: 30,
        equalities: 10,
        density_pct: 20,
    };
    let problem = random_feasible_lp(shape, 42);
    let k = StackedK::from_problem(&problem)?;
    let reference = spectral_norm_estimate(&k, 500)?.value;
    for rounds in [1, 2, 5, 10, 20, 50] {
        let est = spectral_norm_estimate(&k, rounds)?;
        println!(
            "{rounds:>3} rounds: {:.8}  rel. gap to 500 rounds {:.2e}",
            est.value,
            (reference - est.value) / reference
        );
    }
    println!("products with K or K' so far: {}", k.product_count());
    Ok(())
}
