//! Watch Ruiz equilibration pull row and column norms of a badly scaled
//! matrix towards one.

use pdlp::generate::random_badly_scaled_matrix;
use pdlp::linalg::StackedK;
use pdlp::scaling::ruiz_equilibrate;

fn spread(norms: &[f64]) -> (f64, f64) {
    norms
        .iter()
        .filter(|v| **v > 0.0)
        .fold((f64::INFINITY, 0.0), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

fn main() -> pdlp::Result<()> {
    let m = random_badly_scaled_matrix(40, 30, 15, 7);
    println!("rounds  row norms            col norms");
    for rounds in [1, 2, 4, 8, 16, 32] {
        let k = StackedK::from_matrix(m.clone(), m.nrows());
        let s = ruiz_equilibrate(&k, rounds, 1e-6)?;
        let scaled = m.scale(&s.row_factors(), &s.col_factors());
        let (rl, rh) = spread(&scaled.row_inf_norms());
        let (cl, ch) = spread(&scaled.col_inf_norms());
        println!(
            "{:>6}  [{rl:.4}, {rh:.4}]  [{cl:.4}, {ch:.4}]  (stopped after {})",
            rounds, s.iterations_used
        );
    }
    let (rl, rh) = spread(&m.row_inf_norms());
    println!("unscaled row norms span [{rl:.2e}, {rh:.2e}]");
    Ok(())
}
