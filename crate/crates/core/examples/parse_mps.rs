//! Parse an MPS file and print what the standard form looks like.
//!
//!     cargo run --example parse_mps [-- file.mps]

use std::path::PathBuf;

use pdlp::mps::{parse_mps, to_standard_form};

fn main() -> pdlp::Result<()> {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/mps/ranges.mps")
    });
    let text = std::fs::read_to_string(&path)?;
    let model = parse_mps(&text)?;
    println!(
        "{} ({:?} format): {} rows, {} columns, objective row '{}'",
        model.name,
        model.dialect,
        model.rows.len(),
        model.columns.len(),
        model.objective_name()
    );

    let form = to_standard_form(&model)?;
    let p = &form.problem;
    println!(
        "standard form: n = {}, {} inequality rows ({} nnz), {} equality rows ({} nnz)",
        p.num_vars(),
        p.num_inequalities(),
        p.g.nnz(),
        p.num_equalities(),
        p.a.nnz()
    );
    for (k, &row) in form.g_rows.iter().enumerate() {
        println!("  G[{k}] from {:<8} h = {}", model.rows[row].name, p.h[k]);
    }
    for (k, &row) in form.a_rows.iter().enumerate() {
        println!("  A[{k}] from {:<8} b = {}", model.rows[row].name, p.b[k]);
    }
    for (name, (l, u)) in model.columns.iter().zip(p.lower.iter().zip(&p.upper)) {
        println!("  {name:<8} in [{l}, {u}]");
    }
    for w in &form.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
