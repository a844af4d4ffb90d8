use std::io::{stderr, stdout};

fn main() {
    if let Ok(threads) = std::env::var("PDLP_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => eprintln!("warning: ignoring PDLP_THREADS={threads}"),
        }
    }
    let code = pdlp::cli::main_with_args(std::env::args_os(), &mut stdout(), &mut stderr());
    std::process::exit(code);
}
