//! Convergence table over eps and N for the benchmark problem, printed as
//! markdown.
//!
//! cargo run --release --example convergence_table -- [k]

use layerfem::{convergence_study, StudyConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let k: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(1);
    let mut config = StudyConfig::benchmark_defaults(k);
    // keep the default run short
    config.eps_list = vec![1e-4, 1e-6, 1e-8];
    config.n_list.truncate(4);

    let table = convergence_study(&config)?;
    print!("{}", table.to_markdown());
    Ok(())
}
