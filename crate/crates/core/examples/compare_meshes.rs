//! Energy errors on both mesh families against the reference rates
//! `N^-k` and `N^-k R(N, eps)`, with the fitted grading exponent.
//!
//! cargo run --release --example compare_meshes -- [k] [eps]

use layerfem::analysis::table_sigma;
use layerfem::{compare_meshes, rate_reference, SolveOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let k: usize = args.first().map(|s| s.parse()).transpose()?.unwrap_or(1);
    let eps: f64 = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(1e-8);
    let ns = [8, 16, 32, 64];

    let cmp = compare_meshes("benchmark", k, eps, &ns, Some(table_sigma(k)), &SolveOptions::default())?;
    let refs = rate_reference(k, eps, &ns, cmp.rows[0].bakhvalov);
    println!("{:>5} {:>12} {:>12} {:>12} {:>12}", "N", "bakhvalov", "b-shishkin", "N^-k", "N^-k R");
    for (row, r) in cmp.rows.iter().zip(&refs) {
        println!(
            "{:>5} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}",
            row.n, row.bakhvalov, row.bakhvalov_shishkin, r.optimal, r.with_log_factor
        );
    }
    Ok(())
}
