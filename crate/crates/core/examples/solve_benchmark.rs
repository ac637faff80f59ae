//! Solves the benchmark problem on Bakhvalov-type meshes and prints the
//! error norms for a few mesh sizes. Uses the grading exponent fitted to
//! the reference tables.
//!
//! cargo run --release --example solve_benchmark -- [k] [eps] [N...]

use std::time::Instant;

use layerfem::analysis::table_sigma;
use layerfem::{benchmark_problem, solve_and_measure, MeshPair, MeshVariant, SolveOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let k: usize = args.first().map(|s| s.parse()).transpose()?.unwrap_or(1);
    let eps: f64 = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(1e-8);
    let ns: Vec<usize> = if args.len() > 2 {
        args[2..].iter().map(|s| s.parse()).collect::<Result<_, _>>()?
    } else {
        vec![8, 16, 32, 64]
    };

    let problem = benchmark_problem(eps)?;
    println!("k = {k}, eps = {eps:e}");
    println!("{:>5} {:>12} {:>12} {:>12} {:>8} {:>10} {:>8}", "N", "energy", "L2", "H1-semi", "iters", "residual", "secs");
    for n in ns {
        let t = Instant::now();
        let meshes = MeshPair::for_problem(&problem, n, k, MeshVariant::BakhvalovType, Some(table_sigma(k)));
        let r = solve_and_measure(&problem, &meshes, k, &SolveOptions::default())?;
        println!(
            "{:>5} {:>12.4e} {:>12.4e} {:>12.4e} {:>8} {:>10.2e} {:>8.2}",
            n,
            r.energy,
            r.l2,
            r.h1_semi,
            r.solver.iterations,
            r.solver.residual,
            t.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
