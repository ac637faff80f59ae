//! Prints a Bakhvalov-type and a Bakhvalov–Shishkin mesh side by side and
//! runs the width checks on both. The checks are stated for the
//! Bakhvalov-type mesh; on the other family they are informational.
//!
//! cargo run --example mesh_grading -- [N] [eps]

use layerfem::mesh::{build_1d, verify_mesh_properties};
use layerfem::MeshConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map(|s| s.parse()).transpose()?.unwrap_or(16);
    let eps: f64 = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(1e-6);
    let k = 1;

    let b_cfg = MeshConfig::bakhvalov(n, eps, k, 2.0);
    let bs_cfg = MeshConfig::bakhvalov_shishkin(n, eps, k, 2.0);
    let b = build_1d(&b_cfg, k)?;
    let bs = build_1d(&bs_cfg, k)?;

    println!("{:>4} {:>14} {:>14}", "i", "bakhvalov", "b-shishkin");
    for i in 0..=n {
        println!("{:>4} {:>14.6e} {:>14.6e}", i, b.points()[i], bs.points()[i]);
    }

    for (name, mesh, cfg) in [("bakhvalov", &b, &b_cfg), ("b-shishkin", &bs, &bs_cfg)] {
        let report = verify_mesh_properties(mesh, cfg);
        println!("\n{name}: {} checks, all passed = {}", report.checks.len(), report.all_passed());
        for c in &report.checks {
            println!("  {:<28} {:>12.4e}  [{:.3e}, {:.3e}] {}", c.name, c.value, c.lower, c.upper, if c.passed { "ok" } else { "FAIL" });
        }
        for r in &report.ratios {
            println!("  ratio {:<22} {:>12.4e}", r.name, r.value);
        }
    }
    Ok(())
}
