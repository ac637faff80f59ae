//! Interpolation error orders for the layer parts of the benchmark solution
//! and for the special interpolant.
//!
//! cargo run --release --example interpolation_rates -- [k]

use layerfem::analysis::{interp_study, loglog_slope, StudyRegion};
use layerfem::interp::StudyTarget;
use layerfem::Norm;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let k: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(1);
    let eps = 1e-6;
    let ns = [16, 32, 64, 128];
    let cases = [
        (StudyTarget::E1, Norm::L2, StudyRegion::All),
        (StudyTarget::E1, Norm::L2, StudyRegion::OutsideStrip),
        (StudyTarget::E1, Norm::Energy { epsilon: eps }, StudyRegion::All),
        (StudyTarget::E12, Norm::Energy { epsilon: eps }, StudyRegion::All),
        (StudyTarget::Pi, Norm::Energy { epsilon: eps }, StudyRegion::All),
        (StudyTarget::P1, Norm::Energy { epsilon: eps }, StudyRegion::All),
    ];
    println!("k = {k}, eps = {eps:e}, N = {ns:?}");
    for (target, norm, region) in cases {
        let rows = interp_study(target, norm, region, k, eps, &ns, None)?;
        let errors: Vec<String> = rows.iter().map(|r| format!("{:.3e}", r.error)).collect();
        let slope = loglog_slope(&rows).map(|s| -s).unwrap_or(f64::NAN);
        println!(
            "{:<10} {:<7} {:<13} order {:>6.3}   {}",
            target.to_string(),
            norm.label(),
            region.label(),
            slope,
            errors.join(" ")
        );
    }
    Ok(())
}
