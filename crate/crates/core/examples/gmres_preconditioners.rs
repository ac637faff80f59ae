//! Assembles one benchmark system and solves it with restarted GMRES under
//! each preconditioner, then with the banded direct solver.
//!
//! cargo run --release --example gmres_preconditioners -- [k] [N]

use std::time::Instant;

use layerfem::linalg::{direct_solve, gmres_with_config, relative_residual};
use layerfem::{assemble, build_tensor_mesh, benchmark_problem, MeshPair, MeshVariant, PrecondKind, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let k: usize = args.first().map(|s| s.parse()).transpose()?.unwrap_or(1);
    let n: usize = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(32);

    let problem = benchmark_problem(1e-8)?;
    let meshes = MeshPair::for_problem(&problem, n, k, MeshVariant::BakhvalovType, None);
    let mesh = build_tensor_mesh(&meshes.x, &meshes.y, k)?;
    let sys = assemble(&problem, &mesh, k)?;
    println!("k = {k}, N = {n}, dimension = {}, nnz = {}", sys.dimension(), sys.matrix.nnz());

    for precond in [PrecondKind::None, PrecondKind::Jacobi, PrecondKind::Ilu0, PrecondKind::Ilut] {
        let config = SolverConfig {
            precond,
            max_iter: 3000,
            ..SolverConfig::default()
        };
        let t = Instant::now();
        match gmres_with_config(&sys.matrix, &sys.rhs, &config) {
            Ok(out) => println!(
                "{:<8} iters {:>6}  residual {:.2e}  {:.2}s",
                precond.to_string(),
                out.iterations,
                relative_residual(&sys.matrix, &out.solution, &sys.rhs),
                t.elapsed().as_secs_f64()
            ),
            Err(e) => println!("{:<8} failed: {e}", precond.to_string()),
        }
    }

    let t = Instant::now();
    let d = direct_solve(&sys.matrix, &sys.rhs)?;
    println!(
        "direct   residual {:.2e}  {:.2}s",
        relative_residual(&sys.matrix, &d.solution, &sys.rhs),
        t.elapsed().as_secs_f64()
    );
    Ok(())
}
