use layerfem::analysis::{interp_study, loglog_slope, StudyRegion};
use layerfem::interp::{error_norms, lagrange_interpolate, StudyTarget};
use layerfem::problems::Field;
use layerfem::{build_tensor_mesh, MeshConfig, Norm};

const NS: [usize; 4] = [16, 32, 64, 128];

fn slope(target: StudyTarget, norm: Norm, k: usize, eps: f64) -> f64 {
    let rows = interp_study(target, norm, StudyRegion::All, k, eps, &NS, None).unwrap();
    -loglog_slope(&rows).unwrap()
}

#[test]
fn pure_exponential_layer_gains_k_plus_one() {
    let eps = 1e-6;
    let e1 = Field::new(
        move |x, _| (-2.0 * x / eps).exp(),
        move |x, _| [-2.0 / eps * (-2.0 * x / eps).exp(), 0.0],
    );
    for k in 1..=2 {
        let errs: Vec<f64> = NS
            .iter()
            .map(|&n| {
                let mesh = build_tensor_mesh(
                    &MeshConfig::bakhvalov(n, eps, k, 2.0),
                    &MeshConfig::bakhvalov(n, eps, k, 1.0),
                    k,
                )
                .unwrap();
                let fi = lagrange_interpolate(&e1, &mesh, k).unwrap();
                error_norms(&e1, &fi, None).unwrap().l2()
            })
            .collect();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!(ratio >= 2f64.powi(k as i32 + 1), "k={k}: ratio {ratio}");
        }
    }
}

#[test]
fn layer_parts_converge_at_k_in_energy() {
    let eps = 1e-6;
    for k in 1..=2 {
        for target in [StudyTarget::E1, StudyTarget::E12, StudyTarget::Pi] {
            let s = slope(target, Norm::Energy { epsilon: eps }, k, eps);
            assert!(s >= k as f64 - 0.2, "k={k} {target}: {s}");
        }
    }
}

#[test]
fn p1_correction_decays_like_n_to_half_minus_sigma() {
    let eps = 1e-6;
    for k in 1..=2 {
        let sigma = (k + 1) as f64;
        let s = -slope(StudyTarget::P1, Norm::Energy { epsilon: eps }, k, eps);
        assert!((s - (0.5 - sigma)).abs() <= 0.4, "k={k}: slope {s}");
    }
}
