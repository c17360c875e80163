use qasp_core::data;
use qasp_core::estimate::PostSelectMode;
use qasp_core::pipeline;
use qasp_core::sim::NoiseModel;

fn main() {
    let h = data::h3plus();
    let e_hf = h.expectation_in_basis_state(data::H3PLUS_HF_BITS, 6).unwrap();
    let (e_gs, _) =
        qasp_core::sim::exact_ground_state_in_sector(&h, data::H3PLUS_HF_BITS, data::H3PLUS_ORDERING)
            .unwrap();
    let params = pipeline::paper_params(e_hf, 1);
    let ens = pipeline::generate(&h, data::H3PLUS_HF_BITS, &params);
    let t0 = std::time::Instant::now();
    for (name, nm) in [
        ("noiseless", NoiseModel::NOISELESS),
        ("nominal", NoiseModel { lambda_incoh: 9.7e-4, lambda_coh: 2.2e-4, lambda_leak: 0.0 }),
        ("stressed", NoiseModel { lambda_incoh: 2e-3, lambda_coh: 4e-3, lambda_leak: 0.0 }),
        ("depol-only", NoiseModel { lambda_incoh: 2e-3, lambda_coh: 0.0, lambda_leak: 0.0 }),
    ] {
        let values = pipeline::density_expectations(&ens, &nm).unwrap();
        let (rho, est) = pipeline::estimate_from_exact(
            &values, PostSelectMode::HfProjection, &ens, &params.trial,
        ).unwrap();
        println!(
            "{name:10}: bias {:+7.3} mHa, rho = ({:+.4}, {:+.4})  [{:.0?}]",
            (est.value - e_gs) * 1e3, rho.rho_plus, rho.rho_minus, t0.elapsed()
        );
    }
}
