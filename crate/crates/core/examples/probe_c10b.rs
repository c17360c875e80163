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
    for (name, nm) in [
        ("stressed", NoiseModel { lambda_incoh: 2e-3, lambda_coh: 4e-3, lambda_leak: 0.0 }),
        ("coh4e-3", NoiseModel { lambda_incoh: 0.0, lambda_coh: 4e-3, lambda_leak: 0.0 }),
        ("incoh2e-3", NoiseModel { lambda_incoh: 2e-3, lambda_coh: 0.0, lambda_leak: 0.0 }),
    ] {
        let values = pipeline::density_expectations(&ens, &nm).unwrap();
        for mode in [PostSelectMode::Raw, PostSelectMode::Parity, PostSelectMode::HfProjection] {
            let (rho, est) =
                pipeline::estimate_from_exact(&values, mode, &ens, &params.trial).unwrap();
            println!(
                "{name:10} {:7}: bias {:+8.3} mHa  rho = ({:+.5}, {:+.5})",
                mode.label(),
                (est.value - e_gs) * 1e3,
                rho.rho_plus,
                rho.rho_minus,
            );
        }
    }
}
