//! Probe: does the coherent-kick bias flip sign between forward and
//! time-reversed circuits?

use qasp_core::data;
use qasp_core::estimate::PostSelectMode;
use qasp_core::pipeline::{self, ExperimentParams};
use qasp_core::sim::NoiseModel;

fn main() {
    let h = data::h3plus();
    let e_hf = h.expectation_in_basis_state(data::H3PLUS_HF_BITS, 6).unwrap();
    let (e_gs, _) =
        qasp_core::sim::exact_ground_state_in_sector(&h, data::H3PLUS_HF_BITS, data::H3PLUS_ORDERING)
            .unwrap();
    let params = ExperimentParams { n_circuits: 60, ..pipeline::paper_params(e_hf, 7) };
    let ens = pipeline::generate(&h, data::H3PLUS_HF_BITS, &params);

    for (name, nm) in [
        ("coh only 2.2e-4", NoiseModel { lambda_incoh: 0.0, lambda_coh: 2.2e-4, lambda_leak: 0.0 }),
        ("incoh only 9.7e-4", NoiseModel { lambda_incoh: 9.7e-4, lambda_coh: 0.0, lambda_leak: 0.0 }),
    ] {
        let values = pipeline::density_expectations(&ens, &nm).unwrap();
        // split estimates by direction
        for (label, want_sign) in [("forward", 1i8), ("reversed", -1i8)] {
            let subset: Vec<_> = values
                .iter()
                .filter(|v| {
                    ens.metas[v.circuit_index as usize].direction_sign == want_sign
                })
                .cloned()
                .collect();
            let sub_metas: Vec<_> = ens
                .metas
                .iter()
                .filter(|m| m.direction_sign == want_sign)
                .cloned()
                .collect();
            let sub_ens = pipeline::Ensemble {
                pairs: Vec::new(),
                metas: ens.metas.clone(),
                profile: ens.profile,
            };
            let _ = sub_metas;
            let (rho, est) = pipeline::estimate_from_exact(
                &subset,
                PostSelectMode::HfProjection,
                &sub_ens,
                &params.trial,
            )
            .unwrap();
            println!(
                "{name:20} {label:8}: bias {:+8.3} mHa   rho = ({:+.4}, {:+.4})",
                (est.value - e_gs) * 1e3,
                rho.rho_plus,
                rho.rho_minus
            );
        }
        let (_, est) = pipeline::estimate_from_exact(
            &values,
            PostSelectMode::HfProjection,
            &ens,
            &params.trial,
        )
        .unwrap();
        println!("{name:20} combined: bias {:+8.3} mHa", (est.value - e_gs) * 1e3);
    }
}
