//! Scratch calibration of the statistical acceptance quantities.

use qasp_core::data;
use qasp_core::estimate::{measurement_stats, PostSelectMode};
use qasp_core::pipeline::{self, ExperimentParams};
use qasp_core::sim::NoiseModel;

fn main() {
    let h = data::h3plus();
    let e_hf = h.expectation_in_basis_state(data::H3PLUS_HF_BITS, 6).unwrap();
    let (e_gs, _) =
        qasp_core::sim::exact_ground_state_in_sector(&h, data::H3PLUS_HF_BITS, data::H3PLUS_ORDERING)
            .unwrap();
    let mode = PostSelectMode::HfProjection;

    println!("== infinite-shot, 10 seeds ==");
    let mut within3 = 0;
    for seed in 1..=10u64 {
        let params = pipeline::paper_params(e_hf, seed);
        let ens = pipeline::generate(&h, data::H3PLUS_HF_BITS, &params);
        let values = pipeline::exact_expectations(&ens).unwrap();
        let (rho, est) = pipeline::estimate_from_exact(&values, mode, &ens, &params.trial).unwrap();
        let bias = (est.value - e_gs) * 1e3;
        if bias.abs() <= 3.0 {
            within3 += 1;
        }
        println!(
            "seed {seed}: bias {bias:+.3} mHa (se {:.2}), rho = ({:.4}, {:.4})",
            est.std_error * 1e3,
            rho.rho_plus,
            rho.rho_minus
        );
    }
    println!("within 3 mHa: {within3}/10");

    println!("== 5-shot, 10 seeds ==");
    let mut biases = Vec::new();
    for seed in 1..=10u64 {
        let params = pipeline::paper_params(e_hf, seed);
        let ens = pipeline::generate(&h, data::H3PLUS_HF_BITS, &params);
        let records = pipeline::exact_shots(&ens, 5, seed).unwrap();
        let (rho, est) = pipeline::estimate_from_shots(&records, mode, &ens, &params.trial).unwrap();
        let bias = (est.value - e_gs) * 1e3;
        biases.push(bias);
        println!(
            "seed {seed}: bias {bias:+.3} mHa (se {:.2}), rho+ = {:.4} (se {:.4}), rho- = {:.4} (se {:.4})",
            est.std_error * 1e3,
            rho.rho_plus,
            rho.se_plus,
            rho.rho_minus,
            rho.se_minus
        );
    }
    let mean = biases.iter().sum::<f64>() / biases.len() as f64;
    println!("mean 5-shot bias: {mean:+.3} mHa");

    println!("== ensemble cost stats (seed 1) ==");
    let params = pipeline::paper_params(e_hf, 1);
    let ens = pipeline::generate(&h, data::H3PLUS_HF_BITS, &params);
    let costs = qasp_core::circuit::GateCostModel::default();
    let counts: Vec<u64> =
        ens.pairs.iter().map(|p| qasp_core::circuit::count_tqg(&p.plus, &costs)).collect();
    let depths: Vec<u64> =
        ens.pairs.iter().map(|p| qasp_core::circuit::depth_tqg(&p.plus, &costs)).collect();
    let mean_c = counts.iter().sum::<u64>() as f64 / counts.len() as f64;
    let mean_d = depths.iter().sum::<u64>() as f64 / depths.len() as f64;
    println!("mean count {mean_c:.1} (ref 1051.5), mean depth {mean_d:.1} (ref 993.0), ratio {:.3}", mean_d / mean_c);

    println!("== density (100 pairs to extrapolate) ==");
    let t0 = std::time::Instant::now();
    let params_small = ExperimentParams { n_circuits: 100, ..pipeline::paper_params(e_hf, 1) };
    let ens_small = pipeline::generate(&h, data::H3PLUS_HF_BITS, &params_small);
    for (name, nm) in [
        ("nominal", NoiseModel { lambda_incoh: 9.7e-4, lambda_coh: 2.2e-4, lambda_leak: 0.0 }),
        ("stressed", NoiseModel { lambda_incoh: 2e-3, lambda_coh: 4e-3, lambda_leak: 0.0 }),
    ] {
        let values = pipeline::density_expectations(&ens_small, &nm).unwrap();
        let (_, est) =
            pipeline::estimate_from_exact(&values, mode, &ens_small, &params_small.trial).unwrap();
        println!("{name}: bias {:+.3} mHa  [{:.1?}]", (est.value - e_gs) * 1e3, t0.elapsed());
    }

    println!("== leakage bias curve (30 reps, 346 pairs) ==");
    let t0 = std::time::Instant::now();
    let params = pipeline::paper_params(e_hf, 1);
    let ens = pipeline::generate(&h, data::H3PLUS_HF_BITS, &params);
    let noiseless_records = pipeline::exact_shots(&ens, 5, 999).unwrap();
    let base_stats = measurement_stats(&noiseless_records, 6);
    println!(
        "baseline 1-fractions: physical {:.4}, ancilla {:.4}",
        base_stats.mean_physical_one_fraction(),
        base_stats.ancilla_one_fraction()
    );
    for lam in [2e-4, 6e-4, 1e-3, 2e-3] {
        let nm = NoiseModel { lambda_incoh: 0.0, lambda_coh: 0.0, lambda_leak: lam };
        let mut biases = Vec::new();
        let mut all = Vec::new();
        for rep in 0..30u64 {
            let rep_seed = qasp_core::sampler::derive_seed(1, 1000 + rep);
            let records = pipeline::leakage_shots(&ens, &nm, 5, rep_seed).unwrap();
            if let Ok((_, est)) = pipeline::estimate_from_shots(&records, mode, &ens, &params.trial)
            {
                biases.push((est.value - e_gs) * 1e3);
            }
            all.extend(records);
        }
        let mean = biases.iter().sum::<f64>() / biases.len() as f64;
        let sd = (biases.iter().map(|b| (b - mean).powi(2)).sum::<f64>()
            / (biases.len() as f64 - 1.0))
            .sqrt();
        let stats = measurement_stats(&all, 6);
        println!(
            "lambda {lam:.0e}: bias {mean:+.2} +- {:.2} mHa ({} reps), 1-fracs physical {:.4} ancilla {:.4}  [{:.1?}]",
            sd / (biases.len() as f64).sqrt(),
            biases.len(),
            stats.mean_physical_one_fraction(),
            stats.ancilla_one_fraction(),
            t0.elapsed()
        );
    }
}
