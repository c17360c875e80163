//! Cost-and-accuracy baselines: Trotterized sweep evolution, direct
//! term-by-term sampling, and iterative-phase-estimation spectral analysis.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::circuit::GateCostModel;
use crate::dense::{self, CVector};
use crate::pauli::PauliHamiltonian;
use crate::shift::split;
use crate::sim::statevec::{basis_state, rotate_state};

/// Discretization of the sweep: k path chunks, m first-order layers per
/// chunk, and the term order of each layer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrotterPlan {
    pub k: usize,
    pub m: usize,
    /// Permutation of the Hamiltonian's term list; `None` keeps file order.
    pub term_order: Option<Vec<usize>>,
}

fn h_of_u(h: &PauliHamiltonian, u: f64) -> PauliHamiltonian {
    let s = split(h);
    s.h_z.add(&s.h_i.scaled(u), 0.0)
}

fn energy_of(h: &PauliHamiltonian, psi: &[Complex64]) -> f64 {
    let mut hp = vec![Complex64::default(); psi.len()];
    dense::apply_hamiltonian(h, psi, &mut hp);
    psi.iter().zip(&hp).map(|(a, b)| (a.conj() * b).re).sum()
}

/// Path-discretization error: apply ∏ₐ exp(i·H(a/k)·T/k) to the reference
/// state with exact chunk exponentials; return the energy error in mHa.
pub fn trotter_path_error(
    h: &PauliHamiltonian,
    t_sweep: f64,
    k: usize,
    hf_bits: u64,
    e_gs: f64,
) -> f64 {
    let l = h.qubit_count();
    let dim = 1usize << l;
    let mut psi = CVector::zeros(dim);
    psi[hf_bits as usize] = Complex64::new(1.0, 0.0);
    for a in 1..=k {
        let hu = dense::hamiltonian_matrix(&h_of_u(h, a as f64 / k as f64));
        let u = dense::exp_i_hermitian(&hu, t_sweep / k as f64);
        psi = u * psi;
    }
    let amps: Vec<Complex64> = psi.iter().copied().collect();
    (energy_of(h, &amps) - e_gs) * 1e3
}

/// Result of the fully Trotterized sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrotterResult {
    pub error_mha: f64,
    pub tqg: u64,
}

fn ordered_terms<'a>(
    h: &'a PauliHamiltonian,
    order: &Option<Vec<usize>>,
) -> Vec<&'a crate::pauli::PauliTerm> {
    match order {
        None => h.terms().iter().collect(),
        Some(p) => p.iter().map(|&i| &h.terms()[i]).collect(),
    }
}

/// First-order Trotterization of every chunk: each exp(i·H(u)·t) becomes
/// [∏_terms exp(i·(t/m)·h)]^m in the plan's order. Single-Z terms keep
/// their full coefficient; interaction terms scale with the sweep. The
/// gate count is k·m·Σ bare term costs.
pub fn trotter_full_error(
    h: &PauliHamiltonian,
    t_sweep: f64,
    plan: &TrotterPlan,
    hf_bits: u64,
    e_gs: f64,
    costs: &GateCostModel,
) -> TrotterResult {
    let l = h.qubit_count();
    let terms = ordered_terms(h, &plan.term_order);
    let mut psi = basis_state(l, hf_bits);
    let dt = t_sweep / (plan.k as f64 * plan.m as f64);
    for a in 1..=plan.k {
        let u = a as f64 / plan.k as f64;
        for _ in 0..plan.m {
            for t in &terms {
                let scale = if t.string.is_diagonal() && t.string.weight() == 1 { 1.0 } else { u };
                rotate_state(&mut psi, &t.string, dt * scale * t.coefficient);
            }
        }
    }
    let tqg = (plan.k * plan.m) as u64
        * h.terms().iter().map(|t| costs.bare_term_cost(&t.string)).sum::<u64>();
    TrotterResult { error_mha: (energy_of(h, &psi) - e_gs) * 1e3, tqg }
}

/// Analytic shot requirement of the term-sampling estimator, with an
/// optional Monte-Carlo validation of the variance formula.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DirectSamplingReport {
    /// One-norm of the non-identity coefficients.
    pub mu: f64,
    /// Per-shot variance μ² - (E_GS - offset)².
    pub variance: f64,
    pub shots: u64,
}

/// Per-shot protocol: draw a term with probability |aₙ|/μ, measure Pₙ once
/// on the ground state, and report X = μ·sign(aₙ)·(±1). The estimator's
/// mean is E_GS - offset, the per-shot second moment is exactly μ².
pub fn direct_sampling_shots(
    h: &PauliHamiltonian,
    e_gs: f64,
    target_se: f64,
) -> DirectSamplingReport {
    let mu = h.one_norm();
    let signal = e_gs - h.identity_offset();
    let variance = mu * mu - signal * signal;
    let shots = ((variance / (target_se * target_se)).ceil() as u64).max(1);
    DirectSamplingReport { mu, variance, shots }
}

/// Monte-Carlo estimate of the same per-shot variance, validating the
/// closed form.
pub fn direct_sampling_monte_carlo(
    h: &PauliHamiltonian,
    gs: &CVector,
    n_samples: usize,
    seed: u64,
) -> (f64, f64) {
    let mu = h.one_norm();
    let amps: Vec<Complex64> = gs.iter().copied().collect();
    // exact <P_n> on the ground state per term
    let expectations: Vec<f64> = h
        .terms()
        .iter()
        .map(|t| {
            let mut scratch = amps.clone();
            rotate_state(&mut scratch, &t.string, std::f64::consts::FRAC_PI_2);
            // exp(iπ/2 P) = iP, so <P> = Im <ψ|exp(iπ/2 P)|ψ>... simpler:
            // recompute directly below
            0.0 * scratch[0].re
        })
        .collect();
    let _ = expectations;
    let expectations: Vec<f64> = h
        .terms()
        .iter()
        .map(|t| {
            let mut total = 0.0;
            for (j, a) in amps.iter().enumerate() {
                let i = j ^ t.string.x_mask() as usize;
                let amp = dense::string_action(&t.string, j as u64) * a;
                total += (amps[i].conj() * amp).re;
            }
            total
        })
        .collect();
    let weights: Vec<f64> = h.terms().iter().map(|t| t.coefficient.abs() / mu).collect();
    let mut cdf = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in &weights {
        acc += w;
        cdf.push(acc);
    }
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for _ in 0..n_samples {
        let u: f64 = rng.gen_range(0.0..acc);
        let n = cdf.partition_point(|&c| c < u).min(weights.len() - 1);
        let p_plus = (1.0 + expectations[n]) / 2.0;
        let outcome = if rng.gen_range(0.0..1.0) < p_plus { 1.0 } else { -1.0 };
        let x = mu * h.terms()[n].coefficient.signum() * outcome;
        sum += x;
        sumsq += x * x;
    }
    let mean = sum / n_samples as f64;
    (mean, sumsq / n_samples as f64 - mean * mean)
}

/// Settings of the phase-estimation comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IqpeConfig {
    pub tau_step: f64,
    pub l_max: u32,
    pub term_order: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IqpeReport {
    pub energy_error_mha: f64,
    pub overlap: f64,
    pub precision_mha: f64,
    pub total_tqg: u64,
    pub max_tqg: u64,
    pub phase_wrap_warning: bool,
}

/// Eigenphase read-off of the first-order Trotter step
/// U = ∏ exp(i·τ·h): pick the eigenvector with the largest ground-state
/// overlap and convert its phase to an energy.
pub fn iqpe_analysis(
    h: &PauliHamiltonian,
    cfg: &IqpeConfig,
    gs: &CVector,
    e_gs: f64,
    costs: &GateCostModel,
) -> IqpeReport {
    assert!(cfg.tau_step > 0.0);
    let l = h.qubit_count();
    let dim = 1usize << l;
    let terms = ordered_terms(h, &cfg.term_order);
    let mut u = dense::CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut psi = basis_state(l, col as u64);
        for t in &terms {
            rotate_state(&mut psi, &t.string, cfg.tau_step * t.coefficient);
        }
        let phase = Complex64::from_polar(1.0, cfg.tau_step * h.identity_offset());
        for row in 0..dim {
            u[(row, col)] = psi[row] * phase;
        }
    }
    let (vals, vecs) = dense::unitary_eigen(&u);
    let mut best = (0usize, -1.0f64);
    for kx in 0..dim {
        let ov: Complex64 = (0..dim).map(|i| vecs[(i, kx)].conj() * gs[i]).sum();
        let w = ov.norm_sqr();
        if w > best.1 {
            best = (kx, w);
        }
    }
    let energy = vals[best.0].arg() / cfg.tau_step;
    let step_cost: u64 =
        h.terms().iter().map(|t| costs.controlled_rotation(t.string.weight())).sum();
    let total: u64 = (0..=cfg.l_max).map(|lv| step_cost << lv).sum();
    let spectral_bound = h.identity_offset().abs() + h.one_norm();
    IqpeReport {
        energy_error_mha: (energy - e_gs) * 1e3,
        overlap: best.1,
        precision_mha: 2f64.powi(-(cfg.l_max as i32 + 1)) / cfg.tau_step * 1e3,
        total_tqg: total,
        max_tqg: step_cost << cfg.l_max,
        phase_wrap_warning: cfg.tau_step * spectral_bound >= std::f64::consts::PI,
    }
}

/// Deterministic search for a term ordering consistent with reported
/// first-order figures: the sweep ordering is not part of the published
/// data, so consistency is demonstrated by exhibiting one ordering that
/// reproduces both the k=4, m=2 error and the phase-estimation error
/// within their windows.
pub fn find_reference_ordering(
    h: &PauliHamiltonian,
    t_sweep: f64,
    hf_bits: u64,
    e_gs: f64,
    trotter_target: (f64, f64),
    iqpe_target: (f64, f64),
    iqpe_cfg: &IqpeConfig,
    budget: usize,
) -> Option<(Vec<usize>, f64, f64)> {
    let n = h.terms().len();
    let costs = GateCostModel::default();
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(0x07de7);
    let gs = crate::sim::exact_ground_state_in_sector(
        h,
        hf_bits,
        crate::pauli::SpinOrdering::Interleaved,
    )
    .ok()?
    .1;
    for _ in 0..budget {
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let plan = TrotterPlan { k: 4, m: 2, term_order: Some(perm.clone()) };
        let tr = trotter_full_error(h, t_sweep, &plan, hf_bits, e_gs, &costs);
        if (tr.error_mha - trotter_target.0).abs() > trotter_target.1 {
            continue;
        }
        let cfg = IqpeConfig { term_order: Some(perm.clone()), ..iqpe_cfg.clone() };
        let iq = iqpe_analysis(h, &cfg, &gs, e_gs, &costs);
        if (iq.energy_error_mha - iqpe_target.0).abs() <= iqpe_target.1 {
            return Some((perm, tr.error_mha, iq.energy_error_mha));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data;
    use crate::sim::exact_ground_state_in_sector;

    fn setup() -> (PauliHamiltonian, f64, CVector) {
        let h = data::h3plus();
        let (e_gs, gs) =
            exact_ground_state_in_sector(&h, data::H3PLUS_HF_BITS, data::H3PLUS_ORDERING).unwrap();
        (h, e_gs, gs)
    }

    #[test]
    fn path_error_decreases_with_k_and_converges() {
        let (h, e_gs, _) = setup();
        let e1 = trotter_path_error(&h, 8.0, 1, data::H3PLUS_HF_BITS, e_gs);
        let e4 = trotter_path_error(&h, 8.0, 4, data::H3PLUS_HF_BITS, e_gs);
        assert!(e1 > e4 + 0.1, "k=1 ({e1}) coarser than k=4 ({e4})");
        assert!((e4 - 1.58).abs() < 0.05, "k=4 path error {e4} mHa");
        let e256 = trotter_path_error(&h, 8.0, 256, data::H3PLUS_HF_BITS, e_gs);
        assert!((e256 - 1.484).abs() < 0.05, "k→∞ limit {e256} mHa");
    }

    #[test]
    fn inner_trotter_converges_to_path_error() {
        let (h, e_gs, _) = setup();
        let costs = GateCostModel::default();
        // magnitude-descending order keeps the m-convergence constant small
        let mut order: Vec<usize> = (0..h.terms().len()).collect();
        order.sort_by(|&a, &b| {
            h.terms()[b]
                .coefficient
                .abs()
                .partial_cmp(&h.terms()[a].coefficient.abs())
                .unwrap()
        });
        let plan = TrotterPlan { k: 4, m: 512, term_order: Some(order) };
        let full = trotter_full_error(&h, 8.0, &plan, data::H3PLUS_HF_BITS, e_gs, &costs);
        let path = trotter_path_error(&h, 8.0, 4, data::H3PLUS_HF_BITS, e_gs);
        assert!(
            (full.error_mha - path).abs() < 0.02,
            "m=512 error {} vs path {path}",
            full.error_mha
        );
    }

    #[test]
    fn trotter_gate_count_formula() {
        let (h, e_gs, _) = setup();
        let costs = GateCostModel::default();
        let plan = TrotterPlan { k: 4, m: 2, term_order: None };
        let r = trotter_full_error(&h, 8.0, &plan, data::H3PLUS_HF_BITS, e_gs, &costs);
        // 6 singles (0) + 7 double-Z (1 each) + 2 weight-2 (2) + 26 weight-4 (6)
        assert_eq!(r.tqg, 4 * 2 * (7 + 4 + 156));
    }

    #[test]
    fn direct_sampling_analytics() {
        let (h, e_gs, gs) = setup();
        let report = direct_sampling_shots(&h, e_gs, 1.6e-3);
        assert!((report.mu - 4.7538).abs() < 1e-3, "mu = {}", report.mu);
        assert!((report.variance - 21.98).abs() < 0.05, "var = {}", report.variance);
        assert!(
            (report.shots as f64 - 9.0e6).abs() / 9.0e6 < 0.15,
            "shots = {}",
            report.shots
        );
        // empirical cross-check of the variance formula
        let (mean, var) = direct_sampling_monte_carlo(&h, &gs, 200_000, 17);
        let se_var = report.variance * (2.0 / 200_000f64).sqrt() * 3.0;
        assert!((mean - (e_gs - h.identity_offset())).abs() < 0.05);
        assert!((var - report.variance).abs() < se_var + 0.3, "MC var {var}");
    }

    #[test]
    fn direct_sampling_scaling_and_floor() {
        let (h, e_gs, _) = setup();
        let a = direct_sampling_shots(&h, e_gs, 1.6e-3);
        let b = direct_sampling_shots(&h, e_gs, 0.8e-3);
        let ratio = b.shots as f64 / a.shots as f64;
        assert!((ratio - 4.0).abs() < 0.01, "halving SE quadruples shots");
        // single-term Hamiltonian measured in its eigenstate: zero variance
        let single = PauliHamiltonian::parse("1.0 Z").unwrap();
        let r = direct_sampling_shots(&single, -1.0, 1e-3);
        assert!(r.variance.abs() < 1e-12);
        assert_eq!(r.shots, 1);
    }

    #[test]
    fn iqpe_precision_and_costs() {
        let (h, e_gs, gs) = setup();
        let costs = GateCostModel::default();
        let cfg = IqpeConfig { tau_step: 0.4, l_max: 10, term_order: None };
        let r = iqpe_analysis(&h, &cfg, &gs, e_gs, &costs);
        assert!((r.precision_mha - 1.220703125).abs() < 1e-9);
        assert!(r.overlap >= 0.9, "overlap {}", r.overlap);
        assert!(!r.phase_wrap_warning);
        // step cost: 6·1 + 9·3 + 26·7 = 215
        assert_eq!(r.max_tqg, 215 << 10);
        assert_eq!(r.total_tqg, 215 * ((1 << 11) - 1));
        assert!(
            (r.total_tqg as f64 - 422_000.0).abs() / 422_000.0 < 0.25,
            "total {}",
            r.total_tqg
        );
        assert!((r.max_tqg as f64 - 211_000.0).abs() / 211_000.0 < 0.25);
    }
}
