//! Shot reduction, post-selection, and the arctan energy estimator.
//!
//! Two ancilla expectations ρ± taken at trial energies E_guess ± ε combine
//! into E = E_guess + (1/s)·arctan(tan(sε)·(ρ₊+ρ₋)/(ρ₋−ρ₊)); the ratio
//! cancels any damping common to both branches.

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::circuit::{CircuitMeta, TrialBranch};
use crate::sim::ShotRecord;

/// Trial energies around a guess, plus the central time s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialEnergies {
    pub e_guess: f64,
    pub epsilon: f64,
    pub s_central: f64,
}

impl TrialEnergies {
    pub fn new(e_guess: f64, epsilon: f64, s_central: f64) -> Self {
        assert!(epsilon > 0.0);
        Self { e_guess, epsilon, s_central }
    }

    /// The default choice anchored on the Hartree-Fock energy:
    /// (E₊, E₋) = (E_HF, E_HF - 2ε) with ε = 0.04 Ha and s = 10 Ha⁻¹.
    pub fn hf_anchored(e_hf: f64) -> Self {
        Self::new(e_hf - 0.04, 0.04, 10.0)
    }

    pub fn e_plus(&self) -> f64 {
        self.e_guess + self.epsilon
    }

    pub fn e_minus(&self) -> f64 {
        self.e_guess - self.epsilon
    }

    /// True when s exceeds the validity window π/|E_trial - E_GS| for the
    /// supplied reference energy (a warning condition, not an error).
    pub fn window_violated(&self, e_gs_reference: f64) -> bool {
        [self.e_plus(), self.e_minus()].iter().any(|et| {
            let delta = (et - e_gs_reference).abs();
            delta > 0.0 && self.s_central >= std::f64::consts::PI / delta
        })
    }
}

/// Post-selection applied to shot records. HF-projection implies the
/// parity filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PostSelectMode {
    Raw,
    Parity,
    HfProjection,
}

impl PostSelectMode {
    pub fn label(&self) -> &'static str {
        match self {
            PostSelectMode::Raw => "raw",
            PostSelectMode::Parity => "parity",
            PostSelectMode::HfProjection => "hf",
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EstimateError {
    #[error("no records left in the {0:?} branch after selection")]
    EmptyAfterSelection(TrialBranch),
    #[error("rho+ and rho- coincide; the estimator ratio is undefined")]
    DegenerateRatio,
    #[error("noiseless reference too close to zero for a damping ratio")]
    DivisionByNearZero,
    #[error("record references circuit {0} with no metadata")]
    UnknownCircuit(u32),
}

/// Per-circuit accumulator of attenuation-corrected values.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct CircuitRho {
    pub plus_sum: f64,
    pub plus_sumsq: f64,
    pub plus_n: u64,
    pub minus_sum: f64,
    pub minus_sumsq: f64,
    pub minus_n: u64,
}

/// Attenuation-corrected branch means with their standard errors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RhoEstimate {
    pub rho_plus: f64,
    pub rho_minus: f64,
    pub se_plus: f64,
    pub se_minus: f64,
    pub kept: u64,
    pub discarded: u64,
    pub mode: PostSelectMode,
    /// Indexed by circuit, for pooling curves and bootstrap resampling.
    pub per_circuit: Vec<CircuitRho>,
}

impl RhoEstimate {
    fn from_circuits(mode: PostSelectMode, per_circuit: Vec<CircuitRho>, discarded: u64)
        -> Result<Self, EstimateError>
    {
        let (rho_plus, se_plus, n_plus) = pool(&per_circuit, TrialBranch::Plus)
            .ok_or(EstimateError::EmptyAfterSelection(TrialBranch::Plus))?;
        let (rho_minus, se_minus, n_minus) = pool(&per_circuit, TrialBranch::Minus)
            .ok_or(EstimateError::EmptyAfterSelection(TrialBranch::Minus))?;
        Ok(Self {
            rho_plus,
            rho_minus,
            se_plus,
            se_minus,
            kept: n_plus + n_minus,
            discarded,
            mode,
            per_circuit,
        })
    }
}

fn pool(circuits: &[CircuitRho], branch: TrialBranch) -> Option<(f64, f64, u64)> {
    let (mut sum, mut sumsq, mut n) = (0.0, 0.0, 0u64);
    for c in circuits {
        match branch {
            TrialBranch::Plus => {
                sum += c.plus_sum;
                sumsq += c.plus_sumsq;
                n += c.plus_n;
            }
            TrialBranch::Minus => {
                sum += c.minus_sum;
                sumsq += c.minus_sumsq;
                n += c.minus_n;
            }
        }
    }
    if n == 0 {
        return None;
    }
    let mean = sum / n as f64;
    let var = (sumsq / n as f64 - mean * mean).max(0.0);
    let se = if n > 1 { (var / (n as f64 - 1.0)).sqrt() } else { 0.0 };
    Some((mean, se, n))
}

/// Reduce raw shot records to branch expectations. Parity mode discards
/// records whose physical parity differs from η; HF-projection additionally
/// zeroes the ancilla value of records whose physical register is not the
/// reference state (those records stay). Each kept value carries the
/// direction sign and the attenuation correction of its circuit.
pub fn reduce_shots(
    records: &[ShotRecord],
    mode: PostSelectMode,
    metas: &[CircuitMeta],
) -> Result<RhoEstimate, EstimateError> {
    let n_circuits = metas.iter().map(|m| m.circuit_index as usize + 1).max().unwrap_or(0);
    let mut lookup: Vec<Option<&CircuitMeta>> = vec![None; n_circuits];
    for m in metas {
        lookup[m.circuit_index as usize] = Some(m);
    }
    let mut per_circuit = vec![CircuitRho::default(); n_circuits];
    let mut discarded = 0u64;
    for r in records {
        let meta = lookup
            .get(r.circuit_index as usize)
            .and_then(|m| *m)
            .ok_or(EstimateError::UnknownCircuit(r.circuit_index))?;
        if mode != PostSelectMode::Raw {
            let parity = if (r.physical_bits & mask_of(r.l_physical)).count_ones() % 2 == 0 {
                1i8
            } else {
                -1i8
            };
            if parity != meta.eta {
                discarded += 1;
                continue;
            }
        }
        let mut y = r.ancilla_y as f64;
        if mode == PostSelectMode::HfProjection && r.physical_bits != meta.hf_bits {
            y = 0.0;
        }
        let corr = meta.lambda_a * meta.lambda_a_prime * meta.lambda_s;
        let value = y * meta.direction_sign as f64 / corr;
        let slot = &mut per_circuit[r.circuit_index as usize];
        match r.trial_branch {
            TrialBranch::Plus => {
                slot.plus_sum += value;
                slot.plus_sumsq += value * value;
                slot.plus_n += 1;
            }
            TrialBranch::Minus => {
                slot.minus_sum += value;
                slot.minus_sumsq += value * value;
                slot.minus_n += 1;
            }
        }
    }
    RhoEstimate::from_circuits(mode, per_circuit, discarded)
}

/// One circuit's exact (infinite-shot) expectations, as produced by the
/// noiseless or density backends.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ExactExpectation {
    pub circuit_index: u32,
    pub trial_branch: TrialBranch,
    /// <Y> with no selection.
    pub raw_y: f64,
    /// <Y · 1[parity ok]> and the parity-sector probability.
    pub parity_y: f64,
    pub parity_prob: f64,
    /// <Y · 1[register = reference]>.
    pub hf_y: f64,
}

/// Infinite-shot analogue of [`reduce_shots`].
pub fn reduce_exact(
    values: &[ExactExpectation],
    mode: PostSelectMode,
    metas: &[CircuitMeta],
) -> Result<RhoEstimate, EstimateError> {
    let n_circuits = metas.iter().map(|m| m.circuit_index as usize + 1).max().unwrap_or(0);
    let mut lookup: Vec<Option<&CircuitMeta>> = vec![None; n_circuits];
    for m in metas {
        if (m.trial_branch == TrialBranch::Plus) || lookup[m.circuit_index as usize].is_none() {
            lookup[m.circuit_index as usize] = Some(m);
        }
    }
    let mut per_circuit = vec![CircuitRho::default(); n_circuits];
    for v in values {
        let meta = lookup
            .get(v.circuit_index as usize)
            .and_then(|m| *m)
            .ok_or(EstimateError::UnknownCircuit(v.circuit_index))?;
        let y = match mode {
            PostSelectMode::Raw => v.raw_y,
            // post-selection renormalizes by the kept fraction
            PostSelectMode::Parity => v.parity_y / v.parity_prob,
            PostSelectMode::HfProjection => v.hf_y / v.parity_prob,
        };
        let corr = meta.lambda_a * meta.lambda_a_prime * meta.lambda_s;
        let value = y * meta.direction_sign as f64 / corr;
        let slot = &mut per_circuit[v.circuit_index as usize];
        match v.trial_branch {
            TrialBranch::Plus => {
                slot.plus_sum += value;
                slot.plus_sumsq += value * value;
                slot.plus_n += 1;
            }
            TrialBranch::Minus => {
                slot.minus_sum += value;
                slot.minus_sumsq += value * value;
                slot.minus_n += 1;
            }
        }
    }
    RhoEstimate::from_circuits(mode, per_circuit, 0)
}

fn mask_of(l: usize) -> u64 {
    if l >= 64 {
        u64::MAX
    } else {
        (1 << l) - 1
    }
}

/// A ground-state-energy estimate with its uncertainty.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub value: f64,
    pub std_error: f64,
    pub mode: PostSelectMode,
    pub n_circuits: usize,
    /// Fires when the estimate approaches the arctan window edge
    /// ±π/(2s) around E_guess.
    pub window_saturated: bool,
}

fn arctan_energy(rho_plus: f64, rho_minus: f64, trial: &TrialEnergies) -> Result<f64, EstimateError> {
    let d = rho_minus - rho_plus;
    if d.abs() < 1e-15 {
        return Err(EstimateError::DegenerateRatio);
    }
    let t = (trial.s_central * trial.epsilon).tan();
    Ok(trial.e_guess + (t * (rho_plus + rho_minus) / d).atan() / trial.s_central)
}

/// Estimate the energy from reduced branch expectations. The standard
/// error is the larger of a first-order delta propagation of the branch
/// errors and a nonparametric bootstrap over circuits.
pub fn estimate_energy(
    rho: &RhoEstimate,
    trial: &TrialEnergies,
) -> Result<EnergyEstimate, EstimateError> {
    let value = arctan_energy(rho.rho_plus, rho.rho_minus, trial)?;

    // delta method
    let t = (trial.s_central * trial.epsilon).tan();
    let n = rho.rho_plus + rho.rho_minus;
    let d = rho.rho_minus - rho.rho_plus;
    let x = t * n / d;
    let pref = t / (trial.s_central * (1.0 + x * x) * d * d);
    let de_dp = pref * (d + n);
    let de_dm = pref * (d - n);
    let se_delta = ((de_dp * rho.se_plus).powi(2) + (de_dm * rho.se_minus).powi(2)).sqrt();

    // bootstrap over circuits
    let live: Vec<&CircuitRho> = rho
        .per_circuit
        .iter()
        .filter(|c| c.plus_n > 0 || c.minus_n > 0)
        .collect();
    let se_boot = if live.len() >= 2 {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(0x0b00);
        let resamples = 10_000;
        let mut values = Vec::with_capacity(resamples);
        for _ in 0..resamples {
            let mut acc = CircuitRho::default();
            for _ in 0..live.len() {
                let pick = live[rng.gen_range(0..live.len())];
                acc.plus_sum += pick.plus_sum;
                acc.plus_n += pick.plus_n;
                acc.minus_sum += pick.minus_sum;
                acc.minus_n += pick.minus_n;
            }
            if acc.plus_n == 0 || acc.minus_n == 0 {
                continue;
            }
            let rp = acc.plus_sum / acc.plus_n as f64;
            let rm = acc.minus_sum / acc.minus_n as f64;
            if let Ok(e) = arctan_energy(rp, rm, trial) {
                values.push(e);
            }
        }
        std_dev(&values)
    } else {
        0.0
    };

    let window = std::f64::consts::FRAC_PI_2 / trial.s_central;
    Ok(EnergyEstimate {
        value,
        std_error: se_delta.max(se_boot),
        mode: rho.mode,
        n_circuits: live.len(),
        window_saturated: (value - trial.e_guess).abs() > 0.95 * window,
    })
}

fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)).sqrt()
}

/// One point of the accumulated-estimate curve.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CurvePoint {
    pub circuits_used: usize,
    pub energy: f64,
    pub std_error: f64,
}

/// E_i recomputed from the pooled ρ± of circuits 1..i (not a running mean
/// of per-circuit energies).
pub fn accumulate_curve(
    rho: &RhoEstimate,
    trial: &TrialEnergies,
) -> Vec<CurvePoint> {
    let mut out = Vec::new();
    let mut acc = CircuitRho::default();
    for (i, c) in rho.per_circuit.iter().enumerate() {
        acc.plus_sum += c.plus_sum;
        acc.plus_sumsq += c.plus_sumsq;
        acc.plus_n += c.plus_n;
        acc.minus_sum += c.minus_sum;
        acc.minus_sumsq += c.minus_sumsq;
        acc.minus_n += c.minus_n;
        if acc.plus_n == 0 || acc.minus_n == 0 {
            continue;
        }
        let pooled = [acc];
        let (rp, sp, _) = pool(&pooled, TrialBranch::Plus).expect("nonempty");
        let (rm, sm, _) = pool(&pooled, TrialBranch::Minus).expect("nonempty");
        let partial = RhoEstimate {
            rho_plus: rp,
            rho_minus: rm,
            se_plus: sp,
            se_minus: sm,
            kept: acc.plus_n + acc.minus_n,
            discarded: 0,
            mode: rho.mode,
            per_circuit: Vec::new(),
        };
        if let Ok(e) = estimate_energy(&partial, trial) {
            out.push(CurvePoint { circuits_used: i + 1, energy: e.value, std_error: e.std_error });
        }
    }
    out
}

/// Damping factors f± = ρ±(noisy)/ρ±(noiseless) with first-order errors.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DampingFactors {
    pub f_plus: f64,
    pub f_minus: f64,
    pub se_plus: f64,
    pub se_minus: f64,
}

pub fn damping_diagnostics(
    noisy: &RhoEstimate,
    noiseless: &RhoEstimate,
) -> Result<DampingFactors, EstimateError> {
    if noiseless.rho_plus.abs() < 1e-6 || noiseless.rho_minus.abs() < 1e-6 {
        return Err(EstimateError::DivisionByNearZero);
    }
    let ratio_se = |num: f64, num_se: f64, den: f64, den_se: f64| {
        let f: f64 = num / den;
        (f.powi(2) * ((num_se / num).powi(2) + (den_se / den).powi(2))).sqrt()
    };
    Ok(DampingFactors {
        f_plus: noisy.rho_plus / noiseless.rho_plus,
        f_minus: noisy.rho_minus / noiseless.rho_minus,
        se_plus: ratio_se(noisy.rho_plus, noisy.se_plus, noiseless.rho_plus, noiseless.se_plus),
        se_minus: ratio_se(
            noisy.rho_minus,
            noisy.se_minus,
            noiseless.rho_minus,
            noiseless.se_minus,
        ),
    })
}

/// Per-qubit 0/1 tallies of a batch of shot records, ancilla separated.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct MeasurementStats {
    pub n_records: u64,
    pub physical_ones: Vec<u64>,
    pub physical_zeros: Vec<u64>,
    pub ancilla_ones: u64,
    pub ancilla_zeros: u64,
}

impl MeasurementStats {
    pub fn total_physical_ones(&self) -> u64 {
        self.physical_ones.iter().sum()
    }

    pub fn mean_physical_one_fraction(&self) -> f64 {
        if self.n_records == 0 {
            return 0.0;
        }
        self.total_physical_ones() as f64
            / (self.n_records as f64 * self.physical_ones.len() as f64)
    }

    pub fn ancilla_one_fraction(&self) -> f64 {
        if self.n_records == 0 {
            return 0.0;
        }
        self.ancilla_ones as f64 / self.n_records as f64
    }
}

/// Count 0/1 outcomes per qubit. The ancilla bit is 1 exactly when the
/// Y-basis outcome is +1.
pub fn measurement_stats(records: &[ShotRecord], l: usize) -> MeasurementStats {
    let mut stats = MeasurementStats {
        n_records: 0,
        physical_ones: vec![0; l],
        physical_zeros: vec![0; l],
        ..Default::default()
    };
    for r in records {
        stats.n_records += 1;
        for q in 0..l {
            if r.physical_bits >> q & 1 == 1 {
                stats.physical_ones[q] += 1;
            } else {
                stats.physical_zeros[q] += 1;
            }
        }
        if r.ancilla_y > 0 {
            stats.ancilla_ones += 1;
        } else {
            stats.ancilla_zeros += 1;
        }
    }
    stats
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(index: u32, branch: TrialBranch) -> CircuitMeta {
        CircuitMeta {
            circuit_index: index,
            trial_branch: branch,
            direction_sign: 1,
            lambda_a: 1.0,
            lambda_a_prime: 1.0,
            lambda_s: 1.0,
            eta: 1,
            hf_bits: 0b11,
            s_central: 10.0,
            trial_energy: 0.0,
        }
    }

    fn shot(index: u32, branch: TrialBranch, y: i8, bits: u64) -> ShotRecord {
        ShotRecord {
            ancilla_y: y,
            physical_bits: bits,
            l_physical: 2,
            circuit_index: index,
            trial_branch: branch,
            direction_sign: 1,
            leaked_mask: 0,
        }
    }

    #[test]
    fn trial_energy_definitions() {
        let t = TrialEnergies::hf_anchored(-1.9345);
        assert!((t.e_plus() + 1.9345).abs() < 1e-12);
        assert!((t.e_minus() + 2.0145).abs() < 1e-12);
        assert!(t.window_violated(-1.9345 + 0.4));
        assert!(!t.window_violated(-1.99));
    }

    #[test]
    fn eigenstate_round_trip_is_exact() {
        // with rho± = sin(s(E_trial± - E)) the estimator returns E exactly
        use rand::Rng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(123);
        for _ in 0..20 {
            let e_true: f64 = rng.gen_range(-2.0..-1.0);
            let e_guess = e_true + rng.gen_range(-0.05..0.05);
            let eps = rng.gen_range(0.01..0.08);
            // keep s inside the validity window for both trial energies
            let dmax = (e_guess + eps - e_true).abs().max((e_guess - eps - e_true).abs());
            let s = rng.gen_range(0.2..0.9) * std::f64::consts::PI / dmax;
            let trial = TrialEnergies::new(e_guess, eps, s);
            let rp = (s * (trial.e_plus() - e_true)).sin();
            let rm = (s * (trial.e_minus() - e_true)).sin();
            let e = arctan_energy(rp, rm, &trial).unwrap();
            assert!(
                (e - e_true).abs() < 1e-12,
                "estimator should invert exactly: got {e}, want {e_true}"
            );
        }
    }

    #[test]
    fn symmetric_rho_returns_guess() {
        let trial = TrialEnergies::new(-1.5, 0.04, 10.0);
        let e = arctan_energy(0.3, -0.3, &trial).unwrap();
        assert!((e + 1.5).abs() < 1e-15);
    }

    #[test]
    fn uniform_damping_cancels() {
        let trial = TrialEnergies::new(-1.5, 0.04, 10.0);
        let base = arctan_energy(0.45, -0.21, &trial).unwrap();
        for gamma in [0.9, 0.5, 0.1, -0.7] {
            let scaled = arctan_energy(0.45 * gamma, -0.21 * gamma, &trial).unwrap();
            assert_eq!(scaled, base, "ratio is scale-invariant");
        }
    }

    #[test]
    fn degenerate_ratio_is_an_error() {
        let trial = TrialEnergies::new(-1.5, 0.04, 10.0);
        assert_eq!(
            arctan_energy(0.3, 0.3, &trial).unwrap_err(),
            EstimateError::DegenerateRatio
        );
    }

    #[test]
    fn parity_filter_discards_and_hf_projects() {
        let metas = vec![meta(0, TrialBranch::Plus), meta(0, TrialBranch::Minus)];
        let records = vec![
            shot(0, TrialBranch::Plus, 1, 0b11),  // kept, matches HF
            shot(0, TrialBranch::Plus, -1, 0b01), // odd parity: discarded
            shot(0, TrialBranch::Plus, -1, 0b00), // even parity, zeroed by HF mode
            shot(0, TrialBranch::Minus, -1, 0b11),
        ];
        let raw = reduce_shots(&records, PostSelectMode::Raw, &metas).unwrap();
        assert_eq!(raw.kept, 4);
        assert_eq!(raw.discarded, 0);
        let parity = reduce_shots(&records, PostSelectMode::Parity, &metas).unwrap();
        assert_eq!(parity.discarded, 1);
        assert!((parity.rho_plus - 0.0).abs() < 1e-15); // (+1 + -1)/2
        let hf = reduce_shots(&records, PostSelectMode::HfProjection, &metas).unwrap();
        assert!((hf.rho_plus - 0.5).abs() < 1e-15); // (+1 + 0)/2
        assert!((hf.rho_minus + 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_branch_is_an_error() {
        let metas = vec![meta(0, TrialBranch::Plus), meta(0, TrialBranch::Minus)];
        let records = vec![
            shot(0, TrialBranch::Plus, 1, 0b01),
            shot(0, TrialBranch::Minus, 1, 0b11),
        ];
        assert_eq!(
            reduce_shots(&records, PostSelectMode::Parity, &metas).unwrap_err(),
            EstimateError::EmptyAfterSelection(TrialBranch::Plus)
        );
    }

    #[test]
    fn attenuation_and_direction_are_applied() {
        let mut m_plus = meta(0, TrialBranch::Plus);
        m_plus.lambda_a = 0.8;
        m_plus.lambda_a_prime = 0.5;
        m_plus.lambda_s = 0.5;
        m_plus.direction_sign = -1;
        let m_minus = CircuitMeta { trial_branch: TrialBranch::Minus, ..m_plus };
        let records = vec![
            shot(0, TrialBranch::Plus, 1, 0b11),
            shot(0, TrialBranch::Minus, -1, 0b11),
        ];
        let r = reduce_shots(&records, PostSelectMode::Raw, &[m_plus, m_minus]).unwrap();
        assert!((r.rho_plus + 5.0).abs() < 1e-12, "1 * (-1) / 0.2");
        assert!((r.rho_minus - 5.0).abs() < 1e-12);
    }

    #[test]
    fn curve_is_order_sensitive_but_final_point_is_not() {
        let trial = TrialEnergies::new(-1.5, 0.04, 10.0);
        let mk = |vals: Vec<(f64, f64)>| RhoEstimate {
            rho_plus: 0.0,
            rho_minus: 0.0,
            se_plus: 0.0,
            se_minus: 0.0,
            kept: 0,
            discarded: 0,
            mode: PostSelectMode::Raw,
            per_circuit: vals
                .into_iter()
                .map(|(p, m)| CircuitRho {
                    plus_sum: p,
                    plus_sumsq: p * p,
                    plus_n: 1,
                    minus_sum: m,
                    minus_sumsq: m * m,
                    minus_n: 1,
                })
                .collect(),
        };
        let a = mk(vec![(0.5, -0.2), (0.4, -0.3), (0.45, -0.25)]);
        let b = mk(vec![(0.45, -0.25), (0.5, -0.2), (0.4, -0.3)]);
        let ca = accumulate_curve(&a, &trial);
        let cb = accumulate_curve(&b, &trial);
        assert_eq!(ca.len(), 3);
        assert!((ca.last().unwrap().energy - cb.last().unwrap().energy).abs() < 1e-14);
        assert!(ca[0].energy != cb[0].energy);
    }

    #[test]
    fn single_circuit_curve_has_one_point() {
        let trial = TrialEnergies::new(-1.5, 0.04, 10.0);
        let rho = RhoEstimate {
            rho_plus: 0.5,
            rho_minus: -0.2,
            se_plus: 0.0,
            se_minus: 0.0,
            kept: 2,
            discarded: 0,
            mode: PostSelectMode::Raw,
            per_circuit: vec![CircuitRho {
                plus_sum: 0.5,
                plus_sumsq: 0.25,
                plus_n: 1,
                minus_sum: -0.2,
                minus_sumsq: 0.04,
                minus_n: 1,
            }],
        };
        let curve = accumulate_curve(&rho, &trial);
        assert_eq!(curve.len(), 1);
        let e = estimate_energy(&rho, &trial).unwrap();
        assert!((curve[0].energy - e.value).abs() < 1e-14);
    }

    #[test]
    fn damping_factors_match_reference_values() {
        // hardware vs noiseless table values as fixed inputs
        let mk = |p: f64, m: f64, sp: f64, sm: f64| RhoEstimate {
            rho_plus: p,
            rho_minus: m,
            se_plus: sp,
            se_minus: sm,
            kept: 1,
            discarded: 0,
            mode: PostSelectMode::HfProjection,
            per_circuit: Vec::new(),
        };
        let hw = mk(0.302, -0.007, 0.022, 0.023);
        let ideal = mk(0.441, -0.220, 0.019, 0.019);
        let f = damping_diagnostics(&hw, &ideal).unwrap();
        assert!((f.f_plus - 0.68).abs() < 0.01, "f+ = {}", f.f_plus);
        assert!((f.f_minus - 0.03).abs() < 0.005, "f- = {}", f.f_minus);
        let same = damping_diagnostics(&ideal, &ideal).unwrap();
        assert!((same.f_plus - 1.0).abs() < 1e-12);
        assert!((same.f_minus - 1.0).abs() < 1e-12);
        let tiny = mk(0.0, 1e-9, 0.0, 0.0);
        assert_eq!(
            damping_diagnostics(&hw, &tiny).unwrap_err(),
            EstimateError::DivisionByNearZero
        );
    }

    #[test]
    fn stats_count_zeros_and_ones() {
        let records = vec![
            shot(0, TrialBranch::Plus, 1, 0b01),
            shot(0, TrialBranch::Plus, -1, 0b10),
        ];
        let s = measurement_stats(&records, 2);
        assert_eq!(s.n_records, 2);
        assert_eq!(s.physical_ones, vec![1, 1]);
        assert_eq!(s.physical_zeros, vec![1, 1]);
        assert_eq!(s.ancilla_ones, 1);
        assert_eq!(s.ancilla_zeros, 1);
        let empty = measurement_stats(&[], 2);
        assert_eq!(empty.n_records, 0);
        assert_eq!(empty.total_physical_ones(), 0);
    }
}
