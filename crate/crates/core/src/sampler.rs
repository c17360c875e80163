//! Randomized time evolution by independent Poisson sampling.
//!
//! One draw realizes the sweep unitary as a sequence of fixed-angle Pauli
//! rotations exp(i·sign(aₙ)·τ·Pₙ) interleaved with exact diagonal H_Z
//! segments. The ensemble mean reproduces the target evolution up to the
//! attenuation factor λ = exp(-tan(τ/2)·ζ·T·μ_I).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::circuit::GateCostModel;
use crate::schedule::SweepSchedule;
use crate::shift::SplitHamiltonian;

/// Time direction of a realized evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Reverse,
}

impl Direction {
    pub fn sign(&self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Reverse => -1.0,
        }
    }
}

/// Parameters of one randomized draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Total evolution time (T for the sweep, s for the constant block), Ha⁻¹.
    pub total_time: f64,
    /// Gate angle τ, strictly inside (0, π/2).
    pub gate_angle: f64,
    pub direction: Direction,
    pub rng_seed: u64,
    pub stream_id: u64,
}

impl SamplerConfig {
    pub fn validate(&self) {
        assert!(self.total_time > 0.0, "total_time must be positive");
        assert!(
            self.gate_angle > 0.0 && self.gate_angle < std::f64::consts::FRAC_PI_2,
            "gate angle must lie in (0, pi/2)"
        );
    }
}

/// One rotation event: a term fires at `time` with rotation angle
/// sign·τ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub term_index: usize,
    pub rotation_sign: i8,
}

/// A realized draw of the randomized evolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledEvolution {
    pub events: Vec<Event>,
    pub schedule: SweepSchedule,
    pub config: SamplerConfig,
    /// Attenuation λ = exp(-tan(τ/2)·ζ·T·μ_I) of this draw's ensemble.
    pub lambda: f64,
    pub event_count: usize,
}

/// Deterministic per-(seed, index, slot) random stream.
///
/// The stream key is mixed through SplitMix64 so parallel generation is
/// order-independent and reproducible across platforms.
pub fn stream_rng(master_seed: u64, index: u64, slot: u64) -> ChaCha12Rng {
    let mut state = master_seed ^ 0x9e37_79b9_7f4a_7c15;
    let mut seed = [0u8; 32];
    for (i, salt) in [index.wrapping_add(1), slot.wrapping_add(0x1000), 0, 1].iter().enumerate() {
        state = splitmix64(state ^ salt.wrapping_mul(0xbf58_476d_1ce4_e5b9));
        seed[i * 8..(i + 1) * 8].copy_from_slice(&state.to_le_bytes());
    }
    ChaCha12Rng::from_seed(seed)
}

/// Stable derivation of a sub-seed (repetitions, sweep points).
pub fn derive_seed(master_seed: u64, salt: u64) -> u64 {
    splitmix64(master_seed ^ salt.wrapping_mul(0x94d0_49bb_1331_11eb))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The attenuation factor exp(-tan(τ/2)·ζ·duration·μ_I).
///
/// Not inlined: a single compiled instance keeps results bit-identical
/// across call sites, which the reproducibility contract relies on.
#[inline(never)]
pub fn attenuation_factor(mu_i: f64, zeta: f64, duration: f64, tau: f64) -> f64 {
    (-(tau / 2.0).tan() * zeta * duration * mu_i).exp()
}

/// Draw one realization. Event count per term n is Poisson with mean
/// |aₙ|·ζ·T/sin τ; event times are T·z⁻¹(Uniform(0, ζ)), globally sorted.
///
/// Not inlined so every caller shares one compiled instance; the optimizer
/// is otherwise free to fold the floating-point math differently per call
/// site, which breaks bit-identical reproducibility.
#[inline(never)]
pub fn sample_evolution(
    split: &SplitHamiltonian,
    schedule: SweepSchedule,
    config: &SamplerConfig,
) -> SampledEvolution {
    config.validate();
    let mut rng = stream_rng(config.rng_seed, config.stream_id, 0);
    let zeta = schedule.zeta();
    let t_total = config.total_time;
    let sin_tau = config.gate_angle.sin();
    let mut events: Vec<Event> = Vec::new();
    for (n, term) in split.h_i.terms().iter().enumerate() {
        let mean = term.coefficient.abs() * zeta * t_total / sin_tau;
        let count = if mean > 0.0 {
            Poisson::new(mean).expect("positive mean").sample(&mut rng) as usize
        } else {
            0
        };
        let base_sign: i8 = if term.coefficient >= 0.0 { 1 } else { -1 };
        let sign = match config.direction {
            Direction::Forward => base_sign,
            Direction::Reverse => -base_sign,
        };
        for _ in 0..count {
            let y: f64 = rng.gen_range(0.0..zeta);
            let time = t_total * schedule.z_inverse(y);
            events.push(Event { time, term_index: n, rotation_sign: sign });
        }
    }
    events.sort_by(|a, b| a.time.partial_cmp(&b.time).expect("finite times"));
    let lambda = attenuation_factor(split.mu_i, zeta, t_total, config.gate_angle);
    let event_count = events.len();
    SampledEvolution { events, schedule, config: *config, lambda, event_count }
}

/// Expected two-qubit-gate count of one draw, Eq.-style:
/// ζ·T·μ_I·ḡ/sin τ with ḡ the |aₙ|-weighted mean per-term cost.
pub fn expected_tqg(
    split: &SplitHamiltonian,
    schedule: SweepSchedule,
    config: &SamplerConfig,
    costs: &GateCostModel,
) -> f64 {
    expected_tqg_with(split, schedule, config, |w| costs.uncontrolled_rotation(w))
}

/// Same as [`expected_tqg`] with ancilla-controlled rotation costs.
pub fn expected_controlled_tqg(
    split: &SplitHamiltonian,
    schedule: SweepSchedule,
    config: &SamplerConfig,
    costs: &GateCostModel,
) -> f64 {
    expected_tqg_with(split, schedule, config, |w| costs.controlled_rotation(w))
}

fn expected_tqg_with(
    split: &SplitHamiltonian,
    schedule: SweepSchedule,
    config: &SamplerConfig,
    cost: impl Fn(usize) -> u64,
) -> f64 {
    let weighted: f64 = split
        .h_i
        .terms()
        .iter()
        .map(|t| t.coefficient.abs() * cost(t.string.weight()) as f64)
        .sum();
    schedule.zeta() * config.total_time * weighted / config.gate_angle.sin()
}

/// Expected controlled-rotation TQG count of one full energy-readout
/// circuit: two sweep blocks of duration T plus one constant block of
/// duration s.
pub fn expected_circuit_tqg(
    split: &SplitHamiltonian,
    t_sweep: f64,
    s_central: f64,
    tau: f64,
    costs: &GateCostModel,
) -> f64 {
    let weighted: f64 = split
        .h_i
        .terms()
        .iter()
        .map(|t| t.coefficient.abs() * costs.controlled_rotation(t.string.weight()) as f64)
        .sum();
    let zeta_lin = SweepSchedule::Linear.zeta();
    (2.0 * zeta_lin * t_sweep + s_central) * weighted / tau.sin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliHamiltonian;
    use crate::shift::split;

    fn toy_split() -> SplitHamiltonian {
        split(&PauliHamiltonian::parse("0.4 XI\n-0.3 YY\n0.2 ZI").unwrap())
    }

    #[test]
    fn attenuation_limits() {
        assert!((attenuation_factor(1.0, 0.5, 8.0, 1e-9) - 1.0).abs() < 1e-8);
        let lam = attenuation_factor(0.933816, 0.5, 8.0, 0.1);
        assert!((lam - 0.8295).abs() < 5e-4, "lambda_A = {lam}");
        let lam_s = attenuation_factor(0.933816, 1.0, 10.0, 0.1);
        assert!((lam_s - 0.6267).abs() < 5e-4, "lambda_s = {lam_s}");
    }

    #[test]
    fn identical_seed_and_stream_reproduce_bit_identical_draws() {
        let s = toy_split();
        let cfg = SamplerConfig {
            total_time: 3.0,
            gate_angle: 0.2,
            direction: Direction::Forward,
            rng_seed: 11,
            stream_id: 4,
        };
        let a = sample_evolution(&s, SweepSchedule::Linear, &cfg);
        let b = sample_evolution(&s, SweepSchedule::Linear, &cfg);
        assert_eq!(a, b);
        let other = SamplerConfig { stream_id: 5, ..cfg };
        assert_ne!(sample_evolution(&s, SweepSchedule::Linear, &other), a);
    }

    #[test]
    fn empty_interaction_gives_no_events() {
        let s = split(&PauliHamiltonian::parse("0.7 ZI\n-0.1 IZ").unwrap());
        let cfg = SamplerConfig {
            total_time: 2.0,
            gate_angle: 0.3,
            direction: Direction::Forward,
            rng_seed: 1,
            stream_id: 0,
        };
        let e = sample_evolution(&s, SweepSchedule::Constant, &cfg);
        assert_eq!(e.event_count, 0);
        assert!((e.lambda - 1.0).abs() < 1e-15);
    }

    #[test]
    fn event_times_sorted_and_signs_follow_coefficients() {
        let s = toy_split();
        let cfg = SamplerConfig {
            total_time: 20.0,
            gate_angle: 0.15,
            direction: Direction::Forward,
            rng_seed: 3,
            stream_id: 9,
        };
        let e = sample_evolution(&s, SweepSchedule::Linear, &cfg);
        assert!(e.events.windows(2).all(|w| w[0].time <= w[1].time));
        for ev in &e.events {
            let c = s.h_i.terms()[ev.term_index].coefficient;
            assert_eq!(ev.rotation_sign as f64, c.signum());
            assert!(ev.time > 0.0 && ev.time < cfg.total_time);
        }
        let rev = SamplerConfig { direction: Direction::Reverse, ..cfg };
        let er = sample_evolution(&s, SweepSchedule::Linear, &rev);
        for ev in &er.events {
            let c = s.h_i.terms()[ev.term_index].coefficient;
            assert_eq!(ev.rotation_sign as f64, -c.signum());
        }
    }

    #[test]
    fn poisson_means_match_per_term() {
        // empirical mean of per-term counts over many draws vs |a| ζ T / sin τ
        let s = toy_split();
        let cfg_base = SamplerConfig {
            total_time: 6.0,
            gate_angle: 0.25,
            direction: Direction::Forward,
            rng_seed: 77,
            stream_id: 0,
        };
        let n_draws = 4000;
        let mut counts = vec![0usize; s.h_i.terms().len()];
        for k in 0..n_draws {
            let cfg = SamplerConfig { stream_id: k as u64, ..cfg_base };
            for ev in sample_evolution(&s, SweepSchedule::Linear, &cfg).events {
                counts[ev.term_index] += 1;
            }
        }
        for (n, term) in s.h_i.terms().iter().enumerate() {
            let mean = term.coefficient.abs() * 0.5 * cfg_base.total_time
                / cfg_base.gate_angle.sin();
            let got = counts[n] as f64 / n_draws as f64;
            let se = (mean / n_draws as f64).sqrt();
            assert!(
                (got - mean).abs() < 5.0 * se,
                "term {n}: empirical {got} vs {mean} (se {se})"
            );
        }
    }

    #[test]
    fn expected_tqg_formula() {
        // single term, g = 4, |a| = 1, ζT/sinτ = 10 → 40
        let s = split(&PauliHamiltonian::parse("1.0 XZZX").unwrap());
        let tau = 0.5_f64;
        let cfg = SamplerConfig {
            total_time: 10.0 * tau.sin(),
            gate_angle: tau,
            direction: Direction::Forward,
            rng_seed: 0,
            stream_id: 0,
        };
        // weight-4 string has uncontrolled cost 2(4-1) = 6; scale the cost
        // model comparison to the stated g through a direct expectation
        let costs = GateCostModel::default();
        let got = expected_tqg(&s, SweepSchedule::Constant, &cfg, &costs);
        assert!((got - 60.0).abs() < 1e-9);
        let ctl = expected_controlled_tqg(&s, SweepSchedule::Constant, &cfg, &costs);
        assert!((ctl - 70.0).abs() < 1e-9);
    }

    #[test]
    fn tqg_scales_inversely_with_tau_in_small_angle_regime() {
        let s = toy_split();
        let costs = GateCostModel::default();
        let at = |tau: f64| {
            let cfg = SamplerConfig {
                total_time: 8.0,
                gate_angle: tau,
                direction: Direction::Forward,
                rng_seed: 0,
                stream_id: 0,
            };
            expected_tqg(&s, SweepSchedule::Linear, &cfg, &costs)
        };
        let ratio = at(0.05) / at(0.1);
        assert!((ratio - 2.0).abs() < 1e-2, "1/tau scaling, ratio = {ratio}");
    }
}

