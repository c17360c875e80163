//! Ensemble-mean checks of the randomized evolution against the exact
//! time-ordered unitary: the average of sampled unitaries must equal
//! λ·A(T), and reversed draws its adjoint.

use num_complex::Complex64;
use qasp_core::dense::{operator_norm, CMatrix};
use qasp_core::pauli::PauliHamiltonian;
use qasp_core::sampler::{sample_evolution, Direction, SamplerConfig};
use qasp_core::schedule::SweepSchedule;
use qasp_core::shift::{split, SplitHamiltonian};
use qasp_core::sim::adiabatic::evolution_unitary;
use qasp_core::sim::statevec::{basis_state, evolve_sampled};

fn sampled_unitary(split: &SplitHamiltonian, cfg: &SamplerConfig, schedule: SweepSchedule) -> CMatrix {
    let l = split.qubit_count();
    let dim = 1usize << l;
    let evo = sample_evolution(split, schedule, cfg);
    let mut u = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut psi = basis_state(l, col as u64);
        evolve_sampled(&evo, split, &mut psi);
        for row in 0..dim {
            u[(row, col)] = psi[row];
        }
    }
    u
}

fn mean_deviation(
    split: &SplitHamiltonian,
    schedule: SweepSchedule,
    t_total: f64,
    tau: f64,
    direction: Direction,
    n_samples: usize,
    target: &CMatrix,
) -> f64 {
    let dim = target.nrows();
    let mut acc = CMatrix::zeros(dim, dim);
    for k in 0..n_samples {
        let cfg = SamplerConfig {
            total_time: t_total,
            gate_angle: tau,
            direction,
            rng_seed: 1234,
            stream_id: k as u64,
        };
        acc += sampled_unitary(split, &cfg, schedule);
    }
    acc /= Complex64::new(n_samples as f64, 0.0);
    operator_norm(&(acc - target))
}

#[test]
fn two_qubit_mean_matches_attenuated_evolution() {
    // mixed-sign couplings exercise the rotation-sign convention; the
    // diagonal part has an offset so segment phases matter
    let h = PauliHamiltonian::parse("-0.45\n0.35 XI\n-0.25 YY\n0.3 ZI\n-0.2 IZ\n0.15 ZZ").unwrap();
    let s = split(&h);
    let t_total = 1.0;
    let tau = 0.3;
    let exact = evolution_unitary(&s, SweepSchedule::Linear, t_total, 4000);
    let lambda = qasp_core::sampler::attenuation_factor(s.mu_i, 0.5, t_total, tau);
    let target = exact.map(|c| c * lambda);
    let dev = mean_deviation(&s, SweepSchedule::Linear, t_total, tau, Direction::Forward, 60_000, &target);
    assert!(dev < 7e-3, "|mean - lambda A| = {dev}");
}

#[test]
fn reversed_draws_average_to_the_adjoint() {
    let h = PauliHamiltonian::parse("0.4 XZ\n-0.3 ZY\n0.5 ZI").unwrap();
    let s = split(&h);
    let t_total = 0.8;
    let tau = 0.25;
    let exact = evolution_unitary(&s, SweepSchedule::Constant, t_total, 4000);
    let lambda = qasp_core::sampler::attenuation_factor(s.mu_i, 1.0, t_total, tau);
    let target = exact.adjoint().map(|c| c * lambda);
    let dev =
        mean_deviation(&s, SweepSchedule::Constant, t_total, tau, Direction::Reverse, 60_000, &target);
    assert!(dev < 7e-3, "|mean reversed - lambda A†| = {dev}");
}

#[test]
fn deviation_shrinks_like_inverse_sqrt_samples() {
    let h = PauliHamiltonian::parse("0.4 XY\n0.3 ZI").unwrap();
    let s = split(&h);
    let t_total = 1.2;
    let tau = 0.3;
    let exact = evolution_unitary(&s, SweepSchedule::Linear, t_total, 4000);
    let lambda = qasp_core::sampler::attenuation_factor(s.mu_i, 0.5, t_total, tau);
    let target = exact.map(|c| c * lambda);
    let dim = target.nrows();
    // several disjoint batches per size keep the norm estimate stable
    let sizes = [300usize, 3000, 30_000];
    let batches = 4;
    let mut stream = 0u64;
    let devs: Vec<f64> = sizes
        .iter()
        .map(|&n| {
            let mut total = 0.0;
            for _ in 0..batches {
                let mut acc = CMatrix::zeros(dim, dim);
                for _ in 0..n {
                    let cfg = SamplerConfig {
                        total_time: t_total,
                        gate_angle: tau,
                        direction: Direction::Forward,
                        rng_seed: 77,
                        stream_id: stream,
                    };
                    stream += 1;
                    acc += sampled_unitary(&s, &cfg, SweepSchedule::Linear);
                }
                let mean = acc.map(|c| c / n as f64);
                total += operator_norm(&(mean - &target));
            }
            total / batches as f64
        })
        .collect();
    // least-squares slope of log dev vs log n
    let xs: Vec<f64> = sizes.iter().map(|n| (*n as f64).ln()).collect();
    let ys: Vec<f64> = devs.iter().map(|d| d.ln()).collect();
    let xm = xs.iter().sum::<f64>() / 3.0;
    let ym = ys.iter().sum::<f64>() / 3.0;
    let slope = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xm) * (y - ym))
        .sum::<f64>()
        / xs.iter().map(|x| (x - xm).powi(2)).sum::<f64>();
    assert!(
        (slope + 0.5).abs() < 0.1,
        "convergence slope {slope}, deviations {devs:?}"
    );
}

#[test]
fn per_term_event_counts_are_poisson() {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let h = PauliHamiltonian::parse("0.5 XI\n-0.35 YY\n0.2 ZI").unwrap();
    let s = split(&h);
    let t_total = 5.0;
    let tau: f64 = 0.2;
    let n_draws = 10_000;
    for (term, coeff) in [(0usize, 0.5f64), (1, 0.35)] {
        let mean = coeff * 0.5 * t_total / tau.sin();
        let mut counts = std::collections::HashMap::new();
        for k in 0..n_draws {
            let cfg = SamplerConfig {
                total_time: t_total,
                gate_angle: tau,
                direction: Direction::Forward,
                rng_seed: 5,
                stream_id: k as u64,
            };
            let e = sample_evolution(&s, SweepSchedule::Linear, &cfg);
            let m = e.events.iter().filter(|ev| ev.term_index == term).count();
            *counts.entry(m).or_insert(0usize) += 1;
        }
        // chi-square against the Poisson pmf over adequately filled cells
        let mut chi2 = 0.0;
        let mut dof: i64 = -1;
        let pmf = |m: usize| {
            let mut p = (-mean).exp();
            for i in 1..=m {
                p *= mean / i as f64;
            }
            p
        };
        let max_m = *counts.keys().max().unwrap();
        let mut tail_expected = n_draws as f64;
        for m in 0..=max_m {
            let expected = n_draws as f64 * pmf(m);
            tail_expected -= expected;
            if expected < 8.0 {
                continue;
            }
            let got = *counts.get(&m).unwrap_or(&0) as f64;
            chi2 += (got - expected).powi(2) / expected;
            dof += 1;
        }
        let _ = tail_expected;
        assert!(dof >= 2, "enough cells");
        let dist = ChiSquared::new(dof as f64).unwrap();
        let p = 1.0 - dist.cdf(chi2);
        assert!(p > 0.001, "term {term}: chi2 {chi2} with {dof} dof, p = {p}");
    }
}
