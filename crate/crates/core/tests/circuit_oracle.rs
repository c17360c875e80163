//! Dense-matrix verification of the readout circuits: the ensemble mean
//! reproduces λ_A²·λ_s·ρ(s), and the reduction passes preserve each
//! circuit's action on the reference state.

use num_complex::Complex64;
use qasp_core::circuit::{
    build_ensemble, count_tqg, occupation_reduce, parity_reduce, uncontrol_diagonals,
    GateCostModel, OccupationProfile,
};
use qasp_core::data;
use qasp_core::dense;
use qasp_core::estimate::TrialEnergies;
use qasp_core::pauli::PauliHamiltonian;
use qasp_core::shift::split;
use qasp_core::sim::statevec::run_exact;

/// Im<HF| A(T)† e^{is(E_t - H)} A(T) |HF> from dense references.
fn dense_rho(
    h: &PauliHamiltonian,
    t_sweep: f64,
    s_central: f64,
    e_trial: f64,
    hf_bits: u64,
) -> f64 {
    let s = split(h);
    let psi_t = qasp_core::sim::adiabatic::exact_adiabatic(
        &s,
        qasp_core::schedule::SweepSchedule::Linear,
        t_sweep,
        hf_bits,
    )
    .unwrap();
    let m = dense::hamiltonian_matrix(h);
    let dim = m.nrows();
    let shifted =
        dense::CMatrix::identity(dim, dim) * Complex64::new(e_trial, 0.0) - &m;
    let u = dense::exp_i_hermitian(&shifted, s_central);
    let psi = dense::CVector::from_iterator(dim, psi_t.iter().copied());
    let val: Complex64 = (psi.adjoint() * u * &psi)[(0, 0)];
    val.im
}

#[test]
fn ensemble_mean_reproduces_attenuated_rho() {
    // reduced parameters keep the ensemble average cheap but exercise all
    // three unitaries and both trial branches
    let h = data::h3plus();
    let e_hf = h.expectation_in_basis_state(data::H3PLUS_HF_BITS, 6).unwrap();
    let s = split(&h);
    let t_sweep = 2.0;
    let tau = 0.1;
    let trial = TrialEnergies::new(e_hf - 0.04, 0.04, 2.0);
    let profile = OccupationProfile::from_bits(data::H3PLUS_HF_BITS, 6);
    let n = 2000;
    let pairs = build_ensemble(&s, h.identity_offset(), t_sweep, tau, &trial, &profile, n, 31);
    let correction = pairs[0].plus.meta.lambda_a
        * pairs[0].plus.meta.lambda_a_prime
        * pairs[0].plus.meta.lambda_s;

    let mut sum_plus = 0.0;
    let mut sumsq_plus = 0.0;
    let mut sum_minus = 0.0;
    for p in &pairs {
        let rp = run_exact(&p.plus).unwrap().raw_y() * p.plus.meta.direction_sign as f64;
        let rm = run_exact(&p.minus).unwrap().raw_y() * p.minus.meta.direction_sign as f64;
        sum_plus += rp;
        sumsq_plus += rp * rp;
        sum_minus += rm;
    }
    let mean_plus = sum_plus / n as f64;
    let mean_minus = sum_minus / n as f64;
    let se = ((sumsq_plus / n as f64 - mean_plus * mean_plus) / n as f64).sqrt();

    let want_plus = correction * dense_rho(&h, t_sweep, 2.0, trial.e_plus(), data::H3PLUS_HF_BITS);
    let want_minus =
        correction * dense_rho(&h, t_sweep, 2.0, trial.e_minus(), data::H3PLUS_HF_BITS);
    assert!(
        (mean_plus - want_plus).abs() < 4.0 * se + 1e-3,
        "plus branch: mean {mean_plus} vs {want_plus} (se {se})"
    );
    assert!(
        (mean_minus - want_minus).abs() < 4.0 * se + 1e-3,
        "minus branch: mean {mean_minus} vs {want_minus}"
    );
}

#[test]
fn hf_projection_is_unbiased_for_exact_overlaps() {
    // in the noiseless circuit the whole <Y> signal sits on the reference
    // register outcome, so the projected and raw overlaps coincide
    let h = data::h3plus();
    let e_hf = h.expectation_in_basis_state(data::H3PLUS_HF_BITS, 6).unwrap();
    let s = split(&h);
    let trial = TrialEnergies::new(e_hf - 0.04, 0.04, 2.0);
    let profile = OccupationProfile::from_bits(data::H3PLUS_HF_BITS, 6);
    let pairs = build_ensemble(&s, h.identity_offset(), 1.0, 0.15, &trial, &profile, 20, 3);
    for p in &pairs {
        let run = run_exact(&p.plus).unwrap();
        assert!(
            (run.raw_y() - run.hf_y()).abs() < 1e-12,
            "raw {} vs projected {}",
            run.raw_y(),
            run.hf_y()
        );
        let (py, pp) = run.parity_y();
        assert!((pp - 1.0).abs() < 1e-12, "noiseless parity mass {pp}");
        assert!((py - run.raw_y()).abs() < 1e-12);
    }
}

#[test]
fn time_reversed_circuit_flips_the_overlap_sign() {
    let h = data::h3plus();
    let e_hf = h.expectation_in_basis_state(data::H3PLUS_HF_BITS, 6).unwrap();
    let s = split(&h);
    let trial = TrialEnergies::new(e_hf - 0.04, 0.04, 2.0);
    let profile = OccupationProfile::from_bits(data::H3PLUS_HF_BITS, 6);
    let pairs = build_ensemble(&s, h.identity_offset(), 1.0, 0.15, &trial, &profile, 4, 12);
    for p in &pairs {
        let fwd = run_exact(&p.plus).unwrap().raw_y();
        let rev = run_exact(&p.plus.reversed()).unwrap().raw_y();
        assert!((fwd + rev).abs() < 1e-12, "{fwd} vs reversed {rev}");
    }
}

fn states_equal_up_to_phase(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    let k = a
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.norm_sqr().partial_cmp(&y.1.norm_sqr()).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    if b[k].norm() < 1e-12 {
        return false;
    }
    let phase = a[k] / b[k] / (a[k] / b[k]).norm();
    a.iter().zip(b).all(|(x, y)| (x - y * phase).norm() <= tol)
}

#[test]
fn reduction_passes_preserve_action_and_never_add_gates() {
    let h = data::h3plus();
    let e_hf = h.expectation_in_basis_state(data::H3PLUS_HF_BITS, 6).unwrap();
    let s = split(&h);
    let trial = TrialEnergies::new(e_hf - 0.04, 0.04, 3.0);
    let profile = OccupationProfile::from_bits(data::H3PLUS_HF_BITS, 6);
    let costs = GateCostModel::default();
    let pairs = build_ensemble(&s, h.identity_offset(), 2.0, 0.1, &trial, &profile, 25, 8);
    for p in &pairs {
        for c in [&p.plus, &p.minus] {
            let reference = run_exact(c).unwrap().state;
            let base_cost = count_tqg(c, &costs);

            // both pass orders agree with the original action exactly
            let ab = occupation_reduce(&parity_reduce(c, &profile).unwrap(), &profile);
            let ba = parity_reduce(&occupation_reduce(c, &profile), &profile).unwrap();
            for reduced in [&ab, &ba] {
                let state = run_exact(reduced).unwrap().state;
                let worst = state
                    .iter()
                    .zip(&reference)
                    .map(|(x, y)| (x - y).norm())
                    .fold(0.0, f64::max);
                assert!(worst < 1e-10, "pass changed the state by {worst}");
                assert!(count_tqg(reduced, &costs) <= base_cost);
            }

            // freeing the diagonal segments only moves a global phase
            let freed = uncontrol_diagonals(&ab);
            assert!(count_tqg(&freed, &costs) <= count_tqg(&ab, &costs));
            let state = run_exact(&freed).unwrap().state;
            assert!(states_equal_up_to_phase(&state, &reference, 1e-10));
            // and the measured joint distribution is untouched
            let d0 = run_exact(c).unwrap().outcome_distribution();
            let d1 = run_exact(&freed).unwrap().outcome_distribution();
            for ((pa, ya, ba_), (pb, yb, bb)) in d0.iter().zip(&d1) {
                assert_eq!((ya, ba_), (yb, bb));
                assert!((pa - pb).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn eigenstate_limit_matches_trigonometric_form() {
    // rho(s) evaluated on the prepared state equals
    // Σ_k |<k|ψ>|² sin(s(E_t - E_k)); checked against the dense route
    let h = data::h3plus();
    let e_hf = h.expectation_in_basis_state(data::H3PLUS_HF_BITS, 6).unwrap();
    let (e_gs, _) = qasp_core::sim::exact_ground_state_in_sector(
        &h,
        data::H3PLUS_HF_BITS,
        data::H3PLUS_ORDERING,
    )
    .unwrap();
    let rho = dense_rho(&h, 8.0, 10.0, e_hf, data::H3PLUS_HF_BITS);
    // the prepared state has fidelity 0.998, so the eigenstate value
    // sin(10·(E_HF - E_GS)) dominates
    let ideal = (10.0 * (e_hf - e_gs)).sin();
    assert!((rho - ideal).abs() < 0.01, "rho {rho} vs eigenstate {ideal}");
}
