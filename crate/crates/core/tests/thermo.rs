mod common;

use std::f64::consts::LN_2;

use gptt::gpt::{product_state, swap, ChannelMap, Model, StateVec};
use gptt::hilbert::{CMat, CVec, Field, C64};
use gptt::random::{haar_unitary, random_pure_state, random_pure_test, random_state, rng_from_seed};
use gptt::symmetry::chi;
use gptt::thermo::{
    beta_from_energy, bipartite_entropies, boltzmann_weights, entropy, entropy_of_spectrum, erasure_demo, gibbs_state,
    landauer_ledger, log_partition, max_entropy_audit, measurement_distribution, monotone_audit, relative_entropy,
    von_neumann, ThermoConfig,
};
use gptt::zoo::{compose_systems, parse_model_ref};
use gptt::Error;
use nalgebra::DVector;

use common::*;

fn model(text: &str) -> Model {
    parse_model_ref(text).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn renyi_examples() {
    let mut rng = rng_from_seed(0);
    for name in ["quantum:3", "classical:4", "doubled_quantum:2"] {
        let m = model(name);
        let psi = random_pure_state(&mut rng, &m);
        let c = chi(&m).unwrap();
        let ln_d = (m.capacity() as f64).ln();
        for a in [0.0, 0.5, 1.0, 2.0, f64::INFINITY] {
            assert!(entropy(&psi, a).unwrap().abs() < 1e-10, "{name} α={a}");
            assert!(close(entropy(&c, a).unwrap(), ln_d, 1e-12), "{name} α={a}");
        }
    }
    let s2 = entropy_of_spectrum(&[0.75, 0.25], 2.0).unwrap();
    assert!(close(s2, (8.0f64 / 5.0).ln(), 1e-14));
    // the α → 1 limit is the Shannon entropy
    let p = [0.5, 0.3, 0.2];
    let s1 = entropy_of_spectrum(&p, 1.0).unwrap();
    assert!(close(s1, shannon(&p), 1e-14));
    assert!(close(entropy_of_spectrum(&p, 1.0 + 1e-7).unwrap(), s1, 1e-6));
    assert!(close(entropy_of_spectrum(&p, f64::INFINITY).unwrap(), -(0.5f64).ln(), 1e-14));
    assert!(close(entropy_of_spectrum(&p, 0.0).unwrap(), 3f64.ln(), 1e-14));
    assert!(entropy_of_spectrum(&p, -1.0).is_err());
}

#[test]
fn von_neumann_matches_oracle() {
    let mut rng = rng_from_seed(1);
    let q = model("quantum:4");
    for _ in 0..20 {
        let rho = random_state(&mut rng, &q);
        assert!(close(von_neumann(&rho).unwrap(), von_neumann_matrix(&rho.to_matrix().unwrap()), 1e-10));
    }
}

#[test]
fn relative_entropy_examples() {
    let mut rng = rng_from_seed(2);
    let q = model("quantum:3");
    let rho = random_state(&mut rng, &q);
    assert!(relative_entropy(&rho, &rho).unwrap().value().abs() < 1e-10);
    let psi = random_pure_state(&mut rng, &q);
    assert!(close(relative_entropy(&psi, &chi(&q).unwrap()).unwrap().value(), 3f64.ln(), 1e-10));
    let set = gptt::zoo::pure_maximal_set(&q).unwrap();
    assert!(relative_entropy(&set.states[0], &set.states[1]).unwrap().is_infinite());
    assert!(relative_entropy(&rho, &set.states[1]).unwrap().is_infinite());
}

#[test]
fn relative_entropy_matches_matrix_logarithm_oracle() {
    let mut rng = rng_from_seed(3);
    let q = model("quantum:2");
    for _ in 0..20 {
        let (rho, sigma) = (random_state(&mut rng, &q), random_state(&mut rng, &q));
        // D(ρ‖σ) = −S(ρ) − tr ρ log σ, with log σ from its eigenbasis
        let sm = sigma.to_matrix().unwrap();
        let eig = nalgebra::SymmetricEigen::new(sm);
        let log_sigma = &eig.eigenvectors
            * CMat::from_diagonal(&eig.eigenvalues.map(|v| C64::new(v.ln(), 0.0)))
            * eig.eigenvectors.adjoint();
        let rm = rho.to_matrix().unwrap();
        let oracle = -von_neumann_matrix(&rm) - trace(&(&rm * log_sigma));
        assert!(close(relative_entropy(&rho, &sigma).unwrap().value(), oracle, 1e-10));
    }
}

#[test]
fn bipartite_examples() {
    let mut rng = rng_from_seed(4);
    let q = model("quantum:2");
    let qq = compose_systems(&q, &q).unwrap();
    let prod = product_state(&qq, &random_state(&mut rng, &q), &random_state(&mut rng, &q)).unwrap();
    assert!(bipartite_entropies(&prod).unwrap().mutual.abs() < 1e-10);

    let h = 0.5f64.sqrt();
    let bell = CVec::from_vec(vec![C64::new(h, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(h, 0.0)]);
    let b = bipartite_entropies(&StateVec::pure_from_vector(&qq, &bell).unwrap()).unwrap();
    assert!(b.s_ab.abs() < 1e-10);
    assert!(close(b.s_a, LN_2, 1e-10) && close(b.s_b, LN_2, 1e-10));
    assert!(close(b.mutual, 2.0 * LN_2, 1e-10));
    assert!(close(b.conditional, -LN_2, 1e-10));

    let c = model("classical:2");
    let cc = compose_systems(&c, &c).unwrap();
    let correlated = StateVec::from_slice(&cc, &[0.5, 0.0, 0.0, 0.5]).unwrap();
    let b = bipartite_entropies(&correlated).unwrap();
    assert!(close(b.mutual, LN_2, 1e-12));
    assert!(b.conditional.abs() < 1e-12);
}

#[test]
fn spectral_measurement_attains_the_monotone() {
    let mut rng = rng_from_seed(5);
    let q = model("quantum:3");
    let rho = random_state(&mut rng, &q);
    let audit = monotone_audit(&mut rng, &rho, 1.0, 200).unwrap();
    assert!(audit.pass);
    assert!(close(audit.spectral_measurement, audit.value, 1e-10));
    assert!(audit.min_measurement_gap >= -1e-8);
    assert!(audit.min_preparation_gap >= -1e-8);

    // any pure test: Shannon entropy of outcomes never below the spectral value
    for _ in 0..50 {
        let test = random_pure_test(&mut rng, &q, 2);
        let p = measurement_distribution(&test, &rho).unwrap();
        assert!(shannon(&p) >= von_neumann(&rho).unwrap() - 1e-8);
    }
}

#[test]
fn splitting_an_outcome_leaves_the_monotone_unchanged() {
    let q = model("quantum:3");
    let rho = StateVec::from_slice(&q, &[0.6, 0.4, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
    let set = gptt::zoo::pure_maximal_set(&q).unwrap();
    let mut test = set.effects.clone();
    let third = test.pop().unwrap();
    let half = gptt::gpt::EffectVec::new(&q, third.coords() * 0.5).unwrap();
    test.push(half.clone());
    test.push(half);
    let p = measurement_distribution(&test, &rho).unwrap();
    assert_eq!(p.len(), 4);
    assert!(close(shannon(&p), von_neumann(&rho).unwrap(), 1e-12));
}

#[test]
fn gibbs_examples() {
    let c = model("classical:2");
    let h = DVector::from_vec(vec![0.0, 1.0]);
    let g = gibbs_state(&c, &h, 3f64.ln()).unwrap();
    assert!((g.coords() - DVector::from_vec(vec![0.75, 0.25])).amax() < 1e-14);
    assert!((gibbs_state(&c, &h, 0.0).unwrap().coords() - chi(&c).unwrap().coords()).amax() < 1e-15);

    let q = model("quantum:3");
    let flat = q.unit_effect() * 2.5;
    for beta in [-1.0, 0.0, 0.7, 5.0] {
        let g = gibbs_state(&q, &flat, beta).unwrap();
        assert!((g.coords() - chi(&q).unwrap().coords()).amax() < 1e-14);
    }

    // weights are shifted so the ground level has weight 1
    let w = boltzmann_weights(&[0.0, 1.0], 3f64.ln()).unwrap();
    assert!(close(w[0], 1.0, 1e-15) && close(w[1], 1.0 / 3.0, 1e-15));
    // large β does not overflow
    let w = boltzmann_weights(&[0.0, 1.0, 2.0], 1e4).unwrap();
    assert!(close(w[0], 1.0, 1e-15));
    assert!(log_partition(&[0.0, 1.0], 1e4).unwrap().is_finite());
}

#[test]
fn inverse_temperature_examples() {
    let c = model("classical:2");
    let h = DVector::from_vec(vec![0.0, 1.0]);
    assert!(close(beta_from_energy(&c, &h, 0.25).unwrap(), 3f64.ln(), 1e-10));
    assert!(beta_from_energy(&c, &h, 0.5).unwrap().abs() < 1e-12);
    assert_eq!(beta_from_energy(&c, &h, 0.0).unwrap(), f64::INFINITY);
    assert_eq!(beta_from_energy(&c, &h, 1.0).unwrap(), f64::NEG_INFINITY);
    assert!(matches!(beta_from_energy(&c, &h, 1.5), Err(Error::InvalidParameter(_))));

    let g = gibbs_state(&c, &h, 3f64.ln()).unwrap();
    let s = von_neumann(&g).unwrap();
    assert!(close(s, 3f64.ln() / 4.0 + (4.0f64 / 3.0).ln(), 1e-12));
}

#[test]
fn shell_audit_at_the_mean_energy() {
    let mut rng = rng_from_seed(6);
    let q = model("quantum:3");
    let h = DVector::from_vec(vec![0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let audit = max_entropy_audit(&mut rng, &q, &h, 1.0, 100).unwrap();
    assert!(audit.pass);
    assert!(audit.beta.abs() < 1e-12);
    assert!(close(audit.gibbs_entropy, 3f64.ln(), 1e-12));
    assert!(audit.max_excess <= 1e-8);
}

fn qubit_hamiltonian(q: &Model, e1: f64) -> DVector<f64> {
    let mut h = DVector::zeros(q.vector_dim());
    h[1] = e1;
    h
}

#[test]
fn landauer_identity_and_swap() {
    let mut rng = rng_from_seed(7);
    let q = model("quantum:2");
    let se = compose_systems(&q, &q).unwrap();
    let h = qubit_hamiltonian(&q, 1.0);
    let config = ThermoConfig::default();
    let rho = random_state(&mut rng, &q);

    let l = landauer_ledger(&rho, &h, 1.0, &ChannelMap::identity(&se), &config).unwrap();
    assert!(l.delta_e_env.abs() < 1e-12 && l.ds_system.abs() < 1e-12);
    assert!(l.mutual_term.abs() < 1e-10 && l.relent_term.value().abs() < 1e-10);

    let beta = 0.8;
    let l = landauer_ledger(&rho, &h, beta, &swap(&se).unwrap(), &config).unwrap();
    let gamma = gibbs_state(&q, &h, beta).unwrap();
    // after the swap the system holds γ and the environment holds ρ
    assert!(close(l.ds_system, von_neumann(&rho).unwrap() - von_neumann(&gamma).unwrap(), 1e-10));
    assert!(close(l.delta_e_env, h.dot(rho.coords()) - h.dot(gamma.coords()), 1e-12));
    assert!(l.mutual_term.abs() < 1e-10);
    assert!(close(l.relent_term.value(), relative_entropy(&rho, &gamma).unwrap().value(), 1e-10));
    assert!(l.equality_residual.unwrap().abs() < 1e-10);
    l.verify().unwrap();
}

#[test]
fn landauer_with_pure_system_and_random_unitary() {
    let mut rng = rng_from_seed(8);
    let q = model("quantum:2");
    let se = compose_systems(&q, &q).unwrap();
    let h = qubit_hamiltonian(&q, 1.0);
    for _ in 0..20 {
        let psi = random_pure_state(&mut rng, &q);
        let u = ChannelMap::unitary(&se, &haar_unitary(&mut rng, 4, Field::Complex)).unwrap();
        let l = landauer_ledger(&psi, &h, 1.0, &u, &ThermoConfig::default()).unwrap();
        assert!(l.equality_residual.unwrap().abs() <= 1e-7);
        assert!(l.checks().iter().all(|c| c.pass));
    }
}

#[test]
fn landauer_rejects_bad_inputs() {
    let q = model("quantum:2");
    let se = compose_systems(&q, &q).unwrap();
    let h = qubit_hamiltonian(&q, 1.0);
    let rho = chi(&q).unwrap();
    let id = ChannelMap::identity(&se);
    for beta in [0.0, -1.0, f64::INFINITY, f64::NAN] {
        assert!(landauer_ledger(&rho, &h, beta, &id, &ThermoConfig::default()).is_err(), "β={beta}");
    }
    let chi_se = chi(&se).unwrap();
    let depolarise = ChannelMap::measure_and_prepare(&se, &se, &[gptt::gpt::EffectVec::unit(&se)], &[chi_se]).unwrap();
    assert!(landauer_ledger(&rho, &h, 1.0, &depolarise, &ThermoConfig::default()).is_err());
    assert!(ThermoConfig::new(0.0).is_err());
    assert!(close(ThermoConfig::new(2.0).unwrap().temperature(0.5), 1.0, 1e-15));
}

#[test]
fn erasure_of_a_mixed_qubit() {
    let q = model("quantum:2");
    let h = qubit_hamiltonian(&q, 1.0);
    let r = erasure_demo(&chi(&q).unwrap(), 1.0, &h, &q, &ThermoConfig::default()).unwrap();
    assert!(r.ledger.delta_e_env.abs() <= 1e-10);
    assert!(close(r.entropy_before - r.entropy_after, LN_2, 1e-10));
    assert!(close(r.conditional_before, -LN_2, 1e-10));
    assert!(close(r.memory_bound_rhs, -LN_2, 1e-10));
    assert!(r.checks().iter().all(|c| c.pass));

    let mut rng = rng_from_seed(9);
    // a small environment keeps the system-memory-environment map manageable
    for (name, env_name) in [("quantum:3", "quantum:2"), ("doubled_quantum:2", "doubled_quantum:1")] {
        let m = model(name);
        let env = model(env_name);
        let h = DVector::from_fn(env.vector_dim(), |i, _| if i == 1 { 0.5 } else { 0.0 });
        let rho = random_state(&mut rng, &m);
        let r = erasure_demo(&rho, 2.0, &h, &env, &ThermoConfig::default()).unwrap();
        assert!(r.checks().iter().all(|c| c.pass), "{name}: {:?}", r.checks());
        assert!(close(r.conditional_before, -von_neumann(&rho).unwrap(), 1e-9), "{name}");
    }
    let psi = random_pure_state(&mut rng, &q);
    assert!(erasure_demo(&psi, 1.0, &h, &q, &ThermoConfig::default()).is_err());
}

#[test]
fn shannon_oracle_matches_entropy_of_spectrum() {
    let mut rng = rng_from_seed(10);
    for d in 2..7 {
        let p = gptt::random::random_probability(&mut rng, d);
        assert!(close(entropy_of_spectrum(&p, 1.0).unwrap(), shannon(&p), 1e-14));
    }
}
