mod common;

use gptt::gpt::{
    compose, cone_membership, effect_norm, marginal, pairing, product_state, state_norm, swap, tensor, ChannelMap,
    ChannelTag, EffectVec, Model, Side, StateVec,
};
use gptt::hilbert::{CVec, Field, C64};
use gptt::random::{haar_unitary, random_pure_state, random_state, rng_from_seed};
use gptt::spectral::dagger;
use gptt::zoo::{compose_systems, parse_model_ref, pure_maximal_set, sector_weights, trivial_system};
use gptt::Error;
use nalgebra::{DMatrix, DVector};

use common::*;

fn model(text: &str) -> Model {
    parse_model_ref(text).unwrap()
}

const SHARP: [&str; 7] = [
    "classical:3",
    "quantum:2",
    "quantum:3",
    "rebit",
    "doubled_quantum:2",
    "extended_classical:2:2",
    "classical_quantum:2:2",
];

#[test]
fn unit_effect_pairs_to_one_with_normalised_states() {
    let mut rng = rng_from_seed(0);
    for name in SHARP {
        let m = model(name);
        for _ in 0..5 {
            let rho = random_state(&mut rng, &m);
            let p = pairing(&EffectVec::unit(&m), &rho).unwrap();
            assert!((p - 1.0).abs() < 1e-12, "{name}: {p}");
        }
    }
}

#[test]
fn dagger_pairs_to_kronecker_delta_on_maximal_sets() {
    for name in SHARP {
        let m = model(name);
        let set = pure_maximal_set(&m).unwrap();
        assert_eq!(set.states.len(), m.capacity(), "{name}");
        for (i, a) in set.states.iter().enumerate() {
            let da = dagger(a).unwrap();
            for (j, b) in set.states.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((pairing(&da, b).unwrap() - expected).abs() < 1e-12, "{name} ({i},{j})");
            }
        }
    }
}

#[test]
fn state_norm_examples() {
    let mut rng = rng_from_seed(1);
    for name in ["classical:3", "quantum:3", "doubled_quantum:2", "square_bit", "diamond_bit"] {
        let m = model(name);
        let zero = DVector::zeros(m.vector_dim());
        assert_eq!(state_norm(&m, &zero), 0.0, "{name}");
        let rho = random_state(&mut rng, &m);
        assert!((state_norm(&m, rho.coords()) - 1.0).abs() < 1e-9, "{name}");
    }
    for name in ["classical:3", "quantum:3", "doubled_quantum:2", "square_bit"] {
        let m = model(name);
        let set = pure_maximal_set(&m).unwrap();
        let diff = set.states[0].coords() - set.states[1].coords();
        assert!((state_norm(&m, &diff) - 2.0).abs() < 1e-9, "{name}: {}", state_norm(&m, &diff));
    }
}

#[test]
fn state_norm_matches_trace_norm_oracle() {
    let mut rng = rng_from_seed(2);
    let q = model("quantum:3");
    for _ in 0..20 {
        let (a, b) = (random_state(&mut rng, &q), random_state(&mut rng, &q));
        let diff = a.to_matrix().unwrap() - b.to_matrix().unwrap();
        let got = state_norm(&q, &(a.coords() - b.coords()));
        assert!((got - trace_norm(&diff)).abs() < 1e-10);
    }
}

#[test]
fn effect_norm_examples() {
    for name in ["classical:3", "quantum:2", "doubled_quantum:2"] {
        let m = model(name);
        assert!((effect_norm(&m, m.unit_effect()) - 1.0).abs() < 1e-12, "{name}");
        let set = pure_maximal_set(&m).unwrap();
        let d0 = dagger(&set.states[0]).unwrap();
        let d1 = dagger(&set.states[1]).unwrap();
        assert!((effect_norm(&m, d0.coords()) - 1.0).abs() < 1e-12, "{name}");
        let mix = d0.coords() * 0.3 + d1.coords() * 0.7;
        assert!((effect_norm(&m, &mix) - 0.7).abs() < 1e-12, "{name}");
    }
}

#[test]
fn identity_and_discard_channels() {
    let mut rng = rng_from_seed(3);
    let q = model("quantum:2");
    let rho = random_state(&mut rng, &q);
    let id = ChannelMap::identity(&q);
    assert!((id.apply(&rho).unwrap().coords() - rho.coords()).amax() < 1e-15);
    let discard = ChannelMap::discard(&q).unwrap();
    let out = discard.apply(&rho).unwrap();
    assert!(out.model().same_system(&trivial_system()));
    assert_eq!(out.coords().len(), 1);
    assert!((out.coords()[0] - 1.0).abs() < 1e-12);
}

#[test]
fn swap_exchanges_product_factors() {
    let mut rng = rng_from_seed(4);
    for name in ["quantum:2", "classical:3", "doubled_quantum:2"] {
        let m = model(name);
        let mm = compose_systems(&m, &m).unwrap();
        let (a, b) = (random_state(&mut rng, &m), random_state(&mut rng, &m));
        let swapped = swap(&mm).unwrap().apply(&product_state(&mm, &a, &b).unwrap()).unwrap();
        let expected = product_state(&mm, &b, &a).unwrap();
        assert!((swapped.coords() - expected.coords()).amax() < 1e-12, "{name}");
    }
}

#[test]
fn composition_of_channels() {
    let mut rng = rng_from_seed(5);
    let q = model("quantum:3");
    let u1 = ChannelMap::unitary(&q, &haar_unitary(&mut rng, 3, Field::Complex)).unwrap();
    let u2 = ChannelMap::unitary(&q, &haar_unitary(&mut rng, 3, Field::Complex)).unwrap();
    let id = ChannelMap::identity(&q);
    assert!((compose(&id, &u1).unwrap().matrix() - u1.matrix()).amax() < 1e-14);

    let both = compose(&u2, &u1).unwrap();
    assert!(both.has_tag(ChannelTag::Reversible));
    let inv = both.inverse().unwrap();
    let expected = u1.inverse().unwrap().matrix() * u2.inverse().unwrap().matrix();
    assert!((inv.matrix() - &expected).amax() < 1e-12);
    assert!((inv.matrix() * both.matrix() - DMatrix::identity(9, 9)).amax() < 1e-12);
}

#[test]
fn tensor_of_unital_channels_is_unital() {
    let mut rng = rng_from_seed(6);
    let q = model("quantum:2");
    let mix = |rng: &mut _| {
        let a = ChannelMap::unitary(&q, &haar_unitary(rng, 2, Field::Complex)).unwrap();
        let b = ChannelMap::unitary(&q, &haar_unitary(rng, 2, Field::Complex)).unwrap();
        ChannelMap::mixture(&[0.4, 0.6], &[a, b]).unwrap()
    };
    let (c1, c2) = (mix(&mut rng), mix(&mut rng));
    assert!(c1.has_tag(ChannelTag::Unital) && c2.has_tag(ChannelTag::Unital));
    let t = tensor(&c1, &c2).unwrap();
    assert!(t.has_tag(ChannelTag::Unital));
    assert!(t.unital_residual().unwrap() < 1e-12);
}

#[test]
fn marginal_of_product_state() {
    let mut rng = rng_from_seed(7);
    for name in ["quantum:2", "classical:2", "doubled_quantum:2", "extended_classical:2:1"] {
        let m = model(name);
        let mm = compose_systems(&m, &m).unwrap();
        let (a, b) = (random_state(&mut rng, &m), random_state(&mut rng, &m));
        let ab = product_state(&mm, &a, &b).unwrap();
        assert!((marginal(&ab, Side::Left).unwrap().coords() - a.coords()).amax() < 1e-12, "{name}");
        assert!((marginal(&ab, Side::Right).unwrap().coords() - b.coords()).amax() < 1e-12, "{name}");
    }
}

#[test]
fn marginals_against_partial_trace_oracle() {
    let mut rng = rng_from_seed(8);
    let q = model("quantum:2");
    let qq = compose_systems(&q, &q).unwrap();
    let s = 0.5f64.sqrt();
    let bell = CVec::from_vec(vec![C64::new(s, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(s, 0.0)]);
    let bell = StateVec::pure_from_vector(&qq, &bell).unwrap();
    for side in [Side::Left, Side::Right] {
        let m = marginal(&bell, side).unwrap().to_matrix().unwrap();
        assert!((m - gptt::hilbert::CMat::identity(2, 2) * C64::new(0.5, 0.0)).camax() < 1e-12);
    }
    for _ in 0..10 {
        let rho = random_pure_state(&mut rng, &qq);
        let full = rho.to_matrix().unwrap();
        let a = marginal(&rho, Side::Left).unwrap().to_matrix().unwrap();
        let b = marginal(&rho, Side::Right).unwrap().to_matrix().unwrap();
        assert!((a - trace_out_second(&full, 2, 2)).camax() < 1e-12);
        assert!((b - trace_out_first(&full, 2, 2)).camax() < 1e-12);
    }
}

#[test]
fn doubled_entangled_state_has_block_diagonal_marginal() {
    let d = model("doubled_quantum:2");
    let dd = compose_systems(&d, &d).unwrap();
    let c = dd.composite().unwrap();
    let mut psi = CVec::zeros(dd.hilbert_dim());
    let s = 0.5f64.sqrt();
    // |0,0⟩|0,0⟩ + |1,0⟩|1,0⟩: sector-1 basis starts at index 2
    psi[c.index_of(0, 0)] = C64::new(s, 0.0);
    psi[c.index_of(2, 2)] = C64::new(s, 0.0);
    let state = StateVec::pure_from_vector(&dd, &psi).unwrap();
    for side in [Side::Left, Side::Right] {
        let m = marginal(&state, side).unwrap().to_matrix().unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j && (i == 0 || i == 2) { 0.5 } else { 0.0 };
                assert!((m[(i, j)] - C64::new(expected, 0.0)).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn cone_membership_examples() {
    let sq = model("square_bit");
    let centre = DVector::from_vec(vec![0.0, 0.0, 1.0]);
    assert!(cone_membership(&centre, sq.state_cone()).is_inside());
    let v = sq.vertices().unwrap()[0].clone();
    assert!(!cone_membership(&(-&v), sq.state_cone()).is_inside());
    let mix = &sq.vertices().unwrap()[1] * 0.25 + &sq.vertices().unwrap()[2] * 0.5 + &v * 0.25;
    assert!(cone_membership(&mix, sq.state_cone()).is_inside());
    assert!(!cone_membership(&DVector::from_vec(vec![1.5, 0.0, 1.0]), sq.state_cone()).is_inside());

    let mut rng = rng_from_seed(9);
    let q = model("quantum:3");
    let psi = random_pure_state(&mut rng, &q);
    assert!(cone_membership(psi.coords(), q.state_cone()).is_inside());
    assert!(!cone_membership(&(-psi.coords()), q.state_cone()).is_inside());
}

#[test]
fn states_outside_the_cone_are_rejected() {
    let q = model("quantum:2");
    // diag(1.2, −0.2)
    let err = StateVec::from_slice(&q, &[1.2, -0.2, 0.0, 0.0]).unwrap_err();
    assert!(matches!(err, Error::ConeViolation { .. }), "{err:?}");
    let err = StateVec::from_slice(&q, &[1.0, 0.0]).unwrap_err();
    assert!(matches!(err, Error::Dimension { .. }), "{err:?}");
}

#[test]
fn model_dimensions() {
    let cases = [
        ("quantum:2", 2, 4),
        ("doubled_quantum:2", 4, 8),
        ("rebit", 2, 3),
        ("classical:5", 5, 5),
        ("restricted_trit", 1, 3),
        ("square_bit", 2, 3),
    ];
    for (name, capacity, dim) in cases {
        let m = model(name);
        assert_eq!((m.capacity(), m.vector_dim()), (capacity, dim), "{name}");
    }
    let trit = model("restricted_trit");
    assert_eq!(trit.vertices().unwrap().len(), 3);
}

#[test]
fn composite_dimensions() {
    let c = compose_systems(&model("classical:2"), &model("classical:3")).unwrap();
    assert_eq!((c.capacity(), c.vector_dim()), (6, 6));
    let d = model("doubled_quantum:2");
    let dd = compose_systems(&d, &d).unwrap();
    assert_eq!(dd.vector_dim(), 2 * d.vector_dim() * d.vector_dim());
    assert_eq!(dd.layout().unwrap().sectors(), &[8, 8]);
    let e = model("extended_classical:2:1");
    let ee = compose_systems(&e, &e).unwrap();
    assert_eq!(ee.layout().unwrap().sectors(), &[2, 2]);
    assert!(compose_systems(&model("square_bit"), &model("square_bit")).is_err());
}

#[test]
fn sector_weights_of_the_counterexample_states() {
    let d = model("doubled_quantum:2");
    let (rho, sigma) = gptt::resource::counterexample_pair(&d).unwrap();
    assert_eq!(sector_weights(&rho).unwrap(), vec![1.0, 0.0]);
    assert_eq!(sector_weights(&sigma).unwrap(), vec![0.5, 0.5]);
    let mut rng = rng_from_seed(10);
    let e = model("extended_classical:3:2");
    for _ in 0..10 {
        let w = sector_weights(&random_pure_state(&mut rng, &e)).unwrap();
        assert_eq!(w.iter().filter(|x| (**x - 1.0).abs() < 1e-12).count(), 1);
        assert_eq!(w.iter().filter(|x| x.abs() < 1e-12).count(), 2);
    }
}

#[test]
fn maximal_sets() {
    let c = model("classical:3");
    let set = pure_maximal_set(&c).unwrap();
    for (i, s) in set.states.iter().enumerate() {
        let mut e = vec![0.0; 3];
        e[i] = 1.0;
        assert!((s.coords() - DVector::from_vec(e)).amax() < 1e-15);
    }
    let q = model("quantum:3");
    let set = pure_maximal_set(&q).unwrap();
    let total = set.states.iter().fold(DVector::zeros(9), |acc, s| acc + s.coords());
    assert!((total - q.unit_effect()).amax() < 1e-12);
    assert!(matches!(pure_maximal_set(&model("restricted_trit")), Err(Error::NoDistinguishableStates)));
}

#[test]
fn model_files_and_references() {
    let m = parse_model_ref("quantum:2*classical:2").unwrap();
    assert_eq!(m.capacity(), 4);
    let m = gptt::zoo::model_from_json(r#"{"kind": "doubled_quantum", "params": {"n": 3}}"#).unwrap();
    assert_eq!(m.capacity(), 6);
    let poly = r#"{
        "name": "triangle",
        "vector_dim": 3,
        "unit_effect": [0, 0, 1],
        "state_vertices": [[1, 0, 1], [0, 1, 1], [0, 0, 1]],
        "effect_generators": [[1, 0, 0], [0, 1, 0], [-1, -1, 1]]
    }"#;
    let t = gptt::zoo::model_from_json(poly).unwrap();
    assert_eq!(t.vertices().unwrap().len(), 3);
    assert!(parse_model_ref("quantum").is_err());
    assert!(parse_model_ref("nonsense:3").is_err());
}
