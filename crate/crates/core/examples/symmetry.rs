//! Invariant states, transitivity, twirling and reversibility checks of
//! several models.
//!
//! cargo run --example symmetry

use gptt::resource::check_unrestricted_reversibility;
use gptt::symmetry::{invariant_state, is_transitive, max_distinguishable_vertices, twirl};
use gptt::random::{random_pure_state, rng_from_seed};
use gptt::zoo::parse_model_ref;

fn main() -> gptt::Result<()> {
    for name in ["quantum:2", "classical:3", "square_bit", "diamond_bit", "restricted_trit"] {
        let model = parse_model_ref(name)?;
        let inv = invariant_state(&model)?;
        let rev = check_unrestricted_reversibility(&model);
        println!(
            "{name:<16} transitive {:<5} invariant unique {:<5} distinguishable vertices {:?}",
            is_transitive(&model),
            inv.unique,
            max_distinguishable_vertices(&model),
        );
        println!(
            "{:<16} permutability {:?} strong symmetry {:?} maximal sets {:?}",
            "", rev.permutability, rev.strong_symmetry, rev.maximal_sets
        );
    }

    let q = parse_model_ref("quantum:3")?;
    let psi = random_pure_state(&mut rng_from_seed(2), &q);
    let t = twirl(&psi)?;
    println!("twirled qutrit pure state:\n{:.4}", t.state.to_matrix().expect("quantum layout").map(|z| z.re));
    Ok(())
}
