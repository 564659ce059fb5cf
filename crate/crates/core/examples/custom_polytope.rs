//! Loading a polytope model from JSON and running the generic tools on it.
//!
//! cargo run --example custom_polytope

use gptt::gpt::StateVec;
use gptt::spectral::diagonalize;
use gptt::symmetry::{invariant_state, is_transitive, max_distinguishable_vertices};
use gptt::thermo::von_neumann;
use gptt::zoo::model_from_json;

const HEXAGON: &str = r#"{
    "name": "hexagon",
    "vector_dim": 3,
    "unit_effect": [0, 0, 1],
    "state_vertices": [
        [1, 0, 1], [0.5, 0.8660254037844386, 1], [-0.5, 0.8660254037844386, 1],
        [-1, 0, 1], [-0.5, -0.8660254037844386, 1], [0.5, -0.8660254037844386, 1]
    ],
    "effect_generators": [
        [0.5, 0.28867513459481287, 0.5], [0, 0.5773502691896258, 0.5], [-0.5, 0.28867513459481287, 0.5],
        [-0.5, -0.28867513459481287, 0.5], [0, -0.5773502691896258, 0.5], [0.5, -0.28867513459481287, 0.5]
    ],
    "group_generators": [
        [[0.5, -0.8660254037844386, 0], [0.8660254037844386, 0.5, 0], [0, 0, 1]],
        [[1, 0, 0], [0, -1, 0], [0, 0, 1]]
    ]
}"#;

fn main() -> gptt::Result<()> {
    let hex = model_from_json(HEXAGON)?;
    println!("{}: dimension {} capacity {}", hex.id(), hex.vector_dim(), hex.capacity());
    println!("transitive {}", is_transitive(&hex));
    println!("distinguishable vertices {:?}", max_distinguishable_vertices(&hex));
    let inv = invariant_state(&hex)?;
    println!("invariant state {:.3?} unique {}", inv.state.coords().as_slice(), inv.unique);

    let vs = hex.vertices().expect("polytope");
    let rho = StateVec::new(&hex, &vs[0] * 0.75 + &vs[3] * 0.25)?;
    let d = diagonalize(&rho)?;
    println!("spectrum {:.3?} entropy {:.4}", d.eigenvalues, von_neumann(&rho)?);
    Ok(())
}
