//! Systems, states, effects, channels and the operations relating them.

pub mod channel;
pub mod composite;
pub mod cone;
pub mod model;
pub mod norm;
pub mod vectors;

pub use channel::{compose, tensor, ChannelMap, ChannelTag};
pub use composite::{marginal, product_effect, product_state, swap, Side};
pub use cone::{cone_membership, Membership};
pub use model::{
    CompositionRule, ConeSpec, GroupSpec, Model, ModelFlags, ModelKind, ModelSpec, PureStateSource,
    Structure,
};
pub use norm::{effect_norm, state_norm};
pub use vectors::{pairing, EffectVec, StateVec};
