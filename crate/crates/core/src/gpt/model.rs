use std::fmt;
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gpt::cone::{cone_membership, Membership};
use crate::hilbert::HilbertLayout;
use crate::TOL;

/// Shared handle to an immutable model description.
pub type Model = Arc<ModelSpec>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    Classical { d: usize },
    Quantum { n: usize },
    /// Quantum theory over a real Hilbert space; `n = 2` is the rebit.
    RealQuantum { n: usize },
    DoubledQuantum { n: usize },
    ExtendedClassical { sectors: usize, dim: usize },
    /// Classical register of `d` sectors, each holding an `n`-level quantum system.
    ClassicalQuantum { d: usize, n: usize },
    SquareBit,
    RestrictedTrit,
    DiamondBit,
    Polytope { name: String },
}

impl ModelKind {
    pub fn family(&self) -> &'static str {
        match self {
            ModelKind::Classical { .. } => "classical",
            ModelKind::Quantum { .. } => "quantum",
            ModelKind::RealQuantum { .. } => "real_quantum",
            ModelKind::DoubledQuantum { .. } => "doubled_quantum",
            ModelKind::ExtendedClassical { .. } => "extended_classical",
            ModelKind::ClassicalQuantum { .. } => "classical_quantum",
            ModelKind::SquareBit => "square_bit",
            ModelKind::RestrictedTrit => "restricted_trit",
            ModelKind::DiamondBit => "diamond_bit",
            ModelKind::Polytope { .. } => "polytope",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::Classical { d } => write!(f, "classical:{d}"),
            ModelKind::Quantum { n } => write!(f, "quantum:{n}"),
            ModelKind::RealQuantum { n: 2 } => write!(f, "rebit"),
            ModelKind::RealQuantum { n } => write!(f, "real_quantum:{n}"),
            ModelKind::DoubledQuantum { n } => write!(f, "doubled_quantum:{n}"),
            ModelKind::ExtendedClassical { sectors, dim } => {
                write!(f, "extended_classical:{sectors}:{dim}")
            }
            ModelKind::ClassicalQuantum { d, n } => write!(f, "classical_quantum:{d}:{n}"),
            ModelKind::SquareBit => write!(f, "square_bit"),
            ModelKind::RestrictedTrit => write!(f, "restricted_trit"),
            ModelKind::DiamondBit => write!(f, "diamond_bit"),
            ModelKind::Polytope { name } => write!(f, "polytope:{name}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ModelFlags {
    pub is_sharp_with_purification: bool,
    pub unrestricted_reversibility: bool,
    pub sectorized: bool,
}

/// Generators of a convex cone, or positivity of the diagonal blocks of a
/// sectorised Hermitian operator.
#[derive(Debug, Clone)]
pub enum ConeSpec {
    Vertex { generators: Vec<DVector<f64>> },
    Blocks(HilbertLayout),
}

impl ConeSpec {
    /// Checks that every generator is nonzero and that the cone is proper.
    pub fn vertex(generators: Vec<DVector<f64>>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::InvalidParameter("cone needs at least one generator".into()));
        }
        if let Some(g) = generators.iter().find(|g| g.norm() < crate::ZERO_NORM) {
            return Err(Error::InvalidParameter(format!("zero cone generator {g:?}")));
        }
        let cone = ConeSpec::Vertex { generators };
        if let ConeSpec::Vertex { generators } = &cone {
            for g in generators {
                if let Membership::Inside = cone_membership(&(-g), &cone) {
                    return Err(Error::InvalidParameter(
                        "cone contains a line (negated generator is inside)".into(),
                    ));
                }
            }
        }
        Ok(cone)
    }

    pub fn dim(&self) -> usize {
        match self {
            ConeSpec::Vertex { generators } => generators[0].len(),
            ConeSpec::Blocks(layout) => layout.coord_dim(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum PureStateSource {
    Vertices(Vec<DVector<f64>>),
    /// Rank-one projectors inside one sector of the layout.
    Parametric(HilbertLayout),
}

#[derive(Debug, Clone)]
pub enum GroupSpec {
    Finite { generators: Vec<DMatrix<f64>> },
    /// The full unitary (or orthogonal) group of a single-sector layout.
    Parametric { layout: HilbertLayout },
    /// Sector-preserving unitaries `(⊕_k U_k)` followed by a permutation of
    /// the isomorphic sectors.
    Structured { layout: HilbertLayout },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CompositionRule {
    Kronecker,
    /// Sectors grouped by total parity.
    Parity,
    /// Sectors grouped by residue class of the sector-index sum.
    Residue { modulus: usize },
}

/// How the basis of a composite Hilbert space relates to its factors.
#[derive(Debug, Clone)]
pub struct Composite {
    pub left: Model,
    pub right: Model,
    pub rule: CompositionRule,
    /// `pairs[i]` are the factor basis indices of composite basis vector `i`.
    pub(crate) pairs: Vec<(usize, usize)>,
    pub(crate) index: Vec<usize>,
}

impl Composite {
    pub(crate) fn new(left: Model, right: Model, rule: CompositionRule, pairs: Vec<(usize, usize)>) -> Self {
        let db = right.hilbert_dim();
        let mut index = vec![usize::MAX; left.hilbert_dim() * db];
        for (i, &(x, y)) in pairs.iter().enumerate() {
            index[x * db + y] = i;
        }
        Self { left, right, rule, pairs, index }
    }

    /// Composite basis index of the product vector `|x⟩|y⟩`.
    pub fn index_of(&self, x: usize, y: usize) -> usize {
        self.index[x * self.right.hilbert_dim() + y]
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }
}

#[derive(Debug, Clone)]
pub enum Structure {
    Hilbert { layout: HilbertLayout, composite: Option<Composite> },
    Polytope,
}

/// A finite-dimensional system of a probabilistic theory.
#[derive(Debug)]
pub struct ModelSpec {
    pub(crate) id: String,
    pub(crate) kind: ModelKind,
    pub(crate) vector_dim: usize,
    pub(crate) capacity: usize,
    pub(crate) unit_effect: DVector<f64>,
    pub(crate) state_cone: ConeSpec,
    pub(crate) effect_cone: ConeSpec,
    pub(crate) pure_states: PureStateSource,
    pub(crate) group: GroupSpec,
    pub(crate) flags: ModelFlags,
    pub(crate) structure: Structure,
    pub(crate) group_cache: OnceLock<std::result::Result<Vec<DMatrix<f64>>, String>>,
}

impl ModelSpec {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    /// Dimension `D` of the real span of the states.
    pub fn vector_dim(&self) -> usize {
        self.vector_dim
    }

    /// Largest number `d` of perfectly distinguishable pure states.
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn unit_effect(&self) -> &DVector<f64> {
        &self.unit_effect
    }

    pub fn state_cone(&self) -> &ConeSpec {
        &self.state_cone
    }

    pub fn effect_cone(&self) -> &ConeSpec {
        &self.effect_cone
    }

    pub fn pure_states(&self) -> &PureStateSource {
        &self.pure_states
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn flags(&self) -> ModelFlags {
        self.flags
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn layout(&self) -> Option<&HilbertLayout> {
        match &self.structure {
            Structure::Hilbert { layout, .. } => Some(layout),
            Structure::Polytope => None,
        }
    }

    pub fn composite(&self) -> Option<&Composite> {
        match &self.structure {
            Structure::Hilbert { composite, .. } => composite.as_ref(),
            Structure::Polytope => None,
        }
    }

    /// Hilbert-space dimension for quantum-like models, zero otherwise.
    pub fn hilbert_dim(&self) -> usize {
        self.layout().map_or(0, HilbertLayout::hilbert_dim)
    }

    /// Vertex list of the normalised state space, when it is finite.
    pub fn vertices(&self) -> Option<&[DVector<f64>]> {
        match &self.pure_states {
            PureStateSource::Vertices(v) => Some(v),
            PureStateSource::Parametric(_) => None,
        }
    }

    /// Whether every state has a diagonalisation computed by the fast path.
    pub fn is_diagonalizable(&self) -> bool {
        self.layout().is_some()
    }

    pub fn same_system(&self, other: &ModelSpec) -> bool {
        std::ptr::eq(self, other) || self.id == other.id
    }

    pub(crate) fn require_same(&self, other: &ModelSpec) -> Result<()> {
        if self.same_system(other) {
            Ok(())
        } else {
            Err(Error::SystemMismatch { left: self.id.clone(), right: other.id.clone() })
        }
    }

    pub(crate) fn check_dim(&self, len: usize) -> Result<()> {
        if len == self.vector_dim {
            Ok(())
        } else {
            Err(Error::Dimension { expected: self.vector_dim, found: len })
        }
    }

    /// Validates the model invariants: unit effect normalises every listed
    /// pure state, and every listed pure state lies in the state cone.
    pub(crate) fn validate(&self) -> Result<()> {
        self.check_dim(self.unit_effect.len())?;
        if self.state_cone.dim() != self.vector_dim || self.effect_cone.dim() != self.vector_dim {
            return Err(Error::InvalidParameter("cone dimension differs from vector_dim".into()));
        }
        if let PureStateSource::Vertices(vs) = &self.pure_states {
            for v in vs {
                self.check_dim(v.len())?;
                let norm = self.unit_effect.dot(v);
                if (norm - 1.0).abs() > TOL {
                    return Err(Error::InvalidParameter(format!(
                        "pure state {v:?} has normalisation {norm}"
                    )));
                }
                if let Membership::Outside { distance } = cone_membership(v, &self.state_cone) {
                    return Err(Error::ConeViolation { distance });
                }
            }
        }
        if let GroupSpec::Finite { generators } = &self.group {
            for g in generators {
                if g.nrows() != self.vector_dim || g.ncols() != self.vector_dim {
                    return Err(Error::Dimension { expected: self.vector_dim, found: g.nrows() });
                }
            }
        }
        Ok(())
    }
}
