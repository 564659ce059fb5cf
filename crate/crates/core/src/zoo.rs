//! Builders for concrete theories and their composition rules.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::gpt::cone::distinguishing_test;
use crate::gpt::model::{Composite, CompositionRule, ConeSpec, GroupSpec, ModelFlags, PureStateSource, Structure};
use crate::gpt::{EffectVec, StateVec};
use crate::hilbert::{Field, HilbertLayout};

pub use crate::gpt::model::{Model, ModelKind, ModelSpec};

fn unit(i: usize, d: usize) -> DVector<f64> {
    let mut v = DVector::zeros(d);
    v[i] = 1.0;
    v
}

fn v3(x: f64, y: f64, z: f64) -> DVector<f64> {
    DVector::from_vec(vec![x, y, z])
}

/// Permutation matrices swapping neighbouring coordinates.
fn adjacent_transpositions(d: usize) -> Vec<DMatrix<f64>> {
    (0..d.saturating_sub(1))
        .map(|i| {
            let mut p = DMatrix::identity(d, d);
            p.swap_rows(i, i + 1);
            p
        })
        .collect()
}

struct LayoutParts {
    id: String,
    kind: ModelKind,
    layout: HilbertLayout,
    flags: ModelFlags,
    group: GroupSpec,
    pure: Option<PureStateSource>,
    composite: Option<Composite>,
}

fn layout_model(parts: LayoutParts) -> Result<Model> {
    let layout = parts.layout;
    let spec = ModelSpec {
        id: parts.id,
        kind: parts.kind,
        vector_dim: layout.coord_dim(),
        capacity: layout.hilbert_dim(),
        unit_effect: DVector::from_vec(layout.identity()),
        state_cone: ConeSpec::Blocks(layout.clone()),
        effect_cone: ConeSpec::Blocks(layout.clone()),
        pure_states: parts.pure.unwrap_or_else(|| PureStateSource::Parametric(layout.clone())),
        group: parts.group,
        flags: parts.flags,
        structure: Structure::Hilbert { layout, composite: parts.composite },
        group_cache: OnceLock::new(),
    };
    spec.validate()?;
    Ok(Arc::new(spec))
}

fn classical_parts(d: usize) -> LayoutParts {
    LayoutParts {
        id: ModelKind::Classical { d }.to_string(),
        kind: ModelKind::Classical { d },
        layout: HilbertLayout::new(Field::Real, vec![1; d]),
        flags: ModelFlags { is_sharp_with_purification: false, unrestricted_reversibility: true, sectorized: false },
        group: GroupSpec::Finite { generators: adjacent_transpositions(d) },
        pure: Some(PureStateSource::Vertices((0..d).map(|i| unit(i, d)).collect())),
        composite: None,
    }
}

fn quantum_parts(n: usize, field: Field) -> LayoutParts {
    let kind = match field {
        Field::Complex => ModelKind::Quantum { n },
        Field::Real => ModelKind::RealQuantum { n },
    };
    let layout = HilbertLayout::new(field, vec![n]);
    LayoutParts {
        id: kind.to_string(),
        kind,
        layout: layout.clone(),
        flags: ModelFlags { is_sharp_with_purification: true, unrestricted_reversibility: true, sectorized: false },
        group: GroupSpec::Parametric { layout },
        pure: None,
        composite: None,
    }
}

fn sectorized_parts(kind: ModelKind, sectors: Vec<usize>, sharp: bool) -> LayoutParts {
    let layout = HilbertLayout::new(Field::Complex, sectors);
    LayoutParts {
        id: kind.to_string(),
        kind,
        layout: layout.clone(),
        flags: ModelFlags { is_sharp_with_purification: sharp, unrestricted_reversibility: false, sectorized: true },
        group: GroupSpec::Structured { layout },
        pure: None,
        composite: None,
    }
}

fn positive(name: &str, v: usize, min: usize) -> Result<()> {
    if v < min {
        return Err(Error::InvalidParameter(format!("{name} must be at least {min}, got {v}")));
    }
    Ok(())
}

/// Builds one of the built-in systems.
pub fn build_model(kind: &ModelKind) -> Result<Model> {
    match kind {
        ModelKind::Classical { d } => {
            positive("d", *d, 1)?;
            layout_model(classical_parts(*d))
        }
        ModelKind::Quantum { n } => {
            positive("n", *n, 1)?;
            layout_model(quantum_parts(*n, Field::Complex))
        }
        ModelKind::RealQuantum { n } => {
            positive("n", *n, 1)?;
            layout_model(quantum_parts(*n, Field::Real))
        }
        ModelKind::DoubledQuantum { n } => {
            positive("n", *n, 1)?;
            layout_model(sectorized_parts(kind.clone(), vec![*n, *n], true))
        }
        ModelKind::ExtendedClassical { sectors, dim } => {
            positive("N", *sectors, 2)?;
            positive("n", *dim, 1)?;
            layout_model(sectorized_parts(kind.clone(), vec![*dim; *sectors], true))
        }
        ModelKind::ClassicalQuantum { d, n } => {
            positive("d", *d, 1)?;
            positive("n", *n, 1)?;
            layout_model(sectorized_parts(kind.clone(), vec![*n; *d], false))
        }
        ModelKind::SquareBit => square_bit(),
        ModelKind::RestrictedTrit => restricted_trit(),
        ModelKind::DiamondBit => diamond_bit(),
        ModelKind::Polytope { .. } => Err(Error::InvalidParameter(
            "custom polytopes are built with `polytope_model`".into(),
        )),
    }
}

/// The one-dimensional system, target of the discarding channel.
pub fn trivial_system() -> Model {
    static TRIVIAL: OnceLock<Model> = OnceLock::new();
    TRIVIAL
        .get_or_init(|| build_model(&ModelKind::Classical { d: 1 }).expect("trivial system"))
        .clone()
}

/// Description of a polytope theory by vertices and effect generators.
#[derive(Debug, Clone, Deserialize)]
pub struct PolytopeDescription {
    #[serde(default)]
    pub name: Option<String>,
    pub vector_dim: usize,
    pub unit_effect: Vec<f64>,
    pub state_vertices: Vec<Vec<f64>>,
    pub effect_generators: Vec<Vec<f64>>,
    #[serde(default)]
    pub group_generators: Vec<Vec<Vec<f64>>>,
}

pub fn polytope_model(desc: &PolytopeDescription) -> Result<Model> {
    let name = desc.name.clone().unwrap_or_else(|| "custom".into());
    build_polytope(
        ModelKind::Polytope { name },
        desc.vector_dim,
        desc.unit_effect.clone(),
        desc.state_vertices.clone(),
        desc.effect_generators.clone(),
        desc.group_generators
            .iter()
            .map(|rows| {
                let n = rows.len();
                let flat: Vec<f64> = rows.iter().flatten().copied().collect();
                if flat.len() != n * n {
                    return Err(Error::Parse(format!("group generator is not {n}×{n}")));
                }
                Ok(DMatrix::from_row_slice(n, n, &flat))
            })
            .collect::<Result<Vec<_>>>()?,
    )
}

fn build_polytope(
    kind: ModelKind,
    dim: usize,
    unit_effect: Vec<f64>,
    vertices: Vec<Vec<f64>>,
    effects: Vec<Vec<f64>>,
    group: Vec<DMatrix<f64>>,
) -> Result<Model> {
    let to_vec = |v: Vec<f64>| -> Result<DVector<f64>> {
        if v.len() != dim {
            return Err(Error::Dimension { expected: dim, found: v.len() });
        }
        Ok(DVector::from_vec(v))
    };
    let vertices: Vec<DVector<f64>> = vertices.into_iter().map(to_vec).collect::<Result<_>>()?;
    let effects: Vec<DVector<f64>> = effects.into_iter().map(to_vec).collect::<Result<_>>()?;
    let unit_effect = to_vec(unit_effect)?;
    for e in &effects {
        for v in &vertices {
            let p = e.dot(v);
            if !(-crate::TOL..=1.0 + crate::TOL).contains(&p) {
                return Err(Error::InvalidParameter(format!(
                    "effect generator {:?} gives probability {p} on a vertex",
                    e.as_slice()
                )));
            }
        }
    }
    let mut spec = ModelSpec {
        id: kind.to_string(),
        kind,
        vector_dim: dim,
        capacity: 1,
        unit_effect,
        state_cone: ConeSpec::vertex(vertices.clone())?,
        effect_cone: ConeSpec::vertex(effects)?,
        pure_states: PureStateSource::Vertices(vertices),
        group: GroupSpec::Finite { generators: group },
        flags: ModelFlags::default(),
        structure: Structure::Polytope,
        group_cache: OnceLock::new(),
    };
    spec.validate()?;
    spec.capacity = polytope_capacity(&spec).len().max(1);
    Ok(Arc::new(spec))
}

/// Largest perfectly distinguishable subset of the vertices, by exhaustive
/// search from the largest subsets down.
fn polytope_capacity(spec: &ModelSpec) -> Vec<usize> {
    let vs = spec.vertices().unwrap();
    let gens = match &spec.effect_cone {
        ConeSpec::Vertex { generators } => generators,
        ConeSpec::Blocks(_) => unreachable!(),
    };
    let n = vs.len();
    let max = n.min(spec.vector_dim);
    for size in (2..=max).rev() {
        for subset in subsets(n, size) {
            let states: Vec<DVector<f64>> = subset.iter().map(|&i| vs[i].clone()).collect();
            if distinguishing_test(gens, &spec.unit_effect, &states).is_some() {
                return subset;
            }
        }
    }
    Vec::new()
}

/// All `k`-element subsets of `0..n` in lexicographic order.
pub(crate) fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

fn square_bit() -> Result<Model> {
    let r = DMatrix::from_row_slice(3, 3, &[0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    let f = DMatrix::from_diagonal(&v3(-1.0, 1.0, 1.0));
    build_polytope(
        ModelKind::SquareBit,
        3,
        vec![0.0, 0.0, 1.0],
        vec![vec![1.0, 1.0, 1.0], vec![-1.0, 1.0, 1.0], vec![-1.0, -1.0, 1.0], vec![1.0, -1.0, 1.0]],
        vec![vec![0.5, 0.0, 0.5], vec![-0.5, 0.0, 0.5], vec![0.0, 0.5, 0.5], vec![0.0, -0.5, 0.5]],
        vec![r, f],
    )
}

fn restricted_trit() -> Result<Model> {
    let mut group = adjacent_transpositions(3);
    group.truncate(2);
    build_polytope(
        ModelKind::RestrictedTrit,
        3,
        vec![1.0, 1.0, 1.0],
        vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
        vec![vec![0.5, 0.5, 0.0], vec![0.5, 0.0, 0.5], vec![0.0, 0.5, 0.5]],
        group,
    )
}

fn diamond_bit() -> Result<Model> {
    build_polytope(
        ModelKind::DiamondBit,
        3,
        vec![0.0, 0.0, 1.0],
        vec![vec![1.0, 0.0, 1.0], vec![0.0, 0.5, 1.0], vec![-1.0, 0.0, 1.0], vec![0.0, -0.5, 1.0]],
        vec![vec![-0.5, -1.0, 0.5], vec![0.5, 1.0, 0.5], vec![0.5, -1.0, 0.5], vec![-0.5, 1.0, 0.5]],
        vec![DMatrix::from_diagonal(&v3(-1.0, 1.0, 1.0)), DMatrix::from_diagonal(&v3(1.0, -1.0, 1.0))],
    )
}

/// Sector dimensions and factor-index pairs of a composite layout.
fn combine(la: &HilbertLayout, lb: &HilbertLayout, rule: CompositionRule) -> (Vec<usize>, Vec<(usize, usize)>) {
    let (na, nb) = (la.sector_count(), lb.sector_count());
    let mut groups: Vec<Vec<(usize, usize)>> = match rule {
        CompositionRule::Kronecker => vec![Vec::new(); na * nb],
        CompositionRule::Parity => vec![Vec::new(); 2],
        CompositionRule::Residue { modulus } => vec![Vec::new(); modulus],
    };
    for j in 0..na {
        for l in 0..nb {
            let target = match rule {
                CompositionRule::Kronecker => j * nb + l,
                CompositionRule::Parity => (j + l) % 2,
                CompositionRule::Residue { modulus } => (j + l) % modulus,
            };
            for a in 0..la.sectors()[j] {
                for b in 0..lb.sectors()[l] {
                    groups[target].push((la.sector_offset(j) + a, lb.sector_offset(l) + b));
                }
            }
        }
    }
    let sectors = groups.iter().map(Vec::len).collect();
    (sectors, groups.into_iter().flatten().collect())
}

/// Composite system `A ⊗ B` under the composition rule of the pair's family.
pub fn compose_systems(a: &Model, b: &Model) -> Result<Model> {
    use ModelKind as K;
    let (la, lb) = match (a.layout(), b.layout()) {
        (Some(la), Some(lb)) => (la, lb),
        _ => {
            return Err(Error::Composition(format!(
                "no composition rule for {} and {}",
                a.id(),
                b.id()
            )))
        }
    };
    let (kind, rule, mut parts_of) = match (a.kind(), b.kind()) {
        (K::Classical { d: x }, K::Classical { d: y }) => {
            (K::Classical { d: x * y }, CompositionRule::Kronecker, classical_parts(x * y))
        }
        (K::Quantum { n: x }, K::Quantum { n: y }) => {
            (K::Quantum { n: x * y }, CompositionRule::Kronecker, quantum_parts(x * y, Field::Complex))
        }
        (K::RealQuantum { n: x }, K::RealQuantum { n: y }) => {
            (K::RealQuantum { n: x * y }, CompositionRule::Kronecker, quantum_parts(x * y, Field::Real))
        }
        (K::Classical { d }, K::Quantum { n }) | (K::Quantum { n }, K::Classical { d }) => {
            let kind = K::ClassicalQuantum { d: *d, n: *n };
            (kind.clone(), CompositionRule::Kronecker, sectorized_parts(kind, vec![*n; *d], false))
        }
        (K::DoubledQuantum { n: x }, K::DoubledQuantum { n: y }) => {
            let m = 2 * x * y;
            let kind = K::DoubledQuantum { n: m };
            (kind.clone(), CompositionRule::Parity, sectorized_parts(kind, vec![m, m], true))
        }
        (K::ExtendedClassical { sectors: na, dim: x }, K::ExtendedClassical { sectors: nb, dim: y }) => {
            let k = *na.max(nb);
            let m = na.min(nb) * x * y;
            let kind = K::ExtendedClassical { sectors: k, dim: m };
            (kind.clone(), CompositionRule::Residue { modulus: k }, sectorized_parts(kind, vec![m; k], true))
        }
        _ => {
            return Err(Error::Composition(format!(
                "no composition rule for {} and {}",
                a.id(),
                b.id()
            )))
        }
    };
    let (sectors, pairs) = combine(la, lb, rule);
    debug_assert_eq!(sectors, parts_of.layout.sectors());
    parts_of.id = format!("[{}*{}]", a.id(), b.id());
    parts_of.kind = kind;
    if let ModelKind::Classical { d } = parts_of.kind {
        // product vertices follow the composite basis order
        let verts = pairs.iter().enumerate().map(|(i, _)| unit(i, d)).collect();
        parts_of.pure = Some(PureStateSource::Vertices(verts));
    }
    parts_of.composite = Some(Composite::new(a.clone(), b.clone(), rule, pairs));
    layout_model(parts_of)
}

/// Probability carried by each superselection sector.
pub fn sector_weights(rho: &StateVec) -> Result<Vec<f64>> {
    let model = rho.model();
    if !model.flags().sectorized {
        return Err(Error::Structure(format!("{} is not sectorized", model.id())));
    }
    let layout = model.layout().expect("sectorized models have layouts");
    Ok(layout.sector_traces(rho.coords().as_slice()))
}

/// A set of `d` pure, perfectly distinguishable states together with the
/// observation test that distinguishes them.
#[derive(Debug, Clone)]
pub struct MaximalSet {
    pub states: Vec<StateVec>,
    pub effects: Vec<EffectVec>,
}

pub fn pure_maximal_set(model: &Model) -> Result<MaximalSet> {
    if let Some(layout) = model.layout() {
        let mut states = Vec::new();
        let mut effects = Vec::new();
        for i in 0..layout.hilbert_dim() {
            let p = DVector::from_vec(layout.projector(&layout.basis_vector(i)));
            states.push(StateVec::new(model, p.clone())?);
            effects.push(EffectVec::new(model, p)?);
        }
        return Ok(MaximalSet { states, effects });
    }
    let subset = polytope_capacity(model);
    if subset.is_empty() {
        return Err(Error::NoDistinguishableStates);
    }
    let vs = model.vertices().unwrap();
    let states: Vec<DVector<f64>> = subset.iter().map(|&i| vs[i].clone()).collect();
    let gens = match model.effect_cone() {
        ConeSpec::Vertex { generators } => generators,
        ConeSpec::Blocks(_) => unreachable!(),
    };
    let effects = distinguishing_test(gens, model.unit_effect(), &states)
        .ok_or_else(|| Error::Internal("distinguishing test vanished".into()))?;
    Ok(MaximalSet {
        states: states.into_iter().map(|s| StateVec::new(model, s)).collect::<Result<_>>()?,
        effects: effects.into_iter().map(|e| EffectVec::new(model, e)).collect::<Result<_>>()?,
    })
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ModelFile {
    BuiltIn {
        kind: String,
        #[serde(default)]
        params: BTreeMap<String, usize>,
    },
    Polytope(PolytopeDescription),
}

fn param(params: &BTreeMap<String, usize>, key: &str) -> Result<usize> {
    params
        .get(key)
        .copied()
        .ok_or_else(|| Error::Parse(format!("missing parameter `{key}`")))
}

fn kind_from_parts(kind: &str, params: &BTreeMap<String, usize>) -> Result<ModelKind> {
    Ok(match kind {
        "classical" => ModelKind::Classical { d: param(params, "d")? },
        "quantum" => ModelKind::Quantum { n: param(params, "n")? },
        "rebit" => ModelKind::RealQuantum { n: 2 },
        "real_quantum" => ModelKind::RealQuantum { n: param(params, "n")? },
        "doubled_quantum" => ModelKind::DoubledQuantum { n: param(params, "n")? },
        "extended_classical" => ModelKind::ExtendedClassical {
            sectors: param(params, "N")?,
            dim: param(params, "n")?,
        },
        "classical_quantum" => ModelKind::ClassicalQuantum { d: param(params, "d")?, n: param(params, "n")? },
        "square_bit" => ModelKind::SquareBit,
        "restricted_trit" => ModelKind::RestrictedTrit,
        "diamond_bit" => ModelKind::DiamondBit,
        other => return Err(Error::Parse(format!("unknown model kind `{other}`"))),
    })
}

/// Parses a model file: either `{"kind": ..., "params": {...}}` or a full
/// polytope description.
pub fn model_from_json(text: &str) -> Result<Model> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    match file {
        ModelFile::BuiltIn { kind, params } => build_model(&kind_from_parts(&kind, &params)?),
        ModelFile::Polytope(desc) => polytope_model(&desc),
    }
}

/// Resolves a short reference such as `quantum:3`, `extended_classical:2:1`
/// or `square_bit`, or a path to a JSON model file.
pub fn parse_model_ref(text: &str) -> Result<Model> {
    if text.contains('*') && !Path::new(text).exists() {
        let mut factors = text.split('*').map(|t| parse_model_ref(t.trim()));
        let first = factors.next().unwrap()?;
        return factors.try_fold(first, |acc, f| compose_systems(&acc, &f?));
    }
    let mut parts = text.split(':');
    let head = parts.next().unwrap_or_default();
    let nums: Vec<usize> = parts
        .map(|p| p.parse().map_err(|_| Error::Parse(format!("bad model parameter `{p}` in `{text}`"))))
        .collect::<Result<_>>()?;
    let arity = |k: usize| -> Result<()> {
        if nums.len() == k {
            Ok(())
        } else {
            Err(Error::Parse(format!("`{head}` takes {k} parameter(s), got {}", nums.len())))
        }
    };
    let kind = match head {
        "classical" => arity(1).map(|_| ModelKind::Classical { d: nums[0] }),
        "quantum" => arity(1).map(|_| ModelKind::Quantum { n: nums[0] }),
        "real_quantum" => arity(1).map(|_| ModelKind::RealQuantum { n: nums[0] }),
        "rebit" => arity(0).map(|_| ModelKind::RealQuantum { n: 2 }),
        "doubled_quantum" => arity(1).map(|_| ModelKind::DoubledQuantum { n: nums[0] }),
        "extended_classical" => arity(2).map(|_| ModelKind::ExtendedClassical { sectors: nums[0], dim: nums[1] }),
        "classical_quantum" => arity(2).map(|_| ModelKind::ClassicalQuantum { d: nums[0], n: nums[1] }),
        "square_bit" => arity(0).map(|_| ModelKind::SquareBit),
        "restricted_trit" => arity(0).map(|_| ModelKind::RestrictedTrit),
        "diamond_bit" => arity(0).map(|_| ModelKind::DiamondBit),
        _ => {
            let path = Path::new(text);
            if path.exists() {
                let body = std::fs::read_to_string(path)
                    .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
                return model_from_json(&body);
            }
            return Err(Error::Parse(format!("unknown model `{text}`")));
        }
    }?;
    build_model(&kind)
}
