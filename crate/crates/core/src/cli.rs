//! Command implementations behind the `gptt` binary and their JSON reports.

use std::path::PathBuf;
use std::str::FromStr;

use nalgebra::DVector;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::gpt::{ChannelMap, Model, ModelKind, StateVec};
use crate::hilbert::{CMat, C64};
use crate::random::{haar_unitary, random_state, rng_from_seed};
use crate::resource::{check_unrestricted_reversibility, convertible, counterexample_pair, Answer, Theory};
use crate::spectral::{diagonalize, diagonalize_peel};
use crate::symmetry::{chi, informational_equilibrium_check, invariant_state, is_transitive, max_distinguishable_vertices, perfectly_distinguishable_search};
use crate::thermo::{
    beta_from_energy, bipartite_entropies, energy, entropy, erasure_demo, gibbs_state, landauer_ledger,
    max_entropy_audit, monotone_audit, relative_entropy, von_neumann, LedgerCheck, ThermoConfig,
};
use crate::zoo::{compose_systems, parse_model_ref, pure_maximal_set};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit codes shared by every command.
pub mod exit {
    pub const OK: i32 = 0;
    pub const NO: i32 = 1;
    pub const PARSE: i32 = 2;
    pub const NOT_DIAGONALIZABLE: i32 = 3;
    pub const UNKNOWN: i32 = 4;
    pub const FAILURE: i32 = 5;
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub residual: f64,
}

impl Check {
    /// Passes when `residual ≤ tol`.
    pub fn within(name: &str, residual: f64, tol: f64) -> Self {
        Self { name: name.into(), pass: residual <= tol, residual }
    }

    /// A yes/no property, with residual 0 when it holds and 1 otherwise.
    pub fn flag(name: &str, holds: bool) -> Self {
        Self { name: name.into(), pass: holds, residual: if holds { 0.0 } else { 1.0 } }
    }
}

impl From<LedgerCheck> for Check {
    fn from(c: LedgerCheck) -> Self {
        Self { name: c.name.into(), pass: c.pass, residual: c.residual }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelInfo {
    pub id: String,
    pub params: Value,
}

impl ModelInfo {
    fn of(model: &Model) -> Self {
        let mut params = serde_json::to_value(model.kind()).unwrap_or(Value::Null);
        if let Value::Object(map) = &mut params {
            map.remove("kind");
            map.insert("family".into(), json!(model.kind().family()));
        }
        Self { id: model.id().to_string(), params }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub model: ModelInfo,
    pub results: Value,
    pub checks: Vec<Check>,
    pub seed: u64,
    pub tool_version: String,
}

/// Rounds to 12 significant digits; non-finite numbers become strings.
fn round_numbers(v: Value) -> Value {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => {
                if x.is_finite() {
                    let r: f64 = format!("{x:.11e}").parse().unwrap_or(x);
                    json!(r)
                } else {
                    json!(x.to_string())
                }
            }
            _ => Value::Number(n),
        },
        Value::Array(a) => Value::Array(a.into_iter().map(round_numbers).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, round_numbers(v))).collect()),
        other => other,
    }
}

fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

fn vector(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| num(*x)).collect())
}

impl Report {
    fn new(command: &str, model: &Model, results: Value, checks: Vec<Check>, seed: u64) -> Self {
        Self {
            command: command.into(),
            model: ModelInfo::of(model),
            results,
            checks,
            seed,
            tool_version: TOOL_VERSION.into(),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        let v = round_numbers(serde_json::to_value(self).expect("reports serialise"));
        serde_json::to_string_pretty(&v).expect("reports serialise")
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("{}  model={}  seed={}  version={}\n", self.command, self.model.id, self.seed, self.tool_version);
        if let Value::Object(m) = round_numbers(self.results.clone()) {
            for (k, v) in m {
                out.push_str(&format!("  {k:<24} {v}\n"));
            }
        }
        for c in &self.checks {
            out.push_str(&format!(
                "  [{}] {:<30} residual {:.3e}\n",
                if c.pass { "pass" } else { "FAIL" },
                c.name,
                c.residual
            ));
        }
        out
    }
}

/// A report together with the process exit code it implies.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub exit_code: i32,
}

pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Parse(_) | Error::InvalidParameter(_) | Error::Dimension { .. } => exit::PARSE,
        Error::Diagonalization { .. } => exit::NOT_DIAGONALIZABLE,
        _ => exit::FAILURE,
    }
}

/// Parses `[a, b, ...]` or a bare comma-separated list.
pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    let trimmed = text.trim().trim_start_matches('[').trim_end_matches(']');
    if trimmed.trim().is_empty() {
        return Err(Error::Parse("empty vector".into()));
    }
    trimmed
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{}`", t.trim()))))
        .collect()
}

pub fn parse_model(text: &str) -> Result<Model> {
    parse_model_ref(text)
}

/// Resolves a state name: `chi`, `pure<k>`, `random:<seed>`, a coordinate
/// vector, `center-offset` (square bit), or `cex-rho` / `cex-sigma` (the
/// sector counterexample pair).
pub fn parse_state(model: &Model, text: &str) -> Result<StateVec> {
    let t = text.trim();
    if t == "chi" {
        return chi(model);
    }
    if let Some(k) = t.strip_prefix("pure") {
        let k: usize = k.parse().map_err(|_| Error::Parse(format!("bad state `{t}`")))?;
        let set = pure_maximal_set(model)?;
        return set.states.get(k).cloned().ok_or_else(|| {
            Error::Parse(format!("pure{k} out of range (maximal set has {})", set.states.len()))
        });
    }
    if let Some(seed) = t.strip_prefix("random:") {
        let seed: u64 = seed.parse().map_err(|_| Error::Parse(format!("bad seed in `{t}`")))?;
        return Ok(random_state(&mut rng_from_seed(seed), model));
    }
    match t {
        "center-offset" => {
            if *model.kind() != ModelKind::SquareBit {
                return Err(Error::Parse("center-offset is defined for square_bit only".into()));
            }
            return StateVec::from_slice(model, &[0.2, 0.4, 1.0]);
        }
        "cex-rho" => return Ok(counterexample_pair(model)?.0),
        "cex-sigma" => return Ok(counterexample_pair(model)?.1),
        _ => {}
    }
    if t.starts_with('[') || t.contains(',') {
        return StateVec::from_slice(model, &parse_vector(t)?);
    }
    Err(Error::Parse(format!("unknown state `{t}`")))
}

/// A Hamiltonian given either as full coordinates or as energy levels on
/// the standard basis.
pub fn parse_hamiltonian(model: &Model, text: &str) -> Result<DVector<f64>> {
    let values = parse_vector(text)?;
    if values.len() == model.vector_dim() {
        return Ok(DVector::from_vec(values));
    }
    let layout = model
        .layout()
        .ok_or_else(|| Error::Parse(format!("{} takes Hamiltonians as full coordinates", model.id())))?;
    if values.len() != layout.hilbert_dim() {
        return Err(Error::Parse(format!(
            "Hamiltonian needs {} levels or {} coordinates, got {}",
            layout.hilbert_dim(),
            model.vector_dim(),
            values.len()
        )));
    }
    let m = CMat::from_diagonal(&DVector::from_iterator(values.len(), values.iter().map(|&e| C64::new(e, 0.0))));
    Ok(DVector::from_vec(layout.from_matrix(&m).0))
}

/// Default environment Hamiltonian: levels `0, 1, …, n−1`.
fn default_hamiltonian(model: &Model) -> Result<DVector<f64>> {
    let n = model.hilbert_dim();
    let levels: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    parse_hamiltonian(model, &levels.join(","))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Interaction {
    Swap,
    Random(u64),
    File(PathBuf),
}

impl FromStr for Interaction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "swap" {
            return Ok(Interaction::Swap);
        }
        if let Some(seed) = s.strip_prefix("random:") {
            return seed
                .parse()
                .map(Interaction::Random)
                .map_err(|_| Error::Parse(format!("bad seed in `{s}`")));
        }
        if s == "random" {
            return Ok(Interaction::Random(0));
        }
        Ok(Interaction::File(PathBuf::from(s)))
    }
}

#[derive(serde::Deserialize)]
struct UnitaryFile {
    re: Vec<Vec<f64>>,
    #[serde(default)]
    im: Option<Vec<Vec<f64>>>,
}

fn interaction_channel(se: &Model, interaction: &Interaction) -> Result<ChannelMap> {
    let n = se.hilbert_dim();
    let layout = se.layout().ok_or_else(|| Error::Unsupported(format!("{} has no unitaries", se.id())))?;
    match interaction {
        Interaction::Swap => crate::gpt::swap(se),
        Interaction::Random(seed) => {
            let mut rng = rng_from_seed(*seed);
            // independent unitary on every sector of the composite
            let mut u = CMat::zeros(n, n);
            for k in 0..layout.sector_count() {
                let (off, m) = (layout.sector_offset(k), layout.sectors()[k]);
                u.view_mut((off, off), (m, m)).copy_from(&haar_unitary(&mut rng, m, layout.field()));
            }
            ChannelMap::unitary(se, &u)
        }
        Interaction::File(path) => {
            let body = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            let f: UnitaryFile = serde_json::from_str(&body).map_err(|e| Error::Parse(e.to_string()))?;
            if f.re.len() != n || f.re.iter().any(|r| r.len() != n) {
                return Err(Error::Parse(format!("unitary must be {n}×{n}")));
            }
            let u = CMat::from_fn(n, n, |i, j| {
                C64::new(f.re[i][j], f.im.as_ref().map_or(0.0, |im| im.get(i).and_then(|r| r.get(j)).copied().unwrap_or(0.0)))
            });
            ChannelMap::unitary(se, &u)
        }
    }
}

pub fn cmd_diag(model: &Model, state: &str, peel: bool, seed: u64) -> Result<Outcome> {
    let rho = parse_state(model, state)?;
    let result = if peel { diagonalize_peel(&rho) } else { diagonalize(&rho) };
    match result {
        Ok(d) => {
            let residual = d.reconstruction_residual(rho.coords());
            let results = json!({
                "spectrum": vector(&d.eigenvalues),
                "eigenstates": d.eigenstates.iter().map(|s| vector(s.coords().as_slice())).collect::<Vec<_>>(),
                "reduced": d.reduced.iter().map(|e| json!({"value": num(e.value), "multiplicity": e.multiplicity})).collect::<Vec<_>>(),
                "method": format!("{:?}", d.method).to_lowercase(),
                "reconstruction_residual": num(residual),
            });
            Ok(Outcome {
                report: Report::new("diag", model, results, vec![Check::within("reconstruction", residual, 1e-8)], seed),
                exit_code: exit::OK,
            })
        }
        Err(Error::Diagonalization { message, residue }) => {
            let norm = residue.iter().map(|x| x.abs()).fold(0.0, f64::max);
            let results = json!({ "error": message, "residue": vector(&residue) });
            Ok(Outcome {
                report: Report::new("diag", model, results, vec![Check { name: "diagonalizable".into(), pass: false, residual: norm }], seed),
                exit_code: exit::NOT_DIAGONALIZABLE,
            })
        }
        Err(e) => Err(e),
    }
}

pub fn cmd_convert(model: &Model, rho: &str, sigma: &str, theory: Theory, seed: u64) -> Result<Outcome> {
    let (r, s) = (parse_state(model, rho)?, parse_state(model, sigma)?);
    let verdict = convertible(&r, &s, theory)?;
    let mut results = Map::new();
    results.insert("theory".into(), json!(theory.name()));
    results.insert("verdict".into(), json!(verdict.answer.label()));
    let mut checks = Vec::new();
    let code = match &verdict.answer {
        Answer::Yes(c) => {
            let image = (c.apply(&r)?.coords() - s.coords()).amax();
            checks.push(Check::within("maps_rho_to_sigma", image, 1e-8));
            results.insert("tags".into(), json!(c.tags().iter().map(|t| t.name()).collect::<Vec<_>>()));
            results.insert(
                "channel_matrix".into(),
                Value::Array(c.matrix().row_iter().map(|row| vector(&row.iter().copied().collect::<Vec<_>>())).collect()),
            );
            if let Some(w) = c.witness() {
                results.insert("witness_weights".into(), vector(&w.iter().map(|t| t.0).collect::<Vec<_>>()));
            }
            exit::OK
        }
        Answer::No(cert) => {
            results.insert("certificate".into(), serde_json::to_value(cert).unwrap_or(Value::Null));
            results.insert("certificate_text".into(), json!(cert.to_string()));
            exit::NO
        }
        Answer::Unknown(reason) => {
            results.insert("reason".into(), json!(reason));
            exit::UNKNOWN
        }
    };
    Ok(Outcome { report: Report::new("convert", model, Value::Object(results), checks, seed), exit_code: code })
}

fn ledger_exit(checks: &[Check]) -> i32 {
    if checks.iter().all(|c| c.pass) {
        exit::OK
    } else {
        exit::FAILURE
    }
}

pub fn cmd_landauer(
    model: &Model,
    rho: &str,
    beta: f64,
    interaction: &Interaction,
    hamiltonian: Option<&str>,
    seed: u64,
) -> Result<Outcome> {
    let rho_s = parse_state(model, rho)?;
    let se = compose_systems(model, model)?;
    let h = match hamiltonian {
        Some(t) => parse_hamiltonian(model, t)?,
        None => default_hamiltonian(model)?,
    };
    let u = interaction_channel(&se, interaction)?;
    let ledger = landauer_ledger(&rho_s, &h, beta, &u, &ThermoConfig::default())?;
    let checks: Vec<Check> = ledger.checks().into_iter().map(Check::from).collect();
    let results = serde_json::to_value(&ledger).unwrap_or(Value::Null);
    let code = ledger_exit(&checks);
    Ok(Outcome { report: Report::new("landauer", model, results, checks, seed), exit_code: code })
}

pub fn cmd_erase(model: &Model, rho: &str, beta: f64, hamiltonian: Option<&str>, seed: u64) -> Result<Outcome> {
    let rho_s = parse_state(model, rho)?;
    let h = match hamiltonian {
        Some(t) => parse_hamiltonian(model, t)?,
        None => default_hamiltonian(model)?,
    };
    let report = erasure_demo(&rho_s, beta, &h, model, &ThermoConfig::default())?;
    let checks: Vec<Check> = report.checks().into_iter().map(Check::from).collect();
    let results = serde_json::to_value(&report).unwrap_or(Value::Null);
    let code = ledger_exit(&checks);
    Ok(Outcome { report: Report::new("erase", model, results, checks, seed), exit_code: code })
}

/// Runs the structural battery: invariant state, transitivity,
/// informational equilibrium, permutability, strong symmetry and
/// distinguishability.
pub fn cmd_verify(model: &Model, seed: u64) -> Result<Outcome> {
    let mut results = Map::new();
    let mut checks = Vec::new();
    let inv = invariant_state(model)?;
    results.insert("invariant_state".into(), vector(inv.state.coords().as_slice()));
    results.insert("invariant_state_unique".into(), json!(inv.unique));
    checks.push(Check::within("invariant_state_unique", inv.affine_dimension as f64, 0.0));
    match diagonalize(&inv.state) {
        Ok(d) => {
            let target = 1.0 / model.capacity() as f64;
            let dev = d.eigenvalues.iter().map(|x| (x - target).abs()).fold(0.0, f64::max);
            results.insert("invariant_spectrum".into(), vector(&d.eigenvalues));
            checks.push(Check::within("invariant_spectrum_uniform", dev, 1e-9));
        }
        Err(e) => {
            results.insert("invariant_spectrum".into(), json!(e.to_string()));
        }
    }
    let transitive = is_transitive(model);
    results.insert("transitive".into(), json!(transitive));
    checks.push(Check::flag("transitivity", transitive));
    match informational_equilibrium_check(model, model) {
        Ok(eq) => {
            results.insert("informational_equilibrium".into(), json!(eq.holds));
            checks.push(Check::within("informational_equilibrium", eq.residual, 1e-8));
        }
        Err(e) => {
            results.insert("informational_equilibrium".into(), json!(e.to_string()));
        }
    }
    let rev = check_unrestricted_reversibility(model);
    results.insert("reversibility_basis".into(), serde_json::to_value(rev.basis).unwrap_or(Value::Null));
    for (name, value) in [("permutability", rev.permutability), ("strong_symmetry", rev.strong_symmetry)] {
        match value {
            Some(v) => {
                results.insert(name.into(), json!(v));
                checks.push(Check::flag(name, v));
            }
            None => {
                results.insert(name.into(), json!("unknown"));
            }
        }
    }
    if let Some(n) = rev.maximal_sets {
        results.insert("maximal_sets".into(), json!(n));
    }
    if let Some((a, b)) = &rev.counterexample {
        results.insert(
            "counterexample".into(),
            json!({"rho": vector(a.coords().as_slice()), "sigma": vector(b.coords().as_slice())}),
        );
    }
    // largest perfectly distinguishable set of pure states versus capacity
    let found = if model.vertices().is_some() {
        let best = max_distinguishable_vertices(model);
        results.insert("distinguishable_vertices".into(), json!(best));
        best.len().max(1)
    } else {
        let set = pure_maximal_set(model)?;
        match perfectly_distinguishable_search(model, &set.states) {
            Some(_) => set.states.len(),
            None => 0,
        }
    };
    results.insert("largest_distinguishable_set".into(), json!(found));
    results.insert("capacity".into(), json!(model.capacity()));
    checks.push(Check::within("distinguishability", (found as f64 - model.capacity() as f64).abs(), 0.0));
    Ok(Outcome { report: Report::new("verify", model, Value::Object(results), checks, seed), exit_code: exit::OK })
}

pub fn cmd_gibbs(
    model: Option<&Model>,
    hamiltonian: &str,
    target_energy: Option<f64>,
    beta: Option<f64>,
    trials: usize,
    seed: u64,
) -> Result<Outcome> {
    let model = match model {
        Some(m) => m.clone(),
        None => parse_model_ref(&format!("classical:{}", parse_vector(hamiltonian)?.len()))?,
    };
    let h = parse_hamiltonian(&model, hamiltonian)?;
    let mut checks = Vec::new();
    let mut results = Map::new();
    let beta = match (target_energy, beta) {
        (Some(e), None) => {
            let b = beta_from_energy(&model, &h, e)?;
            let g = gibbs_state(&model, &h, b)?;
            checks.push(Check::within("energy_round_trip", (energy(&h, &g)? - e).abs(), 1e-10));
            let audit = max_entropy_audit(&mut rng_from_seed(seed), &model, &h, e, trials)?;
            checks.push(Check::within("entropy_identity", audit.identity_residual, 1e-9));
            checks.push(Check::within("max_entropy", audit.max_excess.max(0.0), 1e-8));
            results.insert("max_entropy_audit".into(), serde_json::to_value(&audit).unwrap_or(Value::Null));
            b
        }
        (None, Some(b)) => b,
        _ => return Err(Error::Parse("give exactly one of --E and --beta".into())),
    };
    let g = gibbs_state(&model, &h, beta)?;
    let d = diagonalize(&g)?;
    results.insert("beta".into(), num(beta));
    results.insert("weights".into(), vector(&d.eigenvalues));
    results.insert("state".into(), vector(g.coords().as_slice()));
    results.insert("energy".into(), num(energy(&h, &g)?));
    results.insert("entropy".into(), num(von_neumann(&g)?));
    Ok(Outcome { report: Report::new("gibbs", &model, Value::Object(results), checks, seed), exit_code: exit::OK })
}

pub fn cmd_entropy(
    model: &Model,
    state: &str,
    alpha: Option<f64>,
    sigma: Option<&str>,
    trials: usize,
    seed: u64,
) -> Result<Outcome> {
    let rho = parse_state(model, state)?;
    let mut results = Map::new();
    let mut checks = Vec::new();
    let orders = match alpha {
        Some(a) => vec![a],
        None => vec![0.0, 0.5, 1.0, 2.0, f64::INFINITY],
    };
    let mut renyi = Map::new();
    for a in &orders {
        renyi.insert(a.to_string(), num(entropy(&rho, *a)?));
    }
    results.insert("renyi".into(), Value::Object(renyi));
    if let Some(s) = sigma {
        let s = parse_state(model, s)?;
        let d = relative_entropy(&rho, &s)?;
        results.insert("relative_entropy".into(), num(d.value()));
        checks.push(Check { name: "klein".into(), pass: d.value() >= -1e-9, residual: (-d.value()).max(0.0) });
    }
    if model.composite().is_some() {
        let b = bipartite_entropies(&rho)?;
        results.insert("bipartite".into(), serde_json::to_value(b).unwrap_or(Value::Null));
        checks.push(Check { name: "subadditivity".into(), pass: b.mutual >= -1e-8, residual: (-b.mutual).max(0.0) });
        let tri = (b.s_a - b.s_b).abs() - b.s_ab;
        checks.push(Check { name: "triangle".into(), pass: tri <= 1e-8, residual: tri.max(0.0) });
    }
    if trials > 0 && model.layout().is_some() {
        let audit = monotone_audit(&mut rng_from_seed(seed), &rho, alpha.unwrap_or(1.0), trials)?;
        checks.push(Check::within("measurement_monotone", (-audit.min_measurement_gap).max(0.0), 1e-8));
        checks.push(Check::within("preparation_monotone", (-audit.min_preparation_gap).max(0.0), 1e-8));
        results.insert("monotone_audit".into(), serde_json::to_value(&audit).unwrap_or(Value::Null));
    }
    Ok(Outcome { report: Report::new("entropy", model, Value::Object(results), checks, seed), exit_code: exit::OK })
}
