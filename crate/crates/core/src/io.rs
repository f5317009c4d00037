//! Text formats: sampled paths as CSV, grid paths as JSON.

use std::sync::Arc;

use num_rational::Rational64;
use serde_json::{json, Map, Value};

use crate::basis::{anisotropic_truncation, forest_truncation, word_truncation};
use crate::construct::{AlgebraKind, ConstructionConfig, DyadicGroupPath, HolderReport, SampledPath};
use crate::dual::DualElement;
use crate::error::{Error, Result};
use crate::forest::DecoratedForest;
use crate::scalar::{format_small, parse_small_rational, Scalar};
use crate::shuffle::{Alphabet, Word};
use crate::signature::PiecewiseLinearPath;

fn csv_error(e: csv::Error) -> Error {
    let position = e.position().map_or(0, |p| p.byte() as usize);
    Error::Parse {
        position,
        message: e.to_string(),
    }
}

/// Header `t,…` and rows of text cells.
fn read_table(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers().map_err(csv_error)?.iter().map(String::from).collect();
    if header.first().map(String::as_str) != Some("t") || header.len() < 2 {
        return Err(Error::Invalid("CSV header must read t,a1,…,ad".into()));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        rows.push(record.iter().map(String::from).collect());
    }
    Ok((header, rows))
}

/// Dyadic samples: exactly `2^M + 1` rows with `t_k = k / 2^M`.
pub fn read_sampled_path(text: &str) -> Result<SampledPath> {
    let (header, rows) = read_table(text)?;
    let cells = rows.len().saturating_sub(1);
    if rows.len() < 3 || !cells.is_power_of_two() {
        return Err(Error::Invalid(format!("{} rows is not 2^M + 1 with M ≥ 1", rows.len())));
    }
    let depth = cells.trailing_zeros();
    let d = header.len() - 1;
    let mut channels = vec![Vec::with_capacity(rows.len()); d];
    for (k, row) in rows.iter().enumerate() {
        let t = f64::parse_text(&row[0])?;
        if (t - k as f64 / cells as f64).abs() > 1e-12 {
            return Err(Error::Invalid(format!(
                "row {k}: t = {t} is not the dyadic point {k}/{cells}"
            )));
        }
        for (c, cell) in row[1..].iter().enumerate() {
            channels[c].push(f64::parse_text(cell)?);
        }
    }
    SampledPath::new(depth, channels)
}

/// Breakpoints in the `t` column, letters `1..=d` for the value columns.
pub fn read_breakpoints<S: Scalar + PartialOrd>(text: &str) -> Result<PiecewiseLinearPath<S>> {
    let (header, rows) = read_table(text)?;
    let d = header.len() - 1;
    let mut times = Vec::with_capacity(rows.len());
    let mut values = vec![Vec::with_capacity(rows.len()); d];
    for row in &rows {
        times.push(S::parse_text(&row[0])?);
        for (c, cell) in row[1..].iter().enumerate() {
            values[c].push(S::parse_text(cell)?);
        }
    }
    PiecewiseLinearPath::new(times, (1..=d as u32).collect(), values)
}

pub fn write_sampled_path(x: &SampledPath) -> String {
    let mut out = String::from("t");
    for a in 1..=x.dimension() {
        out.push_str(&format!(",a{a}"));
    }
    out.push('\n');
    let cells = x.points() - 1;
    for k in 0..x.points() {
        out.push_str(&(k as f64 / cells as f64).to_text());
        for c in x.channels() {
            out.push(',');
            out.push_str(&c[k].to_text());
        }
        out.push('\n');
    }
    out
}

fn config_json(config: Option<ConstructionConfig>) -> Value {
    match config {
        Some(c) => json!({"z_init": c.z_init, "split_weight": c.split_weight}),
        None => Value::Null,
    }
}

fn algebra_json(kind: &AlgebraKind) -> Value {
    match kind {
        AlgebraKind::Bck { decorations, max_nodes } => {
            json!({"name": "bck", "decorations": decorations, "max_nodes": max_nodes})
        }
        AlgebraKind::Shuffle { letters, max_length } => {
            json!({"name": "shuffle", "letters": letters, "max_length": max_length})
        }
        AlgebraKind::Anisotropic { letters, weights } => json!({
            "name": "aniso",
            "letters": letters,
            "weights": weights.iter().map(|w| format_small(*w)).collect::<Vec<_>>(),
        }),
    }
}

/// `{"algebra", "depth", "level", "gamma", "config", "states": […]}`.
pub fn path_to_json<K: crate::basis::HopfKey>(path: &DyadicGroupPath<K>) -> Value {
    let mut map = Map::new();
    map.insert("algebra".into(), algebra_json(path.algebra()));
    map.insert("depth".into(), json!(path.depth()));
    map.insert("level".into(), json!(path.level()));
    map.insert("gamma".into(), json!(format_small(path.holder_scale())));
    map.insert("config".into(), config_json(path.config()));
    map.insert(
        "states".into(),
        Value::Array(path.states().iter().map(|s| s.to_json()).collect()),
    );
    Value::Object(map)
}

pub fn holder_report_json(report: &HolderReport) -> Value {
    let entries: Vec<Value> = report
        .keys
        .iter()
        .zip(&report.exponents)
        .zip(&report.constants)
        .map(|((k, e), c)| json!({"key": k, "exponent": e, "constant": c}))
        .collect();
    json!({"all_finite": report.all_finite(), "entries": entries})
}

/// Grid path read back from JSON, tagged by its algebra.
#[derive(Clone, Debug)]
pub enum StoredPath {
    Branched(DyadicGroupPath<DecoratedForest>),
    Words(DyadicGroupPath<Word<u32>>),
}

impl StoredPath {
    pub fn branched(self) -> Result<DyadicGroupPath<DecoratedForest>> {
        match self {
            StoredPath::Branched(p) => Ok(p),
            StoredPath::Words(_) => Err(Error::Precondition("a branched (bck) path is required".into())),
        }
    }
}

fn field<'a>(map: &'a Map<String, Value>, name: &str) -> Result<&'a Value> {
    map.get(name)
        .ok_or_else(|| Error::Invalid(format!("path JSON lacks field {name:?}")))
}

fn as_usize(v: &Value, name: &str) -> Result<usize> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| Error::Invalid(format!("field {name:?} must be a non-negative integer")))
}

fn u32_list(v: &Value, name: &str) -> Result<Vec<u32>> {
    v.as_array()
        .ok_or_else(|| Error::Invalid(format!("field {name:?} must be an array")))?
        .iter()
        .map(|x| match x {
            Value::Number(n) => n.as_u64().map(|n| n as u32),
            Value::String(s) => s.parse().ok(),
            _ => None,
        })
        .map(|x| x.ok_or_else(|| Error::Invalid(format!("field {name:?} holds a non-letter"))))
        .collect()
}

fn parse_config(v: &Value) -> Result<Option<ConstructionConfig>> {
    if v.is_null() {
        return Ok(None);
    }
    let get = |k: &str| {
        v.get(k)
            .and_then(Value::as_f64)
            .ok_or_else(|| Error::Invalid(format!("config lacks {k:?}")))
    };
    let c = ConstructionConfig {
        z_init: get("z_init")?,
        split_weight: get("split_weight")?,
    };
    c.validate()?;
    Ok(Some(c))
}

fn states_from<K: crate::basis::HopfKey>(
    basis: &Arc<crate::basis::Truncation<K>>,
    states: &Value,
) -> Result<Vec<DualElement<f64, K>>> {
    states
        .as_array()
        .ok_or_else(|| Error::Invalid("field \"states\" must be an array".into()))?
        .iter()
        .map(|s| DualElement::from_json(basis, s))
        .collect()
}

/// Inverse of `path_to_json`; the basis is rebuilt from the algebra record.
pub fn path_from_json(value: &Value, cap: usize) -> Result<StoredPath> {
    let map = value
        .as_object()
        .ok_or_else(|| Error::Invalid("path JSON must be an object".into()))?;
    let algebra = field(map, "algebra")?;
    let depth = as_usize(field(map, "depth")?, "depth")? as u32;
    let level = as_usize(field(map, "level")?, "level")?;
    let gamma = parse_small_rational(
        field(map, "gamma")?
            .as_str()
            .ok_or_else(|| Error::Invalid("field \"gamma\" must be a string".into()))?,
    )?;
    let config = parse_config(field(map, "config")?)?;
    let states = field(map, "states")?;
    let name = algebra.get("name").and_then(Value::as_str).unwrap_or("");
    let sub = |k: &str| {
        algebra
            .get(k)
            .ok_or_else(|| Error::Invalid(format!("algebra record lacks {k:?}")))
    };
    match name {
        "bck" => {
            let decorations = u32_list(sub("decorations")?, "decorations")?;
            let max_nodes = as_usize(sub("max_nodes")?, "max_nodes")?;
            let basis = forest_truncation(max_nodes, &decorations, cap)?;
            let s = states_from(&basis, states)?;
            let kind = AlgebraKind::Bck { decorations, max_nodes };
            DyadicGroupPath::from_states(basis, kind, depth, level, gamma, config, s).map(StoredPath::Branched)
        }
        "shuffle" => {
            let letters = u32_list(sub("letters")?, "letters")?;
            let max_length = as_usize(sub("max_length")?, "max_length")?;
            let basis = word_truncation(&letters, max_length, cap)?;
            let s = states_from(&basis, states)?;
            let kind = AlgebraKind::Shuffle { letters, max_length };
            DyadicGroupPath::from_states(basis, kind, depth, level, gamma, config, s).map(StoredPath::Words)
        }
        "aniso" => {
            let letters = u32_list(sub("letters")?, "letters")?;
            let weights = sub("weights")?
                .as_array()
                .ok_or_else(|| Error::Invalid("weights must be an array".into()))?
                .iter()
                .map(|w| {
                    w.as_str()
                        .ok_or_else(|| Error::Invalid("weights must be rational strings".into()))
                        .and_then(parse_small_rational)
                })
                .collect::<Result<Vec<Rational64>>>()?;
            let alphabet = Alphabet::new(letters, weights)?;
            let basis = anisotropic_truncation(&alphabet, cap)?;
            let s = states_from(&basis, states)?;
            let kind = AlgebraKind::Anisotropic {
                letters: alphabet.letters().iter().map(|l| l.to_string()).collect(),
                weights: alphabet.weights().to_vec(),
            };
            DyadicGroupPath::from_states(basis, kind, depth, level, gamma, config, s).map(StoredPath::Words)
        }
        other => Err(Error::Invalid(format!("unknown algebra {other:?}"))),
    }
}
