//! JSON forms of models and coefficient tables.
//!
//! Model: `{"family": "dirichlet" | "husler_reiss" | "choquet" |
//! "independent" | "dependent", "d": 3, "alpha": [...], "gamma": [[...]],
//! "tau" | "theta" | "chi": {"[1,2]": 0.3, ...}}`.
//!
//! Table: `{"kind": "theta", "d": 3, "values": {"[1]": 1.0, ...}}`.
//!
//! Subset keys are 1-based, strictly increasing index lists. In `tau`
//! maps, absent subsets carry mass 0; in `theta`/`chi` maps absent
//! singletons default to 1 and every other subset must be present.
//!
//! Syntax and shape problems are reported as [`Error::Parse`]; a
//! well-formed document describing an invalid model yields the validation
//! error instead.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::coeffs::{CoefficientTable, TableKind, DEFAULT_CHOQUET_TOL};
use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::subset::{SubsetMask, MAX_DIM};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    family: String,
    d: Option<usize>,
    alpha: Option<Vec<f64>>,
    gamma: Option<Vec<Vec<f64>>>,
    tau: Option<BTreeMap<String, f64>>,
    theta: Option<BTreeMap<String, f64>>,
    chi: Option<BTreeMap<String, f64>>,
    tol: Option<f64>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawTable {
    kind: String,
    d: usize,
    values: BTreeMap<String, f64>,
}

fn parse_err(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

fn check_d(declared: Option<usize>, actual: usize) -> Result<()> {
    match declared {
        Some(d) if d != actual => Err(Error::DimensionMismatch { expected: d, got: actual }),
        _ => Ok(()),
    }
}

fn require_d(d: Option<usize>, family: &str) -> Result<usize> {
    d.ok_or_else(|| Error::Parse(format!("family `{family}` needs field `d`")))
}

fn forbid(present: bool, field: &str, family: &str) -> Result<()> {
    if present {
        return Err(Error::Parse(format!("field `{field}` does not apply to family `{family}`")));
    }
    Ok(())
}

/// Build a table from a subset-key map.
pub fn table_from_map(kind: TableKind, d: usize, map: &BTreeMap<String, f64>) -> Result<CoefficientTable> {
    if d == 0 || d > MAX_DIM {
        return Err(Error::DimensionOutOfRange {
            dim: d,
            min: 1,
            max: MAX_DIM,
        });
    }
    let mut entries: Vec<(SubsetMask, f64)> = Vec::with_capacity(map.len());
    let mut seen = vec![false; 1usize << d];
    for (key, &v) in map {
        let a = SubsetMask::parse_key(key, d).map_err(|e| Error::Parse(e.to_string()))?;
        if a.is_empty() {
            return Err(Error::Parse(format!("subset key `{key}` is empty")));
        }
        if std::mem::replace(&mut seen[a.bits() as usize], true) {
            return Err(Error::Parse(format!("subset {} listed twice", a.to_key())));
        }
        if !v.is_finite() {
            return Err(Error::param(kind.name(), None, format!("value at {} is not finite", a.to_key())));
        }
        entries.push((a, v));
    }
    match kind {
        TableKind::Tau => {
            let mut values = vec![0.0; 1usize << d];
            for (a, v) in entries {
                values[a.bits() as usize] = v;
            }
            CoefficientTable::from_dense(kind, d, values)
        }
        TableKind::Theta | TableKind::Chi => {
            for i in 0..d {
                if !seen[1 << i] {
                    entries.push((SubsetMask::singleton(i, d)?, 1.0));
                }
            }
            CoefficientTable::from_entries(kind, d, entries)
        }
    }
}

/// Subset-key map of a table; `sparse` drops zero entries.
pub fn table_to_map(table: &CoefficientTable, sparse: bool) -> BTreeMap<String, f64> {
    table
        .iter()
        .filter(|&(_, v)| !(sparse && v == 0.0))
        .map(|(a, v)| (a.to_key(), v))
        .collect()
}

/// Parse and validate a model document.
pub fn parse_model(text: &str) -> Result<ModelSpec> {
    let raw: RawModel = serde_json::from_str(text).map_err(parse_err)?;
    let fam = raw.family.as_str();
    let tables = [&raw.tau, &raw.theta, &raw.chi].iter().filter(|t| t.is_some()).count();
    match fam {
        "independent" | "dependent" | "fully_dependent" => {
            forbid(raw.alpha.is_some(), "alpha", fam)?;
            forbid(raw.gamma.is_some(), "gamma", fam)?;
            forbid(tables > 0, "tau/theta/chi", fam)?;
            let d = require_d(raw.d, fam)?;
            if fam == "independent" {
                ModelSpec::independent(d)
            } else {
                ModelSpec::fully_dependent(d)
            }
        }
        "dirichlet" => {
            forbid(raw.gamma.is_some(), "gamma", fam)?;
            forbid(tables > 0, "tau/theta/chi", fam)?;
            let alpha = raw.alpha.ok_or_else(|| Error::Parse("family `dirichlet` needs field `alpha`".into()))?;
            check_d(raw.d, alpha.len())?;
            ModelSpec::dirichlet(alpha)
        }
        "husler_reiss" | "hr" => {
            forbid(raw.alpha.is_some(), "alpha", fam)?;
            forbid(tables > 0, "tau/theta/chi", fam)?;
            let gamma = raw
                .gamma
                .ok_or_else(|| Error::Parse("family `husler_reiss` needs field `gamma`".into()))?;
            check_d(raw.d, gamma.len())?;
            ModelSpec::husler_reiss(gamma)
        }
        "choquet" => {
            forbid(raw.alpha.is_some(), "alpha", fam)?;
            forbid(raw.gamma.is_some(), "gamma", fam)?;
            if tables != 1 {
                return Err(Error::Parse(
                    "family `choquet` needs exactly one of `tau`, `theta`, `chi`".into(),
                ));
            }
            let d = require_d(raw.d, fam)?;
            let (kind, map) = if let Some(m) = &raw.tau {
                (TableKind::Tau, m)
            } else if let Some(m) = &raw.theta {
                (TableKind::Theta, m)
            } else {
                (TableKind::Chi, raw.chi.as_ref().expect("counted"))
            };
            let table = table_from_map(kind, d, map)?;
            let tol = raw.tol.unwrap_or(DEFAULT_CHOQUET_TOL);
            if !(tol >= 0.0 && tol.is_finite()) {
                return Err(Error::param("tol", None, "must be a nonnegative number"));
            }
            crate::coeffs::validate_choquet(&table, tol)
        }
        other => Err(Error::Parse(format!(
            "unknown family `{other}` (expected dirichlet, husler_reiss, choquet, independent or dependent)"
        ))),
    }
}

/// JSON document for a model; [`parse_model`] reads it back.
pub fn model_to_json(model: &ModelSpec) -> Value {
    let d = model.dim();
    match model {
        ModelSpec::Independent { .. } => json!({"family": "independent", "d": d}),
        ModelSpec::FullyDependent { .. } => json!({"family": "dependent", "d": d}),
        ModelSpec::Dirichlet(p) => json!({"family": "dirichlet", "d": d, "alpha": p.alpha()}),
        ModelSpec::HuslerReiss(g) => json!({"family": "husler_reiss", "d": d, "gamma": g.to_rows()}),
        ModelSpec::Choquet(c) => {
            let mut v = json!({"family": "choquet", "d": d, "tau": table_to_map(c.tau(), true)});
            if let Some(p) = c.provenance() {
                v["tol"] = json!(p.validation_tol);
            }
            v
        }
    }
}

/// Parse a table document.
pub fn parse_table(text: &str) -> Result<CoefficientTable> {
    let raw: RawTable = serde_json::from_str(text).map_err(parse_err)?;
    let kind = TableKind::parse(&raw.kind).map_err(|e| Error::Parse(e.to_string()))?;
    table_from_map(kind, raw.d, &raw.values)
}

pub fn table_to_json(table: &CoefficientTable) -> Value {
    json!({
        "kind": table.kind().name(),
        "d": table.dim(),
        "values": table_to_map(table, false),
    })
}

/// A table from either a table document or a Choquet-family model
/// document (which yields its `θ` table).
pub fn parse_table_or_model(text: &str) -> Result<CoefficientTable> {
    let v: Value = serde_json::from_str(text).map_err(parse_err)?;
    if v.get("kind").is_some() {
        return parse_table(text);
    }
    let m = parse_model(text)?;
    m.theta_table()
        .ok_or_else(|| Error::Unsupported(format!("{} models have no exact coefficient table", m.family())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::tests::exchangeable;

    #[test]
    fn exchangeable_model_round_trip() {
        let text = r#"{"family":"choquet","d":3,"tau":{"[1]":0.3,"[2]":0.3,"[3]":0.3,
            "[1,2]":0.2,"[1,3]":0.2,"[2,3]":0.2,"[1,2,3]":0.3}}"#;
        let m = parse_model(text).unwrap();
        let t = m.theta_table().unwrap();
        assert!(t.max_abs_diff(&exchangeable('A').convert(TableKind::Theta)) < 1e-12);
        let back = parse_model(&model_to_json(&m).to_string()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn theta_map_defaults_singletons() {
        let text = r#"{"family":"choquet","d":2,"theta":{"[1,2]":1.5}}"#;
        let m = parse_model(text).unwrap();
        assert_eq!(m.theta_table().unwrap().get(SubsetMask::full(2).unwrap()), 1.5);
        let missing = r#"{"family":"choquet","d":3,"theta":{"[1,2]":1.5}}"#;
        assert!(matches!(parse_model(missing), Err(Error::MissingEntry(_))));
    }

    #[test]
    fn every_family_round_trips() {
        for text in [
            r#"{"family":"dirichlet","alpha":[0.5,2,3]}"#,
            r#"{"family":"husler_reiss","gamma":[[0,1],[1,0]]}"#,
            r#"{"family":"independent","d":4}"#,
            r#"{"family":"dependent","d":2}"#,
        ] {
            let m = parse_model(text).unwrap();
            assert_eq!(parse_model(&model_to_json(&m).to_string()).unwrap(), m);
        }
    }

    #[test]
    fn parse_versus_validation_errors() {
        assert!(matches!(parse_model("{"), Err(Error::Parse(_))));
        assert!(matches!(parse_model(r#"{"family":"gumbel","d":2}"#), Err(Error::Parse(_))));
        assert!(matches!(parse_model(r#"{"family":"dirichlet","alpha":[1,2],"extra":1}"#), Err(Error::Parse(_))));
        assert!(matches!(parse_model(r#"{"family":"dirichlet","alpha":"x"}"#), Err(Error::Parse(_))));
        match parse_model(r#"{"family":"dirichlet","alpha":[1,-2]}"#) {
            Err(Error::InvalidParameter { index: Some(2), .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_model(r#"{"family":"choquet","d":2,"tau":{"[1]":0.5,"[2]":0.5}}"#),
            Err(Error::MarginalConstraint { .. })
        ));
        assert!(matches!(
            parse_model(r#"{"family":"choquet","d":2,"tau":{"[3]":1}}"#),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn tables() {
        let t = exchangeable('B').convert(TableKind::Chi);
        let back = parse_table(&table_to_json(&t).to_string()).unwrap();
        assert_eq!(back, t);
        assert!(parse_table(r#"{"kind":"phi","d":2,"values":{}}"#).is_err());
        let via_model = parse_table_or_model(r#"{"family":"independent","d":2}"#).unwrap();
        assert_eq!(via_model.kind(), TableKind::Theta);
    }
}
