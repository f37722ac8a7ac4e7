//! JSON instance files.
//!
//! A file is a payload object, optionally tagged with `"version": 1` and a
//! `"kind"` (`lp`, `bipolar`, `transport`, `hedge`). Untagged payloads are
//! read as whatever kind the caller expects.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::bipolar::{GeneratorSet, Regime};
use crate::error::{Error, Result};
use crate::hedging::{MarketModel, MarketSpec};
use crate::lp::LpProblem;
use crate::model::{ExtReal, FiniteSpace, FuncOnSpace, MeasureOnSpace};
use crate::transport::TransportInstance;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Lp,
    Bipolar,
    Transport,
    Hedge,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Lp => "lp",
            Kind::Bipolar => "bipolar",
            Kind::Transport => "transport",
            Kind::Hedge => "hedge",
        }
    }
}

/// A generator set on the wire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub space: FiniteSpace,
    pub generators: Vec<Vec<ExtReal>>,
    #[serde(default = "default_regime")]
    pub regime: Regime,
}

fn default_regime() -> Regime {
    Regime::Nonneg
}

impl GeneratorSpec {
    pub fn build(&self) -> Result<GeneratorSet> {
        let space = Arc::new(self.space.clone());
        let gens = self
            .generators
            .iter()
            .enumerate()
            .map(|(j, g)| {
                FuncOnSpace::new(space.clone(), g.clone())
                    .map_err(|e| Error::InvalidInput(format!("generator {j}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        GeneratorSet::new(space, gens, self.regime)
    }

    pub fn from_set(h: &GeneratorSet) -> Self {
        Self {
            space: (**h.space()).clone(),
            generators: h.generators().iter().map(|g| g.values().to_vec()).collect(),
            regime: h.regime(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportSpec {
    pub left: GeneratorSpec,
    pub right: GeneratorSpec,
    /// Dominating measures for each marginal. Recorded for completeness;
    /// on a finite space counting measure always dominates, so they are
    /// not used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dominating: Option<[Vec<f64>; 2]>,
}

impl TransportSpec {
    pub fn build(&self) -> Result<TransportInstance> {
        TransportInstance::new(self.left.build()?, self.right.build()?)
    }

    pub fn from_instance(t: &TransportInstance) -> Self {
        Self {
            left: GeneratorSpec::from_set(t.left()),
            right: GeneratorSpec::from_set(t.right()),
            dominating: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Lp(LpProblem),
    Bipolar(GeneratorSpec),
    Transport(TransportSpec),
    Hedge(MarketSpec),
}

impl Instance {
    pub fn kind(&self) -> Kind {
        match self {
            Instance::Lp(_) => Kind::Lp,
            Instance::Bipolar(_) => Kind::Bipolar,
            Instance::Transport(_) => Kind::Transport,
            Instance::Hedge(_) => Kind::Hedge,
        }
    }

    /// Checks the payload against its module's invariants.
    pub fn validate(&self) -> Result<()> {
        match self {
            Instance::Lp(p) => p.validate(),
            Instance::Bipolar(g) => g.build().map(drop),
            Instance::Transport(t) => t.build().map(drop),
            Instance::Hedge(m) => MarketModel::try_from(m.clone()).map(drop),
        }
    }

    /// The tagged JSON form: `{"version": 1, "kind": …, …payload}`.
    pub fn to_json(&self) -> Value {
        let payload = match self {
            Instance::Lp(p) => serde_json::to_value(p),
            Instance::Bipolar(g) => serde_json::to_value(g),
            Instance::Transport(t) => serde_json::to_value(t),
            Instance::Hedge(m) => serde_json::to_value(m),
        }
        .expect("instances serialize");
        let mut out = Map::new();
        out.insert("version".into(), Value::from(SCHEMA_VERSION));
        out.insert("kind".into(), Value::from(self.kind().as_str()));
        if let Value::Object(fields) = payload {
            out.extend(fields);
        }
        Value::Object(out)
    }

    pub fn from_json(value: Value, expected: Kind) -> Result<Self> {
        let Value::Object(mut fields) = value else {
            return Err(Error::InvalidInput(
                "an instance must be a JSON object".into(),
            ));
        };
        if let Some(v) = fields.remove("version") {
            if v.as_u64() != Some(u64::from(SCHEMA_VERSION)) {
                return Err(Error::InvalidInput(format!(
                    "unsupported schema version {v} (expected {SCHEMA_VERSION})"
                )));
            }
        }
        if let Some(k) = fields.remove("kind") {
            let kind: Kind = serde_json::from_value(k.clone())
                .map_err(|_| Error::InvalidInput(format!("unknown instance kind {k}")))?;
            if kind != expected {
                return Err(Error::InvalidInput(format!(
                    "expected a {} instance, found {}",
                    expected.as_str(),
                    kind.as_str()
                )));
            }
        }
        let payload = Value::Object(fields);
        let bad = |e: serde_json::Error| {
            Error::InvalidInput(format!("invalid {} instance: {e}", expected.as_str()))
        };
        let inst = match expected {
            Kind::Lp => Instance::Lp(serde_json::from_value(payload).map_err(bad)?),
            Kind::Bipolar => Instance::Bipolar(serde_json::from_value(payload).map_err(bad)?),
            Kind::Transport => Instance::Transport(serde_json::from_value(payload).map_err(bad)?),
            Kind::Hedge => Instance::Hedge(serde_json::from_value(payload).map_err(bad)?),
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn parse(text: &str, expected: Kind) -> Result<Self> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("malformed JSON: {e}")))?;
        Self::from_json(value, expected)
    }
}

/// Values of a function: a flat array, a matrix (rows concatenated, for
/// product spaces) or `{"values": …}`. Entries are numbers or `"inf"`.
pub fn parse_values(text: &str) -> Result<Vec<ExtReal>> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| Error::InvalidInput(format!("malformed JSON: {e}")))?;
    values_from_json(value)
}

fn values_from_json(value: Value) -> Result<Vec<ExtReal>> {
    let value = match value {
        Value::Object(mut m) => m.remove("values").ok_or_else(|| {
            Error::InvalidInput("expected an array or an object with \"values\"".into())
        })?,
        v => v,
    };
    let Value::Array(items) = value else {
        return Err(Error::InvalidInput(
            "function values must be an array".into(),
        ));
    };
    let mut out = Vec::with_capacity(items.len());
    for (i, item) in items.into_iter().enumerate() {
        if let Value::Array(_) = item {
            out.extend(values_from_json(item)?);
        } else {
            let v: ExtReal = serde_json::from_value(item)
                .map_err(|e| Error::InvalidInput(format!("value at index {i}: {e}")))?;
            out.push(v);
        }
    }
    Ok(out)
}

pub fn parse_function(text: &str, space: &Arc<FiniteSpace>) -> Result<FuncOnSpace> {
    FuncOnSpace::new(space.clone(), parse_values(text)?)
}

/// A measure as a flat (or matrix) array of nonnegative weights.
pub fn parse_measure(text: &str, space: &Arc<FiniteSpace>) -> Result<MeasureOnSpace> {
    let values = parse_values(text)?;
    let weights = values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            v.finite().ok_or_else(|| {
                Error::InvalidInput(format!("measure weight at index {i} is not finite (inf)"))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    MeasureOnSpace::new(space.clone(), weights)
}
