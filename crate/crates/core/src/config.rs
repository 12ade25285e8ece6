//! Run-configuration documents (JSON or TOML) with a strict schema.

use std::path::Path;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::classify::PolyFamily;
use crate::error::{Error, Result};
use crate::polyalg::Rat;
use crate::process::{Matrix, ProcessModel};
use crate::stats::Tolerances;
use crate::sums::{Observable, TensorTable};

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub family: Option<FamilySpec>,
    pub process: Option<ProcessSpec>,
    pub observable: Option<ObservableSpec>,
    pub experiment: Option<Experiment>,
}

/// `"n, n+N"`, `["n", "n+N"]` or `{ members = [...] }`.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum FamilySpec {
    Text(String),
    List(Vec<String>),
    Members { members: Vec<String> },
}

impl FamilySpec {
    pub fn build(&self) -> Result<PolyFamily> {
        match self {
            FamilySpec::Text(s) => PolyFamily::parse(s),
            FamilySpec::List(v) | FamilySpec::Members { members: v } => PolyFamily::parse(&v.join(",")),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum Entry {
    Number(f64),
    Text(String),
}

impl Entry {
    fn to_rat(&self) -> Option<Rat> {
        match self {
            Entry::Text(s) => {
                let s = s.trim();
                let (n, d) = s.split_once('/').unwrap_or((s, "1"));
                let n: BigInt = n.trim().parse().ok()?;
                let d: BigInt = d.trim().parse().ok()?;
                if d == BigInt::from(0) {
                    return None;
                }
                Some(Rat::new(n, d))
            }
            Entry::Number(_) => None,
        }
    }

    fn to_f64(&self) -> Result<f64> {
        match self {
            Entry::Number(x) => Ok(*x),
            Entry::Text(_) => self
                .to_rat()
                .map(|r| crate::polyalg::rat_to_f64(&r))
                .ok_or_else(|| Error::Config(format!("cannot read matrix entry {self:?}"))),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProcessSpec {
    BaseM {
        m: u32,
    },
    Markov {
        /// Rows of the transition matrix; strings such as `"9/10"` are exact.
        p: Vec<Vec<Entry>>,
        f: Vec<f64>,
    },
    Cf {
        digit_cap: u32,
    },
}

impl ProcessSpec {
    pub fn build(&self) -> Result<ProcessModel> {
        match self {
            ProcessSpec::BaseM { m } => ProcessModel::base_m(*m),
            ProcessSpec::Cf { digit_cap } => ProcessModel::continued_fraction(*digit_cap),
            ProcessSpec::Markov { p, f } => {
                let exact: Option<Vec<Vec<Rat>>> = p
                    .iter()
                    .map(|row| row.iter().map(Entry::to_rat).collect())
                    .collect();
                let m = match exact {
                    Some(rows) => Matrix::Exact(rows),
                    None => Matrix::Float(
                        p.iter()
                            .map(|row| row.iter().map(Entry::to_f64).collect::<Result<_>>())
                            .collect::<Result<_>>()?,
                    ),
                };
                ProcessModel::markov(m, f.clone())
            }
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservableSpec {
    IndicatorProduct { targets: Vec<Vec<u32>> },
    Tensor { sizes: Vec<usize>, values: Vec<f64> },
}

impl ObservableSpec {
    pub fn build(&self, alphabet: usize) -> Result<Observable> {
        match self {
            ObservableSpec::IndicatorProduct { targets } => Observable::indicator_product(alphabet, targets),
            ObservableSpec::Tensor { sizes, values } => {
                Ok(Observable::TensorTable(TensorTable::new(sizes.clone(), values.clone())?))
            }
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    pub se_mult: Option<f64>,
    pub median_factor: Option<f64>,
    pub ks_slack: Option<f64>,
    pub projections: Option<usize>,
    pub projections_required: Option<usize>,
    pub bootstrap: Option<usize>,
}

impl ToleranceSpec {
    pub fn build(&self) -> Tolerances {
        let d = Tolerances::default();
        Tolerances {
            se_mult: self.se_mult.unwrap_or(d.se_mult),
            median_factor: self.median_factor.unwrap_or(d.median_factor),
            ks_slack: self.ks_slack.unwrap_or(d.ks_slack),
            projections: self.projections.unwrap_or(d.projections),
            projections_required: self.projections_required.unwrap_or(d.projections_required),
            bootstrap: self.bootstrap.unwrap_or(d.bootstrap),
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Experiment {
    #[serde(rename = "N")]
    pub n: Option<OneOrMany<u64>>,
    pub reps: Option<usize>,
    pub grid: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub centered: Option<bool>,
    pub delta: Option<f64>,
    pub w: Option<f64>,
    pub theta: Option<f64>,
    pub zeta1: Option<f64>,
    pub gamma_pairs: Option<usize>,
    pub tolerances: Option<ToleranceSpec>,
}

impl Config {
    /// Parses by extension: `.toml` as TOML, anything else as JSON.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let is_toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
        if is_toml {
            Self::from_toml(&text)
        } else {
            Self::from_json(&text)
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn family(&self) -> Result<PolyFamily> {
        match &self.family {
            Some(f) => f.build(),
            None => PolyFamily::parse("n, n+N, n^2"),
        }
    }

    pub fn model(&self) -> Result<ProcessModel> {
        match &self.process {
            Some(p) => p.build(),
            None => ProcessModel::base_m(2),
        }
    }

    /// Defaults to the indicator of symbol 1 in every coordinate.
    pub fn observable(&self, family: &PolyFamily, model: &ProcessModel) -> Result<Observable> {
        match &self.observable {
            Some(o) => o.build(model.alphabet_size()),
            None => Observable::indicator_product(model.alphabet_size(), &vec![vec![1]; family.len()]),
        }
    }

    pub fn experiment(&self) -> Experiment {
        self.experiment.clone().unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_json_and_toml() {
        let json = r#"{
            "family": ["n", "n+N"],
            "process": {"kind": "markov", "p": [["9/10", "1/10"], ["1/10", "9/10"]], "f": [0, 1]},
            "observable": {"kind": "indicator_product", "targets": [[1], [1]]},
            "experiment": {"N": [100, 200], "reps": 10}
        }"#;
        let c = Config::from_json(json).unwrap();
        let model = c.model().unwrap();
        assert!(matches!(model, ProcessModel::FiniteMarkov(ref m) if m.pi_exact.is_some()));
        assert_eq!(c.experiment().n.unwrap().to_vec(), vec![100, 200]);
        let toml = r#"
            family = "n, n^2"
            [process]
            kind = "base_m"
            m = 3
            [experiment]
            N = 64
        "#;
        let c = Config::from_toml(toml).unwrap();
        assert_eq!(c.model().unwrap().alphabet_size(), 3);
        assert_eq!(c.family().unwrap().len(), 2);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = Config::from_json(r#"{"experiment": {"replicatons": 5}}"#).unwrap_err();
        assert!(err.to_string().contains("replicatons"));
        let err = Config::from_json(r#"{"process": {"kind": "base_m", "m": 2, "x": 1}}"#).unwrap_err();
        assert!(err.to_string().contains('x'));
    }
}
