//! Instance files.
//!
//! JSON objects tagged by `kind` (`rmcc`, `mscs`, `ccs`, `dtw`). Rationals are
//! `"p/q"` strings (plain integers are accepted on input). Reduction outputs
//! carry a provenance record with the embedded source instance, its SHA-256,
//! the parameters, overrides and witness certificates.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::costfn::CostFamily;
use crate::cyclic::{BinaryString, ShiftVector};
use crate::dtw::TimeSeries;
use crate::error::{Error, Result};
use crate::mscs::MscsInstance;
use crate::rational::Rational;
use crate::reductions::DtwInstance;
use crate::rmcc::{MulticoloredClique, RmccGraph};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Rmcc {
        graph: RmccGraph,
    },
    Mscs {
        strings: Vec<BinaryString>,
        cost_fn: CostFamily,
    },
    Ccs {
        strings: Vec<BinaryString>,
    },
    Dtw {
        series: Vec<TimeSeries>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// `rmcc-to-mscs`, `mscs-to-ccs`, `mscs-to-dtw` or `generate`.
    pub reduction: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_sha256: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<Box<InstanceFile>>,
    #[serde(default)]
    pub params: serde_json::Value,
    #[serde(default)]
    pub overrides: serde_json::Value,
    #[serde(default)]
    pub outside_proof_regime: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

/// Certificates carried along a chain of reductions.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clique: Option<MulticoloredClique>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<ShiftVector>,
    /// Cost of the certificate in this instance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    #[serde(flatten)]
    pub payload: Payload,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

/// A validated instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instance {
    Rmcc(RmccGraph),
    Mscs(MscsInstance),
    Ccs {
        strings: Vec<BinaryString>,
        target: Option<Rational>,
    },
    Dtw(DtwInstance),
}

impl InstanceFile {
    pub fn kind(&self) -> &'static str {
        match self.payload {
            Payload::Rmcc { .. } => "rmcc",
            Payload::Mscs { .. } => "mscs",
            Payload::Ccs { .. } => "ccs",
            Payload::Dtw { .. } => "dtw",
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse(format!("instance file: {e}")))?;
        file.validate()?;
        Ok(file)
    }

    /// Canonical pretty JSON, newline-terminated.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instance files serialize");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    /// SHA-256 of the compact canonical JSON.
    pub fn sha256(&self) -> String {
        let compact = serde_json::to_string(self).expect("instance files serialize");
        hex::encode(Sha256::digest(compact.as_bytes()))
    }

    pub fn validate(&self) -> Result<Instance> {
        match &self.payload {
            Payload::Rmcc { graph } => {
                graph.ensure_valid()?;
                Ok(Instance::Rmcc(graph.clone()))
            }
            Payload::Mscs { strings, cost_fn } => {
                nonempty_strings(strings)?;
                let table = cost_fn.at_arity(strings.len()).map_err(|e| match e {
                    Error::ArityMismatch { expected, got } => Error::Malformed(format!(
                        "field cost_fn: table has arity {got}, but there are {expected} strings"
                    )),
                    other => other,
                })?;
                Ok(Instance::Mscs(MscsInstance::new(strings.clone(), table, self.target.clone())?))
            }
            Payload::Ccs { strings } => {
                nonempty_strings(strings)?;
                crate::cyclic::common_length(strings)?;
                Ok(Instance::Ccs {
                    strings: strings.clone(),
                    target: self.target.clone(),
                })
            }
            Payload::Dtw { series } => {
                if series.is_empty() {
                    return Err(Error::Malformed("field series: at least one series is required".into()));
                }
                Ok(Instance::Dtw(DtwInstance {
                    series: series.clone(),
                    target: self.target.clone(),
                }))
            }
        }
    }

    pub fn mscs(inst: &MscsInstance, cost_fn: CostFamily) -> Self {
        InstanceFile {
            payload: Payload::Mscs {
                strings: inst.strings.clone(),
                cost_fn,
            },
            target: inst.target.clone(),
            provenance: None,
        }
    }

    pub fn dtw(inst: &DtwInstance) -> Self {
        InstanceFile {
            payload: Payload::Dtw {
                series: inst.series.clone(),
            },
            target: inst.target.clone(),
            provenance: None,
        }
    }

    pub fn rmcc(graph: &RmccGraph) -> Self {
        InstanceFile {
            payload: Payload::Rmcc { graph: graph.clone() },
            target: None,
            provenance: None,
        }
    }
}

fn nonempty_strings(strings: &[BinaryString]) -> Result<()> {
    if strings.is_empty() {
        return Err(Error::Malformed("field strings: at least one string is required".into()));
    }
    Ok(())
}

/// Load a graph from either an instance file or the plain-text format.
pub fn load_graph(path: &Path) -> Result<(RmccGraph, Option<InstanceFile>)> {
    let text = std::fs::read_to_string(path)?;
    if text.trim_start().starts_with('{') {
        let file = InstanceFile::from_json(&text)?;
        match &file.payload {
            Payload::Rmcc { graph } => Ok((graph.clone(), Some(file.clone()))),
            _ => Err(Error::InvalidArgument(format!("{} holds a {} instance, not rmcc", path.display(), file.kind()))),
        }
    } else {
        let g = RmccGraph::from_text(&text)?;
        g.ensure_valid()?;
        Ok((g, None))
    }
}
