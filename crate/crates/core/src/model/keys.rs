//! Canonical variable names shared by every problem builder.
//!
//! A key is `<prefix>[<index>,...,<year>]`. Ids never contain `,`, `[`, `]`
//! or `:` (enforced by validation), and prefixes are distinct, so the
//! mapping is injective.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VarKind {
    GenOutput,
    Flow,
    LoadShed,
    ReserveShortfall,
    Charge,
    Discharge,
    Soc,
    RpsShortfall,
    Decision,
    Build,
    Retire,
    Operate,
    MaterialUse,
    ComponentOutput,
    ProductCapacity,
    Stock,
    Field,
}

pub const ALL_KINDS: [VarKind; 17] = [
    VarKind::GenOutput,
    VarKind::Flow,
    VarKind::LoadShed,
    VarKind::ReserveShortfall,
    VarKind::Charge,
    VarKind::Discharge,
    VarKind::Soc,
    VarKind::RpsShortfall,
    VarKind::Decision,
    VarKind::Build,
    VarKind::Retire,
    VarKind::Operate,
    VarKind::MaterialUse,
    VarKind::ComponentOutput,
    VarKind::ProductCapacity,
    VarKind::Stock,
    VarKind::Field,
];

impl VarKind {
    pub fn prefix(self) -> &'static str {
        match self {
            VarKind::GenOutput => "p",
            VarKind::Flow => "q",
            VarKind::LoadShed => "ls",
            VarKind::ReserveShortfall => "rm",
            VarKind::Charge => "c",
            VarKind::Discharge => "dc",
            VarKind::Soc => "soc",
            VarKind::RpsShortfall => "rps",
            VarKind::Decision => "d",
            VarKind::Build => "b",
            VarKind::Retire => "r",
            VarKind::Operate => "o",
            VarKind::MaterialUse => "u",
            VarKind::ComponentOutput => "v",
            VarKind::ProductCapacity => "w",
            VarKind::Stock => "s",
            VarKind::Field => "f",
        }
    }

    /// Human-readable family name accepted by [`VarKind::from_name`].
    pub fn name(self) -> &'static str {
        match self {
            VarKind::GenOutput => "gen-output",
            VarKind::Flow => "flow",
            VarKind::LoadShed => "load-shed",
            VarKind::ReserveShortfall => "reserve-shortfall",
            VarKind::Charge => "charge",
            VarKind::Discharge => "discharge",
            VarKind::Soc => "soc",
            VarKind::RpsShortfall => "rps-shortfall",
            VarKind::Decision => "decision",
            VarKind::Build => "build",
            VarKind::Retire => "retire",
            VarKind::Operate => "operate",
            VarKind::MaterialUse => "material-use",
            VarKind::ComponentOutput => "component-output",
            VarKind::ProductCapacity => "product-capacity",
            VarKind::Stock => "stock",
            VarKind::Field => "field",
        }
    }

    /// Number of indices including the trailing year.
    pub fn arity(self) -> usize {
        match self {
            VarKind::GenOutput
            | VarKind::Flow
            | VarKind::LoadShed
            | VarKind::Charge
            | VarKind::Discharge
            | VarKind::Soc => 4,
            VarKind::Field => 3,
            VarKind::ReserveShortfall => 1,
            _ => 2,
        }
    }

    pub fn from_name(name: &str) -> Option<VarKind> {
        ALL_KINDS.iter().copied().find(|k| k.name() == name)
    }

    pub fn from_prefix(prefix: &str) -> Option<VarKind> {
        ALL_KINDS.iter().copied().find(|k| k.prefix() == prefix)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KeyError {
    #[error("unknown variable kind {0:?}")]
    UnknownKind(String),
    #[error("{kind} takes {expected} indices, got {got}")]
    Arity {
        kind: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("malformed key {0:?}")]
    Malformed(String),
}

/// Structured form of a variable key. The year is kept separately so that
/// builders can shift references across years.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarKey {
    pub kind: VarKind,
    pub idx: Vec<String>,
    pub year: i32,
}

impl VarKey {
    pub fn new(kind: VarKind, idx: &[&str], year: i32) -> VarKey {
        debug_assert_eq!(idx.len() + 1, kind.arity());
        VarKey {
            kind,
            idx: idx.iter().map(|s| s.to_string()).collect(),
            year,
        }
    }

    pub fn at_year(&self, year: i32) -> VarKey {
        VarKey {
            year,
            ..self.clone()
        }
    }

    pub fn parse(key: &str) -> Result<VarKey, KeyError> {
        let bad = || KeyError::Malformed(key.to_string());
        let (prefix, rest) = key.split_once('[').ok_or_else(bad)?;
        let inner = rest.strip_suffix(']').ok_or_else(bad)?;
        let kind = VarKind::from_prefix(prefix).ok_or_else(bad)?;
        let mut parts: Vec<&str> = inner.split(',').collect();
        if parts.len() != kind.arity() {
            return Err(bad());
        }
        let year = parts.pop().unwrap().parse().map_err(|_| bad())?;
        Ok(VarKey::new(kind, &parts, year))
    }
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[", self.kind.prefix())?;
        for i in &self.idx {
            write!(f, "{i},")?;
        }
        write!(f, "{}]", self.year)
    }
}

/// Canonical key for family `kind` (by name, e.g. `"gen-output"`).
pub fn variable_key(kind: &str, indices: &[&str]) -> Result<String, KeyError> {
    let k = VarKind::from_name(kind).ok_or_else(|| KeyError::UnknownKind(kind.to_string()))?;
    if indices.len() != k.arity() {
        return Err(KeyError::Arity {
            kind: k.name(),
            expected: k.arity(),
            got: indices.len(),
        });
    }
    Ok(format!("{}[{}]", k.prefix(), indices.join(",")))
}
