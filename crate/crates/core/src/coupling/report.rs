//! Per-trial record of a coupling procedure.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Result;
use crate::graph::{contains, write_multigraph, ContainmentMode, Digraph, Multigraph};

/// One trial of a coupling procedure: both objects, containment and diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingReport {
    pub procedure: String,
    /// `None` is the empty marker (procedure produced no inner object).
    pub inner: Option<Multigraph>,
    /// Oriented inner object, for procedures that build one.
    pub inner_digraph: Option<Digraph>,
    pub outer: Multigraph,
    pub containment_mode: ContainmentMode,
    pub contained: bool,
    /// Set when a stage failed and the inner object was drawn independently.
    pub decoupled: bool,
    pub flags: Vec<String>,
    pub diagnostics: BTreeMap<String, Value>,
}

impl EmbeddingReport {
    pub fn new(
        procedure: &str,
        inner: Option<Multigraph>,
        outer: Multigraph,
        mode: ContainmentMode,
    ) -> Result<Self> {
        let contained = match &inner {
            Some(g) => contains(g, &outer, mode)?,
            None => false,
        };
        Ok(EmbeddingReport {
            procedure: procedure.to_string(),
            inner,
            inner_digraph: None,
            outer,
            containment_mode: mode,
            contained,
            decoupled: false,
            flags: Vec::new(),
            diagnostics: BTreeMap::new(),
        })
    }

    pub fn flag(&mut self, f: &str) {
        if !self.flags.iter().any(|x| x == f) {
            self.flags.push(f.to_string());
        }
    }

    pub fn note<V: Into<Value>>(&mut self, key: &str, v: V) {
        self.diagnostics.insert(key.to_string(), v.into());
    }

    /// Recomputes the containment flag from the stored objects.
    pub fn is_consistent(&self) -> Result<bool> {
        let c = match &self.inner {
            Some(g) => contains(g, &self.outer, self.containment_mode)?,
            None => false,
        };
        Ok(c == self.contained)
    }

    /// JSON record with both graphs inline in the multigraph text format.
    pub fn to_json(&self) -> Result<Value> {
        Ok(json!({
            "procedure": self.procedure,
            "inner": match &self.inner { Some(g) => Value::String(write_multigraph(g)), None => Value::Null },
            "outer": write_multigraph(&self.outer),
            "containment_mode": format!("{:?}", self.containment_mode),
            "contained": self.contained,
            "decoupled": self.decoupled,
            "flags": self.flags,
            "diagnostics": self.diagnostics,
        }))
    }
}
