use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::channel::Message;
use super::config::ConfigDoc;
use super::session::BrokerOutput;
use crate::error::{Error, Result};
use crate::gf2vec::BitVec;
use crate::layout::{AggregatedVector, ExtendedRecord};
use crate::shuffle::Permutation;

/// One line of the JSON-lines trace.
///
/// `event`, `actor`, `phase`, `payload_hex` and `nonce` are always present;
/// the other fields appear only on the events that need them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub event: String,
    pub actor: String,
    pub phase: u8,
    pub payload_hex: Option<String>,
    pub nonce: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segment: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values_hex: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutations: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<ConfigDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extended: Option<ExtendedRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl TraceEvent {
    pub fn new(event: &str, actor: impl ToString, phase: u8) -> Self {
        Self {
            event: event.to_string(),
            actor: actor.to_string(),
            phase,
            payload_hex: None,
            nonce: None,
            bits: None,
            from: None,
            to: None,
            segment: None,
            values_hex: None,
            permutations: None,
            config: None,
            extended: None,
            detail: None,
        }
    }

    pub fn payload(mut self, v: &BitVec) -> Self {
        self.payload_hex = Some(v.to_hex());
        self.bits = Some(v.len());
        self
    }

    pub fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trace event serializes")
    }
}

/// Everything a run did, in order, plus the decoded results.
#[derive(Debug, Clone)]
pub struct ProtocolTrace {
    pub config: ConfigDoc,
    pub secrets: Vec<BitVec>,
    pub tier: String,
    pub phase1_registers: Vec<BitVec>,
    pub aggregated: AggregatedVector,
    pub shuffled: AggregatedVector,
    /// Present only when the config asks for debug permutations.
    pub permutations: Option<Vec<Permutation>>,
    pub phase3_registers: Vec<BitVec>,
    /// Delivered messages of both phases, in delivery order.
    pub messages: Vec<Message>,
    pub outputs: Vec<BrokerOutput>,
    pub warnings: Vec<String>,
    pub checks: Vec<(String, bool)>,
    pub events: Vec<TraceEvent>,
}

impl ProtocolTrace {
    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&e.to_json());
            out.push('\n');
        }
        out
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        f.write_all(self.to_jsonl().as_bytes())
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// The events Trent takes part in: his own measurements and
    /// computations and every message to or from him.
    pub fn trent_view(&self) -> Vec<TraceEvent> {
        let me = "trent";
        self.events
            .iter()
            .filter(|e| e.event != "config" && e.event != "warning")
            .filter(|e| e.actor == me || e.to.as_deref() == Some(me) || e.from.as_deref() == Some(me))
            .cloned()
            .collect()
    }
}
