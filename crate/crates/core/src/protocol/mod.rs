//! The three-phase protocol run as actors over simulated authenticated
//! classical channels.
//!
//! Phase 1: every broker encodes its extended secret as a phase oracle on its
//! register, all `n + 1` registers are measured, and the brokers send their
//! outcomes to Trent, who XORs them into the aggregated vector `t`.
//! Phase 2: Trent shuffles the blocks of each segment of `t` with private
//! permutations. Phase 3: Trent alone encodes the shuffled vector on a fresh
//! resource, every party measures, and segment `i` of each register is sent
//! to broker `i`, who XORs them and strips its own secret from each block.

mod channel;
mod config;
mod rng;
mod session;
mod trace;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use channel::{Edge, Message, Network, Outgoing};
pub use config::{ConfigDoc, DealerRole, ProtocolConfig, Secrets};
pub use rng::{derive_rng, StreamRng};
pub use session::{r6_warnings, run_full, BrokerOutput, Phase1Outcome, Phase3Outcome, Session};
pub use trace::{ProtocolTrace, TraceEvent};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActorId {
    Broker(usize),
    Trent,
    Dealer,
}

impl fmt::Display for ActorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActorId::Broker(i) => write!(f, "broker-{i}"),
            ActorId::Trent => f.write_str("trent"),
            ActorId::Dealer => f.write_str("dealer"),
        }
    }
}

impl FromStr for ActorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "trent" => Ok(ActorId::Trent),
            "dealer" => Ok(ActorId::Dealer),
            _ => s
                .strip_prefix("broker-")
                .and_then(|i| i.parse().ok())
                .map(ActorId::Broker)
                .ok_or_else(|| Error::Parse(format!("unknown actor {s:?}"))),
        }
    }
}

impl Serialize for ActorId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ActorId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Quantum phases that carry classical messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Phase {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "3")]
    Three,
}

impl Phase {
    pub fn number(self) -> u8 {
        match self {
            Phase::One => 1,
            Phase::Three => 3,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn actor_names_round_trip() {
        for a in [ActorId::Broker(0), ActorId::Broker(12), ActorId::Trent, ActorId::Dealer] {
            assert_eq!(a.to_string().parse::<ActorId>().unwrap(), a);
        }
        assert!("broker-x".parse::<ActorId>().is_err());
        assert!("alice".parse::<ActorId>().is_err());
    }
}
