use serde::{Deserialize, Serialize};

use super::channel::Edge;
use super::rng::derive_rng;
use super::ActorId;
use crate::error::{Error, Result};
use crate::gf2vec::BitVec;
use crate::layout::Dimensions;
use crate::qsim::{Tier, DEFAULT_STRUCTURED_CAP};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Secrets {
    Explicit(Vec<BitVec>),
    /// Drawn uniformly from a generator seeded by this value.
    Seeded(u64),
}

/// Who generates and hands out the entangled tuples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DealerRole {
    #[default]
    Trent,
    Broker(usize),
    /// A separate party outside the game.
    External,
}

impl DealerRole {
    pub fn actor(self) -> ActorId {
        match self {
            DealerRole::Trent => ActorId::Trent,
            DealerRole::Broker(i) => ActorId::Broker(i),
            DealerRole::External => ActorId::Dealer,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    pub dims: Dimensions,
    pub secrets: Secrets,
    pub seed: u64,
    /// Include Trent's permutations in the trace. Test oracles only.
    pub debug_permutations: bool,
    pub dealer: DealerRole,
    pub tier: Tier,
    pub structured_cap: usize,
    /// Channel edges whose messages are dropped (fault injection).
    pub dropped_edges: Vec<Edge>,
}

impl ProtocolConfig {
    pub fn new(dims: Dimensions, secrets: Secrets, seed: u64) -> Self {
        Self {
            dims,
            secrets,
            seed,
            debug_permutations: false,
            dealer: DealerRole::Trent,
            tier: Tier::Auto,
            structured_cap: DEFAULT_STRUCTURED_CAP,
            dropped_edges: Vec::new(),
        }
    }

    pub fn with_secrets(dims: Dimensions, secrets: Vec<BitVec>, seed: u64) -> Self {
        Self::new(dims, Secrets::Explicit(secrets), seed)
    }

    /// The concrete secrets, checked against the dimensions.
    pub fn resolve_secrets(&self) -> Result<Vec<BitVec>> {
        let secrets = match &self.secrets {
            Secrets::Explicit(list) => list.clone(),
            Secrets::Seeded(seed) => {
                let mut rng = derive_rng(*seed, "secrets");
                (0..self.dims.n())
                    .map(|_| BitVec::random(self.dims.m(), &mut rng))
                    .collect::<Result<_>>()?
            }
        };
        if secrets.len() != self.dims.n() {
            return Err(Error::Config(format!(
                "expected {} secrets, got {}",
                self.dims.n(),
                secrets.len()
            )));
        }
        if let Some(bad) = secrets.iter().position(|s| s.len() != self.dims.m()) {
            return Err(Error::Config(format!(
                "secret {bad} has width {}, expected {}",
                secrets[bad].len(),
                self.dims.m()
            )));
        }
        if let DealerRole::Broker(i) = self.dealer {
            if i >= self.dims.n() {
                return Err(Error::Config(format!("dealer broker {i} out of range")));
            }
        }
        Ok(secrets)
    }

    /// The JSON document form, with secrets resolved.
    pub fn to_doc(&self) -> Result<ConfigDoc> {
        Ok(ConfigDoc {
            n: self.dims.n(),
            m: self.dims.m(),
            secrets_hex: self.resolve_secrets()?.iter().map(BitVec::to_hex).collect(),
            secret_seed: None,
            seed: self.seed,
            debug_permutations: self.debug_permutations,
            dealer: match self.dealer {
                DealerRole::Trent => None,
                other => Some(other.actor()),
            },
        })
    }
}

/// Config as a JSON document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigDoc {
    pub n: usize,
    pub m: usize,
    #[serde(default)]
    pub secrets_hex: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secret_seed: Option<u64>,
    pub seed: u64,
    #[serde(default)]
    pub debug_permutations: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dealer: Option<ActorId>,
}

impl ConfigDoc {
    pub fn from_json(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Explicit secrets win over a secret seed when both are present.
    pub fn into_config(self) -> Result<ProtocolConfig> {
        let dims = Dimensions::new(self.n, self.m).map_err(|e| Error::Config(e.to_string()))?;
        let secrets = if !self.secrets_hex.is_empty() {
            Secrets::Explicit(
                self.secrets_hex
                    .iter()
                    .map(|h| BitVec::from_hex(h, self.m))
                    .collect::<Result<_>>()
                    .map_err(|e| Error::Config(e.to_string()))?,
            )
        } else if let Some(seed) = self.secret_seed {
            Secrets::Seeded(seed)
        } else {
            return Err(Error::Config("either secrets_hex or secret_seed is required".into()));
        };
        let mut config = ProtocolConfig::new(dims, secrets, self.seed);
        config.debug_permutations = self.debug_permutations;
        config.dealer = match self.dealer {
            None | Some(ActorId::Trent) => DealerRole::Trent,
            Some(ActorId::Broker(i)) => DealerRole::Broker(i),
            Some(ActorId::Dealer) => DealerRole::External,
        };
        config.resolve_secrets()?;
        Ok(config)
    }
}
