use super::channel::{Message, Network, Outgoing};
use super::config::ProtocolConfig;
use super::rng::{derive_rng, StreamRng};
use super::trace::{ProtocolTrace, TraceEvent};
use super::{ActorId, Phase};
use crate::error::{Error, Result};
use crate::gf2vec::BitVec;
use crate::layout::{self, AggregatedVector, Dimensions, ExtendedSecret};
use crate::qsim::GhzResource;
use crate::shuffle::{self, Permutation};

const HARNESS: &str = "harness";

/// What one broker learns at the end of Phase 3.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BrokerOutput {
    pub broker: usize,
    /// Segment `broker` of the shuffled aggregated vector, as reassembled.
    pub segment: BitVec,
    /// Every block of the segment XORed with the broker's own secret, in
    /// block order.
    pub decoded_blocks: Vec<BitVec>,
    /// `decoded_blocks` with one copy of the broker's own secret removed.
    pub recovered: Vec<BitVec>,
    /// Set when secrets are not unique and nonzero, so the removed copy may
    /// not be the broker's own block.
    pub ambiguous: bool,
}

#[derive(Debug, Clone)]
pub struct Phase1Outcome {
    /// Measured registers, brokers first and Trent last.
    pub registers: Vec<BitVec>,
    pub t: AggregatedVector,
}

#[derive(Debug, Clone)]
pub struct Phase3Outcome {
    pub registers: Vec<BitVec>,
    pub outputs: Vec<BrokerOutput>,
}

/// Warnings for secrets that are zero or shared between brokers.
pub fn r6_warnings(secrets: &[BitVec]) -> Vec<String> {
    let mut out = Vec::new();
    for (i, s) in secrets.iter().enumerate() {
        if s.is_zero() {
            out.push(format!("R6 violated: secret of broker {i} is zero"));
        }
        for (j, other) in secrets.iter().enumerate().skip(i + 1) {
            if s == other {
                out.push(format!("R6 violated: brokers {i} and {j} share secret {}", s.to_hex()));
            }
        }
    }
    out
}

struct Broker {
    index: usize,
    secret: BitVec,
}

impl Broker {
    fn encode(&self, dims: Dimensions) -> Result<ExtendedSecret> {
        layout::build_extended(self.index, &self.secret, dims)
    }

    /// Segment `j` of the Phase 3 register goes to broker `j`; segment
    /// `index` stays private.
    fn phase3_outgoing(&self, register: &BitVec, dims: Dimensions) -> Result<Vec<Outgoing>> {
        (0..dims.n())
            .filter(|&j| j != self.index)
            .map(|j| {
                Ok(Outgoing {
                    to: ActorId::Broker(j),
                    payload: layout::segment(register, dims, j)?,
                    segment: Some(j),
                })
            })
            .collect()
    }

    fn decode(&self, register: &BitVec, inbox: &[&Message], dims: Dimensions, ambiguous: bool) -> Result<BrokerOutput> {
        let me = ActorId::Broker(self.index);
        let mut segment = layout::segment(register, dims, self.index)?;
        let senders = std::iter::once(ActorId::Trent).chain((0..dims.n()).filter(|&j| j != self.index).map(ActorId::Broker));
        for from in senders {
            let msg = inbox
                .iter()
                .find(|m| m.from == from && m.segment == Some(self.index))
                .ok_or_else(|| Error::MissingMessage {
                    from: from.to_string(),
                    to: me.to_string(),
                    phase: 3,
                })?;
            segment.xor_assign(&msg.payload)?;
        }
        let decoded_blocks: Vec<BitVec> = layout::blocks(&segment, dims)?
            .into_iter()
            .map(|b| b.xor(&self.secret))
            .collect::<Result<_>>()?;
        let mut recovered = decoded_blocks.clone();
        if let Some(pos) = recovered.iter().position(|b| *b == self.secret) {
            recovered.remove(pos);
        }
        Ok(BrokerOutput {
            broker: self.index,
            segment,
            decoded_blocks,
            recovered,
            ambiguous,
        })
    }
}

struct Trent {
    rng: StreamRng,
    permutations: Option<Vec<Permutation>>,
}

impl Trent {
    fn aggregate(&self, own: &BitVec, inbox: &[&Message], dims: Dimensions) -> Result<AggregatedVector> {
        let mut t = own.clone();
        for i in 0..dims.n() {
            let msg = inbox
                .iter()
                .find(|m| m.from == ActorId::Broker(i))
                .ok_or_else(|| Error::MissingMessage {
                    from: ActorId::Broker(i).to_string(),
                    to: ActorId::Trent.to_string(),
                    phase: 1,
                })?;
            t.xor_assign(&msg.payload)?;
        }
        AggregatedVector::from_bits(t, dims, false)
    }

    fn shuffle(&mut self, t: &AggregatedVector) -> Result<AggregatedVector> {
        let perms = (0..t.dims().n())
            .map(|_| shuffle::random_permutation(t.dims().n(), &mut self.rng))
            .collect::<Result<Vec<_>>>()?;
        let shuffled = shuffle::shuffle_aggregated(t, &perms)?;
        self.permutations = Some(perms);
        Ok(shuffled)
    }

    fn phase3_outgoing(&self, register: &BitVec, dims: Dimensions) -> Result<Vec<Outgoing>> {
        (0..dims.n())
            .map(|i| {
                Ok(Outgoing {
                    to: ActorId::Broker(i),
                    payload: layout::segment(register, dims, i)?,
                    segment: Some(i),
                })
            })
            .collect()
    }
}

/// One protocol run, driven phase by phase.
pub struct Session {
    config: ProtocolConfig,
    dims: Dimensions,
    secrets: Vec<BitVec>,
    brokers: Vec<Broker>,
    trent: Trent,
    network: Network,
    events: Vec<TraceEvent>,
    delivered: Vec<Message>,
    warnings: Vec<String>,
    checks: Vec<(String, bool)>,
    tier: Option<String>,
    phase1: Option<Phase1Outcome>,
    shuffled: Option<AggregatedVector>,
    phase3: Option<Phase3Outcome>,
}

impl Session {
    pub fn new(config: ProtocolConfig) -> Result<Self> {
        let secrets = config.resolve_secrets()?;
        let dims = config.dims;
        let warnings = r6_warnings(&secrets);
        let mut events = vec![{
            let mut e = TraceEvent::new("config", HARNESS, 0);
            e.config = Some(config.to_doc()?);
            e
        }];
        for w in &warnings {
            events.push(TraceEvent::new("warning", HARNESS, 0).detail(w.clone()));
        }
        let brokers = secrets
            .iter()
            .enumerate()
            .map(|(index, s)| Broker {
                index,
                secret: s.clone(),
            })
            .collect();
        Ok(Self {
            trent: Trent {
                rng: derive_rng(config.seed, "trent/permutations"),
                permutations: None,
            },
            network: Network::new(config.dropped_edges.clone()),
            dims,
            secrets,
            brokers,
            config,
            events,
            delivered: Vec::new(),
            warnings,
            checks: Vec::new(),
            tier: None,
            phase1: None,
            shuffled: None,
            phase3: None,
        })
    }

    pub fn dims(&self) -> Dimensions {
        self.dims
    }

    pub fn secrets(&self) -> &[BitVec] {
        &self.secrets
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// A fresh resource of `p` positions, each a GHZ_{n+1} tuple.
    fn dealer_distribute(&mut self, phase: u8) -> Result<GhzResource> {
        let (p, r) = (self.dims.p(), self.dims.n() + 1);
        let resource = GhzResource::new(p, r, self.config.tier, self.config.structured_cap)?;
        self.tier = Some(resource.tier_name().to_string());
        self.events.push(
            TraceEvent::new("distribute", self.config.dealer.actor(), phase)
                .detail(format!("p={p} r={r} tier={}", resource.tier_name())),
        );
        Ok(resource)
    }

    /// All parties measure their registers in an order drawn from the
    /// schedule stream. Register `n` is Trent's.
    fn measure(&mut self, resource: &GhzResource, phase: u8, schedule: &mut StreamRng) -> Result<Vec<BitVec>> {
        let r = resource.r();
        let order = shuffle::random_permutation(r, schedule)?;
        let mut quantum = derive_rng(self.config.seed, &format!("phase{phase}/quantum"));
        let registers = resource
            .measurement_distribution()?
            .sample_in_order(&mut quantum, order.as_slice())?;
        for &k in order.as_slice() {
            self.events
                .push(TraceEvent::new("measure", register_owner(k, self.dims), phase).payload(&registers[k]));
        }
        Ok(registers)
    }

    fn send(&mut self, from: ActorId, phase: Phase, outgoing: Vec<Outgoing>) {
        for m in self.network.submit(from, phase, outgoing) {
            self.events.push(message_event("send", &m));
        }
    }

    fn deliver(&mut self, schedule: &mut StreamRng) -> Vec<Message> {
        let batch = self.network.deliver_all(schedule);
        for m in &batch {
            self.events.push(message_event("deliver", m));
        }
        self.delivered.extend(batch.iter().cloned());
        batch
    }

    fn check(&mut self, name: &str, ok: bool) {
        self.checks.push((name.to_string(), ok));
        if !ok {
            self.events
                .push(TraceEvent::new("check-failed", HARNESS, 0).detail(name.to_string()));
        }
    }

    /// Brokers encode their secrets, everyone measures, brokers report to
    /// Trent, Trent XORs the reports into `t`.
    pub fn phase1(&mut self) -> Result<Phase1Outcome> {
        let dims = self.dims;
        let mut schedule = derive_rng(self.config.seed, "phase1/schedule");
        let mut resource = self.dealer_distribute(1)?;
        for b in &self.brokers {
            let e = b.encode(dims)?;
            resource.apply_phase_oracle(e.bits())?;
            let mut event = TraceEvent::new("oracle", ActorId::Broker(b.index), 1);
            event.extended = Some((&e).into());
            self.events.push(event);
        }
        let registers = self.measure(&resource, 1, &mut schedule)?;
        for (i, y) in registers.iter().take(dims.n()).enumerate() {
            self.send(
                ActorId::Broker(i),
                Phase::One,
                vec![Outgoing {
                    to: ActorId::Trent,
                    payload: y.clone(),
                    segment: None,
                }],
            );
        }
        let batch = self.deliver(&mut schedule);
        let inbox: Vec<&Message> = batch.iter().filter(|m| m.to == ActorId::Trent).collect();
        let t = self.trent.aggregate(&registers[dims.n()], &inbox, dims)?;
        self.events
            .push(TraceEvent::new("aggregate", ActorId::Trent, 1).payload(t.bits()));

        let xor_all = xor_registers(&registers)?;
        let expected = layout::expected_blocks(&self.secrets, dims)?;
        self.check("phase1.xor_constraint", xor_all == *t.bits());
        self.check("phase1.block_form", t.bits() == expected.bits());

        let outcome = Phase1Outcome { registers, t };
        self.phase1 = Some(outcome.clone());
        Ok(outcome)
    }

    /// Trent shuffles the blocks of every segment with fresh private
    /// permutations.
    pub fn phase2(&mut self) -> Result<AggregatedVector> {
        let t = self
            .phase1
            .as_ref()
            .map(|o| o.t.clone())
            .ok_or_else(|| Error::Config("phase 2 requires phase 1".into()))?;
        let shuffled = self.trent.shuffle(&t)?;
        let mut e = TraceEvent::new("shuffle", ActorId::Trent, 2).payload(shuffled.bits());
        if self.config.debug_permutations {
            e.permutations = self
                .trent
                .permutations
                .as_ref()
                .map(|ps| ps.iter().map(|p| p.as_slice().to_vec()).collect());
        }
        self.events.push(e);
        let ok = shuffle::is_block_permutation(&t, &shuffled)?;
        self.check("phase2.block_permutation", ok);
        self.shuffled = Some(shuffled.clone());
        Ok(shuffled)
    }

    /// Trent encodes the shuffled vector on a fresh resource; segments flow
    /// to their brokers; each broker decodes its segment.
    pub fn phase3(&mut self) -> Result<Phase3Outcome> {
        let dims = self.dims;
        let shuffled = self
            .shuffled
            .clone()
            .ok_or_else(|| Error::Config("phase 3 requires phase 2".into()))?;
        let mut schedule = derive_rng(self.config.seed, "phase3/schedule");
        let mut resource = self.dealer_distribute(3)?;
        resource.apply_phase_oracle(shuffled.bits())?;
        self.events.push(TraceEvent::new("oracle", ActorId::Trent, 3));
        let registers = self.measure(&resource, 3, &mut schedule)?;

        for (i, y) in registers.iter().take(dims.n()).enumerate() {
            let out = self.brokers[i].phase3_outgoing(y, dims)?;
            self.send(ActorId::Broker(i), Phase::Three, out);
        }
        let out = self.trent.phase3_outgoing(&registers[dims.n()], dims)?;
        self.send(ActorId::Trent, Phase::Three, out);
        let batch = self.deliver(&mut schedule);

        let ambiguous = !self.warnings.is_empty();
        let mut outputs = Vec::with_capacity(dims.n());
        for b in &self.brokers {
            let inbox: Vec<&Message> = batch.iter().filter(|m| m.to == ActorId::Broker(b.index)).collect();
            outputs.push(b.decode(&registers[b.index], &inbox, dims, ambiguous)?);
        }
        for o in &outputs {
            let mut e = TraceEvent::new("decode", ActorId::Broker(o.broker), 3).payload(&o.segment);
            e.values_hex = Some(o.recovered.iter().map(BitVec::to_hex).collect());
            if o.ambiguous {
                e.detail = Some("own secret is not unique; removed copy may belong to another broker".into());
            }
            self.events.push(e);
        }

        let segments_ok = outputs
            .iter()
            .all(|o| shuffled.segment(o.broker).map(|s| s == o.segment).unwrap_or(false));
        let private_ok = batch.iter().all(|m| match m.from {
            ActorId::Broker(i) => m.segment != Some(i),
            _ => true,
        });
        let recovered_ok = outputs
            .iter()
            .all(|o| same_multiset(&o.recovered, &foreign_secrets(&self.secrets, o.broker)));
        self.check("phase3.segment_xor", segments_ok);
        self.check("phase3.private_segments", private_ok);
        self.check("phase3.recovered", recovered_ok);

        let outcome = Phase3Outcome { registers, outputs };
        self.phase3 = Some(outcome.clone());
        Ok(outcome)
    }

    pub fn finish(self) -> Result<ProtocolTrace> {
        let missing = || Error::Config("run is incomplete".into());
        let phase1 = self.phase1.ok_or_else(missing)?;
        let shuffled = self.shuffled.ok_or_else(missing)?;
        let phase3 = self.phase3.ok_or_else(missing)?;
        Ok(ProtocolTrace {
            config: self.config.to_doc()?,
            secrets: self.secrets,
            tier: self.tier.unwrap_or_default(),
            phase1_registers: phase1.registers,
            aggregated: phase1.t,
            shuffled,
            permutations: if self.config.debug_permutations {
                self.trent.permutations
            } else {
                None
            },
            phase3_registers: phase3.registers,
            messages: self.delivered,
            outputs: phase3.outputs,
            warnings: self.warnings,
            checks: self.checks,
            events: self.events,
        })
    }
}

/// Runs phases 1, 2 and 3 in sequence, each ending in a delivery barrier.
pub fn run_full(config: ProtocolConfig) -> Result<ProtocolTrace> {
    let mut session = Session::new(config)?;
    session.phase1()?;
    session.phase2()?;
    session.phase3()?;
    session.finish()
}

fn register_owner(k: usize, dims: Dimensions) -> ActorId {
    if k == dims.n() {
        ActorId::Trent
    } else {
        ActorId::Broker(k)
    }
}

fn message_event(kind: &str, m: &Message) -> TraceEvent {
    let actor = if kind == "send" { m.from } else { m.to };
    let mut e = TraceEvent::new(kind, actor, m.phase.number()).payload(&m.payload);
    e.nonce = Some(m.nonce);
    e.from = Some(m.from.to_string());
    e.to = Some(m.to.to_string());
    e.segment = m.segment;
    e
}

fn xor_registers(registers: &[BitVec]) -> Result<BitVec> {
    let mut acc = BitVec::zero(registers[0].len())?;
    for y in registers {
        acc.xor_assign(y)?;
    }
    Ok(acc)
}

fn foreign_secrets(secrets: &[BitVec], i: usize) -> Vec<BitVec> {
    secrets
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, s)| s.clone())
        .collect()
}

fn same_multiset(a: &[BitVec], b: &[BitVec]) -> bool {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort();
    b.sort();
    a == b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{DealerRole, Edge, Secrets};
    use crate::qsim::Tier;

    fn bits(list: &[&str]) -> Vec<BitVec> {
        list.iter().map(|s| BitVec::parse(s, s.len()).unwrap()).collect()
    }

    fn worked_example(seed: u64) -> ProtocolConfig {
        // Charlie = broker 0, Bob = broker 1, Alice = broker 2
        ProtocolConfig::with_secrets(Dimensions::new(3, 1).unwrap(), bits(&["1", "0", "1"]), seed)
    }

    #[test]
    fn worked_example_end_to_end() {
        let trace = run_full(worked_example(7)).unwrap();
        assert_eq!(trace.aggregated.format(), "010 101 010");
        assert!(trace.all_checks_pass(), "{:?}", trace.checks);
        let sorted = |v: &[BitVec]| {
            let mut v = v.to_vec();
            v.sort();
            v.iter().map(|b| b.to_string()).collect::<Vec<_>>()
        };
        assert_eq!(sorted(&trace.outputs[2].recovered), ["0", "1"]);
        assert_eq!(sorted(&trace.outputs[1].recovered), ["1", "1"]);
        assert_eq!(sorted(&trace.outputs[0].recovered), ["0", "1"]);
        assert_eq!(trace.tier, "amplitudes");
        // the secrets 1, 0, 1 are not unique
        assert!(!trace.warnings.is_empty());
    }

    #[test]
    fn equal_secrets_decode_to_own_secret() {
        let config = ProtocolConfig::with_secrets(Dimensions::new(2, 2).unwrap(), bits(&["10", "10"]), 3);
        let trace = run_full(config).unwrap();
        assert!(trace.aggregated.bits().is_zero());
        for o in &trace.outputs {
            assert!(o.decoded_blocks.iter().all(|b| b.to_string() == "10"));
            assert!(o.ambiguous);
        }
    }

    #[test]
    fn r6_detection() {
        assert!(r6_warnings(&bits(&["01", "10", "11"])).is_empty());
        assert_eq!(r6_warnings(&bits(&["0", "0"])).len(), 3);
        assert_eq!(r6_warnings(&bits(&["01", "01", "11"])).len(), 1);
    }

    #[test]
    fn permutations_hidden_unless_debug() {
        let trace = run_full(worked_example(1)).unwrap();
        assert!(trace.permutations.is_none());
        assert!(trace.events.iter().all(|e| e.permutations.is_none()));

        let mut config = worked_example(1);
        config.debug_permutations = true;
        let trace = run_full(config).unwrap();
        let perms = trace.permutations.as_ref().unwrap();
        let restored = shuffle::unshuffle_aggregated(&trace.shuffled, perms).unwrap();
        assert_eq!(restored.bits(), trace.aggregated.bits());
    }

    #[test]
    fn missing_phase3_segment_aborts() {
        let mut config = worked_example(2);
        config.dropped_edges.push(Edge {
            from: ActorId::Broker(1),
            to: ActorId::Broker(2),
            phase: Phase::Three,
        });
        let err = run_full(config).unwrap_err();
        assert_eq!(
            err,
            Error::MissingMessage {
                from: "broker-1".into(),
                to: "broker-2".into(),
                phase: 3
            }
        );
    }

    #[test]
    fn missing_phase1_report_aborts() {
        let mut config = worked_example(2);
        config.dropped_edges.push(Edge {
            from: ActorId::Broker(0),
            to: ActorId::Trent,
            phase: Phase::One,
        });
        assert!(matches!(run_full(config), Err(Error::MissingMessage { phase: 1, .. })));
    }

    #[test]
    fn phases_must_run_in_order() {
        let mut s = Session::new(worked_example(1)).unwrap();
        assert!(s.phase2().is_err());
        assert!(s.phase3().is_err());
        s.phase1().unwrap();
        assert!(s.phase3().is_err());
    }

    #[test]
    fn dealer_role_is_recorded() {
        let mut config = worked_example(1);
        config.dealer = DealerRole::Broker(1);
        let trace = run_full(config).unwrap();
        let dist: Vec<_> = trace.events.iter().filter(|e| e.event == "distribute").collect();
        assert_eq!(dist.len(), 2);
        assert!(dist.iter().all(|e| e.actor == "broker-1"));
    }

    #[test]
    fn wide_registers_use_character_tier() {
        let config = ProtocolConfig::new(Dimensions::new(4, 2).unwrap(), Secrets::Seeded(8), 8);
        let trace = run_full(config).unwrap();
        assert_eq!(trace.tier, "character");
        assert!(trace.all_checks_pass());
    }

    #[test]
    fn forced_amplitude_tier_respects_cap() {
        let mut config = ProtocolConfig::new(Dimensions::new(4, 2).unwrap(), Secrets::Seeded(8), 8);
        config.tier = Tier::Amplitudes;
        assert!(matches!(run_full(config), Err(Error::CapExceeded { .. })));
    }
}
