//! In-process classical channels.
//!
//! Actors hand their outgoing payloads to the network together with the
//! recipient; the network stamps the sender and a nonce, so a message's
//! origin cannot be chosen by the party that produced it.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{ActorId, Phase};
use crate::gf2vec::BitVec;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub from: ActorId,
    pub to: ActorId,
    pub phase: Phase,
    pub payload: BitVec,
    /// Segment index for Phase 3 segment messages.
    pub segment: Option<usize>,
    pub nonce: u64,
}

/// A payload an actor wants sent; the network adds sender and nonce.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outgoing {
    pub to: ActorId,
    pub payload: BitVec,
    pub segment: Option<usize>,
}

/// A directed channel within one phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub from: ActorId,
    pub to: ActorId,
    pub phase: Phase,
}

#[derive(Debug, Default)]
pub struct Network {
    next_nonce: u64,
    pending: Vec<Message>,
    dropped: Vec<Edge>,
}

impl Network {
    pub fn new(dropped: Vec<Edge>) -> Self {
        Self {
            next_nonce: 0,
            pending: Vec::new(),
            dropped,
        }
    }

    /// Queues `outgoing` as sent by `sender`; returns the stamped messages.
    pub fn submit(&mut self, sender: ActorId, phase: Phase, outgoing: Vec<Outgoing>) -> Vec<Message> {
        let mut stamped = Vec::with_capacity(outgoing.len());
        for out in outgoing {
            let msg = Message {
                from: sender,
                to: out.to,
                phase,
                payload: out.payload,
                segment: out.segment,
                nonce: self.next_nonce,
            };
            self.next_nonce += 1;
            stamped.push(msg.clone());
            self.pending.push(msg);
        }
        stamped
    }

    /// Delivers everything queued, in an order drawn from `rng`. Messages on
    /// dropped edges are discarded. This is the barrier that ends a phase.
    pub fn deliver_all<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Vec<Message> {
        let mut batch = std::mem::take(&mut self.pending);
        batch.shuffle(rng);
        batch.retain(|m| {
            !self.dropped.contains(&Edge {
                from: m.from,
                to: m.to,
                phase: m.phase,
            })
        });
        batch
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn to_trent(y: BitVec) -> Vec<Outgoing> {
        vec![Outgoing {
            to: ActorId::Trent,
            payload: y,
            segment: None,
        }]
    }

    #[test]
    fn sender_and_nonce_are_stamped() {
        let mut net = Network::new(Vec::new());
        let y = BitVec::zero(4).unwrap();
        let sent = net.submit(ActorId::Broker(1), Phase::One, to_trent(y.clone()));
        assert_eq!(sent[0].from, ActorId::Broker(1));
        let sent = net.submit(ActorId::Broker(0), Phase::One, to_trent(y));
        assert_eq!(sent[0].nonce, 1);
        let delivered = net.deliver_all(&mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(delivered.len(), 2);
        assert!(net.deliver_all(&mut ChaCha8Rng::seed_from_u64(0)).is_empty());
    }

    #[test]
    fn dropped_edges_lose_messages() {
        let edge = Edge {
            from: ActorId::Broker(0),
            to: ActorId::Trent,
            phase: Phase::One,
        };
        let mut net = Network::new(vec![edge]);
        let y = BitVec::zero(4).unwrap();
        net.submit(ActorId::Broker(0), Phase::One, to_trent(y.clone()));
        net.submit(ActorId::Broker(1), Phase::One, to_trent(y));
        let delivered = net.deliver_all(&mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(delivered.len(), 1);
        assert_eq!(delivered[0].from, ActorId::Broker(1));
    }
}
