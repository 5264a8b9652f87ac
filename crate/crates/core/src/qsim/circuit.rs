//! Gate lists for the dense tier: GHZ preparation and the two protocol
//! circuits.
//!
//! Qubit layout for a protocol circuit with `r = n + 1` registers of `p`
//! qubits: register `k` occupies qubits `[k*p, (k+1)*p)`, registers
//! `0..n` belong to the brokers and register `n` to Trent. Oracle target
//! qubits follow the registers, one per oracle-applying party.

use std::collections::BTreeMap;
use std::ops::Range;

use rand::distributions::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dense::{extract_register, DenseState, DEFAULT_DENSE_CAP};
use crate::error::{Error, Result};
use crate::gf2vec::BitVec;
use crate::layout::{AggregatedVector, Dimensions, ExtendedSecret};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Gate {
    H(usize),
    X(usize),
    Cnot { control: usize, target: usize },
    XorOracle { mask: BitVec, inputs: Range<usize>, target: usize },
    /// Marks a qubit for computational-basis measurement; no effect on the state.
    Measure(usize),
}

impl Gate {
    fn max_qubit(&self) -> usize {
        match self {
            Gate::H(q) | Gate::X(q) | Gate::Measure(q) => *q,
            Gate::Cnot { control, target } => *control.max(target),
            Gate::XorOracle { inputs, target, .. } => inputs.end.saturating_sub(1).max(*target),
        }
    }
}

/// Serialized form of one gate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateRecord {
    pub gate: String,
    pub qubits: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mask_hex: Option<String>,
}

impl From<&Gate> for GateRecord {
    fn from(g: &Gate) -> Self {
        let (gate, qubits, mask_hex) = match g {
            Gate::H(q) => ("H", vec![*q], None),
            Gate::X(q) => ("X", vec![*q], None),
            Gate::Cnot { control, target } => ("CNOT", vec![*control, *target], None),
            Gate::XorOracle { mask, inputs, target } => {
                let mut qs: Vec<usize> = inputs.clone().collect();
                qs.push(*target);
                ("XOR-ORACLE", qs, Some(mask.to_hex()))
            }
            Gate::Measure(q) => ("MEASURE", vec![*q], None),
        };
        GateRecord {
            gate: gate.to_string(),
            qubits,
            mask_hex,
        }
    }
}

impl TryFrom<&GateRecord> for Gate {
    type Error = Error;

    fn try_from(rec: &GateRecord) -> Result<Self> {
        let arity = |k: usize| -> Result<()> {
            if rec.qubits.len() != k {
                return Err(Error::Parse(format!("{} takes {k} qubits, got {:?}", rec.gate, rec.qubits)));
            }
            Ok(())
        };
        match rec.gate.as_str() {
            "H" => arity(1).map(|_| Gate::H(rec.qubits[0])),
            "X" => arity(1).map(|_| Gate::X(rec.qubits[0])),
            "MEASURE" => arity(1).map(|_| Gate::Measure(rec.qubits[0])),
            "CNOT" => arity(2).map(|_| Gate::Cnot {
                control: rec.qubits[0],
                target: rec.qubits[1],
            }),
            "XOR-ORACLE" => {
                let (target, inputs) = rec
                    .qubits
                    .split_last()
                    .filter(|(_, ins)| !ins.is_empty())
                    .ok_or_else(|| Error::Parse("XOR-ORACLE needs inputs and a target".into()))?;
                let start = inputs[0];
                if inputs.iter().enumerate().any(|(k, &q)| q != start + k) {
                    return Err(Error::Parse(format!("oracle inputs {inputs:?} are not contiguous")));
                }
                let hex = rec
                    .mask_hex
                    .as_deref()
                    .ok_or_else(|| Error::Parse("XOR-ORACLE without mask_hex".into()))?;
                Ok(Gate::XorOracle {
                    mask: BitVec::from_hex(hex, inputs.len())?,
                    inputs: start..start + inputs.len(),
                    target: *target,
                })
            }
            other => Err(Error::Parse(format!("unknown gate {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateList {
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl GateList {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            gates: Vec::new(),
        }
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        let q = gate.max_qubit();
        if q >= self.num_qubits {
            return Err(Error::IndexOutOfRange {
                index: q,
                bound: self.num_qubits,
            });
        }
        if let Gate::XorOracle { mask, inputs, .. } = &gate {
            if mask.len() != inputs.len() {
                return Err(Error::DimensionMismatch {
                    expected: inputs.len(),
                    actual: mask.len(),
                });
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Depth of the CNOT gates under as-soon-as-possible scheduling.
    pub fn cnot_depth(&self) -> usize {
        let mut ready = vec![0usize; self.num_qubits];
        let mut depth = 0;
        for g in &self.gates {
            if let Gate::Cnot { control, target } = *g {
                let layer = ready[control].max(ready[target]) + 1;
                ready[control] = layer;
                ready[target] = layer;
                depth = depth.max(layer);
            }
        }
        depth
    }

    pub fn to_json(&self) -> String {
        let records: Vec<GateRecord> = self.gates.iter().map(GateRecord::from).collect();
        serde_json::to_string(&records).expect("gate records serialize")
    }

    pub fn from_json(json: &str, num_qubits: usize) -> Result<Self> {
        let records: Vec<GateRecord> = serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
        let mut list = GateList::new(num_qubits);
        for rec in &records {
            list.push(Gate::try_from(rec)?)?;
        }
        Ok(list)
    }

    /// Runs every unitary gate on `|0...0>`; measurement markers are skipped.
    pub fn run_dense(&self, cap: usize) -> Result<DenseState> {
        let mut state = DenseState::with_cap(self.num_qubits, cap)?;
        for g in &self.gates {
            match g {
                Gate::H(q) => state.apply_h(*q)?,
                Gate::X(q) => state.apply_x(*q)?,
                Gate::Cnot { control, target } => state.apply_cnot(*control, *target)?,
                Gate::XorOracle { mask, inputs, target } => {
                    state.apply_xor_oracle(mask, inputs.clone(), *target)?
                }
                Gate::Measure(_) => {}
            }
        }
        Ok(state)
    }
}

/// H on the first qubit, then a CNOT fan-out that doubles the entangled set
/// each layer, giving `ceil(log2 r)` CNOT layers.
pub fn ghz_prep_on(qubits: &[usize]) -> Vec<Gate> {
    let mut gates = Vec::with_capacity(qubits.len());
    if qubits.is_empty() {
        return gates;
    }
    gates.push(Gate::H(qubits[0]));
    let mut have = 1;
    while have < qubits.len() {
        for i in 0..have {
            if let Some(&target) = qubits.get(have + i) {
                gates.push(Gate::Cnot {
                    control: qubits[i],
                    target,
                });
            }
        }
        have *= 2;
    }
    gates
}

/// GHZ preparation on qubits `0..r`.
pub fn ghz_prep_gates(r: usize) -> Result<GateList> {
    if r < 2 {
        return Err(Error::InvalidLength(format!("GHZ state needs at least 2 qubits, got {r}")));
    }
    let qubits: Vec<usize> = (0..r).collect();
    let mut list = GateList::new(r);
    for g in ghz_prep_on(&qubits) {
        list.push(g)?;
    }
    Ok(list)
}

/// A protocol circuit together with its qubit layout.
#[derive(Debug, Clone)]
pub struct PhaseCircuit {
    p: usize,
    registers: usize,
    gates: GateList,
}

impl PhaseCircuit {
    pub fn gates(&self) -> &GateList {
        &self.gates
    }

    pub fn registers(&self) -> usize {
        self.registers
    }

    pub fn register_range(&self, k: usize) -> Range<usize> {
        k * self.p..(k + 1) * self.p
    }

    pub fn run_dense(&self, cap: usize) -> Result<DenseState> {
        self.gates.run_dense(cap)
    }

    /// Exact joint law of the measured registers, with target qubits traced
    /// out. Keys list register values in register order.
    pub fn register_distribution(&self, state: &DenseState) -> BTreeMap<Vec<u64>, f64> {
        let mut out = BTreeMap::new();
        for (idx, prob) in state.probabilities().into_iter().enumerate() {
            if prob == 0.0 {
                continue;
            }
            *out.entry(self.register_key(idx)).or_insert(0.0) += prob;
        }
        out
    }

    /// Draws `count` joint register outcomes from a dense run.
    pub fn sample_registers<R: Rng + ?Sized>(
        &self,
        state: &DenseState,
        count: usize,
        rng: &mut R,
    ) -> Result<Vec<Vec<BitVec>>> {
        let sampler = state.sampler()?;
        (0..count)
            .map(|_| {
                let idx = sampler.sample(rng);
                (0..self.registers)
                    .map(|k| extract_register(idx, self.register_range(k)))
                    .collect()
            })
            .collect()
    }

    fn register_key(&self, idx: usize) -> Vec<u64> {
        (0..self.registers)
            .map(|k| (idx >> (k * self.p)) as u64 & ((1u64 << self.p) - 1))
            .collect()
    }
}

fn build_protocol_circuit(p: usize, registers: usize, oracles: &[(usize, &BitVec)], cap: usize) -> Result<PhaseCircuit> {
    let num_qubits = registers * p + oracles.len();
    if num_qubits > cap {
        return Err(Error::CapExceeded {
            what: "protocol circuit",
            requested: num_qubits,
            cap,
        });
    }
    let mut list = GateList::new(num_qubits);
    // one GHZ_r tuple per qubit position
    for j in 0..p {
        let tuple: Vec<usize> = (0..registers).map(|k| k * p + j).collect();
        for g in ghz_prep_on(&tuple) {
            list.push(g)?;
        }
    }
    let target_base = registers * p;
    for t in 0..oracles.len() {
        list.push(Gate::X(target_base + t))?;
        list.push(Gate::H(target_base + t))?;
    }
    for (t, (register, mask)) in oracles.iter().enumerate() {
        list.push(Gate::XorOracle {
            mask: (*mask).clone(),
            inputs: register * p..(register + 1) * p,
            target: target_base + t,
        })?;
    }
    for q in 0..registers * p {
        list.push(Gate::H(q))?;
    }
    for q in 0..registers * p {
        list.push(Gate::Measure(q))?;
    }
    Ok(PhaseCircuit {
        p,
        registers,
        gates: list,
    })
}

/// Broker-to-Trent circuit: every broker applies the oracle of its extended
/// secret to its own register.
pub fn build_phase1_circuit(dims: Dimensions, extendeds: &[ExtendedSecret]) -> Result<PhaseCircuit> {
    build_phase1_circuit_with_cap(dims, extendeds, DEFAULT_DENSE_CAP)
}

pub fn build_phase1_circuit_with_cap(dims: Dimensions, extendeds: &[ExtendedSecret], cap: usize) -> Result<PhaseCircuit> {
    if extendeds.len() != dims.n() {
        return Err(Error::InvalidOwners(format!(
            "expected {} extended secrets, got {}",
            dims.n(),
            extendeds.len()
        )));
    }
    let mut oracles = Vec::with_capacity(dims.n());
    for e in extendeds {
        if e.dims() != dims {
            return Err(Error::InvalidDimensions(format!("{:?} vs {:?}", e.dims(), dims)));
        }
        oracles.push((e.owner(), e.bits()));
    }
    build_protocol_circuit(dims.p(), dims.n() + 1, &oracles, cap)
}

/// Trent-to-broker circuit: Trent alone applies the oracle of the shuffled
/// aggregated vector to his register.
pub fn build_phase3_circuit(dims: Dimensions, shuffled: &AggregatedVector) -> Result<PhaseCircuit> {
    build_phase3_circuit_with_cap(dims, shuffled, DEFAULT_DENSE_CAP)
}

pub fn build_phase3_circuit_with_cap(dims: Dimensions, shuffled: &AggregatedVector, cap: usize) -> Result<PhaseCircuit> {
    if shuffled.dims() != dims {
        return Err(Error::InvalidDimensions(format!("{:?} vs {:?}", shuffled.dims(), dims)));
    }
    build_protocol_circuit(dims.p(), dims.n() + 1, &[(dims.n(), shuffled.bits())], cap)
}
