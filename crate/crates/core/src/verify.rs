//! Self-check suites behind `qdibp verify`.
//!
//! Each check exercises one module invariant against an independent
//! reference (enumeration, direct summation, the dense simulator, or the
//! block-form construction). `Fast` uses randomized budgets; `Full` adds the
//! exhaustive small-instance sweeps and the dense-vs-structured comparison.

use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::gf2vec::BitVec;
use crate::layout::{self, Dimensions};
use crate::protocol::{run_full, ProtocolConfig};
use crate::qsim::{self, DenseState, GhzDiagonalState};
use crate::shuffle;
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Fast,
    Full,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub millis: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

type Check = fn(Suite, &mut ChaCha8Rng) -> Result<(bool, String)>;

pub fn run_suite(suite: Suite, dense_cap: usize) -> VerifyReport {
    let mut checks: Vec<(&str, Check)> = vec![
        ("gf2vec.xor_group", check_xor_group),
        ("gf2vec.bilinearity", check_bilinearity),
        ("gf2vec.cip", check_cip),
        ("gf2vec.round_trip", check_round_trip),
        ("layout.worked_example", check_worked_example),
        ("layout.oracle_equivalence", check_oracle_equivalence),
        ("layout.offset_invariance", check_offset_invariance),
        ("shuffle.block_permutation", check_shuffle),
        ("qsim.wht_direct", check_wht),
        ("qsim.phase_form", check_phase_form),
        ("qsim.kickback", check_kickback),
        ("qsim.ghz_prep", check_ghz_prep),
        ("qsim.xor_constraint", check_xor_constraint),
        ("protocol.correctness", check_protocol),
        ("protocol.replay", check_replay),
    ];
    let mut results = Vec::new();
    for (i, (name, check)) in checks.drain(..).enumerate() {
        results.push(timed(name, || check(suite, &mut ChaCha8Rng::seed_from_u64(1000 + i as u64))));
    }
    if suite == Suite::Full {
        results.push(timed("qsim.tier_equivalence", || check_tier_equivalence(dense_cap)));
    }
    VerifyReport {
        suite,
        passed: results.iter().all(|r| r.passed),
        checks: results,
    }
}

fn timed(name: &str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    CheckResult {
        name: name.to_string(),
        passed,
        detail,
        millis: start.elapsed().as_millis(),
    }
}

fn all_vectors(len: usize) -> Vec<BitVec> {
    (0..1u64 << len)
        .map(|x| BitVec::from_u64(x, len).expect("len >= 1"))
        .collect()
}

fn check_xor_group(_: Suite, _: &mut ChaCha8Rng) -> Result<(bool, String)> {
    for len in 1..=4 {
        let all = all_vectors(len);
        let zero = BitVec::zero(len)?;
        for a in &all {
            if a.xor(&zero)? != *a || !a.xor(a)?.is_zero() {
                return Ok((false, format!("identity/inverse fails at {a}")));
            }
            for b in &all {
                if a.xor(b)? != b.xor(a)? {
                    return Ok((false, format!("commutativity fails at {a}, {b}")));
                }
                for c in &all {
                    if a.xor(b)?.xor(c)? != a.xor(&b.xor(c)?)? {
                        return Ok((false, format!("associativity fails at {a}, {b}, {c}")));
                    }
                }
            }
        }
    }
    Ok((true, "exhaustive for len <= 4".into()))
}

fn check_bilinearity(_: Suite, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    for _ in 0..1000 {
        let len = rng.gen_range(1..=130);
        let a = BitVec::random(len, rng)?;
        let b = BitVec::random(len, rng)?;
        let c = BitVec::random(len, rng)?;
        if a.xor(&b)?.dot(&c)? != (a.dot(&c)? ^ b.dot(&c)?) {
            return Ok((false, format!("fails at {a}, {b}, {c}")));
        }
    }
    Ok((true, "1000 random triples".into()))
}

fn check_cip(suite: Suite, _: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let max_p = if suite == Suite::Full { 12 } else { 10 };
    for p in 1..=max_p {
        let xs = all_vectors(p);
        for c in &xs {
            let zeros = xs.iter().filter(|x| !c.dot(x).unwrap_or(true)).count();
            let want = if c.is_zero() { 1 << p } else { 1 << (p - 1) };
            if zeros != want {
                return Ok((false, format!("p = {p}, c = {c}: {zeros} zeros")));
            }
        }
    }
    Ok((true, format!("exhaustive for p <= {max_p}")))
}

fn check_round_trip(_: Suite, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    for _ in 0..1000 {
        let len = rng.gen_range(1..=100);
        let v = BitVec::random(len, rng)?;
        let group = rng.gen_range(1..=8);
        if BitVec::parse(&v.format(Some(group)), len)? != v || BitVec::from_hex(&v.to_hex(), len)? != v {
            return Ok((false, format!("round trip fails for {v}")));
        }
    }
    Ok((true, "1000 random vectors, text and hex".into()))
}

fn check_worked_example(_: Suite, _: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let dims = Dimensions::new(3, 1)?;
    let s = |x: &str| BitVec::parse(x, 1);
    let ext: Vec<_> = [(0, s("1")?), (1, s("0")?), (2, s("1")?)]
        .iter()
        .map(|(i, v)| layout::build_extended(*i, v, dims))
        .collect::<Result<_>>()?;
    let got: Vec<String> = ext.iter().map(|e| e.bits().format(Some(3))).collect();
    let t = layout::aggregate(&ext, dims)?.format();
    let ok = got == ["001 001 110", "000 000 000", "011 100 100"] && t == "010 101 010";
    Ok((ok, format!("extended = {got:?}, t = {t}")))
}

fn secret_assignments(dims: Dimensions) -> impl Iterator<Item = Vec<BitVec>> {
    let (n, m) = (dims.n(), dims.m());
    (0..1u64 << (n * m)).map(move |code| {
        (0..n)
            .map(|i| BitVec::from_u64(code >> (i * m), m).expect("m >= 1"))
            .collect()
    })
}

fn check_oracle_equivalence(suite: Suite, _: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let max_n = if suite == Suite::Full { 4 } else { 3 };
    let mut count = 0;
    for n in 2..=max_n {
        for m in 1..=2 {
            let dims = Dimensions::new(n, m)?;
            for secrets in secret_assignments(dims) {
                let ext: Vec<_> = secrets
                    .iter()
                    .enumerate()
                    .map(|(i, s)| layout::build_extended(i, s, dims))
                    .collect::<Result<_>>()?;
                let t = layout::aggregate(&ext, dims)?;
                if t.bits() != layout::expected_blocks(&secrets, dims)?.bits() {
                    return Ok((false, format!("n = {n}, m = {m}, secrets = {secrets:?}")));
                }
                count += 1;
            }
        }
    }
    Ok((true, format!("{count} assignments, n <= {max_n}, m <= 2")))
}

fn check_offset_invariance(_: Suite, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    for _ in 0..200 {
        let dims = Dimensions::new(rng.gen_range(2..=5), rng.gen_range(1..=3))?;
        let secrets: Vec<BitVec> = (0..dims.n())
            .map(|_| BitVec::random(dims.m(), rng))
            .collect::<Result<_>>()?;
        let c = BitVec::random(dims.m(), rng)?;
        let shifted: Vec<BitVec> = secrets.iter().map(|s| s.xor(&c)).collect::<Result<_>>()?;
        let agg = |ss: &[BitVec]| -> Result<BitVec> {
            let ext: Vec<_> = ss
                .iter()
                .enumerate()
                .map(|(i, s)| layout::build_extended(i, s, dims))
                .collect::<Result<_>>()?;
            Ok(layout::aggregate(&ext, dims)?.into_bits())
        };
        if agg(&secrets)? != agg(&shifted)? {
            return Ok((false, format!("offset {c} changes t for {secrets:?}")));
        }
    }
    Ok((true, "200 random configurations".into()))
}

fn check_shuffle(_: Suite, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    for _ in 0..500 {
        let dims = Dimensions::new(rng.gen_range(2..=6), rng.gen_range(1..=3))?;
        let t = layout::AggregatedVector::from_bits(BitVec::random(dims.p(), rng)?, dims, false)?;
        let perms: Vec<_> = (0..dims.n())
            .map(|_| shuffle::random_permutation(dims.n(), rng))
            .collect::<Result<_>>()?;
        let s = shuffle::shuffle_aggregated(&t, &perms)?;
        if !shuffle::is_block_permutation(&t, &s)? || shuffle::unshuffle_aggregated(&s, &perms)?.bits() != t.bits() {
            return Ok((false, format!("shuffle invariant fails for {}", t.format())));
        }
    }
    Ok((true, "500 random shuffles".into()))
}

fn direct_hadamard(a: &[Complex64]) -> Vec<Complex64> {
    let len = a.len();
    let scale = (len as f64).sqrt().recip();
    (0..len)
        .map(|z| {
            let sum: Complex64 = a
                .iter()
                .enumerate()
                .map(|(x, v)| if (x & z).count_ones() % 2 == 0 { *v } else { -*v })
                .sum();
            sum * scale
        })
        .collect()
}

fn check_wht(suite: Suite, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let max_p = if suite == Suite::Full { 8 } else { 6 };
    let mut worst: f64 = 0.0;
    for p in 1..=max_p {
        let a: Vec<Complex64> = (0..1 << p)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let mut fast = a.clone();
        qsim::wht(&mut fast)?;
        for (x, y) in fast.iter().zip(direct_hadamard(&a)) {
            worst = worst.max((x - y).norm());
        }
    }
    Ok((worst < 1e-10, format!("max error {worst:.2e} for p <= {max_p}")))
}

fn check_phase_form(_: Suite, _: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let dims = Dimensions::new(3, 1)?;
    let t = BitVec::parse("010 101 010", 9)?;
    let mut state = GhzDiagonalState::new(9, 4)?;
    for (i, s) in ["1", "0", "1"].iter().enumerate() {
        state.apply_phase_oracle(layout::build_extended(i, &BitVec::parse(s, 1)?, dims)?.bits())?;
    }
    let a0 = state.amps()[0];
    for x in 0..512u64 {
        let sign = if t.dot(&BitVec::from_u64(x, 9)?)? { -1.0 } else { 1.0 };
        if (state.amps()[x as usize] - a0 * sign).norm() > 1e-12 {
            return Ok((false, format!("phase mismatch at x = {x}")));
        }
    }
    Ok((true, "all 512 basis terms carry (-1)^(t.x)".into()))
}

fn check_kickback(_: Suite, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst: f64 = 1.0;
    for _ in 0..50 {
        let k = rng.gen_range(1..=9);
        let mask = BitVec::random(k, rng)?;
        // inputs in uniform superposition, target in |->
        let mut s = DenseState::new(k + 1)?;
        for q in 0..k {
            s.apply_h(q)?;
        }
        s.apply_x(k)?;
        s.apply_h(k)?;
        let mut expected = s.amps().to_vec();
        for (idx, a) in expected.iter_mut().enumerate() {
            let x = BitVec::from_u64((idx & ((1 << k) - 1)) as u64, k)?;
            if mask.dot(&x)? {
                *a = -*a;
            }
        }
        s.apply_xor_oracle(&mask, 0..k, k)?;
        worst = worst.min(s.fidelity(&DenseState::from_amps(expected)?)?);
    }
    Ok((worst >= 1.0 - 1e-10, format!("min fidelity {worst:.15}")))
}

fn check_ghz_prep(_: Suite, _: &mut ChaCha8Rng) -> Result<(bool, String)> {
    for r in [2usize, 3, 4, 5, 8] {
        let gates = qsim::ghz_prep_gates(r)?;
        let state = gates.run_dense(qsim::DEFAULT_DENSE_CAP)?;
        let mut ideal = vec![Complex64::new(0.0, 0.0); 1 << r];
        ideal[0] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        ideal[(1 << r) - 1] = ideal[0];
        let f = state.fidelity(&DenseState::from_amps(ideal)?)?;
        let depth = gates.cnot_depth();
        let want = (r as f64).log2().ceil() as usize;
        if f < 1.0 - 1e-12 || depth != want {
            return Ok((false, format!("r = {r}: fidelity {f}, depth {depth} (want {want})")));
        }
    }
    Ok((true, "r in {2,3,4,5,8}".into()))
}

fn check_xor_constraint(suite: Suite, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let samples = if suite == Suite::Full { 10_000 } else { 1000 };
    let dims = Dimensions::new(3, 1)?;
    let mut state = GhzDiagonalState::new(9, 4)?;
    for (i, s) in ["1", "0", "1"].iter().enumerate() {
        state.apply_phase_oracle(layout::build_extended(i, &BitVec::parse(s, 1)?, dims)?.bits())?;
    }
    let t = BitVec::parse("010 101 010", 9)?;
    let dist = state.measurement_distribution()?;
    for _ in 0..samples {
        let ys = dist.sample(rng)?;
        let mut acc = BitVec::zero(9)?;
        for y in &ys {
            acc.xor_assign(y)?;
        }
        if acc != t {
            return Ok((false, format!("sample {ys:?} violates the constraint")));
        }
    }
    Ok((true, format!("{samples} samples XOR to t")))
}

fn check_protocol(suite: Suite, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut runs = 0;
    let mut grid = vec![(2, 1), (3, 1)];
    if suite == Suite::Full {
        grid.extend([(2, 2), (3, 2)]);
    }
    for (n, m) in grid {
        let dims = Dimensions::new(n, m)?;
        for secrets in secret_assignments(dims) {
            let trace = run_full(ProtocolConfig::with_secrets(dims, secrets, rng.gen()))?;
            if !trace.all_checks_pass() {
                return Ok((false, format!("n = {n}, m = {m}: {:?}", trace.checks)));
            }
            runs += 1;
        }
    }
    let random = if suite == Suite::Full { 200 } else { 50 };
    for _ in 0..random {
        let dims = Dimensions::new(rng.gen_range(2..=4), rng.gen_range(1..=2))?;
        let secrets = (0..dims.n())
            .map(|_| BitVec::random(dims.m(), rng))
            .collect::<Result<Vec<_>>>()?;
        let trace = run_full(ProtocolConfig::with_secrets(dims, secrets, rng.gen()))?;
        if !trace.all_checks_pass() {
            return Ok((false, format!("{:?}: {:?}", dims, trace.checks)));
        }
        runs += 1;
    }
    Ok((true, format!("{runs} full runs")))
}

fn check_replay(_: Suite, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let dims = Dimensions::new(3, 2)?;
    let secrets: Vec<BitVec> = (0..3).map(|_| BitVec::random(2, rng)).collect::<Result<_>>()?;
    let seed = rng.gen();
    let a = run_full(ProtocolConfig::with_secrets(dims, secrets.clone(), seed))?.to_jsonl();
    let b = run_full(ProtocolConfig::with_secrets(dims, secrets, seed))?.to_jsonl();
    Ok((a == b, format!("{} trace bytes", a.len())))
}

/// Dense Phase 1 at n = 2, m = 1 against the structured law: exact support
/// and exact probabilities.
fn check_tier_equivalence(dense_cap: usize) -> Result<(bool, String)> {
    let dims = Dimensions::new(2, 1)?;
    let mut worst_tv: f64 = 0.0;
    for secrets in secret_assignments(dims) {
        let ext: Vec<_> = secrets
            .iter()
            .enumerate()
            .map(|(i, s)| layout::build_extended(i, s, dims))
            .collect::<Result<_>>()?;
        let circuit = qsim::build_phase1_circuit_with_cap(dims, &ext, dense_cap)?;
        let dense = circuit.register_distribution(&circuit.run_dense(dense_cap)?);

        let mut state = GhzDiagonalState::new(dims.p(), dims.n() + 1)?;
        for e in &ext {
            state.apply_phase_oracle(e.bits())?;
        }
        let law = state.measurement_distribution()?;
        let mut structured = BTreeMap::new();
        let p = dims.p();
        for code in 0..1u64 << (3 * p) {
            let ys: Vec<BitVec> = (0..3)
                .map(|k| BitVec::from_u64(code >> (k * p), p))
                .collect::<Result<_>>()?;
            let prob = law.tuple_probability(&ys)?;
            if prob > 1e-12 {
                structured.insert(ys.iter().map(BitVec::to_u64).collect::<Vec<_>>(), prob);
            }
        }
        let dense_support: Vec<_> = dense.iter().filter(|(_, &q)| q > 1e-12).map(|(k, _)| k.clone()).collect();
        let structured_support: Vec<_> = structured.keys().cloned().collect();
        if dense_support != structured_support {
            return Ok((false, format!("support differs for secrets {secrets:?}")));
        }
        let a: Vec<f64> = structured_support.iter().map(|k| dense[k]).collect();
        let b: Vec<f64> = structured_support.iter().map(|k| structured[k]).collect();
        worst_tv = worst_tv.max(stats::total_variation(&a, &b));
    }
    Ok((worst_tv < 1e-9, format!("identical supports, max exact TV {worst_tv:.2e}")))
}
