//! Command-line front end. Exit codes: 0 success, 1 verification failure,
//! 2 usage or configuration error.

use std::collections::HashMap;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf2vec::BitVec;
use crate::layout::{self, AggregatedVector, Dimensions};
use crate::protocol::{derive_rng, run_full, ConfigDoc, ProtocolConfig, Session};
use crate::qsim::{GhzDiagonalState, GhzResource, OutcomeDistribution, Tier, DEFAULT_DENSE_CAP, DEFAULT_STRUCTURED_CAP};
use crate::shuffle::{self, Permutation};
use crate::stats;
use crate::verify::{self, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "qdibp", version, about = "Simulate and verify the quantum dining information brokers protocol")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the protocol once and write a JSON-lines trace.
    Run(RunArgs),
    /// Rebuild the three-broker worked example and compare with the published tables.
    ReproducePaper,
    /// Run the invariant suites.
    Verify(VerifyArgs),
    /// Sample measurement outcomes and report a histogram.
    SampleDist(SampleArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// Number of information brokers.
    #[arg(long)]
    pub n: Option<usize>,
    /// Bits per secret.
    #[arg(long)]
    pub m: Option<usize>,
    /// Comma-separated secrets, broker 0 first. Binary if exactly m digits of
    /// 0/1, otherwise hex; force with a 0b or 0x prefix.
    #[arg(long, value_delimiter = ',')]
    pub secrets: Option<Vec<String>>,
    /// Seed for drawing secrets when none are given.
    #[arg(long)]
    pub secret_seed: Option<u64>,
    /// Master seed.
    #[arg(long, env = "QDIBP_SEED", default_value_t = 0)]
    pub seed: u64,
    /// JSON config document; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Record Trent's permutations in the trace (test oracles only).
    #[arg(long)]
    pub debug_permutations: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Trace path. Defaults to trace-n<N>-m<M>-seed<SEED>.jsonl.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Fast,
    Full,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::Fast)]
    pub suite: SuiteArg,
    /// Largest dense statevector, in qubits.
    #[arg(long, default_value_t = DEFAULT_DENSE_CAP)]
    pub dense_cap: usize,
    /// Also write the JSON summary here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Protocol phase whose measurement is sampled (1 or 3).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub phase: u8,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Raw mode: register width, with no oracles applied.
    #[arg(long, requires = "r", conflicts_with_all = ["n", "m", "secrets", "secret_seed", "config"])]
    pub p: Option<usize>,
    /// Raw mode: number of registers.
    #[arg(long, requires = "p")]
    pub r: Option<usize>,
    /// Number of most frequent outcomes to list.
    #[arg(long, default_value_t = 10)]
    pub top: usize,
    /// Largest register width held as a full amplitude table.
    #[arg(long, default_value_t = DEFAULT_STRUCTURED_CAP)]
    pub structured_cap: usize,
    /// Write the report as JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses arguments and runs the command; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Run(args) => cmd_run(&args, out, err),
        Command::ReproducePaper => cmd_reproduce_paper(out),
        Command::Verify(args) => cmd_verify(&args, out),
        Command::SampleDist(args) => cmd_sample_dist(&args, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Config(_) | Error::Parse(_) | Error::InvalidDimensions(_) | Error::CapExceeded { .. } => EXIT_USAGE,
                _ => EXIT_FAILURE,
            }
        }
    }
}

/// One secret token: `0x..` hex, `0b..` binary, bare binary when it is
/// exactly `m` digits of 0/1, hex otherwise.
pub fn parse_secret(token: &str, m: usize) -> Result<BitVec> {
    let token = token.trim();
    if let Some(hex) = token.strip_prefix("0x") {
        return BitVec::from_hex(hex, m);
    }
    if let Some(bin) = token.strip_prefix("0b") {
        return BitVec::parse(bin, m);
    }
    if token.len() == m && token.chars().all(|c| c == '0' || c == '1') {
        return BitVec::parse(token, m);
    }
    BitVec::from_hex(token, m)
}

impl ConfigArgs {
    pub fn to_config(&self) -> Result<ProtocolConfig> {
        let mut doc = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                ConfigDoc::from_json(&text)?
            }
            None => ConfigDoc {
                n: self.n.ok_or_else(|| Error::Config("--n is required".into()))?,
                m: self.m.ok_or_else(|| Error::Config("--m is required".into()))?,
                secrets_hex: Vec::new(),
                secret_seed: None,
                seed: self.seed,
                debug_permutations: false,
                dealer: None,
            },
        };
        if let Some(n) = self.n {
            doc.n = n;
        }
        if let Some(m) = self.m {
            doc.m = m;
        }
        if self.config.is_none() || self.seed != 0 {
            doc.seed = self.seed;
        }
        doc.debug_permutations |= self.debug_permutations;
        if let Some(seed) = self.secret_seed {
            doc.secret_seed = Some(seed);
        }
        if let Some(list) = &self.secrets {
            if doc.m == 0 {
                return Err(Error::Config("secret width m must be positive".into()));
            }
            doc.secrets_hex = list
                .iter()
                .map(|t| parse_secret(t, doc.m).map(|v| v.to_hex()))
                .collect::<Result<_>>()
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        doc.into_config()
    }
}

fn cmd_run(args: &RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let config = args.config.to_config()?;
    let path = args.out.clone().unwrap_or_else(|| {
        PathBuf::from(format!(
            "trace-n{}-m{}-seed{}.jsonl",
            config.dims.n(),
            config.dims.m(),
            config.seed
        ))
    });
    let trace = run_full(config)?;
    for w in &trace.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    trace.write_jsonl(&path)?;
    let m = trace.config.m;
    let _ = writeln!(out, "t       = {}", trace.aggregated.format());
    let _ = writeln!(out, "t~~     = {}", trace.shuffled.format());
    for o in &trace.outputs {
        let got = o.recovered.iter().map(|b| b.format(Some(m))).join(", ");
        let _ = writeln!(out, "broker {} recovered [{}]", o.broker, got);
    }
    for (name, ok) in &trace.checks {
        let _ = writeln!(out, "{} {}", if *ok { "PASS" } else { "FAIL" }, name);
    }
    let _ = writeln!(out, "trace written to {}", path.display());
    Ok(if trace.all_checks_pass() { EXIT_OK } else { EXIT_FAILURE })
}

struct Comparison {
    rows: Vec<(String, String, String, bool)>,
}

impl Comparison {
    fn row(&mut self, what: &str, computed: String, expected: &str) {
        let ok = computed == expected;
        self.rows.push((what.to_string(), computed, expected.to_string(), ok));
    }
}

fn cmd_reproduce_paper(out: &mut dyn Write) -> Result<i32> {
    let dims = Dimensions::new(3, 1)?;
    // Charlie = broker 0, Bob = broker 1, Alice = broker 2
    let names = ["Charlie", "Bob", "Alice"];
    let secrets = [BitVec::parse("1", 1)?, BitVec::parse("0", 1)?, BitVec::parse("1", 1)?];
    let expected_ext = ["001 001 110", "000 000 000", "011 100 100"];
    let mut cmp = Comparison { rows: Vec::new() };

    let ext: Vec<_> = secrets
        .iter()
        .enumerate()
        .map(|(i, s)| layout::build_extended(i, s, dims))
        .collect::<Result<_>>()?;
    for (i, e) in ext.iter().enumerate() {
        cmp.row(&format!("extended secret, {}", names[i]), e.bits().format(Some(3)), expected_ext[i]);
    }
    let t = layout::aggregate(&ext, dims)?;
    cmp.row("aggregated t", t.format(), "010 101 010");

    let published = AggregatedVector::from_bits(BitVec::parse("001 110 100", 9)?, dims, true)?;
    cmp.row(
        "t~~ is a block permutation of t",
        shuffle::is_block_permutation(&t, &published)?.to_string(),
        "true",
    );
    let witnesses = Permutation::all(3)
        .cartesian_product(Permutation::all(3).collect_vec())
        .cartesian_product(Permutation::all(3).collect_vec())
        .filter(|((a, b), c)| {
            shuffle::shuffle_aggregated(&t, &[a.clone(), b.clone(), c.clone()])
                .map(|s| s.bits() == published.bits())
                .unwrap_or(false)
        })
        .count();
    cmp.row("witness triples in S_3^3 exist", (witnesses > 0).to_string(), "true");

    let mut state = GhzDiagonalState::new(dims.p(), dims.n() + 1)?;
    for e in &ext {
        state.apply_phase_oracle(e.bits())?;
    }
    let law = state.measurement_distribution()?;
    let mut rng = derive_rng(0, "reproduce/phase1");
    let mut violations = 0;
    for _ in 0..1000 {
        let ys = law.sample(&mut rng)?;
        if xor_all(&ys)? != *t.bits() {
            violations += 1;
        }
    }
    cmp.row("phase 1 samples violating y3^y2^y1^y0 = t (of 1000)", violations.to_string(), "0");

    let mut session = Session::new(ProtocolConfig::with_secrets(dims, secrets.to_vec(), 0))?;
    session.phase1()?;
    session.phase2()?;
    let p3 = session.phase3()?;
    let expected_recovered = ["0, 1", "1, 1", "0, 1"];
    for o in &p3.outputs {
        let mut rec = o.recovered.clone();
        rec.sort();
        cmp.row(
            &format!("secrets recovered by {}", names[o.broker]),
            rec.iter().map(|b| b.to_string()).join(", "),
            expected_recovered[o.broker],
        );
    }

    let w = cmp.rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    let _ = writeln!(out, "{:<w$}  {:<12}  {:<12}", "quantity", "computed", "published");
    for (what, got, want, ok) in &cmp.rows {
        let mark = if *ok { "" } else { "  <-- MISMATCH" };
        let _ = writeln!(out, "{what:<w$}  {got:<12}  {want:<12}{mark}");
    }
    let all = cmp.rows.iter().all(|r| r.3);
    let _ = writeln!(out, "{}", if all { "all values match" } else { "MISMATCH" });
    Ok(if all { EXIT_OK } else { EXIT_FAILURE })
}

fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let suite = match args.suite {
        SuiteArg::Fast => Suite::Fast,
        SuiteArg::Full => Suite::Full,
    };
    let report = verify::run_suite(suite, args.dense_cap);
    for c in &report.checks {
        let _ = writeln!(
            out,
            "{} {:<28} {:>7} ms  {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.millis,
            c.detail
        );
    }
    let json = report.to_json();
    let _ = writeln!(out, "{json}");
    if let Some(path) = &args.out {
        std::fs::write(path, &json).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    }
    Ok(if report.passed { EXIT_OK } else { EXIT_FAILURE })
}

#[derive(Debug, Serialize)]
pub struct Histogram {
    pub p: usize,
    pub r: usize,
    pub samples: usize,
    pub expected_xor_hex: Option<String>,
    pub constraint_pass_rate: f64,
    pub distinct_outcomes: usize,
    pub top: Vec<(String, u64)>,
    pub uniformity_cells: String,
    pub chi_square: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Samples `count` joint outcomes and summarizes them.
///
/// The uniformity test covers the full tuple when the `2^((r-1)p)`
/// admissible tuples number at most `count / 5`; otherwise it falls back to
/// the low bits of register 0, which are uniform in every protocol state.
pub fn sample_histogram(
    law: &OutcomeDistribution,
    count: usize,
    top: usize,
    rng: &mut impl rand::Rng,
) -> Result<Histogram> {
    let (p, r) = (law.p(), law.r());
    let expected = law.deterministic_xor();
    let mut counts: HashMap<Vec<BitVec>, u64> = HashMap::new();
    let mut pass = 0usize;
    for _ in 0..count {
        let ys = law.sample(rng)?;
        match &expected {
            Some(z) if xor_all(&ys)? == *z => pass += 1,
            None => pass += 1,
            _ => {}
        }
        *counts.entry(ys).or_insert(0) += 1;
    }
    let label = |ys: &[BitVec]| ys.iter().rev().map(|y| y.format(None)).join(" | ");
    let mut ranked: Vec<_> = counts.iter().map(|(k, v)| (label(k), *v)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(top);

    let budget = (count / 5).max(1);
    let free_bits = (r - 1) * p;
    let (cells, observed) = if free_bits < 63 && (1usize << free_bits) <= budget {
        // every admissible tuple is one cell, keyed by registers 0..r-1
        let mut obs = vec![0u64; 1 << free_bits];
        for (ys, c) in &counts {
            let mut key = 0usize;
            for (k, y) in ys.iter().take(r - 1).enumerate() {
                key |= (y.to_u64() as usize) << (k * p);
            }
            obs[key] += c;
        }
        (format!("all {} admissible tuples", 1usize << free_bits), obs)
    } else {
        let bits = p.min(budget.ilog2() as usize).max(1);
        let mut obs = vec![0u64; 1 << bits];
        for (ys, c) in &counts {
            obs[ys[0].slice(0, bits)?.to_u64() as usize] += c;
        }
        (format!("low {bits} bits of register 0"), obs)
    };
    let chi = stats::chi_square_uniform(&observed);
    Ok(Histogram {
        p,
        r,
        samples: count,
        expected_xor_hex: expected.map(|z| z.to_hex()),
        constraint_pass_rate: pass as f64 / count.max(1) as f64,
        distinct_outcomes: counts.len(),
        top: ranked,
        uniformity_cells: cells,
        chi_square: chi.statistic,
        dof: chi.dof,
        p_value: chi.p_value,
    })
}

fn cmd_sample_dist(args: &SampleArgs, out: &mut dyn Write) -> Result<i32> {
    if args.phase == 2 {
        return Err(Error::Config("phase 2 has no quantum measurement; use 1 or 3".into()));
    }
    let (law, seed) = match (args.p, args.r) {
        (Some(p), Some(r)) => {
            let resource = GhzResource::new(p, r, Tier::Auto, args.structured_cap)?;
            (resource.measurement_distribution()?, args.config.seed)
        }
        _ => {
            let config = args.config.to_config()?;
            let seed = config.seed;
            let dims = config.dims;
            let mut resource = GhzResource::new(dims.p(), dims.n() + 1, Tier::Auto, args.structured_cap)?;
            if args.phase == 1 {
                for (i, s) in config.resolve_secrets()?.iter().enumerate() {
                    resource.apply_phase_oracle(layout::build_extended(i, s, dims)?.bits())?;
                }
            } else {
                let mut session = Session::new(config)?;
                session.phase1()?;
                resource.apply_phase_oracle(session.phase2()?.bits())?;
            }
            (resource.measurement_distribution()?, seed)
        }
    };
    let mut rng = derive_rng(seed, "sample-dist");
    let hist = sample_histogram(&law, args.samples, args.top, &mut rng)?;

    let _ = writeln!(out, "p = {}, r = {}, samples = {}", hist.p, hist.r, hist.samples);
    if let Some(z) = &hist.expected_xor_hex {
        let _ = writeln!(out, "expected XOR of all registers (hex) = {z}");
    }
    let _ = writeln!(out, "XOR-constraint pass rate = {:.4}", hist.constraint_pass_rate);
    let _ = writeln!(out, "distinct outcomes = {}", hist.distinct_outcomes);
    let _ = writeln!(out, "top outcomes (registers r-1 | ... | 0):");
    for (label, c) in &hist.top {
        let _ = writeln!(out, "  {c:>8}  {label}");
    }
    let _ = writeln!(
        out,
        "uniformity over {}: chi-square = {:.3}, dof = {}, p-value = {:.4}",
        hist.uniformity_cells, hist.chi_square, hist.dof, hist.p_value
    );
    if let Some(path) = &args.out {
        let json = serde_json::to_string(&hist).expect("histogram serializes");
        std::fs::write(path, json).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    }
    Ok(if hist.constraint_pass_rate == 1.0 { EXIT_OK } else { EXIT_FAILURE })
}

fn xor_all(ys: &[BitVec]) -> Result<BitVec> {
    let mut acc = BitVec::zero(ys[0].len())?;
    for y in ys {
        acc.xor_assign(y)?;
    }
    Ok(acc)
}
