//! Command-line front end: configuration, subcommands and invariant suites.
//! Every command produces a [`Report`] that renders as text, JSON or CSV.

use std::ffi::OsString;
use std::path::PathBuf;
use std::rc::Rc;

use clap::{Parser, Subcommand, ValueEnum};
use num::Zero;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use tn_core::norms::{
    aux_w_norm, family_norm_witness, james_norm, norming_enumerate, Family, Functional, NormError, ParamSchedule,
};
use tn_core::rho::{build_universal_rho, verify_rho_axioms, RhoError, RhoFn, RhoModel, Target};
use tn_core::space::{
    alternating_sum_demo, build_special_sequence, canonical_pair, dependent_sequence_build, exact_pair_check,
    fork_special, k_norm_bounds, ris_check, tree_analysis_validate, tree_interference, CodingState, PairSource,
    SpaceError,
};
use tn_core::vectors::{Vec00, VecError, Q};
use tn_core::{FinOrdSet, Ordinal, OrdinalError};

pub mod suites;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Ordinal(#[from] OrdinalError),
    #[error(transparent)]
    Vector(#[from] VecError),
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error(transparent)]
    Rho(#[from] RhoError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RhoKind {
    Ladder,
    Smooth,
    Universal,
}

/// Base function of the ladder recursion on the finite ordinals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum LadderProfile {
    /// `rho(m, n) = n`
    Identity,
    /// `rho(m, n) = floor(log2(n + 1))`
    Log2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Coding {
    Strict,
    Toy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// Resolved settings: defaults, then the `TN_CONFIG` file, then flags.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// `m=..;n=..`, `paper:K`, `toy:K`, or a path to a file holding one of these
    pub schedule: String,
    pub bound: String,
    pub rho: RhoKind,
    pub ladder_profile: LadderProfile,
    /// model queue for the universal rho, a JSON array of matrices
    pub queue: Option<PathBuf>,
    pub coding: Coding,
    pub budget: usize,
    pub depth: usize,
    pub format: Format,
    pub seed: u64,
    pub unconditional: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schedule: "m=2,4;n=3,5".into(),
            bound: "w^3".into(),
            rho: RhoKind::Ladder,
            ladder_profile: LadderProfile::Identity,
            queue: None,
            coding: Coding::Toy,
            budget: 200,
            depth: 3,
            format: Format::Text,
            seed: 0,
            unconditional: false,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn schedule(&self) -> Result<ParamSchedule, CliError> {
        let s = self.schedule.trim();
        let looks_inline = s.contains('=') || s.starts_with("paper:") || s.starts_with("toy:");
        if !looks_inline {
            if let Ok(text) = std::fs::read_to_string(s) {
                return Ok(ParamSchedule::parse(&text)?);
            }
        }
        Ok(ParamSchedule::parse(s)?)
    }

    pub fn bound(&self) -> Result<Ordinal, CliError> {
        Ok(Ordinal::parse(&self.bound)?)
    }

    pub fn rho(&self) -> Result<RhoFn, CliError> {
        let bound = self.bound()?;
        Ok(match self.rho {
            RhoKind::Ladder => match self.ladder_profile {
                LadderProfile::Identity => RhoFn::ladder(bound),
                LadderProfile::Log2 => {
                    RhoFn::ladder_with_base(bound, Rc::new(|_, n| 63 - (n + 1).leading_zeros() as u64))
                }
            },
            RhoKind::Smooth => RhoFn::smooth(bound),
            RhoKind::Universal => {
                let queue = match &self.queue {
                    Some(p) => read_queue(p)?,
                    None => Vec::new(),
                };
                build_universal_rho(bound, &queue)?.0
            }
        })
    }

    pub fn coding(&self, sched: &ParamSchedule) -> CodingState {
        match self.coding {
            Coding::Strict => CodingState::strict(sched.len()),
            Coding::Toy => CodingState::toy(),
        }
    }
}

/// Targets for queued models: the `k`-th model goes to `w*(k+1)+1`.
pub fn queue_targets(models: Vec<RhoModel>) -> Vec<(RhoModel, Target)> {
    models
        .into_iter()
        .enumerate()
        .map(|(k, m)| (m, Target { start: Ordinal::omega_mul(k as u64 + 1).add_nat(1), len: None }))
        .collect()
}

pub fn read_queue(path: &std::path::Path) -> Result<Vec<(RhoModel, Target)>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mats: Vec<Vec<Vec<u64>>> =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let models = mats.into_iter().map(RhoModel::new).collect::<Result<Vec<_>, _>>()?;
    Ok(queue_targets(models))
}

/// Output of one command.
#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub text: String,
    pub result: Value,
    pub waivers: Vec<String>,
    /// a check or suite ran to completion and found a failure
    pub failed: bool,
}

impl Report {
    fn new(command: &str, text: String, result: Value) -> Self {
        Report { command: command.into(), text, result, waivers: Vec::new(), failed: false }
    }

    pub fn to_json(&self, cfg: &RunConfig) -> String {
        let v = json!({
            "schema": SCHEMA,
            "command": self.command,
            "config": cfg,
            "waivers": self.waivers,
            "result": self.result,
        });
        serde_json::to_string_pretty(&v).expect("reports serialize") + "\n"
    }

    pub fn to_csv(&self, cfg: &RunConfig) -> String {
        let mut rows = Vec::new();
        flatten(
            "",
            &json!({ "schema": SCHEMA, "config": cfg, "waivers": self.waivers, "result": self.result }),
            &mut rows,
        );
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["key", "value"]).expect("in-memory write");
        for (k, v) in rows {
            w.write_record([k, v]).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf8")
    }

    pub fn render(&self, cfg: &RunConfig) -> String {
        match cfg.format {
            Format::Text => {
                let mut t = self.text.clone();
                if !t.ends_with('\n') {
                    t.push('\n');
                }
                if !self.waivers.is_empty() {
                    t.push_str(&format!("waivers: {}\n", self.waivers.join(", ")));
                }
                t
            }
            Format::Json => self.to_json(cfg),
            Format::Csv => self.to_csv(cfg),
        }
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, v)| flatten(&key(k), v, out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| flatten(&key(&i.to_string()), v, out)),
        Value::String(s) => out.push((prefix.into(), s.clone())),
        Value::Null => out.push((prefix.into(), String::new())),
        other => out.push((prefix.into(), other.to_string())),
    }
}

#[derive(Parser, Debug)]
#[command(name = "tn", about = "Exact norms, rho-functions and coded special sequences", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(clap::Args, Debug, Default)]
pub struct GlobalArgs {
    /// `m=2,4;n=3,5`, `paper:K`, `toy:K` or a JSON file
    #[arg(long, global = true)]
    pub schedule: Option<String>,
    /// ordinal bound of the rho-function, e.g. `w^3`
    #[arg(long, global = true)]
    pub bound: Option<String>,
    /// rho-function construction
    #[arg(long, global = true, value_enum)]
    pub rho: Option<RhoKind>,
    /// base values of the ladder rho on finite ordinals
    #[arg(long, global = true, value_enum)]
    pub ladder_profile: Option<LadderProfile>,
    /// JSON array of rho-model matrices for the universal rho
    #[arg(long, global = true)]
    pub queue: Option<PathBuf>,
    /// weight coding: `strict` errs where `toy` records a waiver
    #[arg(long, global = true, value_enum)]
    pub coding: Option<Coding>,
    /// search budget for norming-set bounds
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    /// tree depth for enumerations
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    /// output format
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// seed for the suites' random cases
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// close the norming set under restrictions to arbitrary subsets
    #[arg(long, global = true)]
    pub unconditional: bool,
    /// config file; defaults to `$TN_CONFIG`
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

impl GlobalArgs {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let file = self.config.clone().or_else(|| std::env::var_os("TN_CONFIG").map(PathBuf::from));
        let mut c = match file {
            Some(p) => RunConfig::from_file(&p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.schedule {
            c.schedule = v.clone();
        }
        if let Some(v) = &self.bound {
            c.bound = v.clone();
        }
        if let Some(v) = self.rho {
            c.rho = v;
        }
        if let Some(v) = self.ladder_profile {
            c.ladder_profile = v;
        }
        if let Some(v) = &self.queue {
            c.queue = Some(v.clone());
        }
        if let Some(v) = self.coding {
            c.coding = v;
        }
        if let Some(v) = self.budget {
            c.budget = v;
        }
        if let Some(v) = self.depth {
            c.depth = v;
        }
        if let Some(v) = self.format {
            c.format = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        c.unconditional |= self.unconditional;
        Ok(c)
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate a norm of a finitely supported vector
    Norm {
        #[arg(value_enum)]
        target: NormTarget,
        /// `ordinal:coefficient` pairs, e.g. `0:1, w+2:-1/2`
        #[arg(long)]
        vector: String,
        /// also maximize over the norming trees of this depth on the support
        #[arg(long)]
        oracle_depth: Option<usize>,
    },
    /// Rho-function tables, closures, axioms and constructions
    Rho {
        #[command(subcommand)]
        sub: RhoCmd,
    },
    /// Special sequences
    Special {
        #[command(subcommand)]
        sub: SpecialCmd,
    },
    /// Norming set of the coded space
    Space {
        #[command(subcommand)]
        sub: SpaceCmd,
    },
    /// Run a named invariant suite
    Suite {
        /// suite name; `list` prints them
        name: String,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum NormTarget {
    /// mixed Tsirelson norm
    Tsirelson,
    /// auxiliary norm with arities `4 n_j`
    W,
    /// James-like norm over interval collapses
    James,
    /// certified lower and upper bounds for the coded space
    KBounds,
}

#[derive(Subcommand, Debug)]
pub enum RhoCmd {
    /// All values on a set
    Table {
        #[arg(long)]
        set: String,
    },
    /// `cl(F, p)`
    Closure {
        #[arg(long)]
        set: String,
        #[arg(long)]
        p: u64,
    },
    /// Axioms 1 and 2 on every triple, and level sets
    Axioms {
        #[arg(long)]
        set: String,
    },
    /// Realize the `--queue` models and print their certificates
    Universal,
    /// `#F_n^lambda` for `n <= max-n`
    Smooth {
        #[arg(long, default_value = "w*2")]
        lambda: String,
        #[arg(long, default_value_t = 64)]
        max_n: u64,
    },
}

#[derive(clap::Args, Debug, Clone)]
pub struct SeqArgs {
    /// the odd weight index is `2j+1`
    #[arg(long, default_value_t = 1)]
    pub j: usize,
    /// number of functionals
    #[arg(long, default_value_t = 3)]
    pub len: usize,
    /// pairs are placed on successors of this ordinal
    #[arg(long, default_value = "w*2")]
    pub base: String,
}

#[derive(Subcommand, Debug)]
pub enum SpecialCmd {
    /// Build a special sequence from canonical exact pairs
    Build {
        #[command(flatten)]
        seq: SeqArgs,
    },
    /// Build a sequence and a copy forked after `k` steps, and compare them
    Interfere {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long, default_value_t = 1)]
        fork_after: usize,
        #[arg(long, default_value = "w^2")]
        fork_base: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum SpaceCmd {
    /// Certified bounds for the norm of the coded space
    NormBounds {
        #[arg(long)]
        vector: String,
    },
    /// Plain vs alternating averages of a dependent sequence
    DemoHi {
        #[command(flatten)]
        seq: SeqArgs,
    },
    /// Structural checks on blocks, pairs and trees
    Check {
        #[command(subcommand)]
        sub: CheckCmd,
    },
}

#[derive(Subcommand, Debug)]
pub enum CheckCmd {
    /// Rapidly increasing sequence conditions
    Ris {
        /// vectors separated by `|`
        #[arg(long)]
        vectors: String,
        #[arg(long, default_value = "1")]
        c: String,
        #[arg(long, default_value = "1/100")]
        eps: String,
    },
    /// Exact pair conditions
    ExactPair {
        #[arg(long, default_value_t = 2)]
        j: usize,
        /// defaults to the canonical pair on `n_j` points after `--base`
        #[arg(long)]
        vector: Option<String>,
        #[arg(long, default_value = "0")]
        base: String,
        #[arg(long, default_value = "6")]
        c: String,
    },
    /// Dependent sequence conditions against adversarial sequences
    Dependent {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long, default_value_t = 8)]
        adversaries: usize,
    },
    /// Tree analysis of a functional
    Tree {
        #[arg(long)]
        functional: String,
    },
}

fn q(s: &str) -> Result<Q, CliError> {
    s.trim().parse().map_err(|_| CliError::Usage(format!("not a rational: {s:?}")))
}

fn qs(v: &Q) -> String {
    v.to_string()
}

fn set_arg(s: &str) -> Result<FinOrdSet, CliError> {
    Ok(FinOrdSet::parse(s)?)
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<(RunConfig, Report), CliError> {
    let cfg = cli.global.resolve()?;
    let report = match &cli.command {
        Command::Norm { target, vector, oracle_depth } => cmd_norm(&cfg, *target, vector, *oracle_depth)?,
        Command::Rho { sub } => cmd_rho(&cfg, sub)?,
        Command::Special { sub } => cmd_special(&cfg, sub)?,
        Command::Space { sub } => cmd_space(&cfg, sub)?,
        Command::Suite { name } => suites::cmd_suite(&cfg, name)?,
    };
    Ok((cfg, report))
}

/// Largest support the `--oracle-depth` enumeration accepts.
pub const ORACLE_MAX_SUPPORT: usize = 6;

pub fn cmd_norm(
    cfg: &RunConfig,
    target: NormTarget,
    vector: &str,
    oracle_depth: Option<usize>,
) -> Result<Report, CliError> {
    let x = Vec00::parse(vector)?;
    let sched = cfg.schedule()?;
    let mut rep = norm_report(cfg, target, &x, &sched)?;
    if let Some(depth) = oracle_depth {
        let (fam, value) = match target {
            NormTarget::Tsirelson => (Family::T, family_norm_witness(&x, &sched, Family::T).0),
            NormTarget::W => (Family::W, aux_w_norm(&x, &sched)),
            _ => return Err(CliError::Usage("--oracle-depth applies to tsirelson and w".into())),
        };
        if x.len() > ORACLE_MAX_SUPPORT {
            return Err(CliError::Usage(format!(
                "--oracle-depth needs a support of at most {ORACLE_MAX_SUPPORT} points"
            )));
        }
        let best = norming_enumerate(&x.support(), &sched, depth, fam)
            .iter()
            .map(|e| x.iter().map(|(a, c)| c * e.value.get(a)).sum::<Q>())
            .max()
            .unwrap_or_else(Q::zero);
        rep.text.push_str(&format!("\noracle (depth {depth}) = {best}"));
        rep.result["oracle"] = json!({ "depth": depth, "value": qs(&best), "equal": best == value });
        rep.failed = best > value;
    }
    Ok(rep)
}

fn norm_report(cfg: &RunConfig, target: NormTarget, x: &Vec00, sched: &ParamSchedule) -> Result<Report, CliError> {
    Ok(match target {
        NormTarget::Tsirelson => {
            let (v, w) = family_norm_witness(x, sched, Family::T);
            Report::new("norm tsirelson", qs(&v), json!({ "value": qs(&v), "witness": w.map(|f| f.to_string()) }))
        }
        NormTarget::W => {
            let v = aux_w_norm(x, sched);
            Report::new("norm w", qs(&v), json!({ "value": qs(&v) }))
        }
        NormTarget::James => {
            let v = james_norm(x, sched, Family::T);
            Report::new("norm james", qs(&v), json!({ "value": qs(&v) }))
        }
        NormTarget::KBounds => k_bounds_report("norm k-bounds", cfg, x, sched)?,
    })
}

fn k_bounds_report(cmd: &str, cfg: &RunConfig, x: &Vec00, sched: &ParamSchedule) -> Result<Report, CliError> {
    let rho = cfg.rho()?;
    let mut coding = cfg.coding(sched);
    let b = k_norm_bounds(x, sched, &rho, &mut coding, cfg.budget)?;
    let wit = b.witness.as_ref().map(|f| f.to_string());
    let text =
        format!("lower = {}\nupper = {}\nwitness: {}", b.lower, b.upper, wit.clone().unwrap_or_else(|| "none".into()));
    let mut r = Report::new(cmd, text, serde_json::to_value(&b).expect("serializable"));
    r.result["witness_text"] = json!(wit);
    r.waivers = b.waivers.clone();
    Ok(r)
}

pub fn cmd_rho(cfg: &RunConfig, sub: &RhoCmd) -> Result<Report, CliError> {
    let rho = cfg.rho()?;
    Ok(match sub {
        RhoCmd::Table { set } => {
            let s = set_arg(set)?;
            let e = s.elements();
            let mut pairs = Vec::new();
            let mut text = String::new();
            for i in 0..e.len() {
                for j in i + 1..e.len() {
                    let v = rho.rho(&e[i], &e[j])?;
                    text.push_str(&format!("{} {} {v}\n", e[i], e[j]));
                    pairs.push(json!([e[i].to_string(), e[j].to_string(), v]));
                }
            }
            Report::new("rho table", text, json!({ "pairs": pairs }))
        }
        RhoCmd::Closure { set, p } => {
            let c = rho.closure(&set_arg(set)?, *p)?;
            Report::new("rho closure", c.to_string(), json!({ "closure": c.to_string(), "p": p }))
        }
        RhoCmd::Axioms { set } => {
            let s = set_arg(set)?;
            let rep = verify_rho_axioms(&rho, &s);
            let mut text = format!("violations: {}", rep.violations.len());
            for v in &rep.violations {
                text.push_str(&format!("\naxiom {} at {}", v.axiom, v.display_triple()));
            }
            let mut r = Report::new(
                "rho axioms",
                text,
                json!({ "triples": rep.triples, "violations": rep.violations, "level_mismatches": rep.level_mismatches }),
            );
            r.failed = !rep.violations.is_empty() || !rep.level_mismatches.is_empty();
            r
        }
        RhoCmd::Universal => {
            let path = cfg.queue.as_ref().ok_or_else(|| CliError::Usage("rho universal needs --queue".into()))?;
            let queue = read_queue(path)?;
            let (built, certs) = build_universal_rho(cfg.bound()?, &queue)?;
            let mut text = String::new();
            let mut rows = Vec::new();
            for (k, c) in certs.iter().enumerate() {
                let iso = c.isomorphic && tn_core::rho::models_isomorphic(&built.model_of(&c.m1)?, &queue[k].0);
                text.push_str(&format!("{k}: M1 = {{{}}} at {} isomorphic={iso} closed={}\n", c.m1, c.delta, c.closed));
                rows.push(json!({ "delta": c.delta.to_string(), "m1": c.m1.to_string(), "p": c.p, "isomorphic": iso, "closed": c.closed }));
            }
            let mut r = Report::new("rho universal", text, json!({ "certificates": rows }));
            r.failed = rows.iter().any(|c| c["isomorphic"] != json!(true) || c["closed"] != json!(true));
            r
        }
        RhoCmd::Smooth { lambda, max_n } => {
            let lam = Ordinal::parse(lambda)?;
            let rep = rho.smoothness_report(&lam, *max_n)?;
            let mut text = format!("lambda = {lam}\nmax #F_n/n = {}\n", rep.max_ratio);
            for (n, c) in &rep.rows {
                text.push_str(&format!("{n} {c}\n"));
            }
            Report::new(
                "rho smooth",
                text,
                json!({ "lambda": lam.to_string(), "rows": rep.rows, "max_ratio": rep.max_ratio.to_string() }),
            )
        }
    })
}

fn seq_text(seq: &tn_core::space::SpecialSequence) -> String {
    let mut t = format!("odd index {}\n", seq.odd_index());
    for (i, f) in seq.functionals.iter().enumerate() {
        let p = seq.ps.get(i).map_or("-".to_string(), |p| p.to_string());
        t.push_str(&format!("{}: w = m_{} p = {p} {}\n", i + 1, seq.weights[i], f));
    }
    t
}

pub fn cmd_special(cfg: &RunConfig, sub: &SpecialCmd) -> Result<Report, CliError> {
    let sched = cfg.schedule()?;
    let rho = cfg.rho()?;
    let mut coding = cfg.coding(&sched);
    Ok(match sub {
        SpecialCmd::Build { seq } => {
            let mut src = PairSource::new(Ordinal::parse(&seq.base)?, 1_000_000);
            let s = build_special_sequence(&mut src, seq.j, seq.len, &sched, &rho, &mut coding)?;
            let mut r = Report::new("special build", seq_text(&s), serde_json::to_value(&s).expect("serializable"));
            r.waivers = s.waivers.clone();
            r
        }
        SpecialCmd::Interfere { seq, fork_after, fork_base } => {
            let mut src = PairSource::new(Ordinal::parse(&seq.base)?, 1_000_000);
            let phi = build_special_sequence(&mut src, seq.j, seq.len, &sched, &rho, &mut coding)?;
            let mut fork = coding.fork();
            let psi = fork_special(&phi, *fork_after, &Ordinal::parse(fork_base)?, &sched, &rho, &mut fork)?;
            let rep = tree_interference(&phi, &psi, &rho)?;
            let text = format!(
                "kappa = {}\nlambda = {}\nTP.1 {}\nTP.2 {}\nTP.3 {}\nTP.4 {}",
                rep.kappa, rep.lambda, rep.tp1, rep.tp2, rep.tp3, rep.tp4
            );
            let mut r = Report::new("special interfere", text, serde_json::to_value(&rep).expect("serializable"));
            r.failed = !rep.pass();
            let mut w: Vec<String> = phi.waivers.iter().chain(&psi.waivers).cloned().collect();
            w.sort();
            w.dedup();
            r.waivers = w;
            r
        }
    })
}

pub fn cmd_space(cfg: &RunConfig, sub: &SpaceCmd) -> Result<Report, CliError> {
    let sched = cfg.schedule()?;
    match sub {
        SpaceCmd::NormBounds { vector } => k_bounds_report("space norm-bounds", cfg, &Vec00::parse(vector)?, &sched),
        SpaceCmd::DemoHi { seq } => {
            let rho = cfg.rho()?;
            let mut coding = cfg.coding(&sched);
            let mut src = PairSource::new(Ordinal::parse(&seq.base)?, 1_000_000);
            let (dep, _) = dependent_sequence_build(seq.j, Some(seq.len), &mut src, &sched, &rho, &mut coding, 0)?;
            let demo = alternating_sum_demo(&dep, &sched, &rho, &mut coding, cfg.budget)?;
            let text = format!(
                "plain average: lower = {} upper = {}\nalternating average: lower = {} upper = {}\nseparated: {}",
                demo.plain_lower, demo.plain_upper, demo.alternating_lower, demo.alternating_upper, demo.separated
            );
            let mut r = Report::new("space demo-hi", text, serde_json::to_value(&demo).expect("serializable"));
            r.waivers = demo.waivers.clone();
            r.failed = !demo.separated;
            Ok(r)
        }
        SpaceCmd::Check { sub } => cmd_check(cfg, &sched, sub),
    }
}

fn cmd_check(cfg: &RunConfig, sched: &ParamSchedule, sub: &CheckCmd) -> Result<Report, CliError> {
    Ok(match sub {
        CheckCmd::Ris { vectors, c, eps } => {
            let xs = vectors.split('|').map(Vec00::parse).collect::<Result<Vec<_>, _>>()?;
            let rep = ris_check(&xs, &q(c)?, &q(eps)?, sched, cfg.depth)?;
            let text = format!("ris: {}\nwitness j_k: {:?}", if rep.pass { "pass" } else { "fail" }, rep.witness);
            let mut r = Report::new("space check ris", text, serde_json::to_value(&rep).expect("serializable"));
            r.failed = !rep.pass;
            r
        }
        CheckCmd::ExactPair { j, vector, base, c } => {
            let (x, phi) = match vector {
                Some(v) => {
                    let x = Vec00::parse(v)?;
                    let phi = Functional::weighted(*j, x.support().iter().cloned().map(Functional::basis).collect());
                    (x, phi)
                }
                None => {
                    let n = sched.n_u64(*j).ok_or(NormError::WeightIndex(*j))?;
                    let b = Ordinal::parse(base)?;
                    let pts: Vec<Ordinal> = (1..=n).map(|k| b.add_nat(k)).collect();
                    canonical_pair(&pts, *j, sched)
                }
            };
            let rep = exact_pair_check(&x, &phi, &q(c)?, *j, sched, cfg.depth)?;
            let text = format!(
                "norm <= {} : {}\nphi(x) = {}\nweight bounds: {}{}",
                rep.norm_upper,
                rep.norm_ok,
                rep.value,
                if rep.bounds_pass() { "pass" } else { "fail" },
                if rep.asserted { "" } else { " (reported)" }
            );
            let mut r = Report::new("space check exact-pair", text, serde_json::to_value(&rep).expect("serializable"));
            if !rep.asserted {
                r.waivers.push("exact-pair-bounds".into());
            }
            r.failed = !rep.pass();
            r
        }
        CheckCmd::Dependent { seq, adversaries } => {
            let rho = cfg.rho()?;
            let mut coding = cfg.coding(sched);
            let mut src = PairSource::new(Ordinal::parse(&seq.base)?, 1_000_000);
            let (_, rep) =
                dependent_sequence_build(seq.j, Some(seq.len), &mut src, sched, &rho, &mut coding, *adversaries)?;
            let text = format!(
                "DS.1 {}\nDS.2 {}\nDS.3 {}\nDS.4 {} ({} adversaries)",
                rep.ds1,
                rep.ds2.is_empty(),
                rep.ds3.iter().all(|r| r.pass()),
                rep.ds4.iter().all(|a| a.ds4 && a.tree_like),
                rep.ds4.len()
            );
            let mut r = Report::new("space check dependent", text, serde_json::to_value(&rep).expect("serializable"));
            r.waivers = rep.waivers.clone();
            r.failed = !rep.pass();
            r
        }
        CheckCmd::Tree { functional } => {
            let f = Functional::parse(functional)?;
            let rep = tree_analysis_validate(&f, sched);
            let text = match &rep.violation {
                None => format!("tree analysis: pass ({} nodes)", rep.nodes),
                Some(v) => format!("tree analysis: fail, clause {} at {:?}: {}", v.clause, v.path, v.message),
            };
            let mut r = Report::new("space check tree", text, serde_json::to_value(&rep).expect("serializable"));
            r.failed = !rep.pass;
            r
        }
    })
}

/// Parses `args`, runs the command and returns `(exit code, stdout, stderr)`.
/// Exit code 0 on success, 1 when a check or suite fails, 2 on error.
pub fn execute<I, T>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 { (0, text, String::new()) } else { (2, String::new(), text) };
        }
    };
    match run(&cli) {
        Ok((cfg, rep)) => (i32::from(rep.failed), rep.render(&cfg), String::new()),
        Err(e) => (2, String::new(), format!("error: {e}\n")),
    }
}
