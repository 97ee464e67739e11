//! Resolved command-line configuration.
//!
//! Every subcommand declares its keys once in [`keys`]. The same table
//! builds the clap flags and validates values from either source, so a
//! config file can set anything a flag can.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use clap::{Arg, ArgAction, ArgMatches, Command};
use serde_json::{json, Value};

pub const OUT_DIR_ENV: &str = "CEO_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "ceo-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Subcommand {
    Bounds,
    Locus,
    Mumax,
    Design,
    Quantize,
    Encode,
    Decode,
    Simulate,
    Table1,
    Sweep,
}

impl Subcommand {
    pub const ALL: [Subcommand; 10] = [
        Subcommand::Bounds,
        Subcommand::Locus,
        Subcommand::Mumax,
        Subcommand::Design,
        Subcommand::Quantize,
        Subcommand::Encode,
        Subcommand::Decode,
        Subcommand::Simulate,
        Subcommand::Table1,
        Subcommand::Sweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Bounds => "bounds",
            Subcommand::Locus => "locus",
            Subcommand::Mumax => "mumax",
            Subcommand::Design => "design",
            Subcommand::Quantize => "quantize",
            Subcommand::Encode => "encode",
            Subcommand::Decode => "decode",
            Subcommand::Simulate => "simulate",
            Subcommand::Table1 => "table1",
            Subcommand::Sweep => "sweep",
        }
    }

    fn about(self) -> &'static str {
        match self {
            Subcommand::Bounds => "Rates and distortion of one crossover pair",
            Subcommand::Locus => "Optimal crossover pairs over a multiplier grid",
            Subcommand::Mumax => "Largest useful Lagrange multiplier",
            Subcommand::Design => "Build compound codes and write them to disk",
            Subcommand::Quantize => "BiP-quantize a bit file onto a code",
            Subcommand::Encode => "Quantize and bin a bit file (link payload)",
            Subcommand::Decode => "Joint sum-product decoding of one or two payloads",
            Subcommand::Simulate => "Seeded Monte-Carlo run of the whole chain",
            Subcommand::Table1 => "Theory and measured columns of the published rows",
            Subcommand::Sweep => "Sum-rate versus distortion curve",
        }
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    /// Probability in `[lo, hi]`.
    Real(f64, f64),
    /// Integer in `[lo, hi]`.
    Count(u64, u64),
    Path,
    Switch,
    Choice(&'static [&'static str]),
}

#[derive(Debug, Clone, Copy)]
pub struct Key {
    pub name: &'static str,
    pub kind: Kind,
    pub required: bool,
    pub default: Option<&'static str>,
    pub help: &'static str,
}

const fn key(name: &'static str, kind: Kind, help: &'static str) -> Key {
    Key {
        name,
        kind,
        required: false,
        default: None,
        help,
    }
}

const fn req(name: &'static str, kind: Kind, help: &'static str) -> Key {
    Key {
        name,
        kind,
        required: true,
        default: None,
        help,
    }
}

const fn def(name: &'static str, kind: Kind, default: &'static str, help: &'static str) -> Key {
    Key {
        name,
        kind,
        required: false,
        default: Some(default),
        help,
    }
}

const PROB: Kind = Kind::Real(0.0, 0.5);
const MU: Kind = Kind::Real(0.0, 1.0);
const BIG: u64 = 100_000_000;

const P1: Key = req("p1", PROB, "crossover of observation 1");
const P2: Key = req("p2", PROB, "crossover of observation 2");
const GRID: Key = def("grid-step", Kind::Real(1e-6, 0.01), "0.001", "optimizer grid step");
const REFINE: Key = def("refine-tol", Kind::Real(1e-12, 0.01), "0.00001", "golden-section tolerance");
const CHECK_DEGREE: Key = key("check-degree", Kind::Count(3, 1000), "LDGM check degree (default from rate)");
const DELTA_DEGREES: Key = key("delta-degrees", Kind::Path, "degree distribution file for the binning rows");
const TRIALS: Key = def("trials", Kind::Count(1, 1_000_000), "50", "Monte-Carlo trials");

/// Keys accepted by each subcommand.
pub fn keys(cmd: Subcommand) -> Vec<Key> {
    match cmd {
        Subcommand::Bounds => vec![P1, P2, req("d1", PROB, "test-channel crossover 1"), req("d2", PROB, "test-channel crossover 2")],
        Subcommand::Locus => vec![P1, P2, def("samples", Kind::Count(1, 100_000), "50", "multiplier samples"), GRID, REFINE],
        Subcommand::Mumax => vec![P1, P2],
        Subcommand::Design => vec![
            req("n", Kind::Count(1, BIG), "block length"),
            req("m1", Kind::Count(0, BIG), "info length, link 1"),
            req("k1", Kind::Count(0, BIG), "syndrome length, link 1"),
            def("m2", Kind::Count(0, BIG), "0", "info length, link 2 (0: single link)"),
            def("k2", Kind::Count(0, BIG), "0", "syndrome length, link 2"),
            CHECK_DEGREE,
            DELTA_DEGREES,
        ],
        Subcommand::Quantize | Subcommand::Encode => vec![
            req("code", Kind::Path, "code file written by `design`"),
            req("input", Kind::Path, "bit file to quantize"),
            key("gamma", Kind::Real(0.0, 50.0), "BiP field strength (default 2 m/n)"),
            def("damping", Kind::Real(1e-6, 1.0), "0.8", "BiP damping"),
            def("max-rounds", Kind::Count(1, 1_000_000), "100", "BiP decimation rounds"),
        ],
        Subcommand::Decode => vec![
            req("code1", Kind::Path, "code file of link 1"),
            req("payload1", Kind::Path, "payload file of link 1"),
            key("code2", Kind::Path, "code file of link 2"),
            key("payload2", Kind::Path, "payload file of link 2"),
            req("q", PROB, "virtual-channel crossover between the links"),
            def("rounds", Kind::Count(1, 10_000), "15", "JSP rounds"),
            def("inner-iters", Kind::Count(1, 100_000), "40", "iterations per JSP round"),
            def("max-iters", Kind::Count(1, 100_000), "100", "iterations of a standalone decode"),
            DELTA_DEGREES,
        ],
        Subcommand::Simulate => vec![
            P1,
            P2,
            key("mu", MU, "Lagrange multiplier (targets from the optimizer)"),
            key("d1", PROB, "stage-1 target of link 1"),
            key("d2", PROB, "stage-1 target of link 2"),
            req("n", Kind::Count(1, BIG), "block length"),
            key("m1", Kind::Count(0, BIG), "explicit info length, link 1"),
            key("m2", Kind::Count(0, BIG), "explicit info length, link 2"),
            key("k1", Kind::Count(0, BIG), "explicit syndrome length, link 1"),
            key("k2", Kind::Count(0, BIG), "explicit syndrome length, link 2"),
            def("stage1-slack", Kind::Real(0.0, 0.49), "0.0089", "automatic design: stage-1 rate slack"),
            def("backoff", Kind::Real(1e-6, 1.0), "0.9", "automatic design: fraction of the binning capacity used"),
            CHECK_DEGREE,
            DELTA_DEGREES,
            TRIALS,
            def("mode", Kind::Choice(&["coded", "oracle"]), "coded", "full chain or model-exact words"),
        ],
        Subcommand::Table1 => vec![
            key("published-rows", Kind::Switch, "use the twelve published rows"),
            key("n", Kind::Count(1, BIG), "keep only rows with this block length"),
            key("empirical", Kind::Switch, "also run the experiments"),
            TRIALS,
            def("mode", Kind::Choice(&["coded", "oracle"]), "coded", "full chain or model-exact words"),
        ],
        Subcommand::Sweep => vec![
            P1,
            P2,
            def("samples", Kind::Count(1, 100_000), "25", "multiplier samples"),
            GRID,
            REFINE,
            key("empirical", Kind::Switch, "add measured points"),
            def("n", Kind::Count(1, BIG), "10000", "block length of measured points"),
            def("stage1-slack", Kind::Real(0.0, 0.49), "0.0089", "automatic design: stage-1 rate slack"),
            def("backoff", Kind::Real(1e-6, 1.0), "0.9", "automatic design: fraction of the binning capacity used"),
            def("trials", Kind::Count(1, 1_000_000), "5", "Monte-Carlo trials per point"),
            def("mode", Kind::Choice(&["coded", "oracle"]), "oracle", "full chain or model-exact words"),
        ],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Flag,
    File,
    Default,
}

impl Source {
    fn label(self) -> &'static str {
        match self {
            Source::Flag => "flag",
            Source::File => "config file",
            Source::Default => "default",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub value: String,
    pub source: Source,
}

#[derive(Debug, Clone)]
pub struct CliConfig {
    pub subcommand: Subcommand,
    pub params: BTreeMap<&'static str, Param>,
    pub out_dir: PathBuf,
    pub seed: u64,
    /// Human-readable precedence notes, e.g. a flag overriding the file.
    pub provenance: Vec<String>,
}

/// Diagnostic listing every problem found.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub problems: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration:")?;
        for p in &self.problems {
            writeln!(f, "  - {p}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

pub fn command() -> Command {
    let mut cmd = Command::new("ceo")
        .about("Two-link binary CEO coding under log-loss")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg(Arg::new("config").long("config").global(true).value_name("FILE").help("key = value file with [subcommand] sections"))
        .arg(
            Arg::new("out-dir")
                .long("out-dir")
                .global(true)
                .value_name("DIR")
                .help(format!("artifact directory (default: ${OUT_DIR_ENV} or ./{DEFAULT_OUT_DIR})")),
        )
        .arg(Arg::new("seed").long("seed").global(true).value_name("N").help("base seed (default 1)"));
    for sc in Subcommand::ALL {
        let mut sub = Command::new(sc.name()).about(sc.about());
        for k in keys(sc) {
            let help = match k.default {
                Some(d) => format!("{} [default: {d}]", k.help),
                None => k.help.to_string(),
            };
            let arg = Arg::new(k.name).long(k.name).help(help);
            sub = sub.arg(match k.kind {
                Kind::Switch => arg.action(ArgAction::SetTrue),
                _ => arg.value_name("VALUE").allow_negative_numbers(true),
            });
        }
        cmd = cmd.subcommand(sub);
    }
    cmd
}

/// `[section]` -> key -> value. Keys before any section go to `""`.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, BTreeMap<String, String>>, ConfigError> {
    let mut out: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
    let mut section = String::new();
    let mut problems = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = name.trim().to_string();
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() => {
                out.entry(section.clone()).or_default().insert(k.trim().to_string(), v.trim().to_string());
            }
            _ => problems.push(format!("config line {}: expected `key = value`, got {raw:?}", i + 1)),
        }
    }
    if problems.is_empty() {
        Ok(out)
    } else {
        Err(ConfigError { problems })
    }
}

fn check_value(k: &Key, value: &str) -> Option<String> {
    match k.kind {
        Kind::Real(lo, hi) => match value.parse::<f64>() {
            Ok(v) if v.is_finite() && (lo..=hi).contains(&v) => None,
            Ok(v) => Some(format!("--{} = {v} is out of range [{lo}, {hi}]", k.name)),
            Err(_) => Some(format!("--{} = {value:?} is not a number", k.name)),
        },
        Kind::Count(lo, hi) => match value.parse::<u64>() {
            Ok(v) if (lo..=hi).contains(&v) => None,
            Ok(v) => Some(format!("--{} = {v} is out of range [{lo}, {hi}]", k.name)),
            Err(_) => Some(format!("--{} = {value:?} is not a non-negative integer", k.name)),
        },
        Kind::Switch => match value {
            "true" | "false" => None,
            _ => Some(format!("--{} = {value:?} must be true or false", k.name)),
        },
        Kind::Choice(options) => {
            if options.contains(&value) {
                None
            } else {
                Some(format!("--{} = {value:?} must be one of {}", k.name, options.join(", ")))
            }
        }
        Kind::Path => (value.is_empty()).then(|| format!("--{} needs a non-empty path", k.name)),
    }
}

/// Cross-key rules a single key cannot express.
fn check_combinations(cmd: Subcommand, params: &BTreeMap<&'static str, Param>) -> Vec<String> {
    let has = |k: &str| params.contains_key(k);
    let mut out = Vec::new();
    match cmd {
        Subcommand::Simulate => {
            let explicit = ["m1", "m2", "k1", "k2"].iter().filter(|k| has(k)).count();
            if explicit != 0 && explicit != 4 {
                out.push("explicit design needs all of --m1 --m2 --k1 --k2".into());
            }
            match (has("mu"), has("d1") && has("d2"), has("d1") || has("d2")) {
                (true, _, true) => out.push("give either --mu or --d1/--d2, not both".into()),
                (false, false, _) => out.push("missing targets: --mu, or both --d1 and --d2".into()),
                _ => {}
            }
        }
        Subcommand::Decode => {
            if has("code2") != has("payload2") {
                out.push("--code2 and --payload2 go together".into());
            }
        }
        Subcommand::Table1 => {
            if params.get("published-rows").map(|p| p.value.as_str()) != Some("true") {
                out.push("table1 currently reproduces the published rows only; pass --published-rows".into());
            }
        }
        _ => {}
    }
    out
}

/// Merges flags over the config file over defaults and validates the result.
pub fn parse_config(argv: &[String], file_text: Option<&str>, env_out_dir: Option<String>) -> Result<CliConfig, ParseFailure> {
    let matches = command().try_get_matches_from(argv).map_err(ParseFailure::Usage)?;
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let cmd = Subcommand::ALL.into_iter().find(|s| s.name() == name).expect("known subcommand");

    let file_text = match (file_text, matches.get_one::<String>("config")) {
        (Some(t), _) => Some(t.to_string()),
        (None, Some(path)) => Some(
            std::fs::read_to_string(path)
                .map_err(|e| ParseFailure::Invalid(ConfigError { problems: vec![format!("cannot read config {path}: {e}")] }))?,
        ),
        (None, None) => None,
    };
    let file = match &file_text {
        Some(t) => parse_config_file(t).map_err(ParseFailure::Invalid)?,
        None => BTreeMap::new(),
    };
    let global = file.get("").cloned().unwrap_or_default();
    let section = file.get(cmd.name()).cloned().unwrap_or_default();

    let mut problems = Vec::new();
    let mut provenance = Vec::new();
    let keys = keys(cmd);
    for k in section.keys() {
        if !keys.iter().any(|key| key.name == k) {
            problems.push(format!("config file: unknown key {k:?} in [{}]", cmd.name()));
        }
    }

    let mut params = BTreeMap::new();
    for k in &keys {
        let flag = flag_value(sub, k);
        let from_file = section.get(k.name).cloned();
        let chosen = match (flag, from_file) {
            (Some(v), Some(f)) => {
                if v != f {
                    provenance.push(format!("{} = {v} (flag overrides config file value {f})", k.name));
                }
                Some(Param { value: v, source: Source::Flag })
            }
            (Some(v), None) => Some(Param { value: v, source: Source::Flag }),
            (None, Some(f)) => Some(Param { value: f, source: Source::File }),
            (None, None) => k.default.map(|d| Param {
                value: d.to_string(),
                source: Source::Default,
            }),
        };
        match chosen {
            Some(p) => {
                if let Some(problem) = check_value(k, &p.value) {
                    problems.push(format!("{problem} (from {})", p.source.label()));
                }
                params.insert(k.name, p);
            }
            None if k.required => problems.push(format!("missing required --{} for `{}`", k.name, cmd.name())),
            None => {}
        }
    }
    problems.extend(check_combinations(cmd, &params));

    let pick = |flag: Option<&String>, file_key: &str| flag.cloned().or_else(|| global.get(file_key).cloned());
    let seed = match pick(matches.get_one::<String>("seed"), "seed") {
        Some(s) => s.parse::<u64>().unwrap_or_else(|_| {
            problems.push(format!("--seed = {s:?} is not a non-negative integer"));
            0
        }),
        None => 1,
    };
    let out_dir = pick(matches.get_one::<String>("out-dir"), "out-dir")
        .or(env_out_dir)
        .unwrap_or_else(|| DEFAULT_OUT_DIR.to_string());

    if !problems.is_empty() {
        return Err(ParseFailure::Invalid(ConfigError { problems }));
    }
    Ok(CliConfig {
        subcommand: cmd,
        params,
        out_dir: PathBuf::from(out_dir),
        seed,
        provenance,
    })
}

fn flag_value(sub: &ArgMatches, k: &Key) -> Option<String> {
    match k.kind {
        Kind::Switch => sub.get_flag(k.name).then(|| "true".to_string()),
        _ => sub.get_one::<String>(k.name).cloned(),
    }
}

#[derive(Debug)]
pub enum ParseFailure {
    /// Unknown flag, bad syntax, `--help`, `--version`.
    Usage(clap::Error),
    Invalid(ConfigError),
}

impl CliConfig {
    pub fn get(&self, name: &str) -> Option<&str> {
        self.params.get(name).map(|p| p.value.as_str())
    }

    pub fn real(&self, name: &str) -> f64 {
        self.get(name).and_then(|v| v.parse().ok()).unwrap_or_else(|| panic!("validated real {name}"))
    }

    pub fn count(&self, name: &str) -> usize {
        self.get(name).and_then(|v| v.parse().ok()).unwrap_or_else(|| panic!("validated count {name}"))
    }

    pub fn opt_real(&self, name: &str) -> Option<f64> {
        self.get(name).map(|_| self.real(name))
    }

    pub fn opt_count(&self, name: &str) -> Option<usize> {
        self.get(name).map(|_| self.count(name))
    }

    pub fn switch(&self, name: &str) -> bool {
        self.get(name) == Some("true")
    }

    /// Resolved parameters and seed, embedded in every artifact.
    pub fn resolved(&self) -> Value {
        let params: BTreeMap<&str, &str> = self.params.iter().map(|(k, p)| (*k, p.value.as_str())).collect();
        json!({ "subcommand": self.subcommand.name(), "seed": self.seed, "params": params })
    }
}
