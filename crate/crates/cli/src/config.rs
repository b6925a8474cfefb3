//! Flat `key = value` configuration.
//!
//! Blank lines are ignored and `#` starts a comment anywhere on a line.
//! Every file names its `scenario` (or has it supplied by the subcommand);
//! `seed`, `out` and `format` are accepted by all scenarios and the rest
//! are scenario-specific. Syntax problems, unknown or duplicate keys and
//! unparseable values are parse errors (exit 2); well-formed values outside
//! their allowed range are validation errors (exit 3). All violations are
//! collected before returning.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Scenario {
    Measure,
    Sweep,
    Semigroup,
    Trajectories,
    Helix,
    Nonlinear,
    Verify,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::Measure,
        Scenario::Sweep,
        Scenario::Semigroup,
        Scenario::Trajectories,
        Scenario::Helix,
        Scenario::Nonlinear,
        Scenario::Verify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Measure => "measure",
            Scenario::Sweep => "sweep",
            Scenario::Semigroup => "semigroup",
            Scenario::Trajectories => "trajectories",
            Scenario::Helix => "helix",
            Scenario::Nonlinear => "nonlinear",
            Scenario::Verify => "verify",
        }
    }

    /// Scenario-specific keys; the shared keys are in [`COMMON_KEYS`].
    pub fn keys(self) -> &'static [&'static str] {
        match self {
            Scenario::Measure => &[
                "subject_dim",
                "amplitudes",
                "born_weights",
                "n_a",
                "n_e",
                "gamma_a",
                "gamma_e",
                "dt",
                "delta_deg",
            ],
            Scenario::Sweep => &[
                "subject_dim",
                "amplitudes",
                "born_weights",
                "n_values",
                "n_e",
                "gamma_a",
                "gamma_e",
                "dt",
                "delta_deg",
            ],
            Scenario::Semigroup => &["family", "t1", "t2"],
            Scenario::Trajectories => &[
                "coupling",
                "field",
                "env_excited",
                "s_excited",
                "step",
                "steps",
                "samples",
                "trajectory_id",
                "delta_deg",
            ],
            Scenario::Helix => &["omega", "points", "t_max", "hop_probability"],
            Scenario::Nonlinear => &["pair", "werner_p", "channel"],
            Scenario::Verify => &["channel_path"],
        }
    }

    /// Whether the scenario draws random numbers (and so reports its seed).
    pub fn is_stochastic(self) -> bool {
        matches!(self, Scenario::Trajectories | Scenario::Helix)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Scenario::ALL.into_iter().find(|sc| sc.name() == s).ok_or_else(|| {
            let names: Vec<_> = Scenario::ALL.iter().map(|sc| sc.name()).collect();
            format!("unknown scenario `{s}` (expected one of {})", names.join(", "))
        })
    }
}

pub const COMMON_KEYS: [&str; 4] = ["scenario", "seed", "out", "format"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Parse,
    Validation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// 1-based line and column, when the problem has a location.
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            _ => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub violations: Vec<Violation>,
}

impl ConfigError {
    /// 2 if any violation is a parse error, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.violations.iter().any(|v| v.kind == ViolationKind::Parse) {
            2
        } else {
            3
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

/// Subject state given either as real amplitudes or as Born weights.
#[derive(Debug, Clone, PartialEq)]
pub enum SubjectState {
    /// Equal superposition over the pointer basis.
    Uniform,
    Amplitudes(Vec<f64>),
    /// Amplitudes are the square roots of these weights.
    BornWeights(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureParams {
    pub subject_dim: usize,
    pub state: SubjectState,
    pub n_a: usize,
    pub n_e: usize,
    pub gamma_a: f64,
    pub gamma_e: f64,
    pub dt: f64,
    pub delta_deg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepParams {
    /// Template; its `n_a` is replaced by each entry of `n_values`.
    pub model: MeasureParams,
    pub n_values: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemigroupFamily {
    All,
    Entangling,
    Factorized,
    Refactorizing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemigroupParams {
    pub family: SemigroupFamily,
    pub t1: f64,
    pub t2: f64,
}

/// Repeated interaction of a system qubit with fresh environment qubits
/// under H = field·Z⊗1/2 + coupling·(XX + YY)/2.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoriesParams {
    pub coupling: f64,
    pub field: f64,
    pub env_excited: f64,
    pub s_excited: f64,
    pub step: f64,
    pub steps: usize,
    pub samples: usize,
    pub trajectory_id: usize,
    pub delta_deg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HelixParams {
    pub omega: f64,
    pub points: usize,
    pub t_max: f64,
    pub hop_probability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    Bell,
    Werner,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearParams {
    pub pair: PairKind,
    pub werner_p: f64,
    pub channel: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyParams {
    pub channel_path: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    Measure(MeasureParams),
    Sweep(SweepParams),
    Semigroup(SemigroupParams),
    Trajectories(TrajectoriesParams),
    Helix(HelixParams),
    Nonlinear(NonlinearParams),
    Verify(VerifyParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub params: Params,
    pub seed: u64,
    pub output_path: PathBuf,
    pub format: Format,
}

/// Values supplied on the command line; they take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub scenario: Option<Scenario>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
    key_col: usize,
    value_col: usize,
}

/// Parses and validates a complete configuration that names its scenario.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    parse_config_with(text, &Overrides::default())
}

pub fn parse_config_with(text: &str, overrides: &Overrides) -> Result<ScenarioConfig, ConfigError> {
    let mut violations = Vec::new();
    let entries = tokenize(text, &mut violations);

    let file_scenario = entries.get("scenario").and_then(|e| match e.value.parse::<Scenario>() {
        Ok(s) => Some(s),
        Err(msg) => {
            violations.push(parse_at(e, msg));
            None
        }
    });
    let scenario = match (overrides.scenario, file_scenario) {
        (Some(cli), Some(file)) if cli != file => {
            let e = &entries["scenario"];
            violations.push(parse_at(
                e,
                format!("config is for `{file}` but the `{cli}` subcommand was run"),
            ));
            cli
        }
        (Some(s), _) | (None, Some(s)) => s,
        (None, None) => {
            if !entries.contains_key("scenario") {
                violations.push(missing("scenario"));
            }
            return Err(ConfigError { violations });
        }
    };

    for (key, e) in &entries {
        if !COMMON_KEYS.contains(&key.as_str()) && !scenario.keys().contains(&key.as_str()) {
            violations.push(Violation {
                kind: ViolationKind::Parse,
                line: Some(e.line),
                column: Some(e.key_col),
                message: format!("unknown key `{key}` for scenario `{scenario}`"),
            });
        }
    }

    let mut f = Fields {
        entries: &entries,
        violations: &mut violations,
    };
    let seed = overrides.seed.or_else(|| f.opt_parsed::<u64>("seed")).unwrap_or(0);
    let format = overrides
        .format
        .or_else(|| f.opt_parsed::<Format>("format"))
        .unwrap_or_default();
    let output_path = overrides
        .out
        .clone()
        .or_else(|| f.opt_string("out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(format!("{scenario}.{}", format.extension())));

    let params = match scenario {
        Scenario::Measure => Params::Measure(measure_params(&mut f, true)),
        Scenario::Sweep => {
            let model = measure_params(&mut f, false);
            let n_values = f
                .list::<usize>("n_values")
                .unwrap_or_else(|| vec![2, 4, 6, 8, 10, 12, 14, 16]);
            if n_values.len() < 2 {
                f.invalid("n_values", "needs at least two entries for a slope fit");
            }
            if n_values.iter().any(|&n| n > 1_000_000) {
                f.invalid("n_values", "entries must be at most 1000000");
            }
            Params::Sweep(SweepParams { model, n_values })
        }
        Scenario::Semigroup => {
            let family = f
                .choice(
                    "family",
                    &[
                        ("all", SemigroupFamily::All),
                        ("entangling", SemigroupFamily::Entangling),
                        ("factorized", SemigroupFamily::Factorized),
                        ("refactorizing", SemigroupFamily::Refactorizing),
                    ],
                )
                .unwrap_or(SemigroupFamily::All);
            let t1 = f.real("t1", 1.0, |x| x > 0.0, "must be positive");
            let t2 = f.real("t2", 2.0, |x| x > 0.0, "must be positive");
            if t2 <= t1 {
                f.invalid("t2", "must exceed t1");
            }
            Params::Semigroup(SemigroupParams { family, t1, t2 })
        }
        Scenario::Trajectories => {
            let unit = |x: f64| (0.0..=1.0).contains(&x);
            let p = TrajectoriesParams {
                coupling: f.real("coupling", 0.5, |_| true, ""),
                field: f.real("field", 1.0, |_| true, ""),
                env_excited: f.real("env_excited", 0.2, unit, "must lie in [0, 1]"),
                s_excited: f.real("s_excited", 0.3, unit, "must lie in [0, 1]"),
                step: f.real("step", 0.5, |x| x > 0.0, "must be positive"),
                steps: f.integer("steps", 4, 1, 16),
                samples: f.integer("samples", 10_000, 1, 10_000_000),
                trajectory_id: f.integer("trajectory_id", 0, 0, usize::MAX),
                delta_deg: f.real("delta_deg", 1e-8, |x| x > 0.0, "must be positive"),
            };
            if p.trajectory_id >= p.samples {
                f.invalid("trajectory_id", "must be smaller than samples");
            }
            Params::Trajectories(p)
        }
        Scenario::Helix => Params::Helix(HelixParams {
            omega: f.real("omega", 1.0, |_| true, ""),
            points: f.integer("points", 100, 2, 1_000_000),
            t_max: f.real("t_max", 10.0, |x| x > 0.0, "must be positive"),
            hop_probability: f.real(
                "hop_probability",
                0.0,
                |x| (0.0..=1.0).contains(&x),
                "must lie in [0, 1]",
            ),
        }),
        Scenario::Nonlinear => {
            let pair = f
                .choice("pair", &[("bell", PairKind::Bell), ("werner", PairKind::Werner)])
                .unwrap_or(PairKind::Bell);
            let werner_p = f.real("werner_p", 0.5, |x| (0.0..=1.0).contains(&x), "must lie in [0, 1]");
            let channels: Vec<(&str, &str)> = ontic_core::opendyn::WITNESS_CHANNELS.iter().map(|c| (*c, *c)).collect();
            let channel = f.choice("channel", &channels).unwrap_or("cnot").to_string();
            Params::Nonlinear(NonlinearParams {
                pair,
                werner_p,
                channel,
            })
        }
        Scenario::Verify => {
            let channel_path = f.opt_string("channel_path").map(PathBuf::from);
            if channel_path.is_none() {
                f.violations.push(missing("channel_path"));
            }
            Params::Verify(VerifyParams {
                channel_path: channel_path.unwrap_or_default(),
            })
        }
    };

    if violations.is_empty() {
        Ok(ScenarioConfig {
            scenario,
            params,
            seed,
            output_path,
            format,
        })
    } else {
        Err(ConfigError { violations })
    }
}

fn measure_params(f: &mut Fields<'_>, with_n_a: bool) -> MeasureParams {
    let subject_dim = match f.opt_parsed::<usize>("subject_dim") {
        Some(d) => {
            if !(2..=4096).contains(&d) {
                f.invalid("subject_dim", "must lie in [2, 4096]");
            }
            d
        }
        None => {
            if !f.entries.contains_key("subject_dim") {
                f.violations.push(missing("subject_dim"));
            }
            2
        }
    };
    let amplitudes = f.list::<f64>("amplitudes");
    let weights = f.list::<f64>("born_weights");
    let state = match (amplitudes, weights) {
        (Some(_), Some(_)) => {
            f.invalid("born_weights", "give either amplitudes or born_weights, not both");
            SubjectState::Uniform
        }
        (Some(a), None) => {
            let norm: f64 = a.iter().map(|x| x * x).sum();
            if a.len() != subject_dim {
                f.invalid(
                    "amplitudes",
                    &format!("has {} entries, subject_dim is {subject_dim}", a.len()),
                );
            } else if !a.iter().all(|x| x.is_finite()) || (norm - 1.0).abs() > 1e-9 {
                f.invalid("amplitudes", &format!("squared amplitudes sum to {norm}, expected 1"));
            }
            SubjectState::Amplitudes(a)
        }
        (None, Some(w)) => {
            let total: f64 = w.iter().sum();
            if w.len() != subject_dim {
                f.invalid(
                    "born_weights",
                    &format!("has {} entries, subject_dim is {subject_dim}", w.len()),
                );
            } else if w.iter().any(|x| !x.is_finite() || *x < 0.0) || (total - 1.0).abs() > 1e-9 {
                f.invalid(
                    "born_weights",
                    &format!("weights must be non-negative and sum to 1, got {total}"),
                );
            }
            SubjectState::BornWeights(w)
        }
        (None, None) => SubjectState::Uniform,
    };
    let non_negative = |x: f64| x >= 0.0;
    MeasureParams {
        subject_dim,
        state,
        n_a: if with_n_a {
            f.integer("n_a", 10, 0, 1_000_000)
        } else {
            10
        },
        n_e: f.integer("n_e", 10, 0, 1_000_000),
        gamma_a: f.real("gamma_a", 0.5, non_negative, "must be non-negative"),
        gamma_e: f.real("gamma_e", 0.5, non_negative, "must be non-negative"),
        dt: f.real("dt", 1.0, non_negative, "must be non-negative"),
        delta_deg: f.real("delta_deg", 1e-8, |x| x > 0.0, "must be positive"),
    }
}

fn missing(key: &str) -> Violation {
    Violation {
        kind: ViolationKind::Parse,
        line: None,
        column: None,
        message: format!("missing required key `{key}`"),
    }
}

fn parse_at(e: &Entry, message: String) -> Violation {
    Violation {
        kind: ViolationKind::Parse,
        line: Some(e.line),
        column: Some(e.value_col),
        message,
    }
}

/// Splits the text into entries, recording syntax errors and duplicates.
fn tokenize(text: &str, violations: &mut Vec<Violation>) -> BTreeMap<String, Entry> {
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len();
        let Some(eq) = content.find('=') else {
            violations.push(Violation {
                kind: ViolationKind::Parse,
                line: Some(line),
                column: Some(indent + 1),
                message: "expected `key = value`".into(),
            });
            continue;
        };
        let key = content[..eq].trim();
        let after = &content[eq + 1..];
        let value = after.trim();
        let value_col = eq + 2 + (after.len() - after.trim_start().len());
        let key_ok = !key.is_empty() && key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !key_ok {
            violations.push(Violation {
                kind: ViolationKind::Parse,
                line: Some(line),
                column: Some(indent + 1),
                message: format!("invalid key `{key}`"),
            });
            continue;
        }
        if value.is_empty() {
            violations.push(Violation {
                kind: ViolationKind::Parse,
                line: Some(line),
                column: Some(value_col),
                message: format!("key `{key}` has no value"),
            });
            continue;
        }
        if let Some(first) = entries.get(key) {
            violations.push(Violation {
                kind: ViolationKind::Parse,
                line: Some(line),
                column: Some(indent + 1),
                message: format!("duplicate key `{key}` on lines {} and {line}", first.line),
            });
            continue;
        }
        entries.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                line,
                key_col: indent + 1,
                value_col,
            },
        );
    }
    entries
}

/// Typed access to entries that records every failure.
struct Fields<'a> {
    entries: &'a BTreeMap<String, Entry>,
    violations: &'a mut Vec<Violation>,
}

impl Fields<'_> {
    fn opt_string(&mut self, key: &str) -> Option<String> {
        self.entries.get(key).map(|e| e.value.clone())
    }

    fn opt_parsed<T: FromStr>(&mut self, key: &str) -> Option<T>
    where
        T::Err: fmt::Display,
    {
        let e = self.entries.get(key)?;
        match e.value.parse::<T>() {
            Ok(v) => Some(v),
            Err(err) => {
                self.violations
                    .push(parse_at(e, format!("`{key}`: cannot parse `{}`: {err}", e.value)));
                None
            }
        }
    }

    fn list<T: FromStr>(&mut self, key: &str) -> Option<Vec<T>>
    where
        T::Err: fmt::Display,
    {
        let e = self.entries.get(key)?;
        let mut out = Vec::new();
        let mut offset = 0;
        for item in e.value.split(',') {
            let trimmed = item.trim();
            let col = e.value_col + offset + (item.len() - item.trim_start().len());
            offset += item.len() + 1;
            match trimmed.parse::<T>() {
                Ok(v) => out.push(v),
                Err(err) => {
                    self.violations.push(Violation {
                        kind: ViolationKind::Parse,
                        line: Some(e.line),
                        column: Some(col),
                        message: format!("`{key}`: cannot parse list item `{trimmed}`: {err}"),
                    });
                    return None;
                }
            }
        }
        Some(out)
    }

    fn choice<T: Copy>(&mut self, key: &str, options: &[(&str, T)]) -> Option<T> {
        let e = self.entries.get(key)?;
        match options.iter().find(|(name, _)| *name == e.value) {
            Some((_, v)) => Some(*v),
            None => {
                let names: Vec<_> = options.iter().map(|(n, _)| *n).collect();
                self.violations.push(parse_at(
                    e,
                    format!(
                        "`{key}`: unknown value `{}` (expected one of {})",
                        e.value,
                        names.join(", ")
                    ),
                ));
                None
            }
        }
    }

    fn invalid(&mut self, key: &str, why: &str) {
        let e = self.entries.get(key);
        self.violations.push(Violation {
            kind: ViolationKind::Validation,
            line: e.map(|e| e.line),
            column: e.map(|e| e.value_col),
            message: format!("`{key}` {why}"),
        });
    }

    /// A finite real, `default` when absent.
    fn real(&mut self, key: &str, default: f64, ok: impl Fn(f64) -> bool, why: &str) -> f64 {
        match self.opt_parsed::<f64>(key) {
            Some(x) if !x.is_finite() => {
                self.invalid(key, "must be finite");
                default
            }
            Some(x) if !ok(x) => {
                self.invalid(key, why);
                default
            }
            Some(x) => x,
            None => default,
        }
    }

    fn integer(&mut self, key: &str, default: usize, min: usize, max: usize) -> usize {
        match self.opt_parsed::<usize>(key) {
            Some(n) if n < min || n > max => {
                let why = if max == usize::MAX {
                    format!("must be at least {min}")
                } else {
                    format!("must lie in [{min}, {max}]")
                };
                self.invalid(key, &why);
                default
            }
            Some(n) => n,
            None => default,
        }
    }
}
