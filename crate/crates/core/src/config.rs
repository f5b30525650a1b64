//! Run configuration: a sectioned `key = value` text format.
//!
//! ```text
//! # comments start with '#'
//! [run]
//! model = coupled_oscillator
//! H = 0.1
//! total_time = 10
//! channel_policy = choptrey
//!
//! [solver]
//! method = rk4
//! max_step = 0.001
//!
//! [block two]
//! H = 0.2
//!
//! [channel two.x->one.x_other]
//! channel_policy = poly(1,3,0)
//! initial_value = 0
//! ```
//!
//! Every key is checked; anything unknown or malformed is rejected with its
//! line number.

use std::collections::HashSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::bench::{model, BenchmarkModel, MODEL_NAMES};
use crate::chopatt::ContextConfig;
use crate::chopoly::{PredictorSpec, WeightPower};
use crate::sim::{ChannelPolicy, InputEvaluation, MasterConfig, Method, SolverConfig};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, key: &str, message: impl Into<String>) -> Self {
        ConfigError {
            line: Some(line),
            key: Some(key.to_string()),
            message: message.into(),
        }
    }

    fn line(line: usize, message: impl Into<String>) -> Self {
        ConfigError {
            line: Some(line),
            key: None,
            message: message.into(),
        }
    }

    fn general(message: impl Into<String>) -> Self {
        ConfigError {
            line: None,
            key: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(key) = &self.key {
            write!(f, "key `{key}`: ")?;
        }
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Channel policy as written in a configuration file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyChoice {
    Zoh,
    Fixed(PredictorSpec),
    Choptrey,
}

impl PolicyChoice {
    pub fn resolve(&self, context: &ContextConfig) -> ChannelPolicy {
        match self {
            PolicyChoice::Zoh => ChannelPolicy::Zoh,
            PolicyChoice::Fixed(spec) => ChannelPolicy::Fixed(*spec),
            PolicyChoice::Choptrey => ChannelPolicy::Choptrey(context.clone()),
        }
    }
}

impl fmt::Display for PolicyChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyChoice::Zoh => write!(f, "zoh"),
            PolicyChoice::Choptrey => write!(f, "choptrey"),
            PolicyChoice::Fixed(s) => {
                write!(f, "poly({},{},{})", s.degree(), s.frame_length(), s.weight())
            }
        }
    }
}

impl FromStr for PolicyChoice {
    type Err = String;

    /// `zoh`, `choptrey`, or `poly(δ,λ,ω)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "zoh" => return Ok(PolicyChoice::Zoh),
            "choptrey" => return Ok(PolicyChoice::Choptrey),
            _ => {}
        }
        let inner = s
            .strip_prefix("poly(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| format!("unknown policy `{s}` (expected zoh, choptrey or poly(d,l,w))"))?;
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("`{s}` needs three parameters"));
        }
        let degree: usize = parts[0].parse().map_err(|_| format!("bad degree `{}`", parts[0]))?;
        let frame: usize = parts[1].parse().map_err(|_| format!("bad frame length `{}`", parts[1]))?;
        let weight: WeightPower = parts[2].parse().map_err(|e| format!("bad weight `{}`: {e}", parts[2]))?;
        PredictorSpec::new(degree, frame, weight)
            .map(PolicyChoice::Fixed)
            .map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelOverride {
    pub id: String,
    pub policy: Option<PolicyChoice>,
    pub initial_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: String,
    pub period: f64,
    pub total_time: f64,
    pub output_directory: PathBuf,
    pub seed: u64,
    pub channel_policy: PolicyChoice,
    pub execution_order: Vec<String>,
    pub input_evaluation: InputEvaluation,
    pub output_step: f64,
    pub convergence_levels: usize,
    pub convergence_policies: Vec<PolicyChoice>,
    pub solver: SolverConfig,
    pub context: ContextConfig,
    pub blocks: Vec<(String, f64)>,
    pub channels: Vec<ChannelOverride>,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Run,
    Solver,
    Context,
    Block(usize),
    Channel(usize),
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e: T::Err| ConfigError::at(line, key, format!("invalid value `{value}`: {e}")))
}

fn parse_positive(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = parse_value(line, key, value)?;
    if !(v.is_finite() && v > 0.0) {
        return Err(ConfigError::at(line, key, format!("must be positive, got {value}")));
    }
    Ok(v)
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "yes" | "on" => Ok(true),
        "false" | "no" | "off" => Ok(false),
        _ => Err(ConfigError::at(line, key, format!("expected true or false, got `{value}`"))),
    }
}

fn list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

/// Splits on commas that are not inside parentheses.
fn policy_list(line: usize, key: &str, value: &str) -> Result<Vec<PolicyChoice>, ConfigError> {
    let mut items = Vec::new();
    let mut depth = 0;
    let mut current = String::new();
    for ch in value.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                items.push(std::mem::take(&mut current));
                continue;
            }
            _ => {}
        }
        current.push(ch);
    }
    items.push(current);
    items
        .iter()
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(line, key, s))
        .collect()
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut model_name: Option<String> = None;
        let mut period = None;
        let mut total_time = None;
        let mut output_directory = PathBuf::from("out");
        let mut seed = 0u64;
        let mut channel_policy = PolicyChoice::Choptrey;
        let mut execution_order = Vec::new();
        let mut input_evaluation = InputEvaluation::Continuous;
        let mut output_step = crate::bench::OUTPUT_STEP;
        let mut convergence_levels = 4usize;
        let mut convergence_policies = vec![
            PolicyChoice::Zoh,
            PolicyChoice::Fixed(PredictorSpec::new(1, 3, WeightPower::ZERO).expect("valid")),
            PolicyChoice::Fixed(PredictorSpec::new(2, 5, WeightPower::ZERO).expect("valid")),
            PolicyChoice::Choptrey,
        ];
        let mut solver_keys: Vec<(usize, String, String)> = Vec::new();
        let mut context = ContextConfig::default();
        let mut blocks: Vec<(String, Option<f64>)> = Vec::new();
        let mut block_lines = Vec::new();
        let mut channels: Vec<ChannelOverride> = Vec::new();

        let mut section: Option<Section> = None;
        let mut seen: HashSet<(String, String)> = HashSet::new();
        let mut section_name = String::new();

        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('[') {
                let header = header
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::line(lineno, "unterminated section header"))?
                    .trim();
                let (kind, name) = match header.split_once(char::is_whitespace) {
                    Some((k, n)) => (k, Some(n.trim().to_string())),
                    None => (header, None),
                };
                section = Some(match (kind, name) {
                    ("run", None) => Section::Run,
                    ("solver", None) => Section::Solver,
                    ("context", None) => Section::Context,
                    ("block", Some(n)) => {
                        if blocks.iter().any(|(b, _)| *b == n) {
                            return Err(ConfigError::line(lineno, format!("duplicate block section `{n}`")));
                        }
                        blocks.push((n, None));
                        block_lines.push(lineno);
                        Section::Block(blocks.len() - 1)
                    }
                    ("channel", Some(n)) => {
                        if channels.iter().any(|c| c.id == n) {
                            return Err(ConfigError::line(lineno, format!("duplicate channel section `{n}`")));
                        }
                        channels.push(ChannelOverride {
                            id: n,
                            policy: None,
                            initial_value: None,
                        });
                        Section::Channel(channels.len() - 1)
                    }
                    _ => return Err(ConfigError::line(lineno, format!("unknown section `[{header}]`"))),
                });
                section_name = header.to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::line(lineno, format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let Some(sec) = section else {
                return Err(ConfigError::at(lineno, key, "key outside of any section"));
            };
            if !seen.insert((section_name.clone(), key.to_string())) {
                return Err(ConfigError::at(lineno, key, "duplicate key"));
            }
            match sec {
                Section::Run => match key {
                    "model" => {
                        if !MODEL_NAMES.contains(&value) {
                            return Err(ConfigError::at(
                                lineno,
                                key,
                                format!("unknown model `{value}` (known: {})", MODEL_NAMES.join(", ")),
                            ));
                        }
                        model_name = Some(value.to_string());
                    }
                    "H" => period = Some(parse_positive(lineno, key, value)?),
                    "total_time" => total_time = Some(parse_positive(lineno, key, value)?),
                    "output_directory" => output_directory = PathBuf::from(value),
                    "seed" => seed = parse_value(lineno, key, value)?,
                    "channel_policy" => channel_policy = parse_value(lineno, key, value)?,
                    "execution_order" => execution_order = list(value),
                    "input_evaluation" => {
                        input_evaluation = match value {
                            "continuous" => InputEvaluation::Continuous,
                            "frozen" => InputEvaluation::Frozen,
                            _ => {
                                return Err(ConfigError::at(
                                    lineno,
                                    key,
                                    format!("expected continuous or frozen, got `{value}`"),
                                ))
                            }
                        }
                    }
                    "output_step" => output_step = parse_positive(lineno, key, value)?,
                    "convergence_levels" => {
                        convergence_levels = parse_value(lineno, key, value)?;
                        if convergence_levels != 0 && convergence_levels < 4 {
                            return Err(ConfigError::at(lineno, key, "use 0 to disable or at least 4 levels"));
                        }
                    }
                    "convergence_policies" => convergence_policies = policy_list(lineno, key, value)?,
                    _ => return Err(ConfigError::at(lineno, key, "unknown key in [run]")),
                },
                Section::Solver => match key {
                    "method" | "rel_tol" | "abs_tol" | "max_step" | "min_step" | "event_tol" | "order" => {
                        solver_keys.push((lineno, key.to_string(), value.to_string()))
                    }
                    _ => return Err(ConfigError::at(lineno, key, "unknown key in [solver]")),
                },
                Section::Context => match key {
                    "history_length" => context.history_length = parse_value(lineno, key, value)?,
                    "cliff_threshold" => context.cliff_threshold = parse_value(lineno, key, value)?,
                    "weights" => {
                        context.weights = list(value)
                            .iter()
                            .map(|w| parse_value(lineno, key, w))
                            .collect::<Result<_, _>>()?
                    }
                    "decisional" => context.decisional = parse_bool(lineno, key, value)?,
                    "reset_on_flat_exit" => context.reset_on_flat_exit = parse_bool(lineno, key, value)?,
                    _ => return Err(ConfigError::at(lineno, key, "unknown key in [context]")),
                },
                Section::Block(b) => match key {
                    "H" => blocks[b].1 = Some(parse_positive(lineno, key, value)?),
                    _ => return Err(ConfigError::at(lineno, key, "unknown key in [block]")),
                },
                Section::Channel(c) => match key {
                    "channel_policy" => channels[c].policy = Some(parse_value(lineno, key, value)?),
                    "initial_value" => {
                        let v: f64 = parse_value(lineno, key, value)?;
                        if !v.is_finite() {
                            return Err(ConfigError::at(lineno, key, "must be finite"));
                        }
                        channels[c].initial_value = Some(v);
                    }
                    _ => return Err(ConfigError::at(lineno, key, "unknown key in [channel]")),
                },
            }
        }

        let model_name = model_name.ok_or_else(|| ConfigError::general("[run] model is required"))?;
        let bench = model(&model_name).expect("checked against the registry");
        context
            .validate()
            .map_err(|e| ConfigError::general(format!("[context]: {e}")))?;
        let solver = build_solver(&bench, &solver_keys)?;
        let mut resolved_blocks = Vec::with_capacity(blocks.len());
        for ((name, h), line) in blocks.into_iter().zip(block_lines) {
            let h = h.ok_or_else(|| ConfigError::line(line, format!("[block {name}] needs H")))?;
            resolved_blocks.push((name, h));
        }

        let cfg = RunConfig {
            period: period.unwrap_or(bench.default_period),
            total_time: total_time.unwrap_or(bench.total_time),
            model: model_name,
            output_directory,
            seed,
            channel_policy,
            execution_order,
            input_evaluation,
            output_step,
            convergence_levels,
            convergence_policies,
            solver,
            context,
            blocks: resolved_blocks,
            channels,
        };
        cfg.master()?;
        Ok(cfg)
    }

    pub fn benchmark(&self) -> BenchmarkModel {
        let mut m = model(&self.model).expect("model validated at parse time");
        m.total_time = self.total_time;
        m.default_period = self.period;
        m.solver = self.solver.clone();
        m
    }

    /// Master configuration with per-block and per-channel overrides applied.
    pub fn master(&self) -> Result<MasterConfig, ConfigError> {
        let bench = self.benchmark();
        let mut cfg = bench.master(self.period, self.channel_policy.resolve(&self.context));
        cfg.output_step = self.output_step;
        cfg.input_evaluation = self.input_evaluation;
        cfg.execution_order = self.execution_order.clone();
        for name in &self.execution_order {
            if bench.system.block_index(name).is_none() {
                return Err(ConfigError::general(format!("execution_order: unknown block `{name}`")));
            }
        }
        for (name, h) in &self.blocks {
            cfg.set_period(name, *h)
                .map_err(|_| ConfigError::general(format!("[block {name}]: no such block in `{}`", self.model)))?;
        }
        let names = bench.channel_names();
        for ov in &self.channels {
            let idx = names
                .iter()
                .position(|n| *n == ov.id)
                .or_else(|| ov.id.parse::<usize>().ok().filter(|&i| i < names.len()))
                .ok_or_else(|| {
                    ConfigError::general(format!(
                        "[channel {}]: no such channel (known: {})",
                        ov.id,
                        names.join(", ")
                    ))
                })?;
            if let Some(p) = &ov.policy {
                cfg.channels[idx].policy = p.resolve(&self.context);
            }
            if let Some(v) = ov.initial_value {
                cfg.channels[idx].connection.initial_value = v;
            }
        }
        crate::sim::time_to_ticks(self.total_time)
            .map_err(|e| ConfigError::general(format!("total_time: {e}")))?;
        for b in &cfg.blocks {
            crate::sim::time_to_ticks(b.period)
                .map_err(|e| ConfigError::general(format!("H of `{}`: {e}", b.model.name())))?;
        }
        crate::sim::time_to_ticks(self.output_step)
            .map_err(|e| ConfigError::general(format!("output_step: {e}")))?;
        Ok(cfg)
    }
}

fn build_solver(bench: &BenchmarkModel, keys: &[(usize, String, String)]) -> Result<SolverConfig, ConfigError> {
    let mut solver = bench.solver.clone();
    let mut order = None;
    let mut last_line = 0;
    for (line, key, value) in keys {
        let (line, key, value) = (*line, key.as_str(), value.as_str());
        last_line = line;
        match key {
            "method" => {
                solver.method = match value {
                    "rk4" => Method::Rk4,
                    "rkf45" => Method::Rkf45,
                    _ => return Err(ConfigError::at(line, key, format!("expected rk4 or rkf45, got `{value}`"))),
                }
            }
            "rel_tol" => solver.rel_tol = parse_positive(line, key, value)?,
            "abs_tol" => solver.abs_tol = parse_positive(line, key, value)?,
            "max_step" => solver.max_step = parse_positive(line, key, value)?,
            "min_step" => solver.min_step = parse_positive(line, key, value)?,
            "event_tol" => solver.event_tol = parse_positive(line, key, value)?,
            "order" => order = Some((line, parse_value::<u32>(line, key, value)?)),
            _ => unreachable!("filtered by the caller"),
        }
    }
    if let Some((line, p)) = order {
        if p != solver.order() {
            return Err(ConfigError::at(
                line,
                "order",
                format!("method has order {}, not {p}", solver.order()),
            ));
        }
    }
    solver.validate().map_err(|e| ConfigError {
        line: (last_line > 0).then_some(last_line),
        key: None,
        message: format!("[solver]: {e}"),
    })?;
    Ok(solver)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = "
[run]
model = coupled_oscillator
H = 0.05
total_time = 2
channel_policy = poly(1,3,0)

[solver]
method = rk4
max_step = 0.001
order = 4
";

    #[test]
    fn parses_basic_file() {
        let cfg = RunConfig::parse(BASIC).unwrap();
        assert_eq!(cfg.model, "coupled_oscillator");
        assert_eq!(cfg.period, 0.05);
        assert_eq!(cfg.total_time, 2.0);
        assert_eq!(cfg.solver.method, Method::Rk4);
        assert_eq!(cfg.channel_policy.to_string(), "poly(1,3,0)");
        let master = cfg.master().unwrap();
        assert_eq!(master.channels.len(), 4);
    }

    #[test]
    fn unknown_key_reports_line() {
        let text = format!("{BASIC}\n[context]\nbogus = 1\n");
        let err = RunConfig::parse(&text).unwrap_err();
        assert_eq!(err.key.as_deref(), Some("bogus"));
        assert_eq!(err.line, Some(14));
        assert!(err.to_string().starts_with("line 14: key `bogus`"));
    }

    #[test]
    fn min_step_above_max_step_rejected() {
        let text = format!("{BASIC}min_step = 0.01\n");
        let err = RunConfig::parse(&text).unwrap_err();
        assert!(err.message.contains("min_step"), "{err}");
    }

    #[test]
    fn order_must_match_method() {
        let text = BASIC.replace("order = 4", "order = 5");
        assert_eq!(RunConfig::parse(&text).unwrap_err().key.as_deref(), Some("order"));
    }

    #[test]
    fn channel_and_block_overrides() {
        let text = format!(
            "{BASIC}\n[block two]\nH = 0.1\n\n[channel two.x->one.x_other]\nchannel_policy = zoh\ninitial_value = 0.5\n"
        );
        let cfg = RunConfig::parse(&text).unwrap();
        let master = cfg.master().unwrap();
        assert_eq!(master.blocks[1].period, 0.1);
        assert_eq!(master.channels[2].policy, ChannelPolicy::Zoh);
        assert_eq!(master.channels[2].connection.initial_value, 0.5);
    }

    #[test]
    fn bad_values_rejected() {
        for (from, to) in [
            ("H = 0.05", "H = -1"),
            ("H = 0.05", "H = fast"),
            ("poly(1,3,0)", "poly(3,3,0)"),
            ("poly(1,3,0)", "cubic"),
            ("model = coupled_oscillator", "model = engine"),
            ("method = rk4", "method = euler"),
        ] {
            let text = BASIC.replace(from, to);
            assert!(RunConfig::parse(&text).is_err(), "{to}");
        }
        assert!(RunConfig::parse("[run]\nmodel = chain\n[nowhere]\n").is_err());
        assert!(RunConfig::parse("model = chain\n").is_err());
        assert!(RunConfig::parse("[run]\nmodel = chain\nmodel = chain\n").is_err());
        assert!(RunConfig::parse("[run]\nmodel = chain\n[channel nope]\ninitial_value = 1\n").is_err());
    }

    #[test]
    fn policy_round_trip() {
        for s in ["zoh", "choptrey", "poly(2,5,1/8)", "poly(0,1,2)"] {
            assert_eq!(s.parse::<PolicyChoice>().unwrap().to_string(), s);
        }
        let list = policy_list(1, "k", "zoh, poly(1,3,0), choptrey").unwrap();
        assert_eq!(list.len(), 3);
    }
}
