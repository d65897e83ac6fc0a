//! Flat `key = value` scenario files.
//!
//! ```text
//! # coherent pair, singlet channel only
//! theory = kominis_revised
//! kS = 1
//! kT = 0
//! t_end = 20
//! initial = coherent
//! ```

use std::collections::BTreeMap;
use std::fmt;

use crate::jump::{PureState, Scheme, Stepper};
use crate::master::{ModelSpec, Theory, STABILITY_BOUND};
use crate::scalar::cr;
use crate::spin::{BasisKind, HamiltonianParams, RatePair};

/// What drives the evolution: a master equation or a trajectory scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Theory(Theory),
    Scheme(Scheme),
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Theory(t) => t.name(),
            Mode::Scheme(s) => s.name(),
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            Mode::Theory(_) => "theory",
            Mode::Scheme(_) => "scheme",
        }
    }

    /// Resolves a bare model name, preferring theories on a tie.
    pub fn parse_any(name: &str) -> Option<Self> {
        name.parse::<Theory>()
            .map(Mode::Theory)
            .or_else(|_| name.parse::<Scheme>().map(Mode::Scheme))
            .ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Singlet,
    Triplet,
    /// `(|S⟩ + |T⟩)/√2`
    Coherent,
    /// Real amplitudes in basis order.
    Amplitudes(Vec<f64>),
}

impl InitialState {
    fn parse(value: &str) -> Result<Self, String> {
        match value {
            "S" => Ok(InitialState::Singlet),
            "T" => Ok(InitialState::Triplet),
            "coherent" => Ok(InitialState::Coherent),
            _ => {
                let amps = value
                    .split(',')
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| {
                        format!(
                            "expected S, T, coherent or comma-separated amplitudes, got `{value}`"
                        )
                    })?;
                Ok(InitialState::Amplitudes(amps))
            }
        }
    }

    fn render(&self) -> String {
        match self {
            InitialState::Singlet => "S".into(),
            InitialState::Triplet => "T".into(),
            InitialState::Coherent => "coherent".into(),
            InitialState::Amplitudes(a) => a
                .iter()
                .map(|x| format!("{x:?}"))
                .collect::<Vec<_>>()
                .join(","),
        }
    }

    pub fn pure_state(&self, basis: BasisKind) -> PureState<f64> {
        match self {
            InitialState::Singlet => PureState::singlet(basis),
            InitialState::Triplet => PureState::triplet(basis),
            InitialState::Coherent => PureState::coherent(basis),
            InitialState::Amplitudes(a) => {
                let mut amps = vec![cr(0.0); basis.dim()];
                for (slot, &x) in amps.iter_mut().zip(a) {
                    *slot = cr(x);
                }
                PureState::new(amps).expect("validated at parse time")
            }
        }
    }
}

impl fmt::Display for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub mode: Mode,
    pub basis: BasisKind,
    pub j: f64,
    pub delta: f64,
    pub k_s: f64,
    pub k_t: f64,
    pub initial: InitialState,
    pub t_end: f64,
    pub dt: f64,
    pub n_traj: usize,
    pub seed: u64,
    pub output: String,
    pub output_every: usize,
}

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_N_TRAJ: usize = 1000;
pub const DEFAULT_OUTPUT: &str = "scenario";
pub const DEFAULT_OUTPUT_EVERY: usize = 10;

const KEYS: [&str; 14] = [
    "theory",
    "scheme",
    "basis",
    "J",
    "delta",
    "kS",
    "kT",
    "initial",
    "t_end",
    "dt",
    "n_traj",
    "seed",
    "output",
    "output_every",
];

impl ScenarioConfig {
    pub fn model(&self) -> ModelSpec<f64> {
        ModelSpec {
            basis: self.basis,
            hamiltonian: HamiltonianParams {
                j: self.j,
                delta: self.delta,
            },
            rates: RatePair {
                k_s: self.k_s,
                k_t: self.k_t,
            },
        }
    }

    pub fn initial_state(&self) -> PureState<f64> {
        self.initial.pure_state(self.basis)
    }

    /// Canonical text form; parses back to an equal config.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        line(self.mode.key(), self.mode.name().into());
        line("basis", self.basis.name().into());
        line("J", format!("{:?}", self.j));
        line("delta", format!("{:?}", self.delta));
        line("kS", format!("{:?}", self.k_s));
        line("kT", format!("{:?}", self.k_t));
        line("initial", self.initial.render());
        line("t_end", format!("{:?}", self.t_end));
        line("dt", format!("{:?}", self.dt));
        line("n_traj", self.n_traj.to_string());
        line("seed", self.seed.to_string());
        line("output", self.output.clone());
        line("output_every", self.output_every.to_string());
        out
    }

    /// Cross-field checks shared by the parser and by callers that build
    /// configs directly.
    pub fn validate(&self) -> Result<(), ConfigErrors> {
        let mut errs = ConfigErrors::default();
        self.check_into(&mut errs);
        errs.into_result(())
    }

    fn check_into(&self, errs: &mut ConfigErrors) {
        Fields {
            mode: Some(self.mode),
            basis: Some(self.basis),
            j: Some(self.j),
            delta: Some(self.delta),
            k_s: Some(self.k_s),
            k_t: Some(self.k_t),
            initial: Some(&self.initial),
            t_end: Some(self.t_end),
            dt: Some(self.dt),
            n_traj: Some(self.n_traj),
            output: Some(&self.output),
            output_every: Some(self.output_every),
        }
        .check(errs);
        if errs.is_empty() {
            self.check_step(errs);
        }
    }

    /// Step-size limits of the integrator or trajectory propagator.
    fn check_step(&self, errs: &mut ConfigErrors) {
        let model = self.model();
        match self.mode {
            Mode::Theory(_) => {
                let stiffness = self.dt * (model.hamiltonian().norm_inf() + self.k_s + self.k_t);
                if stiffness > STABILITY_BOUND {
                    errs.push(
                        None,
                        format!("`dt` too large: dt*(|H| + kS + kT) = {stiffness:e} exceeds {STABILITY_BOUND:e}"),
                    );
                }
            }
            Mode::Scheme(s) => {
                if let Err(e) = Stepper::new(s, &model, self.dt) {
                    errs.push(None, format!("`dt` rejected by the {s} scheme: {e}"));
                }
            }
        }
    }
}

/// Possibly incomplete field set, so that per-field checks still run when
/// other keys are missing or malformed.
struct Fields<'a> {
    mode: Option<Mode>,
    basis: Option<BasisKind>,
    j: Option<f64>,
    delta: Option<f64>,
    k_s: Option<f64>,
    k_t: Option<f64>,
    initial: Option<&'a InitialState>,
    t_end: Option<f64>,
    dt: Option<f64>,
    n_traj: Option<usize>,
    output: Option<&'a str>,
    output_every: Option<usize>,
}

impl Fields<'_> {
    fn check(&self, errs: &mut ConfigErrors) {
        for (name, v) in [("J", self.j), ("delta", self.delta)] {
            if let Some(v) = v.filter(|v| !v.is_finite()) {
                errs.push(None, format!("`{name}` must be finite, got {v}"));
            }
        }
        for (name, v) in [("kS", self.k_s), ("kT", self.k_t)] {
            if let Some(v) = v.filter(|v| !(*v >= 0.0) || !v.is_finite()) {
                errs.push(
                    None,
                    format!("`{name}` must be a finite rate >= 0, got {v}"),
                );
            }
        }
        if let Some(dt) = self.dt.filter(|v| !(*v > 0.0) || !v.is_finite()) {
            errs.push(None, format!("`dt` must be > 0, got {dt}"));
        }
        if let Some(t_end) = self.t_end {
            if !(t_end >= self.dt.unwrap_or(0.0)) || !(t_end > 0.0) || !t_end.is_finite() {
                errs.push(
                    None,
                    format!("`t_end` must be finite, positive and >= dt, got {t_end}"),
                );
            }
        }
        if self.n_traj == Some(0) {
            errs.push(None, "`n_traj` must be >= 1".into());
        }
        if self.output_every == Some(0) {
            errs.push(None, "`output_every` must be >= 1".into());
        }
        if let Some(out) = self
            .output
            .filter(|o| o.is_empty() || o.contains(['/', '\\']))
        {
            errs.push(
                None,
                format!("`output` must be a plain file-name prefix, got `{out}`"),
            );
        }
        if let (Some(InitialState::Amplitudes(a)), Some(basis)) = (self.initial, self.basis) {
            if a.len() != 2 && a.len() != basis.dim() {
                errs.push(
                    None,
                    format!(
                        "`initial` needs 2 or {} amplitudes, got {}",
                        basis.dim(),
                        a.len()
                    ),
                );
            } else {
                let n2: f64 = a.iter().map(|x| x * x).sum();
                if !n2.is_finite() || (n2 - 1.0).abs() > 1e-9 {
                    errs.push(
                        None,
                        format!(
                            "`initial` amplitudes must be normalized within 1e-9, norm² = {n2}"
                        ),
                    );
                }
            }
        }
        if let (Some(Mode::Theory(t)), Some(BasisKind::FourLevelSTProducts)) =
            (self.mode, self.basis)
        {
            if !matches!(t, Theory::Haberkorn | Theory::JonesHore) {
                errs.push(
                    None,
                    format!("basis four_level supports theory haberkorn or jones_hore, not {t}"),
                );
            }
        }
        if self.mode == Some(Mode::Scheme(Scheme::Kominis)) && self.k_t.is_some_and(|k| k != 0.0) {
            errs.push(None, "Kominis scheme requires kT=0".into());
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "line {n}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Every problem found in a config, in discovery order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl ConfigErrors {
    fn push(&mut self, line: Option<usize>, message: String) {
        self.0.push(ConfigError { line, message });
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ConfigError> {
        self.0.iter()
    }

    fn into_result<V>(self, v: V) -> Result<V, ConfigErrors> {
        if self.is_empty() {
            Ok(v)
        } else {
            Err(self)
        }
    }
}

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

struct Raw<'a> {
    values: BTreeMap<&'a str, (usize, &'a str)>,
    errs: ConfigErrors,
}

impl<'a> Raw<'a> {
    fn take<V>(
        &mut self,
        key: &str,
        parse: impl FnOnce(&str) -> Result<V, String>,
    ) -> Option<Option<V>> {
        let (line, text) = self.values.remove(key)?;
        match parse(text) {
            Ok(v) => Some(Some(v)),
            Err(msg) => {
                self.errs.push(Some(line), format!("`{key}`: {msg}"));
                Some(None)
            }
        }
    }

    fn required<V>(
        &mut self,
        key: &str,
        parse: impl FnOnce(&str) -> Result<V, String>,
    ) -> Option<V> {
        match self.take(key, parse) {
            Some(v) => v,
            None => {
                self.errs
                    .push(None, format!("missing required key `{key}`"));
                None
            }
        }
    }

    fn optional<V>(
        &mut self,
        key: &str,
        default: V,
        parse: impl FnOnce(&str) -> Result<V, String>,
    ) -> Option<V> {
        self.take(key, parse).unwrap_or(Some(default))
    }
}

fn real(s: &str) -> Result<f64, String> {
    s.parse::<f64>()
        .map_err(|_| format!("expected a number, got `{s}`"))
}

fn count(s: &str) -> Result<usize, String> {
    s.parse::<usize>()
        .map_err(|_| format!("expected a non-negative integer, got `{s}`"))
}

fn basis(s: &str) -> Result<BasisKind, String> {
    match s {
        "two_level" => Ok(BasisKind::TwoLevelST),
        "four_level" => Ok(BasisKind::FourLevelSTProducts),
        _ => Err(format!("expected two_level or four_level, got `{s}`")),
    }
}

/// Parses and validates a scenario file, reporting every error found.
pub fn parse_config(text: &[u8]) -> Result<ScenarioConfig, ConfigErrors> {
    let text = std::str::from_utf8(text).map_err(|e| {
        ConfigErrors(vec![ConfigError {
            line: None,
            message: format!("config is not valid UTF-8: {e}"),
        }])
    })?;
    let mut raw = Raw {
        values: BTreeMap::new(),
        errs: ConfigErrors::default(),
    };
    for (idx, full) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = full.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            raw.errs.push(
                Some(line_no),
                format!("expected `key = value`, got `{content}`"),
            );
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            raw.errs.push(Some(line_no), format!("unknown key `{key}`"));
            continue;
        }
        if let Some((first, _)) = raw.values.insert(key, (line_no, value)) {
            raw.errs.push(
                Some(line_no),
                format!("duplicate key `{key}` (first set on line {first})"),
            );
        }
    }

    let theory = raw.take("theory", |s| s.parse::<Theory>());
    let scheme = raw.take("scheme", |s| s.parse::<Scheme>());
    let mode = match (theory, scheme) {
        (Some(t), None) => t.map(Mode::Theory),
        (None, Some(s)) => s.map(Mode::Scheme),
        (Some(_), Some(_)) => {
            raw.errs.push(
                None,
                "set exactly one of `theory` or `scheme`, not both".into(),
            );
            None
        }
        (None, None) => {
            raw.errs
                .push(None, "missing required key `theory` or `scheme`".into());
            None
        }
    };
    let basis = raw.optional("basis", BasisKind::TwoLevelST, basis);
    let j = raw.optional("J", 0.0, real);
    let delta = raw.optional("delta", 0.0, real);
    let k_s = raw.required("kS", real);
    let k_t = raw.required("kT", real);
    let initial = raw.required("initial", InitialState::parse);
    let t_end = raw.required("t_end", real);
    let dt = raw.optional("dt", DEFAULT_DT, real);
    let n_traj = raw.optional("n_traj", DEFAULT_N_TRAJ, count);
    let seed = raw.optional("seed", 0u64, |s| {
        s.parse::<u64>()
            .map_err(|_| format!("expected an unsigned 64-bit integer, got `{s}`"))
    });
    let output = raw.optional("output", DEFAULT_OUTPUT.to_string(), |s| Ok(s.to_string()));
    let output_every = raw.optional("output_every", DEFAULT_OUTPUT_EVERY, count);

    let mut errs = raw.errs;
    Fields {
        mode,
        basis,
        j,
        delta,
        k_s,
        k_t,
        initial: initial.as_ref(),
        t_end,
        dt,
        n_traj,
        output: output.as_deref(),
        output_every,
    }
    .check(&mut errs);
    let (
        Some(mode),
        Some(basis),
        Some(j),
        Some(delta),
        Some(k_s),
        Some(k_t),
        Some(initial),
        Some(t_end),
        Some(dt),
        Some(n_traj),
        Some(seed),
        Some(output),
        Some(output_every),
    ) = (
        mode,
        basis,
        j,
        delta,
        k_s,
        k_t,
        initial,
        t_end,
        dt,
        n_traj,
        seed,
        output,
        output_every,
    )
    else {
        return Err(errs);
    };
    let config = ScenarioConfig {
        mode,
        basis,
        j,
        delta,
        k_s,
        k_t,
        initial,
        t_end,
        dt,
        n_traj,
        seed,
        output,
        output_every,
    };
    if errs.is_empty() {
        config.check_step(&mut errs);
    }
    errs.into_result(config)
}
