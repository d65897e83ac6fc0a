use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use super::config::{ConfigErrors, Mode, ScenarioConfig};
use crate::error::Error;
use crate::jump::{integrate_lindblad, run_ensemble, EnsembleSettings, PureState, Scheme};
use crate::linalg::CMatrix;
use crate::master::{coherence_measure, integrate, rhs, DensityMatrix, ModelSpec, Theory};
use crate::observables::{populations, yields_from_ensemble, yields_from_trace, YieldReport};
use crate::spin::{
    measurement_lindblads, reaction_lindblads, BasisKind, HamiltonianParams, RatePair,
};

pub const CSV_HEADER: &str = "time,p_s,p_t,coh_mag,trace,rho_coh,flux_s,flux_t";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid configuration:\n{0}")]
    Validation(ConfigErrors),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("numerical abort: {0}")]
    Numerical(#[from] Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Validation(_) | RunError::Io { .. } => 1,
            RunError::Numerical(_) => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow {
    pub time: f64,
    pub p_s: f64,
    pub p_t: f64,
    pub coh_mag: f64,
    pub trace: f64,
    pub rho_coh: f64,
    pub flux_s: f64,
    pub flux_t: f64,
}

impl SeriesRow {
    fn from_rho(time: f64, rho: &CMatrix<f64>, model: &ModelSpec<f64>) -> Result<Self, Error> {
        let (qs, qt) = model.projectors();
        let (p_s, p_t, coh_mag) = populations(rho, &qs, &qt)?;
        Ok(Self {
            time,
            p_s,
            p_t,
            coh_mag,
            trace: rho.trace().re,
            rho_coh: coherence_measure(rho, &qs, &qt),
            flux_s: model.rates.k_s * p_s,
            flux_t: model.rates.k_t * p_t,
        })
    }

    fn write_csv(&self, out: &mut String) {
        let f = [
            self.time,
            self.p_s,
            self.p_t,
            self.coh_mag,
            self.trace,
            self.rho_coh,
            self.flux_s,
            self.flux_t,
        ];
        for (i, v) in f.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{v:.16e}").unwrap();
        }
        out.push('\n');
    }
}

/// In-memory result of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutput {
    pub rows: Vec<SeriesRow>,
    pub yields: YieldReport<f64>,
    pub summary: Map<String, Value>,
}

impl ScenarioOutput {
    pub fn csv(&self) -> String {
        let mut out = String::with_capacity(200 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            row.write_csv(&mut out);
        }
        out
    }

    pub fn json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&Value::Object(self.summary.clone()))
            .expect("plain JSON values");
        s.push('\n');
        s
    }

    pub fn final_row(&self) -> &SeriesRow {
        self.rows.last().expect("scenarios record at least t = 0")
    }
}

fn parameter_echo(config: &ScenarioConfig) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert(config.mode.key().into(), json!(config.mode.name()));
    m.insert("basis".into(), json!(config.basis.name()));
    m.insert("J".into(), json!(config.j));
    m.insert("delta".into(), json!(config.delta));
    m.insert("kS".into(), json!(config.k_s));
    m.insert("kT".into(), json!(config.k_t));
    m.insert("initial".into(), json!(config.initial.to_string()));
    m.insert("t_end".into(), json!(config.t_end));
    m.insert("dt".into(), json!(config.dt));
    m.insert("output_every".into(), json!(config.output_every));
    m.insert("seed".into(), json!(config.seed));
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    m
}

fn simulate_theory(config: &ScenarioConfig, theory: Theory) -> Result<ScenarioOutput, Error> {
    let model = config.model();
    let rho0 = DensityMatrix::new(config.initial_state().density_matrix())?;
    let trace = match config.basis {
        BasisKind::TwoLevelST => integrate(theory, &model, &rho0, config.t_end, config.dt)?,
        BasisKind::FourLevelSTProducts => {
            let lindblads = match theory {
                Theory::Haberkorn => reaction_lindblads(model.rates).to_vec(),
                Theory::JonesHore => measurement_lindblads(model.rates).to_vec(),
                other => {
                    return Err(Error::Unsupported(format!(
                        "four_level basis with theory {other}"
                    )))
                }
            };
            integrate_lindblad(&model, &lindblads, &rho0, config.t_end, config.dt)?
        }
    };
    let mut yields = yields_from_trace(&trace)?;
    let rows = trace
        .times
        .iter()
        .zip(&trace.states)
        .step_by(config.output_every)
        .map(|(&t, rho)| SeriesRow::from_rho(t, rho.matrix(), &model))
        .collect::<Result<Vec<_>, _>>()?;
    let last = SeriesRow::from_rho(
        *trace.times.last().unwrap(),
        trace.last().unwrap().matrix(),
        &model,
    )?;
    // the four-level trace includes the products; survival means the pair
    yields.survival = last.p_s + last.p_t;

    let mut summary = parameter_echo(config);
    summary.insert("method".into(), json!("ode_flux_integration"));
    summary.insert("steps".into(), json!(trace.len() - 1));
    insert_outcome(&mut summary, &yields, &last);
    Ok(ScenarioOutput {
        rows,
        yields,
        summary,
    })
}

fn simulate_scheme(config: &ScenarioConfig, scheme: Scheme) -> Result<ScenarioOutput, Error> {
    let model = config.model();
    let psi0: PureState<f64> = config.initial_state();
    let settings = EnsembleSettings {
        n_traj: config.n_traj,
        t_end: config.t_end,
        dt: config.dt,
        seed: config.seed,
        record_every: config.output_every,
    };
    let result = run_ensemble(scheme, &model, &psi0, &settings)?;
    let yields = yields_from_ensemble(&result);
    let rows = result
        .times
        .iter()
        .zip(&result.mean_rho)
        .map(|(&t, rho)| SeriesRow::from_rho(t, rho, &model))
        .collect::<Result<Vec<_>, _>>()?;
    let last = *rows.last().expect("at least one record");

    let n = result.n_traj as f64;
    let binomial = |p: f64| (p * (1.0 - p) / n).sqrt();
    let mut summary = parameter_echo(config);
    summary.insert("method".into(), json!("trajectory_counting"));
    summary.insert("n_traj".into(), json!(result.n_traj));
    summary.insert("singlet_count".into(), json!(result.singlet_count));
    summary.insert("triplet_count".into(), json!(result.triplet_count));
    summary.insert("survivor_count".into(), json!(result.survivor_count));
    summary.insert(
        "projections_to_singlet".into(),
        json!(result.projections_to_singlet),
    );
    summary.insert(
        "projections_to_triplet".into(),
        json!(result.projections_to_triplet),
    );
    summary.insert(
        "singlet_yield_stderr".into(),
        json!(binomial(yields.singlet_yield)),
    );
    summary.insert(
        "triplet_yield_stderr".into(),
        json!(binomial(yields.triplet_yield)),
    );
    insert_outcome(&mut summary, &yields, &last);
    Ok(ScenarioOutput {
        rows,
        yields,
        summary,
    })
}

fn insert_outcome(summary: &mut Map<String, Value>, yields: &YieldReport<f64>, last: &SeriesRow) {
    summary.insert("singlet_yield".into(), json!(yields.singlet_yield));
    summary.insert("triplet_yield".into(), json!(yields.triplet_yield));
    summary.insert("survival".into(), json!(yields.survival));
    summary.insert("final_p_s".into(), json!(last.p_s));
    summary.insert("final_p_t".into(), json!(last.p_t));
    summary.insert("final_coh_mag".into(), json!(last.coh_mag));
}

/// Runs a scenario in memory.
pub fn simulate(config: &ScenarioConfig) -> Result<ScenarioOutput, RunError> {
    config.validate().map_err(RunError::Validation)?;
    let out = match config.mode {
        Mode::Theory(t) => simulate_theory(config, t)?,
        Mode::Scheme(s) => simulate_scheme(config, s)?,
    };
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub csv_path: PathBuf,
    pub json_path: PathBuf,
    pub output: ScenarioOutput,
}

fn write_file(path: &Path, contents: &str) -> Result<(), RunError> {
    fs::write(path, contents).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn ensure_dir(dir: &Path) -> Result<(), RunError> {
    fs::create_dir_all(dir).map_err(|source| RunError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

/// Runs a scenario and writes `<output>.csv` and `<output>.json` into
/// `out_dir`.
pub fn run_scenario(config: &ScenarioConfig, out_dir: &Path) -> Result<RunReport, RunError> {
    let output = simulate(config)?;
    ensure_dir(out_dir)?;
    let csv_path = out_dir.join(format!("{}.csv", config.output));
    let json_path = out_dir.join(format!("{}.json", config.output));
    write_file(&csv_path, &output.csv())?;
    write_file(&json_path, &output.json())?;
    Ok(RunReport {
        csv_path,
        json_path,
        output,
    })
}

fn column_label(mode: Mode) -> String {
    match mode {
        Mode::Theory(t) => t.name().to_string(),
        Mode::Scheme(s) => format!("mc_{}", s.name()),
    }
}

#[derive(Debug, Clone)]
pub struct CompareReport {
    pub csv_path: PathBuf,
    pub json_path: PathBuf,
    pub labels: Vec<String>,
    pub outputs: Vec<ScenarioOutput>,
}

impl CompareReport {
    /// Fixed-width yield table for terminal output.
    pub fn table(&self) -> String {
        let mut s = format!(
            "{:<24} {:>12} {:>12} {:>12}\n",
            "model", "Y_S", "Y_T", "survival"
        );
        for (label, out) in self.labels.iter().zip(&self.outputs) {
            let y = &out.yields;
            writeln!(
                s,
                "{label:<24} {:>12.6} {:>12.6} {:>12.6}",
                y.singlet_yield, y.triplet_yield, y.survival
            )
            .unwrap();
        }
        s
    }
}

/// Runs the scenario once per mode and writes a joined time series
/// `<output>_compare.csv` plus a yield summary `<output>_compare.json`.
pub fn compare(
    config: &ScenarioConfig,
    modes: &[Mode],
    out_dir: &Path,
) -> Result<CompareReport, RunError> {
    if modes.is_empty() {
        return Err(RunError::Validation(ConfigErrors(vec![
            super::config::ConfigError {
                line: None,
                message: "compare needs at least one theory".into(),
            },
        ])));
    }
    let mut labels = Vec::new();
    let mut outputs = Vec::new();
    for &mode in modes {
        let cfg = ScenarioConfig {
            mode,
            ..config.clone()
        };
        outputs.push(simulate(&cfg)?);
        labels.push(column_label(mode));
    }

    let mut csv = String::from("time");
    for label in &labels {
        write!(csv, ",p_s_{label},p_t_{label},coh_mag_{label}").unwrap();
    }
    csv.push('\n');
    let n_rows = outputs.iter().map(|o| o.rows.len()).min().unwrap_or(0);
    for i in 0..n_rows {
        write!(csv, "{:.16e}", outputs[0].rows[i].time).unwrap();
        for o in &outputs {
            let r = &o.rows[i];
            write!(csv, ",{:.16e},{:.16e},{:.16e}", r.p_s, r.p_t, r.coh_mag).unwrap();
        }
        csv.push('\n');
    }

    let mut summary = parameter_echo(config);
    summary.remove(config.mode.key());
    for (label, out) in labels.iter().zip(&outputs) {
        summary.insert(
            label.clone(),
            json!({
                "singlet_yield": out.yields.singlet_yield,
                "triplet_yield": out.yields.triplet_yield,
                "survival": out.yields.survival,
                "final_p_t": out.final_row().p_t,
            }),
        );
    }
    let mut json_text =
        serde_json::to_string_pretty(&Value::Object(summary)).expect("plain JSON values");
    json_text.push('\n');

    ensure_dir(out_dir)?;
    let csv_path = out_dir.join(format!("{}_compare.csv", config.output));
    let json_path = out_dir.join(format!("{}_compare.json", config.output));
    write_file(&csv_path, &csv)?;
    write_file(&json_path, &json_text)?;
    Ok(CompareReport {
        csv_path,
        json_path,
        labels,
        outputs,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfTestCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, value: f64, bound: f64) -> SelfTestCheck {
    SelfTestCheck {
        name,
        passed: value <= bound,
        detail: format!("{value:.3e} <= {bound:.0e}"),
    }
}

/// Quick invariant checks on small scenarios.
pub fn selftest() -> Result<Vec<SelfTestCheck>, RunError> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let two = BasisKind::TwoLevelST;
    let mut checks = Vec::new();

    let mut worst_a: f64 = 0.0;
    let mut worst_b: f64 = 0.0;
    for _ in 0..20 {
        let model = ModelSpec {
            basis: two,
            hamiltonian: HamiltonianParams {
                j: rng.gen_range(-1.0..1.0),
                delta: rng.gen_range(-1.0..1.0),
            },
            rates: RatePair {
                k_s: rng.gen_range(0.0..2.0),
                k_t: rng.gen_range(0.0..2.0),
            },
        };
        let h = model.hamiltonian();
        let (qs, qt) = model.projectors();
        let (a, b) = (rng.gen_range(0.0..1.0f64), rng.gen_range(0.0..1.0f64));
        let diag = CMatrix::from_real_diag(&[a / (a + b + 1.0), b / (a + b + 1.0)]);
        let gap = &rhs(Theory::KominisRevised, &diag, &h, model.rates, &qs, &qt)?
            - &rhs(Theory::Haberkorn, &diag, &h, model.rates, &qs, &qt)?;
        worst_a = worst_a.max(gap.max_abs());

        let equal = RatePair {
            k_s: model.rates.k_s,
            k_t: model.rates.k_s,
        };
        let theta = rng.gen_range(0.1..1.4f64);
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        let psi = PureState::new(vec![
            crate::scalar::cr(theta.cos()),
            crate::scalar::c(theta.sin() * phi.cos(), theta.sin() * phi.sin()),
        ])?;
        let rho = psi.density_matrix();
        let gap = &rhs(Theory::KominisRevised, &rho, &h, equal, &qs, &qt)?
            - &rhs(Theory::JonesHore, &rho, &h, equal, &qs, &qt)?;
        worst_b = worst_b.max(gap.max_abs());
    }
    checks.push(check(
        "kominis_revised_equals_haberkorn_without_coherence",
        worst_a,
        1e-12,
    ));
    checks.push(check(
        "kominis_revised_equals_jones_hore_for_equal_rates",
        worst_b,
        1e-12,
    ));

    let dark = |theory| -> Result<f64, RunError> {
        let model = ModelSpec::two_level(0.0, 0.0, 1.0, 0.0)?;
        let rho0 = DensityMatrix::new(PureState::<f64>::coherent(two).density_matrix())?;
        let y = yields_from_trace(&integrate(theory, &model, &rho0, 20.0, 1e-3)?)?;
        Ok((y.singlet_yield - 0.5).abs().max((y.survival - 0.5).abs()))
    };
    checks.push(check(
        "haberkorn_dark_triplet",
        dark(Theory::Haberkorn)?,
        1e-4,
    ));
    checks.push(check(
        "jones_hore_dark_triplet",
        dark(Theory::JonesHore)?,
        1e-4,
    ));

    let model = ModelSpec::two_level(0.5, 0.3, 1.0, 0.5)?;
    let rho0 = DensityMatrix::new(PureState::<f64>::singlet(two).density_matrix())?;
    let th = integrate(Theory::Haberkorn, &model, &rho0, 2.0, 1e-3)?;
    let tj = integrate(Theory::JonesHore, &model, &rho0, 2.0, 1e-3)?;
    let yh = yields_from_trace(&th)?;
    let yj = yields_from_trace(&tj)?;
    checks.push(check(
        "yield_accounting",
        (yh.total() - 1.0).abs().max((yj.total() - 1.0).abs()),
        1e-6,
    ));

    let settings = EnsembleSettings {
        n_traj: 300,
        t_end: 1.0,
        dt: 1e-3,
        seed: 7,
        record_every: 50,
    };
    let psi0 = PureState::<f64>::coherent(two);
    let first = run_ensemble(Scheme::JonesHore, &model, &psi0, &settings)?;
    let second = run_ensemble(Scheme::JonesHore, &model, &psi0, &settings)?;
    checks.push(SelfTestCheck {
        name: "ensemble_determinism",
        passed: first == second,
        detail: format!("{} trajectories, seed {}", settings.n_traj, settings.seed),
    });
    Ok(checks)
}
