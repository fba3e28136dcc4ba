//! The experiments offered on the command line, registered by name.

use std::path::PathBuf;
use std::sync::{Arc, OnceLock};

use anisowave_core::bounds::{format_alpha, NormKind};
use anisowave_core::cutoff::ProfileKind;
use anisowave_core::decay::{
    run_bounds_check, run_lemma23_experiment, run_symbol_check, run_theorem31_experiment,
    run_theorem41_experiment, BoundsCheckConfig, DecayFit, ExperimentConfig, Lemma23Config,
    SymbolCheckConfig, Theorem41Config, Verdict,
};
use anisowave_core::quadrature::QuadratureSpec;
use anisowave_core::registry::Registry;
use anisowave_core::solver::{
    observable_norm, Backend, DataPreset, GridSpec, NormTableRow, PresetKind, SpectralField, Which,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::config::Config;
use crate::error::CliError;
use crate::output::{csv_text, plot_text, Artifact, Outcome, Status, REPORT_FILE};

/// A runnable experiment. `params` holds the command-specific keys with
/// shared settings already merged in; `run` returns everything to write.
pub trait Command: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    /// Merges shared settings into the command's own keys.
    fn params(&self, cfg: &Config) -> Map<String, Value> {
        cfg.params.clone()
    }
    fn run(&self, cfg: &Config, params: &Map<String, Value>) -> Result<Outcome, CliError>;
}

pub fn command_registry() -> &'static Registry<dyn Command> {
    static REG: OnceLock<Registry<dyn Command>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut reg: Registry<dyn Command> = Registry::new("command");
        reg.register("symbol-check", Arc::new(SymbolCheck));
        reg.register("bounds", Arc::new(Bounds));
        reg.register("lemma23", Arc::new(Lemma23));
        reg.register("solve", Arc::new(Solve));
        reg.register("thm31", Arc::new(Thm31));
        reg.register("thm41", Arc::new(Thm41));
        reg.register("report", Arc::new(Report));
        reg
    })
}

fn decode<T: DeserializeOwned>(command: &str, params: &Map<String, Value>) -> Result<T, CliError> {
    serde_json::from_value(Value::Object(params.clone()))
        .map_err(|e| CliError::config(format!("invalid {command} parameters: {e}")))
}

fn with_seed(cfg: &Config) -> Map<String, Value> {
    let mut m = cfg.params.clone();
    m.insert("seed".into(), Value::from(cfg.seed));
    m
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

#[derive(Serialize)]
struct SeriesRow {
    t: f64,
    value: f64,
}

fn series_rows(fit: &DecayFit) -> Vec<SeriesRow> {
    fit.times
        .iter()
        .zip(&fit.values)
        .map(|(&t, &value)| SeriesRow { t, value })
        .collect()
}

fn describe(fit: &DecayFit) -> String {
    match (fit.slope(), fit.last_local_slope()) {
        (Some(s), Some(last)) => format!(
            "slope {s:.4} (last local {last:.4}) vs theory {:.4} ± {}",
            fit.theory, fit.tolerance
        ),
        _ => "series vanishes identically".into(),
    }
}

fn grade(outcome: &mut Outcome, label: &str, fit: &DecayFit) {
    match fit.verdict {
        Verdict::Pass => {}
        Verdict::Fail => {
            let mut msg = format!("{label}: {}", describe(fit));
            if let Some(b) = fit.bound.as_ref().filter(|b| !b.stable()) {
                msg.push_str(&format!(
                    "; constant drift {:.3} under range doubling",
                    b.drift.unwrap_or(f64::NAN)
                ));
            }
            outcome.fail(Status::Fail, msg);
        }
        Verdict::Degenerate => outcome.fail(
            Status::Fail,
            format!("{label}: degenerate, {}", describe(fit)),
        ),
    }
}

pub struct SymbolCheck;

impl Command for SymbolCheck {
    fn name(&self) -> &'static str {
        "symbol-check"
    }
    fn summary(&self) -> &'static str {
        "closed-form symbol against its ODE and an RK4 oracle on seeded samples"
    }
    fn params(&self, cfg: &Config) -> Map<String, Value> {
        let mut m = with_seed(cfg);
        if m.remove("n").is_some() || !m.contains_key("dims") {
            m.insert("dims".into(), Value::from((1..=cfg.n).collect::<Vec<_>>()));
        }
        m
    }
    fn run(&self, _cfg: &Config, params: &Map<String, Value>) -> Result<Outcome, CliError> {
        let c: SymbolCheckConfig = decode(self.name(), params)?;
        let rep = run_symbol_check(&c)?;
        let mut out = Outcome::new(to_value(&rep));
        if !rep.residual_pass {
            out.fail(
                Status::Fail,
                format!(
                    "ODE residual {:e} above tolerance",
                    rep.worst_residual.value
                ),
            );
        }
        if !rep.rk4_pass {
            out.fail(
                Status::Fail,
                format!("RK4 mismatch {:e} above tolerance", rep.worst_rk4.value),
            );
        }
        #[derive(Serialize)]
        struct Row<'a> {
            check: &'a str,
            worst: f64,
            t: f64,
            xi: String,
        }
        let fmt = |xi: &[f64]| {
            xi.iter()
                .map(|x| format!("{x:e}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        out.text(
            "symbol_check.csv",
            csv_text(&[
                Row {
                    check: "ode-residual",
                    worst: rep.worst_residual.value,
                    t: rep.worst_residual.t,
                    xi: fmt(&rep.worst_residual.xi),
                },
                Row {
                    check: "rk4",
                    worst: rep.worst_rk4.value,
                    t: rep.worst_rk4.t,
                    xi: fmt(&rep.worst_rk4.xi),
                },
            ])?,
        );
        Ok(out)
    }
}

pub struct Bounds;

impl Command for Bounds {
    fn name(&self) -> &'static str {
        "bounds"
    }
    fn summary(&self) -> &'static str {
        "pointwise bounds of the symbol on seeded samples of D_r"
    }
    fn params(&self, cfg: &Config) -> Map<String, Value> {
        let mut m = with_seed(cfg);
        // a single `r` is shorthand for `r_values: [r]`
        if let Some(r) = m.remove("r") {
            m.insert("r_values".into(), Value::Array(vec![r]));
        }
        m
    }
    fn run(&self, _cfg: &Config, params: &Map<String, Value>) -> Result<Outcome, CliError> {
        let c: BoundsCheckConfig = decode(self.name(), params)?;
        let rep = run_bounds_check(&c)?;
        let mut out = Outcome::new(to_value(&rep));
        #[derive(Serialize)]
        struct Row {
            r: f64,
            m: f64,
            samples: usize,
            min_margin_g: f64,
            min_margin_gt: f64,
            pass: bool,
        }
        let rows: Vec<Row> = rep
            .per_r
            .iter()
            .map(|s| Row {
                r: s.r,
                m: s.m,
                samples: s.samples,
                min_margin_g: s.min_margin_g.value,
                min_margin_gt: s.min_margin_gt.value,
                pass: s.pass,
            })
            .collect();
        for s in rep.per_r.iter().filter(|s| !s.pass) {
            out.fail(
                Status::Fail,
                format!(
                    "r = {}: margins {:e}, {:e} below tolerance",
                    s.r, s.min_margin_g.value, s.min_margin_gt.value
                ),
            );
        }
        out.text("bounds.csv", csv_text(&rows)?);
        Ok(out)
    }
}

pub struct Lemma23;

impl Command for Lemma23 {
    fn name(&self) -> &'static str {
        "lemma23"
    }
    fn summary(&self) -> &'static str {
        "decay exponents of the weighted symbol norm table"
    }
    fn run(&self, _cfg: &Config, params: &Map<String, Value>) -> Result<Outcome, CliError> {
        let c: Lemma23Config = decode(self.name(), params)?;
        let rep = run_lemma23_experiment(&c)?;
        let mut out = Outcome::new(to_value(&rep));
        #[derive(Serialize)]
        struct FitRow {
            variant: String,
            p: &'static str,
            alpha: String,
            l: u32,
            theory: f64,
            slope: Option<f64>,
            stderr: Option<f64>,
            last_local_slope: Option<f64>,
            c_emp: Option<f64>,
            verdict: &'static str,
        }
        #[derive(Serialize)]
        struct NormRow {
            variant: String,
            p: &'static str,
            alpha: String,
            l: u32,
            t: f64,
            value: f64,
        }
        let mut fits = Vec::new();
        let mut norms = Vec::new();
        for s in &rep.series {
            let variant = format!("{:?}", s.variant);
            let alpha = format_alpha(&s.alpha);
            let label = format!("{variant} {} α={alpha} l={}", s.p.label(), s.l);
            let verdict = match (&s.fit, s.non_convergence) {
                (Some(f), _) => {
                    grade(&mut out, &label, f);
                    f.verdict.label()
                }
                (None, true) => {
                    out.fail(
                        Status::NonConvergence,
                        format!("{label}: {}", s.error.clone().unwrap_or_default()),
                    );
                    "non-convergence"
                }
                (None, false) => {
                    out.fail(
                        Status::Fail,
                        format!("{label}: {}", s.error.clone().unwrap_or_default()),
                    );
                    "error"
                }
            };
            fits.push(FitRow {
                variant: variant.clone(),
                p: s.p.label(),
                alpha: alpha.clone(),
                l: s.l,
                theory: s.theory,
                slope: s.fit.as_ref().and_then(DecayFit::slope),
                stderr: s
                    .fit
                    .as_ref()
                    .and_then(|f| f.fit.as_ref().map(|x| x.stderr)),
                last_local_slope: s.fit.as_ref().and_then(DecayFit::last_local_slope),
                c_emp: s
                    .fit
                    .as_ref()
                    .and_then(|f| f.bound.as_ref().map(|b| b.c_emp)),
                verdict,
            });
            if let Some(f) = &s.fit {
                for (&t, &value) in f.times.iter().zip(&f.values) {
                    norms.push(NormRow {
                        variant: variant.clone(),
                        p: s.p.label(),
                        alpha: alpha.clone(),
                        l: s.l,
                        t,
                        value,
                    });
                }
                let a: u32 = s.alpha.iter().sum();
                out.text(
                    format!("plot/lemma23_{variant}_{}_a{a}_l{}.dat", s.p.label(), s.l),
                    plot_text(&label, &f.times, &f.values),
                );
            }
        }
        out.text("lemma23_fits.csv", csv_text(&fits)?);
        out.text("lemma23_norms.csv", csv_text(&norms)?);
        Ok(out)
    }
}

fn default_solve_n() -> usize {
    3
}
fn default_solve_r() -> f64 {
    3.0
}
fn default_solve_grid() -> GridSpec {
    GridSpec {
        n: 3,
        extent: 32.0,
        points: 64,
    }
}
fn default_solve_preset() -> PresetKind {
    PresetKind::GaussianPair { sigma: 0.3 }
}
fn default_solve_which() -> Which {
    Which::Both
}
fn default_solve_times() -> Vec<f64> {
    vec![0.0, 0.5, 1.0, 2.0]
}
fn default_solve_norms() -> Vec<NormKind> {
    vec![NormKind::L2, NormKind::Linf]
}
fn default_solve_backends() -> Vec<Backend> {
    vec![Backend::TorusGrid, Backend::FourierSide]
}

/// Parameters of `solve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    #[serde(default = "default_solve_n")]
    pub n: usize,
    #[serde(default = "default_solve_r")]
    pub r: f64,
    #[serde(default = "default_solve_grid")]
    pub grid: GridSpec,
    #[serde(default = "default_solve_preset")]
    pub preset: PresetKind,
    #[serde(default = "default_solve_which")]
    pub which: Which,
    /// Replaces the preset by seeded random data of this band limit.
    #[serde(default)]
    pub random_band: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_solve_times")]
    pub times: Vec<f64>,
    #[serde(default)]
    pub alpha: Vec<u32>,
    #[serde(default)]
    pub l: u32,
    #[serde(default = "default_solve_norms")]
    pub norms: Vec<NormKind>,
    #[serde(default = "default_solve_backends")]
    pub backends: Vec<Backend>,
    #[serde(default)]
    pub profile: ProfileKind,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    /// Write the evolved field at the last time.
    #[serde(default)]
    pub snapshot: bool,
}

pub struct Solve;

impl Command for Solve {
    fn name(&self) -> &'static str {
        "solve"
    }
    fn summary(&self) -> &'static str {
        "evolve data on a periodic grid and tabulate solution norms"
    }
    fn params(&self, cfg: &Config) -> Map<String, Value> {
        with_seed(cfg)
    }
    fn run(&self, _cfg: &Config, params: &Map<String, Value>) -> Result<Outcome, CliError> {
        let c: SolveConfig = decode(self.name(), params)?;
        if c.grid.n != c.n {
            return Err(CliError::config(format!(
                "grid dimension {} differs from n = {}",
                c.grid.n, c.n
            )));
        }
        if c.times.is_empty() || c.times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(CliError::config(
                "times must be a non-empty list of finite t ≥ 0",
            ));
        }
        if c.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::config("times must be strictly increasing"));
        }
        let alpha = if c.alpha.is_empty() {
            vec![0; c.n]
        } else {
            c.alpha.clone()
        };
        if alpha.len() != c.n {
            return Err(CliError::config(format!("alpha needs {} entries", c.n)));
        }
        anisowave_core::cutoff::CutoffSpec::new(c.r, c.profile)?;
        c.quadrature.validate()?;
        let field = match c.random_band {
            Some(band) => SpectralField::random_band_limited(c.grid, band, c.seed)?,
            None => SpectralField::synthesize(DataPreset::new(c.preset, c.which)?, c.grid, c.r)?,
        };
        let mut rows = Vec::new();
        let mut skipped = Vec::new();
        for &t in &c.times {
            for &backend in &c.backends {
                for &q in &c.norms {
                    match observable_norm(&field, t, &alpha, c.l, q, backend, &c.quadrature) {
                        Ok(v) => rows.push(NormTableRow::new(t, &alpha, c.l, q, backend, &v)),
                        Err(anisowave_core::Error::Unsupported(msg)) => skipped.push(format!(
                            "t = {t}, {} {}: {msg}",
                            backend.registry_name(),
                            q.label()
                        )),
                        Err(e) => return Err(e.into()),
                    }
                }
            }
        }
        #[derive(Serialize)]
        struct SolveReport<'a> {
            rows: &'a [NormTableRow],
            skipped: &'a [String],
            hermitian_defect: f64,
        }
        let mut out = Outcome::new(to_value(&SolveReport {
            rows: &rows,
            skipped: &skipped,
            hermitian_defect: field.hermitian_defect(),
        }));
        out.text("norms.csv", csv_text(&rows)?);
        if c.snapshot {
            let last = *c.times.last().expect("checked non-empty");
            out.artifacts.push(Artifact::Snapshot {
                name: "snapshot".into(),
                field: Box::new(field.evolve(last)?),
            });
        }
        Ok(out)
    }
}

pub struct Thm31;

impl Command for Thm31 {
    fn name(&self) -> &'static str {
        "thm31"
    }
    fn summary(&self) -> &'static str {
        "L^p-L^q decay of solutions with band-limited data"
    }
    fn run(&self, _cfg: &Config, params: &Map<String, Value>) -> Result<Outcome, CliError> {
        let c: ExperimentConfig = decode(self.name(), params)?;
        c.validate()?;
        let fit = run_theorem31_experiment(&c)?;
        let mut out = Outcome::new(to_value(&fit));
        let label = format!(
            "{:?} α={} l={} (p,q)=({},{})",
            c.which,
            format_alpha(&c.alpha()),
            c.l,
            c.p,
            c.q
        );
        grade(&mut out, &label, &fit);
        out.text("thm31_series.csv", csv_text(&series_rows(&fit))?);
        out.text("plot/thm31.dat", plot_text(&label, &fit.times, &fit.values));
        Ok(out)
    }
}

pub struct Thm41;

impl Command for Thm41 {
    fn name(&self) -> &'static str {
        "thm41"
    }
    fn summary(&self) -> &'static str {
        "high/low frequency L1 decay of the spectrum for full-spectrum data"
    }
    fn run(&self, _cfg: &Config, params: &Map<String, Value>) -> Result<Outcome, CliError> {
        let c: Theorem41Config = decode(self.name(), params)?;
        let rep = run_theorem41_experiment(&c)?;
        let mut out = Outcome::new(to_value(&rep));
        grade(&mut out, "highpass", &rep.highpass);
        grade(&mut out, "low part", &rep.low);
        grade(&mut out, "combined proxy", &rep.combined);
        #[derive(Serialize)]
        struct Row {
            t: f64,
            highpass: f64,
            low: f64,
            combined: f64,
        }
        let rows: Vec<Row> = (0..rep.highpass.times.len())
            .map(|i| Row {
                t: rep.highpass.times[i],
                highpass: rep.highpass.values[i],
                low: rep.low.values[i],
                combined: rep.combined.values[i],
            })
            .collect();
        out.text("thm41_series.csv", csv_text(&rows)?);
        for (name, fit) in [
            ("highpass", &rep.highpass),
            ("low", &rep.low),
            ("combined", &rep.combined),
        ] {
            out.text(
                format!("plot/thm41_{name}.dat"),
                plot_text(name, &fit.times, &fit.values),
            );
        }
        Ok(out)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReportConfig {
    inputs: Vec<PathBuf>,
}

pub struct Report;

impl Command for Report {
    fn name(&self) -> &'static str {
        "report"
    }
    fn summary(&self) -> &'static str {
        "summarize the report.json files of earlier runs"
    }
    fn run(&self, _cfg: &Config, params: &Map<String, Value>) -> Result<Outcome, CliError> {
        let c: ReportConfig = decode(self.name(), params)?;
        if c.inputs.is_empty() {
            return Err(CliError::config(
                "report needs at least one input directory",
            ));
        }
        #[derive(Serialize)]
        struct Row {
            input: String,
            command: String,
            status: String,
            failures: usize,
        }
        let mut rows = Vec::new();
        let mut worst = Status::Pass;
        let mut failures = Vec::new();
        for dir in &c.inputs {
            let path = dir.join(REPORT_FILE);
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            let v: Value = serde_json::from_str(&text)
                .map_err(|e| CliError::config(format!("{}: not a report ({e})", path.display())))?;
            let status_text = v["status"].as_str().unwrap_or("");
            let status = Status::parse(status_text).ok_or_else(|| {
                CliError::config(format!("{}: missing or unknown status", path.display()))
            })?;
            worst = worst.max(status);
            let fails = v["failures"].as_array().cloned().unwrap_or_default();
            for f in &fails {
                failures.push(format!("{}: {}", dir.display(), f.as_str().unwrap_or("")));
            }
            rows.push(Row {
                input: dir.display().to_string(),
                command: v["command"].as_str().unwrap_or("").to_string(),
                status: status_text.to_string(),
                failures: fails.len(),
            });
        }
        let mut out = Outcome::new(to_value(&rows));
        for f in failures {
            out.fail(worst, f);
        }
        out.status = worst;
        out.text("summary.csv", csv_text(&rows)?);
        Ok(out)
    }
}
