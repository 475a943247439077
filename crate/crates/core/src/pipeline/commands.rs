use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::csv_io::{format_number, read_trace_auto, render_series, render_trace, Ingested, Quantity, TemperatureSeries};
use super::report::{generation_time, input_digest, FitReport};
use super::svg::{Plot, Series};
use super::{ExperimentConfig, ExperimentKind, PipelineError, Result};
use crate::dynamics::{
    add_readout_noise, sigma_from_t2_star, simulate_echo, simulate_odmr, simulate_rabi, simulate_ramsey, simulate_t1,
    NoiseChannels,
};
use crate::fitting::{fit, initial_guess, FitProblem, FitResult, Model, ModelKind};
use crate::par::{map_slice, Execution};
use crate::signals::EseemParams;
use crate::spin_model::{transition_frequencies, zfs_from_resonances};
use crate::temperature::{evaluate_d, invert_d_to_temperature, ZfsModel};
use crate::trace::{linspace, SignalTrace};

/// Default 1/T1 window for the linear (direct-process) regime, kelvin.
pub const DEFAULT_LINEAR_WINDOW: (f64, f64) = (5.0, 200.0);
/// Default 1/T1 window for the Raman regime, kelvin.
pub const DEFAULT_RAMAN_WINDOW: (f64, f64) = (250.0, 300.0);

const CURVE_POINTS: usize = 600;

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| PipelineError::io(path, e))
}

#[derive(Debug, Clone)]
pub struct SimulateOutput {
    pub trace: SignalTrace,
    pub provenance: Vec<(String, String)>,
    /// The CSV text (header, provenance and data).
    pub csv: String,
}

/// Runs the experiment described by `config`; writes the trace when `config.output` is set.
pub fn cmd_simulate(config: &ExperimentConfig) -> Result<SimulateOutput> {
    let spin = config.spin()?;
    let noise = NoiseChannels {
        quasi_static_detuning_sigma: config.t2_star_us.map_or(0.0, sigma_from_t2_star),
        t1: config.t1_us.unwrap_or(f64::INFINITY),
        t2_pure: config.t2_us.unwrap_or(f64::INFINITY),
        mc_shots: config.mc_shots,
        rng_seed: config.seed,
        readout_sigma: config.readout_sigma,
        execution: config.execution,
    };
    let grid = config.grid.values();
    let trace = match config.kind {
        ExperimentKind::Ramsey => simulate_ramsey(&grid, &spin, &noise, config.detuning_mhz, config.rabi_rad_per_us)?,
        ExperimentKind::Echo => {
            let eseem = (config.eseem_b > 0.0 || config.eseem_c > 0.0).then_some(EseemParams {
                a: 1.0,
                t2: f64::INFINITY,
                b_depth: config.eseem_b,
                c_depth: config.eseem_c,
                f1: config.eseem_f1_mhz,
                f2: config.eseem_f2_mhz,
                d_offset: 0.0,
            });
            simulate_echo(&grid, &spin, &noise, config.rabi_rad_per_us, eseem.as_ref())?
        }
        ExperimentKind::Rabi => simulate_rabi(&grid, &spin, &noise, config.rabi_rad_per_us, config.detuning_mhz)?,
        ExperimentKind::Odmr => {
            let clean = simulate_odmr(&grid, &spin, config.linewidth_mhz, config.contrasts)?;
            let (x, mut y, _) = clean.into_parts();
            add_readout_noise(&mut y, config.readout_sigma, config.seed);
            SignalTrace::new(x, y, None, "frequency_mhz", "delta_pl")?
        }
        ExperimentKind::T1 => simulate_t1(
            &grid,
            config.t1_us.expect("t1 experiment has a default T1"),
            config.contrast,
            config.offset,
            config.readout_sigma,
            config.seed,
        )?,
    };
    let (w1, w2) = transition_frequencies(&spin);
    let mut provenance = vec![
        ("generator".to_string(), "sicspin simulate".to_string()),
        ("data".to_string(), "synthetic".to_string()),
    ];
    provenance.extend(config.provenance());
    provenance.push(("omega1_mhz".into(), format_number(w1)));
    provenance.push(("omega2_mhz".into(), format_number(w2)));
    let csv = render_trace(&trace, &provenance);
    if let Some(out) = &config.output {
        write_file(out, &csv)?;
    }
    Ok(SimulateOutput { trace, provenance, csv })
}

#[derive(Debug, Clone)]
pub struct FitOptions {
    pub model: ModelKind,
    /// Replace heuristic starting values by name.
    pub guess_overrides: Vec<(String, f64)>,
    /// Parameters to free (e.g. the ESEEM Larmor frequencies).
    pub free: Vec<String>,
    /// Parameters to hold at their starting value.
    pub fix: Vec<String>,
    /// Restrict the abscissa to `[lo, hi]`.
    pub window: Option<(f64, f64)>,
    pub report_path: Option<PathBuf>,
    pub svg_path: Option<PathBuf>,
}

impl FitOptions {
    pub fn new(model: ModelKind) -> Self {
        Self {
            model,
            guess_overrides: Vec::new(),
            free: Vec::new(),
            fix: Vec::new(),
            window: None,
            report_path: None,
            svg_path: None,
        }
    }
}

fn param_index(model: &ModelKind, name: &str) -> Result<usize> {
    model.param_names().iter().position(|n| *n == name).ok_or_else(|| {
        PipelineError::Validation(format!(
            "model `{model}` has no parameter `{name}` (parameters: {})",
            model.param_names().join(", ")
        ))
    })
}

/// Extracts the trace a model applies to from a parsed input file.
fn trace_for_model(input: Ingested, model: &ModelKind) -> Result<SignalTrace> {
    let (x_unit, y_unit) = model.units();
    let trace = match input {
        Ingested::Trace(t) => t,
        Ingested::Series(s) => {
            let t = match y_unit {
                "d_mhz" => s.trace(Quantity::D),
                "rate_per_ms" => s.relaxation_rate_trace(),
                _ => None,
            };
            t.ok_or_else(|| {
                PipelineError::Validation(format!("temperature series has no rows usable by model `{model}`"))
            })?
        }
    };
    if trace.x_unit != x_unit || trace.y_unit != y_unit {
        return Err(PipelineError::Validation(format!(
            "model `{model}` expects columns `{x_unit},{y_unit}`, input has `{},{}`",
            trace.x_unit, trace.y_unit
        )));
    }
    Ok(trace)
}

fn fit_problem(model: ModelKind, data: &SignalTrace, overrides: &[(String, f64)]) -> Result<FitProblem> {
    let mut guess = initial_guess(&model, data)?;
    for (name, value) in overrides {
        guess[param_index(&model, name)?] = *value;
    }
    let bounds = model.default_bounds();
    for (g, (lo, hi)) in guess.iter_mut().zip(&bounds) {
        *g = g.clamp(*lo, *hi);
    }
    Ok(FitProblem::for_kind(model, guess))
}

/// `(name, value, standard error)` for quantities computed from the fit.
fn derived_quantities(model: &ModelKind, r: &FitResult) -> Result<Vec<(String, f64, f64)>> {
    match model {
        ModelKind::Lorentzian2 => {
            let (i, j) = if r.parameters[0] <= r.parameters[3] { (0, 3) } else { (3, 0) };
            let (w1, w2) = (r.parameters[i], r.parameters[j]);
            let c = &r.covariance;
            let d = zfs_from_resonances(w1, w2)?;
            let d_err = 0.5 * (c[(i, i)] + c[(j, j)] + 2.0 * c[(i, j)]).max(0.0).sqrt();
            Ok(vec![
                ("omega1_mhz".into(), w1, r.standard_errors[i]),
                ("omega2_mhz".into(), w2, r.standard_errors[j]),
                ("d_mhz".into(), d, d_err),
            ])
        }
        ModelKind::T1Decay => {
            let (t1, e) = (r.parameters[1], r.standard_errors[1]);
            Ok(vec![("rate_per_ms".into(), 1000.0 / t1, 1000.0 * e / (t1 * t1))])
        }
        _ => Ok(Vec::new()),
    }
}

fn curve(model: &ModelKind, params: &[f64], lo: f64, hi: f64) -> Vec<(f64, f64)> {
    linspace(lo, hi, CURVE_POINTS).into_iter().map(|x| (x, model.eval(x, params))).collect()
}

fn points(trace: &SignalTrace) -> Vec<(f64, f64)> {
    trace.x().iter().copied().zip(trace.y().iter().copied()).collect()
}

/// Fits `opts.model` to the trace at `path` and writes the report (and plot) when requested.
///
/// A fit that stops at the iteration limit still yields a report, with
/// `converged = false`; callers decide how to signal it.
pub fn cmd_fit(path: impl AsRef<Path>, opts: &FitOptions) -> Result<FitReport> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| PipelineError::io(path, e))?;
    let model = opts.model;
    let mut trace = trace_for_model(read_trace_auto(path)?, &model)?;
    if let Some((lo, hi)) = opts.window {
        trace = trace
            .window(lo, hi)
            .ok_or_else(|| PipelineError::Validation(format!("no data inside window [{lo}, {hi}]")))?;
    }

    let mut problem = fit_problem(model, &trace, &opts.guess_overrides)?;
    for name in &opts.free {
        problem = problem.fix(param_index(&model, name)?, false);
    }
    for name in &opts.fix {
        problem = problem.fix(param_index(&model, name)?, true);
    }
    let result = fit(&problem, &trace)?;
    let derived = derived_quantities(&model, &result)?;

    let report = FitReport {
        model: model.cli_name().to_string(),
        input: path.display().to_string(),
        input_sha256: input_digest(&bytes),
        generated_unix: generation_time(),
        x_unit: trace.x_unit.clone(),
        y_unit: trace.y_unit.clone(),
        points: trace.len(),
        result,
        derived,
    };
    if let Some(out) = &opts.report_path {
        write_file(out, &report.render())?;
    }
    if let Some(svg) = &opts.svg_path {
        let (lo, hi) = (trace.x()[0], trace.x()[trace.len() - 1]);
        let plot = Plot::new(format!("{} fit", model.cli_name()), &trace.x_unit, &trace.y_unit)
            .with(Series::markers("data", points(&trace)))
            .with(Series::line("fit", curve(&model, &report.result.parameters, lo, hi)));
        write_file(svg, &plot.render())?;
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermometryResult {
    pub temperature_k: f64,
    /// `|D(T) − D_target|`, MHz.
    pub residual_mhz: f64,
}

/// Temperature at which `model` reaches `d_mhz`, searched on `window`.
pub fn cmd_thermometry(model: ZfsModel, d_mhz: f64, window: (f64, f64)) -> Result<ThermometryResult> {
    let t = invert_d_to_temperature(model, d_mhz, window)?;
    let residual = (evaluate_d(model, t)? - d_mhz).abs();
    Ok(ThermometryResult { temperature_k: t, residual_mhz: residual })
}

#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub linear_window: (f64, f64),
    pub raman_window: (f64, f64),
    pub raman_dimension: u32,
    /// Directory for `report.txt` and plots.
    pub out_dir: Option<PathBuf>,
    pub svg: bool,
    pub execution: Execution,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            linear_window: DEFAULT_LINEAR_WINDOW,
            raman_window: DEFAULT_RAMAN_WINDOW,
            raman_dimension: 2,
            out_dir: None,
            svg: false,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModelFit {
    pub quantity: &'static str,
    pub model: ModelKind,
    pub window: (f64, f64),
    pub points: usize,
    /// The fit, or the reason it was skipped.
    pub outcome: std::result::Result<FitResult, String>,
}

#[derive(Debug, Clone)]
pub struct SeriesReport {
    pub input: String,
    pub input_sha256: String,
    pub generated_unix: u64,
    pub series: TemperatureSeries,
    pub fits: Vec<ModelFit>,
    /// `1/T1(hi) / 1/T1(lo)` at the Raman window edges from the Raman fit.
    pub raman_rate_ratio: Option<(f64, f64, f64)>,
    /// Files written (report and plots).
    pub written: Vec<PathBuf>,
}

impl SeriesReport {
    pub fn fit(&self, model: &str) -> Option<&FitResult> {
        self.fits.iter().find(|f| f.model.cli_name() == model).and_then(|f| f.outcome.as_ref().ok())
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# sicspin temperature-series report");
        let _ = writeln!(s, "input = {}", self.input);
        let _ = writeln!(s, "input_sha256 = {}", self.input_sha256);
        let _ = writeln!(s, "generated_unix = {}", self.generated_unix);
        let _ = writeln!(s, "\n[fits]\nquantity,model,t_min_k,t_max_k,points,r_squared,converged,status");
        for f in &self.fits {
            let (lo, hi) = f.window;
            match &f.outcome {
                Ok(r) => {
                    let _ = writeln!(
                        s,
                        "{},{},{lo},{hi},{},{},{},ok",
                        f.quantity,
                        f.model,
                        f.points,
                        format_number(r.r_squared),
                        r.converged
                    );
                }
                Err(why) => {
                    let _ = writeln!(s, "{},{},{lo},{hi},{},,,skipped: {}", f.quantity, f.model, f.points, why.replace(',', ";"));
                }
            }
        }
        let _ = writeln!(s, "\n[parameters]\nquantity,model,name,value,std_error");
        for f in &self.fits {
            if let Ok(r) = &f.outcome {
                for i in 0..r.parameters.len() {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{}",
                        f.quantity,
                        f.model,
                        r.param_names[i],
                        format_number(r.parameters[i]),
                        format_number(r.standard_errors[i])
                    );
                }
            }
        }
        if let Some((lo, hi, ratio)) = self.raman_rate_ratio {
            let _ = writeln!(s, "\n[derived]\nraman_rate_ratio_{hi}_{lo} = {}", format_number(ratio));
        }
        s.push_str("\n[data]\n");
        s.push_str(&render_series(&self.series, &[]));
        s
    }
}

/// Quantity label, model, data and the temperature window it covers.
type FitJob<'a> = (&'static str, ModelKind, Option<&'a SignalTrace>, (f64, f64));

fn windowed(trace: Option<SignalTrace>, window: (f64, f64)) -> (Option<SignalTrace>, usize) {
    let t = trace.and_then(|t| t.window(window.0, window.1));
    let n = t.as_ref().map_or(0, SignalTrace::len);
    (t, n)
}

fn run_model_fit(quantity: &'static str, model: ModelKind, trace: Option<&SignalTrace>, window: (f64, f64)) -> ModelFit {
    let points = trace.map_or(0, SignalTrace::len);
    let needed = model.n_params() + 1;
    let outcome = match trace {
        _ if points < needed => Err(format!("{points} points in [{}, {}] K; {model} needs at least {needed}", window.0, window.1)),
        None => Err("no data".into()),
        Some(t) => fit_problem(model, t, &[]).and_then(|p| Ok(fit(&p, t)?)).map_err(|e| e.to_string()),
    };
    ModelFit { quantity, model, window, points, outcome }
}

/// Fits every applicable temperature model to the series at `path`.
pub fn cmd_report(path: impl AsRef<Path>, opts: &ReportOptions) -> Result<SeriesReport> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| PipelineError::io(path, e))?;
    let series = match read_trace_auto(path)? {
        Ingested::Series(s) => s,
        Ingested::Trace(_) => {
            return Err(PipelineError::Validation(format!(
                "{}: expected a temperature series (temperature_k,quantity,value,uncertainty)",
                path.display()
            )))
        }
    };
    for (name, (lo, hi)) in [("linear", opts.linear_window), ("raman", opts.raman_window)] {
        if !(lo < hi) {
            return Err(PipelineError::Validation(format!("{name} window [{lo}, {hi}] must be increasing")));
        }
    }

    let d_trace = series.trace(Quantity::D);
    let d_window = d_trace.as_ref().map_or((0.0, 0.0), |t| (t.x()[0], t.x()[t.len() - 1]));
    let (lin_trace, _) = windowed(series.relaxation_rate_trace(), opts.linear_window);
    let (raman_trace, _) = windowed(series.relaxation_rate_trace(), opts.raman_window);

    let jobs: Vec<FitJob<'_>> = vec![
        ("D", ModelKind::Debye, d_trace.as_ref(), d_window),
        ("D", ModelKind::Varshni, d_trace.as_ref(), d_window),
        ("D", ModelKind::Poly5, d_trace.as_ref(), d_window),
        ("1/T1", ModelKind::T1Linear, lin_trace.as_ref(), opts.linear_window),
        (
            "1/T1",
            ModelKind::T1Raman { dimension_d: opts.raman_dimension },
            raman_trace.as_ref(),
            opts.raman_window,
        ),
    ];
    let fits = map_slice(&jobs, opts.execution, |&(q, m, t, w)| run_model_fit(q, m, t, w));

    let raman_rate_ratio = fits.iter().find(|f| matches!(f.model, ModelKind::T1Raman { .. })).and_then(|f| {
        let r = f.outcome.as_ref().ok()?;
        let (lo, hi) = opts.raman_window;
        Some((lo, hi, f.model.eval(hi, &r.parameters) / f.model.eval(lo, &r.parameters)))
    });

    let mut report = SeriesReport {
        input: path.display().to_string(),
        input_sha256: input_digest(&bytes),
        generated_unix: generation_time(),
        series,
        fits,
        raman_rate_ratio,
        written: Vec::new(),
    };

    if let Some(dir) = &opts.out_dir {
        fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
        let text_path = dir.join("report.txt");
        write_file(&text_path, &report.render())?;
        report.written.push(text_path);
    }
    if opts.svg {
        let dir = opts.out_dir.clone().unwrap_or_else(|| path.parent().map(Path::to_path_buf).unwrap_or_default());
        for (name, plot) in report_plots(&report) {
            let p = dir.join(name);
            write_file(&p, &plot.render())?;
            report.written.push(p);
        }
    }
    Ok(report)
}

fn report_plots(report: &SeriesReport) -> Vec<(&'static str, Plot)> {
    let mut plots = Vec::new();
    let s = &report.series;
    if let Some(d) = s.trace(Quantity::D) {
        let (lo, hi) = (d.x()[0], d.x()[d.len() - 1]);
        let mut plot = Plot::new("D(T)", "temperature (K)", "D (MHz)").with(Series::markers("data", points(&d)));
        for f in report.fits.iter().filter(|f| f.quantity == "D") {
            if let Ok(r) = &f.outcome {
                plot = plot.with(Series::line(f.model.cli_name(), curve(&f.model, &r.parameters, lo, hi)));
            }
        }
        plots.push(("d_vs_t.svg", plot));
    }
    if let Some(rate) = s.relaxation_rate_trace() {
        let mut plot =
            Plot::new("1/T1(T)", "temperature (K)", "1/T1 (1/ms)").with(Series::markers("data", points(&rate)));
        for f in report.fits.iter().filter(|f| f.quantity == "1/T1") {
            if let Ok(r) = &f.outcome {
                plot = plot.with(Series::line(f.model.cli_name(), curve(&f.model, &r.parameters, f.window.0, f.window.1)));
            }
        }
        plots.push(("t1_rate_vs_t.svg", plot));
    }
    let mut coherence = Plot::new("coherence times", "temperature (K)", "time (µs)");
    for q in [Quantity::T2Star, Quantity::T2] {
        if let Some(t) = s.trace(q) {
            coherence = coherence.with(Series::markers(q.label(), points(&t)));
        }
    }
    if !coherence.series.is_empty() {
        plots.push(("coherence_vs_t.svg", coherence));
    }
    plots
}
