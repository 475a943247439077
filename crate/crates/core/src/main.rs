use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sicspin::fitting::ModelKind;
use sicspin::pipeline::{
    cmd_fit, cmd_report, cmd_simulate, cmd_thermometry, exit_code, format_number, ExperimentConfig, FitOptions,
    PipelineError, ReportOptions, DEFAULT_LINEAR_WINDOW, DEFAULT_RAMAN_WINDOW, CONFIG_KEYS,
};
use sicspin::temperature::{
    DebyeDParams, PolynomialDParams, VarshniDParams, ZfsModel, INVERSION_LIMITS_K,
};

#[derive(Parser)]
#[command(name = "sicspin", version, about = "Divacancy spin simulation, fitting and ZFS thermometry")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a measurement trace from a key=value config file.
    Simulate(SimulateArgs),
    /// Fit a model to a trace or temperature series.
    Fit(FitArgs),
    /// Convert a measured D (MHz) to temperature.
    Thermometry(ThermometryArgs),
    /// Fit all temperature models to a temperature series.
    Report(ReportArgs),
}

#[derive(Args)]
#[command(after_help = config_help())]
struct SimulateArgs {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Overrides `seed` in the config.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Overrides `output` in the config; without either the CSV goes to stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// Input CSV.
    trace: PathBuf,
    /// lorentzian2 | ramsey | eseem | t1 | rabi | debye | varshni | poly5 | t1-linear | t1-raman | t1-coth-orbach.
    #[arg(long, value_parser = parse_model)]
    model: ModelKind,
    /// Starting value override, e.g. `--guess t2_star=1.2`.
    #[arg(long = "guess", value_name = "NAME=VALUE", value_parser = parse_assignment)]
    guesses: Vec<(String, f64)>,
    /// Free a parameter that is fixed by default (e.g. `--free f1`).
    #[arg(long = "free", value_name = "NAME")]
    free: Vec<String>,
    /// Hold a parameter at its starting value.
    #[arg(long = "fix", value_name = "NAME")]
    fix: Vec<String>,
    /// Only fit points with abscissa in LO:HI.
    #[arg(long = "t-window", value_name = "LO:HI", value_parser = parse_window)]
    window: Option<(f64, f64)>,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Also write an SVG plot of data and fit (next to the report, or the input).
    #[arg(long)]
    svg: bool,
}

#[derive(Args)]
struct ThermometryArgs {
    /// Measured zero-field splitting, MHz.
    d_mhz: f64,
    /// debye | varshni | poly5.
    #[arg(long, default_value = "debye")]
    model: String,
    /// Built-in coefficient set.
    #[arg(long, default_value = "a", value_parser = ["a", "b"])]
    sample: String,
    /// Comma-separated coefficients replacing the sample set.
    #[arg(long, value_name = "C0,C1,...", value_delimiter = ',', allow_hyphen_values = true)]
    coeffs: Option<Vec<f64>>,
    /// Search window, kelvin.
    #[arg(long = "t-window", value_name = "LO:HI", value_parser = parse_window)]
    window: Option<(f64, f64)>,
}

#[derive(Args)]
struct ReportArgs {
    /// Temperature series CSV (temperature_k,quantity,value,uncertainty).
    series: PathBuf,
    /// 1/T1 windows: the first is the linear regime, the second the Raman regime.
    #[arg(long = "t-window", value_name = "LO:HI", value_parser = parse_window, num_args = 1, action = clap::ArgAction::Append)]
    windows: Vec<(f64, f64)>,
    /// Sample dimension d for the Raman exponent s = 2d − 1.
    #[arg(long, default_value_t = 2)]
    raman_dimension: u32,
    /// Output directory for report.txt (and plots); stdout when absent.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: bool,
}

fn config_help() -> String {
    let mut s = String::from("Config keys:\n");
    for (k, d) in CONFIG_KEYS {
        s.push_str(&format!("  {k:<16} {d}\n"));
    }
    s
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse()
}

fn parse_assignment(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("`{v}` is not a number"))?;
    Ok((k.trim().to_string(), v))
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected LO:HI, got `{s}`"))?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("`{lo}` is not a number"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("`{hi}` is not a number"))?;
    if !(lo < hi) {
        return Err(format!("window {lo}:{hi} must be increasing"));
    }
    Ok((lo, hi))
}

fn zfs_model(args: &ThermometryArgs) -> Result<ZfsModel, PipelineError> {
    let a = args.sample == "a";
    let bad = |e: sicspin::temperature::TemperatureError| PipelineError::Validation(e.to_string());
    let expect = |n: usize, c: &[f64]| {
        if c.len() == n {
            Ok(())
        } else {
            Err(PipelineError::Validation(format!("model `{}` takes {n} coefficients, got {}", args.model, c.len())))
        }
    };
    Ok(match (args.model.as_str(), &args.coeffs) {
        ("debye", None) => (if a { DebyeDParams::SAMPLE_A } else { DebyeDParams::SAMPLE_B }).into(),
        ("debye", Some(c)) => {
            expect(3, c)?;
            DebyeDParams::new(c[0], c[1], c[2]).map_err(bad)?.into()
        }
        ("varshni", None) => (if a { VarshniDParams::SAMPLE_A } else { VarshniDParams::SAMPLE_B }).into(),
        ("varshni", Some(c)) => {
            expect(3, c)?;
            VarshniDParams::new(c[0], c[1], c[2]).map_err(bad)?.into()
        }
        ("poly5", None) => (if a { PolynomialDParams::SAMPLE_A } else { PolynomialDParams::SAMPLE_B }).into(),
        ("poly5", Some(c)) => PolynomialDParams::new(c).map_err(bad)?.into(),
        (other, _) => {
            return Err(PipelineError::Validation(format!("unknown D(T) model `{other}` (expected debye | varshni | poly5)")))
        }
    })
}

fn sibling(path: &Path, ext: &str) -> PathBuf {
    path.with_extension(ext)
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::Simulate(args) => {
            let mut config = ExperimentConfig::from_file(&args.config)?;
            if let Some(seed) = args.seed {
                config.seed = seed;
            }
            if let Some(out) = args.out {
                config.output = Some(out);
            }
            let out = cmd_simulate(&config)?;
            match &config.output {
                Some(path) => eprintln!("wrote {} points to {}", out.trace.len(), path.display()),
                None => print!("{}", out.csv),
            }
        }
        Command::Fit(args) => {
            let svg_path = args.svg.then(|| match &args.out {
                Some(out) => sibling(out, "svg"),
                None => sibling(&args.trace, &format!("{}.svg", args.model.cli_name())),
            });
            let opts = FitOptions {
                model: args.model,
                guess_overrides: args.guesses,
                free: args.free,
                fix: args.fix,
                window: args.window,
                report_path: args.out.clone(),
                svg_path,
            };
            let report = cmd_fit(&args.trace, &opts)?;
            if args.out.is_none() {
                print!("{}", report.render());
            }
            if !report.result.converged {
                return Err(PipelineError::NotConverged {
                    iterations: report.result.iterations,
                    report: args.out.map_or_else(|| "stdout".into(), |p| p.display().to_string()),
                });
            }
        }
        Command::Thermometry(args) => {
            let model = zfs_model(&args)?;
            let window = args.window.unwrap_or(INVERSION_LIMITS_K);
            let r = cmd_thermometry(model, args.d_mhz, window)?;
            println!("model = {}", model.name());
            println!("d_mhz = {}", format_number(args.d_mhz));
            println!("temperature_k = {}", format_number(r.temperature_k));
            println!("residual_mhz = {}", format_number(r.residual_mhz));
        }
        Command::Report(args) => {
            if args.windows.len() > 2 {
                return Err(PipelineError::Validation("at most two --t-window values (linear, then Raman)".into()));
            }
            let opts = ReportOptions {
                linear_window: args.windows.first().copied().unwrap_or(DEFAULT_LINEAR_WINDOW),
                raman_window: args.windows.get(1).copied().unwrap_or(DEFAULT_RAMAN_WINDOW),
                raman_dimension: args.raman_dimension,
                out_dir: args.out.clone(),
                svg: args.svg,
                ..ReportOptions::default()
            };
            let report = cmd_report(&args.series, &opts)?;
            if args.out.is_none() {
                print!("{}", report.render());
            }
            for p in &report.written {
                eprintln!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::from(exit_code::SUCCESS as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
