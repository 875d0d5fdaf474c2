use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use mixlab::diagnostics::{
    ed_exponent_points, envelope_mixing, fit_mixing, fit_power_law, inviscid_hm1, mixing_window, verify_trace_bound,
    MixingParams, RateFit,
};
use mixlab::evolution::{default_sample_every, evolve, mixing_envelope, step_plan, DecayTrace};
use mixlab::models::{initial_field, rebuild, Family, InitialDatum, ModelProblem};
use mixlab::report::{build_report, Verdict, BOUND_TOL};
use mixlab::sweep::{build_model, expand, log_spaced, run_sweep, NuSpec, RowParams, RowStatus, SweepConfig};
use mixlab::Error;

const USAGE: u8 = 1;
const NUMERICAL: u8 = 2;

#[derive(Parser)]
#[command(name = "mixlab", version, about = "Mixing and enhanced dissipation experiments", allow_negative_numbers = true)]
struct Cli {
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true, value_parser = parse_usize)]
    workers: Option<usize>,
    #[arg(long, global = true, value_parser = parse_u64)]
    seed: Option<u64>,
    /// Torus modes M, radial points N or Hermite degree.
    #[arg(long, global = true, value_parser = parse_usize)]
    resolution: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evolve one datum and write its norm trace.
    Simulate(SimulateArgs),
    /// Fit the inviscid mixing rate `p` of a datum or of the worst case.
    MixRate(MixRateArgs),
    /// Run a viscosity sweep and fit the dissipation-time exponent.
    EdSweep(SweepArgs),
    /// Check a trace against the decay bound implied by a mixing rate.
    VerifyBound(VerifyArgs),
    /// Aggregate a sweep directory into report.json and SVG plots.
    Report(ReportArgs),
}

#[derive(Args, Clone)]
struct ModelArgs {
    #[arg(long, value_parser = parse_family)]
    model: Family,
    /// Shear profile: sin, sin2, zero, const:<u>, or a CSV file with columns y,u.
    #[arg(long)]
    profile: Option<String>,
    /// Dissipation order of `Lambda^gamma` (shear).
    #[arg(long, value_parser = parse_f64)]
    gamma: Option<f64>,
    /// Vanishing order of the profile's critical points.
    #[arg(long, value_parser = parse_u32)]
    n0: Option<u32>,
    #[arg(long, value_parser = parse_i64, default_value = "1")]
    k: i64,
    /// Spiral exponent.
    #[arg(long, value_parser = parse_f64)]
    alpha: Option<f64>,
    /// Kolmogorov aspect ratio.
    #[arg(long = "L", value_parser = parse_f64)]
    l: Option<f64>,
    /// Hermite velocity dimension.
    #[arg(long, value_parser = parse_usize)]
    dim: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_parser = parse_f64)]
    nu: f64,
    #[arg(long, value_parser = parse_f64, default_value = "100")]
    t_end: f64,
    /// Time step (default: stable step for the model).
    #[arg(long, value_parser = parse_f64)]
    dt: Option<f64>,
    /// single-mode[:m], lowest-mode, gaussian-bump or random[:seed].
    #[arg(long)]
    datum: Option<String>,
    #[arg(long, value_parser = parse_usize, default_value = "2000")]
    samples: usize,
}

#[derive(Args)]
struct MixRateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    datum: Option<String>,
    /// Fit the worst-case envelope instead of a single datum.
    #[arg(long)]
    envelope: bool,
    #[arg(long, value_parser = parse_f64)]
    t_min: Option<f64>,
    #[arg(long, value_parser = parse_f64)]
    t_max: Option<f64>,
    #[arg(long, value_parser = parse_usize, default_value = "24")]
    points: usize,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON sweep config; flags below are ignored when given.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_family, required_unless_present = "config")]
    model: Option<Family>,
    #[arg(long, value_parser = parse_f64, default_value = "1e-6")]
    nu_min: f64,
    #[arg(long, value_parser = parse_f64, default_value = "1e-3")]
    nu_max: f64,
    #[arg(long, value_parser = parse_usize, default_value = "8")]
    nu_count: usize,
    #[arg(long, value_parser = parse_i64, value_delimiter = ',')]
    k: Vec<i64>,
    #[arg(long, value_parser = parse_f64, value_delimiter = ',')]
    alpha: Vec<f64>,
    #[arg(long, value_parser = parse_f64, value_delimiter = ',')]
    gamma: Vec<f64>,
    #[arg(long)]
    profile: Option<String>,
    #[arg(long = "L", value_parser = parse_f64)]
    l: Option<f64>,
    #[arg(long, value_parser = parse_usize)]
    dim: Option<usize>,
    #[arg(long)]
    datum: Option<String>,
    #[arg(long, value_parser = parse_f64)]
    dt: Option<f64>,
    #[arg(long, value_parser = parse_f64)]
    theta: Option<f64>,
    #[arg(long, value_parser = parse_f64)]
    t_end_factor: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Trace CSV with its JSON sidecar.
    #[arg(long)]
    trace: PathBuf,
    /// Mixing rate; fitted from the worst-case envelope when omitted.
    #[arg(long, value_parser = parse_f64, requires = "a")]
    p: Option<f64>,
    /// Mixing amplitude.
    #[arg(long, value_parser = parse_f64, requires = "p")]
    a: Option<f64>,
    #[arg(long, value_parser = parse_f64, default_value_t = BOUND_TOL)]
    tol: f64,
}

#[derive(Args)]
struct ReportArgs {
    /// Sweep directory (default: --out).
    dir: Option<PathBuf>,
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|_| format!("'{s}' is not a number"))
}

// integers may be written as 1e3
fn parse_i64(s: &str) -> Result<i64, String> {
    if let Ok(v) = s.parse::<i64>() {
        return Ok(v);
    }
    let v = parse_f64(s)?;
    if v.fract() != 0.0 || v.abs() > 9.0e15 {
        return Err(format!("'{s}' is not an integer"));
    }
    Ok(v as i64)
}

fn parse_u64(s: &str) -> Result<u64, String> {
    s.parse::<u64>()
        .or_else(|_| parse_i64(s).and_then(|v| u64::try_from(v).map_err(|_| format!("'{s}' must be non-negative"))))
}

fn parse_usize(s: &str) -> Result<usize, String> {
    parse_u64(s).and_then(|v| usize::try_from(v).map_err(|e| e.to_string()))
}

fn parse_u32(s: &str) -> Result<u32, String> {
    parse_u64(s).and_then(|v| u32::try_from(v).map_err(|e| e.to_string()))
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { NUMERICAL } else { USAGE })
        }
    }
}

fn run(cli: &Cli) -> mixlab::Result<ExitCode> {
    match &cli.cmd {
        Cmd::Simulate(a) => simulate(cli, a),
        Cmd::MixRate(a) => mix_rate(cli, a),
        Cmd::EdSweep(a) => ed_sweep(cli, a),
        Cmd::VerifyBound(a) => verify_bound(a),
        Cmd::Report(a) => report(cli, a),
    }
}

fn out_dir(cli: &Cli) -> mixlab::Result<PathBuf> {
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// Single-row sweep config so models are built exactly as in sweeps.
fn model_config(cli: &Cli, m: &ModelArgs, nu: f64) -> SweepConfig {
    let mut cfg = SweepConfig::new(m.model, cli.out.clone().unwrap_or_default());
    cfg.nu = NuSpec::List(vec![nu]);
    cfg.k = vec![m.k];
    cfg.alpha = m.alpha.into_iter().collect();
    cfg.gamma = m.gamma.into_iter().collect();
    cfg.profile = m.profile.clone();
    cfg.n0 = m.n0;
    cfg.l = m.l;
    cfg.dim = m.dim;
    cfg.resolution = cli.resolution;
    cfg
}

fn build(cli: &Cli, m: &ModelArgs, nu: f64) -> mixlab::Result<(ModelProblem, RowParams)> {
    let cfg = model_config(cli, m, nu);
    let params = expand(&cfg).remove(0);
    Ok((build_model(&cfg, &params)?, params))
}

fn datum_for(model: &ModelProblem, name: Option<&str>, seed: Option<u64>) -> mixlab::Result<InitialDatum> {
    let datum = match name {
        Some(s) => InitialDatum::parse(s)?,
        None => match model.family() {
            Family::Spiral | Family::Kinetic => InitialDatum::LowestMode,
            _ => InitialDatum::SingleMode { m: 1 },
        },
    };
    Ok(match (datum, seed) {
        (InitialDatum::Random { .. }, Some(seed)) if name == Some("random") => InitialDatum::Random { seed },
        (InitialDatum::WorstCase, _) => {
            return Err(Error::InvalidParameter("worst-case data are only available in ed-sweep".into()))
        }
        (d, _) => d,
    })
}

fn simulate(cli: &Cli, a: &SimulateArgs) -> mixlab::Result<ExitCode> {
    let (model, params) = build(cli, &a.model, a.nu)?;
    let datum = datum_for(&model, a.datum.as_deref(), cli.seed)?;
    let f_in = initial_field(&model, &datum)?;
    let dt = a.dt.unwrap_or_else(|| model.default_dt());
    let (steps, _) = step_plan(a.t_end, dt);
    let evo = evolve(&model, &f_in, a.nu, a.t_end, dt, default_sample_every(steps, a.samples))?;

    let path = out_dir(cli)?.join(format!("{}.csv", params.key()));
    evo.trace.save(&path)?;
    let tr = &evo.trace;
    let last = tr.len() - 1;
    println!("model     {}", params.group_label());
    println!("datum     {}", datum.name());
    println!("nu        {:e}", a.nu);
    println!("dt        {:e}", tr.dt);
    println!("t         {}", tr.times[last]);
    println!("h         {:.12e}", tr.h_norm[last]);
    println!("h1        {:.12e}", tr.h1_norm[last]);
    println!("hm1       {:.12e}", tr.hm1_norm[last]);
    if tr.closure_flagged() {
        println!("warning   Hermite closure fraction {:.3e} exceeds limit", tr.closure_max.unwrap_or(0.0));
    }
    println!("trace     {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn mix_rate(cli: &Cli, a: &MixRateArgs) -> mixlab::Result<ExitCode> {
    let (model, params) = build(cli, &a.model, 0.0)?;
    let auto = mixing_window(&model);
    let window = (a.t_min.unwrap_or(auto.0), a.t_max.unwrap_or(auto.1));
    let times = log_spaced(window.0, window.1, a.points);
    let seed = cli.seed.unwrap_or(0);
    let (label, values, fit): (String, Vec<f64>, RateFit) = if a.envelope {
        let env = mixing_envelope(&model, &times, 30, seed)?;
        let fit = fit_power_law(&env.times, &env.values, window)?;
        ("worst-case envelope".into(), env.values, fit)
    } else {
        let datum = datum_for(&model, a.datum.as_deref(), cli.seed)?;
        let f_in = initial_field(&model, &datum)?;
        let h1 = model.h1_sq(f_in.coeffs()).sqrt();
        let hm1 = inviscid_hm1(&model, &f_in, &times)?;
        let fit = fit_mixing(&times, &hm1, h1, window)?;
        (datum.name(), hm1.iter().map(|v| v / h1).collect(), fit)
    };

    let dir = out_dir(cli)?;
    let stem = format!("mix_{}", params.key().split("_nu").next().unwrap_or("model"));
    let csv = dir.join(format!("{stem}.csv"));
    let mut text = String::from("t,ratio\n");
    for (t, v) in times.iter().zip(&values) {
        text += &format!("{t:.16e},{v:.16e}\n");
    }
    std::fs::write(&csv, text)?;
    let summary = json!({
        "model": params.group_label(),
        "datum": label,
        "window": [window.0, window.1],
        "p": fit.rate(),
        "a": fit.amplitude(),
        "residual": fit.residual,
        "p_pred": model.predicted_p(),
        "curve": csv,
    });
    std::fs::write(dir.join(format!("{stem}.json")), serde_json::to_string_pretty(&summary)?)?;

    println!("model     {}", params.group_label());
    println!("datum     {label}");
    println!("window    [{}, {}]", window.0, window.1);
    println!("p         {:.4}", fit.rate());
    println!("a         {:.4e}", fit.amplitude());
    if let Some(p) = model.predicted_p() {
        println!("p_pred    {p:.4}");
    }
    Ok(ExitCode::SUCCESS)
}

fn sweep_config(cli: &Cli, a: &SweepArgs) -> mixlab::Result<SweepConfig> {
    let mut cfg = match &a.config {
        Some(path) => SweepConfig::from_file(path)?,
        None => {
            let family = a.model.ok_or_else(|| Error::InvalidParameter("--model or --config is required".into()))?;
            let mut cfg = SweepConfig::new(family, "sweep");
            cfg.nu = NuSpec::LogSpaced { min: a.nu_min, max: a.nu_max, count: a.nu_count };
            if !a.k.is_empty() {
                cfg.k = a.k.clone();
            }
            cfg.alpha = a.alpha.clone();
            cfg.gamma = a.gamma.clone();
            cfg.profile = a.profile.clone();
            cfg.l = a.l;
            cfg.dim = a.dim;
            cfg.datum = a.datum.as_deref().map(InitialDatum::parse).transpose()?;
            cfg.dt = a.dt;
            cfg.theta = a.theta;
            if let Some(f) = a.t_end_factor {
                cfg.t_end_factor = f;
            }
            cfg
        }
    };
    if let Some(out) = &cli.out {
        cfg.output = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.resolution.is_some() {
        cfg.resolution = cli.resolution;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn ed_sweep(cli: &Cli, a: &SweepArgs) -> mixlab::Result<ExitCode> {
    let cfg = sweep_config(cli, a)?;
    let res = run_sweep(&cfg, cli.workers)?;
    println!("{:<12} {:>6} {:>14} {:>10}  status", "nu", "k", "tau", "q_pred");
    for r in &res.rows {
        println!(
            "{:<12.4e} {:>6} {:>14} {:>10}  {}",
            r.nu,
            r.k,
            r.tau.map_or("-".into(), |t| format!("{t:.6e}")),
            r.q_pred.map_or("-".into(), |q| format!("{q:.4}")),
            r.status.as_str()
        );
    }
    for g in res.groups() {
        let done: Vec<_> = g.iter().filter(|r| r.status == RowStatus::Completed).collect();
        let nus: Vec<f64> = done.iter().map(|r| r.nu).collect();
        let taus: Vec<f64> = done.iter().filter_map(|r| r.tau).collect();
        match ed_exponent_points(&nus, &taus) {
            Ok(fit) => println!("{}: q_meas = {:.4}", g[0].params.group_label(), fit.rate()),
            Err(e) => println!("{}: no fit ({e})", g[0].params.group_label()),
        }
    }
    println!("results   {}", res.output.join(mixlab::sweep::SWEEP_CSV).display());
    let incomplete = res.rows.iter().filter(|r| r.status != RowStatus::Completed).count();
    if incomplete > 0 {
        eprintln!("{incomplete} of {} rows did not complete", res.rows.len());
        return Ok(ExitCode::from(NUMERICAL));
    }
    Ok(ExitCode::SUCCESS)
}

fn verify_bound(a: &VerifyArgs) -> mixlab::Result<ExitCode> {
    let trace = DecayTrace::load(&a.trace)?;
    let mix = match (a.p, a.a) {
        (Some(p), Some(amp)) => MixingParams { a: amp, p },
        _ => {
            let model = rebuild(&trace.model)?;
            MixingParams::from(&envelope_mixing(&model, mixing_window(&model), 24, 0)?)
        }
    };
    let rep = verify_trace_bound(&trace, mix, a.tol)?;
    println!("p         {:.4}", mix.p);
    println!("a         {:.4e}", mix.a);
    println!("rate      {:.6e}", rep.rate);
    println!("t_min     {:.6e}", rep.t_min);
    println!("checked   {}", rep.checked);
    println!("margin    {:.6}", rep.worst_margin);
    println!("verdict   {}", if rep.pass { "pass" } else { "FAIL" });
    Ok(if rep.pass { ExitCode::SUCCESS } else { ExitCode::from(NUMERICAL) })
}

fn report(cli: &Cli, a: &ReportArgs) -> mixlab::Result<ExitCode> {
    let dir: &Path = match (&a.dir, &cli.out) {
        (Some(d), _) | (None, Some(d)) => d,
        (None, None) => Path::new("."),
    };
    let bundle = build_report(dir)?;
    for g in &bundle.groups {
        let q = g.q_meas.map_or("-".into(), |q| format!("{q:.3}"));
        let pred = g.q_pred.map_or("-".into(), |q| format!("{q:.3}"));
        let verdict = match g.verdict {
            Verdict::Consistent => "consistent",
            Verdict::Exceeds => "EXCEEDS",
            Verdict::Insufficient => "insufficient",
        };
        let passed = g.bounds.iter().filter(|b| b.pass == Some(true)).count();
        println!(
            "{}: q_meas = {q}, q_pred = {pred} ({verdict}); bounds {passed}/{} pass; {}/{} rows completed",
            g.label,
            g.bounds.len(),
            g.completed,
            g.rows
        );
        for f in &g.failures {
            println!("  row {f}");
        }
    }
    for p in &bundle.artifacts {
        println!("wrote     {}", p.display());
    }
    println!("wrote     {}", dir.join(mixlab::report::REPORT_JSON).display());
    Ok(if bundle.all_bounds_pass() { ExitCode::SUCCESS } else { ExitCode::from(NUMERICAL) })
}
