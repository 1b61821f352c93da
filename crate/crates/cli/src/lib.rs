//! Batch front-end: parse variety files, run any analysis, and emit
//! deterministic reports plus vector-graphic plots.

pub mod fixture;
pub mod plot;
pub mod vty;

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use linkscope::homology::{ChainComplex, Ring};
use linkscope::lne;
use linkscope::pipeline::{self, PipelineConfig};
use linkscope::poly::PolynomialSystem;
use linkscope::sampler::{self, Mode};
use linkscope::transfer;
use linkscope::{EmbeddedComplex, Error as CoreError};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(
    name = "linkscope",
    about = "Metric-topological analysis of links of polynomial zero sets",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Variety definition file (TOML)
    #[arg(long, global = true)]
    pub variety: Option<PathBuf>,

    /// Built-in fixture spec, e.g. "polygon:n=256,r=1.0"
    #[arg(long, global = true)]
    pub fixture: Option<String>,

    /// Comma-separated scale list
    #[arg(long, global = true, value_delimiter = ',')]
    pub scales: Vec<f64>,

    /// Sample count per link
    #[arg(long, global = true)]
    pub count: Option<usize>,

    /// RNG seed (mandatory: reports must be reproducible)
    #[arg(long, global = true, default_value = None, required = false)]
    pub seed: Option<u64>,

    /// Homology coefficient ring
    #[arg(long, global = true, value_enum, default_value = "z2")]
    pub ring: RingArg,

    /// Rips dimension cap
    #[arg(long, global = true, default_value_t = 2)]
    pub max_dim: usize,

    /// Complex dimension k for the H_j ranges
    #[arg(long, global = true)]
    pub dim_k: Option<usize>,

    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    /// Randomized stability trials per loop
    #[arg(long, global = true, default_value_t = 20)]
    pub trials: usize,

    /// Ball radius for germ LNE estimates
    #[arg(long, global = true, default_value_t = 0.1)]
    pub epsilon_ball: f64,

    /// Override the variety file's mode
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,

    /// Neighbours per vertex in sampled complexes
    #[arg(long, global = true, default_value_t = 12)]
    pub knn: usize,

    /// Cycle dimension probed by `choke`
    #[arg(long, global = true, default_value_t = 1)]
    pub choke_dim: usize,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Sample a rescaled link at one scale
    Sample,
    /// Germ LNE estimate plus an LLNE profile with fitted slope
    Lne,
    /// LLNE profile C(t) across scales
    LlneProfile,
    /// Hausdorff convergence of rescaled links toward the cone link
    Hausdorff,
    /// Homology-proxy systole of a link or fixture complex
    Systole,
    /// Loop transfer certificate (variety: link vs cone link)
    Transfer,
    /// Betti numbers of a link sample or reference complex
    Betti,
    /// Choking-cycle probe across scales
    Choke,
    /// Aggregated smoothness verdict for a germ
    Smooth,
    /// At-infinity analysis: profile, Z2 obstruction, choking probe
    Infinity,
    /// Full germ dossier (verdict plus systole and obstruction data)
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Sample => "sample",
            Command::Lne => "lne",
            Command::LlneProfile => "llne-profile",
            Command::Hausdorff => "hausdorff",
            Command::Systole => "systole",
            Command::Transfer => "transfer",
            Command::Betti => "betti",
            Command::Choke => "choke",
            Command::Smooth => "smooth",
            Command::Infinity => "infinity",
            Command::Report => "report",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum RingArg {
    Z2,
    Z,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeArg {
    Germ,
    Infinity,
}

/// Exit statuses per the report contract.
pub const EXIT_OK: i32 = 0;
pub const EXIT_INCONCLUSIVE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Serialize)]
struct ConfigEcho {
    command: &'static str,
    variety: Option<String>,
    variety_name: Option<String>,
    polynomials: Option<Vec<String>>,
    field: Option<String>,
    fixture: Option<String>,
    scales: Vec<f64>,
    count: Option<usize>,
    seed: u64,
    ring: String,
    max_dim: usize,
    dim_k: Option<usize>,
    trials: usize,
    epsilon_ball: f64,
    mode: String,
    knn: usize,
    choke_dim: usize,
}

#[derive(Serialize)]
struct Report<'a> {
    schema_version: u32,
    command: &'static str,
    config: &'a ConfigEcho,
    results: Value,
}

struct Loaded {
    variety: Option<vty::Variety>,
    mode: Mode,
    seed: u64,
}

pub fn run(cli: &Cli) -> anyhow::Result<i32> {
    let started = Instant::now();
    let loaded = load_inputs(cli)?;
    let config = echo_config(cli, &loaded);
    match dispatch(cli, &loaded) {
        Ok((results, code, plots)) => {
            write_outputs(cli, &config, &results, &plots, started)?;
            Ok(code)
        }
        Err(e) => {
            // analysis errors after successful input validation still write
            // a minimal report so failed runs are auditable
            let _ = write_outputs(
                cli,
                &config,
                &json!({ "error": e.to_string() }),
                &[],
                started,
            );
            Err(e)
        }
    }
}

fn load_inputs(cli: &Cli) -> anyhow::Result<Loaded> {
    let seed = cli
        .seed
        .ok_or_else(|| anyhow!("--seed is mandatory: reports must be reproducible"))?;
    let variety = match &cli.variety {
        Some(path) => Some(vty::load_variety(path)?),
        None => None,
    };
    let mode = match cli.mode {
        Some(ModeArg::Germ) => Mode::Germ,
        Some(ModeArg::Infinity) => Mode::Infinity,
        None => variety
            .as_ref()
            .and_then(|v| v.default_mode)
            .unwrap_or(Mode::Germ),
    };
    Ok(Loaded {
        variety,
        mode,
        seed,
    })
}

fn echo_config(cli: &Cli, loaded: &Loaded) -> ConfigEcho {
    ConfigEcho {
        command: cli.command.name(),
        variety: cli.variety.as_ref().map(|p| p.display().to_string()),
        variety_name: loaded.variety.as_ref().map(|v| v.name.clone()),
        polynomials: loaded.variety.as_ref().map(|v| v.system.describe()),
        field: loaded
            .variety
            .as_ref()
            .map(|v| format!("{:?}", v.system.field).to_lowercase()),
        fixture: cli.fixture.clone(),
        scales: cli.scales.clone(),
        count: cli.count,
        seed: loaded.seed,
        ring: match cli.ring {
            RingArg::Z2 => "z2".into(),
            RingArg::Z => "z".into(),
        },
        max_dim: cli.max_dim,
        dim_k: cli.dim_k,
        trials: cli.trials,
        epsilon_ball: cli.epsilon_ball,
        mode: match loaded.mode {
            Mode::Germ => "germ".into(),
            Mode::Infinity => "infinity".into(),
        },
        knn: cli.knn,
        choke_dim: cli.choke_dim,
    }
}

fn require_variety(loaded: &Loaded) -> anyhow::Result<&vty::Variety> {
    loaded
        .variety
        .as_ref()
        .ok_or_else(|| anyhow!("this command requires --variety <path>"))
}

fn scales_or(cli: &Cli, mode: Mode) -> Vec<f64> {
    if !cli.scales.is_empty() {
        return cli.scales.clone();
    }
    match mode {
        Mode::Germ => vec![1e-1, 1e-2, 1e-3],
        Mode::Infinity => vec![10.0, 100.0, 1000.0],
    }
}

/// Scale closest to the limit: smallest for germs, largest at infinity.
fn limit_scale(scales: &[f64], mode: Mode) -> f64 {
    match mode {
        Mode::Germ => scales.iter().copied().fold(f64::INFINITY, f64::min),
        Mode::Infinity => scales.iter().copied().fold(0.0, f64::max),
    }
}

fn count_or(cli: &Cli, system: &PolynomialSystem) -> usize {
    cli.count.unwrap_or_else(|| pipeline::default_count(system))
}

fn ring_of(cli: &Cli) -> Ring {
    match cli.ring {
        RingArg::Z2 => Ring::Z2,
        RingArg::Z => Ring::Z,
    }
}

type CommandOutput = (Value, i32, Vec<(String, String)>);

fn dispatch(cli: &Cli, loaded: &Loaded) -> anyhow::Result<CommandOutput> {
    match cli.command {
        Command::Sample => cmd_sample(cli, loaded),
        Command::Lne => cmd_lne(cli, loaded),
        Command::LlneProfile => cmd_llne_profile(cli, loaded),
        Command::Hausdorff => cmd_hausdorff(cli, loaded),
        Command::Systole => cmd_systole(cli, loaded),
        Command::Transfer => cmd_transfer(cli, loaded),
        Command::Betti => cmd_betti(cli, loaded),
        Command::Choke => cmd_choke(cli, loaded),
        Command::Smooth => cmd_smooth(cli, loaded),
        Command::Infinity => cmd_infinity(cli, loaded),
        Command::Report => cmd_report(cli, loaded),
    }
}

fn cmd_sample(cli: &Cli, loaded: &Loaded) -> anyhow::Result<CommandOutput> {
    let v = require_variety(loaded)?;
    let mode = loaded.mode;
    let scales = scales_or(cli, mode);
    let t = limit_scale(&scales, mode);
    let count = count_or(cli, &v.system);
    let sample = sampler::sample_link(&v.system, t, count, loaded.seed, mode)?;
    let points: Vec<Vec<f64>> = sample.points.iter().map(|p| p.to_vec()).collect();
    let results = json!({
        "t": sample.t,
        "tag": sample.tag,
        "residual_bound": sample.residual_bound,
        "requested": sample.requested,
        "converged": sample.converged,
        "point_count": sample.points.len(),
        "ambient_dim": sample.points.dim(),
        "coordinate_labels": v.system.real_var_names(),
        "points": points,
    });
    Ok((results, EXIT_OK, vec![]))
}

fn cmd_lne(cli: &Cli, loaded: &Loaded) -> anyhow::Result<CommandOutput> {
    let v = require_variety(loaded)?;
    let count = count_or(cli, &v.system);
    let scales = scales_or(cli, Mode::Germ);
    let germ = lne::germ_lne_estimate(&v.system, cli.epsilon_ball, count, loaded.seed)?;
    let profile = lne::llne_profile(&v.system, &scales, count, loaded.seed, Mode::Germ, true)?;
    let svg = profile_plot(&profile, &format!("LNE profile: {}", v.name));
    let results = json!({
        "germ_estimate": germ,
        "profile": &profile,
        "fitted_slope": profile.slope,
        "classification": profile.classification,
    });
    Ok((results, EXIT_OK, vec![("lne_profile.svg".into(), svg)]))
}

fn cmd_llne_profile(cli: &Cli, loaded: &Loaded) -> anyhow::Result<CommandOutput> {
    let v = require_variety(loaded)?;
    let mode = loaded.mode;
    let count = count_or(cli, &v.system);
    let scales = scales_or(cli, mode);
    let profile = lne::llne_profile(&v.system, &scales, count, loaded.seed, mode, true)?;
    let svg = profile_plot(&profile, &format!("LLNE profile: {}", v.name));
    let results = json!({
        "profile": &profile,
        "fitted_slope": profile.slope,
        "classification": profile.classification,
    });
    Ok((results, EXIT_OK, vec![("llne_profile.svg".into(), svg)]))
}

fn cmd_hausdorff(cli: &Cli, loaded: &Loaded) -> anyhow::Result<CommandOutput> {
    let v = require_variety(loaded)?;
    let mode = loaded.mode;
    let count = count_or(cli, &v.system);
    let scales = scales_or(cli, mode);
    let cone = sampler::tangent_cone(&v.system, mode, count, loaded.seed ^ 0xC04E)?;
    let mut curve = Vec::new();
    for (i, &t) in scales.iter().enumerate() {
        let sample =
            sampler::sample_link(&v.system, t, count, loaded.seed.wrapping_add(i as u64), mode)?;
        let d = sampler::hausdorff_distance(&sample.points, &cone.cone_link.points)?;
        curve.push((t, d));
    }
    let svg = plot::line_plot(
        &format!("Hausdorff convergence to the cone link: {}", v.name),
        "t",
        "dist_H",
        true,
        true,
        &[plot::Series {
            label: "dist_H(X_t, cone)",
            points: curve.clone(),
        }],
    );
    let results = json!({
        "curve": curve,
        "cone_heuristic": cone.heuristic,
        "cone_polynomials": cone.cone_system.describe(),
    });
    Ok((results, EXIT_OK, vec![("hausdorff.svg".into(), svg)]))
}

fn link_or_fixture_complex(cli: &Cli, loaded: &Loaded) -> anyhow::Result<EmbeddedComplex> {
    if let Some(spec) = &cli.fixture {
        let spec = fixture::FixtureSpec::parse(spec)?;
        return fixture::embedded_fixture(&spec);
    }
    let v = require_variety(loaded)?;
    let mode = loaded.mode;
    let t = limit_scale(&scales_or(cli, mode), mode);
    let count = count_or(cli, &v.system);
    let sample = sampler::sample_link(&v.system, t, count, loaded.seed, mode)?;
    Ok(sampler::link_complex(&v.system, &sample, cli.knn)?)
}

fn cmd_systole(cli: &Cli, loaded: &Loaded) -> anyhow::Result<CommandOutput> {
    let cx = link_or_fixture_complex(cli, loaded)?;
    let est = transfer::epsilon0_estimate(&cx)?;
    let results = json!({
        "epsilon0": if est.epsilon0.is_finite() { Some(est.epsilon0) } else { None },
        "contractible_marker": !est.epsilon0.is_finite(),
        "method": est.method,
        "witness_length": est.witness.as_ref().map(|w| w.length),
        "witness_edge_count": est.witness_cycle.as_ref().map(|c| c.chain.len()),
        "witness_support_diameter": est.witness_cycle.as_ref().and_then(|c| c.support_diameter),
    });
    Ok((results, EXIT_OK, vec![]))
}

fn cmd_transfer(cli: &Cli, loaded: &Loaded) -> anyhow::Result<CommandOutput> {
    let cert = if let Some(spec) = &cli.fixture {
        let spec = fixture::FixtureSpec::parse(spec)?;
        match spec.name.as_str() {
            "figure1" => {
                let (x0, x1) = fixture::figure1_pair(&spec)?;
                let witness = transfer::epsilon0_estimate(&x1)?
                    .witness
                    .ok_or_else(|| anyhow!("no essential loop on the pinched oval"))?;
                transfer::transfer_certificate(&x0, &x1, &[witness], cli.trials, loaded.seed, None)?
            }
            "polygons" => {
                let (x0, x1) = fixture::polygons_pair(&spec);
                let loops: Vec<_> = [-1i64, 0, 1, 2]
                    .iter()
                    .map(|&k| linkscope::fixtures::polygon_winding_loop(&x1, k, 0))
                    .collect();
                transfer::transfer_certificate(&x0, &x1, &loops, cli.trials, loaded.seed, None)?
            }
            other => bail!("transfer supports fixtures 'figure1' and 'polygons', got '{other}'"),
        }
    } else {
        let v = require_variety(loaded)?;
        let mode = loaded.mode;
        let t = limit_scale(&scales_or(cli, mode), mode);
        let count = count_or(cli, &v.system);
        transfer::cone_link_transfer(&v.system, t, count, cli.trials, loaded.seed, mode)?
    };
    let code = if cert.refused() {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    };
    let results = serde_json::to_value(&cert)?;
    Ok((results, code, vec![]))
}

fn cmd_betti(cli: &Cli, loaded: &Loaded) -> anyhow::Result<CommandOutput> {
    let ring = ring_of(cli);
    let (label, betti) = if let Some(spec) = &cli.fixture {
        let parsed = fixture::FixtureSpec::parse(spec)?;
        let chain: ChainComplex = fixture::chain_fixture(&parsed)?;
        (spec.clone(), chain.betti(ring)?)
    } else {
        let v = require_variety(loaded)?;
        let mode = loaded.mode;
        let t = limit_scale(&scales_or(cli, mode), mode);
        let count = count_or(cli, &v.system);
        let (betti, _) = pipeline::link_homology(
            &v.system,
            t,
            count,
            loaded.seed,
            mode,
            cli.max_dim,
            2.2,
            ring,
        )?;
        (format!("{} link at t={t}", v.name), betti)
    };
    let svg = plot::betti_table("Betti numbers", &[(label.clone(), betti.betti.clone())]);
    let results = json!({
        "label": label,
        "betti": betti,
    });
    Ok((results, EXIT_OK, vec![("betti.svg".into(), svg)]))
}

fn cmd_choke(cli: &Cli, loaded: &Loaded) -> anyhow::Result<CommandOutput> {
    let v = require_variety(loaded)?;
    let mode = loaded.mode;
    let count = count_or(cli, &v.system);
    let scales = scales_or(cli, mode);
    let probe =
        pipeline::choking_probe(&v.system, &scales, cli.choke_dim, count, loaded.seed, mode)?;
    let results = serde_json::to_value(&probe)?;
    Ok((results, EXIT_OK, vec![]))
}

fn pipeline_config(cli: &Cli, loaded: &Loaded, system: &PolynomialSystem) -> PipelineConfig {
    PipelineConfig {
        count: count_or(cli, system),
        seed: loaded.seed,
        max_dim: cli.max_dim,
        dim_k: cli.dim_k,
        rips_factor: 2.2,
        trials: cli.trials,
        scales: scales_or(cli, Mode::Germ),
        epsilon_ball: cli.epsilon_ball,
    }
}

fn cmd_smooth(cli: &Cli, loaded: &Loaded) -> anyhow::Result<CommandOutput> {
    let v = require_variety(loaded)?;
    let config = pipeline_config(cli, loaded, &v.system);
    let report = pipeline::smoothness_verdict(&v.system, &config)?;
    let code = match report.verdict {
        pipeline::Verdict::Inconclusive => EXIT_INCONCLUSIVE,
        _ => EXIT_OK,
    };
    let plots = report
        .lne_profile
        .as_ref()
        .map(|p| {
            vec![(
                "smooth_lne_profile.svg".to_string(),
                profile_plot(p, &format!("Germ LNE profile: {}", v.name)),
            )]
        })
        .unwrap_or_default();
    Ok((serde_json::to_value(&report)?, code, plots))
}

fn cmd_infinity(cli: &Cli, loaded: &Loaded) -> anyhow::Result<CommandOutput> {
    let v = require_variety(loaded)?;
    let count = count_or(cli, &v.system);
    let scales = if cli.scales.is_empty() {
        vec![10.0, 100.0, 1000.0]
    } else {
        cli.scales.clone()
    };
    let profile = lne::llne_profile(&v.system, &scales, count, loaded.seed, Mode::Infinity, true)?;
    let t_far = limit_scale(&scales, Mode::Infinity);
    let t_near = scales.iter().copied().fold(f64::INFINITY, f64::min);
    let (affine_betti, _) = pipeline::link_homology(
        &v.system,
        t_near,
        count,
        loaded.seed ^ 0xAF,
        Mode::Infinity,
        cli.max_dim,
        2.2,
        Ring::Z2,
    )?;
    let cone = sampler::tangent_cone(&v.system, Mode::Infinity, count, loaded.seed ^ 0xC04E)?;
    let cone_betti =
        pipeline::sample_homology(&cone.cone_link.points, cli.max_dim, 2.2, Ring::Z2)?;
    let obstruction = if affine_betti.get(1) == 0 && cone_betti.get(1) > 0 {
        Some(format!(
            "affine link H1(Z2) = 0 but cone link H1(Z2) = {}: no Z2-epimorphism is possible, \
             so the set is not uniformly LNE at infinity",
            cone_betti.get(1)
        ))
    } else {
        None
    };
    let choke = pipeline::choking_probe(
        &v.system,
        &scales,
        cli.choke_dim,
        count,
        loaded.seed ^ 0xC4,
        Mode::Infinity,
    )?;
    let svg = profile_plot(&profile, &format!("LLNE profile at infinity: {}", v.name));
    let results = json!({
        "profile": &profile,
        "c_values": profile.c_values(),
        "affine_link_betti": affine_betti,
        "affine_link_scale": t_near,
        "cone_link_betti": cone_betti,
        "cone_heuristic": cone.heuristic,
        "far_scale": t_far,
        "obstruction": obstruction,
        "choke": choke,
    });
    Ok((results, EXIT_OK, vec![("infinity_profile.svg".into(), svg)]))
}

fn cmd_report(cli: &Cli, loaded: &Loaded) -> anyhow::Result<CommandOutput> {
    let v = require_variety(loaded)?;
    let config = pipeline_config(cli, loaded, &v.system);
    let verdict = pipeline::smoothness_verdict(&v.system, &config)?;
    let systole = link_or_fixture_complex(cli, loaded)
        .ok()
        .and_then(|cx| transfer::epsilon0_estimate(&cx).ok());
    let code = match verdict.verdict {
        pipeline::Verdict::Inconclusive => EXIT_INCONCLUSIVE,
        _ => EXIT_OK,
    };
    let plots = verdict
        .lne_profile
        .as_ref()
        .map(|p| {
            vec![(
                "report_lne_profile.svg".to_string(),
                profile_plot(p, &format!("Germ LNE profile: {}", v.name)),
            )]
        })
        .unwrap_or_default();
    let results = json!({
        "verdict": verdict,
        "link_systole": systole
            .map(|s| if s.epsilon0.is_finite() { Some(s.epsilon0) } else { None }),
    });
    Ok((results, code, plots))
}

fn profile_plot(profile: &lne::LlneProfile, title: &str) -> String {
    let points: Vec<(f64, f64)> = profile.entries.iter().map(|(t, r)| (*t, r.c)).collect();
    plot::line_plot(
        title,
        "t (log)",
        "C(t) (log)",
        true,
        true,
        &[plot::Series {
            label: "C(t)",
            points,
        }],
    )
}

fn write_outputs(
    cli: &Cli,
    config: &ConfigEcho,
    results: &Value,
    plots: &[(String, String)],
    started: Instant,
) -> anyhow::Result<()> {
    std::fs::create_dir_all(&cli.out)
        .with_context(|| format!("cannot create output dir {}", cli.out.display()))?;
    let report = Report {
        schema_version: SCHEMA_VERSION,
        command: cli.command.name(),
        config,
        results: results.clone(),
    };
    let payload = serde_json::to_string_pretty(&report)?;
    std::fs::write(cli.out.join("report.json"), &payload)?;
    // timestamps live in a separate metadata file so the report payload is
    // byte-identical across reruns
    let meta = json!({
        "timestamp_unix_ms": std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0),
        "duration_ms": started.elapsed().as_millis() as u64,
        "tool_version": env!("CARGO_PKG_VERSION"),
    });
    std::fs::write(
        cli.out.join("meta.json"),
        serde_json::to_string_pretty(&meta)?,
    )?;
    for (name, svg) in plots {
        std::fs::write(cli.out.join(name), svg)?;
    }
    println!("report: {}", cli.out.join("report.json").display());
    Ok(())
}

/// Classify an error for the process exit status.
pub fn exit_code_for_error(e: &anyhow::Error) -> i32 {
    for cause in e.chain() {
        if let Some(core) = cause.downcast_ref::<CoreError>() {
            return match core {
                CoreError::Parse { .. }
                | CoreError::InvalidConfig(_)
                | CoreError::NonPositiveScale(_)
                | CoreError::EmptySystem
                | CoreError::ArityMismatch(_)
                | CoreError::NonZeroConstantTerm(_) => EXIT_INVALID,
                _ => EXIT_INCONCLUSIVE,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some()
            || cause.downcast_ref::<toml::de::Error>().is_some()
        {
            return EXIT_INVALID;
        }
    }
    // unknown anyhow context (missing flags, unknown fixtures) is invalid input
    EXIT_INVALID
}
