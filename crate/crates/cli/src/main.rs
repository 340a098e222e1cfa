use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sosgap::certify::Verdict;
use sosgap::groups::GroupDescriptor;
use sosgap::pipeline::{Config, Formulation, Manifest, Pipeline, Stage, StageRun};
use sosgap::sdp::SolverMethod;
use sosgap::symmetry::SymmetryKind;

/// Certified spectral-gap lower bounds for group rings.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// Artifact directory.
    #[arg(long, env = "SOSGAP_ROOT", default_value = "sosgap-run", global = true)]
    root: PathBuf,
    /// TOML run description; replaces the config recorded in the manifest.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Allow stages whose memory estimate exceeds the element budget.
    #[arg(long, global = true)]
    big: bool,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// e.g. `sl:3`, `saut:5`, `sym:4`, `z:2`.
    #[arg(long, global = true)]
    group: Option<GroupDescriptor>,
    #[arg(long, global = true)]
    radius: Option<usize>,
    /// trivial, permutations or signed.
    #[arg(long, global = true)]
    symmetry: Option<SymmetryKind>,
    /// sop or op.
    #[arg(long, global = true)]
    formulation: Option<Formulation>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    tau_neg: Option<f64>,
    /// auto, admm or interior_point.
    #[arg(long, global = true, value_parser = parse_method)]
    method: Option<SolverMethod>,
    #[arg(long, global = true)]
    accuracy: Option<f64>,
    #[arg(long, global = true)]
    max_iters: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate B_{2r}, store the BFS tree and Δ, Δ².
    Ball,
    /// Division table E⁻¹ × E → E⁻¹E.
    Table,
    /// Permutation representation of Σ on E and the minimal projections.
    Preps,
    /// Isotypical bases U_π.
    Wedderburn,
    /// Σ-orbits of E⁻¹E.
    Orbits,
    /// Assemble the SDP.
    BuildSdp,
    /// Solve for λ and the Gram blocks.
    Solve,
    /// Assemble the full Gram matrix from the blocks.
    Reconstruct,
    /// Interval certification of the solution.
    Certify,
    /// Independent recomputation of the certificate.
    Recheck,
    /// Summarize the certificate.
    Report,
    /// Write the SDP (and its face reduction) in SDPA sparse format.
    ExportSdpa,
    /// Run every stage up to recheck, then report.
    Run,
    /// Print the effective config as TOML.
    ShowConfig,
}

fn parse_method(s: &str) -> Result<SolverMethod, String> {
    match s {
        "auto" => Ok(SolverMethod::Auto),
        "admm" => Ok(SolverMethod::Admm),
        "ipm" | "interior_point" | "interior-point" => Ok(SolverMethod::InteriorPoint),
        _ => Err(format!("unknown method `{s}`")),
    }
}

impl Overrides {
    fn apply(&self, c: &mut Config) {
        if let Some(g) = self.group {
            c.group = g;
        }
        if let Some(r) = self.radius {
            c.radius = r;
        }
        if let Some(s) = self.symmetry {
            c.symmetry = s;
        }
        if let Some(f) = self.formulation {
            c.formulation = f;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(t) = self.tau_neg {
            c.tau_neg = t;
        }
        if let Some(m) = self.method {
            c.solver.method = m;
        }
        if let Some(a) = self.accuracy {
            c.solver.accuracy = a;
        }
        if let Some(n) = self.max_iters {
            c.solver.max_iters = n;
        }
    }
}

fn stage_of(c: &Command) -> Option<Stage> {
    Some(match c {
        Command::Ball => Stage::Ball,
        Command::Table => Stage::Table,
        Command::Preps => Stage::Preps,
        Command::Wedderburn => Stage::Wedderburn,
        Command::Orbits => Stage::Orbits,
        Command::BuildSdp => Stage::BuildSdp,
        Command::Solve => Stage::Solve,
        Command::Reconstruct => Stage::Reconstruct,
        Command::Certify => Stage::Certify,
        Command::Recheck => Stage::Recheck,
        Command::Report => Stage::Report,
        Command::ExportSdpa => Stage::ExportSdpa,
        Command::Run | Command::ShowConfig => return None,
    })
}

fn announce(r: &StageRun) {
    let state = if r.ran { "done" } else { "up to date" };
    eprintln!("{}: {state}", r.stage);
    if r.stage != Stage::Report {
        println!("{} {}", r.stage, r.info);
    }
}

fn verdict_code(p: &Pipeline) -> sosgap::Result<ExitCode> {
    Ok(match p.certificate()?.verdict {
        Verdict::Certified => ExitCode::SUCCESS,
        Verdict::Inconclusive => ExitCode::from(2),
    })
}

fn effective_config(cli: &Cli) -> sosgap::Result<Config> {
    let mut c = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Manifest::load(&cli.root)?.map(|m| m.config).unwrap_or_default(),
    };
    cli.overrides.apply(&mut c);
    Ok(c)
}

fn main_inner(cli: Cli) -> sosgap::Result<ExitCode> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| sosgap::Error::Config(e.to_string()))?;
    }
    let config = effective_config(&cli)?;
    if let Command::ShowConfig = cli.command {
        print!("{}", config.to_toml());
        return Ok(ExitCode::SUCCESS);
    }
    let mut p = Pipeline::open(&cli.root, Some(config))?;
    p.set_big(cli.big);
    match stage_of(&cli.command) {
        Some(stage) => {
            let run = p.run(stage)?;
            announce(&run);
            match stage {
                Stage::Report => {
                    print!("{}", run.info["text"].as_str().unwrap_or_default());
                    verdict_code(&p)
                }
                Stage::Certify | Stage::Recheck => verdict_code(&p),
                _ => Ok(ExitCode::SUCCESS),
            }
        }
        None => {
            for r in p.run_through(Stage::Recheck)? {
                announce(&r);
            }
            let run = p.run(Stage::Report)?;
            announce(&run);
            print!("{}", run.info["text"].as_str().unwrap_or_default());
            verdict_code(&p)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match main_inner(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
