use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};

use bloomlab::config::{
    self, ConstantsConfig, DominateConfig, ExponentsConfig, FormBoundConfig, LemmasConfig,
    SharpnessConfig, TestingConfig,
};
use bloomlab::report::{render, write_outputs, Meta, OutFormat, Outcome};
use bloomlab::{constants, dominate, exponents, formbound, lemmas, sharpness, testing};

#[derive(Parser)]
#[command(name = "bloomlab", version, about = "Dyadic laboratory for weighted sparse forms")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// TOML config file; unknown keys are errors
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config; default 17)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write rows here instead of stdout (plus a .meta.json sidecar)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Override the mesh refinement (depth, or band count for graded meshes)
    #[arg(long, global = true)]
    depth: Option<u32>,
    /// Worker threads; 0 means one per core
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Weight constants (A_p, RH_r, A_inf, symmetric brackets) on random weights
    Constants,
    /// Weighted-form-to-norm ratios against the exponent budget
    SparseForm,
    /// Constructive sparse domination of commutators, with per-level audits
    Dominate,
    /// Power-law blow-up rates in the fractional parameter
    Sharpness,
    /// Testing constants and the lower-form ascent on random families
    Testing,
    /// Scalar lemma checks (two, cov, coveq, fh, fs, duality, oscsparse)
    Lemmas,
    /// Closed-form exponent tables in exact arithmetic
    Exponents,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl FormatArg {
    fn to_format(self) -> OutFormat {
        match self {
            FormatArg::Csv => OutFormat::Csv,
            FormatArg::Json => OutFormat::Json,
        }
    }

    fn label(self) -> &'static str {
        match self {
            FormatArg::Csv => "csv",
            FormatArg::Json => "json",
        }
    }
}

/// The per-command glue: load a typed config, apply CLI overrides, run.
trait Experiment: serde::de::DeserializeOwned + serde::Serialize + Default + Sync {
    const NAME: &'static str;
    fn apply_depth(&mut self, depth: u32);
    fn validate(&self) -> Result<()>;
    fn seed(&self) -> Option<u64>;
    fn out(&self) -> Option<&str>;
    fn run(&self, seed: u64) -> Result<Outcome>;
}

macro_rules! experiment {
    ($ty:ty, $name:literal, $runner:path, $apply:expr) => {
        impl Experiment for $ty {
            const NAME: &'static str = $name;
            fn apply_depth(&mut self, depth: u32) {
                let f: fn(&mut $ty, u32) = $apply;
                f(self, depth);
            }
            fn validate(&self) -> Result<()> {
                <$ty>::validate(self)
            }
            fn seed(&self) -> Option<u64> {
                self.seed
            }
            fn out(&self) -> Option<&str> {
                self.out.as_deref()
            }
            fn run(&self, seed: u64) -> Result<Outcome> {
                $runner(self, seed)
            }
        }
    };
}

experiment!(ConstantsConfig, "constants", constants::run, |c, d| c.mesh.override_depth(d));
experiment!(FormBoundConfig, "sparse-form", formbound::run, |c, d| c.depth = d);
experiment!(DominateConfig, "dominate", dominate::run, |c, d| c.depth = d);
experiment!(SharpnessConfig, "sharpness", sharpness::run, |c, d| c.bands = d);
experiment!(TestingConfig, "testing", testing::run, |c, d| c.depth = d);
experiment!(LemmasConfig, "lemmas", lemmas::run, |c, d| c.depth = d);
experiment!(ExponentsConfig, "exponents", exponents::run, |_c, _d| ());

struct Failure {
    code: u8,
    err: anyhow::Error,
}

fn config_err(err: anyhow::Error) -> Failure {
    Failure { code: 2, err }
}

fn run_err(err: anyhow::Error) -> Failure {
    Failure { code: 1, err }
}

fn execute<E: Experiment>(cli: &Cli) -> Result<bool, Failure> {
    let mut cfg: E = config::load(cli.config.as_deref()).map_err(config_err)?;
    if let Some(d) = cli.depth {
        cfg.apply_depth(d);
    }
    cfg.validate().map_err(config_err)?;
    let seed = cli.seed.or(cfg.seed()).unwrap_or(config::DEFAULT_SEED);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| run_err(e.into()))?;
    let outcome = pool.install(|| cfg.run(seed)).map_err(run_err)?;

    let out_path = cli
        .out
        .clone()
        .or_else(|| cfg.out().map(PathBuf::from));
    match out_path {
        Some(path) => {
            let meta = Meta {
                experiment: E::NAME.to_string(),
                seed,
                format: cli.format.label().to_string(),
                argv: std::env::args().collect(),
                config: serde_json::to_value(&cfg).map_err(|e| run_err(e.into()))?,
                created_unix_ms: std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_millis() as u64)
                    .unwrap_or(0),
            };
            let written =
                write_outputs(&outcome, cli.format.to_format(), &path, &meta).map_err(run_err)?;
            println!("wrote {}", written.display());
            print!("{}", outcome.summary);
        }
        None => {
            let text = render(&outcome, cli.format.to_format()).map_err(run_err)?;
            print!("{text}");
            eprint!("{}", outcome.summary);
        }
    }

    for v in &outcome.violations {
        eprintln!("violation: {v}");
    }
    Ok(outcome.violations.is_empty())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Constants => execute::<ConstantsConfig>(&cli),
        Cmd::SparseForm => execute::<FormBoundConfig>(&cli),
        Cmd::Dominate => execute::<DominateConfig>(&cli),
        Cmd::Sharpness => execute::<SharpnessConfig>(&cli),
        Cmd::Testing => execute::<TestingConfig>(&cli),
        Cmd::Lemmas => execute::<LemmasConfig>(&cli),
        Cmd::Exponents => execute::<ExponentsConfig>(&cli),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure { code, err }) => {
            eprintln!("error: {err:#}");
            ExitCode::from(code)
        }
    }
}
