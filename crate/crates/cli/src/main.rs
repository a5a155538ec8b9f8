use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use wstate_witness::cavity::{phase_matching_grid, CavityParams, PumpGeometry};
use wstate_witness::classify::{
    classify_state, locate_entangled_subsets, AutoBounds, Classification, LocateReport,
    OracleBounds, WFamilyBounds,
};
use wstate_witness::fockstate::{DensityOperator, Fixture};
use wstate_witness::losschannel::{
    apply_loss, sweep_eta, w5_weights, Efficiencies, SweepGrid, SweepMode,
};
use wstate_witness::oracle::{self, CertificateReport, OracleConfig};
use wstate_witness::partition::ModePartition;
use wstate_witness::selftest::run_selftest;
use wstate_witness::witness::{self, SolverConfig, WWeights, WitnessConfig};
use wstate_witness::Exec;

const DEFAULT_SEED: u64 = 0x5eed;

/// Entanglement witnesses for the four-mode W state of a four-pump microcavity.
#[derive(Debug, Parser)]
#[command(name = "wwitness", version)]
struct Cli {
    /// TOML or JSON config file (by extension; anything but `.json` is TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Global seed for every randomized search; overrides the config file.
    #[arg(long, global = true, env = "W_WITNESS_SEED")]
    seed: Option<u64>,
    /// Run all inner loops on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Phase-matching map over a square wave-vector grid, as CSV (kx,ky,phi).
    PhaseMatch {
        /// Grid points per axis.
        #[arg(long, default_value_t = 512)]
        grid: usize,
        /// Half-width of the grid in units of k_0.
        #[arg(long, default_value_t = 0.03)]
        k_max: f64,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Separability bound of a W-type witness, as JSON.
    Witness {
        #[command(flatten)]
        weights: WeightArgs,
        /// Efficiency of mode 4 for --eta; defaults to --eta.
        #[arg(long, requires = "eta")]
        eta_prime: Option<f64>,
        #[arg(long, value_enum, default_value_t = WitnessMode::Full)]
        mode: WitnessMode,
        /// One-based modes that must stay separated in `part` mode.
        /// Defaults to mode 5 for the --eta family, none otherwise.
        #[arg(long, value_delimiter = ',')]
        forced_singletons: Option<Vec<usize>>,
        /// Also report the maximizing partition and the optimizer r.
        #[arg(long)]
        emit_certificate: bool,
    },
    /// Detection thresholds under loss, as CSV.
    SweepEta {
        /// `iso`: one efficiency for all modes; `grid`: (eta, eta') square.
        #[arg(long, value_enum, default_value_t = SweepKind::Iso)]
        mode: SweepKind,
        /// Points per axis over [0, 1]. Defaults: 1001 for iso, 201 for grid.
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brute-force maximum of <L> over product states, as JSON.
    Oracle {
        /// Operator or pure-state fixture {n_modes, re, im}.
        #[arg(long)]
        operator: PathBuf,
        /// One-based partition such as `123:4`; default is full separation.
        #[arg(long, conflicts_with = "part")]
        partition: Option<String>,
        /// Maximize over all partial separations instead.
        #[arg(long)]
        part: bool,
        /// One-based modes kept separated with --part.
        #[arg(long, value_delimiter = ',', requires = "part")]
        forced_singletons: Vec<usize>,
    },
    /// Bipartition tests and entangled-subset location, as JSON.
    Classify {
        /// State fixture; a pure state is used as its projector.
        #[arg(long, required_unless_present = "eta", conflicts_with = "eta")]
        state: Option<PathBuf>,
        /// Witness operator fixture; defaults to the state itself.
        #[arg(long)]
        witness: Option<PathBuf>,
        /// Lossy W4 with efficiencies (eta, eta, eta, eta'), tested against itself.
        #[arg(long)]
        eta: Option<f64>,
        /// Efficiency of mode 4; defaults to --eta.
        #[arg(long, requires = "eta")]
        eta_prime: Option<f64>,
        /// Skip the recursive location of entangled subsets.
        #[arg(long)]
        no_locate: bool,
    },
    /// Cross-checks between solver, closed forms and oracle; exit 3 on failure.
    Selftest {
        /// Emit the report as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, clap::Args)]
#[group(required = true, multiple = false)]
struct WeightArgs {
    /// Comma-separated weight moduli; normalized before use.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    /// Five-mode purification of W4 with efficiencies (eta, eta, eta, eta').
    #[arg(long)]
    eta: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum WitnessMode {
    Full,
    Part,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SweepKind {
    Iso,
    Grid,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Config {
    seed: Option<u64>,
    cavity: CavityParams,
}

impl Config {
    fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let parsed = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(anyhow::Error::from)
        } else {
            toml::from_str(&text).map_err(anyhow::Error::from)
        };
        let cfg: Config = parsed.with_context(|| format!("invalid config {}", path.display()))?;
        cfg.cavity.validate()?;
        Ok(cfg)
    }
}

struct Settings {
    seed: u64,
    exec: Exec,
    cavity: CavityParams,
}

impl Settings {
    fn solver(&self) -> SolverConfig {
        SolverConfig {
            seed: self.seed,
            ..Default::default()
        }
    }

    fn witness(&self) -> WitnessConfig {
        WitnessConfig {
            solver: self.solver(),
            exec: self.exec,
            ..Default::default()
        }
    }

    fn oracle(&self) -> OracleConfig {
        OracleConfig {
            seed: self.seed,
            exec: self.exec,
            ..Default::default()
        }
    }
}

#[derive(Serialize)]
struct WitnessReport {
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    partition: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    optimizer_r: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct ClassifyReport {
    classification: Classification,
    #[serde(skip_serializing_if = "Option::is_none")]
    location: Option<LocateReport>,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

fn emit(text: &str) -> anyhow::Result<()> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())?;
    Ok(out.flush()?)
}

fn open_out(path: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(
            fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn read_fixture(path: &Path) -> anyhow::Result<DensityOperator> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Fixture::from_json(&text)?.to_operator_or_projector()?)
}

fn zero_based(modes: &[usize]) -> anyhow::Result<Vec<usize>> {
    modes
        .iter()
        .map(|&m| {
            m.checked_sub(1)
                .ok_or_else(|| anyhow!("mode labels are one-based"))
        })
        .collect()
}

fn eta_pair(eta: f64, eta_prime: Option<f64>) -> (f64, f64) {
    (eta, eta_prime.unwrap_or(eta))
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let ctx = Settings {
        seed: cli.seed.or(config.seed).unwrap_or(DEFAULT_SEED),
        exec: if cli.sequential {
            Exec::Sequential
        } else {
            Exec::default()
        },
        cavity: config.cavity,
    };

    match cli.command {
        Command::PhaseMatch { grid, k_max, out } => {
            let geometry = PumpGeometry::square(ctx.cavity.k_p);
            let map = phase_matching_grid(grid, k_max, &geometry, &ctx.cavity, ctx.exec)?;
            let mut w = csv::Writer::from_writer(open_out(&out)?);
            w.write_record(["kx", "ky", "phi"])?;
            for (ix, kx) in map.axis.iter().enumerate() {
                for (iy, ky) in map.axis.iter().enumerate() {
                    w.write_record([num(*kx), num(*ky), num(map.at(ix, iy))])?;
                }
            }
            w.flush()?;
        }
        Command::Witness {
            weights,
            eta_prime,
            mode,
            forced_singletons,
            emit_certificate,
        } => {
            let (w, default_forced) = match (weights.weights, weights.eta) {
                (Some(list), _) => {
                    let lambda = list.iter().map(|&x| x.into()).collect();
                    (WWeights::normalized(lambda)?, Vec::new())
                }
                (None, Some(eta)) => {
                    let (e, ep) = eta_pair(eta, eta_prime);
                    (w5_weights(e, ep)?, vec![4])
                }
                (None, None) => unreachable!("clap requires one of the group"),
            };
            let report = match mode {
                WitnessMode::Full => {
                    let o = witness::f_full(&w, &ctx.solver())?;
                    WitnessReport {
                        value: o.g_max,
                        partition: emit_certificate
                            .then(|| ModePartition::singletons(w.n_modes()).to_string()),
                        optimizer_r: emit_certificate.then_some(o.optimizer),
                    }
                }
                WitnessMode::Part => {
                    let forced = match forced_singletons {
                        Some(f) => zero_based(&f)?,
                        None => default_forced,
                    };
                    let o = witness::f_part(&w, &forced, &ctx.witness())?;
                    WitnessReport {
                        value: o.value,
                        partition: emit_certificate.then(|| o.partition.to_string()),
                        optimizer_r: emit_certificate.then_some(o.outcome.optimizer),
                    }
                }
            };
            emit(&format!("{}\n", serde_json::to_string(&report)?))?;
        }
        Command::SweepEta { mode, steps, out } => {
            let (kind, default_steps) = match mode {
                SweepKind::Iso => (SweepMode::Isotropic, 1001),
                SweepKind::Grid => (SweepMode::EtaEtaPrime, 201),
            };
            let rows = sweep_eta(
                SweepGrid::unit(steps.unwrap_or(default_steps)),
                kind,
                &ctx.witness(),
            )?;
            let mut w = csv::Writer::from_writer(open_out(&out)?);
            w.write_record([
                "eta",
                "etaprime",
                "trace_lhs",
                "f_full",
                "f_part",
                "partial",
                "full",
            ])?;
            for r in &rows {
                w.write_record([
                    num(r.eta),
                    num(r.eta_prime),
                    num(r.trace_lhs),
                    num(r.f_full),
                    num(r.f_part),
                    flag(r.partial).into(),
                    flag(r.full).into(),
                ])?;
            }
            w.flush()?;
        }
        Command::Oracle {
            operator,
            partition,
            part,
            forced_singletons,
        } => {
            let l = read_fixture(&operator)?;
            let outcome = if part {
                oracle::f_part(&l, &zero_based(&forced_singletons)?, &ctx.oracle())?.1
            } else {
                let p = match partition {
                    Some(text) => ModePartition::parse(&text, l.n_modes())?,
                    None => ModePartition::singletons(l.n_modes()),
                };
                oracle::max_product_expectation(&l, &p, &ctx.oracle())?
            };
            emit(&format!(
                "{}\n",
                serde_json::to_string(&CertificateReport::from(&outcome))?
            ))?;
        }
        Command::Classify {
            state,
            witness,
            eta,
            eta_prime,
            no_locate,
        } => {
            let rho = match (state, eta) {
                (Some(path), _) => read_fixture(&path)?,
                (None, Some(eta)) => {
                    let (e, ep) = eta_pair(eta, eta_prime);
                    apply_loss(&Efficiencies::eta_etaprime(e, ep)?)?
                }
                (None, None) => unreachable!("clap requires --state or --eta"),
            };
            let l = match witness {
                Some(path) => read_fixture(&path)?,
                None => rho.clone(),
            };
            let bounds = AutoBounds {
                w: WFamilyBounds {
                    solver: ctx.solver(),
                    ..Default::default()
                },
                oracle: OracleBounds {
                    config: ctx.oracle(),
                },
            };
            let classification = classify_state(&rho, &l, &bounds)?;
            let located = if no_locate {
                None
            } else {
                Some(locate_entangled_subsets(&rho, &l, &bounds)?)
            };
            let report = ClassifyReport {
                classification,
                location: located,
            };
            emit(&format!("{}\n", serde_json::to_string_pretty(&report)?))?;
        }
        Command::Selftest { json } => {
            let report = run_selftest(ctx.seed, ctx.exec)?;
            if json {
                emit(&format!("{}\n", serde_json::to_string_pretty(&report)?))?;
            } else {
                emit(&report.render())?;
            }
            if !report.passed() {
                return Ok(ExitCode::from(3));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
