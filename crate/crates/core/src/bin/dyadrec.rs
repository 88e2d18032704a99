use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dyadrec::ingest::{load_snapshot, read_events, save_snapshot, LoadOptions, Provenance};
use dyadrec::metrics::{
    all_concentration, all_reciprocity, degree_assortativity, AssortativityMode, DEFAULT_BIN_WIDTH,
};
use dyadrec::nullmodels::{
    apply_regime, equidisperse, Regime, RegimeConfig, DEFAULT_SWAP_MULTIPLIER,
};
use dyadrec::report::{
    analyze, emit_comparison, render_report, run_regime_comparison, AnalysisOptions, OutputLock,
    ReportFormat, TOOL_VERSION,
};
use dyadrec::synth::{
    calibrate_dispersion, generate, mean_h_star, DegreeDistribution, SynthConfig,
};
use dyadrec::{Error, WeightedDigraph};

const EXIT_VALIDATION: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_DEGENERATE: u8 = 4;

/// Weighted reciprocity analysis and null models for directed call graphs.
#[derive(Parser)]
#[command(name = "dyadrec", version)]
struct Cli {
    /// Seed for every randomised step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "DYADREC_THREADS", default_value_t = 0)]
    threads: usize,
    /// Abort on malformed input and treat degenerate-input warnings as
    /// failures.
    #[arg(long, global = true)]
    strict: bool,
    /// Output format for reports and summaries.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => ReportFormat::Json,
            Format::Csv => ReportFormat::Csv,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Aggregate call-event logs (timestamp,caller,callee) into a graph snapshot.
    Ingest {
        #[arg(required = true)]
        events: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Mutual / asymmetric / null dyad counts.
    Census { graph: PathBuf },
    /// Per-dyad reciprocity records.
    Reciprocity {
        graph: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Per-vertex H and H* for vertices with out-degree >= 2.
    Concentration {
        graph: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Degree assortativity.
    Assortativity {
        graph: PathBuf,
        /// Use every directed arc (out-degree of source vs in-degree of
        /// target) instead of the mutual backbone.
        #[arg(long)]
        all_arcs: bool,
    },
    /// Spread each vertex's strength evenly over its out-arcs.
    Equidisperse {
        graph: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Degree-preserving rewiring of the mutual backbone.
    Rewire {
        graph: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        regime: RegimeArgs,
        /// Also equalise weights after rewiring.
        #[arg(long)]
        equidisperse: bool,
    },
    /// Build all four regime networks and compare their reciprocity.
    Regimes {
        graph: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        regime: RegimeArgs,
        #[command(flatten)]
        analysis: AnalysisArgs,
        /// Independent replicas with consecutive seeds.
        #[arg(long, default_value_t = 1)]
        replicas: u32,
        /// Also write the four regime graphs as snapshots.
        #[arg(long)]
        save_graphs: bool,
    },
    /// Generate a synthetic network.
    Synth(SynthArgs),
    /// Full analysis report for one graph.
    Report {
        graph: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        analysis: AnalysisArgs,
    },
}

#[derive(Args)]
struct RegimeArgs {
    /// Attempted swaps per backbone edge.
    #[arg(long, default_value_t = DEFAULT_SWAP_MULTIPLIER)]
    swap_multiplier: u32,
    /// Drop one-way arcs before building regimes.
    #[arg(long)]
    mutual_only: bool,
    /// Run the full swap budget instead of stopping once |r| < 0.005.
    #[arg(long)]
    no_early_stop: bool,
}

impl RegimeArgs {
    fn config(&self, seed: u64) -> RegimeConfig {
        let mut cfg = RegimeConfig {
            seed,
            swap_multiplier: self.swap_multiplier,
            keep_one_way: !self.mutual_only,
            ..RegimeConfig::default()
        };
        if self.no_early_stop {
            cfg.early_stop = None;
        }
        cfg
    }
}

#[derive(Args)]
struct AnalysisArgs {
    #[arg(long, default_value_t = DEFAULT_BIN_WIDTH)]
    bin_width: f64,
    /// Measure assortativity over all directed arcs.
    #[arg(long)]
    all_arcs: bool,
}

impl AnalysisArgs {
    fn options(&self) -> AnalysisOptions {
        AnalysisOptions {
            bin_width: self.bin_width,
            assortativity_mode: if self.all_arcs {
                AssortativityMode::AllArcs
            } else {
                AssortativityMode::MutualBackbone
            },
        }
    }
}

#[derive(Args)]
struct SynthArgs {
    /// JSON config file; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    vertices: Option<usize>,
    /// Power-law degree exponent.
    #[arg(long, conflicts_with_all = ["poisson", "regular"])]
    powerlaw: Option<f64>,
    /// Poisson mean degree.
    #[arg(long, conflicts_with = "regular")]
    poisson: Option<f64>,
    /// Regular degree.
    #[arg(long)]
    regular: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    assortativity: Option<f64>,
    #[arg(long, conflicts_with = "target_h_star")]
    dispersion: Option<f64>,
    /// Calibrate dispersion so mean H* lands near this value.
    #[arg(long)]
    target_h_star: Option<f64>,
    #[arg(short, long)]
    output: PathBuf,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_io() {
            EXIT_IO
        } else if e.is_degenerate() {
            EXIT_DEGENERATE
        } else {
            EXIT_VALIDATION
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: EXIT_IO,
        message: format!("{}: {e}", path.display()),
    }
}

/// Warnings that become exit code 4 under `--strict`.
#[derive(Default)]
struct Warnings(Vec<String>);

impl Warnings {
    fn push(&mut self, msg: String) {
        log::warn!("{msg}");
        self.0.push(msg);
    }
}

fn load(cli: &Cli, path: &Path) -> Result<WeightedDigraph, Failure> {
    Ok(load_snapshot(path, LoadOptions { strict: cli.strict })?.graph)
}

fn emit(output: Option<&Path>, body: &str) -> Result<(), Failure> {
    match output {
        Some(p) => std::fs::write(p, body).map_err(|e| io_failure(p, e)),
        None => match std::io::stdout().write_all(body.as_bytes()) {
            // reader went away (e.g. `| head`)
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            r => r.map_err(|e| io_failure(Path::new("<stdout>"), e)),
        },
    }
}

fn emit_value<T: Serialize>(cli: &Cli, value: &T) -> Result<(), Failure> {
    let body = match cli.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(value).map_err(Error::from)?;
            s.push('\n');
            s
        }
        Format::Csv => {
            let v = serde_json::to_value(value).map_err(Error::from)?;
            let mut s = String::from("key,value\n");
            flatten("", &v, &mut s);
            s
        }
    };
    emit(None, &body)
}

fn flatten(prefix: &str, v: &serde_json::Value, out: &mut String) {
    match v {
        serde_json::Value::Object(m) => {
            for (k, v) in m {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, out);
            }
        }
        serde_json::Value::Null => out.push_str(&format!("{prefix},\n")),
        serde_json::Value::String(s) => out.push_str(&format!("{prefix},{s}\n")),
        other => out.push_str(&format!("{prefix},{other}\n")),
    }
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String, Failure> {
    let bytes = w.into_inner().map_err(|e| Failure {
        code: EXIT_IO,
        message: e.to_string(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn run(cli: &Cli, warnings: &mut Warnings) -> Result<(), Failure> {
    match &cli.command {
        Command::Ingest { events, output } => {
            let (g, stats) = read_events(events, cli.strict)?;
            if stats.malformed_lines > 0 {
                warnings.push(format!("skipped {} malformed lines", stats.malformed_lines));
            }
            let prov = Provenance::new()
                .with("source", "ingest")
                .with("events_read", stats.events_read)
                .with("tool_version", TOOL_VERSION);
            save_snapshot(&g, output, &prov)?;
            emit_value(cli, &stats)
        }
        Command::Census { graph } => emit_value(cli, &load(cli, graph)?.dyad_census()),
        Command::Reciprocity { graph, output } => {
            let g = load(cli, graph)?;
            let mut w = csv_writer();
            w.write_record(["a", "b", "w_ab", "w_ba", "p_ab", "p_ba", "r", "class"])
                .map_err(Error::from)?;
            for r in all_reciprocity(&g) {
                w.write_record([
                    g.label(r.dyad.a).as_ref(),
                    g.label(r.dyad.b).as_ref(),
                    &r.dyad.w_ab.to_string(),
                    &r.dyad.w_ba.to_string(),
                    &r.p_ab.to_string(),
                    &r.p_ba.to_string(),
                    &r.r_value.to_string(),
                    r.class.as_str(),
                ])
                .map_err(Error::from)?;
            }
            emit(output.as_deref(), &finish_csv(w)?)
        }
        Command::Concentration { graph, output } => {
            let g = load(cli, graph)?;
            let mut w = csv_writer();
            w.write_record(["vertex", "out_degree", "h", "h_star"])
                .map_err(Error::from)?;
            for s in all_concentration(&g) {
                w.write_record([
                    g.label(s.vertex).as_ref(),
                    &g.out_degree(s.vertex)?.to_string(),
                    &s.h.to_string(),
                    &s.h_star.to_string(),
                ])
                .map_err(Error::from)?;
            }
            emit(output.as_deref(), &finish_csv(w)?)
        }
        Command::Assortativity { graph, all_arcs } => {
            let mode = if *all_arcs {
                AssortativityMode::AllArcs
            } else {
                AssortativityMode::MutualBackbone
            };
            emit_value(cli, &degree_assortativity(&load(cli, graph)?, mode)?)
        }
        Command::Equidisperse { graph, output } => {
            let g = equidisperse(&load(cli, graph)?);
            let prov = Provenance::new()
                .with("regime", Regime::ObservedEquidispersed)
                .with("tool_version", TOOL_VERSION);
            Ok(save_snapshot(&g, output, &prov)?)
        }
        Command::Rewire {
            graph,
            output,
            regime,
            equidisperse,
        } => {
            let mut cfg = regime.config(cli.seed);
            cfg.destroy_assortativity = true;
            cfg.impose_equidispersion = *equidisperse;
            let cell = apply_regime(&load(cli, graph)?, &cfg)?;
            let stats = cell.rewire.expect("rewired regime carries stats");
            if stats.stalled {
                warnings.push("no admissible swap found; backbone unchanged".into());
            }
            let prov = Provenance::new()
                .with("regime", cell.regime)
                .with("seed", cli.seed)
                .with("swap_multiplier", cfg.swap_multiplier)
                .with("attempted_swaps", stats.attempted_swaps)
                .with("accepted_swaps", stats.accepted_swaps)
                .with(
                    "residual_assortativity",
                    stats
                        .residual_assortativity
                        .map_or("undefined".into(), |r| r.to_string()),
                )
                .with("tool_version", TOOL_VERSION);
            save_snapshot(&cell.graph, output, &prov)?;
            emit_value(cli, &stats)
        }
        Command::Regimes {
            graph,
            out_dir,
            regime,
            analysis,
            replicas,
            save_graphs,
        } => {
            let g = load(cli, graph)?;
            let _lock = OutputLock::acquire(out_dir)?;
            let replicas = (*replicas).max(1);
            let mut verdicts = Vec::new();
            for k in 0..replicas {
                let seed = cli.seed.wrapping_add(k as u64);
                let dir = if replicas == 1 {
                    out_dir.clone()
                } else {
                    out_dir.join(format!("replica_{k}"))
                };
                std::fs::create_dir_all(&dir).map_err(|e| io_failure(&dir, e))?;
                let cfg = regime.config(seed);
                let cmp = match run_regime_comparison(&g, &cfg, &analysis.options()) {
                    Ok(c) => c,
                    Err(partial) => {
                        for r in &partial.completed {
                            let p = dir.join(format!(
                                "report_{}.{}",
                                r.provenance.regime,
                                ReportFormat::from(cli.format).extension()
                            ));
                            dyadrec::report::emit_report(r, cli.format.into(), &p)?;
                        }
                        return Err(partial.error.into());
                    }
                };
                emit_comparison(&cmp, cli.format.into(), &dir)?;
                if *save_graphs {
                    let four = dyadrec::nullmodels::four_regimes_with(&g, &cfg)?;
                    for r in Regime::ALL {
                        let prov = Provenance::new()
                            .with("regime", r)
                            .with("seed", seed)
                            .with("swap_multiplier", cfg.swap_multiplier)
                            .with("tool_version", TOOL_VERSION);
                        save_snapshot(four.get(r), &dir.join(format!("graph_{r}.csv")), &prov)?;
                    }
                }
                for r in &cmp.reports {
                    if r.assortativity.r.is_none() {
                        warnings.push(format!(
                            "{}: assortativity undefined ({})",
                            r.provenance.regime,
                            r.assortativity.note.as_deref().unwrap_or("")
                        ));
                    }
                }
                if cmp
                    .reports
                    .iter()
                    .any(|r| r.provenance.rewire.is_some_and(|s| s.stalled))
                {
                    warnings.push("rewiring stalled".into());
                }
                verdicts.push(serde_json::json!({ "seed": seed, "verdict": cmp.verdict }));
            }
            emit_value(cli, &verdicts)
        }
        Command::Synth(args) => synth(cli, args, warnings),
        Command::Report {
            graph,
            output,
            analysis,
        } => {
            let snap = load_snapshot(graph, LoadOptions { strict: cli.strict })?;
            let regime = snap.provenance.get("regime").unwrap_or("obs").to_string();
            let seed = snap.provenance.get("seed").and_then(|s| s.parse().ok());
            let rep = analyze(&snap.graph, &regime, seed, None, &analysis.options())?;
            if let Some(note) = &rep.assortativity.note {
                warnings.push(format!("assortativity undefined ({note})"));
            }
            emit(output.as_deref(), &render_report(&rep, cli.format.into())?)
        }
    }
}

fn synth(cli: &Cli, args: &SynthArgs, warnings: &mut Warnings) -> Result<(), Failure> {
    let mut cfg = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| io_failure(p, e))?;
            serde_json::from_str::<SynthConfig>(&text).map_err(Error::from)?
        }
        None => SynthConfig::default(),
    };
    cfg.seed = cli.seed;
    if let Some(v) = args.vertices {
        cfg.vertex_count = v;
    }
    if let Some(exponent) = args.powerlaw {
        cfg.degree_distribution = DegreeDistribution::PowerLaw {
            exponent,
            min_degree: 2,
            max_degree: None,
        };
    }
    if let Some(mean) = args.poisson {
        cfg.degree_distribution = DegreeDistribution::Poisson { mean };
    }
    if let Some(degree) = args.regular {
        cfg.degree_distribution = DegreeDistribution::Regular { degree };
    }
    if let Some(r) = args.assortativity {
        cfg.target_assortativity = r;
    }
    if let Some(d) = args.dispersion {
        cfg.dispersion = d;
    }
    let out = match args.target_h_star {
        Some(h) => calibrate_dispersion(&cfg, h, 20)?,
        None => generate(&cfg)?,
    };
    if !out.target_reached {
        warnings.push(format!(
            "assortativity target {} not reached (achieved {})",
            cfg.target_assortativity,
            out.assortativity
                .map_or("undefined".into(), |r| format!("{r:.4}"))
        ));
    }
    let prov = Provenance::new()
        .with("source", "synth")
        .with("seed", cfg.seed)
        .with("config", serde_json::to_string(&cfg).map_err(Error::from)?)
        .with("tool_version", TOOL_VERSION);
    save_snapshot(&out.graph, &args.output, &prov)?;
    emit_value(
        cli,
        &serde_json::json!({
            "vertices": out.graph.vertex_count(),
            "arcs": out.graph.arc_count(),
            "assortativity": out.assortativity,
            "target_reached": out.target_reached,
            "mean_h_star": mean_h_star(&out.graph),
            "dropped_stubs": out.dropped_stubs,
        }),
    )
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            log::warn!("could not size thread pool: {e}");
        }
    }
    let mut warnings = Warnings::default();
    match run(&cli, &mut warnings) {
        Ok(()) if cli.strict && !warnings.0.is_empty() => {
            eprintln!(
                "error: {} warning(s) escalated by --strict",
                warnings.0.len()
            );
            ExitCode::from(EXIT_DEGENERATE)
        }
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
