use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use datapal::output::EnergyDocument;
use datapal::terms::load_term_table;
use datapal::{
    load_name_matrix, render_svg, run_pipeline, score_palette, trace_csv, ChartDataset, Error,
    PaletteDocument, Result, RunConfig, RunSettings,
};
use datapal_core::graph::GraphKind;
use datapal_core::HueTermTable;
use serde_json::json;

/// Data-aware categorical color palettes.
///
/// Exit codes: 0 success, 1 invalid input, 2 no palette satisfies the
/// constraints.
#[derive(Parser)]
#[command(name = "datapal", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize a palette for a dataset
    Optimize {
        dataset: PathBuf,
        #[command(flatten)]
        run: RunFlags,
        /// Palette JSON output (stdout when omitted)
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Also write an SVG preview
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Also write the energy trace as CSV
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Stop after this many seconds and keep the best palette so far
        #[arg(long)]
        time_budget: Option<f64>,
    },
    /// Score an existing palette against a dataset
    Score {
        dataset: PathBuf,
        #[arg(long)]
        palette: PathBuf,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Print the neighbor graph of a dataset as JSON
    Graph {
        dataset: PathBuf,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Render a palette onto a dataset as SVG
    Render {
        dataset: PathBuf,
        #[arg(long)]
        palette: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunFlags {
    /// Weights of point distinctness, name difference and color discrimination
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    /// Background color, #RRGGBB
    #[arg(long)]
    background: Option<String>,
    /// Allowed basic color terms, comma separated
    #[arg(long, value_delimiter = ',')]
    terms: Vec<String>,
    /// Lightness interval MIN,MAX
    #[arg(long, value_delimiter = ',', conflicts_with = "auto_lightness")]
    lightness: Option<Vec<f64>>,
    /// Derive the lightness interval from the background
    #[arg(long)]
    auto_lightness: bool,
    /// Alpha-shape radius in pixels (default: 1.5x the median Delaunay edge)
    #[arg(long, conflicts_with = "knn")]
    alpha: Option<f64>,
    /// Use a k-nearest-neighbor graph instead of the alpha shape
    #[arg(long)]
    knn: Option<usize>,
    /// Line resampling step in pixels
    #[arg(long)]
    spacing: Option<f64>,
    #[arg(long, default_value_t = datapal_core::AnnealConfig::default().seed)]
    seed: u64,
    /// Independent runs with seeds SEED, SEED+1, ...; the best wins
    #[arg(long)]
    restarts: Option<usize>,
    /// Lock a class color, CLASS=#RRGGBB (class index or name); repeatable
    #[arg(long = "lock")]
    locks: Vec<String>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    cooling: Option<f64>,
    #[arg(long)]
    t_start: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Proposals per temperature level (default: class count)
    #[arg(long)]
    proposals: Option<usize>,
    /// Hue-term table overrides (TOML)
    #[arg(long)]
    term_table: Option<PathBuf>,
    /// Name-count matrix CSV (default: built-in basic-term matrix)
    #[arg(long)]
    names: Option<PathBuf>,
}

impl RunFlags {
    fn settings(&self, ds: &ChartDataset) -> Result<RunSettings> {
        let mut locked = Vec::new();
        if !self.locks.is_empty() {
            locked = vec![None; ds.class_count()];
            for spec in &self.locks {
                let (class, hex) = spec
                    .split_once('=')
                    .ok_or_else(|| invalid("--lock", format!("expected CLASS=#RRGGBB, got {spec:?}")))?;
                let index = ds
                    .class_names
                    .iter()
                    .position(|n| n == class)
                    .or_else(|| class.parse::<usize>().ok().filter(|&i| i < ds.class_count()))
                    .ok_or_else(|| invalid("--lock", format!("unknown class {class:?}")))?;
                locked[index] = Some(hex.to_string());
            }
        }
        let weights = match self.weights.as_deref() {
            None => None,
            Some(&[a, b, c]) => Some([a, b, c]),
            Some(_) => return Err(invalid("--weights", "expected three comma-separated values".into())),
        };
        let lightness = match self.lightness.as_deref() {
            None => None,
            Some(&[lo, hi]) => Some([lo, hi]),
            Some(_) => return Err(invalid("--lightness", "expected MIN,MAX".into())),
        };
        Ok(RunSettings {
            weights,
            background: self.background.clone(),
            hue_terms: self.terms.clone(),
            lightness,
            auto_lightness: self.auto_lightness,
            alpha: self.alpha,
            knn: self.knn,
            spacing: self.spacing,
            seed: Some(self.seed),
            restarts: self.restarts,
            locked,
            tau: self.tau,
            cooling: self.cooling,
            t_start: self.t_start,
            t_end: self.t_end,
            proposals_per_temperature: self.proposals,
        })
    }

    fn config(&self, ds: &ChartDataset) -> Result<RunConfig> {
        let table = match &self.term_table {
            Some(path) => load_term_table(path)?,
            None => HueTermTable::default(),
        };
        self.settings(ds)?.resolve(&table)
    }
}

fn invalid(field: &str, message: String) -> Error {
    Error::Validation {
        field: field.into(),
        message,
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })
}

fn emit(out: Option<&Path>, contents: &str) -> Result<()> {
    match out {
        Some(path) => write(path, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Optimize {
            dataset,
            run,
            out,
            svg,
            trace,
            time_budget,
        } => {
            let ds = ChartDataset::load(&dataset)?;
            let mut rc = run.config(&ds)?;
            if let Some(secs) = time_budget {
                rc.time_budget = Some(
                    Duration::try_from_secs_f64(secs)
                        .map_err(|_| invalid("--time-budget", format!("invalid duration {secs}")))?,
                );
            }
            let names = load_name_matrix(run.names.as_deref())?;
            let output = run_pipeline(&ds, &rc, &names)?;
            let r = &output.result;
            let energy = EnergyDocument::new(&r.breakdown, &r.weights);
            let doc = PaletteDocument::new(&r.best_palette, &ds.class_names, Some(energy));
            emit(out.as_deref(), &doc.to_json())?;
            if let Some(path) = svg {
                write(&path, &render_svg(&ds, &r.best_palette)?)?;
            }
            if let Some(path) = trace {
                write(&path, &trace_csv(&r.trace))?;
            }
            eprintln!(
                "energy {:.6} after {} iterations in {:.2}s (seed {})",
                r.best_energy, r.iterations, r.wall_time, output.seed
            );
            for w in &output.warnings {
                eprintln!("warning: {w}");
            }
        }
        Command::Score { dataset, palette, run } => {
            let ds = ChartDataset::load(&dataset)?;
            let rc = run.config(&ds)?;
            let names = load_name_matrix(run.names.as_deref())?;
            let p = PaletteDocument::load(&palette)?.to_palette()?;
            let (energy, weights) = score_palette(&ds, &rc, &names, &p)?;
            let doc = json!({ "energy": EnergyDocument::new(&energy, &weights) });
            println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
        }
        Command::Graph { dataset, run } => {
            let ds = ChartDataset::load(&dataset)?;
            let rc = run.config(&ds)?;
            let marks = ds.marks(&rc.graph, rc.spacing)?;
            let kind = match marks.graph.kind() {
                GraphKind::Delaunay => json!({"type": "delaunay"}),
                GraphKind::AlphaShape { radius } => json!({"type": "alpha", "radius": radius}),
                GraphKind::Knn { k } => json!({"type": "knn", "k": k}),
                GraphKind::Path => json!({"type": "path"}),
            };
            let points: Vec<_> = marks
                .points
                .points()
                .iter()
                .zip(marks.points.labels())
                .map(|(p, l)| json!([p.x, p.y, l]))
                .collect();
            let edges: Vec<_> = marks.graph.edges().iter().map(|&(i, j, d)| json!([i, j, d])).collect();
            let doc = json!({
                "graph": kind,
                "points": points,
                "edges": edges,
                "warnings": marks.graph.warnings(),
            });
            println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
        }
        Command::Render { dataset, palette, out } => {
            let ds = ChartDataset::load(&dataset)?;
            let p = PaletteDocument::load(&palette)?.to_palette()?;
            emit(out.as_deref(), &render_svg(&ds, &p)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
