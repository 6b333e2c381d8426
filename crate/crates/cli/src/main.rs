use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use involution_core::analysis::{self, Analysis, AnalysisOptions, MapSpec};
use involution_core::gallery;
use involution_core::render::{leaves_svg, write_leaves_csv};
use involution_core::Point;

#[derive(Parser)]
#[command(
    name = "involution",
    version,
    about = "Analyze planar involutions and trace their invariant foliations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every check and write a JSON report.
    Analyze(Shared),
    /// Trace leaves of the invariant foliation and export them.
    Foliate {
        #[command(flatten)]
        shared: Shared,
        /// Trace even when the hypotheses fail on the window.
        #[arg(long)]
        force: bool,
    },
    /// Inspect the built-in maps.
    Gallery {
        #[command(subcommand)]
        action: GalleryAction,
    },
}

#[derive(Subcommand)]
enum GalleryAction {
    List,
    Show {
        /// NAME or NAME:n
        name: String,
    },
}

#[derive(Args)]
#[group(id = "source", required = true, multiple = false)]
struct Source {
    /// Map as "(f1, f2)" in x and y, or gallery:NAME[:n].
    #[arg(long, group = "source", allow_hyphen_values = true)]
    map: Option<String>,
    /// Built-in map NAME[:n].
    #[arg(long, group = "source")]
    gallery: Option<String>,
}

#[derive(Args)]
struct Shared {
    #[command(flatten)]
    source: Source,
    /// XMIN,XMAX,YMIN,YMAX (default -5,5,-5,5 or the gallery entry's window)
    #[arg(long, allow_hyphen_values = true, value_parser = parse_window)]
    window: Option<[f64; 4]>,
    #[arg(long, default_value_t = 41)]
    grid: usize,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Side of the injectivity scan lattice.
    #[arg(long, default_value_t = 201)]
    scan: usize,
    /// Conjugate by the translation to X,Y before analysing.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_point)]
    recenter: Option<Point>,
    /// Number of leaves to trace.
    #[arg(long)]
    leaves: Option<usize>,
    /// Continuation step in the target plane.
    #[arg(long)]
    step: Option<f64>,
    /// Report path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn parse_numbers<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<Result<_, _>>()?;
    parts
        .try_into()
        .map_err(|v: Vec<f64>| format!("expected {N} comma-separated numbers, got {}", v.len()))
}

fn parse_window(s: &str) -> Result<[f64; 4], String> {
    parse_numbers::<4>(s)
}

fn parse_point(s: &str) -> Result<Point, String> {
    parse_numbers::<2>(s).map(|[x, y]| Point::new(x, y))
}

impl Shared {
    fn spec(&self) -> Result<MapSpec> {
        let spec = match (&self.source.map, &self.source.gallery) {
            (Some(m), _) => m.parse::<MapSpec>(),
            (None, Some(g)) => format!("gallery:{g}").parse::<MapSpec>(),
            (None, None) => bail!("one of --map or --gallery is required"),
        };
        spec.map_err(|e| anyhow::anyhow!("[parse] {e}"))
    }

    fn options(&self) -> AnalysisOptions {
        AnalysisOptions {
            window: self.window,
            grid: self.grid,
            epsilon: self.eps,
            tol: self.tol,
            scan: self.scan,
            recenter: self.recenter,
            leaves: self.leaves,
            step: self.step,
            ..AnalysisOptions::default()
        }
    }
}

fn write_report(a: &Analysis, out: Option<&Path>) -> Result<()> {
    let json = serde_json::to_string_pretty(&a.report)?;
    match out {
        Some(p) => {
            fs::write(p, json + "\n").with_context(|| format!("[output] writing {}", p.display()))
        }
        None => {
            let mut stdout = io::stdout().lock();
            writeln!(stdout, "{json}")?;
            Ok(())
        }
    }
}

fn write_leaves(a: &Analysis, svg: Option<&Path>, csv: Option<&Path>) -> Result<()> {
    if let Some(p) = csv {
        let file =
            fs::File::create(p).with_context(|| format!("[output] creating {}", p.display()))?;
        write_leaves_csv(file, &a.leaves)
            .with_context(|| format!("[output] writing {}", p.display()))?;
    }
    if let Some(p) = svg {
        let doc = leaves_svg(&a.report.window, &a.leaves, &a.report.fixed_points);
        fs::write(p, doc).with_context(|| format!("[output] writing {}", p.display()))?;
    }
    Ok(())
}

fn show_entry(name: &str) -> Result<()> {
    let (name, n) = gallery::parse_spec(name)?;
    let e = gallery::get(&name, n)?;
    let mut s = io::stdout().lock();
    match e.n {
        Some(n) => writeln!(s, "{} (n = {n}): {}", e.name, e.tag)?,
        None => writeln!(s, "{}: {}", e.name, e.tag)?,
    }
    writeln!(s, "  map:         {}", e.formula)?;
    if let Some(c) = e.recentered_at {
        writeln!(s, "  recentered:  at {c}, analysed as {}", e.map)?;
    }
    writeln!(s, "  orientation: {}", e.expected.orientation)?;
    writeln!(s, "  window:      {}", e.default_window)?;
    writeln!(s, "  expected:    {}", e.expected.known_verdict)?;
    if let Some(h) = &e.expected.known_h {
        writeln!(s, "  h:           {h}")?;
    }
    if let Some(f) = &e.expected.known_foliation {
        writeln!(s, "  leaves:      {f}")?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze(shared) => {
            let a = analysis::analyze(&shared.spec()?, &shared.options())?;
            write_report(&a, shared.out.as_deref())?;
            write_leaves(&a, shared.svg.as_deref(), shared.csv.as_deref())
        }
        Command::Foliate { shared, force } => {
            let a = analysis::foliate(&shared.spec()?, &shared.options(), force)?;
            if shared.out.is_some() {
                write_report(&a, shared.out.as_deref())?;
            }
            if shared.svg.is_none() && shared.csv.is_none() {
                write_leaves_csv(io::stdout().lock(), &a.leaves)?;
            }
            write_leaves(&a, shared.svg.as_deref(), shared.csv.as_deref())?;
            let r = &a.report;
            eprintln!(
                "{} leaves ({} truncated), foliation {}",
                r.leaf_count,
                r.leaves_truncated,
                if r.foliation_certified {
                    "certified on window"
                } else {
                    "uncertified"
                }
            );
            Ok(())
        }
        Command::Gallery { action } => match action {
            GalleryAction::List => {
                let mut s = io::stdout().lock();
                for name in gallery::list_entries() {
                    let e = gallery::get(name, None)?;
                    writeln!(s, "{name:<15} {}", e.tag)?;
                }
                Ok(())
            }
            GalleryAction::Show { name } => show_entry(&name),
        },
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
