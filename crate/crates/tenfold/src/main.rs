use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use tenfold::ensemble;
use tenfold::matkit::CMatrix;
use tenfold::pipeline::{self, Status};
use tenfold::spec::{self, Report, SetupSpec};
use tenfold::{presets, Error, Result};

#[derive(Parser)]
#[command(name = "tenfold", version, about = "Tenfold-way classification of quadratic fermion Hamiltonians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Setup file (JSON).
    spec: PathBuf,
    /// Seed; overrides the file's options.seed. Falls back to TENFOLD_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Copy, Clone, ValueEnum)]
enum Sampler {
    /// Basis sampling when the Nambu space is small, projection otherwise.
    Auto,
    Basis,
    Projection,
}

#[derive(Subcommand)]
enum Command {
    /// Classify every block (no oracle).
    Classify {
        #[command(flatten)]
        common: Common,
        /// Write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the JSON report instead of the table.
        #[arg(long)]
        json: bool,
    },
    /// Classify and compare every block with the brute-force oracle.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Draw Gaussian Hamiltonians; CSV columns sample_index,row,col,re,im.
    Sample {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Output CSV (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Sampler::Auto)]
        sampler: Sampler,
    },
    /// Sample spectra and gap-ratio statistics.
    Spectra {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Spectra CSV: sample_index,level_index,eigenvalue.
        #[arg(long)]
        out: PathBuf,
        /// Histogram CSV: bin_left,density.
        #[arg(long)]
        hist: Option<PathBuf>,
        /// Statistics JSON.
        #[arg(long)]
        stats: Option<PathBuf>,
        #[arg(long, default_value_t = 50)]
        bins: usize,
        #[arg(long, value_enum, default_value_t = Sampler::Auto)]
        sampler: Sampler,
    },
    /// The built-in catalog.
    Preset {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    /// Print preset names.
    List {
        /// Include degenerate extras.
        #[arg(long)]
        all: bool,
    },
    /// Write a preset as a setup file.
    Emit {
        name: String,
        /// Orbital size, where the preset has one.
        #[arg(long)]
        size: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(common: &Common) -> Result<(SetupSpec, u64)> {
    let text = std::fs::read_to_string(&common.spec)
        .map_err(|e| Error::schema("spec", format!("cannot read {}: {e}", common.spec.display())))?;
    let spec = spec::parse(&text)?;
    let env_seed = match std::env::var("TENFOLD_SEED") {
        Ok(s) => Some(s.trim().parse::<u64>().map_err(|_| Error::schema("TENFOLD_SEED", format!("not an integer: {s:?}")))?),
        Err(_) => None,
    };
    let seed = common.seed.or(spec.options.seed).or(env_seed).unwrap_or(0);
    Ok((spec, seed))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn draw(spec: &SetupSpec, seed: u64, count: usize, sampler: Sampler) -> Result<Vec<CMatrix>> {
    let projection = match sampler {
        Sampler::Auto => None,
        Sampler::Basis => Some(false),
        Sampler::Projection => Some(true),
    };
    ensemble::draw(&spec.to_setup()?, spec.tolerance()?, count, seed, projection)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn csv_writer(path: Option<&Path>) -> Result<csv::Writer<Box<dyn Write>>> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout()),
    };
    Ok(csv::Writer::from_writer(sink))
}

#[derive(Serialize)]
struct SpectraStats {
    schema_version: u32,
    tool_version: &'static str,
    setup: String,
    seed: u64,
    sample_count: usize,
    matrix_size: usize,
    mean_gap_ratio: f64,
    n_ratios: usize,
    excluded: usize,
}

fn analyse(common: &Common, verify: bool, out: Option<&Path>, json: bool) -> Result<bool> {
    let (spec, seed) = load(common)?;
    let tol = spec.tolerance()?;
    let setup = spec.to_setup()?;
    let analysis = if verify { pipeline::verify_setup(&setup, seed, tol)? } else { pipeline::classify_setup(&setup, seed)? };
    let report = Report::new(if verify { "verify" } else { "classify" }, &spec, seed, tol, &analysis);
    if let Some(p) = out {
        std::fs::write(p, report.to_json())?;
    }
    write_out(None, &if json { report.to_json() } else { report.table() })?;
    Ok(report.status != Status::Fail)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Classify { common, out, json } => analyse(&common, false, out.as_deref(), json),
        Command::Verify { common, out, json } => analyse(&common, true, out.as_deref(), json),
        Command::Sample { common, count, out, sampler } => {
            let (spec, seed) = load(&common)?;
            let hs = draw(&spec, seed, count, sampler)?;
            let mut w = csv_writer(out.as_deref())?;
            w.write_record(["sample_index", "row", "col", "re", "im"]).map_err(csv_err)?;
            for (k, h) in hs.iter().enumerate() {
                for i in 0..h.nrows() {
                    for j in 0..h.ncols() {
                        let z = h[(i, j)];
                        w.serialize((k, i, j, z.re, z.im)).map_err(csv_err)?;
                    }
                }
            }
            w.flush()?;
            Ok(true)
        }
        Command::Spectra { common, count, out, hist, stats, bins, sampler } => {
            let (spec, seed) = load(&common)?;
            let hs = draw(&spec, seed, count, sampler)?;
            let spectra = hs.iter().map(|h| ensemble::sector_levels(h, spec.dim_v)).collect::<Result<Vec<_>>>()?;
            let st = ensemble::gap_ratio_stats(&spectra, bins)?;
            let mut w = csv_writer(Some(&out))?;
            w.write_record(["sample_index", "level_index", "eigenvalue"]).map_err(csv_err)?;
            for (k, s) in spectra.iter().enumerate() {
                for (i, e) in s.iter().enumerate() {
                    w.serialize((k, i, e)).map_err(csv_err)?;
                }
            }
            w.flush()?;
            if let Some(p) = hist {
                let mut w = csv_writer(Some(&p))?;
                w.write_record(["bin_left", "density"]).map_err(csv_err)?;
                for (l, d) in &st.histogram {
                    w.serialize((l, d)).map_err(csv_err)?;
                }
                w.flush()?;
            }
            let summary = SpectraStats {
                schema_version: spec::SCHEMA_VERSION,
                tool_version: spec::TOOL_VERSION,
                setup: spec.name.clone(),
                seed,
                sample_count: spectra.len(),
                matrix_size: spectra[0].len(),
                mean_gap_ratio: st.mean_r,
                n_ratios: st.n_ratios,
                excluded: st.excluded,
            };
            if let Some(p) = stats {
                std::fs::write(p, serde_json::to_string_pretty(&summary).expect("stats serialize") + "\n")?;
            }
            if st.excluded > 0 {
                eprintln!("warning: {} fully degenerate spectra excluded", st.excluded);
            }
            println!(
                "{} spectra of {} levels, mean gap ratio {:.4} over {} ratios",
                summary.sample_count, summary.matrix_size, summary.mean_gap_ratio, summary.n_ratios
            );
            Ok(true)
        }
        Command::Preset { action } => match action {
            PresetAction::List { all } => {
                let names: Vec<&str> =
                    presets::CATALOG.iter().chain(if all { presets::EXTRA.iter() } else { [].iter() }).copied().collect();
                for n in names {
                    let p = presets::preset(n, None)?;
                    println!("{n}\t{}\t{}", p.expected_family, p.description);
                }
                Ok(true)
            }
            PresetAction::Emit { name, size, out } => {
                let p = presets::preset(&name, size)?;
                let text = serde_json::to_string_pretty(&SetupSpec::from_preset(&p)).expect("spec serializes") + "\n";
                write_out(out.as_deref(), &text)?;
                Ok(true)
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
