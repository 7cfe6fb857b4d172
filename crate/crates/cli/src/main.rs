//! `ris`: run reradiation scenarios, inspect alphabets, export colour maps.
//!
//! Exit status is 0 on success, 1 when any scenario fails, 2 on usage
//! errors (bad flags, unreadable or malformed input, unknown alphabet).

mod manifest;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use ris_core::alphabet::{by_name, constellation_stats, export_alphabet, load_alphabet, Alphabet, LoadOptions};
use ris_core::export::{matrix_text, trace_csv};
use ris_core::scenario::{design_scenario, parse_scenarios, run_grid, RunOptions, Scenario};

use manifest::{scenario_digest, EntryRecord, RunManifest};
use output::{file_stem, write_atomic};

#[derive(Parser)]
#[command(name = "ris", version, about = "Reradiation patterns of reconfigurable intelligent surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct ScenarioFlags {
    /// Override every scenario's sweep step, in degrees.
    #[arg(long)]
    step: Option<f64>,
    /// Run scenarios whose element count exceeds the budget.
    #[arg(long)]
    allow_large: bool,
    /// Override every scenario's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Warn about unknown scenario keys instead of failing.
    #[arg(long)]
    lenient: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scenario in a file and write traces plus a manifest.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        flags: ScenarioFlags,
        /// Also write phase and amplitude matrices of each design.
        #[arg(long)]
        colormaps: bool,
    },
    /// Print an alphabet: built-in name, `uadp:<L>`, or a table file.
    Alphabet {
        name: String,
        /// Write the canonical alphabet table to this path.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Design the surface of each scenario and write its Γ matrices.
    Colormap {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Only the scenario at this 0-based position.
        #[arg(long)]
        index: Option<usize>,
        #[command(flatten)]
        flags: ScenarioFlags,
    },
    /// Print the tool version.
    Version,
}

/// Failure class mapped onto the process exit status.
enum Failure {
    Scenario(String),
    Usage(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Scenario(_) => 1,
            Failure::Usage(_) => 2,
        }
    }
}

type CmdResult = Result<(), Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario, out, flags, colormaps } => cmd_run(&scenario, &out, &flags, colormaps),
        Command::Alphabet { name, export } => cmd_alphabet(&name, export.as_deref()),
        Command::Colormap { scenario, out, index, flags } => cmd_colormap(&scenario, &out, index, &flags),
        Command::Version => {
            println!("ris {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Scenario(m) | Failure::Usage(m) => eprintln!("error: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn load_scenarios(path: &Path, flags: &ScenarioFlags) -> Result<Vec<Scenario>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let parsed = parse_scenarios(&text, flags.lenient).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    for w in &parsed.warnings {
        eprintln!("warning: ignoring unknown key `{w}`");
    }
    let mut scenarios = parsed.scenarios;
    for s in &mut scenarios {
        if let Some(step) = flags.step {
            s.sweep.step_deg = step;
        }
        if let Some(seed) = flags.seed {
            s.seed = seed;
        }
    }
    Ok(scenarios)
}

fn run_options(path: &Path, flags: &ScenarioFlags) -> RunOptions {
    RunOptions {
        allow_large: flags.allow_large,
        base_dir: path.parent().map(Path::to_path_buf),
        ..Default::default()
    }
}

fn create_dir(out: &Path) -> CmdResult {
    std::fs::create_dir_all(out).map_err(|e| usage(format!("{}: {e}", out.display())))
}

fn write(path: &Path, contents: &str) -> CmdResult {
    write_atomic(path, contents.as_bytes()).map_err(|e| Failure::Scenario(format!("{}: {e}", path.display())))
}

fn write_colormaps(dir: &Path, stem: &str, config: &ris_core::SurfaceConfig) -> Result<Vec<String>, Failure> {
    let phase = format!("{stem}_phase_deg.txt");
    let amp = format!("{stem}_amplitude.txt");
    write(&dir.join(&phase), &matrix_text(&config.phases_degrees()))?;
    write(&dir.join(&amp), &matrix_text(&config.amplitudes()))?;
    Ok(vec![phase, amp])
}

fn cmd_run(path: &Path, out: &Path, flags: &ScenarioFlags, colormaps: bool) -> CmdResult {
    let scenarios = load_scenarios(path, flags)?;
    create_dir(out)?;
    let started = Instant::now();
    let bundle = run_grid(&scenarios, &run_options(path, flags));
    let mut entries = Vec::with_capacity(bundle.len());
    for (i, entry) in bundle.entries.iter().enumerate() {
        let stem = file_stem(i, &entry.scenario.name);
        let mut record = EntryRecord::new(&entry.scenario);
        match &entry.outcome {
            Ok(r) => {
                let csv = format!("{stem}.csv");
                write(&out.join(&csv), &trace_csv(&r.trace))?;
                record.trace = Some(csv);
                for inc in &r.interference {
                    let name = format!("{stem}_inc{}.csv", output::angle_tag(inc.theta_inc_deg));
                    write(&out.join(&name), &trace_csv(&inc.trace))?;
                    record.interference.push(name);
                }
                if colormaps {
                    record.colormaps = write_colormaps(out, &stem, &r.config)?;
                }
                record.grid = Some(r.geometry.shape());
                record.peak_angle_deg = Some(r.metrics.peak_angle);
                record.optimizer_sweeps = r.report.as_ref().map(|rep| rep.iterations);
                println!(
                    "{}: {}x{} elements, peak {:.2} deg",
                    entry.scenario.name,
                    r.geometry.n_rows(),
                    r.geometry.n_cols(),
                    r.metrics.peak_angle
                );
            }
            Err(msg) => {
                eprintln!("error: scenario `{}`: {msg}", entry.scenario.name);
                record.status = "failed";
                record.error = Some(msg.clone());
            }
        }
        entries.push(record);
    }
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        scenario_file: path.display().to_string(),
        scenario_digest: scenario_digest(&scenarios),
        seeds: scenarios.iter().map(|s| s.seed).collect(),
        normalization: "per-trace maximum".to_string(),
        runtime_s: started.elapsed().as_secs_f64(),
        entries,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(usage)?;
    write(&out.join("manifest.json"), &(json + "\n"))?;
    match bundle.failures() {
        0 => Ok(()),
        n => Err(Failure::Scenario(format!("{n} of {} scenarios failed", bundle.len()))),
    }
}

fn resolve_alphabet(name: &str) -> Result<Alphabet, Failure> {
    let path = Path::new(name);
    if path.is_file() {
        let file = std::fs::File::open(path).map_err(|e| usage(format!("{name}: {e}")))?;
        let label = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        let loaded = load_alphabet(std::io::BufReader::new(file), &LoadOptions { label, ..Default::default() })
            .map_err(|e| usage(format!("{name}: {e}")))?;
        return Ok(loaded.alphabet);
    }
    by_name(name).map_err(usage)
}

fn cmd_alphabet(name: &str, export: Option<&Path>) -> CmdResult {
    let alphabet = resolve_alphabet(name)?;
    println!("# {} ({} entries)", alphabet.label(), alphabet.len());
    if let Some(f) = alphabet.nominal_frequency() {
        println!("# nominal frequency: {f} Hz");
    }
    println!("{:>4}  {:>12}  {:>12}", "idx", "amplitude", "phase_deg");
    for (i, e) in alphabet.entries().iter().enumerate() {
        println!("{:>4}  {:>12.6}  {:>12.4}", i, e.amplitude(), e.phase_degrees());
    }
    let stats = constellation_stats(&alphabet);
    println!(
        "centroid: {:.6} {:+.6}j (|c| = {:.6})",
        stats.centroid.re,
        stats.centroid.im,
        stats.centroid.norm()
    );
    println!("phase coverage: {:.4} deg", stats.min_phase_coverage.to_degrees());
    if let Some(path) = export {
        write(path, &export_alphabet(&alphabet))?;
    }
    Ok(())
}

fn cmd_colormap(path: &Path, out: &Path, index: Option<usize>, flags: &ScenarioFlags) -> CmdResult {
    let scenarios = load_scenarios(path, flags)?;
    let selected: Vec<(usize, &Scenario)> = match index {
        Some(i) => {
            let s = scenarios
                .get(i)
                .ok_or_else(|| usage(format!("--index {i} out of range ({} scenarios)", scenarios.len())))?;
            vec![(i, s)]
        }
        None => scenarios.iter().enumerate().collect(),
    };
    create_dir(out)?;
    let options = run_options(path, flags);
    let mut failed = 0;
    for (i, s) in selected {
        match design_scenario(s, &options) {
            Ok((parts, _)) => {
                let files = write_colormaps(out, &file_stem(i, &s.name), &parts.config)?;
                println!("{}: {}", s.name, files.join(", "));
            }
            Err(e) => {
                eprintln!("error: scenario `{}`: {e}", s.name);
                failed += 1;
            }
        }
    }
    match failed {
        0 => Ok(()),
        n => Err(Failure::Scenario(format!("{n} scenarios failed"))),
    }
}
