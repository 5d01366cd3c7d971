mod config;
mod error;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spinboson::report::{sectors_json, write_sectors_csv, write_verify_csv, SpectrumReport};
use spinboson::verify::{run_verification, VerifyOptions};
use spinboson::{
    enumerate_sectors, sector_from_reference, solve_sectors, Exec, PresetName, SectorLabels, SolveOptions,
};

use config::{Format, RunConfig, Selector};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "spinboson", version, about = "Spin-boson spectra by functional Bethe ansatz")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the invariant sectors at spin j.
    Sectors(Common),
    /// Energies and roots of every state in the selected sectors.
    Spectrum(Common),
    /// One state (`--index`) of a single sector.
    Roots(Common),
    /// Run the acceptance checks; exit code 2 on any failure.
    Verify(Common),
    /// Built-in models.
    Preset {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Debug, Subcommand)]
enum PresetAction {
    /// Names, parameters and defaults.
    List,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub preset: Option<PresetName>,
    /// Preset parameter as key=value, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub param: Vec<String>,
    /// Spin, e.g. 3/2.
    #[arg(long, allow_hyphen_values = true)]
    pub j: Option<String>,
    /// Spin projection of the reference state; selects a single sector.
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<String>,
    /// Boson numbers of the reference state, comma separated.
    #[arg(long)]
    pub n: Option<String>,
    /// Cap on the total boson number when enumerating sectors.
    #[arg(long)]
    pub max_bosons: Option<u64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub tol_eigen: Option<f64>,
    #[arg(long)]
    pub tol_roots: Option<f64>,
    #[arg(long)]
    pub tol_newton: Option<f64>,
    #[arg(long)]
    pub tol_bae: Option<f64>,
    #[arg(long)]
    pub tol_match: Option<f64>,
    #[arg(long)]
    pub tol_algebra: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random coupling draws per preset (verify).
    #[arg(long)]
    pub draws: Option<usize>,
    /// State index within the sector (roots).
    #[arg(long)]
    pub index: Option<usize>,
    /// Run on one thread.
    #[arg(long)]
    pub sequential: bool,
}

fn emit(cfg: &RunConfig, write: impl FnOnce(&mut dyn Write) -> Result<(), CliError>) -> Result<(), CliError> {
    match &cfg.output {
        Some(path) => {
            let mut file = std::fs::File::create(path)
                .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
            write(&mut file)
        }
        None => write(&mut std::io::stdout().lock()),
    }
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Usage(format!("write failed: {e}"))
}

fn selected_sectors(cfg: &RunConfig) -> Result<Vec<SectorLabels>, CliError> {
    let model = cfg.model()?;
    let j = cfg.j()?;
    Ok(match cfg.selector()? {
        Selector::All { max_bosons } => enumerate_sectors(model, j, max_bosons)?,
        Selector::Reference(reference) => vec![sector_from_reference(model, j, &reference)?],
    })
}

fn cmd_sectors(cfg: &RunConfig) -> Result<(), CliError> {
    let sectors = selected_sectors(cfg)?;
    emit(cfg, |out| match cfg.format {
        Format::Json => writeln!(out, "{}", sectors_json(&sectors)).map_err(io_err),
        Format::Csv => Ok(write_sectors_csv(&sectors, out)?),
        Format::Text => {
            for s in &sectors {
                writeln!(out, "{s} dim={}", s.dim).map_err(io_err)?;
            }
            Ok(())
        }
    })
}

fn solve(cfg: &RunConfig, exec: Exec) -> Result<SpectrumReport, CliError> {
    let model = cfg.model()?;
    let sectors = selected_sectors(cfg)?;
    let opts = SolveOptions {
        tol: cfg.tol,
        refine: true,
    };
    let solved = solve_sectors(model, &sectors, opts, exec);
    let mut pairs = Vec::with_capacity(sectors.len());
    for (sector, states) in sectors.into_iter().zip(solved) {
        let states = states.map_err(|e| CliError::Numerical(format!("sector {sector}: {e}")))?;
        pairs.push((sector, states));
    }
    Ok(SpectrumReport::from_solved(pairs))
}

fn write_spectrum(cfg: &RunConfig, report: &SpectrumReport) -> Result<(), CliError> {
    emit(cfg, |out| match cfg.format {
        Format::Json => writeln!(out, "{}", report.to_json()).map_err(io_err),
        Format::Csv => Ok(report.write_csv(out)?),
        Format::Text => {
            for sector in &report.sectors {
                writeln!(out, "{}", sector.labels).map_err(io_err)?;
                for st in &sector.states {
                    let residual = st.residual.map_or("-".to_string(), |r| format!("{r:.2e}"));
                    let roots: Vec<String> = st
                        .roots
                        .iter()
                        .map(|z| if z.im == 0.0 { format!("{}", z.re) } else { format!("{z}") })
                        .collect();
                    writeln!(
                        out,
                        "  {:>3}  E = {:<22}  residual {residual}  verified {}{}  roots [{}]",
                        st.index,
                        st.energy,
                        st.verified,
                        if st.degenerate { "  degenerate" } else { "" },
                        roots.join(", ")
                    )
                    .map_err(io_err)?;
                }
            }
            Ok(())
        }
    })
}

fn cmd_roots(cfg: &RunConfig, exec: Exec) -> Result<(), CliError> {
    let mut report = solve(cfg, exec)?;
    if report.sectors.len() != 1 {
        return Err(CliError::Usage(format!(
            "roots needs exactly one sector, selection has {}; give --mu (and --n)",
            report.sectors.len()
        )));
    }
    let sector = &mut report.sectors[0];
    if cfg.index >= sector.states.len() {
        return Err(CliError::Usage(format!(
            "--index {} out of range, sector has {} states",
            cfg.index,
            sector.states.len()
        )));
    }
    let state = sector.states.remove(cfg.index);
    sector.states = vec![state];
    write_spectrum(cfg, &report)
}

fn cmd_verify(cfg: &RunConfig, exec: Exec) -> Result<(), CliError> {
    let mut opts = VerifyOptions {
        tol: cfg.tol,
        exec,
        ..Default::default()
    };
    if let Some(name) = cfg.preset {
        opts.presets = vec![name];
    }
    if let Some(seed) = cfg.seed {
        opts.seed = seed;
    }
    if let Some(draws) = cfg.draws {
        opts.draws = draws;
    }
    let report = run_verification(&opts);
    emit(cfg, |out| match cfg.format {
        Format::Json => writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&report).map_err(|e| CliError::Usage(e.to_string()))?
        )
        .map_err(io_err),
        Format::Csv => Ok(write_verify_csv(&report, out)?),
        Format::Text => {
            for c in &report.criteria {
                writeln!(out, "{}", c.line()).map_err(io_err)?;
            }
            for e in &report.errata {
                writeln!(
                    out,
                    "  erratum {}: {} (printed {:.2e}, corrected {:.2e})",
                    e.id,
                    if e.confirmed() { "confirmed" } else { "NOT confirmed" },
                    e.printed_metric,
                    e.corrected_metric
                )
                .map_err(io_err)?;
            }
            writeln!(out, "{} in {:.1} s", if report.passed { "PASS" } else { "FAIL" }, report.seconds)
                .map_err(io_err)
        }
    })?;
    if report.passed {
        Ok(())
    } else {
        Err(CliError::Verification)
    }
}

fn cmd_preset_list() {
    for name in PresetName::ALL {
        let params: Vec<String> = name.default_params().iter().map(|(k, v)| format!("{k}={v}")).collect();
        let (m, r, s, k) = name.structure();
        println!("{:<16} M={m} r={r} s={s} k={k:?}  defaults: {}", name.as_str(), params.join(" "));
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let common = match &cli.command {
        Command::Preset {
            action: PresetAction::List,
        } => {
            cmd_preset_list();
            return Ok(());
        }
        Command::Sectors(c) | Command::Spectrum(c) | Command::Roots(c) | Command::Verify(c) => c,
    };
    let cfg = RunConfig::resolve(common)?;
    let exec = if common.sequential { Exec::Sequential } else { Exec::Parallel };
    match cli.command {
        Command::Sectors(_) => cmd_sectors(&cfg),
        Command::Spectrum(_) => write_spectrum(&cfg, &solve(&cfg, exec)?),
        Command::Roots(_) => cmd_roots(&cfg, exec),
        Command::Verify(_) => cmd_verify(&cfg, exec),
        Command::Preset { .. } => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !matches!(e, CliError::Verification) {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
