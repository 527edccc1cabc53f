use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use qrheat::bath::branch_overlaps;
use qrheat::spectrum::{Branch, Spectrum};
use qrheat::sweep::{emit_csv, figure_preset, parse_config, run_sweep, SweepConfig};
use qrheat::Error;

const EXIT_CONFIG: u8 = 1;
const EXIT_PARTIAL: u8 = 2;
const EXIT_FATAL: u8 = 3;

/// Parameter sweeps of heat-current statistics and squeezing.
#[derive(Debug, Parser)]
#[command(name = "sweep", version)]
struct Args {
    /// TOML sweep configuration.
    #[arg(long, required_unless_present = "preset")]
    config: Option<PathBuf>,

    /// Output CSV; a `.json` sidecar is written next to it.
    #[arg(long)]
    out: PathBuf,

    /// Start from a named preset (fig2a, fig2b, fig2e, fig3, fig4a, fig4b, fig5a, fig5b).
    /// A `--config` given as well replaces it.
    #[arg(long)]
    preset: Option<String>,

    /// Worker threads; overrides the config.
    #[arg(long)]
    workers: Option<usize>,

    /// Also write the overlap table at the base coupling and initial truncation
    /// to `<out>.overlaps.csv`.
    #[arg(long)]
    dump_overlaps: bool,
}

fn load(args: &Args) -> Result<SweepConfig, Error> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            parse_config(&text)?
        }
        (None, Some(name)) => figure_preset(name)?,
        (None, None) => unreachable!("clap requires one of them"),
    };
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn dump_overlaps(cfg: &SweepConfig, out: &PathBuf) -> Result<PathBuf, Error> {
    let params = cfg.model.params(cfg.model.lambda).validate()?;
    let spectrum = Spectrum::new(&params, cfg.truncation.initial_n);
    let tables = branch_overlaps(&spectrum)?;
    let path = out.with_extension("overlaps.csv");
    let file = std::fs::File::create(&path)?;
    tables[Branch::Up.index()].write_csv(std::io::BufWriter::new(file))?;
    Ok(path)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();

    let cfg = match load(&args) {
        Ok(c) => c,
        Err(e @ Error::Io(_)) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_FATAL);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };

    if args.dump_overlaps {
        match dump_overlaps(&cfg, &args.out) {
            Ok(p) => log::info!("overlaps written to {}", p.display()),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_FATAL);
            }
        }
    }

    let start = Instant::now();
    let records = match run_sweep(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_FATAL);
        }
    };
    let total_ms = start.elapsed().as_secs_f64() * 1e3;
    if let Err(e) = emit_csv(&records, &cfg, &args.out, total_ms) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_FATAL);
    }

    let failed = records.iter().filter(|r| !r.is_ok()).count();
    if failed > 0 {
        eprintln!("{failed} of {} points failed", records.len());
        return ExitCode::from(EXIT_PARTIAL);
    }
    ExitCode::SUCCESS
}
