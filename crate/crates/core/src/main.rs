use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use ncpt::harness::{parse_list, run_sweep, write_csv, ExperimentConfig, Mode, SweepGrid};
use ncpt::simnet::{TickScenario, TickTable};

/// Simulate network-coded vs. reordering multipath transmission and write
/// packet-loss results as CSV.
///
/// List-valued flags (--buffer-m, --rate-bps, --packet-symbols) span a sweep
/// grid; every combination is run for each selected mode.
#[derive(Debug, Parser)]
#[command(name = "ncpt", version)]
struct Cli {
    /// Flat key = value config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// nc, multipath or both.
    #[arg(long)]
    mode: Option<String>,
    /// Buffer size(s) in packets, comma separated.
    #[arg(long)]
    buffer_m: Option<String>,
    /// Aggregate sending rate(s) in bit/s, comma separated.
    #[arg(long)]
    rate_bps: Option<String>,
    /// One-way path delays in ms, one per lane, comma separated.
    #[arg(long)]
    delays: Option<String>,
    /// Packet size(s) in symbols, comma separated.
    #[arg(long)]
    packet_symbols: Option<String>,
    /// Number of lanes.
    #[arg(long)]
    lanes: Option<usize>,
    /// Packets per run.
    #[arg(long)]
    packet_count: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the four-lane unit-time buffer timeline and exit.
    #[arg(long)]
    fig5: bool,
}

fn run(cli: Cli) -> ncpt::Result<()> {
    if cli.fig5 {
        let table = TickScenario::four_lane_example().table()?;
        print!("{}", table.render());
        println!(
            "multipath empty from t{}, network-coded empty from t{}",
            TickTable::empty_from(&table.multipath),
            TickTable::empty_from(&table.coded)
        );
        return Ok(());
    }

    let mut base = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(m) = &cli.mode {
        base.mode = m.parse::<Mode>()?;
    }
    if let Some(d) = &cli.delays {
        base.path_delays_ms = parse_list("path_delays", d)?;
    }
    if let Some(h) = cli.lanes {
        base.h = h;
    }
    if let Some(n) = cli.packet_count {
        base.packet_count = n;
    }
    if let Some(r) = cli.reps {
        base.repetitions = r;
    }
    if let Some(s) = cli.seed {
        base.seed = s;
    }
    let mut grid = SweepGrid::single(&base);
    if let Some(m) = &cli.buffer_m {
        grid.buffer_m = parse_list("buffer_m", m)?;
    }
    if let Some(r) = &cli.rate_bps {
        grid.sending_rate_bps = parse_list("sending_rate", r)?;
    }
    if let Some(n) = &cli.packet_symbols {
        grid.packet_symbols = parse_list("packet_symbols", n)?;
    }

    let rows = run_sweep(&base, &grid)?;
    match &cli.out {
        Some(path) => ncpt::harness::emit_csv(&rows, path)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_csv(&rows, &mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ncpt: {e}");
            ExitCode::FAILURE
        }
    }
}
