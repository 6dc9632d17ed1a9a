use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use bose_chaos_cli::config::parse_config_text;
use bose_chaos_cli::{CliError, Experiment, RunConfig};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bose-chaos", version, about = "Bose-Hubbard chaos and embedded GOE experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Export a symmetry-adapted basis and the sector dimensions.
    Basis(Flags),
    /// Spectrum, DOS and optionally eigenvectors at one eta.
    Spectrum(Flags),
    /// Energy-resolved r and fractal-dimension statistics over an eta grid.
    Scan(Flags),
    /// Embedded-ensemble statistics at target energies.
    EgoeScan(Flags),
    /// Embedded-ensemble statistics over a grid of two-body strengths.
    LambdaScan(Flags),
    /// Distances between BHH, embedded-ensemble and GOE distributions.
    Compare(Flags),
    /// Analytic GOE baselines.
    Baselines(Flags),
}

/// Every flag overrides the key of the same name in `--config`.
#[derive(Args)]
struct Flags {
    /// Key-value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    l: Option<String>,
    /// hwbc or pbc.
    #[arg(long)]
    bc: Option<String>,
    /// Quasimomentum (pbc only; 0 supported).
    #[arg(long)]
    q: Option<String>,
    /// +1 or -1.
    #[arg(long, allow_hyphen_values = true)]
    parity: Option<String>,
    /// interaction or tunneling.
    #[arg(long)]
    basis: Option<String>,
    #[arg(long)]
    eta: Option<String>,
    /// Comma list, log(a, b, n) or lin(a, b, n).
    #[arg(long)]
    eta_grid: Option<String>,
    /// Scaled-energy targets.
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    k_states: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    realizations: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Worker threads; 0 uses every CPU.
    #[arg(long)]
    threads: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// csv, json or bin.
    #[arg(long)]
    format: Option<String>,
    /// Also write the Hamiltonian to this path.
    #[arg(long)]
    export_matrix: Option<String>,
    /// GOE dimensions for baselines.
    #[arg(long)]
    dims: Option<String>,
    /// Comma list of orders, e.g. 1,2,inf.
    #[arg(long)]
    q_orders: Option<String>,
    /// Scaled-energy bins.
    #[arg(long)]
    bins: Option<String>,
}

impl Flags {
    fn overrides(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("n", &self.n),
            ("l", &self.l),
            ("bc", &self.bc),
            ("q", &self.q),
            ("parity", &self.parity),
            ("basis", &self.basis),
            ("eta", &self.eta),
            ("eta_grid", &self.eta_grid),
            ("eps", &self.eps),
            ("k_states", &self.k_states),
            ("lambda", &self.lambda),
            ("realizations", &self.realizations),
            ("seed", &self.seed),
            ("threads", &self.threads),
            ("out", &self.out),
            ("format", &self.format),
            ("export_matrix", &self.export_matrix),
            ("dims", &self.dims),
            ("q_orders", &self.q_orders),
            ("bins", &self.bins),
        ]
    }

    fn merged(&self) -> Result<BTreeMap<String, String>, CliError> {
        let mut map = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                parse_config_text(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?
            }
            None => BTreeMap::new(),
        };
        for (key, value) in self.overrides() {
            if let Some(v) = value {
                map.insert(key.to_string(), v.clone());
            }
        }
        Ok(map)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, flags) = match &cli.command {
        Command::Basis(f) => (Experiment::Basis, f),
        Command::Spectrum(f) => (Experiment::Spectrum, f),
        Command::Scan(f) => (Experiment::Scan, f),
        Command::EgoeScan(f) => (Experiment::EgoeScan, f),
        Command::LambdaScan(f) => (Experiment::LambdaScan, f),
        Command::Compare(f) => (Experiment::Compare, f),
        Command::Baselines(f) => (Experiment::Baselines, f),
    };
    let result = flags
        .merged()
        .and_then(|map| RunConfig::from_map(experiment, &map))
        .and_then(|cfg| bose_chaos_cli::run(&cfg));
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
