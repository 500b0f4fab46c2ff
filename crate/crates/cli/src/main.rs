//! `glmg`: entanglement entropies, phases and exact spectra of gLMG models.

mod commands;
mod table;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use glmg_core::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "glmg", version, about = "Entanglement entropies and phases of generalized LMG models")]
struct Cli {
    #[command(flatten)]
    inputs: Inputs,

    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

/// Model and numeric options shared by every command.
#[derive(Args, Debug, Default, Clone)]
pub struct Inputs {
    /// Model definition in JSON; inline flags override its fields.
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,

    /// Internal dimension is m + 1.
    #[arg(long, global = true)]
    pub m: Option<usize>,

    /// Cartan couplings c_1,...,c_m.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub c: Option<Vec<f64>>,

    /// Magnetic field h_1,...,h_m.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub h: Option<Vec<f64>>,

    /// Number of sites.
    #[arg(long = "N", value_name = "N", global = true)]
    pub n_sites: Option<usize>,

    /// Block length.
    #[arg(long = "L", value_name = "L", global = true)]
    pub block_len: Option<usize>,

    /// Block fraction L/N for the asymptotic formulas.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha: Option<f64>,

    /// Rényi and Tsallis indices.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub q: Option<Vec<f64>>,

    /// Field grid "min:max:step", the same along every axis.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub grid: Option<String>,

    /// Magnon numbers N_1,...,N_{m+1}; overrides the field.
    #[arg(long, global = true, value_delimiter = ',')]
    pub magnons: Option<Vec<usize>>,

    /// Pair couplings: constant[:v], hs or nn:v1,v2,...
    #[arg(long, global = true)]
    pub coupling: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Von Neumann, Rényi and Tsallis entropies of a block.
    Entropy {
        /// Defaults to exact when N is known, asymptotic otherwise.
        #[arg(long, value_enum)]
        mode: Option<EntropyMode>,
        /// Also report the linear growth rate T_q/L at the extensive index.
        #[arg(long)]
        extensive: bool,
    },
    /// The block reduced density matrix spectrum.
    Spectrum,
    /// Ground-state phase at a single field.
    Phase,
    /// Phase and asymptotic entropy over a field grid.
    Scan,
    /// Exact diagonalization on a small chain.
    Diag {
        #[arg(long, value_enum, default_value_t = DiagMode::Verify)]
        mode: DiagMode,
    },
    /// Relative error of the asymptotic entropy against the exact one.
    FigRelerr,
    /// The su(3) entropy surface.
    FigSurface,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntropyMode {
    Exact,
    Asymptotic,
    Both,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagMode {
    /// Compare the dense ground state with the predicted Dicke state.
    Verify,
    /// Spectrum of every magnon-number sector.
    Sectors,
    /// Closed-form su(2) levels (m = 1, constant couplings).
    Su2,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Invalid(_) | Error::NotExtensive(_) | Error::Json(_) => 2,
        Error::ResourceCap { .. } => 3,
        Error::Numerical(_) | Error::Io(_) => 1,
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("GLMG_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Invalid(format!("GLMG_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Numerical(format!("thread pool: {e}")))
}

fn run(cli: &Cli) -> Result<()> {
    configure_threads()?;
    let inp = &cli.inputs;
    let table = match &cli.command {
        Command::Entropy { mode, extensive } => commands::entropy(inp, *mode, *extensive)?,
        Command::Spectrum => commands::spectrum(inp)?,
        Command::Phase => commands::phase(inp)?,
        Command::Scan => commands::scan(inp)?,
        Command::Diag { mode } => commands::diag(inp, *mode)?,
        Command::FigRelerr => commands::fig_relerr(inp)?,
        Command::FigSurface => commands::fig_surface(inp)?,
    };

    // Render fully before touching the output so a failure leaves no partial file.
    let mut buf = Vec::new();
    match cli.format {
        Format::Csv => table.write_csv(&mut buf)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut buf, &table.to_json())?;
            buf.push(b'\n');
        }
    }
    match &cli.out {
        Some(path) => std::fs::write(path, &buf)?,
        None => std::io::stdout().lock().write_all(&buf)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("glmg: error: {msg}");
            ExitCode::from(exit_code(&e))
        }
    }
}
