use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gcb::{catalog, load, serialize, Check, CliError, Structure};

#[derive(Parser)]
#[command(name = "gcb", version, about = "Exact checks for generalized contact bundles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run checks on a structure file.
    Check {
        file: String,
        #[command(flatten)]
        which: Which,
        /// Write the JSON report to this path.
        #[arg(long)]
        report: Option<String>,
        /// Print every residual in full.
        #[arg(long)]
        full: bool,
    },
    /// Write the homogenized structure on M × R.
    Homogenize {
        file: String,
        #[arg(short, long)]
        output: Option<String>,
    },
    /// Recover the structure on M from a [gc-triple].
    Dehomogenize {
        file: String,
        #[arg(short, long)]
        output: Option<String>,
    },
    /// Write the IM form induced by a multiplicative form.
    InduceIm {
        file: String,
        #[arg(short, long)]
        output: Option<String>,
    },
    /// List the built-in examples or print one.
    Examples { name: Option<String> },
}

#[derive(Args)]
struct Which {
    #[arg(long)]
    almost: bool,
    #[arg(long)]
    integrable: bool,
    #[arg(long)]
    jacobi: bool,
    #[arg(long)]
    contact: bool,
    #[arg(long)]
    hitchin: bool,
    #[arg(long)]
    gc: bool,
    #[arg(long)]
    im: bool,
    #[arg(long)]
    multiplicative: bool,
    /// Every check, including ones the file has no data for.
    #[arg(long)]
    all: bool,
}

impl Which {
    fn checks(&self) -> Vec<Check> {
        if self.all {
            return Check::ALL.to_vec();
        }
        let flags = [
            (self.almost, Check::Almost),
            (self.integrable, Check::Integrable),
            (self.jacobi, Check::Jacobi),
            (self.contact, Check::Contact),
            (self.hitchin, Check::Hitchin),
            (self.gc, Check::Gc),
            (self.im, Check::Im),
            (self.multiplicative, Check::Multiplicative),
        ];
        flags.into_iter().filter(|(on, _)| *on).map(|(_, c)| c).collect()
    }
}

fn write_out(output: Option<&str>, st: &Structure) -> Result<(), CliError> {
    let text = serialize(st);
    match output {
        None => print!("{text}"),
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io {
            path: p.to_string(),
            source: e,
        })?,
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Check {
            file,
            which,
            report,
            full,
        } => {
            let (_, st) = load(&file)?;
            let rep = gcb::run(&st, &file, &which.checks(), full);
            print!("{}", rep.render());
            if let Some(p) = report {
                let json = serde_json::to_string_pretty(&rep).expect("report serializes");
                std::fs::write(&p, json + "\n").map_err(|e| CliError::Io { path: p, source: e })?;
            }
            Ok(rep.passed())
        }
        Command::Homogenize { file, output } => {
            let (_, st) = load(&file)?;
            write_out(output.as_deref(), &gcb::homogenize_structure(&st)?)?;
            Ok(true)
        }
        Command::Dehomogenize { file, output } => {
            let (_, st) = load(&file)?;
            write_out(output.as_deref(), &gcb::dehomogenize_structure(&st)?)?;
            Ok(true)
        }
        Command::InduceIm { file, output } => {
            let (_, st) = load(&file)?;
            write_out(output.as_deref(), &gcb::induce_im_structure(&st)?)?;
            Ok(true)
        }
        Command::Examples { name } => {
            match name {
                None => print!("{}", catalog::listing()),
                Some(n) => print!("{}", catalog::find(&n)?.source),
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("gcb: {e}");
            ExitCode::from(2)
        }
    }
}
