mod commands;
mod instance;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde_json::json;

use chargext::Limits;
use commands::{Outcome, Settings};
use instance::{canonical_rational, parse_document, Instance};

#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Core(chargext::Error),
    Io(String),
}

impl From<chargext::Error> for CliError {
    fn from(e: chargext::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn code(&self) -> u8 {
        use chargext::Error::*;
        match self {
            CliError::Parse(_) | CliError::Io(_) | CliError::Core(Domain(_)) => 2,
            CliError::Core(Precondition(_)) => 3,
            CliError::Core(Resource(_)) => 4,
            CliError::Core(Infeasible(_)) => 5,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "invalid input: {m}"),
            CliError::Io(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Command {
    Sc,
    ExtendMin,
    Transport,
    #[value(name = "o-n")]
    ON,
    ExactO,
    UpperO,
    LepCheck,
    ApproxRun,
    Selftest,
}

impl Command {
    fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

/// Exact computations with finitely additive signed measures on finite
/// Boolean algebras.
#[derive(Parser, Debug)]
#[command(name = "chargext", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Instance file (a certificate is accepted too; its embedded instance is used).
    input: Option<PathBuf>,
    /// Names of instance objects the command operates on.
    #[arg(long, value_delimiter = ',')]
    args: Vec<String>,
    /// Where to write the JSON certificate.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Norm parameter, as "p/q".
    #[arg(long)]
    r: Option<String>,
    /// Last index of an approximation run.
    #[arg(long)]
    n_max: Option<usize>,
    /// Target bound for upper-o, as "p/q".
    #[arg(long)]
    epsilon: Option<String>,
    /// Restrict exact and o_n computations to a single index.
    #[arg(long)]
    n: Option<usize>,
    /// Largest block count for exact parameter computations.
    #[arg(long)]
    cap_blocks: Option<usize>,
    /// Seed of the self-test generators.
    #[arg(long)]
    seed: Option<u64>,
}

fn settings(cli: &Cli, inst: Option<&Instance>) -> Result<Settings, CliError> {
    let params = inst.map(|i| i.raw.params.clone()).unwrap_or_default();
    let rat = |flag: &Option<String>, param: &Option<String>, name: &str| -> Result<_, CliError> {
        flag.as_ref()
            .or(param.as_ref())
            .map(|t| canonical_rational(t, name).and_then(|c| Ok(chargext::rational::parse(&c)?)))
            .transpose()
    };
    let mut limits = Limits::default();
    if let Some(cap) = cli.cap_blocks.or(params.cap_blocks) {
        limits.max_exact_blocks = cap;
    }
    Ok(Settings {
        r: rat(&cli.r, &params.r, "r")?,
        n_max: cli.n_max.or(params.n_max),
        epsilon: rat(&cli.epsilon, &params.epsilon, "epsilon")?,
        n: cli.n.or(params.n),
        seed: cli.seed.or(params.seed).unwrap_or(0),
        limits,
    })
}

fn load(cli: &Cli) -> Result<Option<Instance>, CliError> {
    let Some(path) = &cli.input else {
        return Ok(None);
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let raw = parse_document(&text)?;
    Ok(Some(Instance::load(raw, &Limits::default())?))
}

fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let inst = load(cli)?;
    let s = settings(cli, inst.as_ref())?;
    if cli.command == Command::Selftest {
        return Ok(commands::run_selftest(&s));
    }
    let inst = inst.ok_or_else(|| CliError::Parse(format!("{} needs an instance file", cli.command.name())))?;
    let run = match cli.command {
        Command::Sc => commands::run_sc,
        Command::ExtendMin => commands::run_extend_min,
        Command::Transport => commands::run_transport,
        Command::ON => commands::run_o_n,
        Command::ExactO => commands::run_exact_o,
        Command::UpperO => commands::run_upper_o,
        Command::LepCheck => commands::run_lep_check,
        Command::ApproxRun => commands::run_approx,
        Command::Selftest => unreachable!(),
    };
    let mut out = run(&inst, &cli.args, &s)?;
    out.result = json!({
        "command": cli.command.name(),
        "args": cli.args,
        "params": s.to_json(),
        "instance": inst.raw,
        "result": out.result,
    });
    Ok(out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(out) => {
            println!("{}", out.summary);
            if let Some(path) = &cli.out {
                let mut text = serde_json::to_string_pretty(&out.result).expect("serializable");
                text.push('\n');
                if let Err(e) = std::fs::write(path, text) {
                    eprintln!("cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
