use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use apml::check::{check_proof_with, key_value_report, text_report, CheckOptions};
use apml::entail::DEFAULT_DNF_BUDGET;
use apml::isar::{emit_theory, IsarOptions};
use apml::oracle::{
    parse_universe, search_proof_with, verify_satisfaction, FiniteUniverse, OracleError,
    SearchError, SearchOptions, Verification,
};
use apml::{
    parse_model_named, print_model, validate_structure, ArchitectureContract, Model, Overall,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

const OK: u8 = 0;
const VIOLATED: u8 = 1;
const INCONCLUSIVE: u8 = 2;
const IO: u8 = 3;

/// Check, translate and explore architecture proof models.
#[derive(Parser)]
#[command(name = "apml", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, validate and check every attached proof.
    Check {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Only check this architecture contract.
        #[arg(long)]
        contract: Option<String>,
        /// Print a step-by-step explanation of every proof.
        #[arg(long)]
        explain: bool,
        #[arg(long, default_value_t = DEFAULT_DNF_BUDGET)]
        dnf_budget: usize,
    },
    /// Write the Isabelle/Isar theory of the model.
    EmitIsar {
        #[command(flatten)]
        input: Input,
        /// Target file; `-` for standard output. Defaults to `<short name>.thy`.
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Fail on datatype symbols without a built-in Isabelle counterpart.
        #[arg(long)]
        strict_symbols: bool,
        /// Also emit connection assumptions named output port first.
        #[arg(long)]
        legacy_connection_names: bool,
        /// Emit even if a proof does not check.
        #[arg(long)]
        force: bool,
        #[arg(long, default_value_t = DEFAULT_DNF_BUDGET)]
        dnf_budget: usize,
    },
    /// Search for a proof of an architecture contract and print the model
    /// with the proof attached.
    Search {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        contract: Option<String>,
        #[arg(long, default_value_t = 64)]
        max_steps: usize,
        #[arg(long, default_value_t = DEFAULT_DNF_BUDGET)]
        dnf_budget: usize,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Decide on a finite universe whether every composed trace satisfies
    /// an architecture contract.
    Simulate {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        contract: Option<String>,
        /// Universe description; without one, every sort gets the carrier
        /// 0..carrier-size with arithmetic modulo its size.
        #[arg(long)]
        universe: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        carrier_size: usize,
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Print the model in canonical layout.
    Fmt {
        #[command(flatten)]
        input: Input,
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Exit with 1 instead of printing if the file is not canonical.
        #[arg(long)]
        check: bool,
    },
}

#[derive(Args)]
struct Input {
    /// Model file.
    path: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Kv,
}

struct Failure(u8);

type Run = Result<u8, Failure>;

fn io_error(what: &Path, e: std::io::Error) -> Failure {
    eprintln!("error: {}: {e}", what.display());
    Failure(IO)
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| io_error(path, e))
}

fn write(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(p) if p == Path::new("-") => {
            print!("{text}");
            Ok(())
        }
        Some(p) => fs::write(p, text).map_err(|e| io_error(p, e)),
    }
}

/// Parse and validate; diagnostics go to standard error.
fn load(input: &Input) -> Result<Model, Failure> {
    match load_lenient(input)? {
        (model, true) => Ok(model),
        (_, false) => Err(Failure(VIOLATED)),
    }
}

/// Like [`load`], but a model that parses cleanly is returned even if it
/// is structurally invalid, together with its validity.
fn load_lenient(input: &Input) -> Result<(Model, bool), Failure> {
    let text = read(&input.path)?;
    let parsed = parse_model_named(&input.path.display().to_string(), &text);
    let mut diags = parsed.diagnostics;
    let syntax_ok = !diags.iter().any(|d| d.is_error());
    if syntax_ok {
        diags.extend(validate_structure(&parsed.model));
    }
    for d in &diags {
        eprintln!("{d}");
    }
    if !syntax_ok {
        return Err(Failure(VIOLATED));
    }
    let valid = !diags.iter().any(|d| d.is_error());
    Ok((parsed.model, valid))
}

fn selected<'m>(
    model: &'m Model,
    name: Option<&str>,
) -> Result<Vec<&'m ArchitectureContract>, Failure> {
    match name {
        None => Ok(model.contracts.iter().collect()),
        Some(n) => match model.architecture_contract(n) {
            Some(c) => Ok(vec![c]),
            None => {
                eprintln!("error: no architecture contract named {n}");
                Err(Failure(IO))
            }
        },
    }
}

fn one<'m>(model: &'m Model, name: Option<&str>) -> Result<&'m ArchitectureContract, Failure> {
    let all = selected(model, name)?;
    match all.as_slice() {
        [c] => Ok(c),
        [] => {
            eprintln!("error: the model has no architecture contract");
            Err(Failure(IO))
        }
        _ => {
            eprintln!("error: several architecture contracts; pick one with --contract");
            Err(Failure(IO))
        }
    }
}

fn code(o: Overall) -> u8 {
    match o {
        Overall::Ok => OK,
        Overall::Violated => VIOLATED,
        Overall::Inconclusive => INCONCLUSIVE,
    }
}

/// Check every selected proof, print reports, return the worst outcome.
fn check_all(
    model: &Model,
    contracts: &[&ArchitectureContract],
    opts: CheckOptions,
    format: Format,
    explain: bool,
) -> Overall {
    let mut worst = Overall::Ok;
    for arch in contracts {
        let Some(proof) = &arch.proof else {
            if let Format::Text = format {
                println!("contract {}: no proof", arch.contract.name);
            }
            continue;
        };
        let report = check_proof_with(model, arch, proof, opts);
        match format {
            Format::Text => print!("{}", text_report(&report)),
            Format::Kv => print!("{}", key_value_report(&report)),
        }
        if explain {
            for i in 0..report.steps.len() {
                print!("{}", apml::explain_step(&report, i));
            }
        }
        worst = worst.max(report.overall());
    }
    worst
}

fn run(cli: Cli) -> Run {
    match cli.command {
        Command::Check {
            input,
            format,
            contract,
            explain,
            dnf_budget,
        } => {
            let (model, valid) = load_lenient(&input)?;
            let contracts = selected(&model, contract.as_deref())?;
            let worst = check_all(
                &model,
                &contracts,
                CheckOptions { dnf_budget },
                format,
                explain,
            );
            Ok(if valid {
                code(worst)
            } else {
                VIOLATED.max(code(worst))
            })
        }
        Command::EmitIsar {
            input,
            output,
            strict_symbols,
            legacy_connection_names,
            force,
            dnf_budget,
        } => {
            let model = if force {
                load_lenient(&input)?.0
            } else {
                load(&input)?
            };
            let contracts: Vec<&ArchitectureContract> = model.contracts.iter().collect();
            if !force {
                let worst = check_all(
                    &model,
                    &contracts,
                    CheckOptions { dnf_budget },
                    Format::Text,
                    false,
                );
                if worst != Overall::Ok {
                    eprintln!("error: proofs do not check; use --force to emit anyway");
                    return Ok(code(worst));
                }
            }
            let opts = IsarOptions {
                strict: strict_symbols,
                legacy_connection_names,
                ..IsarOptions::default()
            };
            let theory = match emit_theory(&model, opts) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: {e}");
                    return Ok(VIOLATED);
                }
            };
            let target =
                output.unwrap_or_else(|| PathBuf::from(format!("{}.thy", model.short_name)));
            write(Some(&target), &theory)?;
            Ok(OK)
        }
        Command::Search {
            input,
            contract,
            max_steps,
            dnf_budget,
            output,
        } => {
            let mut model = load(&input)?;
            let arch = one(&model, contract.as_deref())?;
            let name = arch.contract.name.clone();
            match search_proof_with(
                &model,
                arch,
                SearchOptions {
                    max_steps,
                    dnf_budget,
                },
            ) {
                Ok(proof) => {
                    eprintln!("found a {}-step proof of {name}", proof.steps.len());
                    let slot = model
                        .contracts
                        .iter_mut()
                        .find(|c| c.contract.name == name)
                        .expect("selected contract");
                    slot.proof = Some(proof);
                    write(output.as_deref(), &print_model(&model))?;
                    Ok(OK)
                }
                Err(e @ SearchError::BudgetExceeded(_)) => {
                    println!("BUDGET_EXCEEDED: {e}");
                    Ok(INCONCLUSIVE)
                }
                Err(e @ SearchError::NoProof) => {
                    println!("NO_PROOF: {e}");
                    Ok(VIOLATED)
                }
            }
        }
        Command::Simulate {
            input,
            contract,
            universe,
            carrier_size,
            horizon,
        } => {
            let model = load(&input)?;
            let arch = one(&model, contract.as_deref())?;
            let u = match &universe {
                Some(path) => parse_universe(&model, &read(path)?).map_err(|e| {
                    eprintln!("error: {}: {e}", path.display());
                    Failure(IO)
                })?,
                None => FiniteUniverse::numeric(&model, carrier_size.max(1)),
            };
            let horizon = horizon.unwrap_or(arch.contract.duration as usize + 1);
            match verify_satisfaction(&model, &arch.contract, &u, horizon) {
                Ok(Verification::Holds) => {
                    println!("holds");
                    Ok(OK)
                }
                Ok(Verification::Counterexample {
                    trace,
                    window,
                    sigma,
                }) => {
                    let vars: Vec<String> = arch
                        .contract
                        .variables
                        .iter()
                        .map(|v| format!("{} = {}", v.name, u.name(&v.sort, sigma[&v.name])))
                        .collect();
                    println!("counterexample: window {window}, {}", vars.join(", "));
                    print!("{}", trace.table(&model, &u));
                    Ok(VIOLATED)
                }
                Err(e @ OracleError::Universe(_)) => {
                    eprintln!("error: {e}");
                    Ok(IO)
                }
                Err(e) => {
                    println!("{e}");
                    Ok(INCONCLUSIVE)
                }
            }
        }
        Command::Fmt {
            input,
            output,
            check,
        } => {
            let original = read(&input.path)?;
            let model = load(&input)?;
            let text = print_model(&model);
            if check {
                return Ok(if text == original { OK } else { VIOLATED });
            }
            write(output.as_deref(), &text)?;
            Ok(OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { IO } else { OK });
        }
    };
    match run(cli) {
        Ok(c) | Err(Failure(c)) => ExitCode::from(c),
    }
}
