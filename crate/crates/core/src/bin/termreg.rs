use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use termreg::decider::{decide, DecideOptions, ProcessingOrder, Verdict};
use termreg::oracle::{bounded_equal, gen_hardness_instance, union_is_universal, witness_dta, Slice, TermArena};
use termreg::problem::ProblemFile;
use termreg::report::Report;
use termreg::term::parse_ground;
use termreg::Error;

/// `println!` that ignores a closed stdout, as when piped into `head`.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

const REGULAR: u8 = 0;
const NOT_REGULAR: u8 = 1;
const FAILURE: u8 = 2;

#[derive(Parser)]
#[command(name = "termreg", version, about = "Decide regularity of constrained term pattern sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether the instance set of a problem is regular.
    Decide(DecideArgs),
    /// Brute-force checks at bounded height.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Args)]
struct DecideArgs {
    file: PathBuf,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    trace: bool,
    #[arg(long, default_value_t = 10)]
    witnesses: usize,
    #[arg(long)]
    max_branches: Option<usize>,
    /// Shuffle the pattern processing order with this seed.
    #[arg(long)]
    seed_order: Option<u64>,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// List the instances of a problem up to a height.
    Enum {
        file: PathBuf,
        #[arg(long, default_value_t = 2)]
        max_height: usize,
    },
    /// Check ground terms for membership; without terms, check the verdict
    /// against brute-force enumeration.
    Check {
        file: PathBuf,
        terms: Vec<String>,
        #[arg(long, default_value_t = 3)]
        max_height: usize,
    },
    /// Print the hardness problem built from the automata of a file.
    GenHardness { file: PathBuf },
}

const ARENA_CAP: usize = 5_000_000;

fn load(path: &PathBuf) -> Result<ProblemFile, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    ProblemFile::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn run(cli: Cli) -> Result<u8, String> {
    let err = |e: Error| e.to_string();
    match cli.command {
        Command::Decide(args) => {
            let file = load(&args.file)?;
            let compiled = file.compile().map_err(err)?;
            for n in &compiled.notices {
                eprintln!("note: {n}");
            }
            let mut opts = DecideOptions {
                witnesses: args.witnesses,
                trace: args.trace,
                ..Default::default()
            };
            if let Some(m) = args.max_branches {
                opts.max_branches = m;
            }
            if let Some(seed) = args.seed_order {
                opts.order = ProcessingOrder::Seeded(seed);
            }
            let decision = decide(&compiled.problem, &opts).map_err(err)?;
            let report = Report::new(&file, &compiled, &decision, args.trace).map_err(err)?;
            if args.json {
                out!("{}", report.to_json());
            } else {
                out!("{}", report.human().trim_end());
            }
            Ok(if decision.verdict.is_regular() { REGULAR } else { NOT_REGULAR })
        }
        Command::Oracle(OracleCommand::Enum { file, max_height }) => {
            let file = load(&file)?;
            let compiled = file.compile().map_err(err)?;
            let p = &compiled.problem;
            let arena = TermArena::new(p.sig.clone(), max_height, ARENA_CAP).map_err(err)?;
            let mask = arena.problem_mask(p);
            let mut count = 0;
            for (i, _) in mask.iter().enumerate().filter(|(_, m)| **m) {
                let t = compiled.encoding.decode(&arena.term(i as u32)).map_err(err)?;
                out!("{}", t.display(&file.sig, None));
                count += 1;
            }
            eprintln!("{count} instances of height at most {max_height} (binary coding)");
            Ok(REGULAR)
        }
        Command::Oracle(OracleCommand::Check {
            file,
            terms,
            max_height,
        }) => {
            let file = load(&file)?;
            let compiled = file.compile().map_err(err)?;
            let p = &compiled.problem;
            if !terms.is_empty() {
                let mut all = true;
                for text in &terms {
                    let t = parse_ground(text, &file.sig).map_err(err)?;
                    let yes = p.is_instance(&compiled.encoding.encode(&t));
                    all &= yes;
                    out!("{} {text}", if yes { "instance" } else { "not-instance" });
                }
                return Ok(if all { REGULAR } else { NOT_REGULAR });
            }
            let decision = decide(p, &DecideOptions::default()).map_err(err)?;
            match &decision.verdict {
                Verdict::Regular(cert) => {
                    let w = witness_dta(&cert.patterns, &cert.constraint, Some(max_height), 1_000_000).map_err(err)?;
                    let cmp = bounded_equal(Slice::Dta(&w), Slice::Problem(p), max_height, ARENA_CAP).map_err(err)?;
                    match cmp.counterexample {
                        None => {
                            out!(
                                "regular: witness automaton ({} states) agrees on {} terms up to height {max_height}",
                                w.num_states(),
                                cmp.compared
                            );
                            Ok(REGULAR)
                        }
                        Some(t) => {
                            out!("regular verdict disagrees on {}", t.display(&p.sig, None));
                            Ok(FAILURE)
                        }
                    }
                }
                Verdict::NotRegular(r) => {
                    let ok = r.witnesses.iter().all(|w| p.is_instance(w));
                    out!(
                        "not regular: {} witnesses, {}",
                        r.witnesses.len(),
                        if ok { "all instances" } else { "some are not instances" }
                    );
                    Ok(if ok { NOT_REGULAR } else { FAILURE })
                }
            }
        }
        Command::Oracle(OracleCommand::GenHardness { file }) => {
            let file = load(&file)?;
            if file.sig.max_arity() > 2 {
                return Err("gen-hardness needs a signature of arity at most 2".into());
            }
            let automata = file.compiled_automata().map_err(err)?;
            let prob = gen_hardness_instance(&automata).map_err(err)?;
            let refs: Vec<&termreg::Dta> = automata.iter().map(|a| &a.dta).collect();
            let universal = union_is_universal(&refs).map_err(err)?;
            out!("{}", ProblemFile::from_problem(&prob).map_err(err)?.to_text().trim_end());
            out!("# union of the automata is universal: {universal}");
            Ok(REGULAR)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { FAILURE } else { REGULAR };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(FAILURE)
        }
    }
}
