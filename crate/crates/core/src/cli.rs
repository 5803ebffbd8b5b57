//! Command-line front end.
//!
//! Exit codes: 0 success, true or isomorphic; 1 false or not isomorphic;
//! 2 usage error; 3 malformed or invalid input; 4 resource budget exceeded.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::automaton::{AutomatonError, TreeAutomaton};
use crate::cnf::OrdCNF;
use crate::decider::{DecideError, Decider, DEFAULT_MAX_PEELS};
use crate::fo::{compile_limited, eval_sentence_limited, parse_formula, sanity_check, FoError, DEFAULT_STATE_BUDGET};
use crate::presentation::{
    build_presentation_with_ceiling, decode, encode, restrict_limited, PresentationBundle, PresentationError,
    DEFAULT_LEVEL_CEILING,
};
use crate::tree::{ConvSymbol, SigmaTree, Symbol};

#[derive(Parser, Debug)]
#[command(name = "ordauto", version, about = "Tree-automatic ordinals: codes, presentations, queries and normal forms")]
struct Cli {
    /// State budget for automaton constructions.
    #[arg(long, global = true, env = "ORDAUTO_MAX_STATES", default_value_t = DEFAULT_STATE_BUDGET)]
    max_states: usize,
    /// Maximum number of leading terms peeled by `cnf` and `iso`.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_PEELS)]
    max_peels: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the level-N code of an ordinal.
    Encode {
        #[arg(short = 'n', long)]
        level: usize,
        cnf: String,
    },
    /// Print the ordinal coded by a tree at level N.
    Decode {
        #[arg(short = 'n', long)]
        level: usize,
        tree: String,
    },
    /// Write the presentation of w^(w^N) to a directory.
    BuildPresentation {
        #[arg(short = 'n', long)]
        level: usize,
        #[arg(short = 'o', long)]
        out: PathBuf,
        /// Highest level accepted.
        #[arg(long, default_value_t = DEFAULT_LEVEL_CEILING)]
        max_level: usize,
    },
    /// Restrict a presentation to the ordinals below a bound.
    Restrict {
        #[arg(short = 'p', long)]
        presentation: PathBuf,
        #[arg(short = 'a', long)]
        bound: String,
        #[arg(short = 'o', long)]
        out: PathBuf,
    },
    /// Test whether an automaton accepts a tree.
    Member {
        #[arg(short = 'A', long)]
        automaton: PathBuf,
        tree: String,
    },
    /// Test whether an automaton accepts nothing.
    Empty {
        #[arg(short = 'A', long)]
        automaton: PathBuf,
    },
    /// Evaluate a sentence, or compile a formula with free variables.
    Query {
        #[arg(short = 'p', long)]
        presentation: PathBuf,
        #[arg(short = 'f', long)]
        formula: String,
        /// Order of the free variables, comma separated; sorted by default.
        #[arg(long)]
        vars: Option<String>,
        #[arg(short = 'o', long)]
        out: Option<PathBuf>,
    },
    /// Run the structural checks on a presentation.
    Check {
        #[arg(short = 'p', long)]
        presentation: PathBuf,
    },
    /// Print the Cantor normal form of the presented ordinal.
    Cnf {
        #[arg(short = 'p', long)]
        presentation: PathBuf,
        /// Print one line per peeled term before the normal form.
        #[arg(long)]
        trace: bool,
    },
    /// Decide whether two presentations present the same ordinal.
    Iso {
        #[arg(long = "p1")]
        first: PathBuf,
        #[arg(long = "p2")]
        second: PathBuf,
    },
}

#[derive(Debug)]
enum Failure {
    Format(String),
    Budget(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Format(_) => 3,
            Failure::Budget(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Format(m) | Failure::Budget(m) => m,
        }
    }
}

impl From<AutomatonError> for Failure {
    fn from(e: AutomatonError) -> Self {
        match e {
            AutomatonError::StateBudget { .. } => Failure::Budget(e.to_string()),
            other => Failure::Format(other.to_string()),
        }
    }
}

impl From<FoError> for Failure {
    fn from(e: FoError) -> Self {
        match e {
            FoError::Budget { .. } => Failure::Budget(e.to_string()),
            FoError::Automaton(a) => a.into(),
            other => Failure::Format(other.to_string()),
        }
    }
}

impl From<PresentationError> for Failure {
    fn from(e: PresentationError) -> Self {
        match e {
            PresentationError::Fo(f) => f.into(),
            PresentationError::Automaton(a) => a.into(),
            other => Failure::Format(other.to_string()),
        }
    }
}

impl From<DecideError> for Failure {
    fn from(e: DecideError) -> Self {
        match e {
            DecideError::IterationBudget { .. } => Failure::Budget(e.to_string()),
            DecideError::Fo(f) => f.into(),
            DecideError::Presentation(p) => p.into(),
            DecideError::EmptyDomain | DecideError::NotDescending { .. } => Failure::Format(e.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Format(format!("{}: {e}", path.display())))
}

fn load_automaton(path: &Path) -> Result<TreeAutomaton, Failure> {
    read(path)?
        .parse()
        .map_err(|e: AutomatonError| Failure::Format(format!("{}: {e}", path.display())))
}

fn load_bundle(path: &Path) -> Result<PresentationBundle, Failure> {
    Ok(PresentationBundle::load(path)?)
}

fn parse_cnf(text: &str) -> Result<OrdCNF, Failure> {
    text.parse().map_err(|e| Failure::Format(format!("'{text}': {e}")))
}

fn parse_tree(text: &str) -> Result<SigmaTree<Symbol>, Failure> {
    text.parse().map_err(|e| Failure::Format(format!("'{text}': {e}")))
}

/// Maps `-p1`/`-p2` to their long forms.
fn normalise(args: Vec<OsString>) -> Vec<OsString> {
    args.into_iter()
        .map(|a| match a.to_str() {
            Some("-p1") => "--p1".into(),
            Some("-p2") => "--p2".into(),
            _ => a,
        })
        .collect()
}

/// Runs one command and returns its exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args = normalise(args.into_iter().map(Into::into).collect());
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}

fn say(out: &mut dyn Write, text: impl std::fmt::Display) -> Result<(), Failure> {
    writeln!(out, "{text}").map_err(|e| Failure::Format(format!("write: {e}")))
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    let limit = cli.max_states;
    let decider = Decider { max_states: limit, max_peels: cli.max_peels, ..Decider::default() };
    match cli.command {
        Command::Encode { level, cnf } => {
            say(out, encode(level, &parse_cnf(&cnf)?)?)?;
            Ok(0)
        }
        Command::Decode { level, tree } => {
            say(out, decode(level, &parse_tree(&tree)?)?)?;
            Ok(0)
        }
        Command::BuildPresentation { level, out: dir, max_level } => {
            build_presentation_with_ceiling(level, max_level)?.save(&dir)?;
            Ok(0)
        }
        Command::Restrict { presentation, bound, out: dir } => {
            let b = load_bundle(&presentation)?;
            restrict_limited(&b, &parse_cnf(&bound)?, limit)?.save(&dir)?;
            Ok(0)
        }
        Command::Member { automaton, tree } => {
            let a = load_automaton(&automaton)?;
            let ok = if a.arity() == 1 {
                a.accepts(&parse_tree(&tree)?)?
            } else {
                let t: SigmaTree<ConvSymbol> = tree.parse().map_err(|e| Failure::Format(format!("'{tree}': {e}")))?;
                if t.label().arity() != a.arity() {
                    return Err(Failure::Format(format!("tree has arity {}, automaton {}", t.label().arity(), a.arity())));
                }
                a.accepts_conv(&t)?
            };
            say(out, if ok { "accepted" } else { "rejected" })?;
            Ok(if ok { 0 } else { 1 })
        }
        Command::Empty { automaton } => {
            let a = load_automaton(&automaton)?;
            match a.extract_witness() {
                None => {
                    say(out, "empty")?;
                    Ok(0)
                }
                Some(w) => {
                    let w = if a.arity() == 1 { a.space().base_tree(&a.space().tree_letters(&w)?).to_string() } else { w.to_string() };
                    say(out, format!("nonempty {w}"))?;
                    Ok(1)
                }
            }
        }
        Command::Query { presentation, formula, vars, out: dest } => {
            let b = load_bundle(&presentation)?;
            let f = parse_formula(&formula)?;
            let free = f.free_vars();
            let order: Vec<String> = match vars {
                Some(v) => v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
                None => free.iter().cloned().collect(),
            };
            if order.is_empty() {
                let v = eval_sentence_limited(b.presentation(), &f, limit)?;
                say(out, v)?;
                return Ok(if v { 0 } else { 1 });
            }
            let refs: Vec<&str> = order.iter().map(String::as_str).collect();
            let a = compile_limited(b.presentation(), &f, &refs, limit)?;
            match dest {
                Some(path) => fs::write(&path, a.to_string()).map_err(|e| Failure::Format(format!("{}: {e}", path.display())))?,
                None => write!(out, "{a}").map_err(|e| Failure::Format(format!("write: {e}")))?,
            }
            Ok(0)
        }
        Command::Check { presentation } => {
            let b = load_bundle(&presentation)?;
            let report = sanity_check(b.presentation(), limit)?;
            write!(out, "{report}").map_err(|e| Failure::Format(format!("write: {e}")))?;
            Ok(if report.passed() { 0 } else { 1 })
        }
        Command::Cnf { presentation, trace } => {
            let b = load_bundle(&presentation)?;
            let (cnf, tr) = decider.cnf_of(&b)?;
            if trace {
                write!(out, "{tr}").map_err(|e| Failure::Format(format!("write: {e}")))?;
            }
            say(out, cnf)?;
            Ok(0)
        }
        Command::Iso { first, second } => {
            let (a, b) = (load_bundle(&first)?, load_bundle(&second)?);
            let (same, x, y) = decider.isomorphic(&a, &b)?;
            say(out, if same { "isomorphic" } else { "not-isomorphic" })?;
            say(out, x)?;
            say(out, y)?;
            Ok(if same { 0 } else { 1 })
        }
    }
}
