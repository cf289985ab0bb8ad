//! `sfk`: batch verification front end for the superfield engine.

pub mod commands;
pub mod error;
pub mod eval;
pub mod parse;
pub mod report;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{CliError, Result};
use crate::report::Report;
use superfield::Variant;

#[derive(Parser, Debug)]
#[command(name = "sfk", version, about = "Exact checks for SUSY vertex algebras and supercurve coordinate changes")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Odd dimension N for catalog entries and sampled changes.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Default variant for changes that do not name one.
    #[arg(long, global = true, value_enum, default_value_t = VariantArg::Nk)]
    pub variant: VariantArg,
    /// Highest even degree kept in series.
    #[arg(long, global = true, env = "SFK_TRUNC", default_value_t = 6)]
    pub trunc: i32,
    /// Number of Grassmann generators a1..ak usable in literals.
    #[arg(long, global = true, default_value_t = 4)]
    pub grassmann: u32,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// key = value output.
    #[arg(long, global = true)]
    pub machine: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Nk,
    Nw,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    N1,
    N2,
    N2o,
}

/// Validated session settings.
#[derive(Clone, Debug)]
pub struct SessionConfig {
    pub n: Option<usize>,
    pub variant: Variant,
    pub trunc: i32,
    pub grassmann: u32,
    pub seed: u64,
    pub machine: bool,
}

impl SessionConfig {
    pub fn from_args(g: &GlobalArgs) -> Result<SessionConfig> {
        if g.trunc < 2 {
            return Err(CliError::Config(format!("--trunc must be at least 2, got {}", g.trunc)));
        }
        if g.grassmann > 9 {
            return Err(CliError::Config(format!("--grassmann must be at most 9, got {}", g.grassmann)));
        }
        if g.n.is_some_and(|n| n > 8) {
            return Err(CliError::Config("--n must be at most 8".into()));
        }
        Ok(SessionConfig {
            n: g.n,
            variant: match g.variant {
                VariantArg::Nk => Variant::NK,
                VariantArg::Nw => Variant::NW,
            },
            trunc: g.trunc,
            grassmann: g.grassmann,
            seed: g.seed,
            machine: g.machine,
        })
    }
}

/// Where a change comes from: a file, a name in it, or inline text.
#[derive(Args, Debug, Clone)]
pub struct ChangeArgs {
    /// Input file of definitions (`-` reads stdin).
    pub file: Option<String>,
    /// A change defined in the file, or inline `change { … }` / `(F, Psi…)`.
    #[arg(long)]
    pub change: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct AlgebraArgs {
    /// Presentation file (`-` reads stdin).
    pub file: Option<String>,
    /// Use a catalog entry instead of a file.
    #[arg(long)]
    pub catalog: Option<String>,
    /// Algebra block to use when the file has several.
    #[arg(long)]
    pub algebra: Option<String>,
    /// Catalog parameters such as c=1/2.
    #[arg(long = "param")]
    pub params: Vec<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Skew-symmetry and Jacobi on modes, optionally a displayed mode table.
    CheckAlgebra {
        #[command(flatten)]
        alg: AlgebraArgs,
        #[arg(long, default_value_t = 4)]
        window: i64,
        /// virasoro, ns, n2, n2tilde, n2g, bf or b2.
        #[arg(long)]
        table: Option<String>,
    },
    /// A single mode commutator, e.g. `G_1/2 G_-1/2`.
    ModeBracket {
        #[arg(allow_hyphen_values = true)]
        x: String,
        #[arg(allow_hyphen_values = true)]
        y: String,
        /// Presentation file (`-` reads stdin).
        file: Option<String>,
        #[arg(long)]
        catalog: Option<String>,
        #[arg(long)]
        algebra: Option<String>,
        #[arg(long = "param")]
        params: Vec<String>,
        #[arg(long)]
        table: Option<String>,
    },
    /// Λ-bracket versus OPE versus mode formulas for generator pairs.
    OpeCheck {
        #[command(flatten)]
        alg: AlgebraArgs,
        #[arg(long, default_value_t = 3)]
        window: i32,
        #[arg(long)]
        pair: Option<String>,
    },
    /// List or print catalog algebras and modules.
    Catalog {
        #[arg(long)]
        list: bool,
        name: Option<String>,
        #[arg(long = "param")]
        params: Vec<String>,
    },
    /// Super-Schwarzian of a change.
    Schwarzian(ChangeArgs),
    /// N = 2 Schwarzian in the θ⁺, θ⁻ chart.
    Schwarzian2(ChangeArgs),
    /// ρ⋆τ for two changes.
    Compose {
        #[command(flatten)]
        c: ChangeArgs,
        #[arg(long)]
        with: Option<String>,
    },
    /// The localized change ρ_Z; with `--with`, the cocycle identity.
    Localize {
        #[command(flatten)]
        c: ChangeArgs,
        #[arg(long)]
        with: Option<String>,
    },
    /// Superconformality at a level.
    CheckSc {
        #[command(flatten)]
        c: ChangeArgs,
        #[arg(long, value_enum, default_value_t = LevelArg::N1)]
        level: LevelArg,
    },
    /// Transition of the dual coordinates.
    Dual(ChangeArgs),
    /// N = 2 change induced by an N = 1 change.
    N2lift(ChangeArgs),
    /// Superdeterminant of the Jacobian.
    Sdet(ChangeArgs),
    /// Exponential coordinates of ρ_Z to order 2.
    ExpCoords {
        #[command(flatten)]
        c: ChangeArgs,
        /// k11, k12 or w11.
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 2)]
        order: u32,
        /// Compare with the closed forms and re-exponentiate.
        #[arg(long)]
        verify: bool,
    },
    /// Vector-field family brackets against the mode tables.
    VerifyFamily {
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 4)]
        window: i64,
    },
    /// Transition matrix of a module bundle.
    Transition {
        #[command(flatten)]
        c: ChangeArgs,
        #[arg(long)]
        module: String,
        #[arg(long)]
        verify: bool,
        /// Second change for the cocycle identity.
        #[arg(long)]
        cocycle: Option<String>,
        #[arg(long = "param")]
        params: Vec<String>,
    },
    /// Whether a module's extension splits at a parameter value.
    ExtensionClass {
        #[arg(long)]
        module: String,
        #[arg(long = "param")]
        param: String,
    },
    /// gl(1|1) representations, duals and parity shifts.
    Gl11 {
        /// e.g. `pi+(t,j)` or `pi-(j)`.
        rep: Option<String>,
        #[arg(long)]
        dual: bool,
        #[arg(long)]
        shift: bool,
        /// Read the representation off a module block instead.
        #[arg(long)]
        module: Option<String>,
        #[arg(long, default_value = "J,H")]
        block: String,
    },
    /// Seeded invariants across all modules.
    Selftest {
        /// Also compare against the displayed closed forms.
        #[arg(long)]
        closed_forms: bool,
    },
}

/// Run with explicit arguments; returns (stdout, stderr, exit code).
pub fn run_from<I, T>(args: I) -> (String, String, i32)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() { (String::new(), text, 2) } else { (text, String::new(), 0) };
        }
    };
    let machine = cli.global.machine;
    let name = command_name(&cli.cmd);
    let result = SessionConfig::from_args(&cli.global).and_then(|cfg| commands::run(&cli.cmd, &cfg));
    match result {
        Ok(rep) => {
            let out = if machine { rep.machine() } else { rep.human() };
            (out, String::new(), rep.exit_code())
        }
        Err(e) => {
            let code = e.exit_code();
            if machine {
                let kind = match &e {
                    CliError::Parse { .. } => "parse",
                    CliError::Parity(_) => "parity",
                    CliError::Config(_) => "config",
                    CliError::Io(_) => "io",
                    CliError::Math(_) => "math",
                };
                let out = format!("command = {}\nerror.kind = {}\nerror.message = {}\nstatus = error\nexit = {}\n", name, kind, e, code);
                (out, String::new(), code)
            } else {
                (String::new(), format!("error: {}\n", e), code)
            }
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::CheckAlgebra { .. } => "check-algebra",
        Command::ModeBracket { .. } => "mode-bracket",
        Command::OpeCheck { .. } => "ope-check",
        Command::Catalog { .. } => "catalog",
        Command::Schwarzian(_) => "schwarzian",
        Command::Schwarzian2(_) => "schwarzian2",
        Command::Compose { .. } => "compose",
        Command::Localize { .. } => "localize",
        Command::CheckSc { .. } => "check-sc",
        Command::Dual(_) => "dual",
        Command::N2lift(_) => "n2lift",
        Command::Sdet(_) => "sdet",
        Command::ExpCoords { .. } => "exp-coords",
        Command::VerifyFamily { .. } => "verify-family",
        Command::Transition { .. } => "transition",
        Command::ExtensionClass { .. } => "extension-class",
        Command::Gl11 { .. } => "gl11",
        Command::Selftest { .. } => "selftest",
    }
}

pub(crate) fn report_for(c: &Command) -> Report {
    Report::new(command_name(c))
}
