use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

mod commands;
mod error;
mod input;

use error::CliError;
use input::Profile;

/// Witt vectors, de Rham–Witt complexes, filtered complexes and
/// η-Cartier modules from the command line. Results are JSON.
#[derive(Parser, Debug)]
#[command(name = "cartier-lab", version)]
pub struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Single-line JSON.
    #[arg(long, global = true)]
    pub compact: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Truncated p-typical Witt vectors.
    #[command(subcommand)]
    Witt(WittCmd),
    /// Filtered complexes and their bigraded homotopy.
    #[command(subcommand)]
    Filtered(FilteredCmd),
    /// η-Cartier modules and their fixed points.
    #[command(subcommand)]
    Cartier(CartierCmd),
    /// The de Rham–Witt complex of F_p[x].
    #[command(subcommand)]
    Drw(DrwCmd),
    /// Dieudonné modules over Z/p^k.
    #[command(subcommand)]
    Dieudonne(DieudonneCmd),
    /// Run a named check suite (or `all`).
    Suite(SuiteArgs),
}

#[derive(Args, Debug, Clone, Copy)]
pub struct PrimeArg {
    #[arg(long)]
    pub p: Option<u64>,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct DrwArgs {
    #[arg(long)]
    pub p: Option<u64>,
    /// Truncation level.
    #[arg(long)]
    pub m: Option<u32>,
    /// Weight bound: `x^j` with `j ≤ deg`.
    #[arg(long)]
    pub deg: Option<u64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BaseArg {
    /// F_p
    Fp,
    /// F_p[x], needs --deg-bound
    Fpx,
    /// Z
    Z,
    /// Z[x]
    Zx,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum WittOp {
    Add,
    Sub,
    Mul,
    Neg,
    Frobenius,
    Verschiebung,
    Restrict,
}

#[derive(Subcommand, Debug)]
pub enum WittCmd {
    /// Ring operations and F, V, R on component vectors.
    Arith {
        #[command(flatten)]
        prime: PrimeArg,
        #[arg(long, value_enum, default_value = "fp")]
        base: BaseArg,
        #[arg(long)]
        deg_bound: Option<usize>,
        #[arg(long, value_enum)]
        op: WittOp,
        /// Components, `1,0,2` or a JSON list.
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<String>,
    },
    /// Ghost components over Z or Z[x].
    Ghost {
        #[command(flatten)]
        prime: PrimeArg,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        components: String,
        #[arg(long, value_enum, default_value = "z")]
        base: BaseArg,
    },
    /// Addition and multiplication polynomials with the ghost check.
    StructurePolys {
        #[command(flatten)]
        prime: PrimeArg,
        #[arg(long)]
        n: Option<usize>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum TruncationKind {
    Postnikov,
    Neutral,
}

#[derive(Subcommand, Debug)]
pub enum FilteredCmd {
    /// Bigraded homotopy table of a filtered complex.
    Homotopy {
        /// Filtered complex: inline JSON, a path, or `-`.
        #[arg(long)]
        input: String,
        /// Homological degrees `a:b`.
        #[arg(long, allow_hyphen_values = true)]
        degrees: Option<String>,
        /// Filtration weights `a:b`.
        #[arg(long, allow_hyphen_values = true)]
        weights: Option<String>,
    },
    /// Day convolution of `{"left": X, "right": Y}`.
    Tensor {
        #[arg(long)]
        input: String,
        #[arg(long, allow_hyphen_values = true)]
        degrees: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        weights: Option<String>,
    },
    /// Postnikov or neutral truncation.
    Truncate {
        #[arg(long)]
        input: String,
        #[arg(long, allow_hyphen_values = true)]
        k: i64,
        #[arg(long, value_enum, default_value = "postnikov")]
        kind: TruncationKind,
    },
    /// Pullback of `{"f": {src, dst, maps}, "g": {src, dst, maps}}`.
    Pullback {
        #[arg(long)]
        input: String,
        #[arg(long, allow_hyphen_values = true)]
        degrees: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        weights: Option<String>,
    },
    /// Rational TC of the sphere through the pullback square.
    TcSphere {
        #[arg(long = "N")]
        n: Option<i64>,
    },
    /// Cyclic fixed points from the `n`-series cofiber.
    CyclicN {
        #[arg(long)]
        n: u64,
        /// Degree bound.
        #[arg(long)]
        deg: Option<i64>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct CartierInput {
    /// Complex (inline JSON, a path, `-`), or `witt` for `W_k(F_p)`.
    #[arg(long)]
    pub input: String,
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub k: Option<u32>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FrobArg {
    Identity,
    F,
}

#[derive(Subcommand, Debug)]
pub enum CartierCmd {
    /// Check the η-Cartier relations.
    Verify(CartierInput),
    /// Compare the composite F̂V̂ with the norm map.
    Norm(CartierInput),
    /// Fixed-point module on the lowest stage.
    Fixed(CartierInput),
    /// Orbit module on the lowest stage.
    Orbit(CartierInput),
    /// Derived V-completeness modulo p^j for j up to --depth.
    Complete {
        #[command(flatten)]
        input: CartierInput,
        #[arg(long)]
        depth: Option<u32>,
    },
    /// TC heart: kernel and cokernel of 1 − frob per weight.
    Tc {
        #[command(flatten)]
        input: CartierInput,
        #[arg(long, value_enum, default_value = "identity")]
        frob: FrobArg,
        #[arg(long)]
        depth: Option<u32>,
    },
    /// Hom group between two complexes at --depth and --depth − 1.
    Hom {
        #[arg(long)]
        source: String,
        #[arg(long)]
        target: String,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        depth: Option<u32>,
    },
}

#[derive(Subcommand, Debug)]
pub enum DrwCmd {
    /// Basis and orders in degrees 0 and 1.
    Basis(DrwArgs),
    /// Normalize an expression tree.
    Op {
        #[command(flatten)]
        args: DrwArgs,
        /// Expression: inline JSON, a path, or `-`.
        #[arg(long)]
        expr: String,
    },
    /// Check the defining identities on the basis and random elements.
    IdentitySuite {
        #[command(flatten)]
        args: DrwArgs,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Two adjacent truncations as a truncated Cartier complex.
    ToCartier {
        #[command(flatten)]
        args: DrwArgs,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        twist: i64,
    },
}

#[derive(Args, Debug, Clone)]
pub struct ModuleArgs {
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub k: Option<u32>,
}

#[derive(Subcommand, Debug)]
pub enum DieudonneCmd {
    /// Check FV = VF = p.
    Verify {
        /// Module (inline JSON, a path, `-`) or etale, formal, supersingular.
        #[arg(long)]
        module: String,
        #[command(flatten)]
        args: ModuleArgs,
    },
    /// Newton slopes of F.
    Slopes {
        #[arg(long)]
        module: String,
        #[command(flatten)]
        args: ModuleArgs,
    },
    /// Hom group of Dieudonné maps.
    Hom {
        #[arg(long)]
        source: String,
        #[arg(long)]
        target: String,
        #[command(flatten)]
        args: ModuleArgs,
        #[arg(long)]
        depth: Option<u32>,
    },
    /// Compare Dieudonné homs with Cartier homs of the images.
    Bridge {
        #[arg(long)]
        source: String,
        #[arg(long)]
        target: String,
        #[command(flatten)]
        args: ModuleArgs,
        #[arg(long)]
        depth: Option<u32>,
    },
}

#[derive(Args, Debug)]
pub struct SuiteArgs {
    #[arg(long)]
    pub name: String,
    /// Restrict `relations-drw` to one prime.
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub deg: Option<u64>,
}

/// Exit status for a suite run with failing checks.
pub const EXIT_CHECKS_FAILED: u8 = 2;

fn render(v: &Value, compact: bool) -> String {
    let mut s = if compact { serde_json::to_string(v) } else { serde_json::to_string_pretty(v) }.expect("JSON values serialize");
    s.push('\n');
    s
}

fn emit(text: &str, output: Option<&PathBuf>) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|source| CliError::Io { path: "stdout".into(), source })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = Profile::from_env().and_then(|profile| commands::run(&cli, profile));
    match result {
        Ok(outcome) => match emit(&render(&outcome.value, cli.compact), cli.output.as_ref()) {
            Ok(()) if outcome.checks_failed => ExitCode::from(EXIT_CHECKS_FAILED),
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("{e}");
                ExitCode::FAILURE
            }
        },
        Err(e) => {
            let text = render(&e.to_json(), cli.compact);
            if emit(&text, cli.output.as_ref()).is_err() {
                print!("{text}");
            }
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
