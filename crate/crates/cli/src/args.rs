use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "weightlab", version, about = "Weight sequences, weight functions and generalized Legendre conjugates")]
pub struct Cli {
    /// Config file with `key = value` lines; explicit flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub flags: ConfigFlags,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the report to FILE instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Default, Args)]
pub struct ConfigFlags {
    #[arg(long, global = true)]
    pub p_max: Option<String>,
    #[arg(long, global = true)]
    pub t_min: Option<String>,
    #[arg(long, global = true)]
    pub t_max: Option<String>,
    #[arg(long, global = true)]
    pub t_points: Option<String>,
    /// Comma-separated ℓ-grid, e.g. `1/2,1,2`.
    #[arg(long, global = true)]
    pub ells: Option<String>,
    #[arg(long, global = true)]
    pub tol_rel: Option<String>,
    #[arg(long, global = true)]
    pub verdict_margin: Option<String>,
}

impl ConfigFlags {
    pub fn assignments(&self) -> Vec<(&'static str, String)> {
        [
            ("p_max", &self.p_max),
            ("t_min", &self.t_min),
            ("t_max", &self.t_max),
            ("t_points", &self.t_points),
            ("ells", &self.ells),
            ("tol_rel", &self.tol_rel),
            ("verdict_margin", &self.verdict_margin),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
        .collect()
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Weight sequences.
    #[command(subcommand)]
    Seq(SeqCmd),
    /// Weight functions given as expressions.
    #[command(subcommand, name = "fn")]
    Fn(FnCmd),
    /// Lower and upper conjugates.
    #[command(subcommand)]
    Conj(ConjCmd),
    /// Associated weight matrices.
    #[command(subcommand)]
    Matrix(MatrixCmd),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Re-render a saved report.
    #[command(subcommand)]
    Report(ReportCmd),
}

#[derive(Debug, Subcommand)]
pub enum SeqCmd {
    /// Gevrey sequence `p!^α` up to `p_max`.
    Gen {
        #[arg(long)]
        alpha: f64,
    },
    /// Normalization, log-convexity and moderate growth.
    Check {
        /// Sequence JSON file or `gevrey(α)`.
        seq: String,
    },
    /// Growth relation between two sequences.
    Rel {
        left: String,
        right: String,
        #[arg(long, value_enum, default_value_t = SeqRel::Preceq)]
        kind: SeqRel,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SeqRel {
    Preceq,
    Triangle,
    Equiv,
}

#[derive(Debug, Subcommand)]
pub enum FnCmd {
    /// Values on the t-grid.
    Eval {
        #[arg(long)]
        expr: String,
    },
    /// Conditions (ω0)–(ω6) and strong nonquasianalyticity.
    Check {
        #[arg(long)]
        expr: String,
    },
    /// Growth-index brackets.
    Index {
        #[arg(long)]
        expr: String,
        #[arg(long, value_enum, default_value_t = Which::Both)]
        which: Which,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Gamma,
    #[value(name = "gamma_bar", alias = "gamma-bar")]
    GammaBar,
    Both,
}

#[derive(Debug, Subcommand)]
pub enum ConjCmd {
    Lower(ConjArgs),
    Upper(ConjArgs),
}

#[derive(Debug, Args)]
pub struct ConjArgs {
    #[arg(long)]
    pub sigma: String,
    #[arg(long)]
    pub tau: String,
}

#[derive(Debug, Subcommand)]
pub enum MatrixCmd {
    /// Associated matrix of a weight on the ℓ-grid.
    Build {
        #[arg(long)]
        expr: String,
    },
    /// Matrix conditions; MATRIX is a matrix JSON file or an expression.
    Check { matrix: String },
    /// Matrix relation between two matrices.
    Rel {
        left: String,
        right: String,
        #[arg(long, value_enum, default_value_t = MatRel::Roumieu)]
        kind: MatRel,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MatRel {
    Roumieu,
    Beurling,
    Triangle,
    Mixed,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    #[arg(long)]
    pub sigma: Option<String>,
    #[arg(long)]
    pub tau: Option<String>,
    #[arg(long)]
    pub omega: Option<String>,
    /// Division exponent, or the exponent of the obstruction inequality.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Apply the suite's negative-control perturbation.
    #[arg(long)]
    pub perturb: bool,
    /// `|μ|` for the obstruction inequality.
    #[arg(long, default_value_t = 2.0)]
    pub mu: f64,
    /// Constant `C` for the obstruction inequality.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 200)]
    pub n_max: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    LowerProduct,
    IndexTransport,
    UpperWelldef,
    Division,
    Obstruction,
}

#[derive(Debug, Subcommand)]
pub enum ReportCmd {
    /// Render a JSON report as a table.
    Render { report: PathBuf },
}
