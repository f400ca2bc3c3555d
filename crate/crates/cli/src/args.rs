use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser, Debug, Clone)]
#[command(
    name = "gevrey",
    version,
    about = "Extended Gevrey regularity toolkit",
    long_about = "Audits of the sequences M_p = p^(tau p^sigma), multi-index decompositions, \
                  Faa di Bruno derivatives, regularity fits, wave-front scans and elliptic parametrices. \
                  Reports are JSON documents that embed the full run configuration.",
    after_help = "Exit status: 0 on success, 1 on invalid input or a failed computation, 2 on I/O errors."
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct GlobalArgs {
    /// Worker threads (default: available cores)
    #[arg(long, global = true, env = "GEVREY_THREADS")]
    #[serde(skip)]
    pub threads: Option<usize>,
    /// Seed recorded in every report for randomized sampling
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Absolute tolerance of the parametrix identity (I - R) w_N = phi - e_N
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol_identity: f64,
    /// Relative tolerance for comparisons that should hold up to round-off
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub tol_exact: f64,
    /// Relative tolerance of the jet check on floating-point derivatives
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol_oracle: f64,
    /// Admissibility margin of regularity fits, relative to the data scale
    #[arg(long, global = true, default_value_t = 0.05)]
    pub fit_margin: f64,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Audit the defining sequence M_p on 1 <= p <= pmax
    SeqAudit(SeqAuditArgs),
    /// Enumerate the decompositions of a multi-index, or count them
    Decomp(DecompArgs),
    /// Derivative of a composition by the Faa di Bruno formula
    Fdb(FdbArgs),
    /// Search the constant of the factorial-ratio lemma over all partitions of k <= kmax
    Lemma23(Lemma23Args),
    /// Fit (tau, sigma, h, A) to derivative growth data
    Fit(FitArgs),
    /// Scan a GRIDFIELD file for wave-front directions
    WfScan(WfScanArgs),
    /// Build and audit the parametrix sums w_N, e_N of an elliptic operator
    Parametrix(ParametrixArgs),
    /// Write the built-in test fields as GRIDFIELD files
    Catalog(CatalogArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::SeqAudit(_) => "seq-audit",
            Command::Decomp(_) => "decomp",
            Command::Fdb(_) => "fdb",
            Command::Lemma23(_) => "lemma23",
            Command::Fit(_) => "fit",
            Command::WfScan(_) => "wf-scan",
            Command::Parametrix(_) => "parametrix",
            Command::Catalog(_) => "catalog",
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SeqAuditArgs {
    #[arg(long)]
    pub tau: f64,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long, default_value_t = 200)]
    pub pmax: u64,
    /// Report path (default: stdout)
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Plot data: p,log_m,m3prime_partial_sum
    #[arg(long)]
    #[serde(skip)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct DecompArgs {
    /// Components a1,..,ad
    #[arg(long, value_delimiter = ',', required = true)]
    pub alpha: Vec<u32>,
    /// Print the count and its (1+|alpha|)^(d+2) bound instead of the list
    #[arg(long)]
    pub census: bool,
    /// Output path for the JSON lines (default: stdout)
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct FdbArgs {
    /// Outer function, univariate FunctionSpec
    #[arg(long)]
    pub f: String,
    /// Inner function, FunctionSpec in d variables
    #[arg(long)]
    pub g: String,
    #[arg(long, value_delimiter = ',', required = true)]
    pub alpha: Vec<u32>,
    /// Evaluation point x1,..,xd; rationals such as 1/3 are exact
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub at: Vec<String>,
    /// Compare against direct jet composition
    #[arg(long)]
    pub check_jet: bool,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct Lemma23Args {
    #[arg(long)]
    pub tau: f64,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long, default_value_t = 12)]
    pub kmax: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Plot data: k,log_c_k
    #[arg(long)]
    #[serde(skip)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct FitArgs {
    /// CSV rows `n,log_sup_abs_derivative`
    #[arg(long)]
    #[serde(skip)]
    pub data: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = [1.5, 2.0, 2.5, 3.0])]
    pub sigma_grid: Vec<f64>,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Plot data: n,residual
    #[arg(long)]
    #[serde(skip)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct WfScanArgs {
    /// GRIDFIELD file
    #[arg(long)]
    #[serde(skip)]
    pub field: PathBuf,
    /// `grid`, `grid:K` (K interior points per axis) or a file with one point per line
    #[arg(long, default_value = "grid")]
    pub points: String,
    /// Directions in the fan (two in one dimension)
    #[arg(long, default_value_t = 32)]
    pub dirs: usize,
    #[arg(long)]
    pub tau: f64,
    #[arg(long)]
    pub sigma: f64,
    /// Largest order N of |xi|^N |(phi u)^(xi)|
    #[arg(long, default_value_t = 16)]
    pub n_max: usize,
    #[arg(long)]
    pub r_plateau: Option<f64>,
    #[arg(long)]
    pub r_support: Option<f64>,
    #[arg(long)]
    pub half_angle: Option<f64>,
    #[arg(long)]
    pub xi_min: Option<f64>,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Decay profiles: point_index,direction_index,n,log_value
    #[arg(long)]
    #[serde(skip)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ParametrixArgs {
    /// Operator such as "D^2 + sin*D + poly:1"; coefficients are FunctionSpecs
    #[arg(long, allow_hyphen_values = true)]
    pub op: String,
    /// Truncation N of the Neumann sums
    #[arg(long = "N", default_value_t = 8)]
    #[serde(rename = "N")]
    pub n: usize,
    /// Cone: direction components, half angle, xi_min
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub cone: Vec<f64>,
    /// Cutoff: center components, plateau radius, support radius
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub phi: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 2.0)]
    pub sigma: f64,
    /// Frequencies sampled in the cone
    #[arg(long, default_value_t = 33)]
    pub xi_count: usize,
    /// Grid points per axis on the support box (default 256 in 1D, 16 in 2D)
    #[arg(long)]
    pub points: Option<usize>,
    /// Largest |beta| in the bound audit
    #[arg(long, default_value_t = 3)]
    pub beta_max: usize,
    /// Grid points per axis for the bound audit (default 9 in 1D, 5 in 2D)
    #[arg(long)]
    pub audit_points: Option<usize>,
    /// Frequencies for the bound audit
    #[arg(long, default_value_t = 5)]
    pub audit_xi: usize,
    /// Order M of the distribution in the word bound
    #[arg(long, default_value_t = 0)]
    pub distribution_order: usize,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Plot data: n,log_sup of the word bound
    #[arg(long)]
    #[serde(skip)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct CatalogArgs {
    /// Output directory
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    /// Samples of the one-dimensional fields
    #[arg(long, default_value_t = 1024)]
    pub n: usize,
    /// Samples per axis of the two-dimensional fields
    #[arg(long, default_value_t = 256)]
    pub n2d: usize,
}
