use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "freeconv", version, about = "Free probability calculator and random-matrix checks")]
pub struct Cli {
    /// Seed for Monte Carlo commands; falls back to FREECONV_SEED.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Non-crossing partitions and permutations.
    #[command(subcommand)]
    Nc(NcCommand),
    /// Convert between moments, R-transform and S-transform series.
    Transform(TransformArgs),
    /// Free cumulants of a catalog law or a moment list.
    Cumulants(CumulantsArgs),
    /// Density and Cauchy transform of a catalog law on a grid (CSV).
    Catalog(CatalogArgs),
    /// Free convolutions, compression and ⊠-power supports.
    #[command(subcommand)]
    Convolve(ConvolveCommand),
    /// Random-matrix Monte Carlo.
    #[command(subcommand)]
    Mc(McCommand),
    /// Brown measures and Fuglede–Kadison determinants.
    #[command(subcommand)]
    Brown(BrownCommand),
    /// Run a named check suite and report every check.
    Repro(ReproArgs),
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NcCommand {
    /// List NC(n), or its pairings with --pairings.
    Enumerate {
        n: usize,
        #[arg(long)]
        pairings: bool,
    },
    /// Kreweras complement of a partition such as "{1,4}{2,3}".
    Kreweras { partition: String },
    /// Möbius function μ(a, b) on the NC lattice.
    Mobius { a: String, b: String },
    /// Genus of a pairing and the cycles of πγ.
    Genus { pairing: String },
    /// Cycles, length and geodesic test of a permutation such as "(1 3)(2)".
    Perm { permutation: String },
    /// Number of pairings of [n] by genus.
    Census { n: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesKind {
    Moments,
    Cumulants,
    R,
    S,
}

#[derive(Args, Debug, Serialize)]
pub struct TransformArgs {
    /// Catalog law, JSON list of moments m1..mM, or JSON series
    /// {"order", "coeffs"}; prefix a path with @ to read it from a file.
    pub input: String,
    #[arg(long, value_enum, default_value = "moments")]
    pub from: SeriesKind,
    #[arg(long, value_enum)]
    pub to: SeriesKind,
    /// Truncation order (catalog input defaults to 12).
    #[arg(long)]
    pub order: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
pub struct CumulantsArgs {
    /// Catalog law or JSON list of moments m1..mM (@path reads a file).
    pub input: String,
    #[arg(long)]
    pub order: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
pub struct CatalogArgs {
    /// Law name, optionally with parameters: `marchenko-pastur:lambda=0.5`.
    pub name: String,
    /// Extra parameter, repeatable.
    #[arg(long = "param", value_name = "K=V")]
    pub params: Vec<String>,
    /// Grid `lo:hi:n`; defaults to the support padded by 10%, 201 points.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Imaginary offset at which G is evaluated.
    #[arg(long, default_value_t = 1e-4)]
    pub eps: f64,
    /// Number of moments in the header (ignored for heavy tails).
    #[arg(long, default_value_t = 8)]
    pub order: usize,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvolveCommand {
    /// Free additive convolution A ⊞ B.
    Add(PairArgs),
    /// Free multiplicative convolution A ⊠ B.
    Mul(PairArgs),
    /// Compression by a free projection of trace t.
    Compress {
        spec: String,
        #[arg(long)]
        t: f64,
        /// Report the law of the compression rescaled by 1/t.
        #[arg(long)]
        rescale: bool,
        #[arg(long, default_value_t = 12)]
        order: usize,
    },
    /// The law whose free cumulants are t times those of the input.
    Semigroup {
        spec: String,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 12)]
        order: usize,
    },
    /// Right edge of the support of μ^{⊠n}.
    ProductSupport {
        spec: String,
        #[arg(long)]
        n: u64,
    },
}

#[derive(Args, Debug, Serialize)]
pub struct PairArgs {
    pub a: String,
    pub b: String,
    #[arg(long, default_value_t = 12)]
    pub order: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ensemble {
    Gue,
    /// Squares of GUE eigenvalues, i.e. the spectrum of H².
    Wishart,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum McCommand {
    /// Estimate E tr(word) and compare with the exact or free prediction.
    Trace {
        /// Letters A, A2, U, U*, D1..D4 separated by spaces.
        #[arg(long)]
        word: String,
        #[arg(long = "N", default_value_t = 64)]
        #[serde(rename = "N")]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        reps: usize,
        /// D1 as `spec:<law>` quantiles, `diag:x1,..,xN`, `identity` or `signs`.
        #[arg(long)]
        d1: Option<String>,
        #[arg(long)]
        d2: Option<String>,
        #[arg(long)]
        d3: Option<String>,
        #[arg(long)]
        d4: Option<String>,
    },
    /// Eigenvalue histogram (CSV).
    Spectrum {
        #[arg(long, value_enum, default_value = "gue")]
        ensemble: Ensemble,
        #[arg(long = "N", default_value_t = 256)]
        #[serde(rename = "N")]
        n: usize,
        #[arg(long, default_value_t = 80)]
        bins: usize,
        #[arg(long, default_value_t = 1)]
        reps: usize,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BrownCommand {
    /// Radial Brown measure of an R-diagonal operator from the law of T*T (CSV).
    Radial {
        #[arg(long)]
        sigma: String,
        /// Atom at zero; defaults to the atom of the law at 0.
        #[arg(long)]
        w: Option<f64>,
        #[arg(long, default_value_t = 512)]
        grid: usize,
        /// Use only the first M moments of the law instead of its closed-form S.
        #[arg(long)]
        moments: Option<usize>,
    },
    /// Fuglede–Kadison determinant of a matrix given as JSON {"re", "im"}.
    Fkdet {
        #[arg(long)]
        matrix: String,
    },
}

#[derive(Args, Debug, Serialize)]
pub struct ReproArgs {
    /// Suite name, or `all`.
    pub suite: String,
    /// Word length (genus) or power (product-support).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub dim: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
}
