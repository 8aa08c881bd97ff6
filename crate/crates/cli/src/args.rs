//! Command-line flags and the JSON config file that backs them.
//!
//! Every flag is optional at parse time. A config file supplies values for
//! flags that were not given, and built-in defaults fill whatever is left.

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use heatquad::geometry::Format;
use heatquad::ManifoldSpec;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Parser, Debug)]
#[command(name = "heatquad", version, about = "Heat-kernel quadrature point sets: generate, weight, evaluate, benchmark")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Global {
    /// Base seed for every random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (directory for `bench`). Standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Point-set and spectrum output format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutFormat>,
    /// JSON file whose keys mirror the long flag names.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a point set with a baseline generator or by annealing.
    Generate(GenerateArgs),
    /// Attach optimal quadrature weights to a point set.
    Weights(WeightsArgs),
    /// Integration error against the first eigenfunctions.
    Eval(EvalArgs),
    /// Repeated runs of several methods with per-eigenvalue statistics.
    Bench(BenchArgs),
    /// Spherical design files.
    #[command(subcommand)]
    Designs(DesignsCommand),
}

#[derive(Subcommand, Debug)]
pub enum DesignsCommand {
    /// Validate a design file, renormalize it and record its exactness degree.
    Import(ImportArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutFormat {
    Csv,
    Json,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ManifoldKind {
    Torus,
    Sphere,
    DentedSphere,
    Hyperboloid,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodName {
    Halton,
    Sobol,
    Fibonacci,
    Korobov,
    Lhs,
    Uniform,
    SphericalFibonacci,
    Design,
    GaussianAnneal,
    GaussianAnnealWeighted,
    RieszAnneal,
}

impl MethodName {
    pub fn as_str(self) -> &'static str {
        match self {
            MethodName::Halton => "halton",
            MethodName::Sobol => "sobol",
            MethodName::Fibonacci => "fibonacci",
            MethodName::Korobov => "korobov",
            MethodName::Lhs => "lhs",
            MethodName::Uniform => "uniform",
            MethodName::SphericalFibonacci => "spherical-fibonacci",
            MethodName::Design => "design",
            MethodName::GaussianAnneal => "gaussian-anneal",
            MethodName::GaussianAnnealWeighted => "gaussian-anneal-weighted",
            MethodName::RieszAnneal => "riesz-anneal",
        }
    }

    pub fn is_anneal(self) -> bool {
        matches!(
            self,
            MethodName::GaussianAnneal | MethodName::GaussianAnnealWeighted | MethodName::RieszAnneal
        )
    }
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ManifoldArgs {
    #[arg(long, value_enum)]
    pub manifold: Option<ManifoldKind>,
    /// Torus dimension.
    #[arg(long)]
    pub d: Option<usize>,
    /// Dent parameter of the dented sphere.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Disk radius of the compact hyperboloid.
    #[arg(long)]
    pub r: Option<f64>,
}

impl ManifoldArgs {
    pub fn is_set(&self) -> bool {
        self.manifold.is_some()
    }

    pub fn resolve(&self) -> anyhow::Result<ManifoldSpec> {
        let need = |v: Option<f64>, name: &str| v.with_context(|| format!("--{name} is required for this manifold"));
        let m = match self.manifold.context("--manifold is required")? {
            ManifoldKind::Torus => ManifoldSpec::torus(self.d.unwrap_or(2))?,
            ManifoldKind::Sphere => ManifoldSpec::Sphere,
            ManifoldKind::DentedSphere => ManifoldSpec::dented_sphere(need(self.alpha, "alpha")?)?,
            ManifoldKind::Hyperboloid => ManifoldSpec::hyperboloid(need(self.r, "r")?)?,
        };
        Ok(m)
    }
}

/// Generator and annealing parameters shared by `generate` and `bench`.
#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct MethodArgs {
    /// Riesz exponent for `riesz-anneal`.
    #[arg(long)]
    pub s: Option<f64>,
    /// Gaussian bandwidth. Defaults to `theta · N^(−2/d)`.
    #[arg(long)]
    pub t: Option<f64>,
    /// Bandwidth scale used when `--t` is absent.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Korobov generator. Searched when absent.
    #[arg(long)]
    pub korobov_a: Option<u64>,
    /// Random digital shift for Sobol points.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub scramble: Option<bool>,
    /// Design file for the `design` method.
    #[arg(long)]
    pub design: Option<PathBuf>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Cooling constant. Defaults to 1e-7 times the initial energy per point.
    #[arg(long)]
    pub cool_c: Option<f64>,
    #[arg(long)]
    pub trace_every: Option<usize>,
    /// Start annealing from this point-set file.
    #[arg(long)]
    pub init_file: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct GenerateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub manifold: ManifoldArgs,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum)]
    pub method: Option<MethodName>,
    #[command(flatten)]
    #[serde(flatten)]
    pub params: MethodArgs,
    /// Also write the annealing energy trace here.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct WeightsArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Manifold of a headerless input file.
    #[command(flatten)]
    #[serde(flatten)]
    pub manifold: ManifoldArgs,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct EvalArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub manifold: ManifoldArgs,
    /// Number of eigenfunctions.
    #[arg(long)]
    pub count: Option<usize>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct BenchArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub manifold: ManifoldArgs,
    #[arg(long)]
    pub n: Option<usize>,
    /// Runs per stochastic method.
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub methods: Option<Vec<MethodName>>,
    #[arg(long)]
    pub count: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub params: MethodArgs,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ImportArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Highest degree checked for exactness.
    #[arg(long)]
    pub lmax: Option<usize>,
    /// Largest error still counted as exact.
    #[arg(long)]
    pub tol: Option<f64>,
}

/// Parsed config file: a flat JSON object keyed by long flag names.
#[derive(Debug, Default)]
pub struct Config {
    values: Map<String, Value>,
}

impl Config {
    pub fn load(path: Option<&PathBuf>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        match serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))? {
            Value::Object(values) => Ok(Self { values }),
            _ => bail!("config {} must be a JSON object", path.display()),
        }
    }

    /// Fills every unset field of `flags` from the config.
    pub fn fill<T: Serialize + DeserializeOwned>(&self, flags: &T) -> anyhow::Result<T> {
        let mut v = serde_json::to_value(flags)?;
        let obj = v.as_object_mut().expect("flag structs serialize to objects");
        for (k, cv) in &self.values {
            if let Some(slot) = obj.get_mut(k) {
                if slot.is_null() {
                    *slot = cv.clone();
                }
            }
        }
        serde_json::from_value(v).context("config value has the wrong type")
    }

    /// Config keys that none of `known` recognise.
    pub fn unknown_keys(&self, known: &[Value]) -> Vec<String> {
        self.values
            .keys()
            .filter(|k| *k != "config" && !known.iter().any(|o| o.get(k.as_str()).is_some()))
            .cloned()
            .collect()
    }
}
