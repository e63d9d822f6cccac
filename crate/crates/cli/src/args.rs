use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use waveseg_core::acwe::InitKind;
use waveseg_core::pipeline::TreeAnchor;
use waveseg_core::WeightingMode;

#[derive(Debug, Parser)]
#[command(
    name = "waveseg",
    version,
    about = "Wavelet-feature clustering and active-contour segmentation"
)]
pub struct Cli {
    /// Worker threads. With 1 thread every output is bit-for-bit reproducible.
    #[arg(long, global = true, env = "WAVESEG_THREADS")]
    pub threads: Option<usize>,

    /// Write `null` instead of the wall time so reports compare byte for byte.
    #[arg(long, global = true)]
    pub reproducible: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic image and its ground truth.
    Phantom(PhantomArgs),
    /// Write per-band visualisations of a wavelet decomposition.
    Decompose(DecomposeArgs),
    /// K-means or fuzzy C-means on wavelet-tree features.
    Cluster(ClusterArgs),
    /// Two-phase active contour on wavelet-tree features.
    Acwe(AcweArgs),
    /// Compare a label image with ground truth.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// sign(x)·|x|^w
    Power,
    /// w·x
    Scale,
}

impl From<Mode> for WeightingMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Power => WeightingMode::SignedPower,
            Mode::Scale => WeightingMode::ScalarScale,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Anchor {
    Centered,
    Corner,
}

impl From<Anchor> for TreeAnchor {
    fn from(a: Anchor) -> Self {
        match a {
            Anchor::Centered => TreeAnchor::Centered,
            Anchor::Corner => TreeAnchor::Corner,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Init {
    Circle,
    Checkerboard,
}

impl From<Init> for InitKind {
    fn from(i: Init) -> Self {
        match i {
            Init::Circle => InitKind::Circle,
            Init::Checkerboard => InitKind::Checkerboard,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Kmeans,
    Fcm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Minefield,
    Disk,
    Composite,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Minefield => "minefield",
            Kind::Disk => "disk",
            Kind::Composite => "composite",
        }
    }
}

/// Feature extraction shared by `cluster`, `acwe` and `decompose`.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FeatureArgs {
    /// Built-in pair (o1, o1-corrected, bio1, bio2, canonical) or a JSON file
    /// with `name`, `h0`, `f0`.
    #[arg(long, default_value = "bio2")]
    pub filter: String,

    /// Decomposition levels K; 0 uses raw intensities.
    #[arg(long, default_value_t = 3)]
    pub levels: usize,

    /// Weight of the four coarsest-level components.
    #[arg(long, default_value_t = 1.0)]
    pub w: f64,

    #[arg(long, value_enum, default_value_t = Mode::Power)]
    pub mode: Mode,

    /// Pixel each tree is attributed to.
    #[arg(long, value_enum, default_value_t = Anchor::Centered)]
    pub anchor: Anchor,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PhantomArgs {
    #[arg(long, value_enum, default_value_t = Kind::Minefield)]
    pub kind: Kind,

    /// Image size as WIDTHxHEIGHT.
    #[arg(long, default_value = "64x64", value_parser = parse_size)]
    pub size: (usize, usize),

    /// Standard deviation of the additive Gaussian noise.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// 16-bit PGM output.
    pub output: PathBuf,

    /// Ground-truth label image.
    #[arg(long)]
    pub truth: Option<PathBuf>,

    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DecomposeArgs {
    pub input: PathBuf,

    /// Directory for the band images, named `<prefix>_<band>.pgm`.
    #[arg(long)]
    pub out_dir: PathBuf,

    #[arg(long, default_value = "band")]
    pub prefix: String,

    /// Also write the pyramid as a binary container.
    #[arg(long)]
    pub pyramid: Option<PathBuf>,

    /// Also write the weighted feature field as a binary container.
    #[arg(long)]
    pub features: Option<PathBuf>,

    #[command(flatten)]
    #[serde(flatten)]
    pub feature: FeatureArgs,

    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ClusterArgs {
    pub input: PathBuf,

    /// Label image output.
    pub output: PathBuf,

    #[arg(long, value_enum, default_value_t = Algo::Kmeans)]
    pub algo: Algo,

    #[arg(long, default_value_t = 2)]
    pub classes: usize,

    /// FCM fuzzifier.
    #[arg(long, default_value_t = 2.0)]
    pub q: f64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value_t = 300)]
    pub max_iter: usize,

    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,

    #[command(flatten)]
    #[serde(flatten)]
    pub feature: FeatureArgs,

    #[arg(long)]
    pub report: Option<PathBuf>,

    /// Objective per iteration as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct AcweArgs {
    pub input: PathBuf,

    /// Binary mask output.
    pub output: PathBuf,

    /// Length weight; defaults to a tenth of the largest squared distance to
    /// the mean feature vector.
    #[arg(long)]
    pub mu: Option<f64>,

    #[arg(long, default_value_t = 1.0)]
    pub eps: f64,

    /// Time step; defaults to a stable step from the initial forces.
    #[arg(long)]
    pub dt: Option<f64>,

    #[arg(long, default_value_t = 1.0)]
    pub lambda1: f64,

    #[arg(long, default_value_t = 1.0)]
    pub lambda2: f64,

    #[arg(long, value_enum, default_value_t = Init::Checkerboard)]
    pub init: Init,

    /// Circle radius in pixels; defaults to a third of the shorter side.
    #[arg(long)]
    pub radius: Option<f64>,

    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,

    /// Stop when fewer than this fraction of pixels change sign ...
    #[arg(long, default_value_t = 1e-4)]
    pub stop_tol: f64,

    /// ... for this many iterations in a row.
    #[arg(long, default_value_t = 20)]
    pub patience: usize,

    #[command(flatten)]
    #[serde(flatten)]
    pub feature: FeatureArgs,

    /// Final level set as a binary container.
    #[arg(long)]
    pub phi: Option<PathBuf>,

    #[arg(long)]
    pub report: Option<PathBuf>,

    /// Energy per iteration as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EvaluateArgs {
    pub prediction: PathBuf,
    pub truth: PathBuf,

    #[arg(long, default_value_t = 2)]
    pub classes: usize,

    #[arg(long)]
    pub report: Option<PathBuf>,
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WIDTHxHEIGHT, got `{s}`"))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<usize>()
            .map_err(|e| format!("bad size `{s}`: {e}"))
    };
    let (w, h) = (parse(w)?, parse(h)?);
    if w == 0 || h == 0 {
        return Err(format!("size `{s}` has a zero side"));
    }
    Ok((w, h))
}
