use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use waveseg_core::acwe::{acwe_w, init_levelset, AcweParams};
use waveseg_core::clustering::{
    fcm_w, kmeans_w, ClusterResult, FcmParams, HardLabeling, KMeansParams,
};
use waveseg_core::filterbank::{FilterPair, BUILTIN_NAMES};
use waveseg_core::io::{
    encode_image, encode_labels, encode_visualization, read_image, read_labels,
};
use waveseg_core::metrics::{misclassification, EvalReport};
use waveseg_core::phantom::{make_phantom, PhantomKind, PhantomSpec};
use waveseg_core::pipeline::{build_features, FeatureSpec};
use waveseg_core::wavelet::wavedec2;
use waveseg_core::{container, Error, FeatureField, WeightingConfig};

use crate::args::{
    AcweArgs, Algo, ClusterArgs, DecomposeArgs, EvaluateArgs, FeatureArgs, PhantomArgs,
};
use crate::error::CliError;
use crate::output::Outputs;

type Result<T> = std::result::Result<T, CliError>;

#[derive(Serialize)]
pub struct Report<'a, C, R> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: &'a C,
    pub threads: Option<usize>,
    pub result: R,
    /// `None` under `--reproducible`.
    pub wall_time_s: Option<f64>,
}

/// Shared per-run context.
pub struct Run {
    pub threads: Option<usize>,
    pub reproducible: bool,
    pub started: Instant,
}

impl Run {
    fn report<'a, C, R>(
        &self,
        command: &'static str,
        config: &'a C,
        result: R,
    ) -> Report<'a, C, R> {
        Report {
            tool: "waveseg",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            threads: self.threads,
            result,
            wall_time_s: (!self.reproducible).then(|| self.started.elapsed().as_secs_f64()),
        }
    }
}

/// A built-in name, or else a path to a JSON filter description.
pub fn resolve_filter(spec: &str) -> Result<FilterPair> {
    if BUILTIN_NAMES.contains(&spec) {
        return Ok(FilterPair::builtin(spec)?);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(Error::Name(spec.to_string()).into());
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(FilterPair::from_json(&text)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Padding {
    pub top: usize,
    pub bottom: usize,
    pub left: usize,
    pub right: usize,
}

/// Symmetric padding up to the next multiple of `2^levels`, split evenly.
pub fn padding_for(width: usize, height: usize, levels: usize) -> Padding {
    let block = 1usize << levels;
    let extra = |n: usize| (block - n % block) % block;
    let (ew, eh) = (extra(width), extra(height));
    Padding {
        top: eh / 2,
        bottom: eh - eh / 2,
        left: ew / 2,
        right: ew - ew / 2,
    }
}

fn crop_field(
    ff: &FeatureField,
    pad: Padding,
    width: usize,
    height: usize,
) -> Result<FeatureField> {
    let d = ff.dim();
    let mut data = Vec::with_capacity(width * height * d);
    for r in 0..height {
        for c in 0..width {
            data.extend_from_slice(ff.at(r + pad.top, c + pad.left));
        }
    }
    Ok(FeatureField::new(
        width,
        height,
        d,
        ff.levels(),
        data,
        ff.lowfreq_mask().to_vec(),
    )?)
}

#[derive(Serialize)]
pub struct InputInfo {
    pub width: usize,
    pub height: usize,
    pub padding: Padding,
    pub filter_name: String,
    /// Whether the pair passed its reconstruction check.
    pub filter_validated: bool,
    pub feature_dim: usize,
}

/// Reads, pads, extracts and weights features, then crops back to the input.
fn features(path: &Path, args: &FeatureArgs) -> Result<(FeatureField, InputInfo)> {
    let weighting = WeightingConfig::new(args.w, args.mode.into())?;
    let pair = resolve_filter(&args.filter)?;
    let img = read_image(path)?;
    let (w, h) = (img.width(), img.height());
    let pad = padding_for(w, h, args.levels);
    let padded = img.pad_symmetric(pad.top, pad.bottom, pad.left, pad.right);
    let mut spec = FeatureSpec::wavelet(args.levels, weighting);
    spec.anchor = args.anchor.into();
    if args.levels == 0 {
        spec = FeatureSpec::intensity();
    }
    let ff = crop_field(&build_features(&padded, &pair, &spec)?, pad, w, h)?;
    let info = InputInfo {
        width: w,
        height: h,
        padding: pad,
        filter_name: pair.name().to_string(),
        filter_validated: pair.is_validated(),
        feature_dim: ff.dim(),
    };
    Ok((ff, info))
}

#[derive(Serialize)]
struct PhantomResult {
    kind: PhantomKind,
    regions: Vec<&'static str>,
    region_pixels: Vec<usize>,
}

pub fn phantom(run: &Run, args: &PhantomArgs) -> Result<()> {
    let spec = PhantomSpec {
        kind: PhantomKind::default_for(args.kind.name())?,
        width: args.size.0,
        height: args.size.1,
        noise_sigma: args.noise,
        seed: args.seed,
    };
    let ph = make_phantom(&spec)?;
    let mut out = Outputs::default();
    out.add(&args.output, encode_image(&ph.image, 65535));
    if let Some(p) = &args.truth {
        out.add(p, encode_labels(&ph.truth));
    }
    if let Some(p) = &args.report {
        let result = PhantomResult {
            kind: spec.kind,
            region_pixels: ph.truth.counts(),
            regions: ph.regions.clone(),
        };
        out.add_json(p, &run.report("phantom", args, result))?;
    }
    out.commit()
}

#[derive(Serialize)]
struct BandInfo {
    name: String,
    width: usize,
    height: usize,
    min: f64,
    max: f64,
    file: String,
}

#[derive(Serialize)]
struct DecomposeResult {
    input: InputInfo,
    bands: Vec<BandInfo>,
}

pub fn decompose(run: &Run, args: &DecomposeArgs) -> Result<()> {
    if args.feature.levels == 0 {
        return Err(CliError::Usage("decompose needs --levels >= 1".into()));
    }
    if !args.out_dir.is_dir() {
        return Err(Error::Io {
            path: args.out_dir.clone(),
            source: std::io::Error::new(
                std::io::ErrorKind::NotFound,
                "output directory does not exist",
            ),
        }
        .into());
    }
    let pair = resolve_filter(&args.feature.filter)?;
    let img = read_image(&args.input)?;
    let pad = padding_for(img.width(), img.height(), args.feature.levels);
    let padded = img.pad_symmetric(pad.top, pad.bottom, pad.left, pad.right);
    let pyr = wavedec2(&padded, &pair, args.feature.levels)?;

    let mut out = Outputs::default();
    let mut bands = Vec::new();
    for (name, band) in pyr.bands() {
        let file = format!("{}_{name}.pgm", args.prefix);
        out.add(args.out_dir.join(&file), encode_visualization(band));
        let (min, max) = band.min_max();
        bands.push(BandInfo {
            name,
            width: band.width(),
            height: band.height(),
            min,
            max,
            file,
        });
    }
    if let Some(p) = &args.pyramid {
        out.add(p, container::encode_pyramid(&pyr));
    }
    let (ff, input) = features(&args.input, &args.feature)?;
    if let Some(p) = &args.features {
        out.add(p, container::encode_feature_field(&ff));
    }
    if let Some(p) = &args.report {
        out.add_json(
            p,
            &run.report("decompose", args, DecomposeResult { input, bands }),
        )?;
    }
    out.commit()
}

#[derive(Serialize)]
struct ClusterReport {
    input: InputInfo,
    iterations: usize,
    converged: bool,
    final_objective: f64,
    centroids: Vec<Vec<f64>>,
    class_pixels: Vec<usize>,
}

fn run_clustering(ff: &FeatureField, args: &ClusterArgs) -> Result<ClusterResult> {
    Ok(match args.algo {
        Algo::Kmeans => kmeans_w(
            ff,
            &KMeansParams {
                classes: args.classes,
                max_iter: args.max_iter,
                tol: args.tol,
                seed: args.seed,
            },
        )?,
        Algo::Fcm => fcm_w(
            ff,
            &FcmParams {
                classes: args.classes,
                q: args.q,
                max_iter: args.max_iter,
                tol: args.tol,
                seed: args.seed,
            },
        )?,
    })
}

pub fn cluster(run: &Run, args: &ClusterArgs) -> Result<()> {
    let (ff, input) = features(&args.input, &args.feature)?;
    let r = run_clustering(&ff, args)?;
    let mut out = Outputs::default();
    out.add(&args.output, encode_labels(&r.labeling));
    if let Some(p) = &args.trace {
        out.add_trace(p, &r.objective_trace)?;
    }
    if let Some(p) = &args.report {
        let result = ClusterReport {
            input,
            iterations: r.iterations,
            converged: r.converged,
            final_objective: r.final_objective(),
            centroids: r.centroids.to_vectors(),
            class_pixels: r.labeling.counts(),
        };
        out.add_json(p, &run.report("cluster", args, result))?;
    }
    out.commit()
}

#[derive(Serialize)]
struct AcweReport {
    input: InputInfo,
    iterations: usize,
    converged: bool,
    final_energy: f64,
    /// Resolved length weight and time step.
    mu: f64,
    dt: f64,
    mean_inside: Vec<f64>,
    mean_outside: Vec<f64>,
    foreground_pixels: usize,
}

pub fn acwe(run: &Run, args: &AcweArgs) -> Result<()> {
    let params = AcweParams {
        lambda1: args.lambda1,
        lambda2: args.lambda2,
        mu: args.mu,
        eps: args.eps,
        dt: args.dt,
        max_iter: args.max_iter,
        stop_tol: args.stop_tol,
        patience: args.patience,
    };
    let (ff, input) = features(&args.input, &args.feature)?;
    let init = init_levelset(ff.width(), ff.height(), args.init.into(), args.radius)?;
    let r = acwe_w(&ff, &init, &params)?;

    let mut out = Outputs::default();
    let mask = HardLabeling::from_mask(ff.width(), ff.height(), &r.mask)?;
    out.add(&args.output, encode_labels(&mask));
    if let Some(p) = &args.phi {
        out.add(p, container::encode_scalar(r.phi.phi()));
    }
    if let Some(p) = &args.trace {
        out.add_trace(p, &r.energy_trace)?;
    }
    if let Some(p) = &args.report {
        let result = AcweReport {
            input,
            iterations: r.iterations,
            converged: r.converged,
            final_energy: *r.energy_trace.last().expect("trace holds the final energy"),
            mu: r.mu,
            dt: r.dt,
            foreground_pixels: r.mask.iter().filter(|&&m| m).count(),
            mean_inside: r.mean_inside,
            mean_outside: r.mean_outside,
        };
        out.add_json(p, &run.report("acwe", args, result))?;
    }
    out.commit()
}

pub fn evaluate(run: &Run, args: &EvaluateArgs) -> Result<()> {
    let pred = read_labels(&args.prediction, args.classes)?;
    let truth = read_labels(&args.truth, args.classes)?;
    let r: EvalReport = misclassification(&pred, &truth, args.classes)?;
    let report = run.report("evaluate", args, r);
    println!("{}", serde_json::to_string(&report)?);
    let mut out = Outputs::default();
    if let Some(p) = &args.report {
        out.add_json(p, &report)?;
    }
    out.commit()
}

#[cfg(test)]
mod tests {
    use super::*;
    use waveseg_core::GrayImage;

    fn pad_image(img: &GrayImage, levels: usize) -> (GrayImage, Padding) {
        let pad = padding_for(img.width(), img.height(), levels);
        (
            img.pad_symmetric(pad.top, pad.bottom, pad.left, pad.right),
            pad,
        )
    }

    #[test]
    fn padding_reaches_the_next_multiple() {
        assert_eq!(
            padding_for(64, 64, 3),
            Padding {
                top: 0,
                bottom: 0,
                left: 0,
                right: 0
            }
        );
        let p = padding_for(61, 50, 3);
        assert_eq!((p.left + p.right + 61) % 8, 0);
        assert_eq!((p.top + p.bottom + 50) % 8, 0);
        assert_eq!((p.left, p.right), (1, 2));
        assert_eq!(
            padding_for(7, 5, 0),
            Padding {
                top: 0,
                bottom: 0,
                left: 0,
                right: 0
            }
        );
    }

    #[test]
    fn cropped_field_has_input_size() {
        let img = GrayImage::from_fn(13, 10, |r, c| (r * 13 + c) as f64 / 130.0);
        let (padded, pad) = pad_image(&img, 2);
        let pair = FilterPair::builtin("bio1").unwrap();
        let ff = build_features(
            &padded,
            &pair,
            &FeatureSpec::wavelet(2, WeightingConfig::default()),
        )
        .unwrap();
        let cropped = crop_field(&ff, pad, 13, 10).unwrap();
        assert_eq!((cropped.width(), cropped.height()), (13, 10));
        assert_eq!(cropped.at(0, 0), ff.at(pad.top, pad.left));
    }

    #[test]
    fn unknown_filter_is_a_name_error() {
        assert_eq!(resolve_filter("nope").unwrap_err().category(), "name");
    }
}
