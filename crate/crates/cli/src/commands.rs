//! Subcommand implementations.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Subcommand, ValueEnum};
use serde::Serialize;

use relspace::anchors::{self, AnchorSet, SelectionConfig, Strategy, DEFAULT_TOPK_SKIP};
use relspace::metrics::{alignment_report, latent_similarity_proxy, ReportFlags};
use relspace::space::VectorSet;
use relspace::stitch::{
    proxy_experiment, stitch_classification, stitch_reconstruction, ProxyConfig, ProxyReport,
    StitchConfig,
};
use relspace::transforms::{apply, TransformSpec};
use relspace::{project_quantized, AlignmentReport, EmbeddingSpace};

use crate::formats::{
    anchor_ids_to_string, load_space, parse_anchor_ids, parse_frequency_csv, read_to_string,
    relative_to_csv, relative_to_vec, space_to_csv, space_to_vec, write_atomic, SpaceFormat,
};
use crate::manifest::RunManifest;

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Select anchor ids from a space.
    Anchors(AnchorsArgs),
    /// Project a space onto anchor-relative coordinates.
    Project(ProjectArgs),
    /// Compare two spaces with Jaccard@k / MRR / cosine.
    Compare(CompareArgs),
    /// Latent-similarity proxy of a space against a reference.
    Proxy(ProxyArgs),
    /// Apply a seeded angle-preserving transform (plus optional translation).
    Transform(TransformArgs),
    /// Run stitching / proxy experiments from a JSON config.
    Stitch(StitchArgs),
    /// Generate a synthetic labeled blob dataset.
    Blobs(BlobsArgs),
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Anchors(args) => cmd_anchors(args),
        Command::Project(args) => cmd_project(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Proxy(args) => cmd_proxy(args),
        Command::Transform(args) => cmd_transform(args),
        Command::Stitch(args) => cmd_stitch(args),
        Command::Blobs(args) => cmd_blobs(args),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Uniform,
    Fps,
    Kmeans,
    Topk,
}

impl From<StrategyArg> for Strategy {
    fn from(value: StrategyArg) -> Self {
        match value {
            StrategyArg::Uniform => Strategy::Uniform,
            StrategyArg::Fps => Strategy::Fps,
            StrategyArg::Kmeans => Strategy::Kmeans,
            StrategyArg::Topk => Strategy::TopK,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Vec,
    Csv,
}

fn resolve_center(center: bool, no_center: bool, default: bool) -> bool {
    if center {
        true
    } else if no_center {
        false
    } else {
        default
    }
}

#[derive(Debug, Args)]
pub struct AnchorsArgs {
    #[arg(long, value_enum)]
    strategy: StrategyArg,
    /// Number of anchors.
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Frequency table (id,count CSV); required for top-k.
    #[arg(long)]
    freq: Option<PathBuf>,
    /// Most-frequent ids to drop before taking top-k anchors.
    #[arg(long, default_value_t = DEFAULT_TOPK_SKIP)]
    skip: usize,
    #[arg(long, value_enum, default_value_t = SpaceFormat::Vec)]
    format: SpaceFormat,
}

fn cmd_anchors(args: AnchorsArgs) -> Result<()> {
    let space = load_space(&args.input, args.format, "space")?;
    let frequencies = match (&args.freq, args.strategy) {
        (Some(path), _) => Some(parse_frequency_csv(&read_to_string(path)?)?),
        (None, StrategyArg::Topk) => {
            bail!("--strategy topk requires --freq FILE (two-column id,count CSV)")
        }
        (None, _) => None,
    };
    let mut config = SelectionConfig::new(args.strategy.into(), args.m, args.seed);
    if args.strategy == StrategyArg::Topk {
        config.skip = Some(args.skip);
    }
    let set = anchors::select(&space, &config, frequencies.as_ref())?;
    let ids = set.ids(&space)?;

    write_atomic(&args.out, &anchor_ids_to_string(&ids))?;
    let mut manifest = RunManifest::new("anchors")
        .flag("strategy", format!("{:?}", args.strategy).to_lowercase())
        .flag("m", args.m)
        .flag("seed", args.seed)
        .flag("skip", args.skip)
        .seed(args.seed)
        .input(&args.input)?;
    if let Some(freq) = &args.freq {
        manifest = manifest.input(freq)?;
    }
    manifest.write_sidecar(&args.out)
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Anchor id list, one per line.
    #[arg(long)]
    anchors: PathBuf,
    /// Agglomerative merge threshold applied before projecting (0 = none).
    #[arg(long, default_value_t = 0.0)]
    quantize_threshold: f64,
    /// Center the space first (off by default for pure projection).
    #[arg(long, overrides_with = "no_center")]
    center: bool,
    #[arg(long, overrides_with = "center")]
    no_center: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = SpaceFormat::Vec)]
    format: SpaceFormat,
    #[arg(long, value_enum, default_value_t = OutFormat::Vec)]
    out_format: OutFormat,
}

fn cmd_project(args: ProjectArgs) -> Result<()> {
    let mut space = load_space(&args.input, args.format, "space")?;
    let centered = resolve_center(args.center, args.no_center, false);
    if centered {
        space = space.center().0;
    }
    let anchor_ids = parse_anchor_ids(&read_to_string(&args.anchors)?);
    if anchor_ids.is_empty() {
        bail!("anchor file {} lists no ids", args.anchors.display());
    }
    let set = AnchorSet::from_ids(&space, &anchor_ids)?;
    let rel = project_quantized(&space, &set, args.quantize_threshold)?;

    let body = match args.out_format {
        OutFormat::Vec => relative_to_vec(&rel)?,
        OutFormat::Csv => relative_to_csv(&rel),
    };
    write_atomic(&args.out, &body)?;
    RunManifest::new("project")
        .flag("quantize-threshold", args.quantize_threshold)
        .flag("center", centered)
        .flag("out-format", format!("{:?}", args.out_format).to_lowercase())
        .input(&args.input)?
        .input(&args.anchors)?
        .write_sidecar(&args.out)
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    source: PathBuf,
    #[arg(long)]
    target: PathBuf,
    #[arg(long)]
    k: usize,
    /// Compare anchor-relative projections instead of raw coordinates.
    #[arg(long, requires = "anchors_source", requires = "anchors_target")]
    relative: bool,
    #[arg(long, requires = "relative")]
    anchors_source: Option<PathBuf>,
    #[arg(long, requires = "relative")]
    anchors_target: Option<PathBuf>,
    /// Centering is on by default for cross-space comparison.
    #[arg(long, overrides_with = "no_center")]
    center: bool,
    #[arg(long, overrides_with = "center")]
    no_center: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = SpaceFormat::Vec)]
    format: SpaceFormat,
}

#[derive(Serialize)]
struct ReportDocument<T: Serialize> {
    #[serde(flatten)]
    report: T,
    manifest: RunManifest,
}

/// Both spaces cut down to their shared ids, in source order.
fn shared_subspaces(
    source: &EmbeddingSpace,
    target: &EmbeddingSpace,
) -> Result<(EmbeddingSpace, EmbeddingSpace)> {
    let shared: Vec<String> = source
        .ids()
        .iter()
        .filter(|id| target.index_of(id).is_some())
        .cloned()
        .collect();
    if shared.is_empty() {
        bail!(
            "no shared ids between `{}` and `{}`",
            source.name(),
            target.name()
        );
    }
    Ok((source.subspace(&shared)?, target.subspace(&shared)?))
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    let source = load_space(&args.source, args.format, "source")?;
    let target = load_space(&args.target, args.format, "target")?;
    let centered = resolve_center(args.center, args.no_center, true);
    let (mut source, mut target) = shared_subspaces(&source, &target)?;
    if centered {
        source = source.center().0;
        target = target.center().0;
    }

    let mut report: AlignmentReport = if args.relative {
        let src_ids = parse_anchor_ids(&read_to_string(
            args.anchors_source.as_ref().expect("clap requires"),
        )?);
        let tgt_ids = parse_anchor_ids(&read_to_string(
            args.anchors_target.as_ref().expect("clap requires"),
        )?);
        if src_ids != tgt_ids {
            bail!(
                "parallel-anchor contract violated: anchor files must list the same ids \
                 in the same order ({} vs {} entries)",
                src_ids.len(),
                tgt_ids.len()
            );
        }
        let rel_src = relspace::project(&source, &AnchorSet::from_ids(&source, &src_ids)?)?;
        let rel_tgt = relspace::project(&target, &AnchorSet::from_ids(&target, &tgt_ids)?)?;
        alignment_report(&rel_src, &rel_tgt, args.k)?
    } else {
        alignment_report(&source, &target, args.k)?
    };
    report.flags = ReportFlags {
        centered: Some(centered),
        relative: Some(args.relative),
        anchors: None,
        seeds: None,
    };

    let manifest = RunManifest::new("compare")
        .flag("k", args.k)
        .flag("relative", args.relative)
        .flag("center", centered)
        .input(&args.source)?
        .input(&args.target)?;
    let manifest = match (&args.anchors_source, &args.anchors_target) {
        (Some(a), Some(b)) => manifest.input(a)?.input(b)?,
        _ => manifest,
    };
    let body = serde_json::to_string_pretty(&ReportDocument {
        report,
        manifest: manifest.clone(),
    })?;
    write_atomic(&args.out, &(body + "\n"))?;
    manifest.write_sidecar(&args.out)
}

#[derive(Debug, Args)]
pub struct ProxyArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long)]
    reference: PathBuf,
    #[arg(long)]
    anchors_space: PathBuf,
    #[arg(long)]
    anchors_reference: PathBuf,
    #[arg(long, overrides_with = "no_center")]
    center: bool,
    #[arg(long, overrides_with = "center")]
    no_center: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = SpaceFormat::Vec)]
    format: SpaceFormat,
}

#[derive(Serialize)]
struct ProxyDocument {
    proxy: f64,
    n_shared: usize,
    centered: bool,
}

fn cmd_proxy(args: ProxyArgs) -> Result<()> {
    let space = load_space(&args.space, args.format, "space")?;
    let reference = load_space(&args.reference, args.format, "reference")?;
    let centered = resolve_center(args.center, args.no_center, true);
    let (mut space, mut reference) = shared_subspaces(&space, &reference)?;
    if centered {
        space = space.center().0;
        reference = reference.center().0;
    }

    let space_ids = parse_anchor_ids(&read_to_string(&args.anchors_space)?);
    let ref_ids = parse_anchor_ids(&read_to_string(&args.anchors_reference)?);
    if space_ids != ref_ids {
        bail!(
            "parallel-anchor contract violated: anchor files must list the same ids \
             in the same order"
        );
    }
    let rel_space = relspace::project(&space, &AnchorSet::from_ids(&space, &space_ids)?)?;
    let rel_ref = relspace::project(&reference, &AnchorSet::from_ids(&reference, &ref_ids)?)?;
    let proxy = latent_similarity_proxy(&rel_space, &rel_ref)?;

    let manifest = RunManifest::new("proxy")
        .flag("center", centered)
        .input(&args.space)?
        .input(&args.reference)?
        .input(&args.anchors_space)?
        .input(&args.anchors_reference)?;
    let body = serde_json::to_string_pretty(&ReportDocument {
        report: ProxyDocument {
            proxy,
            n_shared: rel_space.len(),
            centered,
        },
        manifest: manifest.clone(),
    })?;
    write_atomic(&args.out, &(body + "\n"))?;
    manifest.write_sidecar(&args.out)
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Translate every row by this constant on each coordinate.
    #[arg(long)]
    translate: Option<f64>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = SpaceFormat::Vec)]
    format: SpaceFormat,
    #[arg(long, value_enum, default_value_t = OutFormat::Vec)]
    out_format: OutFormat,
}

fn cmd_transform(args: TransformArgs) -> Result<()> {
    let space = load_space(&args.input, args.format, "space")?;
    let mut spec = TransformSpec::random_angle_preserving(space.dim(), args.seed, args.scale)?;
    if let Some(t) = args.translate {
        spec = spec.with_translation(vec![t; space.dim()]);
    }
    let moved = apply(&space, &spec)?;

    let body = match args.out_format {
        OutFormat::Vec => space_to_vec(&moved)?,
        OutFormat::Csv => space_to_csv(&moved),
    };
    write_atomic(&args.out, &body)?;

    // The applied transform is provenance; it lands beside the output.
    let spec_path = {
        let mut name = args.out.file_name().unwrap_or_default().to_os_string();
        name.push(".transform.json");
        args.out.with_file_name(name)
    };
    write_atomic(
        &spec_path,
        &(serde_json::to_string_pretty(&spec)? + "\n"),
    )?;
    RunManifest::new("transform")
        .flag("seed", args.seed)
        .flag("scale", args.scale)
        .flag_opt("translate", args.translate)
        .seed(args.seed)
        .input(&args.input)?
        .write_sidecar(&args.out)
}

#[derive(Debug, Args)]
pub struct StitchArgs {
    /// JSON file with `classification` / `reconstruction` / `proxy` blocks.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, serde::Deserialize)]
struct StitchSuiteConfig {
    classification: Option<StitchConfig>,
    reconstruction: Option<StitchConfig>,
    proxy: Option<ProxyConfig>,
}

fn cmd_stitch(args: StitchArgs) -> Result<()> {
    let config: StitchSuiteConfig =
        serde_json::from_str(&read_to_string(&args.config)?)
            .with_context(|| format!("parsing {}", args.config.display()))?;
    if config.classification.is_none()
        && config.reconstruction.is_none()
        && config.proxy.is_none()
    {
        bail!("config names no experiments (classification, reconstruction, proxy)");
    }
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let manifest = RunManifest::new("stitch").input(&args.config)?;

    let mut csv = String::from(
        "experiment,mode,model,noise,non_stitched,stitched,accuracy,proxy\n",
    );
    if let Some(cfg) = &config.classification {
        let report = stitch_classification(cfg)?;
        for (mode, outcome) in [("absolute", &report.absolute), ("relative", &report.relative)]
        {
            let _ = writeln!(
                csv,
                "classification,{mode},,,{},{},,",
                outcome.non_stitched, outcome.stitched
            );
        }
        write_report(&args.out.join("classification.json"), &report, &manifest)?;
    }
    if let Some(cfg) = &config.reconstruction {
        let report = stitch_reconstruction(cfg)?;
        for (mode, outcome) in [("absolute", &report.absolute), ("relative", &report.relative)]
        {
            let _ = writeln!(
                csv,
                "reconstruction,{mode},,,{},{},,",
                outcome.non_stitched, outcome.stitched
            );
        }
        write_report(&args.out.join("reconstruction.json"), &report, &manifest)?;
    }
    if let Some(cfg) = &config.proxy {
        let report: ProxyReport = proxy_experiment(cfg)?;
        for i in 0..report.noise.len() {
            let _ = writeln!(
                csv,
                "proxy,relative,{i},{},,,{},{}",
                report.noise[i], report.accuracy[i], report.proxy[i]
            );
        }
        write_report(&args.out.join("proxy.json"), &report, &manifest)?;
    }

    let runs = args.out.join("runs.csv");
    write_atomic(&runs, &csv)?;
    manifest.write_sidecar(&runs)
}

fn write_report<T: Serialize>(path: &Path, report: &T, manifest: &RunManifest) -> Result<()> {
    let body = serde_json::to_string_pretty(&ReportDocument {
        report,
        manifest: manifest.clone(),
    })?;
    write_atomic(path, &(body + "\n"))?;
    manifest.write_sidecar(path)
}

#[derive(Debug, Args)]
pub struct BlobsArgs {
    #[arg(long)]
    classes: usize,
    #[arg(long)]
    per_class: usize,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    separation: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = OutFormat::Vec)]
    out_format: OutFormat,
}

fn cmd_blobs(args: BlobsArgs) -> Result<()> {
    let dataset = relspace::stitch::make_blobs(&relspace::stitch::BlobConfig {
        n_classes: args.classes,
        per_class: args.per_class,
        dim: args.d,
        separation: args.separation,
        seed: args.seed,
    })?;
    let body = match args.out_format {
        OutFormat::Vec => space_to_vec(&dataset.space)?,
        OutFormat::Csv => space_to_csv(&dataset.space),
    };
    write_atomic(&args.out, &body)?;

    let mut labels = String::from("id,label\n");
    for (id, label) in dataset.space.ids().iter().zip(&dataset.labels) {
        let _ = writeln!(labels, "{id},{label}");
    }
    let labels_path = {
        let mut name = args.out.file_name().unwrap_or_default().to_os_string();
        name.push(".labels.csv");
        args.out.with_file_name(name)
    };
    write_atomic(&labels_path, &labels)?;

    RunManifest::new("blobs")
        .flag("classes", args.classes)
        .flag("per-class", args.per_class)
        .flag("d", args.d)
        .flag("separation", args.separation)
        .flag("seed", args.seed)
        .seed(args.seed)
        .write_sidecar(&args.out)
}

/// One-line, machine-parseable error for standard error.
pub fn render_error(err: &anyhow::Error) -> String {
    let mut message = String::new();
    for (i, cause) in err.chain().enumerate() {
        if i > 0 {
            message.push_str(": ");
        }
        message.push_str(&cause.to_string());
    }
    let flat: String = message
        .chars()
        .map(|c| if c == '\n' { ' ' } else { c })
        .collect();
    serde_json::json!({ "error": flat }).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn center_resolution_honors_defaults_and_overrides() {
        assert!(!resolve_center(false, false, false));
        assert!(resolve_center(false, false, true));
        assert!(resolve_center(true, false, false));
        assert!(!resolve_center(false, true, true));
    }

    #[test]
    fn errors_render_as_single_json_line() {
        let err = anyhow!("top level").context("outer\nwith newline");
        let line = render_error(&err);
        assert!(!line.contains('\n'));
        let parsed: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert!(parsed["error"].as_str().unwrap().contains("top level"));
    }
}
