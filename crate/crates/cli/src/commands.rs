use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use facepipe::clustering::segment_face;
use facepipe::edge::{gradient_edges, log_zero_crossings, EdgeOperator};
use facepipe::fmaca::build_tree;
use facepipe::image::{difference_image, quantize, threshold, to_gray, RgbImage};
use facepipe::pipeline::{detect_still_with, detect_video_with, ClassifierChoice, Model, PipelineConfig};
use facepipe::ppm::{decode_ppm, encode_ppm, PpmFormat};
use facepipe::rbf::train_rbf_with_report;
use facepipe::sample::{class_labels, feature_dim};

use crate::annotate::annotate;
use crate::documents::{
    check_version, read_json, to_json, ClassificationDocument, ClassifiedRecord, DetectionDocument, FeatureRecord,
    FeatureSet, Fingerprint, FrameDetections, ModelFile, SCHEMA_VERSION,
};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "facepipe", version, about = "Skin-colour face detection, features and classification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detect faces and landmarks in still images or a frame sequence.
    Detect(DetectArgs),
    /// Train an RBF network or a basin tree from labelled features.
    Train(TrainArgs),
    /// Classify feature vectors or the faces found in images.
    Classify(ClassifyArgs),
    /// Three-class intensity segmentation of an image.
    Segment(SegmentArgs),
    /// Gradient magnitude or LoG zero-crossing edge map.
    Edges(EdgesArgs),
    /// Absolute difference of two frames.
    Diff(DiffArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    P3,
    P6,
}

impl From<Format> for PpmFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::P3 => PpmFormat::P3,
            Format::P6 => PpmFormat::P6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// PPM files, or directories whose `.ppm` files are taken in name order.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Treat the inputs as consecutive frames of one sequence.
    #[arg(long)]
    pub video: bool,
    /// JSON pipeline configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Detection document path; printed to stdout when absent.
    #[arg(long)]
    pub out_json: Option<PathBuf>,
    /// Directory for annotated copies of the inputs.
    #[arg(long)]
    pub out_annotated: Option<PathBuf>,
    /// Model file; enables classification of complete detections.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, env = "FACEPIPE_SEED")]
    pub seed: Option<u64>,
    /// Override motion gating (sequences default to on).
    #[arg(long, value_enum)]
    pub gating: Option<Toggle>,
    #[arg(long, value_enum, default_value = "p6")]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Rbf,
    Fmaca,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Feature set JSON.
    #[arg(long, required_unless_present = "images", conflicts_with = "images")]
    pub features: Option<PathBuf>,
    /// Directory with one sub-directory of PPM images per label.
    #[arg(long)]
    pub images: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub classifier: Kind,
    #[arg(long, env = "FACEPIPE_SEED")]
    pub seed: Option<u64>,
    /// Hidden units for the RBF network (default: number of classes).
    #[arg(long)]
    pub units: Option<usize>,
    /// Maximum basins per tree node (default: number of classes, at least 2).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = facepipe::fmaca::DEFAULT_MAX_DEPTH)]
    pub max_depth: usize,
    /// Pipeline configuration used when extracting features from images.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Also write the extracted feature set.
    #[arg(long)]
    pub out_features: Option<PathBuf>,
    #[arg(long)]
    pub out_model: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Feature set JSON to classify.
    #[arg(long, conflicts_with = "inputs")]
    pub features: Option<PathBuf>,
    /// Images whose complete detections are classified.
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, env = "FACEPIPE_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    pub input: PathBuf,
    /// Class map written with gray levels 0, 128 and 255 (darkest class 0).
    #[arg(long)]
    pub out: PathBuf,
    /// Mask of the darkest class.
    #[arg(long)]
    pub out_mask: Option<PathBuf>,
    #[arg(long, env = "FACEPIPE_SEED")]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value = "p6")]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EdgeOp {
    Roberts,
    Prewitt,
    Sobel,
    Log,
}

#[derive(Debug, Args)]
pub struct EdgesArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "sobel")]
    pub op: EdgeOp,
    /// Gaussian scale of the LoG operator.
    #[arg(long, default_value_t = 2.0)]
    pub sigma: f64,
    /// Minimum response jump for a LoG zero crossing.
    #[arg(long, default_value_t = 0.0)]
    pub floor: f64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "p6")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct DiffArgs {
    pub first: PathBuf,
    pub second: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Write the binary motion mask `|a - b| > t` instead of the difference.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long, value_enum, default_value = "p6")]
    pub format: Format,
}

/// Writes through a temporary file in the destination directory and
/// renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn read_ppm(path: &Path) -> CliResult<RgbImage> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    decode_ppm(&bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Files as given; directories contribute their `.ppm` files sorted by name.
pub fn expand_inputs(inputs: &[PathBuf]) -> CliResult<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut files: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.is_file() && f.extension().is_some_and(|x| x.eq_ignore_ascii_case("ppm")))
                .collect();
            files.sort();
            if files.is_empty() {
                return Err(CliError::Io(format!("{}: no .ppm files", p.display())));
            }
            out.extend(files);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn load_config(path: Option<&Path>) -> CliResult<PipelineConfig> {
    let cfg = match path {
        Some(p) => read_json::<PipelineConfig>(p, "pipeline config")?,
        None => PipelineConfig::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Resolves the model from `--model` or the config's `model_path` and
/// aligns the configured classifier with it.
fn resolve_model(cfg: &mut PipelineConfig, flag: Option<&Path>) -> CliResult<Option<Model>> {
    let path = match (flag, &cfg.model_path) {
        (Some(p), _) => Some(p.to_path_buf()),
        (None, Some(p)) if cfg.classifier != ClassifierChoice::None => Some(p.clone()),
        _ => None,
    };
    let Some(path) = path else {
        if cfg.classifier != ClassifierChoice::None {
            return Err(CliError::Usage(format!(
                "classifier {:?} configured but no model path given",
                cfg.classifier
            )));
        }
        return Ok(None);
    };
    let file = ModelFile::load(&path)?;
    cfg.classifier = file.model.kind();
    cfg.model_path = Some(path);
    Ok(Some(file.model))
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Detect(a) => cmd_detect(a),
        Command::Train(a) => cmd_train(a),
        Command::Classify(a) => cmd_classify(a),
        Command::Segment(a) => cmd_segment(a),
        Command::Edges(a) => cmd_edges(a),
        Command::Diff(a) => cmd_diff(a),
    }
}

fn emit_json(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => write_atomic(p, bytes),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

pub fn cmd_detect(a: DetectArgs) -> CliResult<()> {
    let mut cfg = load_config(a.config.as_deref())?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(g) = a.gating {
        cfg.motion.enabled = Some(g == Toggle::On);
    }
    let model = resolve_model(&mut cfg, a.model.as_deref())?;
    let paths = expand_inputs(&a.inputs)?;
    let images = paths.iter().map(|p| read_ppm(p)).collect::<CliResult<Vec<_>>>()?;

    let per_frame = if a.video {
        detect_video_with(&images, &cfg, model.as_ref())?
    } else {
        images
            .iter()
            .map(|img| detect_still_with(img, &cfg, model.as_ref()))
            .collect::<facepipe::Result<Vec<_>>>()?
    };
    let doc = DetectionDocument {
        schema_version: SCHEMA_VERSION.into(),
        source: a.inputs.iter().map(|p| display(p)).collect(),
        video: a.video,
        config: cfg,
        frames: per_frame
            .iter()
            .zip(&paths)
            .enumerate()
            .map(|(index, (dets, p))| FrameDetections {
                index,
                source: display(p),
                detections: dets.clone(),
            })
            .collect(),
    };

    let mut annotated = Vec::new();
    if let Some(dir) = &a.out_annotated {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        for (i, (img, p)) in images.iter().zip(&paths).enumerate() {
            let stem = p.file_stem().map_or_else(|| format!("input{i}"), |s| s.to_string_lossy().into_owned());
            let name = if a.video { format!("{i:04}_{stem}.ppm") } else { format!("{stem}.annotated.ppm") };
            annotated.push((dir.join(name), encode_ppm(&annotate(img, &per_frame[i]), a.format.into())));
        }
    }
    let json = to_json(&doc)?;
    for (path, bytes) in &annotated {
        write_atomic(path, bytes)?;
    }
    emit_json(a.out_json.as_deref(), &json)?;
    let total: usize = per_frame.iter().map(Vec::len).sum();
    let complete: usize = per_frame.iter().flatten().filter(|d| d.is_complete()).count();
    eprintln!("{} input(s): {total} face(s), {complete} with complete features", paths.len());
    Ok(())
}

/// Complete feature vectors of every face in `<dir>/<label>/*.ppm`.
fn features_from_images(dir: &Path, cfg: &PipelineConfig) -> CliResult<FeatureSet> {
    let mut labels: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    labels.sort();
    let mut samples = Vec::new();
    for label_dir in labels {
        let label = label_dir.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        for path in expand_inputs(&[label_dir.clone()])? {
            let img = read_ppm(&path)?;
            let dets = detect_still_with(&img, cfg, None)?;
            let mut used = 0;
            for d in dets {
                if let Some(f) = d.feature {
                    samples.push(FeatureRecord {
                        label: Some(label.clone()),
                        source: Some(display(&path)),
                        features: f.values(),
                    });
                    used += 1;
                }
            }
            if used == 0 {
                eprintln!("{}: no complete face, skipped", path.display());
            }
        }
    }
    Ok(FeatureSet {
        schema_version: SCHEMA_VERSION.into(),
        samples,
    })
}

pub fn cmd_train(a: TrainArgs) -> CliResult<()> {
    let seed = a.seed.unwrap_or(0);
    let set = match (&a.features, &a.images) {
        (Some(p), _) => {
            let set: FeatureSet = read_json(p, "feature set")?;
            check_version(&set.schema_version, p)?;
            set
        }
        (None, Some(dir)) => {
            let mut cfg = load_config(a.config.as_deref())?;
            cfg.seed = seed;
            cfg.classifier = ClassifierChoice::None;
            features_from_images(dir, &cfg)?
        }
        (None, None) => return Err(CliError::Usage("one of --features or --images is required".into())),
    };
    let samples = set.labelled()?;
    let dims = feature_dim(&samples)?;
    let classes = class_labels(&samples);
    if classes.len() < 2 {
        return Err(CliError::Data(format!(
            "training needs at least 2 classes, found {}",
            classes.len()
        )));
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for s in &samples {
        *counts.entry(s.label.as_str()).or_default() += 1;
    }
    let mut summary = format!(
        "{} samples, {} dims, classes: {}\n",
        samples.len(),
        dims,
        counts.iter().map(|(l, n)| format!("{l}={n}")).collect::<Vec<_>>().join(" ")
    );

    let model = match a.classifier {
        Kind::Rbf => {
            let units = a.units.unwrap_or(classes.len());
            let (net, report) = train_rbf_with_report(&samples, units, seed)?;
            summary += &format!(
                "rbf: {} units, training accuracy {:.4}, normal-equation residual {:.3e}\n",
                report.units, report.training_accuracy, report.normal_equation_residual
            );
            Model::Rbf(net)
        }
        Kind::Fmaca => {
            let k = a.k.unwrap_or(classes.len().max(2));
            let tree = build_tree(&samples, k, seed, a.max_depth)?;
            let stats = tree.stats();
            let correct = samples
                .iter()
                .filter(|s| tree.predict(&s.features).map(|(l, _)| l == s.label).unwrap_or(false))
                .count();
            summary += &format!(
                "fmaca: K={k}, depth {}, {} nodes, {} leaves, training accuracy {:.4}\nleaf purities: {}\n",
                stats.depth,
                stats.node_count,
                stats.leaf_count,
                correct as f64 / samples.len() as f64,
                stats.leaf_purities.iter().map(|p| format!("{p:.4}")).collect::<Vec<_>>().join(" ")
            );
            Model::Fmaca(tree)
        }
    };
    let file = ModelFile {
        schema_version: SCHEMA_VERSION.into(),
        fingerprint: Fingerprint {
            count: samples.len(),
            dims,
            seed,
            classes,
        },
        model,
    };
    let model_bytes = to_json(&file)?;
    let feature_bytes = match &a.out_features {
        Some(_) => Some(to_json(&set)?),
        None => None,
    };
    if let (Some(p), Some(b)) = (&a.out_features, &feature_bytes) {
        write_atomic(p, b)?;
    }
    write_atomic(&a.out_model, &model_bytes)?;
    print!("{summary}");
    Ok(())
}

pub fn cmd_classify(a: ClassifyArgs) -> CliResult<()> {
    let file = ModelFile::load(&a.model)?;
    let model = file.model;
    let mut records = Vec::new();
    match &a.features {
        Some(p) => {
            let set: FeatureSet = read_json(p, "feature set")?;
            check_version(&set.schema_version, p)?;
            for (index, r) in set.samples.iter().enumerate() {
                records.push(ClassifiedRecord {
                    index,
                    source: r.source.clone(),
                    expected: r.label.clone(),
                    predicted: model.classify(&r.features)?,
                });
            }
        }
        None => {
            if a.inputs.is_empty() {
                return Err(CliError::Usage("give --features or at least one image".into()));
            }
            let mut cfg = load_config(a.config.as_deref())?;
            if let Some(seed) = a.seed {
                cfg.seed = seed;
            }
            cfg.classifier = model.kind();
            for path in expand_inputs(&a.inputs)? {
                let img = read_ppm(&path)?;
                for d in detect_still_with(&img, &cfg, Some(&model))? {
                    if let Some(f) = &d.failure {
                        if f.stage == facepipe::pipeline::Stage::Classification {
                            return Err(CliError::Data(format!("{}: {}", path.display(), f.reason)));
                        }
                    }
                    if let Some(label) = d.label {
                        records.push(ClassifiedRecord {
                            index: records.len(),
                            source: Some(display(&path)),
                            expected: None,
                            predicted: label,
                        });
                    }
                }
            }
        }
    }
    let labelled: Vec<&ClassifiedRecord> = records.iter().filter(|r| r.expected.is_some()).collect();
    let accuracy = (!labelled.is_empty()).then(|| {
        labelled
            .iter()
            .filter(|r| r.expected.as_deref() == Some(r.predicted.label.as_str()))
            .count() as f64
            / labelled.len() as f64
    });
    let doc = ClassificationDocument {
        schema_version: SCHEMA_VERSION.into(),
        model_kind: match model.kind() {
            ClassifierChoice::Rbf => "rbf".into(),
            _ => "fmaca".into(),
        },
        results: records,
        accuracy,
    };
    emit_json(a.out_json.as_deref(), &to_json(&doc)?)
}

/// Gray level used for class `i` in segment output.
pub fn class_level(i: u8) -> u8 {
    [0, 128, 255][(i as usize).min(2)]
}

pub fn cmd_segment(a: SegmentArgs) -> CliResult<()> {
    let img = read_ppm(&a.input)?;
    let seg = segment_face(&to_gray::<f64>(&img), a.seed.unwrap_or(0))?;
    let classes = RgbImage::new(
        seg.width,
        seg.height,
        seg.class_map.iter().map(|&c| [class_level(c); 3]).collect(),
    )?;
    let class_bytes = encode_ppm(&classes, a.format.into());
    let mask_bytes = encode_ppm(&seg.class_one.to_rgb(), a.format.into());
    write_atomic(&a.out, &class_bytes)?;
    if let Some(p) = &a.out_mask {
        write_atomic(p, &mask_bytes)?;
    }
    eprintln!(
        "class centres: {}; {} darkest-class component(s)",
        seg.class_centers.iter().map(|c| format!("{c:.2}")).collect::<Vec<_>>().join(", "),
        seg.components.len()
    );
    Ok(())
}

pub fn cmd_edges(a: EdgesArgs) -> CliResult<()> {
    let img = read_ppm(&a.input)?;
    let gray = to_gray::<f64>(&img);
    let out = match a.op {
        EdgeOp::Log => log_zero_crossings(&gray, a.sigma, a.floor)?.to_rgb(),
        op => {
            let op = match op {
                EdgeOp::Roberts => EdgeOperator::Roberts,
                EdgeOp::Prewitt => EdgeOperator::Prewitt,
                _ => EdgeOperator::Sobel,
            };
            let mag = gradient_edges(&gray, op)?;
            let peak = mag.pixels().iter().copied().fold(0.0, f64::max);
            let scale = if peak > 0.0 { 255.0 / peak } else { 0.0 };
            RgbImage::new(
                mag.width(),
                mag.height(),
                mag.pixels().iter().map(|&v| [quantize(v * scale); 3]).collect(),
            )?
        }
    };
    write_atomic(&a.out, &encode_ppm(&out, a.format.into()))
}

pub fn cmd_diff(a: DiffArgs) -> CliResult<()> {
    let (x, y) = (read_ppm(&a.first)?, read_ppm(&a.second)?);
    let diff = difference_image(&to_gray::<f64>(&x), &to_gray::<f64>(&y))?;
    let out = match a.threshold {
        Some(t) => threshold(&diff, t).to_rgb(),
        None => diff.to_rgb(),
    };
    write_atomic(&a.out, &encode_ppm(&out, a.format.into()))
}
