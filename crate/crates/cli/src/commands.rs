use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Args;
use log::{info, warn};
use rayon::prelude::*;
use rnaseg_core::eval::{self, score_table, Counts, SweepGrid, SweepPatch};
use rnaseg_core::image::{load_annotations, load_patch, save_annotations};
use rnaseg_core::model::{
    family_channel_shares, feature_shares, label_candidates, load_model, save_model, weight_breakdown,
    write_breakdown_csv,
};
use rnaseg_core::pipeline::{prepare_patch, segment_patch};
use rnaseg_core::segmap::render_map;
use rnaseg_core::synth::{generate, SynthConfig};
use rnaseg_core::texture::extract_all;
use rnaseg_core::{AnnotationSet, Error, FeatureSet, PipelineConfig};

use crate::io;
use crate::Overrides;

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// RNG seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of dots.
    #[arg(long, default_value_t = 80)]
    dots: usize,
    /// Patch side in pixels.
    #[arg(long, default_value_t = 480)]
    side: usize,
    /// Number of nuclei.
    #[arg(long, default_value_t = 30)]
    nuclei: usize,
    /// PNG to write.
    #[arg(long)]
    out: PathBuf,
    /// Where to write the dot centres.
    #[arg(long)]
    truth: PathBuf,
}

pub fn synth(a: SynthArgs) -> Result<()> {
    let cfg = SynthConfig {
        seed: a.seed,
        dots: a.dots,
        side: a.side,
        nuclei: a.nuclei,
        ..SynthConfig::default()
    };
    let (img, truth) = generate(&cfg)?;
    img.save_png(&a.out)?;
    save_annotations(&a.truth, &truth)?;
    info!("wrote {} with {} dots", a.out.display(), truth.len());
    Ok(())
}

#[derive(Debug, Args)]
pub struct CandidatesArgs {
    /// Patch image (PNG or TIFF).
    #[arg(long = "in")]
    input: PathBuf,
    /// Candidates CSV: x,y,intensity,radius.
    #[arg(long)]
    out: PathBuf,
    /// Write the candidate mask as a PNG.
    #[arg(long)]
    dump_mask: Option<PathBuf>,
    /// Write the deconvolved planes into this directory.
    #[arg(long)]
    dump_planes: Option<PathBuf>,
}

pub fn candidates(a: CandidatesArgs, cfg: PipelineConfig) -> Result<()> {
    cfg.validate()?;
    let img = load_patch(&a.input)?;
    let prep = prepare_patch(&img, &cfg)?;
    io::write_candidates(&a.out, prep.candidates())?;
    if let Some(p) = &a.dump_mask {
        prep.selection.mask.image.save_png(p)?;
    }
    if let Some(dir) = &a.dump_planes {
        fs::create_dir_all(dir)?;
        prep.planes.haem.save_png(&dir.join("haematoxylin.png"))?;
        prep.planes.rnascope.save_png(&dir.join("rnascope.png"))?;
        prep.planes.residual.save_png(&dir.join("residual.png"))?;
        prep.gray.save_png(&dir.join("gray.png"))?;
    }
    info!(
        "{}: threshold {}, {} candidates",
        a.input.display(),
        prep.selection.thresh,
        prep.candidates().len()
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Patch image (PNG or TIFF).
    #[arg(long = "in")]
    input: PathBuf,
    /// Candidates CSV; selected from the patch when omitted.
    #[arg(long)]
    candidates: Option<PathBuf>,
    /// Feature set: reduced or full.
    #[arg(long = "set")]
    feature_set: Option<FeatureSet>,
    /// Features CSV: x,y then one column per feature.
    #[arg(long)]
    out: PathBuf,
    /// Annotations used to label each candidate.
    #[arg(long, requires = "labels")]
    truth: Option<PathBuf>,
    /// Where to write labels (requires --truth).
    #[arg(long, requires = "truth")]
    labels: Option<PathBuf>,
}

pub fn extract(a: ExtractArgs, mut cfg: PipelineConfig) -> Result<()> {
    if let Some(s) = a.feature_set {
        cfg.feature_set = s;
    }
    cfg.validate()?;
    let img = load_patch(&a.input)?;
    let prep = prepare_patch(&img, &cfg)?;
    let cands = match &a.candidates {
        Some(p) => {
            let c = io::read_candidates(p)?;
            if let Some(bad) = c.iter().find(|c| c.x >= img.width() || c.y >= img.height()) {
                return Err(Error::InvalidInput(format!(
                    "candidate ({}, {}) lies outside the {}x{} patch",
                    bad.x,
                    bad.y,
                    img.width(),
                    img.height()
                ))
                .into());
            }
            c
        }
        None => prep.candidates().to_vec(),
    };
    let t = Instant::now();
    let rows = extract_all(cfg.feature_set, &prep.feature_channels(), &cands);
    info!("{} {} features in {:?}", cands.len(), cfg.feature_set, t.elapsed());
    let coords: Vec<(usize, usize)> = cands.iter().map(|c| (c.x, c.y)).collect();
    io::write_features(&a.out, cfg.feature_set, &coords, &rows)?;
    if let (Some(truth), Some(labels)) = (&a.truth, &a.labels) {
        let truth = load_annotations(truth, Some((img.width(), img.height())))?;
        let l = label_candidates(&cands, &truth);
        io::write_labels(labels, &coords, &l)?;
        info!("{} positive of {}", l.iter().filter(|&&v| v).count(), l.len());
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Feature CSVs; repeat to pool several patches.
    #[arg(long, required = true)]
    features: Vec<PathBuf>,
    /// Label CSVs, one per features file, in the same order.
    #[arg(long, required = true)]
    labels: Vec<PathBuf>,
    /// Model file to write.
    #[arg(long)]
    out: PathBuf,
    /// Regularization constant.
    #[arg(long)]
    c: Option<f64>,
    /// Seed for shuffling rows.
    #[arg(long)]
    seed: Option<u64>,
    /// Duality-gap stopping tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
}

pub fn train(a: TrainArgs, mut cfg: PipelineConfig) -> Result<()> {
    if a.features.len() != a.labels.len() {
        return Err(Error::InvalidInput(format!(
            "{} feature files but {} label files",
            a.features.len(),
            a.labels.len()
        ))
        .into());
    }
    if let Some(c) = a.c {
        cfg.train.c = c;
    }
    if let Some(s) = a.seed {
        cfg.train.seed = s;
    }
    if let Some(t) = a.tolerance {
        cfg.train.tolerance = t;
    }
    cfg.train.validate()?;
    let mut set = None;
    let (mut rows, mut labels) = (Vec::new(), Vec::new());
    for (f, l) in a.features.iter().zip(&a.labels) {
        let table = io::read_features(f)?;
        if *set.get_or_insert(table.set) != table.set {
            return Err(Error::InvalidInput(format!("{} uses a different feature set", f.display())).into());
        }
        labels.extend(io::read_labels(l, &table.coords)?);
        rows.extend(table.rows);
    }
    let set = set.expect("at least one features file");
    let t = Instant::now();
    let (model, report) = rnaseg_core::model::train(&rows, &labels, set, &cfg.train)?;
    info!(
        "trained on {} rows ({} positive) in {:?}, {} steps",
        rows.len(),
        report.positives,
        t.elapsed(),
        report.epochs
    );
    if !report.converged {
        warn!("training stopped before reaching the tolerance");
    }
    save_model(&model, &a.out)?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Trained model file.
    #[arg(long)]
    model: PathBuf,
    /// Features CSV from extract-features.
    #[arg(long)]
    features: PathBuf,
    /// Scores CSV: x,y,score.
    #[arg(long)]
    out: PathBuf,
}

pub fn predict(a: PredictArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let table = io::read_features(&a.features)?;
    if table.set != model.feature_set {
        return Err(Error::InvalidInput(format!(
            "model expects {} features but {} holds {}",
            model.feature_set,
            a.features.display(),
            table.set
        ))
        .into());
    }
    let scores: Vec<f64> = table
        .rows
        .par_iter()
        .map(|r| model.predict_score(r))
        .collect::<rnaseg_core::Result<_>>()?;
    io::write_scores(&a.out, &table.coords, &scores)
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Trained model file.
    #[arg(long)]
    model: PathBuf,
    /// Breakdown CSV.
    #[arg(long)]
    out: PathBuf,
}

pub fn analyze(a: AnalyzeArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let rows = weight_breakdown(&model);
    write_breakdown_csv(&rows, fs::File::create(&a.out)?)?;
    let mut stdout = std::io::stdout().lock();
    let mut by_feature = feature_shares(&rows);
    by_feature.sort_by(|x, y| y.2.total_cmp(&x.2));
    writeln!(stdout, "share\tfamily\tfeature")?;
    for (family, feature, share) in by_feature {
        writeln!(stdout, "{:5.1}%\t{}\t{}", 100.0 * share, family.name(), feature)?;
    }
    writeln!(stdout)?;
    writeln!(stdout, "share\tfamily\tchannel")?;
    for (family, channel, share) in family_channel_shares(&rows) {
        writeln!(stdout, "{:5.1}%\t{}\t{}", 100.0 * share, family.name(), channel.name())?;
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    /// Trained model file.
    #[arg(long)]
    model: PathBuf,
    /// Patch image (PNG or TIFF).
    #[arg(long = "in")]
    input: PathBuf,
    /// Detections CSV: x,y,area,peak.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
    /// Write the confidence map as a PNG.
    #[arg(long)]
    dump_map: Option<PathBuf>,
    /// Write per-candidate scores.
    #[arg(long)]
    dump_scores: Option<PathBuf>,
}

pub fn segment(a: SegmentArgs, mut cfg: PipelineConfig) -> Result<()> {
    a.overrides.apply(&mut cfg);
    cfg.validate()?;
    let model = load_model(&a.model)?;
    check_set(&model, &a.overrides)?;
    let img = load_patch(&a.input)?;
    let out = segment_patch(&img, &model, &cfg)?;
    info!(
        "{}: {} candidates, {} detections, features {:?}",
        a.input.display(),
        out.prepared.candidates().len(),
        out.detections.len(),
        out.timings.features
    );
    io::write_detections(&a.out, &out.detections)?;
    if let Some(p) = &a.dump_map {
        out.map.save_png(p)?;
    }
    if let Some(p) = &a.dump_scores {
        let coords: Vec<_> = out.prepared.candidates().iter().map(|c| (c.x, c.y)).collect();
        io::write_scores(p, &coords, &out.scores)?;
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// CSV whose first columns are x,y.
    #[arg(long)]
    detections: PathBuf,
    /// Annotation CSV with x,y columns.
    #[arg(long)]
    truth: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
}

pub fn evaluate(a: EvaluateArgs, mut cfg: PipelineConfig) -> Result<()> {
    a.overrides.apply(&mut cfg);
    let dets = load_annotations(&a.detections, None)?;
    let truth = load_annotations(&a.truth, None)?;
    let r = eval::match_points(&dets.points, &truth.points, cfg.match_radius, cfg.match_mode)?;
    let c = r.counts;
    println!("tp\tfp\tfn\tprecision\trecall\tf1");
    println!(
        "{}\t{}\t{}\t{:.4}\t{:.4}\t{:.4}",
        c.tp,
        c.fp,
        c.fn_,
        c.precision(),
        c.recall(),
        c.f1()
    );
    Ok(())
}

/// `<stem>.png` patches in `dir` paired with `<stem>.csv` annotations.
fn annotated_patches(dir: &Path) -> Result<Vec<(PathBuf, PathBuf)>> {
    let mut out = Vec::new();
    let entries = fs::read_dir(dir).map_err(|e| Error::Unreadable {
        path: dir.to_owned(),
        reason: e.to_string(),
    })?;
    for entry in entries {
        let path = entry?.path();
        if !is_image(&path) {
            continue;
        }
        let truth = path.with_extension("csv");
        if truth.exists() {
            out.push((path, truth));
        } else {
            warn!("{} has no annotations, skipped", path.display());
        }
    }
    out.sort();
    if out.is_empty() {
        return Err(Error::InvalidInput(format!("no annotated patches in {}", dir.display())).into());
    }
    Ok(out)
}

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "tif" | "tiff"))
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Trained model file.
    #[arg(long)]
    model: PathBuf,
    /// Directory of patches with same-named annotation CSVs.
    #[arg(long)]
    patches: PathBuf,
    /// Surface CSV: one row per (gray, area).
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
}

pub fn sweep(a: SweepArgs, mut cfg: PipelineConfig) -> Result<()> {
    a.overrides.apply(&mut cfg);
    cfg.validate()?;
    let model = load_model(&a.model)?;
    check_set(&model, &a.overrides)?;
    let pairs = annotated_patches(&a.patches)?;
    let patches = pairs
        .par_iter()
        .map(|(img_path, truth_path)| -> Result<SweepPatch> {
            let img = load_patch(img_path)?;
            let truth = load_annotations(truth_path, Some((img.width(), img.height())))?;
            let prep = prepare_patch(&img, &cfg).with_context(|| img_path.display().to_string())?;
            let rows = prep.features(model.feature_set);
            let scores = rows.iter().map(|r| model.predict_score(r)).collect::<rnaseg_core::Result<Vec<_>>>()?;
            let map = render_map(img.width(), img.height(), prep.candidates(), &scores)?;
            Ok(SweepPatch {
                map,
                truth: truth.points,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let grid = SweepGrid {
        radius: cfg.match_radius,
        mode: cfg.match_mode,
        ..SweepGrid::default()
    };
    let rows = eval::sweep(&patches, &grid)?;
    eval::write_sweep_csv(&rows, fs::File::create(&a.out)?)?;
    if let Some(best) = eval::sweep_argmax(&rows) {
        let c = best.counts;
        println!(
            "best: gray {} area {} f1 {:.4} precision {:.4} recall {:.4}",
            best.gray,
            best.area,
            c.f1(),
            c.precision(),
            c.recall()
        );
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Trained model file.
    #[arg(long)]
    model: PathBuf,
    /// Output directory for per-patch detections and summary.csv.
    #[arg(long)]
    out: PathBuf,
    /// Directory holding `<stem>.csv` annotations; defaults to each
    /// patch's own directory.
    #[arg(long)]
    truth_dir: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    /// Also write each patch's confidence map.
    #[arg(long)]
    dump_maps: bool,
    /// Also write each patch's candidates.
    #[arg(long)]
    dump_candidates: bool,
    /// Patch images (PNG or TIFF).
    #[arg(required = true)]
    patches: Vec<PathBuf>,
}

struct PatchSummary {
    name: String,
    detections: usize,
    counts: Option<Counts>,
    features_ms: f64,
}

pub fn run(a: RunArgs, mut cfg: PipelineConfig) -> Result<()> {
    a.overrides.apply(&mut cfg);
    cfg.validate()?;
    let model = load_model(&a.model)?;
    check_set(&model, &a.overrides)?;
    fs::create_dir_all(&a.out)?;
    let results: Vec<(PathBuf, Result<PatchSummary>)> = a
        .patches
        .par_iter()
        .map(|p| (p.clone(), run_one(p, &a, &model, &cfg)))
        .collect();

    let mut summary = csv::Writer::from_path(a.out.join("summary.csv"))?;
    summary.write_record([
        "patch",
        "status",
        "detections",
        "tp",
        "fp",
        "fn",
        "precision",
        "recall",
        "f1",
        "features_ms",
    ])?;
    let mut failures = Vec::new();
    let mut scored = Vec::new();
    for (path, r) in results {
        match r {
            Ok(s) => {
                let fmt = |f: fn(&Counts) -> f64| s.counts.map_or(String::new(), |c| format!("{:.4}", f(&c)));
                let count = |f: fn(&Counts) -> usize| s.counts.map_or(String::new(), |c| f(&c).to_string());
                summary.write_record([
                    s.name.clone(),
                    "ok".into(),
                    s.detections.to_string(),
                    count(|c| c.tp),
                    count(|c| c.fp),
                    count(|c| c.fn_),
                    fmt(Counts::precision),
                    fmt(Counts::recall),
                    fmt(Counts::f1),
                    format!("{:.1}", s.features_ms),
                ])?;
                if let Some(c) = s.counts {
                    scored.push((s.name, c));
                }
            }
            Err(e) => {
                log::error!("{}: {e:#}", path.display());
                let name = stem(&path);
                summary.write_record([name, format!("error: {e:#}"), String::new(), String::new(), String::new(), String::new(), String::new(), String::new(), String::new(), String::new()])?;
                failures.push(e);
            }
        }
    }
    summary.flush()?;
    if !scored.is_empty() {
        let mut total = Counts::default();
        for (_, c) in &scored {
            total += *c;
        }
        scored.push(("pooled".into(), total));
        print!("{}", score_table(&scored)?);
    }
    match failures.len() {
        0 => Ok(()),
        n => {
            let first = failures.swap_remove(0);
            Err(first.context(format!("{n} of {} patches failed", a.patches.len())))
        }
    }
}

fn check_set(model: &rnaseg_core::LinearModel, overrides: &Overrides) -> Result<()> {
    match overrides.feature_set {
        Some(s) if s != model.feature_set => Err(Error::InvalidInput(format!(
            "--set {s} requested but the model was trained on {} features",
            model.feature_set
        ))
        .into()),
        _ => Ok(()),
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "patch".into(), |s| s.to_string_lossy().into_owned())
}

fn run_one(path: &Path, a: &RunArgs, model: &rnaseg_core::LinearModel, cfg: &PipelineConfig) -> Result<PatchSummary> {
    let name = stem(path);
    let img = load_patch(path)?;
    let out = segment_patch(&img, model, cfg)?;
    io::write_detections(&a.out.join(format!("{name}_detections.csv")), &out.detections)?;
    if a.dump_maps {
        out.map.save_png(&a.out.join(format!("{name}_map.png")))?;
    }
    if a.dump_candidates {
        io::write_candidates(&a.out.join(format!("{name}_candidates.csv")), out.prepared.candidates())?;
    }
    let truth_path = match &a.truth_dir {
        Some(d) => d.join(format!("{name}.csv")),
        None => path.with_extension("csv"),
    };
    let counts = if truth_path.exists() {
        let truth: AnnotationSet = load_annotations(&truth_path, Some((img.width(), img.height())))?;
        Some(out.evaluate(&truth, cfg)?.counts)
    } else {
        None
    };
    info!(
        "{name}: {} candidates, {} detections, features {:?}",
        out.prepared.candidates().len(),
        out.detections.len(),
        out.timings.features
    );
    Ok(PatchSummary {
        name,
        detections: out.detections.len(),
        counts,
        features_ms: out.timings.features.as_secs_f64() * 1e3,
    })
}
