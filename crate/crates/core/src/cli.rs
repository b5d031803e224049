//! Batch front end: folder ingestion, the worker pool, run manifests,
//! and CSV reports. The `iem` binary parses flags and dispatches here.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::eval::{evaluate_batch, CSV_HEADER};
use crate::image::preprocess;
use crate::io::{load_image, load_mask, save_image, save_mask};
use crate::objective::IemConfig;
use crate::optimizer::multi_init_run;
use crate::synth::{corpus_spec, gen_layered};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Settings shared by the batch commands beyond [`IemConfig`].
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub config: IemConfig,
    pub target_size: usize,
    pub jobs: usize,
    /// Optional list of stems restricting the inputs.
    pub file_list: Option<PathBuf>,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            config: IemConfig::default(),
            target_size: 128,
            jobs: 0, // 0 = available parallelism
            file_list: None,
        }
    }
}

/// Flat key-value manifest serialized next to every segmentation run so
/// results are reproducible from it alone.
#[derive(Debug, Clone, Default)]
pub struct RunManifest {
    entries: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::InvalidArgument(format!("manifest line {} is not key = value", lineno + 1))
            })?;
            entries.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| Error::Io { path: path.to_owned(), source })?;
        Self::parse(&text)
    }

    fn record_settings(&mut self, settings: &RunSettings) {
        let cfg = &settings.config;
        self.set("tool_version", TOOL_VERSION);
        self.set("target_size", settings.target_size);
        self.set("iterations", cfg.iterations);
        self.set("lambda", cfg.lambda);
        self.set("kernel_size", cfg.kernel.size);
        self.set("sigma", cfg.kernel.sigma);
        self.set("stacked", cfg.kernel.stacked);
        self.set(
            "init_sizes",
            cfg.init_sizes
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(","),
        );
        self.set("objective", cfg.variant);
        self.set("regularizer", cfg.toggles.regularizer_on);
        self.set("smoothing", cfg.toggles.smoothing_on);
        self.set("boundary_restricted", cfg.toggles.boundary_restricted);
        self.set("strict_iterations", cfg.strict_iterations);
        self.set("epsilon", cfg.epsilon);
    }

    /// Rebuilds the run settings recorded by [`record_settings`].
    pub fn to_settings(&self) -> Result<RunSettings> {
        let mut settings = RunSettings::default();
        let parse_err = |key: &str, v: &str| {
            Error::InvalidArgument(format!("manifest key {key} has unparsable value '{v}'"))
        };
        macro_rules! read {
            ($key:expr, $slot:expr) => {
                if let Some(v) = self.get($key) {
                    $slot = v.parse().map_err(|_| parse_err($key, v))?;
                }
            };
        }
        read!("target_size", settings.target_size);
        read!("iterations", settings.config.iterations);
        read!("lambda", settings.config.lambda);
        read!("kernel_size", settings.config.kernel.size);
        read!("sigma", settings.config.kernel.sigma);
        read!("stacked", settings.config.kernel.stacked);
        read!("objective", settings.config.variant);
        read!("regularizer", settings.config.toggles.regularizer_on);
        read!("smoothing", settings.config.toggles.smoothing_on);
        read!("boundary_restricted", settings.config.toggles.boundary_restricted);
        read!("strict_iterations", settings.config.strict_iterations);
        read!("epsilon", settings.config.epsilon);
        if let Some(v) = self.get("init_sizes") {
            settings.config.init_sizes = v
                .split(',')
                .map(|s| s.trim().parse().map_err(|_| parse_err("init_sizes", v)))
                .collect::<Result<_>>()?;
        }
        settings.config.validate()?;
        Ok(settings)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())
            .map_err(|source| Error::Io { path: path.to_owned(), source })
    }
}

/// One CSV row of the shared report schema; unavailable fields stay
/// empty.
#[derive(Debug, Clone, Default)]
pub struct ReportRow {
    pub image_id: String,
    pub init_size: Option<usize>,
    pub accuracy: Option<f64>,
    pub iou: Option<f64>,
    pub dice: Option<f64>,
    pub flipped: Option<bool>,
    pub final_l_inp: Option<f64>,
    pub degenerate: Option<bool>,
}

fn fmt_opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

pub fn write_report_csv(path: &Path, rows: &[ReportRow]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot open {}: {e}", path.display())))?;
    let io_err = |e: csv::Error| Error::InvalidArgument(format!("csv write failed: {e}"));
    writer.write_record(CSV_HEADER).map_err(io_err)?;
    for row in rows {
        writer
            .write_record([
                row.image_id.clone(),
                fmt_opt(&row.init_size),
                fmt_opt(&row.accuracy),
                fmt_opt(&row.iou),
                fmt_opt(&row.dice),
                fmt_opt(&row.flipped),
                fmt_opt(&row.final_l_inp),
                fmt_opt(&row.degenerate),
            ])
            .map_err(io_err)?;
    }
    writer.flush().map_err(|e| Error::InvalidArgument(format!("csv flush failed: {e}")))?;
    Ok(())
}

fn is_raster(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
        Some("png" | "jpg" | "jpeg")
    )
}

/// Decodable raster files of a directory, sorted by file name.
fn scan_images(dir: &Path, file_list: Option<&Path>) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir)
        .map_err(|source| Error::Io { path: dir.to_owned(), source })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && is_raster(p))
        .collect();
    if let Some(list) = file_list {
        let text = std::fs::read_to_string(list)
            .map_err(|source| Error::Io { path: list.to_owned(), source })?;
        let wanted: std::collections::BTreeSet<String> =
            text.lines().map(|l| l.trim().to_string()).filter(|l| !l.is_empty()).collect();
        files.retain(|p| {
            p.file_stem()
                .and_then(|s| s.to_str())
                .is_some_and(|s| wanted.contains(s))
        });
    }
    files.sort();
    Ok(files)
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot build worker pool: {e}")))
}

/// Summary returned by [`cmd_segment`].
#[derive(Debug, Clone)]
pub struct SegmentSummary {
    pub processed: usize,
    pub skipped: usize,
    pub manifest_path: PathBuf,
    pub csv_path: PathBuf,
}

/// Segments every image of a directory: preprocess, multi-init greedy
/// run, `<stem>_mask.png` plus a CSV row per image, and a manifest.
/// Per-image decode failures are logged and skipped; only I/O or
/// configuration errors fail the command.
pub fn cmd_segment(input: &Path, output: &Path, settings: &RunSettings) -> Result<SegmentSummary> {
    settings.config.validate()?;
    for &size in &settings.config.init_sizes {
        if size >= settings.target_size {
            return Err(Error::InvalidArgument(format!(
                "init size {size} must be smaller than the target size {}",
                settings.target_size
            )));
        }
    }
    let scan_started = Instant::now();
    let files = scan_images(input, settings.file_list.as_deref())?;
    std::fs::create_dir_all(output)
        .map_err(|source| Error::Io { path: output.to_owned(), source })?;
    let scan_time = scan_started.elapsed();

    struct PerImage {
        row: ReportRow,
        ok: bool,
    }

    let segment_started = Instant::now();
    let pool = thread_pool(settings.jobs)?;
    let results: Vec<PerImage> = pool.install(|| {
        files
            .par_iter()
            .map(|path| {
                let stem = path
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or("image")
                    .to_string();
                let run = || -> Result<ReportRow> {
                    let img = load_image(path)?;
                    let img = preprocess(&img, settings.target_size);
                    let res = multi_init_run(&img, &settings.config)?;
                    let mask_path = output.join(format!("{stem}_mask.png"));
                    save_mask(&res.mask, &mask_path)?;
                    Ok(ReportRow {
                        image_id: stem.clone(),
                        init_size: Some(res.init_size),
                        final_l_inp: Some(res.final_inpainting_loss),
                        degenerate: Some(res.degenerate),
                        ..ReportRow::default()
                    })
                };
                match run() {
                    Ok(row) => PerImage { row, ok: true },
                    Err(err) => {
                        eprintln!("skipping {}: {err}", path.display());
                        PerImage { row: ReportRow::default(), ok: false }
                    }
                }
            })
            .collect()
    });
    let segment_time = segment_started.elapsed();

    let write_started = Instant::now();
    let mut rows: Vec<ReportRow> = results.iter().filter(|r| r.ok).map(|r| r.row.clone()).collect();
    rows.sort_by(|a, b| a.image_id.cmp(&b.image_id));
    let csv_path = output.join("results.csv");
    write_report_csv(&csv_path, &rows)?;

    let processed = rows.len();
    let skipped = results.len() - processed;
    let mut manifest = RunManifest::default();
    manifest.record_settings(settings);
    manifest.set("command", "segment");
    manifest.set("input", input.display());
    manifest.set("output", output.display());
    manifest.set("jobs", settings.jobs);
    if let Some(list) = &settings.file_list {
        manifest.set("file_list", list.display());
    }
    manifest.set("images_total", results.len());
    manifest.set("images_processed", processed);
    manifest.set("images_skipped", skipped);
    manifest.set("time_scan_s", format!("{:.3}", scan_time.as_secs_f64()));
    manifest.set("time_segment_s", format!("{:.3}", segment_time.as_secs_f64()));
    manifest.set(
        "time_write_s",
        format!("{:.3}", write_started.elapsed().as_secs_f64()),
    );
    let manifest_path = output.join("run_manifest.txt");
    manifest.save(&manifest_path)?;

    Ok(SegmentSummary { processed, skipped, manifest_path, csv_path })
}

/// Summary returned by [`cmd_evaluate`].
#[derive(Debug, Clone)]
pub struct EvaluateSummary {
    pub pairs: usize,
    pub mean_accuracy: f64,
    pub mean_iou: f64,
    pub mean_dice: f64,
}

/// Scores predicted masks against ground truth by matching stems (a
/// trailing `_mask` on predictions is ignored). Ground-truth masks are
/// binarized at a threshold of 128.
pub fn cmd_evaluate(
    pred_dir: &Path,
    gt_dir: &Path,
    flip_search: bool,
    file_list: Option<&Path>,
    csv_out: Option<&Path>,
) -> Result<EvaluateSummary> {
    let preds = scan_images(pred_dir, None)?;
    let gts = scan_images(gt_dir, file_list)?;
    let gt_by_stem: BTreeMap<String, &PathBuf> = gts
        .iter()
        .filter_map(|p| {
            p.file_stem()
                .and_then(|s| s.to_str())
                .map(|s| (s.to_string(), p))
        })
        .collect();

    let mut matched: Vec<(String, &PathBuf, &PathBuf)> = Vec::new();
    for pred in &preds {
        let Some(stem) = pred.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        let key = stem.strip_suffix("_mask").unwrap_or(stem);
        if let Some(gt) = gt_by_stem.get(key) {
            matched.push((key.to_string(), pred, gt));
        }
    }
    if matched.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no prediction in {} matches a ground-truth stem in {}",
            pred_dir.display(),
            gt_dir.display()
        )));
    }
    matched.sort_by(|a, b| a.0.cmp(&b.0));

    let mut pairs = Vec::with_capacity(matched.len());
    for (_, pred, gt) in &matched {
        pairs.push((load_mask(pred)?, load_mask(gt)?));
    }
    let eval = evaluate_batch(&pairs, flip_search)?;

    let mut rows: Vec<ReportRow> = matched
        .iter()
        .zip(&eval.per_image)
        .map(|((stem, _, _), m)| ReportRow {
            image_id: stem.clone(),
            accuracy: Some(m.accuracy),
            iou: Some(m.iou),
            dice: Some(m.dice),
            flipped: Some(m.flipped),
            ..ReportRow::default()
        })
        .collect();
    rows.push(ReportRow {
        image_id: "mean".into(),
        accuracy: Some(eval.aggregate.accuracy),
        iou: Some(eval.aggregate.iou),
        dice: Some(eval.aggregate.dice),
        ..ReportRow::default()
    });
    if let Some(path) = csv_out {
        write_report_csv(path, &rows)?;
    } else {
        let mut line = CSV_HEADER.join(",");
        line.push('\n');
        for row in &rows {
            let _ = writeln!(
                line,
                "{},{},{},{},{},{},{},{}",
                row.image_id,
                fmt_opt(&row.init_size),
                fmt_opt(&row.accuracy),
                fmt_opt(&row.iou),
                fmt_opt(&row.dice),
                fmt_opt(&row.flipped),
                fmt_opt(&row.final_l_inp),
                fmt_opt(&row.degenerate),
            );
        }
        print!("{line}");
    }

    Ok(EvaluateSummary {
        pairs: matched.len(),
        mean_accuracy: eval.aggregate.accuracy,
        mean_iou: eval.aggregate.iou,
        mean_dice: eval.aggregate.dice,
    })
}

/// Generates a deterministic synthetic corpus: `images/<stem>.png` plus
/// planted masks under `gt/<stem>.png`.
pub fn cmd_synth(output: &Path, count: usize, seed: u64, side: usize) -> Result<usize> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be positive".into()));
    }
    if side < 8 {
        return Err(Error::InvalidArgument("side must be at least 8".into()));
    }
    let images = output.join("images");
    let gt = output.join("gt");
    for dir in [&images, &gt] {
        std::fs::create_dir_all(dir)
            .map_err(|source| Error::Io { path: dir.clone(), source })?;
    }
    for i in 0..count {
        let spec = corpus_spec(i, seed, side);
        let (img, mask) = gen_layered(&spec)?;
        let stem = format!("synth_{i:04}");
        save_image(&img, &images.join(format!("{stem}.png")))?;
        save_mask(&mask, &gt.join(format!("{stem}.png")))?;
    }
    Ok(count)
}
