//! Directory-level evaluation, fragmentation and repair.
//!
//! Files are paired by name and processed on a rayon pool, but results are
//! always gathered in sorted filename order, so reports and written masks do
//! not depend on the thread count.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fragment::{generate_breaks, BreakRecord, FragmentParams};
use crate::metrics::{
    evaluate_pair, relative_improvement, Aggregate, MetricReport, MetricRow, PairOptions, StdMode,
    DEFAULT_PATCH_SIZE,
};
use crate::raster::{read_mask, write_mask, BinaryMask, PnmFormat};
use crate::repair::{repair_mask, Bridge, RepairParams};
use crate::topology::{skeletonize, Connectivity};

/// Worker count for a batch run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Threads {
    /// Let rayon pick, usually one per core.
    #[default]
    Auto,
    Count(NonZeroUsize),
}

impl FromStr for Threads {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Threads::Auto);
        }
        s.parse::<NonZeroUsize>().map(Threads::Count).map_err(|_| {
            Error::Domain(format!(
                "threads must be a positive integer or auto, got {s:?}"
            ))
        })
    }
}

impl fmt::Display for Threads {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threads::Auto => f.write_str("auto"),
            Threads::Count(n) => write!(f, "{n}"),
        }
    }
}

impl Threads {
    fn install<T: Send>(self, job: impl FnOnce() -> T + Send) -> Result<T> {
        let n = match self {
            Threads::Auto => 0,
            Threads::Count(n) => n.get(),
        };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Domain(format!("cannot start worker pool: {e}")))?;
        Ok(pool.install(job))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Csv,
    Markdown,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "md" | "markdown" => Ok(OutputFormat::Markdown),
            _ => Err(Error::Domain(format!(
                "output must be csv or md, got {s:?}"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalConfig {
    pub pred_dir: PathBuf,
    pub gt_dir: PathBuf,
    pub patch_size: usize,
    pub connectivity: Connectivity,
    pub std_mode: StdMode,
    pub output: OutputFormat,
    pub threads: Threads,
}

impl EvalConfig {
    /// Configuration with default options for the two directories.
    pub fn new(pred_dir: impl Into<PathBuf>, gt_dir: impl Into<PathBuf>) -> Self {
        EvalConfig {
            pred_dir: pred_dir.into(),
            gt_dir: gt_dir.into(),
            patch_size: DEFAULT_PATCH_SIZE,
            connectivity: Connectivity::Eight,
            std_mode: StdMode::Population,
            output: OutputFormat::Csv,
            threads: Threads::Auto,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.patch_size == 0 {
            return Err(Error::Domain("patch size must be positive".into()));
        }
        for dir in [&self.pred_dir, &self.gt_dir] {
            if !dir.is_dir() {
                return Err(Error::Domain(format!(
                    "{} is not a directory",
                    dir.display()
                )));
            }
        }
        Ok(())
    }

    pub fn pair_options(&self) -> PairOptions {
        PairOptions {
            patch_size: self.patch_size,
            connectivity: self.connectivity,
        }
    }

    /// The report in the configured output format.
    pub fn render(&self, report: &MetricReport) -> Result<String> {
        match self.output {
            OutputFormat::Csv => Ok(format!(
                "{}\n{}",
                per_image_csv(&report.per_image)?,
                aggregate_csv(&report.aggregate)?
            )),
            OutputFormat::Markdown => Ok(markdown_table(&report.aggregate, self.pair_options())),
        }
    }
}

/// Sorted names of the visible regular files in `dir`.
pub fn list_masks(dir: &Path) -> Result<Vec<String>> {
    let mut names = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let file_type = entry.file_type().map_err(|e| Error::io(entry.path(), e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if file_type.is_file() && !name.starts_with('.') {
            names.push(name);
        }
    }
    names.sort();
    Ok(names)
}

/// Filenames present in both directories. Any file found in only one of
/// them is an error.
pub fn pair_files(pred_dir: &Path, gt_dir: &Path) -> Result<Vec<String>> {
    let pred: BTreeSet<String> = list_masks(pred_dir)?.into_iter().collect();
    let gt: BTreeSet<String> = list_masks(gt_dir)?.into_iter().collect();
    let mut unmatched: Vec<String> = pred
        .difference(&gt)
        .map(|n| pred_dir.join(n).display().to_string())
        .collect();
    unmatched.extend(
        gt.difference(&pred)
            .map(|n| gt_dir.join(n).display().to_string()),
    );
    if !unmatched.is_empty() {
        return Err(Error::Pairing(unmatched));
    }
    if pred.is_empty() {
        return Err(Error::EmptyInput(format!(
            "no mask files in {} or {}",
            pred_dir.display(),
            gt_dir.display()
        )));
    }
    Ok(pred.into_iter().collect())
}

/// Runs `job` over `items` on the pool and returns the results in input
/// order. The first failing item in that order decides the error.
fn map_ordered<I: Sync, T: Send>(
    items: &[I],
    threads: Threads,
    job: impl Fn(&I) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    let results: Vec<Result<T>> = threads.install(|| items.par_iter().map(&job).collect())?;
    results.into_iter().collect()
}

/// Scores every prediction in `cfg.pred_dir` against the same-named ground
/// truth in `cfg.gt_dir`.
pub fn evaluate_dataset(cfg: &EvalConfig) -> Result<MetricReport> {
    cfg.validate()?;
    let names = pair_files(&cfg.pred_dir, &cfg.gt_dir)?;
    let opts = cfg.pair_options();
    let rows = map_ordered(&names, cfg.threads, |name| {
        let pred = read_mask(cfg.pred_dir.join(name))?;
        let gt = read_mask(cfg.gt_dir.join(name))?;
        evaluate_pair(name, &pred, &gt, opts).map_err(|e| e.in_file(name))
    })?;
    MetricReport::from_rows(rows, cfg.std_mode)
}

fn csv_text(build: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    build(&mut w).map_err(|e| Error::Domain(format!("csv encoding failed: {e}")))?;
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Domain(format!("csv encoding failed: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Domain(format!("csv encoding failed: {e}")))
}

/// One row per image at full precision.
pub fn per_image_csv(rows: &[MetricRow]) -> Result<String> {
    csv_text(|w| {
        w.write_record(["image_id", "dice", "iou", "cldice", "beta0"])?;
        for r in rows {
            w.write_record([
                r.image_id.clone(),
                r.dice.to_string(),
                r.iou.to_string(),
                r.cldice.to_string(),
                r.beta0.to_string(),
            ])?;
        }
        Ok(())
    })
}

/// One row per metric at full precision.
pub fn aggregate_csv(agg: &Aggregate) -> Result<String> {
    csv_text(|w| {
        w.write_record(["metric", "mean", "std", "n"])?;
        for (name, s) in agg.named() {
            w.write_record([
                name.to_string(),
                s.mean.to_string(),
                s.std.to_string(),
                agg.n.to_string(),
            ])?;
        }
        Ok(())
    })
}

/// Mean ± std with two decimals, one column per metric.
pub fn markdown_table(agg: &Aggregate, opts: PairOptions) -> String {
    let p = opts.patch_size;
    let beta = format!("β₀ ({p}×{p}, {}-conn)", opts.connectivity.as_u8());
    let cell = |s: crate::metrics::Summary| format!("{:.2}±{:.2}", s.mean, s.std);
    format!(
        "| n | Dice | IoU | clDice | {beta} |\n|---|---|---|---|---|\n| {} | {} | {} | {} | {} |\n",
        agg.n,
        cell(agg.dice),
        cell(agg.iou),
        cell(agg.cldice),
        cell(agg.beta0)
    )
}

/// Output encoding implied by a file name: `.pbm` gets P4, anything else P5.
pub fn format_for_path(path: &Path) -> PnmFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("pbm") => PnmFormat::P4,
        _ => PnmFormat::P5,
    }
}

/// Named masks read from every file in `dir`, sorted by name.
pub fn read_dataset(dir: &Path, threads: Threads) -> Result<Vec<(String, BinaryMask)>> {
    let names = list_masks(dir)?;
    if names.is_empty() {
        return Err(Error::EmptyInput(format!(
            "no mask files in {}",
            dir.display()
        )));
    }
    map_ordered(&names, threads, |name| {
        Ok((name.clone(), read_mask(dir.join(name))?))
    })
}

fn write_dataset(dir: &Path, masks: &[(&str, &BinaryMask)]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (name, mask) in masks {
        let path = dir.join(name);
        write_mask(&path, mask, format_for_path(&path))?;
    }
    Ok(())
}

/// A fragmented mask with the breaks that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct FragmentedImage {
    pub image_id: String,
    pub mask: BinaryMask,
    pub breaks: Vec<BreakRecord>,
}

/// A repaired mask with the bridges that were drawn.
#[derive(Clone, Debug, PartialEq)]
pub struct RepairedImage {
    pub image_id: String,
    pub mask: BinaryMask,
    pub bridges: Vec<Bridge>,
}

/// Fragments every mask with the same parameters.
pub fn fragment_all(
    masks: &[(String, BinaryMask)],
    params: &FragmentParams,
    threads: Threads,
) -> Result<Vec<FragmentedImage>> {
    params.validate()?;
    map_ordered(masks, threads, |(name, gt)| {
        let (mask, breaks) = generate_breaks(gt, params).map_err(|e| e.in_file(name))?;
        Ok(FragmentedImage {
            image_id: name.clone(),
            mask,
            breaks,
        })
    })
}

/// Repairs every mask with the same parameters.
pub fn repair_all(
    masks: &[(String, BinaryMask)],
    params: &RepairParams,
    threads: Threads,
) -> Result<Vec<RepairedImage>> {
    params.validate()?;
    map_ordered(masks, threads, |(name, pred)| {
        let outcome = repair_mask(pred, params).map_err(|e| e.in_file(name))?;
        Ok(RepairedImage {
            image_id: name.clone(),
            mask: outcome.mask,
            bridges: outcome.bridges,
        })
    })
}

/// Fragments the masks of `gt_dir` into `out_dir` under the same names.
pub fn fragment_dir(
    gt_dir: &Path,
    out_dir: &Path,
    params: &FragmentParams,
    threads: Threads,
) -> Result<Vec<FragmentedImage>> {
    let images = fragment_all(&read_dataset(gt_dir, threads)?, params, threads)?;
    let masks: Vec<_> = images
        .iter()
        .map(|i| (i.image_id.as_str(), &i.mask))
        .collect();
    write_dataset(out_dir, &masks)?;
    Ok(images)
}

/// Repairs the masks of `in_dir` into `out_dir` under the same names.
pub fn repair_dir(
    in_dir: &Path,
    out_dir: &Path,
    params: &RepairParams,
    threads: Threads,
) -> Result<Vec<RepairedImage>> {
    let images = repair_all(&read_dataset(in_dir, threads)?, params, threads)?;
    let masks: Vec<_> = images
        .iter()
        .map(|i| (i.image_id.as_str(), &i.mask))
        .collect();
    write_dataset(out_dir, &masks)?;
    Ok(images)
}

/// Skeletonizes one mask file into another.
pub fn skeletonize_file(input: &Path, output: &Path) -> Result<BinaryMask> {
    let skeleton = skeletonize(&read_mask(input)?);
    write_mask(output, &skeleton, format_for_path(output))?;
    Ok(skeleton)
}

/// Break records as CSV, prefixed by the image they belong to.
pub fn breaks_csv(images: &[FragmentedImage]) -> Result<String> {
    csv_text(|w| {
        w.write_record([
            "image_id",
            "center_x",
            "center_y",
            "radius",
            "cc_before",
            "cc_after",
        ])?;
        for img in images {
            for b in &img.breaks {
                w.write_record([
                    img.image_id.clone(),
                    b.center.x.to_string(),
                    b.center.y.to_string(),
                    b.radius.to_string(),
                    b.components_before.to_string(),
                    b.components_after.to_string(),
                ])?;
            }
        }
        Ok(())
    })
}

/// Drawn bridges as CSV, prefixed by the image they belong to.
pub fn bridges_csv(images: &[RepairedImage]) -> Result<String> {
    csv_text(|w| {
        w.write_record(["image_id", "ax", "ay", "bx", "by", "gap", "score", "radius"])?;
        for img in images {
            for b in &img.bridges {
                let (a, q) = (b.proposal.a.position, b.proposal.b.position);
                w.write_record([
                    img.image_id.clone(),
                    a.x.to_string(),
                    a.y.to_string(),
                    q.x.to_string(),
                    q.y.to_string(),
                    b.proposal.gap.to_string(),
                    b.proposal.score.to_string(),
                    b.radius.to_string(),
                ])?;
            }
        }
        Ok(())
    })
}

/// Options shared by both halves of a fragment/repair run.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PipelineOptions {
    pub fragment: FragmentParams,
    pub repair: RepairParams,
    pub pair: PairOptions,
    pub std_mode: StdMode,
    pub threads: Threads,
}

/// Fragmented-vs-truth and repaired-vs-truth scores side by side.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineReport {
    pub before: MetricReport,
    pub after: MetricReport,
    pub fragmented: Vec<FragmentedImage>,
    pub repaired: Vec<RepairedImage>,
    /// Relative drop of mean β₀ in percent, absent when the fragmented
    /// masks already had zero β₀ error.
    pub improvement: Option<f64>,
}

impl PipelineReport {
    /// One-line summary such as `mean β₀ 0.75 -> 0.25: 66.7% improvement
    /// in connectivity`.
    pub fn summary(&self) -> String {
        let (b, a) = (
            self.before.aggregate.beta0.mean,
            self.after.aggregate.beta0.mean,
        );
        match self.improvement {
            Some(pct) => format!("mean β₀ {b:.2} -> {a:.2}: {pct:.1}% improvement in connectivity"),
            None => format!("mean β₀ {b:.2} -> {a:.2}: no connectivity error to improve"),
        }
    }
}

/// Fragments each ground truth, repairs the result and scores both against
/// the ground truth.
pub fn run_pipeline_on(
    gt: &[(String, BinaryMask)],
    opts: &PipelineOptions,
) -> Result<PipelineReport> {
    if gt.is_empty() {
        return Err(Error::EmptyInput("no ground-truth masks".into()));
    }
    let fragmented = fragment_all(gt, &opts.fragment, opts.threads)?;
    let broken: Vec<(String, BinaryMask)> = fragmented
        .iter()
        .map(|f| (f.image_id.clone(), f.mask.clone()))
        .collect();
    let repaired = repair_all(&broken, &opts.repair, opts.threads)?;

    let score = |masks: Vec<(&str, &BinaryMask)>| -> Result<MetricReport> {
        let rows = masks
            .into_iter()
            .zip(gt)
            .map(|((name, pred), (_, truth))| evaluate_pair(name, pred, truth, opts.pair))
            .collect::<Result<Vec<_>>>()?;
        MetricReport::from_rows(rows, opts.std_mode)
    };
    let before = score(
        fragmented
            .iter()
            .map(|f| (f.image_id.as_str(), &f.mask))
            .collect(),
    )?;
    let after = score(
        repaired
            .iter()
            .map(|r| (r.image_id.as_str(), &r.mask))
            .collect(),
    )?;
    let improvement =
        relative_improvement(before.aggregate.beta0.mean, after.aggregate.beta0.mean).ok();
    Ok(PipelineReport {
        before,
        after,
        fragmented,
        repaired,
        improvement,
    })
}

/// [`run_pipeline_on`] over every mask in `gt_dir`.
pub fn run_pipeline(gt_dir: &Path, opts: &PipelineOptions) -> Result<PipelineReport> {
    run_pipeline_on(&read_dataset(gt_dir, opts.threads)?, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threads_parse() {
        assert_eq!("auto".parse::<Threads>().unwrap(), Threads::Auto);
        assert_eq!(
            "3".parse::<Threads>().unwrap(),
            Threads::Count(NonZeroUsize::new(3).unwrap())
        );
        assert!("0".parse::<Threads>().is_err());
        assert!("many".parse::<Threads>().is_err());
    }

    #[test]
    fn output_format_parse() {
        assert_eq!(
            "md".parse::<OutputFormat>().unwrap(),
            OutputFormat::Markdown
        );
        assert_eq!("csv".parse::<OutputFormat>().unwrap(), OutputFormat::Csv);
        assert!("json".parse::<OutputFormat>().is_err());
    }

    #[test]
    fn markdown_rounds_to_two_decimals() {
        let rows = vec![
            MetricRow {
                image_id: "a".into(),
                dice: 0.8123,
                iou: 0.7,
                cldice: 0.9,
                beta0: 1.0,
            },
            MetricRow {
                image_id: "b".into(),
                dice: 0.8,
                iou: 0.7,
                cldice: 0.9,
                beta0: 0.0,
            },
        ];
        let agg = crate::metrics::aggregate(&rows, StdMode::Population).unwrap();
        let md = markdown_table(&agg, PairOptions::default());
        assert!(md.contains("β₀ (64×64, 8-conn)"), "{md}");
        assert!(
            md.contains("| 2 | 0.81±0.01 | 0.70±0.00 | 0.90±0.00 | 0.50±0.50 |"),
            "{md}"
        );
    }

    #[test]
    fn csv_quotes_awkward_names_and_keeps_precision() {
        let rows = vec![MetricRow {
            image_id: "a,b.pgm".into(),
            dice: 1.0 / 3.0,
            iou: 0.2,
            cldice: 1.0,
            beta0: 0.0,
        }];
        let text = per_image_csv(&rows).unwrap();
        assert_eq!(
            text,
            "image_id,dice,iou,cldice,beta0\n\"a,b.pgm\",0.3333333333333333,0.2,1,0\n"
        );
    }

    #[test]
    fn pbm_extension_selects_p4() {
        assert_eq!(format_for_path(Path::new("x.PBM")), PnmFormat::P4);
        assert_eq!(format_for_path(Path::new("x.pgm")), PnmFormat::P5);
        assert_eq!(format_for_path(Path::new("x")), PnmFormat::P5);
    }
}
