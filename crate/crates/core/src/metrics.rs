//! Overlap and topology metrics, loss values and report aggregation.

use crate::error::{Error, Result};
use crate::raster::{tile_patches, BinaryMask, SoftMask};
use crate::topology::{count_components_in, skeletonize, Connectivity, LabelScratch};

pub const DEFAULT_PATCH_SIZE: usize = 64;
pub const DEFAULT_SOFT_ITERATIONS: usize = 10;
/// Guard added to denominators of the soft ratios.
pub const SOFT_EPSILON: f64 = 1e-8;

/// `2|X∩Y| / (|X|+|Y|)`; two empty masks score 1.
pub fn dice(x: &BinaryMask, y: &BinaryMask) -> Result<f64> {
    x.check_same_shape(y)?;
    let inter = x.intersection_count(y);
    let total = x.count() + y.count();
    if total == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * inter as f64 / total as f64)
}

/// `|X∩Y| / |X∪Y|`; two empty masks score 1.
pub fn iou(x: &BinaryMask, y: &BinaryMask) -> Result<f64> {
    x.check_same_shape(y)?;
    let inter = x.intersection_count(y);
    let union = x.count() + y.count() - inter;
    if union == 0 {
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}

/// clDice from precomputed skeletons.
///
/// The harmonic mean is evaluated on integer counts,
/// `2·a·b / (a·|S_g| + b·|S_p|)` with `a = |S_p∩gt|`, `b = |S_g∩pred|`,
/// which equals `2·Tprec·Tsens / (Tprec+Tsens)` with a single rounding.
pub fn cldice_from_skeletons(
    pred: &BinaryMask,
    gt: &BinaryMask,
    pred_skeleton: &BinaryMask,
    gt_skeleton: &BinaryMask,
) -> Result<f64> {
    pred.check_same_shape(gt)?;
    pred.check_same_shape(pred_skeleton)?;
    pred.check_same_shape(gt_skeleton)?;
    let sp = pred_skeleton.count() as u128;
    let sg = gt_skeleton.count() as u128;
    match (sp, sg) {
        (0, 0) => return Ok(1.0),
        (0, _) | (_, 0) => return Ok(0.0),
        _ => {}
    }
    let a = pred_skeleton.intersection_count(gt) as u128;
    let b = gt_skeleton.intersection_count(pred) as u128;
    if a == 0 || b == 0 {
        // Tprec or Tsens is zero, so the harmonic mean is too.
        return Ok(0.0);
    }
    Ok((2 * a * b) as f64 / (a * sg + b * sp) as f64)
}

/// Centerline Dice of Zhang-Suen skeletons. Both skeletons empty scores 1,
/// exactly one empty scores 0.
pub fn cldice(pred: &BinaryMask, gt: &BinaryMask) -> Result<f64> {
    pred.check_same_shape(gt)?;
    cldice_from_skeletons(pred, gt, &skeletonize(pred), &skeletonize(gt))
}

/// Patch-normalized Betti-0 error: the mean over square patches of the
/// absolute difference in connected-component counts.
pub fn betti0_normalized(
    pred: &BinaryMask,
    gt: &BinaryMask,
    patch_size: usize,
    conn: Connectivity,
) -> Result<f64> {
    pred.check_same_shape(gt)?;
    if patch_size == 0 {
        return Err(Error::Domain("patch size must be positive".into()));
    }
    let grid = tile_patches(pred.width(), pred.height(), patch_size);
    let mut scratch = LabelScratch::default();
    let total: usize = grid
        .patches
        .iter()
        .map(|&rect| {
            let a = count_components_in(pred, rect, conn, &mut scratch);
            let b = count_components_in(gt, rect, conn, &mut scratch);
            a.abs_diff(b)
        })
        .sum();
    Ok(total as f64 / grid.len() as f64)
}

pub fn mse(pred: &SoftMask, gt: &SoftMask) -> Result<f64> {
    pred.check_same_shape(gt)?;
    let sum: f64 = pred
        .values()
        .iter()
        .zip(gt.values())
        .map(|(p, g)| (p - g) * (p - g))
        .sum();
    Ok(sum / pred.values().len() as f64)
}

/// 3x3 min or max filter; the window is truncated at the image border.
fn filter3(src: &[f64], w: usize, h: usize, pick: fn(f64, f64) -> f64) -> Vec<f64> {
    let mut horizontal = vec![0.0; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let mut v = row[x];
            if x > 0 {
                v = pick(v, row[x - 1]);
            }
            if x + 1 < w {
                v = pick(v, row[x + 1]);
            }
            horizontal[y * w + x] = v;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut v = horizontal[y * w + x];
            if y > 0 {
                v = pick(v, horizontal[(y - 1) * w + x]);
            }
            if y + 1 < h {
                v = pick(v, horizontal[(y + 1) * w + x]);
            }
            out[y * w + x] = v;
        }
    }
    out
}

/// Differentiable skeleton surrogate built from iterated 3x3 min/max
/// pooling. Each iteration adds the part of the current image removed by a
/// morphological opening, then erodes.
pub fn soft_skeleton(mask: &SoftMask, iterations: usize) -> SoftMask {
    let (w, h) = mask.dims();
    let mut img = mask.values().to_vec();
    let mut skel = vec![0.0; w * h];
    for _ in 0..iterations {
        let eroded = filter3(&img, w, h, f64::min);
        let opened = filter3(&eroded, w, h, f64::max);
        for ((s, &v), &o) in skel.iter_mut().zip(&img).zip(&opened) {
            let delta = (v - o).max(0.0);
            *s += delta * (1.0 - *s);
        }
        img = eroded;
    }
    for s in &mut skel {
        *s = s.clamp(0.0, 1.0);
    }
    SoftMask::from_raw(w, h, skel)
}

/// `1 - soft clDice` of two soft masks.
pub fn soft_cldice_loss(pred: &SoftMask, gt: &SoftMask, iterations: usize) -> Result<f64> {
    pred.check_same_shape(gt)?;
    let sp = soft_skeleton(pred, iterations);
    let sg = soft_skeleton(gt, iterations);
    let weighted = |a: &SoftMask, b: &SoftMask| -> f64 {
        a.values().iter().zip(b.values()).map(|(x, y)| x * y).sum()
    };
    let mass = |a: &SoftMask| -> f64 { a.values().iter().sum() };
    let tprec = weighted(&sp, gt) / (mass(&sp) + SOFT_EPSILON);
    let tsens = weighted(&sg, pred) / (mass(&sg) + SOFT_EPSILON);
    let score = 2.0 * tprec * tsens / (tprec + tsens + SOFT_EPSILON);
    Ok((1.0 - score).clamp(0.0, 1.0))
}

/// Percentage by which `value` improves on (is lower than) `baseline`.
pub fn relative_improvement(baseline: f64, value: f64) -> Result<f64> {
    if baseline.is_nan() || baseline <= 0.0 {
        return Err(Error::Domain(format!(
            "baseline must be positive, got {baseline}"
        )));
    }
    Ok(100.0 * (baseline - value) / baseline)
}

/// Metrics of one prediction/ground-truth pair.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricRow {
    pub image_id: String,
    pub dice: f64,
    pub iou: f64,
    pub cldice: f64,
    pub beta0: f64,
}

/// Options for [`evaluate_pair`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairOptions {
    pub patch_size: usize,
    pub connectivity: Connectivity,
}

impl Default for PairOptions {
    fn default() -> Self {
        PairOptions {
            patch_size: DEFAULT_PATCH_SIZE,
            connectivity: Connectivity::Eight,
        }
    }
}

/// Dice, IoU, clDice and β₀ of one pair.
pub fn evaluate_pair(
    image_id: &str,
    pred: &BinaryMask,
    gt: &BinaryMask,
    opts: PairOptions,
) -> Result<MetricRow> {
    pred.check_same_shape(gt)?;
    Ok(MetricRow {
        image_id: image_id.to_string(),
        dice: dice(pred, gt)?,
        iou: iou(pred, gt)?,
        cldice: cldice(pred, gt)?,
        beta0: betti0_normalized(pred, gt, opts.patch_size, opts.connectivity)?,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum StdMode {
    #[default]
    Population,
    Sample,
}

impl std::str::FromStr for StdMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "population" => Ok(StdMode::Population),
            "sample" => Ok(StdMode::Sample),
            _ => Err(Error::Domain(format!(
                "std mode must be population or sample, got {s:?}"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate {
    pub n: usize,
    pub std_mode: StdMode,
    pub dice: Summary,
    pub iou: Summary,
    pub cldice: Summary,
    pub beta0: Summary,
}

impl Aggregate {
    /// `(name, summary)` in report column order.
    pub fn named(&self) -> [(&'static str, Summary); 4] {
        [
            ("dice", self.dice),
            ("iou", self.iou),
            ("cldice", self.cldice),
            ("beta0", self.beta0),
        ]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricReport {
    pub per_image: Vec<MetricRow>,
    pub aggregate: Aggregate,
}

impl MetricReport {
    pub fn from_rows(per_image: Vec<MetricRow>, std_mode: StdMode) -> Result<Self> {
        let aggregate = aggregate(&per_image, std_mode)?;
        Ok(MetricReport {
            per_image,
            aggregate,
        })
    }
}

/// Welford running mean and sum of squared deviations.
#[derive(Default)]
struct Running {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Running {
    fn push(&mut self, v: f64) {
        self.n += 1;
        let delta = v - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (v - self.mean);
    }

    fn finish(&self, mode: StdMode) -> Summary {
        let dof = match mode {
            StdMode::Population => self.n,
            StdMode::Sample => self.n.saturating_sub(1),
        };
        let std = if dof == 0 {
            0.0
        } else {
            (self.m2.max(0.0) / dof as f64).sqrt()
        };
        Summary {
            mean: self.mean,
            std,
        }
    }
}

/// Mean and standard deviation of every metric column.
pub fn aggregate(rows: &[MetricRow], std_mode: StdMode) -> Result<Aggregate> {
    if rows.is_empty() {
        return Err(Error::EmptyInput("no metric rows to aggregate".into()));
    }
    let mut acc: [Running; 4] = Default::default();
    for r in rows {
        for (a, v) in acc.iter_mut().zip([r.dice, r.iou, r.cldice, r.beta0]) {
            a.push(v);
        }
    }
    Ok(Aggregate {
        n: rows.len(),
        std_mode,
        dice: acc[0].finish(std_mode),
        iou: acc[1].finish(std_mode),
        cldice: acc[2].finish(std_mode),
        beta0: acc[3].finish(std_mode),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::{stamp_bridge, Point};

    fn mask_with(w: usize, h: usize, on: &[(usize, usize)]) -> BinaryMask {
        let mut m = BinaryMask::new(w, h);
        for &(x, y) in on {
            m.set(x, y, true);
        }
        m
    }

    #[test]
    fn dice_and_iou_hand_cases() {
        let x = mask_with(4, 2, &[(0, 0), (1, 0), (2, 0)]);
        let y = mask_with(4, 2, &[(1, 0), (2, 0), (0, 1), (1, 1), (2, 1)]);
        assert_eq!(dice(&x, &y).unwrap(), 0.5);
        assert_eq!(iou(&x, &y).unwrap(), 1.0 / 3.0);
        assert_eq!(dice(&x, &x).unwrap(), 1.0);
        assert_eq!(iou(&y, &y).unwrap(), 1.0);
        let z = mask_with(4, 2, &[(3, 1)]);
        assert_eq!(dice(&x, &z).unwrap(), 0.0);
        let empty = BinaryMask::new(4, 2);
        assert_eq!(dice(&empty, &empty).unwrap(), 1.0);
        assert_eq!(iou(&empty, &empty).unwrap(), 1.0);
    }

    #[test]
    fn shape_mismatch() {
        let a = BinaryMask::new(3, 3);
        let b = BinaryMask::new(3, 4);
        assert!(matches!(dice(&a, &b), Err(Error::Shape(_))));
        assert!(matches!(iou(&a, &b), Err(Error::Shape(_))));
        assert!(matches!(cldice(&a, &b), Err(Error::Shape(_))));
        assert!(matches!(
            betti0_normalized(&a, &b, 64, Connectivity::Eight),
            Err(Error::Shape(_))
        ));
        let sa = SoftMask::zeros(2, 2);
        let sb = SoftMask::zeros(2, 3);
        assert!(matches!(mse(&sa, &sb), Err(Error::Shape(_))));
        assert!(matches!(
            soft_cldice_loss(&sa, &sb, 3),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn cldice_line_versus_branched_line() {
        // pred: 10-px line. gt: same line plus a 5-px branch above its
        // sixth pixel. Both are already thin, so S_p = pred and S_g = gt:
        // Tprec = 10/10, Tsens = 10/15, clDice = 2·(2/3)/(5/3) = 4/5.
        let mut pred = BinaryMask::new(14, 8);
        stamp_bridge(&mut pred, Point::new(2, 6), Point::new(11, 6), 0).unwrap();
        let mut gt = pred.clone();
        stamp_bridge(&mut gt, Point::new(7, 1), Point::new(7, 5), 0).unwrap();
        assert_eq!(skeletonize(&pred), pred);
        assert_eq!(skeletonize(&gt), gt);
        assert_eq!(cldice(&pred, &gt).unwrap(), 0.8);
        assert_eq!(cldice(&gt, &pred).unwrap(), 0.8);
    }

    #[test]
    fn cldice_empty_conventions() {
        let empty = BinaryMask::new(8, 8);
        let mut line = BinaryMask::new(8, 8);
        stamp_bridge(&mut line, Point::new(1, 4), Point::new(6, 4), 0).unwrap();
        assert_eq!(cldice(&empty, &line).unwrap(), 0.0);
        assert_eq!(cldice(&line, &empty).unwrap(), 0.0);
        assert_eq!(cldice(&empty, &empty).unwrap(), 1.0);
        assert_eq!(cldice(&line, &line).unwrap(), 1.0);
    }

    #[test]
    fn betti0_hand_cases() {
        let one = mask_with(64, 64, &[(10, 10)]);
        let three = mask_with(64, 64, &[(10, 10), (20, 20), (30, 30)]);
        assert_eq!(
            betti0_normalized(&one, &three, 64, Connectivity::Eight).unwrap(),
            2.0
        );
        assert_eq!(
            betti0_normalized(&three, &three, 64, Connectivity::Eight).unwrap(),
            0.0
        );

        let left_extra = mask_with(128, 64, &[(5, 5), (70, 5)]);
        let base = mask_with(128, 64, &[(70, 5)]);
        assert_eq!(
            betti0_normalized(&left_extra, &base, 64, Connectivity::Eight).unwrap(),
            0.5
        );
    }

    #[test]
    fn betti0_whole_image_patch() {
        let a = mask_with(100, 70, &[(1, 1), (50, 50), (99, 0)]);
        let b = mask_with(100, 70, &[(1, 1)]);
        assert_eq!(
            betti0_normalized(&a, &b, 128, Connectivity::Eight).unwrap(),
            2.0
        );
        assert!(matches!(
            betti0_normalized(&a, &b, 0, Connectivity::Eight),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn betti0_counts_per_patch_connectivity() {
        // A diagonal pair is one component at 8-connectivity and two at 4.
        let a = mask_with(4, 4, &[(0, 0), (1, 1)]);
        let b = mask_with(4, 4, &[(0, 0)]);
        assert_eq!(
            betti0_normalized(&a, &b, 64, Connectivity::Eight).unwrap(),
            0.0
        );
        assert_eq!(
            betti0_normalized(&a, &b, 64, Connectivity::Four).unwrap(),
            1.0
        );
    }

    #[test]
    fn mse_cases() {
        let ones = SoftMask::from_values(2, 2, vec![1.0; 4]).unwrap();
        let zeros = SoftMask::zeros(2, 2);
        assert_eq!(mse(&ones, &zeros).unwrap(), 1.0);
        assert_eq!(mse(&ones, &ones).unwrap(), 0.0);
        let half = SoftMask::from_values(2, 2, vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        assert_eq!(mse(&half, &zeros).unwrap(), 0.125);
    }

    #[test]
    fn soft_skeleton_cases() {
        let zeros = SoftMask::zeros(9, 9);
        assert_eq!(soft_skeleton(&zeros, 10), zeros);

        let mut line = BinaryMask::new(12, 7);
        stamp_bridge(&mut line, Point::new(1, 3), Point::new(10, 3), 0).unwrap();
        let soft = SoftMask::from(&line);
        for iters in [1, 2, 10] {
            assert_eq!(soft_skeleton(&soft, iters), soft);
        }
        assert_eq!(soft_skeleton(&soft, 0), SoftMask::zeros(12, 7));
    }

    #[test]
    fn soft_skeleton_stays_in_unit_range() {
        let mut state = 11u64;
        let values: Vec<f64> = (0..30 * 20)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                (state >> 11) as f64 / (1u64 << 53) as f64
            })
            .collect();
        let m = SoftMask::from_values(30, 20, values).unwrap();
        let s = soft_skeleton(&m, 10);
        assert!(s.values().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn soft_cldice_self_and_disjoint() {
        let mut a = BinaryMask::new(20, 20);
        stamp_bridge(&mut a, Point::new(2, 2), Point::new(17, 15), 1).unwrap();
        let mut b = BinaryMask::new(20, 20);
        stamp_bridge(&mut b, Point::new(2, 18), Point::new(6, 17), 0).unwrap();
        let (sa, sb) = (SoftMask::from(&a), SoftMask::from(&b));
        assert!(soft_cldice_loss(&sa, &sa, 10).unwrap() <= 1e-6);
        assert!(soft_cldice_loss(&sa, &sb, 10).unwrap() >= 1.0 - 1e-6);
    }

    #[test]
    fn soft_cldice_frozen_fixture() {
        // Frozen from an independent straight-line evaluation of the same
        // recipe (nested loops, truncated 3x3 windows).
        let pred: Vec<f64> = (0usize..16 * 16)
            .map(|i| match (i % 16).abs_diff(i / 16) {
                0 => 1.0,
                1 => 0.6,
                2 => 0.2,
                _ => 0.0,
            })
            .collect();
        let gt: Vec<f64> = (0usize..16 * 16)
            .map(|i| {
                let (x, y) = (i % 16, i / 16);
                (x == 7 || x == 8 || y == 4) as u8 as f64
            })
            .collect();
        let pred = SoftMask::from_values(16, 16, pred).unwrap();
        let gt = SoftMask::from_values(16, 16, gt).unwrap();
        let loss = soft_cldice_loss(&pred, &gt, 10).unwrap();
        assert!((loss - 0.809742520810576).abs() < 1e-12, "{loss}");
    }

    #[test]
    fn improvement_arithmetic() {
        let v = relative_improvement(0.52, 0.34).unwrap();
        assert!((v - 34.6).abs() <= 0.05);
        assert_eq!(relative_improvement(0.7, 0.7).unwrap(), 0.0);
        let ablation = relative_improvement(0.48, 0.34).unwrap();
        assert!((ablation - 29.2).abs() < 0.05);
        assert!(matches!(
            relative_improvement(0.0, 0.1),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            relative_improvement(-1.0, 0.1),
            Err(Error::Domain(_))
        ));
    }

    fn row(v: f64) -> MetricRow {
        MetricRow {
            image_id: format!("{v}"),
            dice: v,
            iou: v,
            cldice: v,
            beta0: v,
        }
    }

    #[test]
    fn aggregate_cases() {
        let single = aggregate(&[row(0.3)], StdMode::Population).unwrap();
        assert_eq!(
            single.dice,
            Summary {
                mean: 0.3,
                std: 0.0
            }
        );
        let pair = aggregate(&[row(0.0), row(1.0)], StdMode::Population).unwrap();
        assert_eq!(
            pair.beta0,
            Summary {
                mean: 0.5,
                std: 0.5
            }
        );
        let sample = aggregate(&[row(0.0), row(1.0)], StdMode::Sample).unwrap();
        assert!((sample.iou.std - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(matches!(
            aggregate(&[], StdMode::Population),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn aggregate_matches_two_pass() {
        let mut state = 5u64;
        let rows: Vec<MetricRow> = (0..100)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                row((state >> 11) as f64 / (1u64 << 53) as f64)
            })
            .collect();
        let values: Vec<f64> = rows.iter().map(|r| r.dice).collect();
        let mean = values.iter().sum::<f64>() / 100.0;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 100.0;
        let agg = aggregate(&rows, StdMode::Population).unwrap();
        assert!((agg.dice.mean - mean).abs() < 1e-12);
        assert!((agg.dice.std - var.sqrt()).abs() < 1e-12);
    }
}
