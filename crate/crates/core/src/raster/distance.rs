//! Exact Euclidean distance transform by two separable passes: a vertical
//! scan per column followed by the lower envelope of parabolas per row.
//! Everything outside the image counts as background.

use crate::raster::BinaryMask;

/// Distance of every pixel to the nearest background pixel. Squared values
/// are integers and kept exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceMap {
    width: usize,
    height: usize,
    squared: Vec<u64>,
}

impl DistanceMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        (self.squared(x, y) as f64).sqrt()
    }

    pub fn squared(&self, x: usize, y: usize) -> u64 {
        self.squared[y * self.width + x]
    }

    pub fn squared_values(&self) -> &[u64] {
        &self.squared
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.squared.iter().map(|&d| (d as f64).sqrt()).collect()
    }
}

pub fn distance_transform(mask: &BinaryMask) -> DistanceMap {
    let (w, h) = mask.dims();
    let px = mask.pixels();

    // Vertical pass: distance to the nearest background pixel in the same
    // column, with virtual background rows at y = -1 and y = h.
    let mut column = vec![0u64; w * h];
    for x in 0..w {
        let mut run = 0u64;
        for y in 0..h {
            run = if px[y * w + x] == 0 { 0 } else { run + 1 };
            column[y * w + x] = run;
        }
        let mut run = 0u64;
        for y in (0..h).rev() {
            run = if px[y * w + x] == 0 { 0 } else { run + 1 };
            let d = column[y * w + x].min(run);
            column[y * w + x] = d * d;
        }
    }

    // Horizontal pass over each row, padded with zero-cost sites at x = -1
    // and x = w.
    let n = w + 2;
    let mut f = vec![0u64; n];
    let mut out = vec![0u64; n];
    let mut sites = vec![0usize; n];
    let mut bounds = vec![0f64; n + 1];
    let mut squared = vec![0u64; w * h];
    for y in 0..h {
        f[0] = 0;
        f[n - 1] = 0;
        f[1..=w].copy_from_slice(&column[y * w..(y + 1) * w]);
        lower_envelope(&f, &mut out, &mut sites, &mut bounds);
        squared[y * w..(y + 1) * w].copy_from_slice(&out[1..=w]);
    }

    DistanceMap {
        width: w,
        height: h,
        squared,
    }
}

/// 1-D squared distance transform of sampled function `f`:
/// `out[q] = min_p (q - p)^2 + f[p]`.
fn lower_envelope(f: &[u64], out: &mut [u64], sites: &mut [usize], bounds: &mut [f64]) {
    let n = f.len();
    let intersect = |p: usize, q: usize| -> f64 {
        let (pf, qf) = (p as f64, q as f64);
        ((f[q] as f64 + qf * qf) - (f[p] as f64 + pf * pf)) / (2.0 * (qf - pf))
    };

    let mut k = 0usize;
    sites[0] = 0;
    bounds[0] = f64::NEG_INFINITY;
    bounds[1] = f64::INFINITY;
    for q in 1..n {
        let mut s = intersect(sites[k], q);
        while s <= bounds[k] {
            k -= 1;
            s = intersect(sites[k], q);
        }
        k += 1;
        sites[k] = q;
        bounds[k] = s;
        bounds[k + 1] = f64::INFINITY;
    }

    k = 0;
    for (q, slot) in out.iter_mut().enumerate().take(n) {
        while bounds[k + 1] < q as f64 {
            k += 1;
        }
        let p = sites[k];
        let d = q.abs_diff(p) as u64;
        *slot = d * d + f[p];
    }
}
