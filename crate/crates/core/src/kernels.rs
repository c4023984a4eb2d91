//! Reference math for the bottleneck adapters inserted into a frozen
//! transformer encoder:
//!
//! ```text
//! feature(x) = G(x · W1) · W2
//! spatial(x) = x + feature(x)
//! ```
//!
//! with `W1: d × d/4`, `W2: d/4 × d`, no biases, and `G` the exact-erf GELU.
//! Vectors are rows, so `x · W1` contracts over the `d` input features.
//! Analytic gradients of the probe `sum(output)` are checked against
//! central finite differences.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x * FRAC_1_SQRT_2))
}

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// `x·Φ(x)`.
pub fn gelu(x: f64) -> f64 {
    x * normal_cdf(x)
}

/// `d/dx gelu(x) = Φ(x) + x·φ(x)`.
pub fn gelu_derivative(x: f64) -> f64 {
    normal_cdf(x) + x * normal_pdf(x)
}

/// Down- and up-projection of one adapter, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct AdapterWeights {
    d: usize,
    w1: Vec<f64>,
    w2: Vec<f64>,
}

impl AdapterWeights {
    pub fn new(d: usize, w1: Vec<f64>, w2: Vec<f64>) -> Result<Self> {
        if d == 0 || !d.is_multiple_of(4) {
            return Err(Error::Shape(format!(
                "feature dimension must be a positive multiple of 4, got {d}"
            )));
        }
        let r = d / 4;
        if w1.len() != d * r || w2.len() != r * d {
            return Err(Error::Shape(format!(
                "expected W1 {d}x{r} and W2 {r}x{d}, got {} and {} entries",
                w1.len(),
                w2.len()
            )));
        }
        Ok(AdapterWeights { d, w1, w2 })
    }

    pub fn zeros(d: usize) -> Result<Self> {
        let r = d / 4;
        AdapterWeights::new(d, vec![0.0; d * r], vec![0.0; r * d])
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn bottleneck(&self) -> usize {
        self.d / 4
    }

    pub fn w1(&self) -> &[f64] {
        &self.w1
    }

    pub fn w2(&self) -> &[f64] {
        &self.w2
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d {
            return Err(Error::Shape(format!(
                "adapter input has length {}, expected {}",
                x.len(),
                self.d
            )));
        }
        Ok(())
    }

    /// Pre-activations `x · W1`.
    fn project_down(&self, x: &[f64]) -> Vec<f64> {
        let r = self.bottleneck();
        let mut hidden = vec![0.0; r];
        for (i, &xi) in x.iter().enumerate() {
            for (j, h) in hidden.iter_mut().enumerate() {
                *h += xi * self.w1[i * r + j];
            }
        }
        hidden
    }

    fn project_up(&self, activations: &[f64]) -> Vec<f64> {
        let d = self.d;
        let mut out = vec![0.0; d];
        for (j, &a) in activations.iter().enumerate() {
            for (k, o) in out.iter_mut().enumerate() {
                *o += a * self.w2[j * d + k];
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdapterKind {
    /// Residual form, `x + feature(x)`.
    Spatial,
    Feature,
}

pub fn feature_adapter(x: &[f64], w: &AdapterWeights) -> Result<Vec<f64>> {
    w.check_input(x)?;
    let activations: Vec<f64> = w.project_down(x).into_iter().map(gelu).collect();
    Ok(w.project_up(&activations))
}

pub fn spatial_adapter(x: &[f64], w: &AdapterWeights) -> Result<Vec<f64>> {
    let mut out = feature_adapter(x, w)?;
    for (o, xi) in out.iter_mut().zip(x) {
        *o += xi;
    }
    Ok(out)
}

pub fn apply_adapter(kind: AdapterKind, x: &[f64], w: &AdapterWeights) -> Result<Vec<f64>> {
    match kind {
        AdapterKind::Spatial => spatial_adapter(x, w),
        AdapterKind::Feature => feature_adapter(x, w),
    }
}

/// Gradients of `sum(adapter(x))`, laid out like the corresponding inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct AdapterGradients {
    pub x: Vec<f64>,
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
}

pub fn adapter_gradients(
    kind: AdapterKind,
    x: &[f64],
    w: &AdapterWeights,
) -> Result<AdapterGradients> {
    w.check_input(x)?;
    let (d, r) = (w.d, w.bottleneck());
    let hidden = w.project_down(x);

    // d(sum out)/d(activation_j) is the row sum of W2.
    let row_sums: Vec<f64> = w.w2.chunks_exact(d).map(|row| row.iter().sum()).collect();
    let grad_hidden: Vec<f64> = hidden
        .iter()
        .zip(&row_sums)
        .map(|(&h, &s)| s * gelu_derivative(h))
        .collect();

    let mut gw2 = vec![0.0; r * d];
    for (j, &h) in hidden.iter().enumerate() {
        gw2[j * d..(j + 1) * d].fill(gelu(h));
    }
    let mut gw1 = vec![0.0; d * r];
    let mut gx = vec![0.0; d];
    for i in 0..d {
        for j in 0..r {
            gw1[i * r + j] = x[i] * grad_hidden[j];
            gx[i] += w.w1[i * r + j] * grad_hidden[j];
        }
    }
    if kind == AdapterKind::Spatial {
        for g in &mut gx {
            *g += 1.0;
        }
    }
    Ok(AdapterGradients {
        x: gx,
        w1: gw1,
        w2: gw2,
    })
}

/// Denominator floor of the relative error, so entries whose gradient is
/// (near) zero are compared absolutely.
pub const GRAD_CHECK_FLOOR: f64 = 1e-3;

fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(GRAD_CHECK_FLOOR)
}

/// Central-difference gradients of `sum(adapter(x))` with step `h`.
#[allow(clippy::needless_range_loop)]
pub fn numeric_gradients(
    kind: AdapterKind,
    x: &[f64],
    w: &AdapterWeights,
    h: f64,
) -> Result<AdapterGradients> {
    w.check_input(x)?;
    let probe = |x: &[f64], w: &AdapterWeights| -> f64 {
        apply_adapter(kind, x, w)
            .expect("shapes already checked")
            .iter()
            .sum()
    };
    let central = |plus: f64, minus: f64| (plus - minus) / (2.0 * h);

    let mut gx = vec![0.0; x.len()];
    let mut xs = x.to_vec();
    for i in 0..x.len() {
        xs[i] = x[i] + h;
        let plus = probe(&xs, w);
        xs[i] = x[i] - h;
        let minus = probe(&xs, w);
        xs[i] = x[i];
        gx[i] = central(plus, minus);
    }

    let mut ws = w.clone();
    let mut gw1 = vec![0.0; w.w1.len()];
    for k in 0..w.w1.len() {
        ws.w1[k] = w.w1[k] + h;
        let plus = probe(x, &ws);
        ws.w1[k] = w.w1[k] - h;
        let minus = probe(x, &ws);
        ws.w1[k] = w.w1[k];
        gw1[k] = central(plus, minus);
    }
    let mut gw2 = vec![0.0; w.w2.len()];
    for k in 0..w.w2.len() {
        ws.w2[k] = w.w2[k] + h;
        let plus = probe(x, &ws);
        ws.w2[k] = w.w2[k] - h;
        let minus = probe(x, &ws);
        ws.w2[k] = w.w2[k];
        gw2[k] = central(plus, minus);
    }
    Ok(AdapterGradients {
        x: gx,
        w1: gw1,
        w2: gw2,
    })
}

/// Largest relative error between analytic and central-difference
/// gradients of both adapter forms, over `x`, `W1` and `W2`.
pub fn adapter_grad_check(w: &AdapterWeights, x: &[f64], h: f64) -> Result<f64> {
    let mut worst = 0.0f64;
    for kind in [AdapterKind::Spatial, AdapterKind::Feature] {
        let a = adapter_gradients(kind, x, w)?;
        let n = numeric_gradients(kind, x, w, h)?;
        let pairs =
            a.x.iter()
                .zip(&n.x)
                .chain(a.w1.iter().zip(&n.w1))
                .chain(a.w2.iter().zip(&n.w2));
        for (&ga, &gn) in pairs {
            worst = worst.max(relative_error(ga, gn));
        }
    }
    Ok(worst)
}
