//! Synthetic vessel masks: a fixed corpus of small base shapes and a
//! seeded branching tree generator for full-resolution fundus-sized images.

use std::f64::consts::PI;

use crate::fragment::SeededRng;
use crate::raster::{stamp_bridge, BinaryMask, Point};

pub const BASE_SIZE: usize = 128;

fn clamp_point(x: f64, y: f64, w: usize, h: usize) -> Point {
    Point::new(
        x.round().clamp(0.0, (w - 1) as f64) as usize,
        y.round().clamp(0.0, (h - 1) as f64) as usize,
    )
}

fn polyline(mask: &mut BinaryMask, points: &[(f64, f64)], radius: u32) {
    let (w, h) = mask.dims();
    for pair in points.windows(2) {
        let p = clamp_point(pair[0].0, pair[0].1, w, h);
        let q = clamp_point(pair[1].0, pair[1].1, w, h);
        stamp_bridge(mask, p, q, radius).expect("clamped points are in bounds");
    }
}

fn sampled(n: usize, f: impl Fn(f64) -> (f64, f64)) -> Vec<(f64, f64)> {
    (0..=n).map(|i| f(i as f64 / n as f64)).collect()
}

/// Ten named 128x128 vessel-like masks: straight, oblique and curved
/// segments, bifurcations, a loop and a pair of separate vessels.
pub fn base_shapes() -> Vec<(&'static str, BinaryMask)> {
    let s = BASE_SIZE as f64 - 1.0;
    let blank = || BinaryMask::new(BASE_SIZE, BASE_SIZE);
    let mut shapes = Vec::new();

    let mut m = blank();
    polyline(&mut m, &[(0.0, 64.0), (s, 64.0)], 1);
    shapes.push(("straight", m));

    let mut m = blank();
    polyline(&mut m, &[(0.0, 10.0), (s, 117.0)], 1);
    shapes.push(("oblique", m));

    let mut m = blank();
    let arc = sampled(24, |t| {
        let a = t * PI / 2.0;
        (110.0 * a.sin(), s - 110.0 * a.cos())
    });
    polyline(&mut m, &arc, 1);
    shapes.push(("arc", m));

    let mut m = blank();
    polyline(&mut m, &[(0.0, 64.0), (60.0, 64.0)], 2);
    polyline(&mut m, &[(60.0, 64.0), (s, 20.0)], 1);
    polyline(&mut m, &[(60.0, 64.0), (s, 108.0)], 1);
    shapes.push(("bifurcation", m));

    let mut m = blank();
    polyline(&mut m, &[(40.0, 0.0), (40.0, s)], 1);
    polyline(&mut m, &[(40.0, 70.0), (s, 70.0)], 1);
    shapes.push(("t-junction", m));

    let mut m = blank();
    let wave = sampled(32, |t| (t * s, 64.0 + 30.0 * (2.0 * PI * t).sin()));
    polyline(&mut m, &wave, 1);
    shapes.push(("sine", m));

    let mut m = blank();
    polyline(&mut m, &[(64.0, s), (64.0, 84.0)], 2);
    polyline(&mut m, &[(64.0, 84.0), (30.0, 44.0), (12.0, 0.0)], 1);
    polyline(&mut m, &[(30.0, 44.0), (52.0, 0.0)], 1);
    polyline(&mut m, &[(64.0, 84.0), (100.0, 44.0), (s, 14.0)], 1);
    shapes.push(("tree", m));

    let mut m = blank();
    let ring = sampled(48, |t| {
        let a = 2.0 * PI * t;
        (64.0 + 40.0 * a.cos(), 64.0 + 40.0 * a.sin())
    });
    polyline(&mut m, &ring, 1);
    polyline(&mut m, &[(104.0, 64.0), (s, 64.0)], 1);
    shapes.push(("loop", m));

    let mut m = blank();
    polyline(&mut m, &[(0.0, 28.0), (s, 40.0)], 1);
    polyline(&mut m, &[(0.0, 92.0), (s, 102.0)], 2);
    shapes.push(("twin", m));

    let mut m = blank();
    polyline(
        &mut m,
        &[(0.0, 20.0), (40.0, 100.0), (80.0, 24.0), (s, 104.0)],
        1,
    );
    shapes.push(("zigzag", m));

    shapes
}

/// Two parallel one-pixel vessels whose tips point the same way; a correct
/// repair must leave this unchanged.
pub fn parallel_vessels() -> BinaryMask {
    let mut m = BinaryMask::new(64, 40);
    stamp_bridge(&mut m, Point::new(10, 15), Point::new(50, 15), 0).unwrap();
    stamp_bridge(&mut m, Point::new(10, 22), Point::new(50, 22), 0).unwrap();
    m
}

/// Branching vessel tree grown from a few roots, with calibers from
/// `max_radius` down to three-pixel-wide capillaries.
pub fn vessel_tree(width: usize, height: usize, seed: u64) -> BinaryMask {
    let mut mask = BinaryMask::new(width, height);
    let mut rng = SeededRng::new(seed);
    let scale = width.min(height) as f64;
    let max_radius = ((scale / 500.0).round() as u32).clamp(2, 8);

    struct Branch {
        x: f64,
        y: f64,
        angle: f64,
        radius: u32,
        depth: u32,
    }
    let (cx, cy) = (width as f64 * 0.35, height as f64 * 0.5);
    let mut stack: Vec<Branch> = (0..4)
        .map(|i| Branch {
            x: cx,
            y: cy,
            angle: i as f64 * PI / 2.0 + PI / 4.0,
            radius: max_radius,
            depth: 0,
        })
        .collect();

    while let Some(b) = stack.pop() {
        let length = scale * (0.18 / (1.0 + b.depth as f64 * 0.45)) * (0.7 + 0.6 * rng.unit());
        let wiggles = 6;
        let mut points = vec![(b.x, b.y)];
        let (mut x, mut y, mut angle) = (b.x, b.y, b.angle);
        for _ in 0..wiggles {
            angle += (rng.unit() - 0.5) * 0.5;
            x += angle.cos() * length / wiggles as f64;
            y += angle.sin() * length / wiggles as f64;
            points.push((x, y));
        }
        polyline(&mut mask, &points, b.radius);
        let inside = x >= 0.0 && y >= 0.0 && x < width as f64 && y < height as f64;
        if b.depth < 7 && inside {
            let child_radius = if b.radius > 1 && rng.below(3) != 0 {
                b.radius - 1
            } else {
                b.radius
            };
            for side in [-1.0, 1.0] {
                stack.push(Branch {
                    x,
                    y,
                    angle: angle + side * (0.35 + 0.5 * rng.unit()),
                    radius: child_radius,
                    depth: b.depth + 1,
                });
            }
        }
    }
    mask
}
