//! Fixed-size point helpers. Points are always `[f64; 3]`; in two dimensions
//! the third coordinate is zero.

pub type Point = [f64; 3];

#[inline]
pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: Point, s: f64) -> Point {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: Point) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

#[inline]
pub fn cross(a: Point, b: Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn normalize(a: Point) -> Point {
    let n = norm(a);
    if n > 0.0 {
        scale(a, 1.0 / n)
    } else {
        a
    }
}

/// Build a point from a slice of length 2 or 3.
pub fn from_slice(v: &[f64]) -> Point {
    let mut p = [0.0; 3];
    for (d, x) in v.iter().take(3).enumerate() {
        p[d] = *x;
    }
    p
}

/// Volume of the unit ball in R^N.
pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => std::f64::consts::PI,
        3 => 4.0 / 3.0 * std::f64::consts::PI,
        n => {
            // |B_n| = 2 pi / n * |B_{n-2}|
            2.0 * std::f64::consts::PI / n as f64 * unit_ball_volume(n - 2)
        }
    }
}

/// Sum with a fixed chunking so the result does not depend on thread count.
pub fn det_sum(values: &[f64]) -> f64 {
    use rayon::prelude::*;
    const CHUNK: usize = 4096;
    let partials: Vec<f64> = values
        .par_chunks(CHUNK)
        .map(|c| c.iter().sum::<f64>())
        .collect();
    partials.iter().sum()
}

/// Deterministic dot product.
pub fn det_dot(a: &[f64], b: &[f64]) -> f64 {
    use rayon::prelude::*;
    const CHUNK: usize = 4096;
    let partials: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
        .collect();
    partials.iter().sum()
}
