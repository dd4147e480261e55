//! Nodal-line tracing by marching squares.

use std::collections::HashMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::bloch::{closed_grid, gap, off_diagonal, refine_zero, Momentum};
use crate::lattice::HoppingSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodalSet {
    pub polylines: Vec<Vec<Momentum>>,
    /// Traced on the real factor `B(k)` rather than on the gap.
    pub signed: bool,
}

impl NodalSet {
    pub fn is_empty(&self) -> bool {
        self.polylines.is_empty()
    }

    pub fn vertex_count(&self) -> usize {
        self.polylines.iter().map(Vec::len).sum()
    }

    pub fn vertices(&self) -> impl Iterator<Item = &Momentum> {
        self.polylines.iter().flatten()
    }

    pub fn max_gap(&self, h: &HoppingSet) -> f64 {
        self.vertices().map(|&k| gap(h, k)).fold(0.0, f64::max)
    }
}

/// True when `n(k) e^{i(kx-ky)/2}` is real for every `k`.
pub fn has_signed_bracket(h: &HoppingSet) -> bool {
    (h.jxp - h.jy).abs() + (h.jyp - h.jx).abs() <= 1e-12 * h.max_abs().max(1e-300)
}

/// Real factor whose sign changes mark the nodal lines; `n = e^{-i(kx-ky)/2} 2 B`.
pub fn signed_bracket(h: &HoppingSet, k: Momentum) -> f64 {
    let s = off_diagonal(h, k) * C64::from_polar(1.0, 0.5 * (k.kx - k.ky));
    0.5 * s.re
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Edge {
    // from (ix, iy) to (ix + 1, iy)
    H(usize, usize),
    // from (ix, iy) to (ix, iy + 1)
    V(usize, usize),
}

struct Contour {
    segments: Vec<(Edge, Edge)>,
}

fn march(values: &[f64], n: usize) -> Contour {
    let at = |ix: usize, iy: usize| values[iy * n + ix];
    let positive = |v: f64| v >= 0.0;
    let mut segments = Vec::new();
    for iy in 0..n - 1 {
        for ix in 0..n - 1 {
            let v = [at(ix, iy), at(ix + 1, iy), at(ix + 1, iy + 1), at(ix, iy + 1)];
            let s = v.map(positive);
            let bottom = Edge::H(ix, iy);
            let right = Edge::V(ix + 1, iy);
            let top = Edge::H(ix, iy + 1);
            let left = Edge::V(ix, iy);
            let mut crossing = Vec::with_capacity(4);
            if s[0] != s[1] {
                crossing.push(bottom);
            }
            if s[1] != s[2] {
                crossing.push(right);
            }
            if s[3] != s[2] {
                crossing.push(top);
            }
            if s[0] != s[3] {
                crossing.push(left);
            }
            match crossing.len() {
                2 => segments.push((crossing[0], crossing[1])),
                4 => {
                    let center = 0.25 * v.iter().sum::<f64>();
                    if positive(center) == s[0] {
                        segments.push((bottom, right));
                        segments.push((top, left));
                    } else {
                        segments.push((bottom, left));
                        segments.push((right, top));
                    }
                }
                _ => {}
            }
        }
    }
    Contour { segments }
}

/// Chains segments sharing an edge into ordered edge paths.
fn chain(contour: &Contour) -> Vec<Vec<Edge>> {
    let mut touching: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (i, &(a, b)) in contour.segments.iter().enumerate() {
        touching.entry(a).or_default().push(i);
        touching.entry(b).or_default().push(i);
    }
    let mut used = vec![false; contour.segments.len()];
    let mut paths = Vec::new();
    let next_unused = |edge: Edge, used: &[bool]| {
        touching[&edge].iter().copied().find(|&s| !used[s])
    };
    // open chains first (start at an edge touched once), then loops
    let mut starts: Vec<usize> = (0..contour.segments.len())
        .filter(|&i| {
            let (a, b) = contour.segments[i];
            touching[&a].len() == 1 || touching[&b].len() == 1
        })
        .collect();
    starts.extend(0..contour.segments.len());
    for start in starts {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (a, b) = contour.segments[start];
        let (first, mut tip) = if touching[&a].len() == 1 { (a, b) } else { (b, a) };
        let mut path = vec![first, tip];
        while let Some(s) = next_unused(tip, &used) {
            used[s] = true;
            let (p, q) = contour.segments[s];
            tip = if p == tip { q } else { p };
            path.push(tip);
        }
        paths.push(path);
    }
    paths
}

fn edge_ends(edge: Edge, grid: &[f64]) -> (Momentum, Momentum) {
    match edge {
        Edge::H(ix, iy) => (
            Momentum::raw(grid[ix], grid[iy]),
            Momentum::raw(grid[ix + 1], grid[iy]),
        ),
        Edge::V(ix, iy) => (
            Momentum::raw(grid[ix], grid[iy]),
            Momentum::raw(grid[ix], grid[iy + 1]),
        ),
    }
}

fn lerp(a: Momentum, b: Momentum, t: f64) -> Momentum {
    Momentum::raw(a.kx + t * (b.kx - a.kx), a.ky + t * (b.ky - a.ky))
}

fn bisect_edge(f: &dyn Fn(Momentum) -> f64, a: Momentum, b: Momentum) -> Momentum {
    let (mut lo, mut hi) = (0.0, 1.0);
    let flo = f(a);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if (f(lerp(a, b, mid)) >= 0.0) == (flo >= 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lerp(a, b, 0.5 * (lo + hi))
}

/// Traces the zero set of the gap on a closed `grid x grid` zone grid.
pub fn trace_nodal_lines(h: &HoppingSet, grid: usize, tol: f64) -> NodalSet {
    let grid = grid.max(3);
    let ks = closed_grid(grid);
    let signed = has_signed_bracket(h);
    let field: Box<dyn Fn(Momentum) -> f64> = if signed {
        Box::new(|k| signed_bracket(h, k))
    } else {
        Box::new(|k| gap(h, k) - tol)
    };
    let values: Vec<f64> = (0..grid * grid)
        .map(|i| field(Momentum::raw(ks[i % grid], ks[i / grid])))
        .collect();
    let contour = march(&values, grid);
    let mut polylines = Vec::new();
    for path in chain(&contour) {
        let mut line: Vec<Momentum> = Vec::with_capacity(path.len());
        for edge in path {
            let (a, b) = edge_ends(edge, &ks);
            let k = if signed {
                bisect_edge(field.as_ref(), a, b)
            } else {
                let (fa, fb) = (field(a), field(b));
                refine_zero(h, lerp(a, b, fa / (fa - fb))).0
            };
            if gap(h, k) < tol
                && line.last().map_or(true, |p: &Momentum| p.distance(&k) > 1e-9)
            {
                line.push(k);
            }
        }
        if !line.is_empty() {
            polylines.push(line);
        }
    }
    NodalSet { polylines, signed }
}
