//! Marching-squares extraction of the level set `max Re λ = 0`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use super::{Param, StabilityChart};

const BISECTION_STEPS: usize = 200;

/// A traced piece of the stability boundary. Walking from the first to the
/// last point, the unstable side is on the left (with `x` to the right and
/// `y` up).
#[derive(Clone, Debug, PartialEq)]
pub struct Polyline {
    /// `(x, y)` in chart parameters.
    pub points: Vec<[f64; 2]>,
    /// `max Re λ` re-evaluated at each point.
    pub residuals: Vec<f64>,
    /// Closed loops do not repeat their first point.
    pub closed: bool,
    /// Whether the first and last points lie on the chart frame.
    pub ends_on_frame: [bool; 2],
    /// Set when an unrefinable edge cut the polyline.
    pub split_at_flagged_edge: bool,
}

impl Polyline {
    /// An open polyline whose ends do not both reach the frame.
    pub fn is_dangling(&self) -> bool {
        !self.closed && !(self.ends_on_frame[0] && self.ends_on_frame[1])
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Edge {
    /// `(ix, iy)`–`(ix+1, iy)`.
    H(usize, usize),
    /// `(ix, iy)`–`(ix, iy+1)`.
    V(usize, usize),
}

impl Edge {
    fn ends(self) -> [(usize, usize); 2] {
        match self {
            Edge::H(ix, iy) => [(ix, iy), (ix + 1, iy)],
            Edge::V(ix, iy) => [(ix, iy), (ix, iy + 1)],
        }
    }

    fn on_frame(self, nx: usize, ny: usize) -> bool {
        match self {
            Edge::H(_, iy) => iy == 0 || iy + 1 == ny,
            Edge::V(ix, _) => ix == 0 || ix + 1 == nx,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Vertex {
    /// Fractional grid coordinates.
    t: [f64; 2],
    residual: f64,
}

/// Traces the flutter/divergence boundary of a chart.
///
/// Nodes are split into unstable and not unstable by their verdict. Every
/// grid edge joining the two kinds gets a vertex refined by bisection until
/// `|max Re λ| < tol.boundary`; edges where that fails, or that touch a
/// failed cell, are flagged and split the polyline. Saddle squares are
/// resolved with the mean of the corner values.
pub fn trace_boundary(chart: &StabilityChart) -> Vec<Polyline> {
    let (nx, ny) = (chart.grid.x.count, chart.grid.y.count);
    let value = |ix: usize, iy: usize| -> Option<(bool, f64)> {
        chart
            .cell(ix, iy)
            .as_ref()
            .ok()
            .map(|v| (v.class.is_unstable(), v.max_re))
    };

    let mut segments: Vec<(Edge, Edge)> = Vec::new();
    let mut broken: Vec<Edge> = Vec::new();
    for iy in 0..ny - 1 {
        for ix in 0..nx - 1 {
            let corners = [(ix, iy), (ix + 1, iy), (ix + 1, iy + 1), (ix, iy + 1)];
            let vals: Vec<Option<(bool, f64)>> = corners.iter().map(|&(a, b)| value(a, b)).collect();
            let edges = [
                Edge::H(ix, iy),
                Edge::V(ix + 1, iy),
                Edge::H(ix, iy + 1),
                Edge::V(ix, iy),
            ];
            if vals.iter().any(|v| v.is_none()) {
                // crossings next to a failed node cannot be located
                for (k, e) in edges.iter().enumerate() {
                    let (a, b) = (vals[k], vals[(k + 1) % 4]);
                    if a.is_none() || b.is_none() || a.map(|v| v.0) != b.map(|v| v.0) {
                        broken.push(*e);
                    }
                }
                continue;
            }
            let s: Vec<bool> = vals.iter().map(|v| v.unwrap().0).collect();
            let crossing: Vec<Edge> = (0..4).filter(|&k| s[k] != s[(k + 1) % 4]).map(|k| edges[k]).collect();
            match crossing.len() {
                2 => segments.push((crossing[0], crossing[1])),
                4 => {
                    let mean = vals.iter().map(|v| v.unwrap().1).sum::<f64>() / 4.0;
                    let center_unstable = mean > 0.0;
                    // edges: 0 bottom, 1 right, 2 top, 3 left
                    if s[0] != center_unstable {
                        // corners bl and tr are cut off
                        segments.push((edges[3], edges[0]));
                        segments.push((edges[1], edges[2]));
                    } else {
                        // corners br and tl are cut off
                        segments.push((edges[0], edges[1]));
                        segments.push((edges[2], edges[3]));
                    }
                }
                _ => {}
            }
        }
    }

    let mut unique: Vec<Edge> = segments.iter().flat_map(|(a, b)| [*a, *b]).collect();
    unique.sort();
    unique.dedup();
    let refined: Vec<Option<Vertex>> =
        super::run_in_pool(0, || unique.par_iter().map(|e| refine_edge(chart, *e)).collect());
    let mut vertex: BTreeMap<Edge, Vertex> = BTreeMap::new();
    for (e, v) in unique.iter().zip(refined) {
        match v {
            Some(v) => {
                vertex.insert(*e, v);
            }
            None => broken.push(*e),
        }
    }

    let mut adjacency: BTreeMap<Edge, Vec<Edge>> = BTreeMap::new();
    for (a, b) in &segments {
        if vertex.contains_key(a) && vertex.contains_key(b) {
            adjacency.entry(*a).or_default().push(*b);
            adjacency.entry(*b).or_default().push(*a);
        }
    }
    let flagged = |e: &Edge| broken.contains(e);

    let mut used: BTreeMap<(Edge, Edge), bool> = BTreeMap::new();
    let key = |a: Edge, b: Edge| if a < b { (a, b) } else { (b, a) };
    let mut paths: Vec<(Vec<Edge>, bool)> = Vec::new();
    let walk = |start: Edge, used: &mut BTreeMap<(Edge, Edge), bool>| -> Option<(Vec<Edge>, bool)> {
        let mut path = vec![start];
        let mut cur = start;
        loop {
            let next = adjacency
                .get(&cur)
                .into_iter()
                .flatten()
                .find(|n| !used.get(&key(cur, **n)).copied().unwrap_or(false))
                .copied();
            match next {
                Some(n) => {
                    used.insert(key(cur, n), true);
                    if n == start {
                        return Some((path, true));
                    }
                    path.push(n);
                    cur = n;
                }
                None => break,
            }
        }
        (path.len() > 1).then_some((path, false))
    };
    // open chains start at vertices of degree one
    let starts: Vec<Edge> = adjacency
        .iter()
        .filter(|(_, n)| n.len() == 1)
        .map(|(e, _)| *e)
        .collect();
    for s in starts {
        if let Some(p) = walk(s, &mut used) {
            paths.push(p);
        }
    }
    let all: Vec<Edge> = adjacency.keys().copied().collect();
    for s in all {
        if let Some(p) = walk(s, &mut used) {
            paths.push(p);
        }
    }

    let grid = chart.grid;
    let to_param = |t: [f64; 2]| [grid.x.at(t[0]), grid.y.at(t[1])];
    paths
        .into_iter()
        .map(|(mut edges, closed)| {
            orient(chart, &mut edges, &vertex);
            let (first, last) = (edges[0], *edges.last().unwrap());
            let touches_broken = !closed
                && [first, last].iter().any(|e| {
                    !e.on_frame(nx, ny)
                        && segments
                            .iter()
                            .any(|(a, b)| (a == e && flagged(b)) || (b == e && flagged(a)))
                });
            Polyline {
                points: edges.iter().map(|e| to_param(vertex[e].t)).collect(),
                residuals: edges.iter().map(|e| vertex[e].residual).collect(),
                closed,
                ends_on_frame: if closed {
                    [false, false]
                } else {
                    [first.on_frame(nx, ny), last.on_frame(nx, ny)]
                },
                split_at_flagged_edge: touches_broken,
            }
        })
        .collect()
}

/// Reverses `edges` if the unstable side is on the right.
fn orient(chart: &StabilityChart, edges: &mut [Edge], vertex: &BTreeMap<Edge, Vertex>) {
    let p0 = vertex[&edges[0]].t;
    let p1 = vertex[&edges[1]].t;
    let unstable_end = edges[0]
        .ends()
        .into_iter()
        .find(|&(ix, iy)| matches!(chart.cell(ix, iy), Ok(v) if v.class.is_unstable()))
        .expect("a crossing edge has an unstable end");
    let q = [unstable_end.0 as f64, unstable_end.1 as f64];
    let cross = (p1[0] - p0[0]) * (q[1] - p0[1]) - (p1[1] - p0[1]) * (q[0] - p0[0]);
    if cross < 0.0 {
        edges.reverse();
    }
}

/// Bisection on one grid edge between an unstable node and a stable or
/// marginal one. `None` when the target residual cannot be reached.
fn refine_edge(chart: &StabilityChart, e: Edge) -> Option<Vertex> {
    let [a, b] = e.ends();
    let fa = chart.cell(a.0, a.1).as_ref().ok()?;
    let ua = fa.class.is_unstable();
    let (mut hi, mut lo) = if ua {
        ([a.0 as f64, a.1 as f64], [b.0 as f64, b.1 as f64])
    } else {
        ([b.0 as f64, b.1 as f64], [a.0 as f64, a.1 as f64])
    };
    let grid = chart.grid;
    let f = |t: [f64; 2]| chart.max_re_at(grid.x.at(t[0]), grid.y.at(t[1])).ok();
    let target = chart.tol.boundary;
    let f_lo = f(lo)?;
    if f_lo.abs() < target {
        return Some(Vertex { t: lo, residual: f_lo });
    }
    for _ in 0..BISECTION_STEPS {
        let mid = [0.5 * (hi[0] + lo[0]), 0.5 * (hi[1] + lo[1])];
        if mid == hi || mid == lo {
            return None;
        }
        let fm = f(mid)?;
        if fm.abs() < target {
            return Some(Vertex { t: mid, residual: fm });
        }
        if fm > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    None
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SlopeError {
    #[error("slopes need a chart spanning Omega and delta")]
    WrongPlane,
    #[error("only {0} usable boundary vertices near the origin; refine the grid")]
    InsufficientResolution(usize),
}

/// Slopes `β = Ω/δ` of the two boundary branches leaving the origin of an
/// `(Ω, δ)` chart.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundarySlopes {
    /// Larger slope first.
    pub slopes: (f64, f64),
    pub vertices: (usize, usize),
}

/// Least-squares slopes through the origin of the two branches, using the
/// boundary vertices in the lowest quarter of the positive `δ` range. The
/// vertices are split into two branches at the largest gap of `Ω/δ`.
pub fn boundary_slope_at_origin(chart: &StabilityChart, boundaries: &[Polyline]) -> Result<BoundarySlopes, SlopeError> {
    let (xp, yp) = (chart.grid.x.param, chart.grid.y.param);
    let swap = match (xp, yp) {
        (Param::Spin, Param::Delta) => false,
        (Param::Delta, Param::Spin) => true,
        _ => return Err(SlopeError::WrongPlane),
    };
    let delta_axis = if swap { chart.grid.x } else { chart.grid.y };
    let lo = delta_axis.min.max(0.0);
    let cutoff = lo + 0.25 * (delta_axis.max - lo);
    let mut pts: Vec<(f64, f64)> = boundaries
        .iter()
        .flat_map(|p| p.points.iter())
        .map(|p| if swap { (p[1], p[0]) } else { (p[0], p[1]) })
        .filter(|(_, d)| *d > 0.0 && *d <= cutoff)
        .collect();
    if pts.len() < 6 {
        return Err(SlopeError::InsufficientResolution(pts.len()));
    }
    pts.sort_by(|a, b| (a.0 / a.1).total_cmp(&(b.0 / b.1)));
    let ratios: Vec<f64> = pts.iter().map(|(o, d)| o / d).collect();
    let split = (1..ratios.len())
        .max_by(|&i, &j| (ratios[i] - ratios[i - 1]).total_cmp(&(ratios[j] - ratios[j - 1])))
        .unwrap();
    let (low, high) = pts.split_at(split);
    if low.len() < 3 || high.len() < 3 {
        return Err(SlopeError::InsufficientResolution(low.len().min(high.len())));
    }
    let fit = |s: &[(f64, f64)]| {
        let num: f64 = s.iter().map(|(o, d)| o * d).sum();
        let den: f64 = s.iter().map(|(_, d)| d * d).sum();
        num / den
    };
    Ok(BoundarySlopes {
        slopes: (fit(high), fit(low)),
        vertices: (high.len(), low.len()),
    })
}
