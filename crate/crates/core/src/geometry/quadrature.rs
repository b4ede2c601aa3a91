use rayon::prelude::*;

use super::Domain;
use crate::error::{Error, Result};
use crate::Point;

const PANEL_ORDER: usize = 8;
const MIN_BUDGET: usize = 16;

/// Weighted nodes approximating ∫_Ω · dΩ.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
    /// Measure discrepancy between this rule and the next coarser level.
    pub est_error: f64,
}

impl QuadratureRule {
    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64 + Sync) -> f64 {
        // fixed summation order keeps results independent of the thread count
        let vals: Vec<f64> = self.nodes.par_iter().map(|x| f(x)).collect();
        self.sum_values(&vals)
    }

    /// Weighted sum of precomputed node values.
    pub fn sum_values(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let m = order.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if order == 1 {
                p0 = 1.0;
                p1 = x;
            }
            dp = order as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

fn composite_axis(lo: f64, hi: f64, per_axis: usize) -> (Vec<f64>, Vec<f64>) {
    let order = per_axis.min(PANEL_ORDER);
    let panels = (per_axis / order).max(1);
    let (gx, gw) = gauss_legendre(order);
    let width = (hi - lo) / panels as f64;
    let mut xs = Vec::with_capacity(panels * order);
    let mut ws = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let a = lo + p as f64 * width;
        for (x, w) in gx.iter().zip(&gw) {
            xs.push(a + 0.5 * width * (x + 1.0));
            ws.push(0.5 * width * w);
        }
    }
    (xs, ws)
}

fn tensor_rule(domain: &Domain, per_axis: usize) -> (Vec<Point>, Vec<f64>) {
    let (lo, hi) = domain.bounding_box();
    let axes: Vec<(Vec<f64>, Vec<f64>)> = (0..domain.dimension())
        .map(|d| composite_axis(lo[d], hi[d], per_axis))
        .collect();
    let mut nodes: Vec<Point> = vec![vec![]];
    let mut weights = vec![1.0];
    for (xs, ws) in &axes {
        let mut next_nodes = Vec::with_capacity(nodes.len() * xs.len());
        let mut next_weights = Vec::with_capacity(nodes.len() * xs.len());
        for (p, pw) in nodes.iter().zip(&weights) {
            for (x, w) in xs.iter().zip(ws) {
                let mut q = p.clone();
                q.push(*x);
                next_nodes.push(q);
                next_weights.push(pw * w);
            }
        }
        nodes = next_nodes;
        weights = next_weights;
    }
    mask(domain, nodes, weights)
}

fn radical_inverse(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

const PRIMES: [usize; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn halton_rule(domain: &Domain, count: usize) -> Result<(Vec<Point>, Vec<f64>)> {
    let n = domain.dimension();
    if n > PRIMES.len() {
        return Err(Error::Unsupported(format!(
            "quasi-Monte-Carlo quadrature in {n} dimensions"
        )));
    }
    let (lo, hi) = domain.bounding_box();
    let volume: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
    let nodes: Vec<Point> = (1..=count)
        .map(|i| {
            (0..n)
                .map(|d| lo[d] + (hi[d] - lo[d]) * radical_inverse(i, PRIMES[d]))
                .collect()
        })
        .collect();
    let weights = vec![volume / count as f64; count];
    Ok(mask(domain, nodes, weights))
}

fn mask(domain: &Domain, nodes: Vec<Point>, weights: Vec<f64>) -> (Vec<Point>, Vec<f64>) {
    nodes
        .into_iter()
        .zip(weights)
        .filter(|(x, _)| domain.contains(x))
        .unzip()
}

/// Quadrature over a domain with about `budget` candidate nodes.
///
/// For n ≤ 2 this is composite tensor Gauss–Legendre over the bounding box,
/// for n ≥ 3 a Halton sequence; in both cases nodes outside the indicator are
/// dropped. `est_error` is the measure difference against the rule built on
/// half the resolution.
pub fn domain_quadrature(domain: &Domain, budget: usize) -> Result<QuadratureRule> {
    if budget < MIN_BUDGET {
        return Err(Error::param("budget", format!("must be >= {MIN_BUDGET}")));
    }
    let n = domain.dimension();
    let ((nodes, weights), (_, coarse_weights)) = if n <= 2 {
        let per_axis = (budget as f64).powf(1.0 / n as f64).round() as usize;
        let coarse = (per_axis / 2).max(1);
        (tensor_rule(domain, per_axis), tensor_rule(domain, coarse))
    } else {
        (halton_rule(domain, budget)?, halton_rule(domain, budget / 2)?)
    };
    if nodes.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let fine: f64 = weights.iter().sum();
    let coarse: f64 = coarse_weights.iter().sum();
    Ok(QuadratureRule {
        nodes,
        weights,
        est_error: (fine - coarse).abs(),
    })
}
