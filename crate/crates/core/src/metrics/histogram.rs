//! Histograms over lattice-parameter samples and the smoothed KL
//! divergence between them.

use serde::{Deserialize, Serialize};

use crate::error::{Result, XtalError};

/// Binned counts over strictly increasing edges. `counts.len() + 1 ==
/// edges.len()` and `Σcounts == n_total` by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    edges: Vec<f64>,
    counts: Vec<u64>,
    n_total: u64,
}

impl Histogram {
    /// Bin `values` into the given edges. Bin `i` covers
    /// `[edges[i], edges[i+1])`; the last bin also includes its upper
    /// edge, and out-of-range values clamp into the end bins so the
    /// count invariant holds for any input.
    pub fn from_values(values: &[f64], edges: &[f64]) -> Result<Self> {
        validate_edges(edges)?;
        let nbins = edges.len() - 1;
        let mut counts = vec![0u64; nbins];
        for &x in values {
            if !x.is_finite() {
                return Err(XtalError::NonFinite("histogram value".into()));
            }
            let upper = edges.partition_point(|&e| e <= x);
            let bin = upper.saturating_sub(1).min(nbins - 1);
            counts[bin] += 1;
        }
        Ok(Histogram {
            edges: edges.to_vec(),
            counts,
            n_total: values.len() as u64,
        })
    }

    /// Build from explicit counts (used by stats emitters and tests).
    pub fn from_counts(edges: Vec<f64>, counts: Vec<u64>) -> Result<Self> {
        validate_edges(&edges)?;
        if counts.len() + 1 != edges.len() {
            return Err(XtalError::DimensionMismatch(format!(
                "{} counts for {} edges",
                counts.len(),
                edges.len()
            )));
        }
        let n_total = counts.iter().sum();
        Ok(Histogram {
            edges,
            counts,
            n_total,
        })
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n_total(&self) -> u64 {
        self.n_total
    }

    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }
}

fn validate_edges(edges: &[f64]) -> Result<()> {
    if edges.len() < 2 {
        return Err(XtalError::InvalidConfig(format!(
            "need at least 2 edges, got {}",
            edges.len()
        )));
    }
    for w in edges.windows(2) {
        if !(w[0].is_finite() && w[1].is_finite()) {
            return Err(XtalError::NonFinite("histogram edge".into()));
        }
        if w[1] <= w[0] {
            return Err(XtalError::InvalidConfig(format!(
                "edges must be strictly increasing, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

/// Uniform bin edges spanning both samples.
///
/// Without an override the span is `[min, max]` of the union widened by
/// 1e-9 at each end, so extreme values fall strictly inside the end bins.
/// With `domain_override` (used for angles, default [60°, 120°] — the
/// reduced-cell domain) the edges span exactly the override.
pub fn shared_edges(
    truth_vals: &[f64],
    pred_vals: &[f64],
    nbins: usize,
    domain_override: Option<[f64; 2]>,
) -> Result<Vec<f64>> {
    if nbins < 2 {
        return Err(XtalError::InvalidConfig(format!(
            "nbins must be ≥ 2, got {nbins}"
        )));
    }
    let (lo, hi) = match domain_override {
        Some([lo, hi]) => {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(XtalError::InvalidConfig(format!(
                    "bad domain override [{lo}, {hi}]"
                )));
            }
            (lo, hi)
        }
        None => {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &x in truth_vals.iter().chain(pred_vals) {
                if !x.is_finite() {
                    return Err(XtalError::NonFinite("sample value".into()));
                }
                lo = lo.min(x);
                hi = hi.max(x);
            }
            if truth_vals.is_empty() && pred_vals.is_empty() {
                return Err(XtalError::EmptyInput("shared_edges".into()));
            }
            (lo - 1e-9, hi + 1e-9)
        }
    };
    let width = (hi - lo) / nbins as f64;
    let mut edges: Vec<f64> = (0..=nbins).map(|k| lo + k as f64 * width).collect();
    // pin the end edges exactly; accumulated rounding must not shave the span
    edges[0] = lo;
    edges[nbins] = hi;
    Ok(edges)
}

/// Smoothed Kullback–Leibler divergence D(p‖q) in nats.
///
/// Counts are normalized to probabilities, then ε is added to every bin
/// of *both* distributions and each is renormalized by (1 + Bε) — this
/// keeps the sum finite when q has empty bins while preserving
/// nonnegativity (both arguments stay proper distributions, so Gibbs'
/// inequality applies).
pub fn kl_divergence(p_hist: &Histogram, q_hist: &Histogram, epsilon: f64) -> Result<f64> {
    if p_hist.edges != q_hist.edges {
        return Err(XtalError::EdgeMismatch(format!(
            "{} vs {} edges",
            p_hist.edges.len(),
            q_hist.edges.len()
        )));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(XtalError::InvalidConfig(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if p_hist.n_total == 0 || q_hist.n_total == 0 {
        return Err(XtalError::EmptyInput("kl_divergence over empty histogram".into()));
    }
    let b = p_hist.n_bins() as f64;
    let norm = 1.0 + b * epsilon;
    let mut sum = 0.0;
    for (&pc, &qc) in p_hist.counts.iter().zip(&q_hist.counts) {
        let p = (pc as f64 / p_hist.n_total as f64 + epsilon) / norm;
        let q = (qc as f64 / q_hist.n_total as f64 + epsilon) / norm;
        sum += p * (p / q).ln();
    }
    // tiny negative residue from rounding is still a zero
    Ok(sum.max(0.0))
}
