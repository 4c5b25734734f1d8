//! The three evaluation metrics — per-parameter MAE, histogram KL
//! divergence, and normalized periodic coordinate RMSE — plus the
//! aggregate report over a set of evaluated pairs.

mod assignment;
mod histogram;
mod matching;
mod rmse;

pub use assignment::min_cost_assignment;
pub use histogram::{kl_divergence, shared_edges, Histogram};
pub use matching::{match_atoms, MatchMode};
pub use rmse::{coord_rmse, CoordRmse, RmseNorm};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, XtalError};
use crate::lattice::Param;
use crate::pairing::{EvalPair, PairStatus};
use crate::SCHEMA_REPORT;

/// One value per lattice parameter, in canonical report order.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PerParam {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl PerParam {
    pub fn get(&self, p: Param) -> f64 {
        match p {
            Param::A => self.a,
            Param::B => self.b,
            Param::C => self.c,
            Param::Alpha => self.alpha,
            Param::Beta => self.beta,
            Param::Gamma => self.gamma,
        }
    }

    pub fn set(&mut self, p: Param, v: f64) {
        match p {
            Param::A => self.a = v,
            Param::B => self.b = v,
            Param::C => self.c = v,
            Param::Alpha => self.alpha = v,
            Param::Beta => self.beta = v,
            Param::Gamma => self.gamma = v,
        }
    }

    pub fn max_abs(&self) -> f64 {
        Param::ALL
            .iter()
            .map(|&p| self.get(p).abs())
            .fold(0.0, f64::max)
    }
}

/// Everything that influences metric values, echoed verbatim into the
/// report so results are self-describing. Contains no filesystem paths —
/// reports must be byte-identical wherever they are produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub nbins: usize,
    pub epsilon: f64,
    /// Second smoothing value; the report carries KLD recomputed with it
    /// as a sensitivity check.
    pub epsilon_sensitivity: f64,
    pub rmse_norm: RmseNorm,
    pub match_mode: MatchMode,
    pub align_translation: bool,
    pub niggli_tol: f64,
    pub niggli_max_iter: usize,
    /// Histogram domain for the three angles (degrees). The reduced-cell
    /// domain [60, 120] by default.
    pub angle_domain: [f64; 2],
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            nbins: 30,
            epsilon: 1e-9,
            epsilon_sensitivity: 1e-6,
            rmse_norm: RmseNorm::VolPerAtom,
            match_mode: MatchMode::Assignment,
            align_translation: false,
            niggli_tol: crate::niggli::DEFAULT_TOL,
            niggli_max_iter: crate::niggli::DEFAULT_MAX_ITER,
            angle_domain: [60.0, 120.0],
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nbins < 2 {
            return Err(XtalError::InvalidConfig(format!(
                "nbins must be ≥ 2, got {}",
                self.nbins
            )));
        }
        for (name, eps) in [
            ("epsilon", self.epsilon),
            ("epsilon_sensitivity", self.epsilon_sensitivity),
        ] {
            if !(eps.is_finite() && eps > 0.0) {
                return Err(XtalError::InvalidConfig(format!(
                    "{name} must be positive, got {eps}"
                )));
            }
        }
        if !(self.angle_domain[0].is_finite()
            && self.angle_domain[1].is_finite()
            && self.angle_domain[1] > self.angle_domain[0])
        {
            return Err(XtalError::InvalidConfig(format!(
                "bad angle domain {:?}",
                self.angle_domain
            )));
        }
        if !(self.niggli_tol.is_finite() && self.niggli_tol > 0.0) || self.niggli_max_iter == 0 {
            return Err(XtalError::InvalidConfig(
                "niggli tolerance must be positive and max_iter nonzero".into(),
            ));
        }
        Ok(())
    }
}

/// The truth and prediction histograms behind one parameter's KLD entry,
/// exported so plots can be drawn from the report file alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamHistograms {
    pub edges: Vec<f64>,
    pub truth: Vec<u64>,
    pub pred: Vec<u64>,
}

/// Aggregate metric report over one evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub schema_version: String,
    /// Mean absolute error per parameter: Å for a/b/c, degrees for angles.
    pub mae: PerParam,
    /// KL divergence D(truth ‖ prediction) per parameter, nats.
    pub kld: PerParam,
    /// Same, recomputed at `epsilon_sensitivity`.
    pub kld_sensitivity: PerParam,
    /// Mean normalized coordinate RMSE over `ok` pairs; null when no pair
    /// reached `ok` status.
    pub rmse_mean: Option<f64>,
    /// Mean un-normalized RMSE, Å.
    pub rmse_mean_angstrom: Option<f64>,
    pub n_ok: u64,
    pub n_skipped_species: u64,
    pub n_skipped_parse: u64,
    pub n_skipped_reduction: u64,
    /// Per-parameter histogram data (keyed a, b, c, alpha, beta, gamma).
    pub histograms: BTreeMap<String, ParamHistograms>,
    pub config: EvalConfig,
}

/// Pairs whose lattice parameters enter MAE/KLD: `ok` plus
/// `species_mismatch` (the cell is well-defined even with wrong
/// stoichiometry), sorted by id so float summation order is fixed.
fn lattice_pairs(pairs: &[EvalPair]) -> Vec<&EvalPair> {
    let mut out: Vec<&EvalPair> = pairs
        .iter()
        .filter(|p| {
            matches!(p.status, PairStatus::Ok | PairStatus::SpeciesMismatch) && p.pred.is_some()
        })
        .collect();
    out.sort_by(|x, y| x.id.cmp(&y.id));
    out
}

/// Mean absolute error of one lattice parameter over the evaluable pairs.
pub fn lattice_mae(pairs: &[EvalPair], param: Param) -> Result<f64> {
    let selected = lattice_pairs(pairs);
    if selected.is_empty() {
        return Err(XtalError::NoEvaluablePairs);
    }
    let mut sum = 0.0;
    for pair in &selected {
        let t = pair.truth.lattice().params()?.get(param);
        let p = pair
            .pred
            .as_ref()
            .expect("filter keeps only paired entries")
            .lattice()
            .params()?
            .get(param);
        sum += (t - p).abs();
    }
    Ok(sum / selected.len() as f64)
}

/// Compute the full report. Deterministic: pair order never matters
/// (everything is aggregated in id order).
pub fn evaluate(pairs: &[EvalPair], config: &EvalConfig) -> Result<MetricReport> {
    config.validate()?;
    let mut n_ok = 0u64;
    let mut n_skipped_species = 0u64;
    let mut n_skipped_parse = 0u64;
    let mut n_skipped_reduction = 0u64;
    for p in pairs {
        match p.status {
            PairStatus::Ok => n_ok += 1,
            PairStatus::SpeciesMismatch => n_skipped_species += 1,
            PairStatus::ParseFailed => n_skipped_parse += 1,
            PairStatus::ReductionFailed => n_skipped_reduction += 1,
        }
    }

    let selected = lattice_pairs(pairs);
    if selected.is_empty() {
        return Err(XtalError::NoEvaluablePairs);
    }

    let mut mae = PerParam::default();
    let mut kld = PerParam::default();
    let mut kld_sensitivity = PerParam::default();
    let mut histograms = BTreeMap::new();
    for param in Param::ALL {
        let mut truth_vals = Vec::with_capacity(selected.len());
        let mut pred_vals = Vec::with_capacity(selected.len());
        let mut abs_sum = 0.0;
        for pair in &selected {
            let t = pair.truth.lattice().params()?.get(param);
            let p = pair
                .pred
                .as_ref()
                .expect("filter keeps only paired entries")
                .lattice()
                .params()?
                .get(param);
            truth_vals.push(t);
            pred_vals.push(p);
            abs_sum += (t - p).abs();
        }
        mae.set(param, abs_sum / selected.len() as f64);

        let domain = param.is_angle().then_some(config.angle_domain);
        let edges = shared_edges(&truth_vals, &pred_vals, config.nbins, domain)?;
        let truth_hist = Histogram::from_values(&truth_vals, &edges)?;
        let pred_hist = Histogram::from_values(&pred_vals, &edges)?;
        kld.set(param, kl_divergence(&truth_hist, &pred_hist, config.epsilon)?);
        kld_sensitivity.set(
            param,
            kl_divergence(&truth_hist, &pred_hist, config.epsilon_sensitivity)?,
        );
        histograms.insert(
            param.label().to_string(),
            ParamHistograms {
                edges,
                truth: truth_hist.counts().to_vec(),
                pred: pred_hist.counts().to_vec(),
            },
        );
    }

    let ok_pairs: Vec<&&EvalPair> = selected
        .iter()
        .filter(|p| p.status == PairStatus::Ok)
        .collect();
    let (rmse_mean, rmse_mean_angstrom) = if ok_pairs.is_empty() {
        (None, None)
    } else {
        let mut sum_norm = 0.0;
        let mut sum_ang = 0.0;
        for pair in &ok_pairs {
            let r = coord_rmse(
                pair,
                config.rmse_norm,
                config.match_mode,
                config.align_translation,
            )?;
            sum_norm += r.normalized;
            sum_ang += r.angstrom;
        }
        (
            Some(sum_norm / ok_pairs.len() as f64),
            Some(sum_ang / ok_pairs.len() as f64),
        )
    };

    Ok(MetricReport {
        schema_version: SCHEMA_REPORT.to_string(),
        mae,
        kld,
        kld_sensitivity,
        rmse_mean,
        rmse_mean_angstrom,
        n_ok,
        n_skipped_species,
        n_skipped_parse,
        n_skipped_reduction,
        histograms,
        config: config.clone(),
    })
}
