//! Dataset-level statistics: elemental composition, a crystal-family
//! proxy computed from reduced lattice parameters, and Tc histograms.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::DatasetRecord;
use crate::error::{Result, XtalError};
use crate::lattice::LatticeParams;
use crate::metrics::Histogram;
use crate::SCHEMA_STATS;

/// How composition fractions weight each occurrence of an element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// Every atomic site counts once (default).
    SiteCount,
    /// Every element counts once per structure containing it.
    PerStructure,
}

impl FromStr for Weighting {
    type Err = XtalError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "site_count" => Ok(Weighting::SiteCount),
            "per_structure" => Ok(Weighting::PerStructure),
            other => Err(XtalError::InvalidConfig(format!(
                "unknown weighting {other:?} (expected site_count or per_structure)"
            ))),
        }
    }
}

/// Element → fraction of the whole dataset, plus the top-k list for
/// captions and bar charts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompositionStats {
    /// Fractions sum to 1 within 1e-9.
    pub fractions: BTreeMap<String, f64>,
    /// Descending by fraction; ties broken alphabetically.
    pub top_k: Vec<(String, f64)>,
}

/// Per-element fractions over all records.
pub fn element_fractions(
    records: &[DatasetRecord],
    weighting: Weighting,
    k: usize,
) -> Result<CompositionStats> {
    if records.is_empty() {
        return Err(XtalError::EmptyDataset);
    }
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    let mut total = 0u64;
    for rec in records {
        match weighting {
            Weighting::SiteCount => {
                for (el, n) in rec.structure.species_counts() {
                    *counts.entry(el).or_insert(0) += n;
                    total += n;
                }
            }
            Weighting::PerStructure => {
                for el in rec.structure.species_counts().into_keys() {
                    *counts.entry(el).or_insert(0) += 1;
                    total += 1;
                }
            }
        }
    }
    let fractions: BTreeMap<String, f64> = counts
        .into_iter()
        .map(|(el, n)| (el, n as f64 / total as f64))
        .collect();
    let mut ranked: Vec<(String, f64)> = fractions
        .iter()
        .map(|(el, &f)| (el.clone(), f))
        .collect();
    // fractions are distinct or tie-broken by the element name, which the
    // BTreeMap iteration already ordered; sort_by is stable
    ranked.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap());
    ranked.truncate(k);
    Ok(CompositionStats {
        fractions,
        top_k: ranked,
    })
}

/// Lattice-parameter-based family proxy (not a space-group assignment:
/// pseudo-symmetric cells classify by shape alone).
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum CrystalFamily {
    Cubic,
    Hexagonal,
    Trigonal,
    Tetragonal,
    Orthorhombic,
    Monoclinic,
    Triclinic,
}

impl CrystalFamily {
    pub const ALL: [CrystalFamily; 7] = [
        CrystalFamily::Cubic,
        CrystalFamily::Hexagonal,
        CrystalFamily::Trigonal,
        CrystalFamily::Tetragonal,
        CrystalFamily::Orthorhombic,
        CrystalFamily::Monoclinic,
        CrystalFamily::Triclinic,
    ];

    pub fn label(self) -> &'static str {
        match self {
            CrystalFamily::Cubic => "cubic",
            CrystalFamily::Hexagonal => "hexagonal",
            CrystalFamily::Trigonal => "trigonal",
            CrystalFamily::Tetragonal => "tetragonal",
            CrystalFamily::Orthorhombic => "orthorhombic",
            CrystalFamily::Monoclinic => "monoclinic",
            CrystalFamily::Triclinic => "triclinic",
        }
    }
}

impl std::fmt::Display for CrystalFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

pub const DEFAULT_LEN_TOL_REL: f64 = 1e-2;
pub const DEFAULT_ANG_TOL_DEG: f64 = 0.5;

/// Classify a (Niggli-reduced) parameter set into a crystal family.
///
/// Rule table, first match wins. Lengths compare relative to their mean
/// (`len_tol_rel`), angles absolutely (`ang_tol_deg`):
/// - cubic: a≈b≈c, all angles ≈90°
/// - tetragonal: two adjacent lengths equal, all ≈90° (reduction sorts
///   a≤b≤c, so the equal pair may land as a≈b or b≈c)
/// - orthorhombic: all ≈90°, lengths distinct
/// - hexagonal: a≈b with γ≈120° and α≈β≈90°, or b≈c with α≈120° and
///   β≈γ≈90° (the reduced form when the sixfold axis is the longest)
/// - trigonal: a≈b≈c, α≈β≈γ, not 90°
/// - monoclinic: exactly one angle off 90°
/// - triclinic: everything else
pub fn classify_family(p: &LatticeParams, len_tol_rel: f64, ang_tol_deg: f64) -> CrystalFamily {
    let [a, b, c] = p.lengths();
    let [alpha, beta, gamma] = p.angles();
    let len_eq = |x: f64, y: f64| (x - y).abs() <= len_tol_rel * 0.5 * (x + y);
    let ang_is = |x: f64, v: f64| (x - v).abs() <= ang_tol_deg;

    let ab = len_eq(a, b);
    let bc = len_eq(b, c);
    let abc = ab && bc && len_eq(a, c);
    let all90 = ang_is(alpha, 90.0) && ang_is(beta, 90.0) && ang_is(gamma, 90.0);

    if all90 {
        if abc {
            return CrystalFamily::Cubic;
        }
        if ab || bc {
            return CrystalFamily::Tetragonal;
        }
        return CrystalFamily::Orthorhombic;
    }
    if ab && ang_is(gamma, 120.0) && ang_is(alpha, 90.0) && ang_is(beta, 90.0) {
        return CrystalFamily::Hexagonal;
    }
    if bc && ang_is(alpha, 120.0) && ang_is(beta, 90.0) && ang_is(gamma, 90.0) {
        return CrystalFamily::Hexagonal;
    }
    if abc
        && (alpha - beta).abs() <= ang_tol_deg
        && (beta - gamma).abs() <= ang_tol_deg
        && !ang_is(alpha, 90.0)
    {
        return CrystalFamily::Trigonal;
    }
    let off_count = [alpha, beta, gamma]
        .iter()
        .filter(|&&x| !ang_is(x, 90.0))
        .count();
    if off_count == 1 {
        return CrystalFamily::Monoclinic;
    }
    CrystalFamily::Triclinic
}

/// Family counts over a dataset, classified on Niggli-reduced cells.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyDistribution {
    pub counts: BTreeMap<CrystalFamily, u64>,
    /// Records whose reduction did not converge; excluded from counts.
    pub n_skipped_reduction: u64,
}

impl FamilyDistribution {
    pub fn n_classified(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn fraction(&self, family: CrystalFamily) -> f64 {
        let total = self.n_classified();
        if total == 0 {
            return 0.0;
        }
        *self.counts.get(&family).unwrap_or(&0) as f64 / total as f64
    }
}

pub fn family_distribution(
    records: &[DatasetRecord],
    len_tol_rel: f64,
    ang_tol_deg: f64,
    niggli_tol: f64,
    niggli_max_iter: usize,
) -> Result<FamilyDistribution> {
    if records.is_empty() {
        return Err(XtalError::EmptyDataset);
    }
    let mut counts: BTreeMap<CrystalFamily, u64> = BTreeMap::new();
    let mut n_skipped = 0u64;
    for rec in records {
        match rec.structure.niggli_reduced(niggli_tol, niggli_max_iter) {
            Ok((reduced, _)) => {
                let params = reduced.lattice().params()?;
                let family = classify_family(&params, len_tol_rel, ang_tol_deg);
                *counts.entry(family).or_insert(0) += 1;
            }
            Err(_) => n_skipped += 1,
        }
    }
    Ok(FamilyDistribution {
        counts,
        n_skipped_reduction: n_skipped,
    })
}

/// Histogram of Tc labels in fixed-width bins starting at 0 K.
///
/// Edges run 0, w, 2w, … up to the first multiple of `bin_width` strictly
/// above the maximum label, so the last bin is never empty by
/// construction and `Σcounts == record count`.
pub fn tc_histogram(records: &[DatasetRecord], bin_width: f64) -> Result<Histogram> {
    if records.is_empty() {
        return Err(XtalError::EmptyDataset);
    }
    if !(bin_width.is_finite() && bin_width > 0.0) {
        return Err(XtalError::InvalidConfig(format!(
            "tc bin width must be positive, got {bin_width}"
        )));
    }
    let values: Vec<f64> = records.iter().map(|r| r.tc_k).collect();
    let max = values.iter().cloned().fold(0.0f64, f64::max);
    let nbins = ((max / bin_width).floor() as usize) + 1;
    let edges: Vec<f64> = (0..=nbins).map(|k| k as f64 * bin_width).collect();
    Histogram::from_values(&values, &edges)
}

/// Knobs for `dataset_stats`, echoed into the output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsConfig {
    pub weighting: Weighting,
    pub top_k: usize,
    pub tc_bin_width: f64,
    pub len_tol_rel: f64,
    pub ang_tol_deg: f64,
    pub niggli_tol: f64,
    pub niggli_max_iter: usize,
}

impl Default for StatsConfig {
    fn default() -> Self {
        StatsConfig {
            weighting: Weighting::SiteCount,
            top_k: 23,
            tc_bin_width: 5.0,
            len_tol_rel: DEFAULT_LEN_TOL_REL,
            ang_tol_deg: DEFAULT_ANG_TOL_DEG,
            niggli_tol: crate::niggli::DEFAULT_TOL,
            niggli_max_iter: crate::niggli::DEFAULT_MAX_ITER,
        }
    }
}

/// Everything `cmd_stats` emits, in one deterministic document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatsReport {
    pub schema_version: String,
    pub n_records: u64,
    pub composition: CompositionStats,
    pub families: FamilyDistribution,
    pub tc: Histogram,
    pub config: StatsConfig,
}

pub fn dataset_stats(records: &[DatasetRecord], config: &StatsConfig) -> Result<StatsReport> {
    Ok(StatsReport {
        schema_version: SCHEMA_STATS.to_string(),
        n_records: records.len() as u64,
        composition: element_fractions(records, config.weighting, config.top_k)?,
        families: family_distribution(
            records,
            config.len_tol_rel,
            config.ang_tol_deg,
            config.niggli_tol,
            config.niggli_max_iter,
        )?,
        tc: tc_histogram(records, config.tc_bin_width)?,
        config: config.clone(),
    })
}
