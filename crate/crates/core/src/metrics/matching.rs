//! Atom matching between a truth/prediction pair: which predicted site
//! corresponds to which ground-truth site.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::crystal::Crystal;
use crate::error::{Result, XtalError};

use super::assignment::min_cost_assignment;

/// How truth sites are matched to prediction sites (always per species —
/// unlike atoms are never compared).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchMode {
    /// Optimal assignment minimizing the summed squared min-image
    /// distances within each species group (the default).
    Assignment,
    /// i-th truth atom of each element ↔ i-th predicted atom of that
    /// element, in site-list order.
    Index,
}

impl FromStr for MatchMode {
    type Err = XtalError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "assignment" => Ok(MatchMode::Assignment),
            "index" => Ok(MatchMode::Index),
            other => Err(XtalError::InvalidConfig(format!(
                "unknown match mode {other:?} (expected assignment or index)"
            ))),
        }
    }
}

/// Match `pred`'s sites to `truth`'s sites.
///
/// Returns `perm` with `perm[i]` = index of the predicted site assigned
/// to truth site `i`; `perm` is a permutation of `0..n`. Distances are
/// min-image in the *truth* lattice. Errors with `SpeciesMismatch` when
/// the element multisets differ.
pub fn match_atoms(truth: &Crystal, pred: &Crystal, mode: MatchMode) -> Result<Vec<usize>> {
    match_frac_coords(truth, pred.species(), pred.frac_coords(), mode)
}

/// Worker that takes the prediction's coordinates as a plain slice so
/// translation alignment can rematch shifted copies without rebuilding a
/// Crystal.
pub(crate) fn match_frac_coords(
    truth: &Crystal,
    pred_species: &[String],
    pred_frac: &[[f64; 3]],
    mode: MatchMode,
) -> Result<Vec<usize>> {
    let n = truth.n_sites();
    if pred_species.len() != n || pred_frac.len() != n {
        return Err(XtalError::SpeciesMismatch(format!(
            "site counts differ: truth {n}, prediction {}",
            pred_species.len()
        )));
    }
    let mut truth_by: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, s) in truth.species().iter().enumerate() {
        truth_by.entry(s).or_default().push(i);
    }
    let mut pred_by: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (j, s) in pred_species.iter().enumerate() {
        pred_by.entry(s).or_default().push(j);
    }
    if truth_by.keys().ne(pred_by.keys())
        || truth_by
            .iter()
            .any(|(el, v)| pred_by[el].len() != v.len())
    {
        let fmt = |m: &BTreeMap<&str, Vec<usize>>| {
            m.iter()
                .map(|(el, v)| format!("{el}{}", v.len()))
                .collect::<Vec<_>>()
                .join(" ")
        };
        return Err(XtalError::SpeciesMismatch(format!(
            "truth {{{}}} vs prediction {{{}}}",
            fmt(&truth_by),
            fmt(&pred_by)
        )));
    }

    let mut perm = vec![0usize; n];
    for (el, t_idx) in &truth_by {
        let p_idx = &pred_by[el];
        match mode {
            MatchMode::Index => {
                for (&ti, &pj) in t_idx.iter().zip(p_idx) {
                    perm[ti] = pj;
                }
            }
            MatchMode::Assignment => {
                let cost: Vec<Vec<f64>> = t_idx
                    .iter()
                    .map(|&ti| {
                        p_idx
                            .iter()
                            .map(|&pj| {
                                let (_, d) = truth
                                    .lattice()
                                    .min_image(truth.frac_coords()[ti], pred_frac[pj]);
                                d * d
                            })
                            .collect()
                    })
                    .collect();
                let (assignment, _) = min_cost_assignment(&cost)?;
                for (k, &ti) in t_idx.iter().enumerate() {
                    perm[ti] = p_idx[assignment[k]];
                }
            }
        }
    }
    Ok(perm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeParams;

    fn cell(species: &[&str], coords: Vec<[f64; 3]>) -> Crystal {
        let m = LatticeParams::new(6.0, 6.0, 6.0, 90.0, 90.0, 90.0)
            .unwrap()
            .to_matrix()
            .unwrap();
        Crystal::new(
            species.iter().map(|s| s.to_string()).collect(),
            coords,
            m,
            "test",
        )
        .unwrap()
    }

    #[test]
    fn identity_match_costs_zero() {
        let c = cell(
            &["Nb", "Nb", "Sn"],
            vec![[0.0, 0.0, 0.0], [0.5, 0.5, 0.0], [0.25, 0.25, 0.25]],
        );
        let perm = match_atoms(&c, &c, MatchMode::Assignment).unwrap();
        assert_eq!(perm, [0, 1, 2]);
    }

    #[test]
    fn unswaps_swapped_identical_atoms() {
        let truth = cell(&["Nb", "Nb"], vec![[0.0, 0.0, 0.0], [0.5, 0.5, 0.5]]);
        let pred = cell(&["Nb", "Nb"], vec![[0.5, 0.5, 0.5], [0.0, 0.0, 0.0]]);
        let perm = match_atoms(&truth, &pred, MatchMode::Assignment).unwrap();
        assert_eq!(perm, [1, 0]);
        // list order deliberately keeps the swap
        let perm = match_atoms(&truth, &pred, MatchMode::Index).unwrap();
        assert_eq!(perm, [0, 1]);
    }

    #[test]
    fn never_matches_across_species() {
        // interleaved elements in different list orders
        let truth = cell(&["Nb", "Sn"], vec![[0.0, 0.0, 0.0], [0.5, 0.5, 0.5]]);
        let pred = cell(&["Sn", "Nb"], vec![[0.5, 0.5, 0.5], [0.0, 0.0, 0.0]]);
        for mode in [MatchMode::Assignment, MatchMode::Index] {
            let perm = match_atoms(&truth, &pred, mode).unwrap();
            assert_eq!(perm, [1, 0], "mode {mode:?}");
        }
    }

    #[test]
    fn species_mismatch_is_an_error() {
        let truth = cell(&["Nb", "Nb"], vec![[0.0, 0.0, 0.0], [0.5, 0.5, 0.5]]);
        let pred = cell(&["Nb", "Sn"], vec![[0.0, 0.0, 0.0], [0.5, 0.5, 0.5]]);
        assert!(matches!(
            match_atoms(&truth, &pred, MatchMode::Assignment),
            Err(XtalError::SpeciesMismatch(_))
        ));
    }

    #[test]
    fn matching_crosses_periodic_boundary() {
        // truth at 0.05, pred at 0.95: nearest image is 0.1 away, not 0.9
        let truth = cell(&["H", "H"], vec![[0.05, 0.0, 0.0], [0.45, 0.0, 0.0]]);
        let pred = cell(&["H", "H"], vec![[0.45, 0.0, 0.0], [0.95, 0.0, 0.0]]);
        let perm = match_atoms(&truth, &pred, MatchMode::Assignment).unwrap();
        assert_eq!(perm, [1, 0]);
    }
}
