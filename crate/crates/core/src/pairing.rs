//! Truth/prediction pairing ahead of metric computation.
//!
//! Every ground-truth record produces exactly one [`EvalPair`], in input
//! order, whatever happened to its prediction — failures are statuses,
//! not omissions, so the counts in a report always add up to the subset
//! size.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::crystal::Crystal;
use crate::dataset::DatasetRecord;

/// What the metrics may use this pair for.
///
/// `Ok` pairs enter every metric. `SpeciesMismatch` pairs still enter the
/// lattice metrics (the cell shape is well-defined even when the model got
/// the stoichiometry wrong) but not coordinate RMSE, which needs a
/// same-species atom matching. `ParseFailed` and `ReductionFailed` pairs
/// are excluded from all metrics and only counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairStatus {
    Ok,
    SpeciesMismatch,
    ParseFailed,
    ReductionFailed,
}

/// One truth record joined with its prediction (if any).
#[derive(Debug, Clone)]
pub struct EvalPair {
    pub id: String,
    pub tc_k: f64,
    /// Ground truth; Niggli-reduced when pairing ran with `reduce`.
    pub truth: Crystal,
    /// Prediction, reduced likewise. `None` exactly when the prediction
    /// was missing or unparseable.
    pub pred: Option<Crystal>,
    pub status: PairStatus,
}

/// Join truth records with parsed predictions by id.
///
/// `preds` holds the predictions that parsed successfully; ids absent from
/// it become `ParseFailed` pairs. With `reduce` set, both cells are
/// Niggli-reduced (`niggli_tol`, `niggli_max_iter`) and a reduction
/// failure on either side marks the pair `ReductionFailed`, keeping the
/// unreduced cells for inspection.
pub fn pair_structures(
    truths: &[DatasetRecord],
    preds: &BTreeMap<String, Crystal>,
    reduce: bool,
    niggli_tol: f64,
    niggli_max_iter: usize,
) -> Vec<EvalPair> {
    truths
        .iter()
        .map(|rec| {
            let mut truth = rec.structure.clone();
            let Some(mut pred) = preds.get(&rec.id).cloned() else {
                return EvalPair {
                    id: rec.id.clone(),
                    tc_k: rec.tc_k,
                    truth,
                    pred: None,
                    status: PairStatus::ParseFailed,
                };
            };
            let mut status = PairStatus::Ok;
            if reduce {
                match (
                    truth.niggli_reduced(niggli_tol, niggli_max_iter),
                    pred.niggli_reduced(niggli_tol, niggli_max_iter),
                ) {
                    (Ok((t, _)), Ok((p, _))) => {
                        truth = t;
                        pred = p;
                    }
                    _ => status = PairStatus::ReductionFailed,
                }
            }
            if status == PairStatus::Ok && truth.species_counts() != pred.species_counts() {
                status = PairStatus::SpeciesMismatch;
            }
            EvalPair {
                id: rec.id.clone(),
                tc_k: rec.tc_k,
                truth,
                pred: Some(pred),
                status,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{LatticeMatrix, LatticeParams};

    fn cubic(sym: &str, a: f64) -> Crystal {
        let m = LatticeParams::new(a, a, a, 90.0, 90.0, 90.0)
            .unwrap()
            .to_matrix()
            .unwrap();
        Crystal::new(vec![sym.to_string()], vec![[0.0, 0.0, 0.0]], m, "test").unwrap()
    }

    fn record(id: &str, c: Crystal) -> DatasetRecord {
        DatasetRecord {
            id: id.into(),
            formula: c.reduced_formula(),
            tc_k: 1.0,
            structure: c,
        }
    }

    #[test]
    fn statuses_cover_all_outcomes() {
        let truths = vec![
            record("a", cubic("Nb", 3.3)),
            record("b", cubic("Nb", 3.3)),
            record("c", cubic("Nb", 3.3)),
        ];
        let mut preds = BTreeMap::new();
        preds.insert("a".to_string(), cubic("Nb", 3.2)); // fine
        preds.insert("b".to_string(), cubic("Ta", 3.2)); // wrong species
        // "c" missing → parse failed
        let pairs = pair_structures(&truths, &preds, true, 1e-5, 100);
        assert_eq!(pairs.len(), 3);
        assert_eq!(pairs[0].status, PairStatus::Ok);
        assert_eq!(pairs[1].status, PairStatus::SpeciesMismatch);
        assert_eq!(pairs[2].status, PairStatus::ParseFailed);
        assert!(pairs[2].pred.is_none());
        // order follows the truth records
        let ids: Vec<&str> = pairs.iter().map(|p| p.id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
    }

    #[test]
    fn reduce_flag_reduces_both_sides() {
        // a skewed description of a simple cube: rows (2,0,0),(0,2,0),(2,2,2)
        let skewed = LatticeMatrix::new([[2.0, 0.0, 0.0], [0.0, 2.0, 0.0], [2.0, 2.0, 2.0]]).unwrap();
        let truth = Crystal::new(
            vec!["Pb".into()],
            vec![[0.25, 0.25, 0.25]],
            skewed,
            "test",
        )
        .unwrap();
        let truths = vec![record("x", truth)];
        let mut preds = BTreeMap::new();
        preds.insert("x".to_string(), cubic("Pb", 2.0));
        let pairs = pair_structures(&truths, &preds, true, 1e-5, 100);
        assert_eq!(pairs[0].status, PairStatus::Ok);
        let p = pairs[0].truth.lattice().params().unwrap();
        let [a, b, c] = p.lengths();
        assert!((a - 2.0).abs() < 1e-12 && (b - 2.0).abs() < 1e-12 && (c - 2.0).abs() < 1e-12);

        // without reduce, the skewed cell is untouched
        let pairs = pair_structures(&truths, &preds, false, 1e-5, 100);
        let p = pairs[0].truth.lattice().params().unwrap();
        assert!(p.lengths()[2] > 3.0);
    }

    #[test]
    fn species_multiset_ignores_site_order() {
        let m = LatticeParams::new(4.0, 4.0, 4.0, 90.0, 90.0, 90.0)
            .unwrap()
            .to_matrix()
            .unwrap();
        let t = Crystal::new(
            vec!["Nb".into(), "Sn".into()],
            vec![[0.0, 0.0, 0.0], [0.5, 0.5, 0.5]],
            m,
            "t",
        )
        .unwrap();
        let p = Crystal::new(
            vec!["Sn".into(), "Nb".into()],
            vec![[0.5, 0.5, 0.5], [0.0, 0.0, 0.0]],
            m,
            "p",
        )
        .unwrap();
        let truths = vec![record("y", t)];
        let mut preds = BTreeMap::new();
        preds.insert("y".to_string(), p);
        let pairs = pair_structures(&truths, &preds, false, 1e-5, 100);
        assert_eq!(pairs[0].status, PairStatus::Ok);
    }
}
