//! A periodic structure: species + fractional coordinates + lattice, plus
//! formula handling and structure-level Niggli reduction.

use std::collections::BTreeMap;

use crate::elements;
use crate::error::{Result, XtalError};
use crate::lattice::{wrap_frac, LatticeMatrix};
use crate::niggli::{self, ReductionResult};

/// One crystal structure. Invariants, enforced at construction:
/// species and coordinates have equal nonzero length, every symbol is a
/// valid element (H..Og), every coordinate is finite and stored wrapped
/// into [0, 1).
#[derive(Debug, Clone)]
pub struct Crystal {
    species: Vec<String>,
    frac_coords: Vec<[f64; 3]>,
    lattice: LatticeMatrix,
    /// Free-text source tag (file name, model name, dataset id).
    provenance: String,
}

impl Crystal {
    pub fn new(
        species: Vec<String>,
        frac_coords: Vec<[f64; 3]>,
        lattice: LatticeMatrix,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        if species.is_empty() {
            return Err(XtalError::EmptyInput("crystal needs at least one site".into()));
        }
        if species.len() != frac_coords.len() {
            return Err(XtalError::DimensionMismatch(format!(
                "{} species vs {} coordinates",
                species.len(),
                frac_coords.len()
            )));
        }
        for s in &species {
            if !elements::is_valid_symbol(s) {
                return Err(XtalError::UnknownElement(s.clone()));
            }
        }
        let mut wrapped = Vec::with_capacity(frac_coords.len());
        for (i, f) in frac_coords.iter().enumerate() {
            if f.iter().any(|v| !v.is_finite()) {
                return Err(XtalError::NonFinite(format!("fractional coordinate of site {i}")));
            }
            wrapped.push([wrap_frac(f[0]), wrap_frac(f[1]), wrap_frac(f[2])]);
        }
        Ok(Crystal {
            species,
            frac_coords: wrapped,
            lattice,
            provenance: provenance.into(),
        })
    }

    /// Build from raw basis rows that may be left-handed. If the matrix
    /// constructor flips the third axis to restore right-handedness, the
    /// third fractional coordinate of every site is negated to keep the
    /// same Cartesian positions. All parsers and schema adapters go
    /// through here.
    pub fn from_raw_basis(
        species: Vec<String>,
        frac_coords: Vec<[f64; 3]>,
        rows: [[f64; 3]; 3],
        provenance: impl Into<String>,
    ) -> Result<Self> {
        let lattice = LatticeMatrix::new(rows)?;
        let coords = if lattice.was_flipped() {
            frac_coords
                .into_iter()
                .map(|f| [f[0], f[1], -f[2]])
                .collect()
        } else {
            frac_coords
        };
        Crystal::new(species, coords, lattice, provenance)
    }

    pub fn species(&self) -> &[String] {
        &self.species
    }

    pub fn frac_coords(&self) -> &[[f64; 3]] {
        &self.frac_coords
    }

    pub fn lattice(&self) -> &LatticeMatrix {
        &self.lattice
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn n_sites(&self) -> usize {
        self.species.len()
    }

    /// Element → site count, sorted by symbol.
    pub fn species_counts(&self) -> BTreeMap<String, u64> {
        let mut counts = BTreeMap::new();
        for s in &self.species {
            *counts.entry(s.clone()).or_insert(0) += 1;
        }
        counts
    }

    /// Reduced chemical formula: counts divided by their gcd, elements in
    /// alphabetical order, count 1 omitted (e.g. "Nb3Sn").
    pub fn reduced_formula(&self) -> String {
        formula_from_counts(&self.species_counts())
    }

    /// Niggli-reduce the lattice and re-express the sites in the reduced
    /// basis (fractional coordinates transform by the inverse of the row
    /// transform and are re-wrapped). Species order and provenance are
    /// preserved; Cartesian site positions are unchanged modulo lattice
    /// translations.
    pub fn niggli_reduced(&self, tol: f64, max_iter: usize) -> Result<(Crystal, ReductionResult)> {
        let red = niggli::niggli_reduce(&self.lattice, tol, max_iter)?;
        let tinv = niggli::invert_unimodular(red.transform)?;
        let coords = self
            .frac_coords
            .iter()
            .map(|f| {
                let mut out = [0.0; 3];
                for (j, o) in out.iter_mut().enumerate() {
                    *o = f[0] * tinv[0][j] as f64
                        + f[1] * tinv[1][j] as f64
                        + f[2] * tinv[2][j] as f64;
                }
                out
            })
            .collect();
        let crystal = Crystal::new(
            self.species.clone(),
            coords,
            red.reduced,
            self.provenance.clone(),
        )?;
        Ok((crystal, red))
    }
}

/// Render counts as a reduced formula (alphabetical, gcd-normalized).
pub fn formula_from_counts(counts: &BTreeMap<String, u64>) -> String {
    let g = counts.values().fold(0u64, |acc, &v| gcd(acc, v));
    let mut out = String::new();
    for (sym, &n) in counts {
        out.push_str(sym);
        let reduced = n.checked_div(g).unwrap_or(n);
        if reduced != 1 {
            out.push_str(&reduced.to_string());
        }
    }
    out
}

/// Parse a plain formula like "Nb3Sn" or "YBa2Cu3O7" into element counts.
/// Only flat element+count sequences are understood; anything with
/// parentheses, dots, or fractional counts returns None (callers then skip
/// formula/site-list consistency checking rather than guessing).
pub fn parse_formula(s: &str) -> Option<BTreeMap<String, u64>> {
    let bytes = s.as_bytes();
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    let mut i = 0;
    while i < bytes.len() {
        if !bytes[i].is_ascii_uppercase() {
            return None;
        }
        let start = i;
        i += 1;
        while i < bytes.len() && bytes[i].is_ascii_lowercase() {
            i += 1;
        }
        let sym = &s[start..i];
        if !elements::is_valid_symbol(sym) {
            return None;
        }
        let num_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        let count = if num_start == i {
            1
        } else {
            s[num_start..i].parse::<u64>().ok()?
        };
        if count == 0 {
            return None;
        }
        *counts.entry(sym.to_string()).or_insert(0) += count;
    }
    if counts.is_empty() {
        None
    } else {
        Some(counts)
    }
}

/// True when a formula string reduces to the same composition as the given
/// site counts. Unparseable formulas are accepted (no basis to reject).
pub fn formula_matches(formula: &str, site_counts: &BTreeMap<String, u64>) -> bool {
    match parse_formula(formula.trim()) {
        Some(parsed) => reduce_counts(&parsed) == reduce_counts(site_counts),
        None => true,
    }
}

fn reduce_counts(counts: &BTreeMap<String, u64>) -> BTreeMap<String, u64> {
    let g = counts.values().fold(0u64, |acc, &v| gcd(acc, v));
    counts
        .iter()
        .map(|(k, &v)| (k.clone(), v.checked_div(g).unwrap_or(v)))
        .collect()
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeParams;

    fn cubic(a: f64) -> LatticeMatrix {
        LatticeParams::new(a, a, a, 90.0, 90.0, 90.0)
            .unwrap()
            .to_matrix()
            .unwrap()
    }

    fn nb3sn() -> Crystal {
        Crystal::new(
            vec!["Sn".into(), "Nb".into(), "Nb".into(), "Nb".into()],
            vec![
                [0.0, 0.0, 0.0],
                [0.0, 0.5, 0.5],
                [0.5, 0.0, 0.5],
                [0.5, 0.5, 0.0],
            ],
            cubic(5.32),
            "test",
        )
        .unwrap()
    }

    #[test]
    fn wraps_coordinates_at_construction() {
        let c = Crystal::new(
            vec!["H".into()],
            vec![[1.25, -0.25, 1.0]],
            cubic(2.0),
            "test",
        )
        .unwrap();
        assert_eq!(c.frac_coords()[0], [0.25, 0.75, 0.0]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Crystal::new(vec![], vec![], cubic(2.0), "t").is_err());
        assert!(Crystal::new(vec!["H".into()], vec![], cubic(2.0), "t").is_err());
        assert!(Crystal::new(vec!["Xq".into()], vec![[0.0; 3]], cubic(2.0), "t").is_err());
        assert!(
            Crystal::new(vec!["H".into()], vec![[f64::NAN, 0.0, 0.0]], cubic(2.0), "t").is_err()
        );
    }

    #[test]
    fn reduced_formula_is_alphabetical_and_gcd_reduced() {
        assert_eq!(nb3sn().reduced_formula(), "Nb3Sn");
        let c = Crystal::new(
            vec!["O".into(), "H".into(), "H".into(), "O".into(), "H".into(), "H".into()],
            vec![[0.0; 3], [0.1; 3], [0.2; 3], [0.3; 3], [0.4; 3], [0.5; 3]],
            cubic(8.0),
            "t",
        )
        .unwrap();
        assert_eq!(c.reduced_formula(), "H2O");
    }

    #[test]
    fn formula_parsing() {
        let f = parse_formula("YBa2Cu3O7").unwrap();
        assert_eq!(f["Y"], 1);
        assert_eq!(f["Ba"], 2);
        assert_eq!(f["Cu"], 3);
        assert_eq!(f["O"], 7);
        assert!(parse_formula("").is_none());
        assert!(parse_formula("xH2").is_none());
        assert!(parse_formula("Xq3").is_none());
        assert!(parse_formula("H0").is_none());
        // multiset consistency up to reduction
        assert!(formula_matches("Nb3Sn", &nb3sn().species_counts()));
        assert!(formula_matches("Nb6Sn2", &nb3sn().species_counts()));
        assert!(!formula_matches("NbSn", &nb3sn().species_counts()));
        // unparseable strings are not grounds for rejection
        assert!(formula_matches("(TaNb)0.5", &nb3sn().species_counts()));
    }

    #[test]
    fn flipped_basis_preserves_geometry() {
        let rows = [[2.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, -2.0]];
        let c = Crystal::from_raw_basis(
            vec!["H".into()],
            vec![[0.25, 0.25, 0.25]],
            rows,
            "t",
        )
        .unwrap();
        assert!(c.lattice().was_flipped());
        // The site must stay where the original basis put it, modulo
        // lattice translations: (0.25, 0.25, 0.25)·orig = (0.5, 0.5, -0.5).
        let orig_frac = c.lattice().frac_from_cart([0.5, 0.5, -0.5]);
        let (_, d) = c.lattice().min_image(orig_frac, c.frac_coords()[0]);
        assert!(d < 1e-12, "site moved by {d} Å");
    }

    #[test]
    fn niggli_reduction_preserves_sites() {
        // build a skewed supercell-ish basis around Nb3Sn sites
        let raw = Crystal::new(
            vec!["Sn".into(), "Nb".into()],
            vec![[0.1, 0.2, 0.3], [0.7, 0.6, 0.9]],
            LatticeMatrix::new([[4.0, 0.0, 0.0], [0.2, 3.8, 0.0], [4.1, 3.9, 5.0]]).unwrap(),
            "t",
        )
        .unwrap();
        let (red, info) = raw.niggli_reduced(1e-5, 100).unwrap();
        assert_eq!(red.n_sites(), raw.n_sites());
        assert!((red.lattice().volume() - raw.lattice().volume()).abs() < 1e-8);
        assert!(info.iterations >= 1);
        // every original site must coincide with its reduced image modulo
        // the (identical) lattice
        for i in 0..raw.n_sites() {
            let orig_cart = raw.lattice().cart_from_frac(raw.frac_coords()[i]);
            let back = red.lattice().frac_from_cart(orig_cart);
            let (_, d) = red.lattice().min_image(back, red.frac_coords()[i]);
            assert!(d < 1e-8, "site {i} moved by {d} Å");
        }
    }
}
