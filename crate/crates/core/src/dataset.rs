//! Dataset ingestion: the canonical JSON layout plus adapters for the two
//! upstream archive formats.
//!
//! Canonical layout (the `generic` schema, what `ingest` writes): a bare
//! JSON array of objects
//! `{"id", "formula", "tc_k", "lattice_abc", "lattice_angles", "species",
//! "frac_coords"}` — UTF-8, finite numbers only, coordinates fractional.
//!
//! Upstream adapters (field mappings documented in the README):
//! - `jarvis`: entries shaped like `Atoms.to_dict()` dumps —
//!   `jid`, `atoms: {lattice_mat, coords, elements, cartesian}`,
//!   `Tc_supercon`. Cartesian records are converted to fractional on the
//!   way in.
//! - `alexandria`: pymatgen `Structure.as_dict()` shapes —
//!   `structure: {lattice: {matrix}, sites: [{species: [{element, occu}],
//!   abc}]}` with tolerant aliases for the id and Tc keys.
//!
//! Per-record problems never abort a load: bad records land in a rejects
//! report with their index, id (when recoverable), and reason. File-level
//! problems (unreadable file, top level not an array) are hard errors.

use std::collections::BTreeSet;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::crystal::{formula_matches, Crystal};
use crate::error::{Result, XtalError};
use crate::lattice::LatticeParams;

/// Which field mapping to use when reading a dataset file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetSchema {
    Jarvis,
    Alexandria,
    Generic,
}

impl FromStr for DatasetSchema {
    type Err = XtalError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jarvis" => Ok(DatasetSchema::Jarvis),
            "alexandria" => Ok(DatasetSchema::Alexandria),
            "generic" => Ok(DatasetSchema::Generic),
            other => Err(XtalError::InvalidConfig(format!(
                "unknown dataset schema {other:?} (expected jarvis, alexandria, or generic)"
            ))),
        }
    }
}

impl std::fmt::Display for DatasetSchema {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DatasetSchema::Jarvis => "jarvis",
            DatasetSchema::Alexandria => "alexandria",
            DatasetSchema::Generic => "generic",
        })
    }
}

/// One validated dataset entry.
#[derive(Debug, Clone)]
pub struct DatasetRecord {
    pub id: String,
    /// Reduced formula, consistent with the structure's site list.
    pub formula: String,
    /// Superconducting critical temperature label, K, ≥ 0.
    pub tc_k: f64,
    pub structure: Crystal,
}

/// One record that failed validation, kept for the rejects report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RejectedRecord {
    /// 0-based index in the source array.
    pub index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub reason: String,
}

/// Result of loading a dataset: records + rejects. The invariant
/// `records.len() + rejects.len() == source array length` always holds.
#[derive(Debug, Default)]
pub struct IngestReport {
    pub records: Vec<DatasetRecord>,
    pub rejects: Vec<RejectedRecord>,
}

/// The canonical on-disk record shape.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CanonicalRecord {
    pub id: String,
    pub formula: String,
    pub tc_k: f64,
    pub lattice_abc: [f64; 3],
    pub lattice_angles: [f64; 3],
    pub species: Vec<String>,
    pub frac_coords: Vec<[f64; 3]>,
}

/// Load and validate a dataset file under the given schema.
pub fn load_dataset(path: &Path, schema: DatasetSchema) -> Result<IngestReport> {
    let text = crate::fsutil::read_text(path)?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| XtalError::Schema(format!("{} is not valid JSON: {e}", path.display())))?;
    parse_entries(&value, schema)
}

/// Parse an already-deserialized top-level value (must be an array).
pub fn parse_entries(value: &Value, schema: DatasetSchema) -> Result<IngestReport> {
    let entries = value
        .as_array()
        .ok_or_else(|| XtalError::Schema("top level must be a JSON array of records".into()))?;
    let mut report = IngestReport::default();
    let mut seen_ids: BTreeSet<String> = BTreeSet::new();
    for (index, entry) in entries.iter().enumerate() {
        let id_hint = probe_id(entry, schema);
        let parsed = match schema {
            DatasetSchema::Generic => record_from_generic(entry),
            DatasetSchema::Jarvis => record_from_jarvis(entry),
            DatasetSchema::Alexandria => record_from_alexandria(entry),
        };
        match parsed {
            Ok(rec) => {
                if !seen_ids.insert(rec.id.clone()) {
                    report.rejects.push(RejectedRecord {
                        index,
                        id: Some(rec.id.clone()),
                        reason: format!("duplicate id {:?}", rec.id),
                    });
                } else {
                    report.records.push(rec);
                }
            }
            Err(e) => report.rejects.push(RejectedRecord {
                index,
                id: id_hint,
                reason: e.to_string(),
            }),
        }
    }
    Ok(report)
}

/// Convert records back to the canonical shape (lattice as parameters).
pub fn to_canonical(records: &[DatasetRecord]) -> Result<Vec<CanonicalRecord>> {
    records
        .iter()
        .map(|r| {
            let p = r.structure.lattice().params()?;
            Ok(CanonicalRecord {
                id: r.id.clone(),
                formula: r.formula.clone(),
                tc_k: r.tc_k,
                lattice_abc: p.lengths(),
                lattice_angles: p.angles(),
                species: r.structure.species().to_vec(),
                frac_coords: r.structure.frac_coords().to_vec(),
            })
        })
        .collect()
}

/// Serialize records as canonical JSON (pretty-printed, deterministic
/// field order). All numbers are guaranteed finite by construction.
pub fn write_canonical(records: &[DatasetRecord]) -> Result<String> {
    let canon = to_canonical(records)?;
    serde_json::to_string_pretty(&canon)
        .map_err(|e| XtalError::Schema(format!("serialization failed: {e}")))
}

// ---- field plumbing ------------------------------------------------------

fn field<'a>(v: &'a Value, name: &str) -> Result<&'a Value> {
    v.get(name)
        .filter(|x| !x.is_null())
        .ok_or_else(|| XtalError::Schema(format!("missing field {name:?}")))
}

fn first_field<'a, 'n>(v: &'a Value, names: &[&'n str]) -> Result<(&'n str, &'a Value)> {
    for &name in names {
        if let Some(x) = v.get(name) {
            if !x.is_null() {
                return Ok((name, x));
            }
        }
    }
    Err(XtalError::Schema(format!(
        "none of the fields {names:?} present"
    )))
}

fn as_str(v: &Value, what: &str) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        // tolerate numeric ids
        Value::Number(n) => Ok(n.to_string()),
        _ => Err(XtalError::Schema(format!("field {what:?} must be a string"))),
    }
}

fn as_f64(v: &Value, what: &str) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| XtalError::Schema(format!("field {what:?} must be a finite number")))
}

fn as_vec3(v: &Value, what: &str) -> Result<[f64; 3]> {
    let arr = v
        .as_array()
        .ok_or_else(|| XtalError::Schema(format!("field {what:?} must be an array of 3 numbers")))?;
    if arr.len() != 3 {
        return Err(XtalError::Schema(format!(
            "field {what:?} must have 3 entries, found {}",
            arr.len()
        )));
    }
    Ok([
        as_f64(&arr[0], what)?,
        as_f64(&arr[1], what)?,
        as_f64(&arr[2], what)?,
    ])
}

fn as_matrix3(v: &Value, what: &str) -> Result<[[f64; 3]; 3]> {
    let arr = v
        .as_array()
        .ok_or_else(|| XtalError::Schema(format!("field {what:?} must be a 3×3 array")))?;
    if arr.len() != 3 {
        return Err(XtalError::Schema(format!(
            "field {what:?} must have 3 rows, found {}",
            arr.len()
        )));
    }
    Ok([
        as_vec3(&arr[0], what)?,
        as_vec3(&arr[1], what)?,
        as_vec3(&arr[2], what)?,
    ])
}

/// Best-effort id extraction for reject reporting (never errors).
fn probe_id(entry: &Value, schema: DatasetSchema) -> Option<String> {
    let keys: &[&str] = match schema {
        DatasetSchema::Jarvis => &["jid", "id"],
        DatasetSchema::Alexandria => &["id", "mat_id", "material_id"],
        DatasetSchema::Generic => &["id"],
    };
    keys.iter()
        .find_map(|k| entry.get(k))
        .and_then(|v| as_str(v, "id").ok())
}

// ---- validation common to every adapter ----------------------------------

fn validate_record(
    id: String,
    formula: Option<String>,
    tc_k: f64,
    structure: Crystal,
) -> Result<DatasetRecord> {
    if id.trim().is_empty() {
        return Err(XtalError::Schema("empty id".into()));
    }
    if !(tc_k.is_finite() && tc_k >= 0.0) {
        return Err(XtalError::Schema(format!("tc {tc_k} must be finite and ≥ 0")));
    }
    let counts = structure.species_counts();
    let formula = match formula {
        Some(f) if !f.trim().is_empty() => {
            if !formula_matches(&f, &counts) {
                return Err(XtalError::Schema(format!(
                    "formula {f:?} disagrees with the site list ({})",
                    structure.reduced_formula()
                )));
            }
            structure.reduced_formula()
        }
        _ => structure.reduced_formula(),
    };
    Ok(DatasetRecord {
        id,
        formula,
        tc_k,
        structure,
    })
}

// ---- adapters -------------------------------------------------------------

fn record_from_generic(entry: &Value) -> Result<DatasetRecord> {
    let rec: CanonicalRecord = serde_json::from_value(entry.clone())
        .map_err(|e| XtalError::Schema(format!("canonical record: {e}")))?;
    let params = LatticeParams::new(
        rec.lattice_abc[0],
        rec.lattice_abc[1],
        rec.lattice_abc[2],
        rec.lattice_angles[0],
        rec.lattice_angles[1],
        rec.lattice_angles[2],
    )?;
    let matrix = params.to_matrix()?;
    let provenance = format!("generic:{}", rec.id);
    let structure = Crystal::new(rec.species, rec.frac_coords, matrix, provenance)?;
    validate_record(rec.id, Some(rec.formula), rec.tc_k, structure)
}

fn record_from_jarvis(entry: &Value) -> Result<DatasetRecord> {
    let (_, idv) = first_field(entry, &["jid", "id"])?;
    let id = as_str(idv, "jid")?;
    let (tc_name, tcv) = first_field(entry, &["Tc_supercon", "tc_k", "tc"])?;
    let tc_k = as_f64(tcv, tc_name)?;
    let atoms = field(entry, "atoms")?;
    let rows = as_matrix3(field(atoms, "lattice_mat")?, "atoms.lattice_mat")?;
    let elements_v = field(atoms, "elements")?
        .as_array()
        .ok_or_else(|| XtalError::Schema("field \"atoms.elements\" must be an array".into()))?;
    let coords_v = field(atoms, "coords")?
        .as_array()
        .ok_or_else(|| XtalError::Schema("field \"atoms.coords\" must be an array".into()))?;
    if elements_v.len() != coords_v.len() {
        return Err(XtalError::Schema(format!(
            "atoms.elements has {} entries but atoms.coords has {}",
            elements_v.len(),
            coords_v.len()
        )));
    }
    let species: Vec<String> = elements_v
        .iter()
        .map(|e| as_str(e, "atoms.elements[]"))
        .collect::<Result<_>>()?;
    let raw_coords: Vec<[f64; 3]> = coords_v
        .iter()
        .map(|x| as_vec3(x, "atoms.coords[]"))
        .collect::<Result<_>>()?;
    let cartesian = match atoms.get("cartesian") {
        None | Some(Value::Null) => false,
        Some(Value::Bool(b)) => *b,
        Some(_) => {
            return Err(XtalError::Schema(
                "field \"atoms.cartesian\" must be a boolean".into(),
            ))
        }
    };
    let frac = if cartesian {
        let m = crate::lattice::LatticeMatrix::new(rows)?;
        raw_coords.iter().map(|&x| m.frac_from_cart(x)).collect()
    } else {
        raw_coords
    };
    let formula = entry
        .get("formula")
        .and_then(|v| v.as_str())
        .map(str::to_string);
    let structure = Crystal::from_raw_basis(species, frac, rows, format!("jarvis:{id}"))?;
    validate_record(id, formula, tc_k, structure)
}

fn record_from_alexandria(entry: &Value) -> Result<DatasetRecord> {
    let (_, idv) = first_field(entry, &["id", "mat_id", "material_id"])?;
    let id = as_str(idv, "id")?;
    let (tc_name, tcv) = first_field(entry, &["tc_k", "Tc_supercon", "Tc", "tc"])?;
    let tc_k = as_f64(tcv, tc_name)?;
    // the structure dict is either nested or the entry itself
    let structure_v = if entry.get("structure").is_some() {
        field(entry, "structure")?
    } else if entry.get("lattice").is_some() && entry.get("sites").is_some() {
        entry
    } else {
        return Err(XtalError::Schema("missing field \"structure\"".into()));
    };
    let lattice = field(structure_v, "lattice")?;
    let rows = as_matrix3(field(lattice, "matrix")?, "structure.lattice.matrix")?;
    let sites = field(structure_v, "sites")?
        .as_array()
        .ok_or_else(|| XtalError::Schema("field \"structure.sites\" must be an array".into()))?;
    if sites.is_empty() {
        return Err(XtalError::Schema("structure has no sites".into()));
    }
    let mut species = Vec::with_capacity(sites.len());
    let mut coords = Vec::with_capacity(sites.len());
    for (i, site) in sites.iter().enumerate() {
        let sp = field(site, "species")?
            .as_array()
            .ok_or_else(|| XtalError::Schema(format!("sites[{i}].species must be an array")))?;
        if sp.len() != 1 {
            return Err(XtalError::Schema(format!(
                "sites[{i}] is disordered ({} species entries); only ordered structures are supported",
                sp.len()
            )));
        }
        let occu = sp[0].get("occu").map(|v| as_f64(v, "occu")).transpose()?.unwrap_or(1.0);
        if (occu - 1.0).abs() > 1e-6 {
            return Err(XtalError::Schema(format!(
                "sites[{i}] has partial occupancy {occu}; only ordered structures are supported"
            )));
        }
        species.push(as_str(field(&sp[0], "element")?, "element")?);
        coords.push(as_vec3(field(site, "abc")?, "sites[].abc")?);
    }
    let formula = entry
        .get("formula")
        .and_then(|v| v.as_str())
        .map(str::to_string);
    let structure = Crystal::from_raw_basis(species, coords, rows, format!("alexandria:{id}"))?;
    validate_record(id, formula, tc_k, structure)
}
