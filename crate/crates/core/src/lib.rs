//! Benchmark library for inverse crystal-structure generation.
//!
//! Everything needed to score a set of predicted crystals against a
//! ground-truth dataset: lattice math ([`lattice`]), Niggli canonicalization
//! ([`niggli`]), structure and dataset I/O ([`poscar`], [`atomgpt`],
//! [`dataset`], [`fetch`]), the deterministic split protocol ([`split`],
//! [`pairing`]), the metric suite ([`metrics`]), dataset statistics
//! ([`stats`]), and report emission ([`report`]).
//!
//! Determinism is a design requirement throughout: identical inputs must
//! produce byte-identical serialized outputs, across platforms and runs.
//! All randomness is confined to the documented PRNG in [`split`], all
//! aggregation happens in canonical orders, and emitted text contains no
//! timestamps or filesystem paths.

pub mod atomgpt;
pub mod crystal;
pub mod dataset;
pub mod elements;
pub mod error;
pub mod fetch;
pub mod fsutil;
pub mod lattice;
pub mod metrics;
pub mod niggli;
pub mod pairing;
pub mod poscar;
pub mod report;
pub mod split;
pub mod stats;

/// Schema tag embedded in split JSON files.
pub const SCHEMA_SPLIT: &str = "split/v1";
/// Schema tag embedded in metric reports.
pub const SCHEMA_REPORT: &str = "report/v1";
/// Schema tag embedded in stats JSON files.
pub const SCHEMA_STATS: &str = "stats/v1";
/// Version of the canonical dataset JSON layout (a bare array by design;
/// the tag appears in sibling meta files, not in the array itself).
pub const SCHEMA_CANONICAL: &str = "canonical/v1";
