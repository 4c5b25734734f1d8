//! VASP POSCAR read/write, direct (fractional) coordinates only.
//!
//! The emitted layout is the 8-line header convention: comment line,
//! universal scale, three lattice rows, element-symbol line, counts line,
//! "Direct", then one coordinate line per site, all floats fixed to six
//! decimals. The writer groups sites by element in first-appearance order
//! (VASP requires contiguous species blocks); within a group the original
//! site order is kept.
//!
//! The parser is slightly more liberal than the writer: it accepts a
//! "Selective dynamics" line, ignores per-site trailing flags, and accepts
//! any capitalization of the Direct marker. Cartesian POSCARs are an
//! explicit UnsupportedFormat error, and VASP-4 files without the symbols
//! line are a ParseError — both out of scope by design.

use crate::crystal::Crystal;
use crate::elements;
use crate::error::{Result, XtalError};

fn parse_err(line: usize, msg: impl Into<String>) -> XtalError {
    XtalError::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_f64(tok: &str, line: usize, what: &str) -> Result<f64> {
    tok.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| parse_err(line, format!("{what}: cannot parse {tok:?} as a number")))
}

/// Parse POSCAR text into a Crystal. The comment line becomes the
/// provenance tag.
pub fn parse_poscar(text: &str) -> Result<Crystal> {
    // (1-based line number, content) — keep blank lines so numbering
    // matches the file, but skip leading blank lines entirely.
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .skip_while(|(_, l)| l.trim().is_empty());
    let mut next_nonblank = move || -> Option<(usize, &str)> {
        lines.by_ref().find(|(_, l)| !l.trim().is_empty())
    };

    let (_, comment) = next_nonblank().ok_or_else(|| parse_err(1, "empty POSCAR"))?;
    let provenance = comment.trim().to_string();

    let (ln, scale_line) = next_nonblank().ok_or_else(|| parse_err(2, "missing scale line"))?;
    let scale = parse_f64(scale_line.trim(), ln, "scale factor")?;
    if scale <= 0.0 {
        // negative scale means "target volume" in VASP; out of scope
        return Err(XtalError::UnsupportedFormat(format!(
            "non-positive scaling factor {scale} (volume scaling is not supported)"
        )));
    }

    let mut rows = [[0.0f64; 3]; 3];
    for row in &mut rows {
        let (ln, l) = next_nonblank().ok_or_else(|| parse_err(0, "missing lattice row"))?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() < 3 {
            return Err(parse_err(ln, "lattice row needs three components"));
        }
        for (k, slot) in row.iter_mut().enumerate() {
            *slot = parse_f64(toks[k], ln, "lattice component")? * scale;
        }
    }

    let (ln_sym, sym_line) = next_nonblank().ok_or_else(|| parse_err(0, "missing symbols line"))?;
    let symbols: Vec<&str> = sym_line.split_whitespace().collect();
    if symbols.iter().all(|t| t.parse::<u64>().is_ok()) {
        return Err(parse_err(
            ln_sym,
            "expected element symbols, found counts (VASP-4 POSCAR without a symbols line is not supported)",
        ));
    }
    for s in &symbols {
        if !elements::is_valid_symbol(s) {
            return Err(parse_err(ln_sym, format!("unknown element symbol {s:?}")));
        }
    }

    let (ln_cnt, cnt_line) = next_nonblank().ok_or_else(|| parse_err(0, "missing counts line"))?;
    let counts: Vec<u64> = cnt_line
        .split_whitespace()
        .map(|t| {
            t.parse::<u64>()
                .map_err(|_| parse_err(ln_cnt, format!("cannot parse count {t:?}")))
        })
        .collect::<Result<_>>()?;
    if counts.len() != symbols.len() {
        return Err(parse_err(
            ln_cnt,
            format!("{} counts for {} symbols", counts.len(), symbols.len()),
        ));
    }
    if counts.contains(&0) {
        return Err(parse_err(ln_cnt, "zero-count species group"));
    }

    let (ln_mode, mode_line) = next_nonblank().ok_or_else(|| parse_err(0, "missing coordinate mode"))?;
    let mut mode = mode_line.trim();
    let mut mode_ln = ln_mode;
    if mode.starts_with(['S', 's']) {
        // "Selective dynamics" — the real mode is on the next line
        let (ln2, l2) = next_nonblank().ok_or_else(|| parse_err(ln_mode, "missing coordinate mode after selective dynamics"))?;
        mode = l2.trim();
        mode_ln = ln2;
    }
    match mode.chars().next() {
        Some('D') | Some('d') => {}
        Some('C') | Some('c') | Some('K') | Some('k') => {
            return Err(XtalError::UnsupportedFormat(
                "Cartesian-coordinate POSCAR (only Direct is supported)".into(),
            ));
        }
        _ => return Err(parse_err(mode_ln, format!("unrecognized coordinate mode {mode:?}"))),
    }

    let n_sites: u64 = counts.iter().sum();
    let mut species = Vec::with_capacity(n_sites as usize);
    for (sym, &cnt) in symbols.iter().zip(&counts) {
        for _ in 0..cnt {
            species.push((*sym).to_string());
        }
    }
    let mut coords = Vec::with_capacity(n_sites as usize);
    for _ in 0..n_sites {
        let (ln, l) = next_nonblank()
            .ok_or_else(|| parse_err(mode_ln, format!("expected {n_sites} coordinate lines")))?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() < 3 {
            return Err(parse_err(ln, "coordinate line needs three components"));
        }
        // extra tokens (selective-dynamics flags) are ignored
        coords.push([
            parse_f64(toks[0], ln, "coordinate")?,
            parse_f64(toks[1], ln, "coordinate")?,
            parse_f64(toks[2], ln, "coordinate")?,
        ]);
    }

    Crystal::from_raw_basis(species, coords, rows, provenance)
}

/// Serialize a Crystal as POSCAR text. Sites are grouped by element in
/// first-appearance order; floats are fixed six decimals; the provenance
/// tag (or the reduced formula when empty) becomes the comment line.
pub fn write_poscar(c: &Crystal) -> String {
    // first-appearance grouping
    let mut order: Vec<&str> = Vec::new();
    for s in c.species() {
        if !order.contains(&s.as_str()) {
            order.push(s);
        }
    }
    let mut grouped: Vec<usize> = Vec::with_capacity(c.n_sites());
    let mut counts: Vec<(usize, usize)> = Vec::new(); // (order idx, count)
    for (gi, sym) in order.iter().enumerate() {
        let start = grouped.len();
        for (i, s) in c.species().iter().enumerate() {
            if s == sym {
                grouped.push(i);
            }
        }
        counts.push((gi, grouped.len() - start));
    }

    let comment = if c.provenance().is_empty() {
        c.reduced_formula()
    } else {
        // keep it one line
        c.provenance().replace(['\n', '\r'], " ")
    };

    let fmt = |v: f64| format!("{:>12.6}", v + 0.0); // +0.0 normalizes -0.0
    let mut out = String::new();
    out.push_str(&comment);
    out.push('\n');
    out.push_str("1.000000\n");
    for row in c.lattice().rows() {
        out.push_str(&format!("{} {} {}\n", fmt(row[0]), fmt(row[1]), fmt(row[2])));
    }
    out.push_str(&order.join(" "));
    out.push('\n');
    out.push_str(
        &counts
            .iter()
            .map(|(_, n)| n.to_string())
            .collect::<Vec<_>>()
            .join(" "),
    );
    out.push('\n');
    out.push_str("Direct\n");
    for &i in &grouped {
        let f = c.frac_coords()[i];
        out.push_str(&format!("{} {} {}\n", fmt(f[0]), fmt(f[1]), fmt(f[2])));
    }
    out
}
