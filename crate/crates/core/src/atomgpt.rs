//! Parser for the AtomGPT text-block structure format.
//!
//! Grammar (whitespace-delimited, blank lines ignored anywhere):
//! ```text
//! a b c            <- lattice lengths, Å
//! alpha beta gamma <- angles, degrees
//! El x y z         <- one line per site: element symbol + fractional coords
//! ...
//! ```
//! The lattice matrix is built with the standard orientation via
//! `LatticeParams::to_matrix`, so the block "5.32 5.32 5.32 / 90 90 90 /
//! Sn 0 0 0 / Nb 0 .5 .5 / ..." reproduces the cubic Nb3Sn cell exactly.

use crate::crystal::Crystal;
use crate::elements;
use crate::error::{Result, XtalError};
use crate::lattice::LatticeParams;

fn parse_err(line: usize, msg: impl Into<String>) -> XtalError {
    XtalError::Parse {
        line,
        msg: msg.into(),
    }
}

fn three_numbers(line_no: usize, line: &str, what: &str) -> Result<[f64; 3]> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    if toks.len() != 3 {
        return Err(parse_err(
            line_no,
            format!("{what} line needs exactly three values, found {}", toks.len()),
        ));
    }
    let mut out = [0.0; 3];
    for (slot, tok) in out.iter_mut().zip(&toks) {
        *slot = tok
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| parse_err(line_no, format!("non-numeric token {tok:?} in {what} line")))?;
    }
    Ok(out)
}

/// Parse an AtomGPT output block into a Crystal (provenance "atomgpt").
pub fn parse_atomgpt_block(text: &str) -> Result<Crystal> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    if lines.len() < 3 {
        return Err(parse_err(
            lines.last().map(|(n, _)| *n).unwrap_or(1),
            "block needs a lengths line, an angles line, and at least one site line",
        ));
    }

    let [a, b, c] = three_numbers(lines[0].0, lines[0].1, "lattice lengths")?;
    let [alpha, beta, gamma] = three_numbers(lines[1].0, lines[1].1, "lattice angles")?;
    let params = LatticeParams::new(a, b, c, alpha, beta, gamma)?;
    let matrix = params.to_matrix()?;

    let mut species = Vec::new();
    let mut coords = Vec::new();
    for (line_no, line) in &lines[2..] {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 4 {
            return Err(parse_err(
                *line_no,
                format!("site line needs `element x y z`, found {} tokens", toks.len()),
            ));
        }
        if !elements::is_valid_symbol(toks[0]) {
            return Err(parse_err(*line_no, format!("unknown element symbol {:?}", toks[0])));
        }
        species.push(toks[0].to_string());
        let mut f = [0.0; 3];
        for (slot, tok) in f.iter_mut().zip(&toks[1..]) {
            *slot = tok
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(*line_no, format!("non-numeric coordinate {tok:?}")))?;
        }
        coords.push(f);
    }

    Crystal::new(species, coords, matrix, "atomgpt")
}

#[cfg(test)]
mod tests {
    use super::*;

    const NB3SN: &str = "5.32 5.32 5.32\n90 90 90\nSn 0.000 0.000 0.000\nNb 0.000 0.500 0.500\nNb 0.500 0.000 0.500\nNb 0.500 0.500 0.000\n";

    #[test]
    fn parses_nb3sn_block_exactly() {
        let c = parse_atomgpt_block(NB3SN).unwrap();
        assert_eq!(c.n_sites(), 4);
        assert_eq!(
            c.species(),
            &["Sn".to_string(), "Nb".into(), "Nb".into(), "Nb".into()]
        );
        let p = c.lattice().params().unwrap();
        // parameters enter the matrix exactly; cubic means exact entries
        assert_eq!(p.a(), 5.32);
        assert_eq!(p.b(), 5.32);
        assert_eq!(p.c(), 5.32);
        assert!((p.alpha() - 90.0).abs() < 1e-12);
        assert_eq!(c.frac_coords()[0], [0.0, 0.0, 0.0]);
        assert_eq!(c.frac_coords()[1], [0.0, 0.5, 0.5]);
        assert_eq!(c.frac_coords()[2], [0.5, 0.0, 0.5]);
        assert_eq!(c.frac_coords()[3], [0.5, 0.5, 0.0]);
    }

    #[test]
    fn single_site_block() {
        let c = parse_atomgpt_block("1 1 1\n90 90 90\nH 0.0 0.0 0.0\n").unwrap();
        assert_eq!(c.n_sites(), 1);
    }

    #[test]
    fn whitespace_and_blank_lines_do_not_matter() {
        let messy = "\n  5.32   5.32\t5.32  \n\n90  90   90\nSn   0.000 0.000  0.000\n\nNb 0.000 0.500 0.500\nNb 0.500 0.000 0.500\n   Nb 0.500 0.500 0.000  \n\n";
        let a = parse_atomgpt_block(NB3SN).unwrap();
        let b = parse_atomgpt_block(messy).unwrap();
        assert_eq!(a.species(), b.species());
        assert_eq!(a.frac_coords(), b.frac_coords());
        assert_eq!(a.lattice().rows(), b.lattice().rows());
    }

    #[test]
    fn errors_are_specific() {
        assert!(matches!(
            parse_atomgpt_block("5.32 5.32\n90 90 90\nH 0 0 0"),
            Err(XtalError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_atomgpt_block("5 5 5\n90 90 90\nXx 0 0 0"),
            Err(XtalError::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse_atomgpt_block("5 5 5\n90 90 90\nH 0 zz 0"),
            Err(XtalError::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse_atomgpt_block("5 5 5\n90 90 90\n"),
            Err(XtalError::Parse { .. })
        ));
        // degenerate angles propagate as DegenerateCell
        assert!(matches!(
            parse_atomgpt_block("5 5 5\n10 10 170\nH 0 0 0"),
            Err(XtalError::DegenerateCell(_))
        ));
    }
}
