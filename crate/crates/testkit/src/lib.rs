//! Test-only support: deterministic random generators for fixtures and
//! independent brute-force oracles that the property/acceptance suites
//! compare against the real implementations.
//!
//! Nothing here may call the code path it is meant to check: the basis
//! minimizer enumerates integer transforms instead of running the
//! reduction, and the matching oracle enumerates permutations instead of
//! running the assignment solver. Distances are computed with the same
//! public geometry primitives both routes share by definition.

use xtalbench_core::crystal::Crystal;
use xtalbench_core::error::Result;
use xtalbench_core::lattice::{wrap_frac, LatticeMatrix, LatticeParams};
use xtalbench_core::split::SplitMix64;

/// Deterministic RNG for fixtures, seeded per test so failures reproduce.
pub struct TestRng {
    inner: SplitMix64,
    gauss_spare: Option<f64>,
}

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng {
            inner: SplitMix64::new(seed),
            gauss_spare: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in [0, 1).
    pub fn f64(&mut self) -> f64 {
        self.inner.next_f64()
    }

    /// Uniform in [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + self.f64() * (hi - lo)
    }

    /// Uniform integer in [0, n).
    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    /// Standard normal via Box–Muller (the spare cosine value is cached).
    pub fn gaussian(&mut self) -> f64 {
        if let Some(z) = self.gauss_spare.take() {
            return z;
        }
        // u1 in (0,1] so the log is finite
        let u1 = 1.0 - self.f64();
        let u2 = self.f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.gauss_spare = Some(r * theta.cos());
        r * theta.sin()
    }
}

/// Palette used by the random-structure generators.
pub const SPECIES_PALETTE: [&str; 10] = ["Al", "C", "Cu", "Fe", "H", "N", "Nb", "O", "Sn", "Ti"];

/// A random valid parameter set: lengths in [2, 12) Å, angles in
/// [50, 130)°, re-drawn until the triple closes a positive-volume cell.
pub fn random_lattice_params(rng: &mut TestRng) -> LatticeParams {
    loop {
        let a = rng.range(2.0, 12.0);
        let b = rng.range(2.0, 12.0);
        let c = rng.range(2.0, 12.0);
        let alpha = rng.range(50.0, 130.0);
        let beta = rng.range(50.0, 130.0);
        let gamma = rng.range(50.0, 130.0);
        if let Ok(p) = LatticeParams::new(a, b, c, alpha, beta, gamma) {
            return p;
        }
    }
}

/// A random crystal with 1..=max_sites sites on the palette.
pub fn random_cell(rng: &mut TestRng, max_sites: usize) -> Crystal {
    let matrix = random_lattice_params(rng).to_matrix().expect("valid params");
    let n = 1 + rng.below(max_sites);
    let species = (0..n)
        .map(|_| SPECIES_PALETTE[rng.below(SPECIES_PALETTE.len())].to_string())
        .collect();
    let coords = (0..n).map(|_| [rng.f64(), rng.f64(), rng.f64()]).collect();
    Crystal::new(species, coords, matrix, "testkit").expect("valid cell")
}

/// A uniformly random rotation matrix (unit quaternion method).
pub fn random_rotation(rng: &mut TestRng) -> [[f64; 3]; 3] {
    // Marsaglia-style: draw a 4-vector of gaussians, normalize
    let (mut w, mut x, mut y, mut z);
    loop {
        w = rng.gaussian();
        x = rng.gaussian();
        y = rng.gaussian();
        z = rng.gaussian();
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if n > 1e-9 {
            w /= n;
            x /= n;
            y /= n;
            z /= n;
            break;
        }
    }
    [
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
        ],
        [
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
        ],
        [
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ]
}

/// Rotate a basis: rows transform as v ↦ v·R (row-vector convention).
pub fn rotate_rows(rows: [[f64; 3]; 3], r: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in rows.iter().enumerate() {
        for j in 0..3 {
            out[i][j] = row[0] * r[0][j] + row[1] * r[1][j] + row[2] * r[2][j];
        }
    }
    out
}

/// A random unimodular transform that is a product of at most two unit
/// shears (entries stay within {−2..2}), optionally composed with a row
/// permutation of determinant +1. Skews a basis without changing the
/// lattice — the starting point for reduction round-trip tests.
pub fn random_unimodular_skew(rng: &mut TestRng) -> [[i64; 3]; 3] {
    let mut t = [[1i64, 0, 0], [0, 1, 0], [0, 0, 1]];
    let n_shears = rng.below(3); // 0, 1, or 2
    for _ in 0..n_shears {
        let mut shear = [[1i64, 0, 0], [0, 1, 0], [0, 0, 1]];
        let i = rng.below(3);
        let mut j = rng.below(3);
        while j == i {
            j = rng.below(3);
        }
        shear[i][j] = if rng.below(2) == 0 { 1 } else { -1 };
        t = mat_mul_i64(shear, t);
    }
    if rng.below(2) == 0 {
        // cyclic permutation, det +1
        let cycle = [[0i64, 1, 0], [0, 0, 1], [1, 0, 0]];
        t = mat_mul_i64(cycle, t);
    }
    t
}

pub fn mat_mul_i64(a: [[i64; 3]; 3], b: [[i64; 3]; 3]) -> [[i64; 3]; 3] {
    let mut out = [[0i64; 3]; 3];
    for (i, arow) in a.iter().enumerate() {
        for j in 0..3 {
            out[i][j] = arow[0] * b[0][j] + arow[1] * b[1][j] + arow[2] * b[2][j];
        }
    }
    out
}

pub fn det3_i64(m: [[i64; 3]; 3]) -> i64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Apply an integer transform to basis rows: L' = T·L.
pub fn transform_rows(t: [[i64; 3]; 3], rows: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for (i, trow) in t.iter().enumerate() {
        for j in 0..3 {
            out[i][j] = trow[0] as f64 * rows[0][j]
                + trow[1] as f64 * rows[1][j]
                + trow[2] as f64 * rows[2][j];
        }
    }
    out
}

/// Brute-force oracle for the reduction: the minimal a²+b²+c² over all
/// bases T·L with T unimodular and entries in {−2..2}.
///
/// Enumerates the 125 candidate coefficient vectors, sorts them by the
/// norm of the lattice vector they generate, and searches row triples in
/// that order with branch-and-bound (prune when the partial sum plus the
/// best possible completions cannot beat the incumbent), accepting a
/// triple only when its integer determinant is ±1. Completely independent
/// of the reduction implementation.
pub fn brute_force_min_basis_norm2(rows: [[f64; 3]; 3]) -> f64 {
    // all coefficient vectors except zero
    let mut candidates: Vec<([i64; 3], f64)> = Vec::with_capacity(124);
    for ci in -2i64..=2 {
        for cj in -2i64..=2 {
            for ck in -2i64..=2 {
                if ci == 0 && cj == 0 && ck == 0 {
                    continue;
                }
                let v = [
                    ci as f64 * rows[0][0] + cj as f64 * rows[1][0] + ck as f64 * rows[2][0],
                    ci as f64 * rows[0][1] + cj as f64 * rows[1][1] + ck as f64 * rows[2][1],
                    ci as f64 * rows[0][2] + cj as f64 * rows[1][2] + ck as f64 * rows[2][2],
                ];
                let n2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
                candidates.push(([ci, cj, ck], n2));
            }
        }
    }
    candidates.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());

    let det2 = |a: [i64; 3], b: [i64; 3]| {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    };
    let mut best = f64::INFINITY;
    for (i, &(vi, ni)) in candidates.iter().enumerate() {
        if ni * 3.0 >= best {
            break; // every later row is at least this long
        }
        for (j, &(vj, nj)) in candidates.iter().enumerate().skip(i + 1) {
            if ni + nj * 2.0 >= best {
                break;
            }
            let cross = det2(vi, vj);
            if cross == [0, 0, 0] {
                continue; // collinear coefficients can never complete
            }
            for &(vk, nk) in candidates.iter().skip(j + 1) {
                let sum = ni + nj + nk;
                if sum >= best {
                    break;
                }
                let det = cross[0] * vk[0] + cross[1] * vk[1] + cross[2] * vk[2];
                if det == 1 || det == -1 {
                    best = sum;
                    break; // rows are norm-sorted; later k only grows
                }
            }
        }
    }
    best
}

/// Brute-force oracle for atom matching: the minimal total squared
/// min-image distance over all per-species permutations. Enumerates
/// permutations explicitly (intended for ≤6 sites per species).
pub fn brute_force_match_cost(truth: &Crystal, pred: &Crystal) -> f64 {
    use std::collections::BTreeMap;
    let mut truth_by: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, s) in truth.species().iter().enumerate() {
        truth_by.entry(s).or_default().push(i);
    }
    let mut pred_by: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (j, s) in pred.species().iter().enumerate() {
        pred_by.entry(s).or_default().push(j);
    }
    assert_eq!(
        truth_by.keys().collect::<Vec<_>>(),
        pred_by.keys().collect::<Vec<_>>(),
        "oracle requires equal species multisets"
    );

    let mut total = 0.0;
    for (el, t_idx) in &truth_by {
        let p_idx = &pred_by[el];
        assert_eq!(t_idx.len(), p_idx.len());
        let n = t_idx.len();
        let cost: Vec<Vec<f64>> = t_idx
            .iter()
            .map(|&ti| {
                p_idx
                    .iter()
                    .map(|&pj| {
                        let (_, d) = truth
                            .lattice()
                            .min_image(truth.frac_coords()[ti], pred.frac_coords()[pj]);
                        d * d
                    })
                    .collect()
            })
            .collect();
        let mut best = f64::INFINITY;
        let mut perm: Vec<usize> = (0..n).collect();
        permute(&mut perm, 0, &mut |p| {
            let c: f64 = p.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
            if c < best {
                best = c;
            }
        });
        total += best;
    }
    total
}

/// Heap-style permutation enumeration via recursion with swaps.
fn permute(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// Gaussian jitter of every site, σ per Cartesian component, producing
/// the prediction for RMSE calibration tests.
pub fn jitter_sites(cell: &Crystal, sigma: f64, rng: &mut TestRng) -> Result<Crystal> {
    let mut coords = Vec::with_capacity(cell.n_sites());
    for f in cell.frac_coords() {
        let cart = cell.lattice().cart_from_frac(*f);
        let jittered = [
            cart[0] + sigma * rng.gaussian(),
            cart[1] + sigma * rng.gaussian(),
            cart[2] + sigma * rng.gaussian(),
        ];
        let frac = cell.lattice().frac_from_cart(jittered);
        coords.push([wrap_frac(frac[0]), wrap_frac(frac[1]), wrap_frac(frac[2])]);
    }
    Crystal::new(
        cell.species().to_vec(),
        coords,
        *cell.lattice(),
        "testkit:jitter",
    )
}

/// Construct a LatticeMatrix from rows, panicking on degenerate input —
/// fixture code shouldn't propagate Results.
pub fn matrix(rows: [[f64; 3]; 3]) -> LatticeMatrix {
    LatticeMatrix::new(rows).expect("fixture basis must be valid")
}

// ---- minimal XML well-formedness checker (for the SVG emitters) --------

/// Validate basic XML well-formedness: balanced tags, quoted attribute
/// values, no stray `<` or raw `&` in text. Returns the first problem
/// found. Deliberately tiny — enough to catch emitter escaping bugs, not
/// a general parser.
pub fn check_xml(text: &str) -> std::result::Result<(), String> {
    let bytes = text.as_bytes();
    let mut i = 0usize;
    let mut stack: Vec<String> = Vec::new();
    let mut roots = 0usize;

    // optional XML declaration
    if text.starts_with("<?xml") {
        match text.find("?>") {
            Some(end) => i = end + 2,
            None => return Err("unterminated <?xml declaration".into()),
        }
    }

    while i < bytes.len() {
        match bytes[i] {
            b'<' => {
                if text[i..].starts_with("<!--") {
                    match text[i..].find("-->") {
                        Some(off) => i += off + 3,
                        None => return Err(format!("unterminated comment at byte {i}")),
                    }
                    continue;
                }
                let close = text[i..]
                    .find('>')
                    .ok_or_else(|| format!("unterminated tag at byte {i}"))?;
                let tag = &text[i + 1..i + close];
                i += close + 1;
                if let Some(name) = tag.strip_prefix('/') {
                    let name = name.trim();
                    match stack.pop() {
                        Some(open) if open == name => {}
                        Some(open) => {
                            return Err(format!("</{name}> closes <{open}>"));
                        }
                        None => return Err(format!("</{name}> with nothing open")),
                    }
                    if stack.is_empty() {
                        roots += 1;
                    }
                } else {
                    let self_closing = tag.ends_with('/');
                    let body = if self_closing { &tag[..tag.len() - 1] } else { tag };
                    let name = body
                        .split_ascii_whitespace()
                        .next()
                        .ok_or_else(|| format!("empty tag at byte {i}"))?;
                    check_attrs(body)?;
                    if self_closing {
                        if stack.is_empty() {
                            roots += 1;
                        }
                    } else {
                        stack.push(name.to_string());
                    }
                }
            }
            b'&' => {
                let rest = &text[i..];
                let semi = rest.find(';').unwrap_or(0);
                let entity = &rest[1..semi.clamp(1, 8)];
                if semi == 0
                    || semi > 7
                    || !matches!(entity, "amp" | "lt" | "gt" | "quot" | "apos")
                {
                    return Err(format!("raw ampersand at byte {i}"));
                }
                i += semi + 1;
            }
            b'>' => return Err(format!("stray '>' at byte {i}")),
            _ => i += 1,
        }
    }
    if let Some(open) = stack.pop() {
        return Err(format!("<{open}> never closed"));
    }
    if roots != 1 {
        return Err(format!("expected exactly 1 root element, found {roots}"));
    }
    Ok(())
}

/// Attribute syntax inside a tag body: name="value" pairs, values quoted,
/// no '<' or raw '&' inside values.
fn check_attrs(body: &str) -> std::result::Result<(), String> {
    let mut rest = match body.split_ascii_whitespace().next() {
        Some(name) => body[body.find(name).unwrap() + name.len()..].trim_start(),
        None => return Ok(()),
    };
    while !rest.is_empty() {
        let eq = rest
            .find('=')
            .ok_or_else(|| format!("attribute without value near {rest:?}"))?;
        let after = &rest[eq + 1..];
        let quote = after
            .chars()
            .next()
            .filter(|&c| c == '"' || c == '\'')
            .ok_or_else(|| format!("unquoted attribute value near {after:?}"))?;
        let end = after[1..]
            .find(quote)
            .ok_or_else(|| format!("unterminated attribute value near {after:?}"))?;
        let value = &after[1..end + 1];
        if value.contains('<') {
            return Err(format!("'<' inside attribute value {value:?}"));
        }
        rest = after[end + 2..].trim_start();
    }
    Ok(())
}
