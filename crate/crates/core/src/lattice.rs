//! Lattice cells in both common representations, plus the geometry used
//! everywhere else: parameter/matrix conversion, metric tensor, volume,
//! and minimum-image displacements.
//!
//! Conventions (fixed, so serialized cells are reproducible):
//! - [`LatticeParams`] carries the six scalars a, b, c (Å) and α, β, γ
//!   (degrees). Angles are degrees in every public signature; radians exist
//!   only inside function bodies.
//! - [`LatticeMatrix`] stores the three basis vectors as rows in Cartesian
//!   Å. [`LatticeParams::to_matrix`] places a along +x and b in the x-y
//!   plane (right-handed), which removes the rotational gauge freedom.
//! - Matrices are canonicalized right-handed at construction: a left-handed
//!   input gets its third row negated and the flip is recorded in a flag so
//!   callers holding fractional coordinates can compensate.

use serde::{Deserialize, Serialize};

use crate::error::{Result, XtalError};

/// Determinants at or below this magnitude (Å³) are degenerate.
pub const MIN_DET: f64 = 1e-12;

/// Row norms at or below this (Å) are degenerate.
pub const MIN_ROW_NORM: f64 = 1e-12;

const DEG: f64 = std::f64::consts::PI / 180.0;

/// One of the six lattice parameters, in canonical report order
/// a, b, c, alpha, beta, gamma.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    A,
    B,
    C,
    Alpha,
    Beta,
    Gamma,
}

impl Param {
    pub const ALL: [Param; 6] = [
        Param::A,
        Param::B,
        Param::C,
        Param::Alpha,
        Param::Beta,
        Param::Gamma,
    ];

    pub fn is_angle(self) -> bool {
        matches!(self, Param::Alpha | Param::Beta | Param::Gamma)
    }

    pub fn label(self) -> &'static str {
        match self {
            Param::A => "a",
            Param::B => "b",
            Param::C => "c",
            Param::Alpha => "alpha",
            Param::Beta => "beta",
            Param::Gamma => "gamma",
        }
    }

    /// Unit string for axis labels: Å for lengths, degrees for angles.
    pub fn unit(self) -> &'static str {
        if self.is_angle() {
            "deg"
        } else {
            "angstrom"
        }
    }
}

/// The six lattice parameters {a, b, c, α, β, γ}. Validated at
/// construction: positive lengths, angles in (0°, 180°), and an angle
/// triple that closes a positive-volume parallelepiped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeParams {
    a: f64,
    b: f64,
    c: f64,
    alpha: f64,
    beta: f64,
    gamma: f64,
}

impl LatticeParams {
    pub fn new(a: f64, b: f64, c: f64, alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let fields = [
            ("a", a),
            ("b", b),
            ("c", c),
            ("alpha", alpha),
            ("beta", beta),
            ("gamma", gamma),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(XtalError::NonFinite(format!("lattice parameter {name}")));
            }
        }
        for (name, v) in [("a", a), ("b", b), ("c", c)] {
            if v <= 0.0 {
                return Err(XtalError::DegenerateCell(format!(
                    "length {name} = {v} must be positive"
                )));
            }
        }
        for (name, v) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
            if v <= 0.0 || v >= 180.0 {
                return Err(XtalError::DegenerateCell(format!(
                    "angle {name} = {v}° outside (0°, 180°)"
                )));
            }
        }
        let p = LatticeParams {
            a,
            b,
            c,
            alpha,
            beta,
            gamma,
        };
        if p.volume_factor() <= 0.0 {
            return Err(XtalError::DegenerateCell(format!(
                "angle triple ({alpha}°, {beta}°, {gamma}°) is not positive definite"
            )));
        }
        Ok(p)
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn lengths(&self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }

    pub fn angles(&self) -> [f64; 3] {
        [self.alpha, self.beta, self.gamma]
    }

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

    /// 1 − cos²α − cos²β − cos²γ + 2·cosα·cosβ·cosγ. Positive iff the
    /// angles admit a real cell; volume = a·b·c·√(this).
    fn volume_factor(&self) -> f64 {
        let ca = (self.alpha * DEG).cos();
        let cb = (self.beta * DEG).cos();
        let cg = (self.gamma * DEG).cos();
        1.0 - ca * ca - cb * cb - cg * cg + 2.0 * ca * cb * cg
    }

    /// Closed-form cell volume in Å³.
    pub fn volume(&self) -> f64 {
        self.a * self.b * self.c * self.volume_factor().sqrt()
    }

    /// Standard-orientation basis: a along +x, b in the x-y plane, c
    /// completing a right-handed set.
    pub fn to_matrix(&self) -> Result<LatticeMatrix> {
        let ca = (self.alpha * DEG).cos();
        let cb = (self.beta * DEG).cos();
        let cg = (self.gamma * DEG).cos();
        let sg = (self.gamma * DEG).sin();
        if sg.abs() < 1e-12 {
            return Err(XtalError::DegenerateCell(format!(
                "gamma = {}° collapses the a-b plane",
                self.gamma
            )));
        }
        let bx = self.b * cg;
        let by = self.b * sg;
        let cx = self.c * cb;
        let cy = self.c * (ca - cb * cg) / sg;
        let cz2 = self.c * self.c - cx * cx - cy * cy;
        if cz2 <= 0.0 {
            return Err(XtalError::DegenerateCell(format!(
                "angle triple ({}°, {}°, {}°) is not positive definite",
                self.alpha, self.beta, self.gamma
            )));
        }
        LatticeMatrix::new([
            [self.a, 0.0, 0.0],
            [bx, by, 0.0],
            [cx, cy, cz2.sqrt()],
        ])
    }
}

/// A lattice basis: row i is lattice vector i, Cartesian components in Å.
/// Always right-handed after construction; see [`LatticeMatrix::was_flipped`].
#[derive(Debug, Clone, Copy)]
pub struct LatticeMatrix {
    rows: [[f64; 3]; 3],
    flipped: bool,
}

impl LatticeMatrix {
    /// Validates and canonicalizes a basis. Left-handed input (negative
    /// determinant) has its third row negated, recorded via the flipped
    /// flag; callers holding fractional coordinates must negate the third
    /// coordinate to keep the same Cartesian positions
    /// (see `Crystal::from_raw_basis`).
    pub fn new(rows: [[f64; 3]; 3]) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            for v in row {
                if !v.is_finite() {
                    return Err(XtalError::NonFinite(format!("lattice row {i}")));
                }
            }
            let n = norm(*row);
            if n <= MIN_ROW_NORM {
                return Err(XtalError::DegenerateCell(format!(
                    "lattice row {i} has near-zero norm {n:e}"
                )));
            }
        }
        let det = det3(&rows);
        if det.abs() <= MIN_DET {
            return Err(XtalError::DegenerateCell(format!(
                "lattice determinant {det:e} below {MIN_DET:e} Å³"
            )));
        }
        if det < 0.0 {
            let mut r = rows;
            for v in &mut r[2] {
                *v = -*v;
            }
            Ok(LatticeMatrix {
                rows: r,
                flipped: true,
            })
        } else {
            Ok(LatticeMatrix {
                rows,
                flipped: false,
            })
        }
    }

    pub fn rows(&self) -> [[f64; 3]; 3] {
        self.rows
    }

    pub fn row(&self, i: usize) -> [f64; 3] {
        self.rows[i]
    }

    /// True if construction had to flip the third axis to restore
    /// right-handedness.
    pub fn was_flipped(&self) -> bool {
        self.flipped
    }

    /// Determinant in Å³; positive by construction.
    pub fn determinant(&self) -> f64 {
        det3(&self.rows)
    }

    /// Cell volume |det| in Å³.
    pub fn volume(&self) -> f64 {
        self.determinant().abs()
    }

    /// Gram matrix G = M·Mᵀ (Å²). Symmetric positive definite for any
    /// accepted matrix.
    pub fn metric_tensor(&self) -> [[f64; 3]; 3] {
        let m = &self.rows;
        let mut g = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                g[i][j] = dot(m[i], m[j]);
            }
        }
        g
    }

    /// The six lattice parameters of this basis. Lengths are row norms;
    /// angles come from normalized dot products (arccos, degrees).
    pub fn params(&self) -> Result<LatticeParams> {
        let [r0, r1, r2] = self.rows;
        let (a, b, c) = (norm(r0), norm(r1), norm(r2));
        let angle = |u: [f64; 3], v: [f64; 3], nu: f64, nv: f64| -> f64 {
            (dot(u, v) / (nu * nv)).clamp(-1.0, 1.0).acos() / DEG
        };
        LatticeParams::new(
            a,
            b,
            c,
            angle(r1, r2, b, c),
            angle(r0, r2, a, c),
            angle(r0, r1, a, b),
        )
    }

    /// Cartesian position of a fractional coordinate: x = f · M
    /// (f is a row vector).
    pub fn cart_from_frac(&self, f: [f64; 3]) -> [f64; 3] {
        let m = &self.rows;
        [
            f[0] * m[0][0] + f[1] * m[1][0] + f[2] * m[2][0],
            f[0] * m[0][1] + f[1] * m[1][1] + f[2] * m[2][1],
            f[0] * m[0][2] + f[1] * m[1][2] + f[2] * m[2][2],
        ]
    }

    /// Inverse basis matrix (exists for every accepted matrix).
    pub fn inverse(&self) -> [[f64; 3]; 3] {
        inv3(&self.rows, self.determinant())
    }

    /// Fractional coordinate of a Cartesian position: f = x · M⁻¹.
    pub fn frac_from_cart(&self, x: [f64; 3]) -> [f64; 3] {
        let inv = self.inverse();
        [
            x[0] * inv[0][0] + x[1] * inv[1][0] + x[2] * inv[2][0],
            x[0] * inv[0][1] + x[1] * inv[1][1] + x[2] * inv[2][1],
            x[0] * inv[0][2] + x[1] * inv[1][2] + x[2] * inv[2][2],
        ]
    }

    /// Minimum-image displacement from `f1` to `f2` (fractional inputs,
    /// wrapped or not): Cartesian displacement vector and its norm in Å.
    ///
    /// Convention: the fractional difference is first wrapped componentwise
    /// into [−0.5, 0.5), then the Cartesian norm is minimized over the 27
    /// neighboring lattice translations of that wrapped difference. The
    /// componentwise wrap alone is exact only for near-orthogonal cells; the
    /// translation search makes the result exact for all compact
    /// (Niggli-reduced) cells and guarantees the distance never exceeds the
    /// unwrapped distance for any valid cell.
    pub fn min_image(&self, f1: [f64; 3], f2: [f64; 3]) -> ([f64; 3], f64) {
        let d = [
            wrap_half(f2[0] - f1[0]),
            wrap_half(f2[1] - f1[1]),
            wrap_half(f2[2] - f1[2]),
        ];
        let mut best_disp = self.cart_from_frac(d);
        let mut best_n2 = dot(best_disp, best_disp);
        for i in -1i32..=1 {
            for j in -1i32..=1 {
                for k in -1i32..=1 {
                    if i == 0 && j == 0 && k == 0 {
                        continue;
                    }
                    let shifted = [d[0] + i as f64, d[1] + j as f64, d[2] + k as f64];
                    let disp = self.cart_from_frac(shifted);
                    let n2 = dot(disp, disp);
                    if n2 < best_n2 {
                        best_n2 = n2;
                        best_disp = disp;
                    }
                }
            }
        }
        (best_disp, best_n2.sqrt())
    }
}

/// Wrap into [0, 1). −0.0 and exact 1.0 both map to 0.0.
pub fn wrap_frac(x: f64) -> f64 {
    let w = x - x.floor();
    if w >= 1.0 {
        0.0
    } else {
        w + 0.0 // normalizes -0.0
    }
}

/// Wrap into [−0.5, 0.5).
pub fn wrap_half(x: f64) -> f64 {
    x - (x + 0.5).floor()
}

pub(crate) fn dot(u: [f64; 3], v: [f64; 3]) -> f64 {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

pub(crate) fn norm(v: [f64; 3]) -> f64 {
    dot(v, v).sqrt()
}

pub(crate) fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn inv3(m: &[[f64; 3]; 3], det: f64) -> [[f64; 3]; 3] {
    let adj = |r1: usize, c1: usize, r2: usize, c2: usize| {
        m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1]
    };
    // adjugate transpose / det
    [
        [
            adj(1, 1, 2, 2) / det,
            -adj(0, 1, 2, 2) / det,
            adj(0, 1, 1, 2) / det,
        ],
        [
            -adj(1, 0, 2, 2) / det,
            adj(0, 0, 2, 2) / det,
            -adj(0, 0, 1, 2) / det,
        ],
        [
            adj(1, 0, 2, 1) / det,
            -adj(0, 0, 2, 1) / det,
            adj(0, 0, 1, 1) / det,
        ],
    ]
}
