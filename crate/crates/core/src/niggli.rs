//! Niggli cell reduction via the Krivý–Gruber iteration.
//!
//! Canonicalizes a lattice basis to the unique Niggli-reduced cell before
//! any cross-structure comparison. The implementation follows the classical
//! eight-step algorithm (Krivý & Gruber 1976) operating on the scalars
//! (A, B, C, ξ, η, ζ) of the metric tensor, with the standard ε-stabilized
//! comparisons (ε = tol·V^(2/3)) so ties at condition boundaries are
//! resolved deterministically.

// explicit 3x3 index loops read better than iterator chains for matrix math
#![allow(clippy::needless_range_loop)]
//!
//! The reduced cell satisfies, within tolerance:
//! A ≤ B ≤ C; |ξ| ≤ B; |η| ≤ A; |ζ| ≤ A; and (ξ, η, ζ) uniformly positive
//! (Type I) or uniformly ≤ 0 (Type II), boundary ties resolving to Type II.
//! Consequently a ≤ b ≤ c and all angles lie in [60°, 120°].
//!
//! Every elementary step has determinant +1, so the accumulated transform
//! is unimodular and handedness is preserved.

use crate::error::{Result, XtalError};
use crate::lattice::{LatticeMatrix, LatticeParams};

/// Default relative tolerance for ε-comparisons (scaled by V^(2/3)).
pub const DEFAULT_TOL: f64 = 1e-5;

/// Default iteration cap; pathological near-degenerate cells can cycle.
pub const DEFAULT_MAX_ITER: usize = 100;

/// Outcome of a reduction: the reduced basis, the unimodular transform with
/// `reduced == transform · original` (as row matrices), and the number of
/// iterations of the main loop that ran.
#[derive(Debug, Clone)]
pub struct ReductionResult {
    pub reduced: LatticeMatrix,
    pub transform: [[i64; 3]; 3],
    pub iterations: usize,
}

const IDENTITY: [[i64; 3]; 3] = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];

/// Metric scalars A=a², B=b², C=c², ξ=2b·c, η=2a·c, ζ=2a·b, updated in
/// lockstep with the accumulated row transform.
struct State {
    a: f64,
    b: f64,
    c: f64,
    xi: f64,
    eta: f64,
    zeta: f64,
    t: [[i64; 3]; 3],
}

impl State {
    fn left_mul(&mut self, s: [[i64; 3]; 3]) {
        let mut out = [[0i64; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = s[i][0] * self.t[0][j] + s[i][1] * self.t[1][j] + s[i][2] * self.t[2][j];
            }
        }
        self.t = out;
    }

    /// Step 1 operation: swap (A,ξ) with (B,η). Basis map (−b, −a, −c).
    fn swap_ab(&mut self) {
        std::mem::swap(&mut self.a, &mut self.b);
        std::mem::swap(&mut self.xi, &mut self.eta);
        self.left_mul([[0, -1, 0], [-1, 0, 0], [0, 0, -1]]);
    }

    /// Step 2 operation: swap (B,ξ→) ... swap (B,η) with (C,ζ). Basis map
    /// (−a, −c, −b).
    fn swap_bc(&mut self) {
        std::mem::swap(&mut self.b, &mut self.c);
        std::mem::swap(&mut self.eta, &mut self.zeta);
        self.left_mul([[-1, 0, 0], [0, 0, -1], [0, -1, 0]]);
    }

    /// Steps 3/4 operation: flip basis-vector signs by diag(i,j,k),
    /// i·j·k = +1.
    fn flip_signs(&mut self, i: i64, j: i64, k: i64) {
        debug_assert_eq!(i * j * k, 1);
        self.xi *= (j * k) as f64;
        self.eta *= (i * k) as f64;
        self.zeta *= (i * j) as f64;
        self.left_mul([[i, 0, 0], [0, j, 0], [0, 0, k]]);
    }

    /// Step 5 operation: c ← c − s·b.
    fn shear_c_by_b(&mut self, s: f64) {
        self.c = self.b + self.c - s * self.xi;
        self.eta -= s * self.zeta;
        self.xi -= 2.0 * s * self.b;
        self.left_mul([[1, 0, 0], [0, 1, 0], [0, -(s as i64), 1]]);
    }

    /// Step 6 operation: c ← c − s·a.
    fn shear_c_by_a(&mut self, s: f64) {
        self.c = self.a + self.c - s * self.eta;
        self.xi -= s * self.zeta;
        self.eta -= 2.0 * s * self.a;
        self.left_mul([[1, 0, 0], [0, 1, 0], [-(s as i64), 0, 1]]);
    }

    /// Step 7 operation: b ← b − s·a.
    fn shear_b_by_a(&mut self, s: f64) {
        self.b = self.a + self.b - s * self.zeta;
        self.xi -= s * self.eta;
        self.zeta -= 2.0 * s * self.a;
        self.left_mul([[1, 0, 0], [-(s as i64), 1, 0], [0, 0, 1]]);
    }

    /// Step 8 operation: c ← a + b + c.
    fn fold_c(&mut self) {
        self.c = self.a + self.b + self.c + self.xi + self.eta + self.zeta;
        self.xi += 2.0 * self.b + self.zeta;
        self.eta += 2.0 * self.a + self.zeta;
        self.left_mul([[1, 0, 0], [0, 1, 0], [1, 1, 1]]);
    }
}

/// Sign category with dead zone: 1 if x > eps, −1 if x < −eps, else 0.
fn sign_cat(x: f64, eps: f64) -> i64 {
    if x > eps {
        1
    } else if x < -eps {
        -1
    } else {
        0
    }
}

/// Reduce a basis to its Niggli cell.
///
/// `tol` is the dimensionless stabilization tolerance (default
/// [`DEFAULT_TOL`]); comparisons use ε = tol·V^(2/3) so the dead zone
/// scales like the squared lengths it guards. On hitting `max_iter` the
/// best-effort result is returned inside [`XtalError::NoConvergence`].
pub fn niggli_reduce(m: &LatticeMatrix, tol: f64, max_iter: usize) -> Result<ReductionResult> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(XtalError::InvalidConfig(format!(
            "niggli tol must be finite and positive, got {tol}"
        )));
    }
    if max_iter == 0 {
        return Err(XtalError::InvalidConfig("niggli max_iter must be ≥ 1".into()));
    }
    let g = m.metric_tensor();
    let mut st = State {
        a: g[0][0],
        b: g[1][1],
        c: g[2][2],
        xi: 2.0 * g[1][2],
        eta: 2.0 * g[0][2],
        zeta: 2.0 * g[0][1],
        t: IDENTITY,
    };
    let eps = tol * m.volume().powf(2.0 / 3.0);

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;

        // Step 1: order A ≤ B (ties broken on |ξ| vs |η|).
        if st.a > st.b + eps || ((st.a - st.b).abs() <= eps && st.xi.abs() > st.eta.abs() + eps) {
            st.swap_ab();
        }
        // Step 2: order B ≤ C (ties broken on |η| vs |ζ|); then restart.
        if st.b > st.c + eps || ((st.b - st.c).abs() <= eps && st.eta.abs() > st.zeta.abs() + eps) {
            st.swap_bc();
            continue;
        }
        // Steps 3/4: sign normalization. All strictly positive (Type I) when
        // the sign product is positive with no boundary zeros, otherwise all
        // non-positive (Type II) — zeros count as Type II, making boundary
        // ties deterministic.
        let l = sign_cat(st.xi, eps);
        let m_ = sign_cat(st.eta, eps);
        let n = sign_cat(st.zeta, eps);
        if l * m_ * n == 1 {
            let pick = |s: i64| if s == -1 { -1 } else { 1 };
            st.flip_signs(pick(l), pick(m_), pick(n));
        } else {
            let mut i = 1i64;
            let mut j = 1i64;
            let mut k = 1i64;
            let mut zero_slot = None;
            if l == 1 {
                i = -1;
            } else if l == 0 {
                zero_slot = Some(0);
            }
            if m_ == 1 {
                j = -1;
            } else if m_ == 0 {
                zero_slot = Some(1);
            }
            if n == 1 {
                k = -1;
            } else if n == 0 {
                zero_slot = Some(2);
            }
            if i * j * k == -1 {
                // Odd number of flips is only possible with a zero slot
                // available to absorb the extra sign (kept det = +1).
                match zero_slot {
                    Some(0) => i = -1,
                    Some(1) => j = -1,
                    Some(2) => k = -1,
                    _ => unreachable!("sign product −1 without a boundary zero"),
                }
            }
            st.flip_signs(i, j, k);
        }
        // Step 5: |ξ| ≤ B.
        if st.xi.abs() > st.b + eps
            || ((st.xi - st.b).abs() <= eps && 2.0 * st.eta < st.zeta - eps)
            || ((st.xi + st.b).abs() <= eps && st.zeta < -eps)
        {
            let s = if st.xi > 0.0 { 1.0 } else { -1.0 };
            st.shear_c_by_b(s);
            continue;
        }
        // Step 6: |η| ≤ A.
        if st.eta.abs() > st.a + eps
            || ((st.eta - st.a).abs() <= eps && 2.0 * st.xi < st.zeta - eps)
            || ((st.eta + st.a).abs() <= eps && st.zeta < -eps)
        {
            let s = if st.eta > 0.0 { 1.0 } else { -1.0 };
            st.shear_c_by_a(s);
            continue;
        }
        // Step 7: |ζ| ≤ A.
        if st.zeta.abs() > st.a + eps
            || ((st.zeta - st.a).abs() <= eps && 2.0 * st.xi < st.eta - eps)
            || ((st.zeta + st.a).abs() <= eps && st.eta < -eps)
        {
            let s = if st.zeta > 0.0 { 1.0 } else { -1.0 };
            st.shear_b_by_a(s);
            continue;
        }
        // Step 8: the final folding condition.
        let total = st.xi + st.eta + st.zeta + st.a + st.b;
        if total < -eps || (total.abs() <= eps && 2.0 * (st.a + st.eta) + st.zeta > eps) {
            st.fold_c();
            continue;
        }
        converged = true;
        break;
    }

    let rows = m.rows();
    let mut reduced_rows = [[0.0f64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            reduced_rows[i][j] = st.t[i][0] as f64 * rows[0][j]
                + st.t[i][1] as f64 * rows[1][j]
                + st.t[i][2] as f64 * rows[2][j];
        }
    }
    let reduced = LatticeMatrix::new(reduced_rows)?;
    debug_assert!(
        !reduced.was_flipped(),
        "all steps have det +1, handedness must be preserved"
    );
    let result = ReductionResult {
        reduced,
        transform: st.t,
        iterations,
    };
    if converged {
        Ok(result)
    } else {
        Err(XtalError::NoConvergence {
            iterations,
            best_effort: Box::new(result),
        })
    }
}

/// Check the Niggli main conditions on a parameter set, with the same
/// ε convention as [`niggli_reduce`] (ε = tol·V^(2/3) against the squared
/// lengths). True iff A ≤ B ≤ C, |ξ| ≤ B, |η| ≤ A, |ζ| ≤ A, and the angle
/// signs are uniformly Type I or Type II.
pub fn is_niggli_reduced(p: &LatticeParams, tol: f64) -> bool {
    let deg = std::f64::consts::PI / 180.0;
    let (a, b, c) = (p.a(), p.b(), p.c());
    let (aa, bb, cc) = (a * a, b * b, c * c);
    let xi = 2.0 * b * c * (p.alpha() * deg).cos();
    let eta = 2.0 * a * c * (p.beta() * deg).cos();
    let zeta = 2.0 * a * b * (p.gamma() * deg).cos();
    let eps = tol * p.volume().powf(2.0 / 3.0);

    let ordered = aa <= bb + eps && bb <= cc + eps;
    let bounded = xi.abs() <= bb + eps && eta.abs() <= aa + eps && zeta.abs() <= aa + eps;
    let l = sign_cat(xi, eps);
    let m = sign_cat(eta, eps);
    let n = sign_cat(zeta, eps);
    let uniform = (l == 1 && m == 1 && n == 1) || (l <= 0 && m <= 0 && n <= 0);
    ordered && bounded && uniform
}

/// Invert an integer unimodular matrix exactly (via the adjugate; for
/// |det| = 1 the inverse is again integer).
pub fn invert_unimodular(t: [[i64; 3]; 3]) -> Result<[[i64; 3]; 3]> {
    let det = t[0][0] * (t[1][1] * t[2][2] - t[1][2] * t[2][1])
        - t[0][1] * (t[1][0] * t[2][2] - t[1][2] * t[2][0])
        + t[0][2] * (t[1][0] * t[2][1] - t[1][1] * t[2][0]);
    if det != 1 && det != -1 {
        return Err(XtalError::InvalidConfig(format!(
            "matrix is not unimodular (det = {det})"
        )));
    }
    let minor = |r1: usize, c1: usize, r2: usize, c2: usize| t[r1][c1] * t[r2][c2] - t[r1][c2] * t[r2][c1];
    // inverse[i][j] = cofactor(j,i) / det; 1/det == det for det = ±1
    let adj_t = [
        [minor(1, 1, 2, 2), -minor(0, 1, 2, 2), minor(0, 1, 1, 2)],
        [-minor(1, 0, 2, 2), minor(0, 0, 2, 2), -minor(0, 0, 1, 2)],
        [minor(1, 0, 2, 1), -minor(0, 0, 2, 1), minor(0, 0, 1, 1)],
    ];
    let mut inv = [[0i64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            inv[i][j] = adj_t[i][j] * det;
        }
    }
    Ok(inv)
}
