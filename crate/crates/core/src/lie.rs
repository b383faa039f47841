//! Cartan subspace, root data and the Cartan / Iwasawa / Jordan decompositions
//! of `SL(d, R)`.
//!
//! The Cartan subspace is the space of real diagonal traceless matrices, stored
//! as sum-zero vectors. It carries the trace form `<X, Y> = tr(XY)`, i.e. the
//! Euclidean inner product of the diagonals. Norms measured with the Killing
//! form are `sqrt(2d)` times larger, see [`WeylGeometry::killing_scale`].

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Global numeric tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Margin used by strict chamber predicates.
pub const CHAMBER_MARGIN: f64 = 1e-8;
/// Inputs whose condition number exceeds this are rejected by the decompositions.
pub const MAX_CONDITION: f64 = 1e12;

/// A point of the Cartan subspace: `d` reals summing to zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CartanVector(Vec<f64>);

impl CartanVector {
    /// Builds a vector, rejecting inputs that are not sum-zero up to rounding.
    /// The residual sum is removed so the stored entries sum to zero to machine precision.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::Dimension { expected: 2, got: entries.len() });
        }
        let scale = entries.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        let sum: f64 = entries.iter().sum();
        if sum.abs() > 1e-8 * scale * entries.len() as f64 {
            return Err(Error::InvalidArgument(format!("Cartan vector must sum to zero (sum = {sum:e})")));
        }
        Ok(Self::project(entries))
    }

    /// Orthogonal projection of an arbitrary vector onto the sum-zero hyperplane.
    pub fn project(mut entries: Vec<f64>) -> Self {
        let mean = entries.iter().sum::<f64>() / entries.len() as f64;
        for x in &mut entries {
            *x -= mean;
        }
        CartanVector(entries)
    }

    pub fn zero(d: usize) -> Self {
        CartanVector(vec![0.0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &CartanVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn add(&self, other: &CartanVector) -> CartanVector {
        CartanVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &CartanVector) -> CartanVector {
        CartanVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, s: f64) -> CartanVector {
        CartanVector(self.0.iter().map(|a| a * s).collect())
    }

    pub fn sorted_descending(&self) -> CartanVector {
        let mut v = self.0.clone();
        v.sort_by(|a, b| b.total_cmp(a));
        CartanVector(v)
    }

    /// `v_1 >= v_2 >= ... >= v_d` up to `margin`.
    pub fn in_closed_chamber(&self, margin: f64) -> bool {
        self.0.windows(2).all(|w| w[0] - w[1] >= -margin)
    }

    /// `v_1 > v_2 > ... > v_d` with every gap exceeding `margin`.
    pub fn in_open_chamber(&self, margin: f64) -> bool {
        self.0.windows(2).all(|w| w[0] - w[1] > margin)
    }

    /// Euclidean distance to the union of the walls of the positive chamber,
    /// for a vector of the closed chamber. For `d = 2` the only wall is `{0}`.
    pub fn wall_distance(&self) -> f64 {
        if self.dim() == 2 {
            return self.norm();
        }
        self.0
            .windows(2)
            .map(|w| (w[0] - w[1]) / std::f64::consts::SQRT_2)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_diff(&self, other: &CartanVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Root data of `sl(d)`: positive roots `v_i - v_j` (i < j), simple roots,
/// fundamental weights `chi^i(v) = v_1 + ... + v_i`, the half-sum `rho`, the
/// Weyl group (coordinate permutations) and the opposition involution.
///
/// Indices of simple roots and fundamental weights are 1-based, matching the
/// degree of the corresponding exterior power.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WeylGeometry {
    pub d: usize,
}

impl WeylGeometry {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArgument(format!("dimension must be at least 2, got {d}")));
        }
        Ok(Self { d })
    }

    /// Ratio between the Killing-form norm and the trace-form norm on the Cartan subspace.
    pub fn killing_scale(&self) -> f64 {
        (2.0 * self.d as f64).sqrt()
    }

    pub fn rank(&self) -> usize {
        self.d - 1
    }

    pub fn positive_roots(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.d).flat_map(move |i| (i + 1..self.d).map(move |j| (i, j)))
    }

    pub fn simple_root(&self, i: usize, v: &CartanVector) -> f64 {
        assert!((1..self.d).contains(&i), "simple root index out of range");
        v.0[i - 1] - v.0[i]
    }

    pub fn chi(&self, i: usize, v: &CartanVector) -> f64 {
        assert!((1..self.d).contains(&i), "fundamental weight index out of range");
        v.0[..i].iter().sum()
    }

    pub fn rho(&self, v: &CartanVector) -> f64 {
        self.positive_roots().map(|(i, j)| v.0[i] - v.0[j]).sum::<f64>() / 2.0
    }

    /// Permutes coordinates: `(w v)_i = v_{perm[i]}`.
    pub fn weyl_apply(&self, perm: &[usize], v: &CartanVector) -> CartanVector {
        debug_assert_eq!(perm.len(), self.d);
        CartanVector(perm.iter().map(|&p| v.0[p]).collect())
    }

    /// `iota(v) = (-v_d, ..., -v_1)`.
    pub fn opposition(&self, v: &CartanVector) -> CartanVector {
        CartanVector(v.0.iter().rev().map(|x| -x).collect())
    }

    /// All permutations of `0..d` in lexicographic order.
    pub fn weyl_group(&self) -> Vec<Vec<usize>> {
        fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
            if prefix.len() == used.len() {
                out.push(prefix.clone());
                return;
            }
            for i in 0..used.len() {
                if !used[i] {
                    used[i] = true;
                    prefix.push(i);
                    rec(prefix, used, out);
                    prefix.pop();
                    used[i] = false;
                }
            }
        }
        let mut out = Vec::new();
        rec(&mut Vec::new(), &mut vec![false; self.d], &mut out);
        out
    }

    /// Recovers `v` from the values `chi^1(v), ..., chi^{d-1}(v)`.
    pub fn from_chi_values(&self, chi: &[f64]) -> CartanVector {
        assert_eq!(chi.len(), self.d - 1);
        let mut v = Vec::with_capacity(self.d);
        let mut prev = 0.0;
        for &c in chi {
            v.push(c - prev);
            prev = c;
        }
        v.push(-prev);
        CartanVector(v)
    }

    /// Gram matrix of the fundamental weights under the dual trace form.
    pub fn chi_gram(&self) -> DMatrix<f64> {
        // chi^i is represented by e_1 + ... + e_i projected to the sum-zero plane.
        let d = self.d;
        let reps: Vec<DVector<f64>> = (1..d)
            .map(|i| {
                let mut v = DVector::from_element(d, -(i as f64) / d as f64);
                for k in 0..i {
                    v[k] += 1.0;
                }
                v
            })
            .collect();
        DMatrix::from_fn(d - 1, d - 1, |a, b| reps[a].dot(&reps[b]))
    }

    /// The constant `C` with `||v|| / sqrt(C) <= max_i |chi^i(v)| <= sqrt(C) ||v||`,
    /// evaluated on a dense sample of the unit sphere (exact for `d = 2`).
    pub fn chi_norm_constant(&self) -> f64 {
        let d = self.d;
        if d == 2 {
            return 2.0;
        }
        let basis = sum_zero_basis(d);
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        let mut probe = |v: &CartanVector| {
            let m = (1..d).map(|i| self.chi(i, v).abs()).fold(0.0, f64::max);
            lo = lo.min(m);
            hi = hi.max(m);
        };
        if d == 3 {
            let n = 20_000;
            for k in 0..n {
                let th = std::f64::consts::TAU * k as f64 / n as f64;
                let v: Vec<f64> = (0..d).map(|c| th.cos() * basis[0][c] + th.sin() * basis[1][c]).collect();
                probe(&CartanVector(v));
            }
        } else {
            // Deterministic quasi-random directions for higher rank.
            let mut state = 0x9e3779b97f4a7c15u64;
            for _ in 0..200_000 {
                let mut coords = vec![0.0; d - 1];
                for c in &mut coords {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    *c = ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0;
                }
                let mut v = vec![0.0; d];
                for (b, c) in basis.iter().zip(&coords) {
                    for i in 0..d {
                        v[i] += b[i] * c;
                    }
                }
                let cv = CartanVector(v);
                let n = cv.norm();
                if n > 1e-6 {
                    probe(&cv.scale(1.0 / n));
                }
            }
        }
        (hi * hi).max(1.0 / (lo * lo))
    }
}

/// Orthonormal basis of the sum-zero hyperplane of `R^d` (Helmert basis).
pub fn sum_zero_basis(d: usize) -> Vec<Vec<f64>> {
    (1..d)
        .map(|k| {
            let norm = ((k * (k + 1)) as f64).sqrt();
            let mut v = vec![0.0; d];
            for item in v.iter_mut().take(k) {
                *item = 1.0 / norm;
            }
            v[k] = -(k as f64) / norm;
            v
        })
        .collect()
}

/// An element of `SL(d, R)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement(DMatrix<f64>);

impl GroupElement {
    /// Accepts any square matrix with positive determinant and rescales it to determinant one.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension { expected: m.nrows(), got: m.ncols() });
        }
        let d = m.nrows();
        let det = m.determinant();
        if !det.is_finite() || det <= 0.0 {
            return Err(Error::Degenerate(format!("determinant {det:e} is not positive")));
        }
        let s = det.powf(-1.0 / d as f64);
        let g = m * s;
        Ok(GroupElement(g))
    }

    /// Wraps a matrix already known to have determinant one.
    pub fn from_matrix_unchecked(m: DMatrix<f64>) -> Self {
        GroupElement(m)
    }

    pub fn from_rows(d: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != d * d {
            return Err(Error::Dimension { expected: d * d, got: entries.len() });
        }
        Self::new(DMatrix::from_row_slice(d, d, entries))
    }

    pub fn identity(d: usize) -> Self {
        GroupElement(DMatrix::identity(d, d))
    }

    /// `exp(v)` for `v` in the Cartan subspace.
    pub fn exp_cartan(v: &CartanVector) -> Self {
        let d = v.dim();
        GroupElement(DMatrix::from_fn(d, d, |i, j| if i == j { v.0[i].exp() } else { 0.0 }))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        GroupElement(&self.0 * &other.0)
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement(invert(&self.0))
    }

    pub fn transpose(&self) -> GroupElement {
        GroupElement(self.0.transpose())
    }

    /// `h^{-1} g h`.
    pub fn conjugate_by(&self, h: &GroupElement) -> GroupElement {
        h.inverse().mul(self).mul(h)
    }

    pub fn pow(&self, n: u32) -> GroupElement {
        let mut acc = GroupElement::identity(self.dim());
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }
}

fn invert(m: &DMatrix<f64>) -> DMatrix<f64> {
    let d = m.nrows();
    if d == 2 {
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        return DMatrix::from_row_slice(2, 2, &[m[(1, 1)] / det, -m[(0, 1)] / det, -m[(1, 0)] / det, m[(0, 0)] / det]);
    }
    m.clone().try_inverse().expect("group elements are invertible")
}

/// `g = k exp(a) l^T` with `k, l` in `SO(d)` and `a` weakly descending.
#[derive(Clone, Debug)]
pub struct KakDecomposition {
    pub k: DMatrix<f64>,
    pub a: CartanVector,
    pub l: DMatrix<f64>,
}

impl KakDecomposition {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let e = GroupElement::exp_cartan(&self.a);
        &self.k * e.matrix() * self.l.transpose()
    }
}

fn log_singular_values_2x2(m: &DMatrix<f64>) -> Result<CartanVector> {
    let f = m.norm_squared();
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let disc = (f * f - 4.0 * det * det).max(0.0);
    let s1sq = (f + disc.sqrt()) / 2.0;
    let s1 = s1sq.sqrt();
    let s2 = det.abs() / s1;
    if s2 <= 0.0 || s1 / s2 > MAX_CONDITION {
        return Err(Error::Degenerate(format!("condition number {:e} exceeds limit", s1 / s2)));
    }
    let l = 0.5 * (s1.ln() - s2.ln());
    Ok(CartanVector(vec![l, -l]))
}

/// Sorted log singular values.
pub fn cartan_projection(g: &GroupElement) -> Result<CartanVector> {
    let m = g.matrix();
    if m.nrows() == 2 {
        return log_singular_values_2x2(m);
    }
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let smin = *sv.last().unwrap();
    if smin <= 0.0 || sv[0] / smin > MAX_CONDITION {
        return Err(Error::Degenerate(format!("condition number {:e} exceeds limit", sv[0] / smin)));
    }
    Ok(CartanVector::project(sv.iter().map(|s| s.ln()).collect()))
}

/// Flips column signs so that the largest-magnitude entry of each column of `k`
/// (ties to the lowest row) is positive, keeping `k` and `l` paired; then
/// restores `det k = +1` through the last column.
fn fix_signs(k: &mut DMatrix<f64>, l: &mut DMatrix<f64>) {
    let d = k.ncols();
    for j in 0..d {
        let mut best = 0usize;
        for i in 1..d {
            if k[(i, j)].abs() > k[(best, j)].abs() {
                best = i;
            }
        }
        if k[(best, j)] < 0.0 {
            k.column_mut(j).neg_mut();
            l.column_mut(j).neg_mut();
        }
    }
    if k.determinant() < 0.0 {
        k.column_mut(d - 1).neg_mut();
        l.column_mut(d - 1).neg_mut();
    }
}

fn rotation(theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}

fn kak_2x2(m: &DMatrix<f64>) -> Result<KakDecomposition> {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let e = (a + d) / 2.0;
    let f = (a - d) / 2.0;
    let g = (c + b) / 2.0;
    let h = (c - b) / 2.0;
    let q = e.hypot(h);
    let r = f.hypot(g);
    let s1 = q + r;
    let s2 = q - r;
    if s2 <= 0.0 || s1 / s2 > MAX_CONDITION {
        return Err(Error::Degenerate("2x2 element is singular or ill-conditioned".into()));
    }
    let a1 = g.atan2(f);
    let a2 = h.atan2(e);
    let theta = (a2 - a1) / 2.0;
    let phi = (a2 + a1) / 2.0;
    let mut k = rotation(phi);
    let mut l = rotation(-theta);
    fix_signs(&mut k, &mut l);
    let la = 0.5 * (s1.ln() - s2.ln());
    Ok(KakDecomposition { k, a: CartanVector(vec![la, -la]), l })
}

/// Cartan decomposition through the singular value decomposition.
pub fn cartan_kak(g: &GroupElement) -> Result<KakDecomposition> {
    let m = g.matrix();
    let d = m.nrows();
    if d == 2 {
        return kak_2x2(m);
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]).then(i.cmp(&j)));
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let smin = sv[d - 1];
    if smin <= 0.0 || sv[0] / smin > MAX_CONDITION {
        return Err(Error::Degenerate(format!("condition number {:e} exceeds limit", sv[0] / smin)));
    }
    let mut k = DMatrix::from_fn(d, d, |i, j| u[(i, order[j])]);
    let mut l = DMatrix::from_fn(d, d, |i, j| vt[(order[j], i)]);
    fix_signs(&mut k, &mut l);
    let a = CartanVector::project(sv.iter().map(|s| s.ln()).collect());
    Ok(KakDecomposition { k, a, l })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IwasawaOrder {
    /// `g = k a n`
    Kan,
    /// `g = n a k`
    Nak,
}

/// Iwasawa decomposition with `n` upper triangular unipotent.
#[derive(Clone, Debug)]
pub struct IwasawaDecomposition {
    pub k: DMatrix<f64>,
    pub a: CartanVector,
    pub n: DMatrix<f64>,
    pub order: IwasawaOrder,
}

impl IwasawaDecomposition {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let e = GroupElement::exp_cartan(&self.a);
        match self.order {
            IwasawaOrder::Kan => &self.k * e.matrix() * &self.n,
            IwasawaOrder::Nak => &self.n * e.matrix() * &self.k,
        }
    }
}

/// Householder QR with the sign convention `R_ii > 0`.
pub(crate) fn qr_positive(m: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let d = m.ncols();
    let qr = m.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    for i in 0..d.min(r.nrows()) {
        if r[(i, i)] < 0.0 {
            r.row_mut(i).neg_mut();
            q.column_mut(i).neg_mut();
        }
    }
    (q, r)
}

pub fn iwasawa(g: &GroupElement, order: IwasawaOrder) -> IwasawaDecomposition {
    match order {
        IwasawaOrder::Kan => {
            let d = g.dim();
            let (q, r) = qr_positive(g.matrix());
            let diag: Vec<f64> = (0..d).map(|i| r[(i, i)]).collect();
            let mut n = DMatrix::from_fn(d, d, |i, j| if j > i { r[(i, j)] / diag[i] } else { 0.0 });
            for i in 0..d {
                n[(i, i)] = 1.0;
            }
            let a = CartanVector::project(diag.iter().map(|x| x.ln()).collect());
            IwasawaDecomposition { k: q, a, n, order }
        }
        IwasawaOrder::Nak => {
            // g^{-1} = k' a' n'  =>  g = n'^{-1} a'^{-1} k'^T
            let inv = iwasawa(&g.inverse(), IwasawaOrder::Kan);
            let mut n = invert_unipotent_upper(&inv.n);
            for i in 0..g.dim() {
                n[(i, i)] = 1.0;
            }
            IwasawaDecomposition { k: inv.k.transpose(), a: inv.a.scale(-1.0), n, order }
        }
    }
}

fn invert_unipotent_upper(n: &DMatrix<f64>) -> DMatrix<f64> {
    let d = n.nrows();
    let mut inv = DMatrix::identity(d, d);
    // Back substitution, column by column.
    for j in 0..d {
        for i in (0..j).rev() {
            let mut s = 0.0;
            for k in i + 1..=j {
                s += n[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = -s;
        }
    }
    inv
}

/// Jordan projection together with the real spectrum and eigenbasis when available.
#[derive(Clone, Debug)]
pub struct JordanData {
    pub lambda: CartanVector,
    /// Eigenvalues sorted by descending modulus; present only when the spectrum is real.
    pub eigenvalues: Option<Vec<f64>>,
    /// Columns are unit eigenvectors in the order of `eigenvalues`; present when
    /// the spectrum is real with pairwise distinct moduli.
    pub eigenbasis: Option<DMatrix<f64>>,
}

impl JordanData {
    pub fn is_loxodromic(&self, margin: f64) -> bool {
        self.lambda.in_open_chamber(margin) && self.eigenvalues.is_some()
    }
}

/// Complex roots `(re, im)` of a monic real polynomial given by its lower
/// coefficients `c_0 + c_1 x + ... + x^n`, via companion-free closed forms
/// (degree 2, 3) polished by Newton iteration.
fn monic_roots(coeffs: &[f64]) -> Vec<(f64, f64)> {
    match coeffs.len() {
        1 => vec![(-coeffs[0], 0.0)],
        2 => quadratic_roots(coeffs[1], coeffs[0]),
        3 => cubic_roots(coeffs[2], coeffs[1], coeffs[0]),
        _ => unreachable!("higher degree handled by the Schur fallback"),
    }
}

/// Roots of `x^2 + b x + c`.
fn quadratic_roots(b: f64, c: f64) -> Vec<(f64, f64)> {
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        let s = disc.sqrt();
        let q = -0.5 * (b + b.signum() * s + if b == 0.0 { s } else { 0.0 });
        if q == 0.0 {
            return vec![(0.0, 0.0), (0.0, 0.0)];
        }
        let r1 = q;
        let r2 = c / q;
        vec![(r1, 0.0), (r2, 0.0)]
    } else {
        let re = -b / 2.0;
        let im = (-disc).sqrt() / 2.0;
        vec![(re, im), (re, -im)]
    }
}

/// Roots of `x^3 + a x^2 + b x + c`.
fn cubic_roots(a: f64, b: f64, c: f64) -> Vec<(f64, f64)> {
    let p = |x: f64| ((x + a) * x + b) * x + c;
    let dp = |x: f64| (3.0 * x + 2.0 * a) * x + b;
    // Depressed cubic t^3 + pp t + qq with x = t - a/3.
    let pp = b - a * a / 3.0;
    let qq = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = -(4.0 * pp * pp * pp + 27.0 * qq * qq);
    let mut real_root = if pp < 0.0 && disc >= 0.0 {
        // Three real roots: take the largest from the trigonometric form.
        let m = 2.0 * (-pp / 3.0).sqrt();
        let arg = (3.0 * qq / (pp * m)).clamp(-1.0, 1.0);
        m * (arg.acos() / 3.0).cos() - a / 3.0
    } else {
        let s = (qq * qq / 4.0 + pp * pp * pp / 27.0).max(0.0).sqrt();
        (-qq / 2.0 + s).cbrt() + (-qq / 2.0 - s).cbrt() - a / 3.0
    };
    for _ in 0..50 {
        let d = dp(real_root);
        if d == 0.0 {
            break;
        }
        let step = p(real_root) / d;
        real_root -= step;
        if step.abs() <= 1e-16 * real_root.abs().max(1.0) {
            break;
        }
    }
    // Deflate: x^3 + a x^2 + b x + c = (x - r)(x^2 + e x + f)
    let e = a + real_root;
    let f = b + e * real_root;
    let mut roots = vec![(real_root, 0.0)];
    let mut rest = quadratic_roots(e, f);
    for r in &mut rest {
        if r.1 == 0.0 {
            let mut x = r.0;
            for _ in 0..3 {
                let d = dp(x);
                if d.abs() < 1e-300 {
                    break;
                }
                let nx = x - p(x) / d;
                if !nx.is_finite() {
                    break;
                }
                x = nx;
            }
            r.0 = x;
        }
    }
    roots.append(&mut rest);
    roots
}

/// Characteristic polynomial coefficients `c_0, ..., c_{d-1}` of `x^d + ...`
/// via Faddeev-LeVerrier.
pub(crate) fn char_poly_f64(m: &DMatrix<f64>) -> Vec<f64> {
    let d = m.nrows();
    let mut coeffs = vec![0.0; d + 1];
    coeffs[d] = 1.0;
    let mut mk = DMatrix::<f64>::zeros(d, d);
    let id = DMatrix::<f64>::identity(d, d);
    for k in 1..=d {
        mk = m * (&mk + &id * coeffs[d - k + 1]);
        coeffs[d - k] = -mk.trace() / k as f64;
    }
    coeffs.truncate(d);
    coeffs
}

/// Unit null vector of `m - mu I`.
fn eigenvector(m: &DMatrix<f64>, mu: f64) -> DVector<f64> {
    let d = m.nrows();
    let shifted = m - DMatrix::identity(d, d) * mu;
    if d == 2 {
        let c1 = DVector::from_vec(vec![shifted[(0, 1)], -shifted[(0, 0)]]);
        let c2 = DVector::from_vec(vec![shifted[(1, 1)], -shifted[(1, 0)]]);
        let v = if c1.norm() >= c2.norm() { c1 } else { c2 };
        return v.normalize();
    }
    if d == 3 {
        let rows: Vec<nalgebra::Vector3<f64>> = (0..3)
            .map(|i| nalgebra::Vector3::new(shifted[(i, 0)], shifted[(i, 1)], shifted[(i, 2)]))
            .collect();
        let cands = [rows[0].cross(&rows[1]), rows[0].cross(&rows[2]), rows[1].cross(&rows[2])];
        let best = cands.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
        let v = best.normalize();
        return DVector::from_vec(vec![v[0], v[1], v[2]]);
    }
    let svd = shifted.svd(false, true);
    let vt = svd.v_t.unwrap();
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    vt.row(idx).transpose().normalize()
}

/// Relative gap below which two eigenvalue moduli are treated as equal.
const MODULUS_GAP: f64 = 1e-10;

pub fn jordan_projection(g: &GroupElement) -> JordanData {
    let m = g.matrix();
    let d = m.nrows();
    let roots: Vec<(f64, f64)> = if d <= 3 {
        monic_roots(&char_poly_f64(m))
    } else {
        m.clone().complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect()
    };
    let mut moduli: Vec<f64> = roots.iter().map(|(re, im)| re.hypot(*im)).collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    let lambda = CartanVector::project(moduli.iter().map(|x| x.max(f64::MIN_POSITIVE).ln()).collect());
    let scale = moduli[0].max(1.0);
    let all_real = roots.iter().all(|(_, im)| im.abs() <= 1e-12 * scale);
    if !all_real {
        return JordanData { lambda, eigenvalues: None, eigenbasis: None };
    }
    let mut eig: Vec<f64> = roots.iter().map(|r| r.0).collect();
    eig.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    let distinct = eig.windows(2).all(|w| (w[0].abs() - w[1].abs()) > MODULUS_GAP * w[0].abs());
    let eigenbasis = distinct.then(|| {
        let cols: Vec<DVector<f64>> = eig.iter().map(|&mu| eigenvector(m, mu)).collect();
        DMatrix::from_columns(&cols)
    });
    JordanData { lambda, eigenvalues: Some(eig), eigenbasis }
}

/// Symmetric-space distance `d_X(h_x o, h_y o) = ||a(h_x^{-1} h_y)||`.
pub fn symmetric_distance(hx: &GroupElement, hy: &GroupElement) -> Result<f64> {
    Ok(cartan_projection(&hx.inverse().mul(hy))?.norm())
}

/// Chamber-valued displacement of `g` at the basepoint `h_x o`.
pub fn cartan_at(g: &GroupElement, hx: &GroupElement) -> Result<CartanVector> {
    cartan_projection(&g.conjugate_by(hx))
}
