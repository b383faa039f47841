//! Enumeration of `Gamma ∩ D_t(x)` for `Gamma = SL(d, Z)`, `d ∈ {2, 3}`.
//!
//! * `d = 2`: `||a(gamma)|| <= t` iff `||gamma||_F^2 <= 2 cosh(sqrt 2 t)`. Top rows
//!   are coprime pairs; each one is completed by its one-parameter family of
//!   Bézout solutions, intersected with the Frobenius ball.
//! * `d = 3`: every row has norm at most `sigma_1 <= exp(t sqrt(2/3))`. The
//!   second row is drawn from the cylinder around the first row bounded by
//!   `||r_1 x r_2|| <= sigma_1 sigma_2`, pairs are pruned with the sharp lower
//!   bound on `||a||` implied by `(log sigma_1, log sigma_1 sigma_2)`, and the
//!   third row runs over an affine plane lattice. Survivors get an exact
//!   singular-value test.
//!
//! A basepoint `x = h_x o` is handled by enumerating at radius `t + 2 d_X(o, x)`
//! and filtering by `a_x`. Work is split into units (first entries for `d = 2`,
//! first rows for `d = 3`); shard `i` of `n` owns the units with index `≡ i (mod n)`.

use nalgebra::Matrix3;
use rayon::prelude::*;

use crate::arith::{cross3, dot3, ext_gcd, gcd, isqrt};
use crate::error::{Error, Result};
use crate::lattice::integer::IntegerGroupElement;
use crate::lie::{cartan_at, symmetric_distance, CartanVector, GroupElement, CHAMBER_MARGIN};

/// Entries beyond this are refused so that every intermediate product fits in `i64`.
const ENTRY_LIMIT: f64 = 1e9;

#[derive(Clone, Debug)]
pub struct EnumConfig {
    pub d: usize,
    pub t: f64,
    /// Representative `h_x` of the basepoint; `None` is `o`.
    pub basepoint: Option<GroupElement>,
    /// Restrict to `gamma ≡ I (mod p)`.
    pub congruence: Option<i64>,
    /// Strip width for [`count_strip`].
    pub strip: Option<f64>,
    pub shard_index: usize,
    pub shard_count: usize,
}

impl EnumConfig {
    pub fn new(d: usize, t: f64) -> Self {
        Self { d, t, basepoint: None, congruence: None, strip: None, shard_index: 0, shard_count: 1 }
    }

    pub fn with_basepoint(mut self, h: GroupElement) -> Self {
        self.basepoint = Some(h);
        self
    }

    pub fn with_shard(mut self, index: usize, count: usize) -> Self {
        self.shard_index = index;
        self.shard_count = count;
        self
    }

    pub fn with_strip(mut self, s: f64) -> Self {
        self.strip = Some(s);
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.t > 0.0) || !self.t.is_finite() {
            return Err(Error::InvalidArgument(format!("radius must be positive, got {}", self.t)));
        }
        if !(2..=3).contains(&self.d) {
            return Err(Error::Unsupported(format!("enumeration supports d = 2, 3; got {}", self.d)));
        }
        if self.shard_count == 0 || self.shard_index >= self.shard_count {
            return Err(Error::InvalidArgument("shard index must be below shard count".into()));
        }
        if let Some(p) = self.congruence {
            if p < 1 {
                return Err(Error::InvalidArgument("congruence level must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Cartan projection of an integer element (analytic for `d = 2`, fixed-size SVD for `d = 3`).
pub fn integer_cartan(g: &IntegerGroupElement) -> CartanVector {
    let e = g.entries();
    match g.dim() {
        2 => {
            let f = g.frobenius_sq() as f64;
            let s1sq = (f + (f * f - 4.0).max(0.0).sqrt()) / 2.0;
            let l = 0.5 * s1sq.ln();
            CartanVector::project(vec![l, -l])
        }
        _ => {
            let m = Matrix3::from_fn(|i, j| e[i * 3 + j] as f64);
            let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
            sv.sort_by(|a, b| b.total_cmp(a));
            CartanVector::project(sv.iter().map(|s| s.ln()).collect())
        }
    }
}

/// Largest root of `x^3 - p x^2 + q x - 1` when all roots are real and positive.
fn top_root(p: f64, q: f64) -> f64 {
    let a = q - p * p / 3.0;
    let b = -2.0 * p * p * p / 27.0 + p * q / 3.0 - 1.0;
    let mut x = if a < -1e-300 {
        let r = (-a / 3.0).sqrt();
        let c = (-b / (2.0 * r * r * r)).clamp(-1.0, 1.0);
        p / 3.0 + 2.0 * r * (c.acos() / 3.0).cos()
    } else {
        p / 3.0
    };
    for _ in 0..2 {
        let f = ((x - p) * x + q) * x - 1.0;
        let df = (3.0 * x - 2.0 * p) * x + q;
        if df.abs() > 0.0 {
            x -= f / df;
        }
    }
    x
}

/// Cheap Cartan norm for `d = 3` from the exact invariants of `g^T g`.
///
/// `||g||_F^2` and `||adj g||_F^2` are the elementary symmetric functions
/// of the squared singular values, so no decomposition is needed.
fn cartan_norm_3(e: &[i64]) -> f64 {
    let p: i64 = e.iter().map(|x| x * x).sum();
    let mut q: i64 = 0;
    for (r0, r1) in [(0, 1), (0, 2), (1, 2)] {
        for (c0, c1) in [(0, 1), (0, 2), (1, 2)] {
            let m = e[r0 * 3 + c0] * e[r1 * 3 + c1] - e[r0 * 3 + c1] * e[r1 * 3 + c0];
            q += m * m;
        }
    }
    let (p, q) = (p as f64, q as f64);
    let a1 = 0.5 * top_root(p, q).ln();
    let a3 = -0.5 * top_root(q, p).ln();
    let a2 = -a1 - a3;
    (a1 * a1 + a2 * a2 + a3 * a3).sqrt()
}

/// `floor(2 cosh(sqrt 2 t))`: the Frobenius bound for `d = 2`.
pub fn frobenius_bound_2(t: f64) -> i128 {
    let x = std::f64::consts::SQRT_2 * t;
    (2.0 * x.cosh()).floor() as i128
}

/// Row-norm bound `exp(t sqrt(2/3))` for `d = 3`.
pub fn row_bound_3(t: f64) -> f64 {
    (t * (2.0f64 / 3.0).sqrt()).exp()
}

/// Lower bound for `||a||^2` given `l <= log sigma_1` and `p <= log sigma_1 sigma_2`.
pub fn pair_bound(l: f64, p: f64) -> f64 {
    if p > 2.0 * l {
        1.5 * p * p
    } else if l > 2.0 * p {
        1.5 * l * l
    } else {
        l * l + p * p + (p - l) * (p - l)
    }
}

/// Radius actually enumerated around `o` and the basepoint filter.
fn search_radius(cfg: &EnumConfig) -> Result<f64> {
    let shift = match &cfg.basepoint {
        Some(h) => 2.0 * symmetric_distance(&GroupElement::identity(cfg.d), h)?,
        None => 0.0,
    };
    Ok(cfg.t + shift)
}

fn check_entry_bound(d: usize, r: f64) -> Result<()> {
    let bound = match d {
        2 => (frobenius_bound_2(r) as f64).sqrt(),
        _ => row_bound_3(r),
    };
    if !(bound <= ENTRY_LIMIT) {
        return Err(Error::Overflow(format!(
            "entry bound {bound:.3e} at radius {r} exceeds the safe limit {ENTRY_LIMIT:e}"
        )));
    }
    Ok(())
}

/// Visits every element of the configured shard exactly once, in parallel over
/// work units, folding into per-thread accumulators.
pub fn par_fold<T, I, V, C>(cfg: &EnumConfig, identity: I, visit: V, combine: C) -> Result<T>
where
    T: Send,
    I: Fn() -> T + Sync + Send,
    V: Fn(&mut T, &IntegerGroupElement, &CartanVector) + Sync + Send,
    C: Fn(T, T) -> T + Sync + Send,
{
    cfg.validate()?;
    let radius = search_radius(cfg)?;
    check_entry_bound(cfg.d, radius)?;
    let hx = cfg.basepoint.clone();
    let t = cfg.t;
    let level = cfg.congruence;
    // Accepts a candidate from the radius-`radius` search around o.
    let accept = |g: &IntegerGroupElement, a_o: CartanVector| -> Option<CartanVector> {
        if let Some(p) = level {
            if !g.is_congruent_identity(p) {
                return None;
            }
        }
        match &hx {
            None => Some(a_o),
            Some(h) => {
                let a = cartan_at(&g.to_group_element(), h).ok()?;
                (a.norm() <= t).then_some(a)
            }
        }
    };
    let (si, sc) = (cfg.shard_index, cfg.shard_count);
    match cfg.d {
        2 => {
            let fmax = frobenius_bound_2(radius);
            let amax = isqrt((fmax - 1).max(0) as u128) as i64;
            let units: Vec<i64> = (-amax..=amax).filter(|a| ((a + amax) as usize) % sc == si).collect();
            Ok(units
                .par_iter()
                .fold(&identity, |mut acc, &a| {
                    visit_top_rows_2(a, fmax, |g| {
                        if let Some(ax) = accept(g, integer_cartan(g)) {
                            visit(&mut acc, g, &ax);
                        }
                    });
                    acc
                })
                .reduce(&identity, &combine))
        }
        _ => {
            let lmax = row_bound_3(radius);
            let r1s: Vec<[i64; 3]> = primitive_vectors_3(lmax)
                .into_iter()
                .enumerate()
                .filter(|(i, _)| i % sc == si)
                .map(|(_, v)| v)
                .collect();
            let t2 = radius * radius * (1.0 + 1e-9) + 1e-12;
            Ok(r1s
                .par_iter()
                .fold(&identity, |mut acc, r1| {
                    visit_first_row_3(r1, lmax, t2, |g| {
                        let fast = cartan_norm_3(g.entries());
                        if fast > radius + 1e-7 {
                            return;
                        }
                        let a = integer_cartan(g);
                        if a.norm() <= radius {
                            if let Some(ax) = accept(g, a) {
                                visit(&mut acc, g, &ax);
                            }
                        }
                    });
                    acc
                })
                .reduce(&identity, &combine))
        }
    }
}

/// All elements of the shard in canonical (lexicographic) order.
pub fn enumerate(cfg: &EnumConfig) -> Result<Vec<IntegerGroupElement>> {
    let mut out = par_fold(
        cfg,
        Vec::new,
        |acc, g, _| acc.push(*g),
        |mut a, mut b| {
            a.append(&mut b);
            a
        },
    )?;
    out.par_sort_unstable();
    Ok(out)
}

pub fn count(cfg: &EnumConfig) -> Result<u64> {
    par_fold(cfg, || 0u64, |acc, _, _| *acc += 1, |a, b| a + b)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct StripCounts {
    pub total: u64,
    pub regular: u64,
    pub strip: u64,
}

/// Counts of `Gamma ∩ D_t(x)`, of its Cartan-regular part and of the strip
/// within distance `s` of the walls.
pub fn count_strip(cfg: &EnumConfig) -> Result<StripCounts> {
    let s = cfg.strip.ok_or_else(|| Error::InvalidArgument("strip width not set".into()))?;
    par_fold(
        cfg,
        StripCounts::default,
        |acc, _, a| {
            acc.total += 1;
            if a.in_open_chamber(CHAMBER_MARGIN) {
                acc.regular += 1;
            }
            if a.wall_distance() <= s {
                acc.strip += 1;
            }
        },
        |a, b| StripCounts { total: a.total + b.total, regular: a.regular + b.regular, strip: a.strip + b.strip },
    )
}

/// Elements with top row `(a, b)` for all `b`, and Frobenius norm squared at most `fmax`.
fn visit_top_rows_2<F: FnMut(&IntegerGroupElement)>(a: i64, fmax: i128, mut f: F) {
    let a2 = (a as i128) * (a as i128);
    let rem = fmax - 1 - a2;
    if rem < 0 {
        return;
    }
    let bmax = isqrt(rem as u128) as i64;
    for b in -bmax..=bmax {
        if gcd(a, b) != 1 {
            continue;
        }
        let r = fmax - a2 - (b as i128) * (b as i128);
        // a d0 - b c0 = 1
        let (_, x, y) = ext_gcd(a, b);
        let (c0, d0) = (-(y as i128), x as i128);
        let (ai, bi) = (a as i128, b as i128);
        let uu = ai * ai + bi * bi;
        let wu = c0 * ai + d0 * bi;
        let ww = c0 * c0 + d0 * d0;
        // |w + k u|^2 = uu k^2 + 2 wu k + ww <= r
        let disc = (wu * wu - uu * (ww - r)) as f64;
        if disc < 0.0 {
            continue;
        }
        let center = -(wu as f64) / uu as f64;
        let half = disc.sqrt() / uu as f64;
        let k_lo = (center - half).floor() as i128 - 1;
        let k_hi = (center + half).ceil() as i128 + 1;
        for k in k_lo..=k_hi {
            if uu * k * k + 2 * wu * k + ww <= r {
                let c = c0 + k * ai;
                let d = d0 + k * bi;
                f(&IntegerGroupElement::from_parts_unchecked(2, &[a, b, c as i64, d as i64]));
            }
        }
    }
}

/// Primitive vectors of `Z^3` with norm at most `l`, in lexicographic order.
pub(crate) fn primitive_vectors_3(l: f64) -> Vec<[i64; 3]> {
    let l2 = (l * l * (1.0 + 1e-12)).floor() as i64;
    let m = isqrt(l2 as u128) as i64;
    let mut out = Vec::new();
    for x in -m..=m {
        let rx = l2 - x * x;
        let my = isqrt(rx as u128) as i64;
        for y in -my..=my {
            let ry = rx - y * y;
            let mz = isqrt(ry as u128) as i64;
            for z in -mz..=mz {
                if gcd(gcd(x, y), z) == 1 {
                    out.push([x, y, z]);
                }
            }
        }
    }
    out
}

/// `b2, b3` with `det(r1, b2, b3) = 1`, for primitive `r1`.
pub(crate) fn complete_basis_3(r1: &[i64; 3]) -> ([i64; 3], [i64; 3]) {
    // Column operations turning r1 into e_1, recorded in a unimodular M.
    let mut v = *r1;
    let mut m = [[1i64, 0, 0], [0, 1, 0], [0, 0, 1]];
    loop {
        let nonzero: Vec<usize> = (0..3).filter(|&i| v[i] != 0).collect();
        if nonzero.len() == 1 {
            break;
        }
        let piv = *nonzero.iter().min_by_key(|&&i| v[i].abs()).unwrap();
        for &j in &nonzero {
            if j != piv {
                let q = v[j] / v[piv];
                v[j] -= q * v[piv];
                for row in m.iter_mut() {
                    row[j] -= q * row[piv];
                }
            }
        }
    }
    let piv = (0..3).find(|&i| v[i] != 0).expect("primitive vector");
    if piv != 0 {
        v.swap(0, piv);
        for row in m.iter_mut() {
            row.swap(0, piv);
        }
    }
    if v[0] < 0 {
        for row in m.iter_mut() {
            row[0] = -row[0];
        }
    }
    // r1 = e1 M^{-1}; the other rows of M^{-1} complete the basis.
    let cols: [[i64; 3]; 3] = [[m[0][0], m[1][0], m[2][0]], [m[0][1], m[1][1], m[2][1]], [m[0][2], m[1][2], m[2][2]]];
    // Rows of M^{-1} are the dual basis of the columns of M: row_i = (col_j x col_k) / det.
    let det = dot3(&cols[0], &cross3(&cols[1], &cols[2]));
    let mut b2 = cross3(&cols[2], &cols[0]);
    let mut b3 = cross3(&cols[0], &cols[1]);
    if det < 0 {
        b2 = b2.map(|x| -x);
        b3 = b3.map(|x| -x);
    }
    if dot3(&cross3(r1, &b2), &b3) < 0 {
        b3 = b3.map(|x| -x);
    }
    (b2, b3)
}

fn to_f(v: &[i64; 3]) -> [f64; 3] {
    [v[0] as f64, v[1] as f64, v[2] as f64]
}

fn dotf(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Lagrange-Gauss reduction of two integer vectors with respect to the
/// quadratic form given by `proj` (a linear map applied before measuring).
fn gauss_reduce<P: Fn(&[i64; 3]) -> [f64; 3]>(u: &mut [i64; 3], v: &mut [i64; 3], proj: P) {
    for _ in 0..200 {
        let (pu, pv) = (proj(u), proj(v));
        let (nu, nv) = (dotf(&pu, &pu), dotf(&pv, &pv));
        if nv < nu {
            std::mem::swap(u, v);
            continue;
        }
        let mu = (dotf(&pu, &pv) / nu).round() as i64;
        if mu == 0 {
            return;
        }
        for i in 0..3 {
            v[i] -= mu * u[i];
        }
    }
}

/// Integer points `(x, y)` with `Q(x + c1, y + c2) <= r2` for the positive
/// definite form `g11 x^2 + 2 g12 x y + g22 y^2`. Ranges carry a small slack;
/// callers apply exact tests.
fn enum_2d<F: FnMut(i64, i64)>(g11: f64, g12: f64, g22: f64, c1: f64, c2: f64, r2: f64, mut f: F) {
    if r2 < 0.0 {
        return;
    }
    let det = (g11 * g22 - g12 * g12).max(1e-300);
    let ymax = (r2 * g11 / det).sqrt() * (1.0 + 1e-9) + 1e-9;
    let y_lo = (-c2 - ymax).ceil() as i64;
    let y_hi = (-c2 + ymax).floor() as i64;
    for y in y_lo..=y_hi {
        let yy = y as f64 + c2;
        let rem = r2 - det / g11 * yy * yy;
        if rem < -1e-9 * r2.max(1.0) {
            continue;
        }
        let half = (rem.max(0.0) / g11).sqrt() * (1.0 + 1e-9) + 1e-9;
        let center = -g12 / g11 * yy - c1;
        let x_lo = (center - half).ceil() as i64;
        let x_hi = (center + half).floor() as i64;
        for x in x_lo..=x_hi {
            f(x, y);
        }
    }
}

/// Largest `p` with `pair_bound(l, p) <= t2` (the bound is symmetric, so this
/// also caps `l` given `p`); `None` when no `p >= 0` qualifies.
fn partner_cap(l: f64, t2: f64) -> Option<f64> {
    if 1.5 * l * l > t2 {
        return None;
    }
    let mid = 0.5 * (l + (2.0 * t2 - 3.0 * l * l).max(0.0).sqrt());
    Some(if mid <= 2.0 * l { mid } else { (t2 / 1.5).sqrt() })
}

/// Integer `k` range with `||base + k step||^2 <= r2` (both integer vectors).
fn line_range(base: &[i64; 3], step: &[i64; 3], r2: f64) -> Option<(i64, i64)> {
    let (bf, sf) = (to_f(base), to_f(step));
    let ss = dotf(&sf, &sf);
    let bs = dotf(&bf, &sf);
    let bb = dotf(&bf, &bf);
    let disc = bs * bs - ss * (bb - r2);
    if disc < 0.0 {
        return None;
    }
    let center = -bs / ss;
    let half = disc.sqrt() / ss * (1.0 + 1e-9) + 1e-9;
    Some(((center - half).ceil() as i64, (center + half).floor() as i64))
}

fn visit_first_row_3<F: FnMut(&IntegerGroupElement)>(r1: &[i64; 3], lmax: f64, t2: f64, mut f: F) {
    let l2 = lmax * lmax * (1.0 + 1e-9);
    let r1f = to_f(r1);
    let n1 = dotf(&r1f, &r1f);
    let l1 = 0.5 * n1.ln();
    let Some(p_cap) = partner_cap(l1, t2) else {
        return;
    };
    let proj = |b: &[i64; 3]| -> [f64; 3] {
        let bf = to_f(b);
        let c = dotf(&bf, &r1f) / n1;
        [bf[0] - c * r1f[0], bf[1] - c * r1f[1], bf[2] - c * r1f[2]]
    };
    let (mut b2, mut b3) = complete_basis_3(r1);
    gauss_reduce(&mut b2, &mut b3, proj);
    let (p2, p3) = (proj(&b2), proj(&b3));
    let (g11, g12, g22) = (dotf(&p2, &p2), dotf(&p2, &p3), dotf(&p3, &p3));
    // ||r1 x r2|| = ||r1|| ||P r2|| <= sigma_1 sigma_2
    let cyl = (2.0 * p_cap).exp() * (1.0 + 1e-9) / n1;
    enum_2d(g11, g12, g22, 0.0, 0.0, cyl, |m, n| {
        if gcd(m, n) != 1 {
            return;
        }
        let w = [m * b2[0] + n * b3[0], m * b2[1] + n * b3[1], m * b2[2] + n * b3[2]];
        let Some((k_lo, k_hi)) = line_range(&w, r1, l2) else {
            return;
        };
        for k in k_lo..=k_hi {
            let r2 = [k * r1[0] + w[0], k * r1[1] + w[1], k * r1[2] + w[2]];
            let nr2 = dot3(&r2, &r2) as f64;
            if nr2 > l2 {
                continue;
            }
            let nrm = cross3(r1, &r2);
            let p = 0.5 * (dot3(&nrm, &nrm) as f64).ln();
            let l = l1.max(0.5 * nr2.ln());
            if pair_bound(l, p) > t2 {
                continue;
            }
            visit_third_rows(r1, &r2, &nrm, l, p, t2, &mut f);
        }
    });
}

/// Third rows `r3 = r30 + i r1 + j r2` with `r3 . (r1 x r2) = 1`. Every row of
/// `gamma` is bounded by `sigma_1` and every cross product of two rows by
/// `sigma_1 sigma_2`; the cross products with `r1` and `r2` pin down `j` and `i`
/// separately.
fn visit_third_rows<F: FnMut(&IntegerGroupElement)>(
    r1: &[i64; 3],
    r2: &[i64; 3],
    nrm: &[i64; 3],
    l: f64,
    p: f64,
    t2: f64,
    f: &mut F,
) {
    let (Some(l3), Some(p3)) = (partner_cap(p, t2), partner_cap(l, t2)) else {
        return;
    };
    let row2 = (2.0 * l3).exp() * (1.0 + 1e-9);
    let cross2 = (2.0 * p3).exp() * (1.0 + 1e-9);
    let (g1, x0, y0) = ext_gcd(nrm[0], nrm[1]);
    let (g, a, b) = ext_gcd(g1, nrm[2]);
    debug_assert_eq!(g, 1);
    let r30 = [a * x0, a * y0, b];
    // r1 x r3 = r1 x r30 + j n,  r2 x r3 = r2 x r30 - i n
    let Some((j_lo, j_hi)) = line_range(&cross3(r1, &r30), nrm, cross2) else {
        return;
    };
    let neg_n = nrm.map(|x| -x);
    let Some((i_lo, i_hi)) = line_range(&cross3(r2, &r30), &neg_n, cross2) else {
        return;
    };
    let row2_i = row2.floor() as i64;
    for j in j_lo..=j_hi {
        let base = [r30[0] + j * r2[0], r30[1] + j * r2[1], r30[2] + j * r2[2]];
        let Some((lo, hi)) = line_range(&base, r1, row2) else {
            continue;
        };
        for i in lo.max(i_lo)..=hi.min(i_hi) {
            let r3 = [base[0] + i * r1[0], base[1] + i * r1[1], base[2] + i * r1[2]];
            if dot3(&r3, &r3) > row2_i {
                continue;
            }
            let e = [r1[0], r1[1], r1[2], r2[0], r2[1], r2[2], r3[0], r3[1], r3[2]];
            f(&IntegerGroupElement::from_parts_unchecked(3, &e));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_radius_gives_the_four_rotations() {
        let out = enumerate(&EnumConfig::new(2, 1e-6)).unwrap();
        let want: Vec<Vec<i64>> = vec![vec![-1, 0, 0, -1], vec![0, -1, 1, 0], vec![0, 1, -1, 0], vec![1, 0, 0, 1]];
        let got: Vec<Vec<i64>> = out.iter().map(|g| g.entries().to_vec()).collect();
        assert_eq!(got, want);
        // SO(3) ∩ SL(3, Z) has 24 elements.
        assert_eq!(count(&EnumConfig::new(3, 1e-6)).unwrap(), 24);
    }

    #[test]
    fn complete_basis_is_unimodular() {
        for r1 in [[1, 0, 0], [0, 0, -1], [3, 5, 7], [-6, 10, 15], [2, -3, 0]] {
            let (b2, b3) = complete_basis_3(&r1);
            assert_eq!(dot3(&cross3(&r1, &b2), &b3), 1, "{r1:?}");
        }
    }

    #[test]
    fn pair_bound_matches_direct_minimization() {
        for &(l, p) in &[(1.0, 1.5), (1.0, 3.0), (3.0, 1.0), (0.5, 0.5), (0.0, 2.0)] {
            let mut best = f64::INFINITY;
            for i in 0..=400 {
                for j in 0..=400 {
                    let a1 = l + i as f64 * 0.01;
                    let a12 = p + j as f64 * 0.01;
                    let a2 = a12 - a1;
                    let a3 = -a12;
                    if a1 >= a2 && a2 >= a3 {
                        best = best.min(a1 * a1 + a2 * a2 + a3 * a3);
                    }
                }
            }
            assert!(pair_bound(l, p) <= best + 1e-9);
            assert!(best - pair_bound(l, p) < 0.1);
        }
    }

    #[test]
    fn invariant_norm_agrees_with_svd() {
        use crate::lattice::integer::det_i128;
        use rand::Rng;
        let mut rng = crate::random::seeded(3);
        let mut seen = 0;
        while seen < 300 {
            let e: Vec<i64> = (0..9).map(|_| rng.random_range(-9..=9)).collect();
            if det_i128(3, &e) != 1 {
                continue;
            }
            seen += 1;
            let g = IntegerGroupElement::new(3, &e).unwrap();
            assert!((cartan_norm_3(&e) - integer_cartan(&g).norm()).abs() < 1e-9, "{e:?}");
        }
        assert!(cartan_norm_3(IntegerGroupElement::identity(3).entries()) < 1e-9);
    }

    #[test]
    fn overflow_is_refused() {
        assert!(matches!(count(&EnumConfig::new(3, 40.0)), Err(Error::Overflow(_))));
    }

    #[test]
    fn shards_partition_the_output() {
        let all = enumerate(&EnumConfig::new(3, 2.0)).unwrap();
        let mut parts: Vec<IntegerGroupElement> = (0..3)
            .flat_map(|i| enumerate(&EnumConfig::new(3, 2.0).with_shard(i, 3)).unwrap())
            .collect();
        parts.sort();
        assert_eq!(all, parts);
    }
}
