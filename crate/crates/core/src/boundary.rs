//! Full flags of `R^d` (the Furstenberg boundary `K/M`), their metrics, the
//! Iwasawa and Busemann cocycles, Gromov products and Hopf coordinates.
//!
//! A flag is carried as an orthonormal frame whose first `i` columns span its
//! `i`-dimensional subspace. Every metric quantity goes through unit Plücker
//! vectors, so the diagonal sign ambiguity of the frame never matters.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{
    cartan_kak, cartan_projection, jordan_projection, qr_positive, symmetric_distance, sum_zero_basis,
    CartanVector, GroupElement, WeylGeometry, CHAMBER_MARGIN,
};
use crate::random::gaussian_matrix;

#[derive(Clone, Debug)]
pub struct Flag {
    frame: DMatrix<f64>,
}

impl Flag {
    /// Gram-Schmidt orthonormalization of the columns; nested spans are preserved.
    pub fn from_frame(m: &DMatrix<f64>) -> Flag {
        let (q, _) = qr_positive(m);
        Flag { frame: q }
    }

    /// The standard flag `eta_0 = (e_1, ..., e_d)`.
    pub fn standard(d: usize) -> Flag {
        Flag { frame: DMatrix::identity(d, d) }
    }

    /// The opposite flag `zeta_0 = (e_d, ..., e_1)`.
    pub fn opposite(d: usize) -> Flag {
        Flag { frame: DMatrix::from_fn(d, d, |i, j| if i + j == d - 1 { 1.0 } else { 0.0 }) }
    }

    pub fn dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    pub fn act(&self, g: &GroupElement) -> Flag {
        Flag::from_frame(&(g.matrix() * &self.frame))
    }

    /// Frame with each column's largest-magnitude entry made positive.
    pub fn canonical(&self) -> Flag {
        let mut f = self.frame.clone();
        for j in 0..f.ncols() {
            let mut best = 0;
            for i in 1..f.nrows() {
                if f[(i, j)].abs() > f[(best, j)].abs() + 1e-12 {
                    best = i;
                }
            }
            if f[(best, j)] < 0.0 {
                f.column_mut(j).neg_mut();
            }
        }
        Flag { frame: f }
    }

    /// Columns in reverse order; as a frame this is `k zeta_0`.
    pub fn reversed_frame(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| self.frame[(i, d - 1 - j)])
    }
}

/// Lexicographic `k`-subsets of `0..n`.
pub(crate) fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = k;
        while i > 0 && cur[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        for j in i..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Plücker coordinates of the span of the given columns.
pub fn wedge(cols: &DMatrix<f64>) -> DVector<f64> {
    let (n, k) = (cols.nrows(), cols.ncols());
    let rows = subsets(n, k);
    DVector::from_iterator(
        rows.len(),
        rows.iter().map(|r| DMatrix::from_fn(k, k, |a, b| cols[(r[a], b)]).determinant()),
    )
}

/// Unit Plücker vector of the `i`-dimensional subspace of the flag.
pub fn wedge_line(flag: &Flag, i: usize) -> DVector<f64> {
    assert!(i >= 1 && i < flag.dim(), "wedge degree out of range");
    let w = wedge(&flag.frame.columns(0, i).into_owned());
    let n = w.norm();
    w / n
}

/// Sine of the angle between two lines.
pub fn proj_dist(x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
    let (nx, ny) = (x.norm(), y.norm());
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::Degenerate("zero vector has no projective class".into()));
    }
    let (x, y) = (x / nx, y / ny);
    let c = x.dot(&y);
    Ok((&x - &y * c).norm().min(1.0))
}

pub fn flag_dist(xi: &Flag, eta: &Flag) -> f64 {
    (1..xi.dim())
        .map(|i| proj_dist(&wedge_line(xi, i), &wedge_line(eta, i)).expect("unit vectors"))
        .fold(0.0, f64::max)
}

/// `delta_i(xi, eta) = |<wedge(xi_1..xi_i), wedge(last i columns of eta)>|`,
/// i.e. the distance from `x^i(xi)` to the hyperplane annihilating the
/// complementary subspace `eta^{(d-i)}`.
pub fn flag_delta_components(xi: &Flag, eta: &Flag) -> Vec<f64> {
    let d = xi.dim();
    (1..d)
        .map(|i| {
            let m = xi.frame.columns(0, i).transpose() * eta.frame.columns(d - i, i);
            m.determinant().abs().min(1.0)
        })
        .collect()
}

pub fn flag_delta(xi: &Flag, eta: &Flag) -> f64 {
    flag_delta_components(xi, eta).into_iter().fold(1.0, f64::min)
}

/// A transverse pair of flags.
#[derive(Clone, Debug)]
pub struct TransversePair {
    pub xi: Flag,
    pub eta: Flag,
}

impl TransversePair {
    pub fn new(xi: Flag, eta: Flag) -> Result<Self> {
        let delta = flag_delta(&xi, &eta);
        if delta <= 1e-12 {
            return Err(Error::NotTransverse(delta));
        }
        Ok(Self { xi, eta })
    }
}

/// `sigma(g, xi)`: the `A`-part of `g k_xi` in `K A N`.
pub fn iwasawa_cocycle(g: &GroupElement, xi: &Flag) -> CartanVector {
    let m = g.matrix() * &xi.frame;
    let (_, r) = qr_positive(&m);
    CartanVector::project((0..m.ncols()).map(|i| r[(i, i)].ln()).collect())
}

/// Same cocycle through wedge norms: `chi^i(sigma) = log ||g v_1 ^ ... ^ g v_i||`.
pub fn iwasawa_cocycle_wedge(g: &GroupElement, xi: &Flag) -> CartanVector {
    let d = xi.dim();
    let gm = g.matrix() * &xi.frame;
    let chi: Vec<f64> = (1..d)
        .map(|i| {
            let cols = gm.columns(0, i);
            (cols.transpose() * cols).determinant().sqrt().ln()
        })
        .collect();
    WeylGeometry { d }.from_chi_values(&chi)
}

/// Busemann cocycle `beta_xi(x, y) = sigma(h_x^{-1} h_y, h_y^{-1} xi)`.
pub fn busemann(xi: &Flag, hx: &GroupElement, hy: &GroupElement) -> CartanVector {
    let hy_inv = hy.inverse();
    iwasawa_cocycle(&hx.inverse().mul(hy), &xi.act(&hy_inv))
}

/// Gromov product `(xi|eta)_x`, determined by `chi^i((xi|eta)_x) = -log delta_i`
/// where `delta_i` pairs `eta^{(i)}` with `xi^{(d-i)}`.
pub fn gromov_product(xi: &Flag, eta: &Flag, hx: &GroupElement) -> Result<CartanVector> {
    let hinv = hx.inverse();
    let (xi, eta) = (xi.act(&hinv), eta.act(&hinv));
    let deltas = flag_delta_components(&eta, &xi);
    let m = deltas.iter().copied().fold(1.0, f64::min);
    if m <= 1e-300 {
        return Err(Error::NotTransverse(m));
    }
    let chi: Vec<f64> = deltas.iter().map(|x| -x.ln()).collect();
    Ok(WeylGeometry { d: xi.dim() }.from_chi_values(&chi))
}

/// A point of `G/M` in Hopf coordinates.
#[derive(Clone, Debug)]
pub struct HopfPoint {
    pub xi: Flag,
    pub eta: Flag,
    pub y: CartanVector,
}

pub fn hopf_forward(g: &GroupElement) -> HopfPoint {
    let d = g.dim();
    let eta0 = Flag::standard(d);
    HopfPoint { xi: eta0.act(g), eta: Flag::opposite(d).act(g), y: iwasawa_cocycle(g, &eta0) }
}

pub fn hopf_g_action(h: &GroupElement, p: &HopfPoint) -> HopfPoint {
    HopfPoint { xi: p.xi.act(h), eta: p.eta.act(h), y: p.y.add(&iwasawa_cocycle(h, &p.xi)) }
}

pub fn hopf_a_action(p: &HopfPoint, v: &CartanVector) -> HopfPoint {
    HopfPoint { xi: p.xi.clone(), eta: p.eta.clone(), y: p.y.add(v) }
}

/// Unit vector spanning `xi^{(i)} ∩ eta^{(d-i+1)}` (1-based `i`).
fn intersection_line(xi: &Flag, eta: &Flag, i: usize) -> DVector<f64> {
    let d = xi.dim();
    let base = xi.frame.columns(0, i).into_owned();
    if i == 1 {
        return base.column(0).into_owned();
    }
    // Coefficients c with eta's last (i-1) columns orthogonal to base * c.
    let constraint = eta.frame.columns(d - i + 1, i - 1).transpose() * &base;
    let mut padded = DMatrix::zeros(i, i);
    padded.rows_mut(0, i - 1).copy_from(&constraint);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let (idx, _) = svd.singular_values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let c = vt.row(idx).transpose();
    (&base * c).normalize()
}

/// Some `g` with `hopf_forward(g) = p`, unique up to right multiplication by `M`.
pub fn hopf_inverse(p: &HopfPoint) -> Result<GroupElement> {
    let d = p.xi.dim();
    let delta = flag_delta(&p.xi, &p.eta);
    if delta <= 1e-12 {
        return Err(Error::NotTransverse(delta));
    }
    let cols: Vec<DVector<f64>> = (1..=d).map(|i| intersection_line(&p.xi, &p.eta, i)).collect();
    let mut h = DMatrix::from_columns(&cols);
    if h.determinant() < 0.0 {
        h.column_mut(d - 1).neg_mut();
    }
    let h = GroupElement::new(h)?;
    let shift = p.y.sub(&iwasawa_cocycle(&h, &Flag::standard(d)));
    Ok(h.mul(&GroupElement::exp_cartan(&shift)))
}

/// The flag opposite to `xi` seen from `x = h_x o`.
pub fn xi_perp(hx: &GroupElement, xi: &Flag) -> Flag {
    let local = xi.act(&hx.inverse());
    Flag::from_frame(&(hx.matrix() * local.reversed_frame()))
}

/// Distance from `x` to the maximal flat of a transverse pair and the
/// minimizing Hopf coordinate `v`, i.e. the point `g_{xi,eta} exp(v) o`.
pub fn flat_distance(hx: &GroupElement, pair: &TransversePair) -> Result<(f64, CartanVector)> {
    let d = pair.xi.dim();
    let g = hopf_inverse(&HopfPoint { xi: pair.xi.clone(), eta: pair.eta.clone(), y: CartanVector::zero(d) })?;
    let base = hx.inverse().mul(&g);
    let basis = sum_zero_basis(d);
    let to_cartan = |c: &[f64]| -> CartanVector {
        let mut v = vec![0.0; d];
        for (b, ci) in basis.iter().zip(c) {
            for k in 0..d {
                v[k] += b[k] * ci;
            }
        }
        CartanVector::project(v)
    };
    let f = |c: &[f64]| -> f64 {
        let e = GroupElement::exp_cartan(&to_cartan(c));
        match cartan_projection(&base.mul(&e)) {
            Ok(a) => a.dot(&a),
            Err(_) => f64::INFINITY,
        }
    };
    let n = d - 1;
    // Start from the Iwasawa coordinate of x along the flat.
    let start = iwasawa_cocycle(&base.inverse(), &Flag::standard(d)).scale(-1.0);
    let mut c: Vec<f64> = basis.iter().map(|b| b.iter().zip(start.entries()).map(|(x, y)| x * y).sum()).collect();
    let mut fc = f(&c);
    let h = 1e-4;
    for _ in 0..200 {
        let mut grad = vec![0.0; n];
        let mut hess = DMatrix::zeros(n, n);
        for i in 0..n {
            let mut cp = c.clone();
            cp[i] += h;
            let mut cm = c.clone();
            cm[i] -= h;
            let (fp, fm) = (f(&cp), f(&cm));
            grad[i] = (fp - fm) / (2.0 * h);
            hess[(i, i)] = (fp - 2.0 * fc + fm) / (h * h);
            for j in 0..i {
                let mut pp = c.clone();
                pp[i] += h;
                pp[j] += h;
                let mut pm = c.clone();
                pm[i] += h;
                pm[j] -= h;
                let mut mp = c.clone();
                mp[i] -= h;
                mp[j] += h;
                let mut mm = c.clone();
                mm[i] -= h;
                mm[j] -= h;
                let v = (f(&pp) - f(&pm) - f(&mp) + f(&mm)) / (4.0 * h * h);
                hess[(i, j)] = v;
                hess[(j, i)] = v;
            }
        }
        let gnorm = grad.iter().map(|x| x * x).sum::<f64>().sqrt();
        if gnorm < 1e-11 {
            break;
        }
        let gvec = DVector::from_vec(grad.clone());
        let step = match hess.clone().cholesky() {
            Some(ch) => ch.solve(&gvec),
            None => gvec.clone(),
        };
        let mut t = 1.0;
        let mut improved = false;
        while t > 1e-12 {
            let trial: Vec<f64> = c.iter().zip(step.iter()).map(|(ci, si)| ci - t * si).collect();
            let ft = f(&trial);
            if ft <= fc {
                improved = fc - ft > 0.0 || t == 1.0;
                c = trial;
                fc = ft;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok((fc.max(0.0).sqrt(), to_cartan(&c)))
}

/// K-invariant probability on flags: orthonormalized Gaussian frames.
pub fn mu_o_sample<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Flag {
    Flag::from_frame(&gaussian_matrix(d, rng))
}

/// Radon-Nikodym derivative `d g_* mu_o / d mu_o (xi) = exp(-2 rho(sigma(g^{-1}, xi)))`,
/// with `rho` the half sum of positive roots.
pub fn quasi_density(g: &GroupElement, xi: &Flag) -> f64 {
    let w = WeylGeometry { d: g.dim() };
    (-2.0 * w.rho(&iwasawa_cocycle(&g.inverse(), xi))).exp()
}

/// Attracting and repelling flags of `g` seen from `x = h_x o`, from the
/// Cartan decomposition of `h_x^{-1} g h_x`.
pub fn gamma_x_flags(g: &GroupElement, hx: &GroupElement) -> Result<(Flag, Flag)> {
    let local = g.conjugate_by(hx);
    let kak = cartan_kak(&local)?;
    if !kak.a.in_open_chamber(CHAMBER_MARGIN) {
        return Err(Error::NotRegular(format!("Cartan projection {:?} is on a wall", kak.a.entries())));
    }
    let plus = Flag::from_frame(&(hx.matrix() * &kak.k));
    let l = Flag { frame: kak.l };
    let minus = Flag::from_frame(&(hx.matrix() * l.reversed_frame()));
    Ok((plus, minus))
}

/// Attracting flag of `m` by orthogonal subspace iteration from `start`.
/// Each sweep costs one product and one QR; the spans converge at the rate of
/// the eigenvalue-modulus ratios and never need the (possibly inaccurate)
/// small eigenvalues themselves.
fn subspace_iteration(m: &DMatrix<f64>, start: &DMatrix<f64>) -> Flag {
    let mut f = Flag::from_frame(start);
    for _ in 0..500 {
        let next = Flag::from_frame(&(m * &f.frame));
        let change = flag_dist(&next, &f);
        f = next;
        if change < 1e-15 {
            break;
        }
    }
    f
}

/// Attracting and repelling flags of a loxodromic element.
///
/// `g+` is spanned by eigenvectors in order of decreasing modulus. The
/// repelling flag is obtained through left eigenvectors:
/// `g-^{(i)}` is the annihilator of the top `d - i` left eigenvectors.
pub fn eigenflags(g: &GroupElement) -> Result<(Flag, Flag)> {
    let j = jordan_projection(g);
    if !j.is_loxodromic(CHAMBER_MARGIN) {
        return Err(Error::NotRegular("element is not loxodromic".into()));
    }
    let basis = j
        .eigenbasis
        .ok_or_else(|| Error::NotRegular("eigenvalue moduli are not distinct".into()))?;
    let m = g.matrix();
    let plus = subspace_iteration(m, &basis);
    let left_start = match basis.clone().try_inverse() {
        Some(inv) => inv.transpose(),
        None => DMatrix::identity(g.dim(), g.dim()),
    };
    let left = subspace_iteration(&m.transpose(), &left_start);
    let minus = Flag::from_frame(&left.reversed_frame());
    Ok((plus, minus))
}

/// Constants of the loxodromic configuration test. The threshold is
/// `t0 = 2 log C_x - 2 log eps + offset` with `C_x = c1 exp(c0 d_X(o, x))`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LoxConfigParams {
    pub c1: f64,
    pub c0: f64,
    pub offset: f64,
}

impl Default for LoxConfigParams {
    fn default() -> Self {
        Self { c1: 2.0, c0: 1.0, offset: 0.0 }
    }
}

impl LoxConfigParams {
    pub fn t0(&self, dist_ox: f64, eps: f64) -> f64 {
        2.0 * (self.c1.ln() + self.c0 * dist_ox) - 2.0 * eps.ln() + self.offset
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LoxConfigReport {
    pub t0: f64,
    pub wall_distance: f64,
    pub regular_deep: bool,
    pub flat_distance: Option<f64>,
    pub near_flat: bool,
    /// `Some(true)` when both hypotheses hold; no verdict otherwise.
    pub predicted_loxodromic: Option<bool>,
    pub actual_loxodromic: bool,
    /// `max(d(g+, g_x+), d(g-, g_x-))` when a verdict was made.
    pub flag_error: Option<f64>,
    pub conclusion_holds: Option<bool>,
}

pub fn loxodromic_config_check(
    g: &GroupElement,
    hx: &GroupElement,
    r: f64,
    eps: f64,
    params: &LoxConfigParams,
) -> LoxConfigReport {
    let d = g.dim();
    let dist_ox = symmetric_distance(&GroupElement::identity(d), hx).unwrap_or(f64::INFINITY);
    let t0 = params.t0(dist_ox, eps);
    let ax = cartan_projection(&g.conjugate_by(hx));
    let wall_distance = match &ax {
        Ok(a) if a.in_open_chamber(CHAMBER_MARGIN) => a.wall_distance(),
        _ => 0.0,
    };
    let regular_deep = wall_distance >= t0;
    let actual_loxodromic = jordan_projection(g).is_loxodromic(CHAMBER_MARGIN);
    let mut report = LoxConfigReport {
        t0,
        wall_distance,
        regular_deep,
        flat_distance: None,
        near_flat: false,
        predicted_loxodromic: None,
        actual_loxodromic,
        flag_error: None,
        conclusion_holds: None,
    };
    if !regular_deep {
        return report;
    }
    let Ok((plus_x, minus_x)) = gamma_x_flags(g, hx) else {
        return report;
    };
    let Ok(pair) = TransversePair::new(plus_x.clone(), minus_x.clone()) else {
        return report;
    };
    let fd = flat_distance(hx, &pair).map(|x| x.0).unwrap_or(f64::INFINITY);
    report.flat_distance = Some(fd);
    report.near_flat = fd < r;
    if !report.near_flat {
        return report;
    }
    report.predicted_loxodromic = Some(true);
    if let Ok((plus, minus)) = eigenflags(g) {
        let err = flag_dist(&plus, &plus_x).max(flag_dist(&minus, &minus_x));
        report.flag_error = Some(err);
        report.conclusion_holds = Some(err <= eps);
    } else {
        report.conclusion_holds = Some(false);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{gaussian_group_element, random_kak_element, seeded};

    fn rot(th: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[th.cos(), -th.sin(), th.sin(), th.cos()])
    }

    #[test]
    fn wedge_line_examples() {
        let e = Flag::standard(3);
        let w1 = wedge_line(&e, 1);
        assert_eq!(w1.as_slice(), &[1.0, 0.0, 0.0]);
        let w2 = wedge_line(&e, 2);
        assert!((w2[0] - 1.0).abs() < 1e-15 && w2.iter().skip(1).all(|x| x.abs() < 1e-15));
        let th = 0.4f64;
        let w = wedge_line(&Flag::from_frame(&rot(th)), 1);
        assert!((w[0] - th.cos()).abs() < 1e-15 && (w[1] - th.sin()).abs() < 1e-15);
        assert_eq!(subsets(4, 2).len(), 6);
    }

    #[test]
    fn proj_dist_examples() {
        let e1 = DVector::from_vec(vec![1.0, 0.0]);
        let e2 = DVector::from_vec(vec![0.0, 1.0]);
        assert!((proj_dist(&e1, &e2).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(proj_dist(&e1, &e1).unwrap(), 0.0);
        let s = DVector::from_vec(vec![1.0, 1.0]) / 2f64.sqrt();
        assert!((proj_dist(&e1, &s).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(proj_dist(&e1, &DVector::zeros(2)).is_err());
    }

    #[test]
    fn delta_examples() {
        for d in 2..=4 {
            assert!((flag_delta(&Flag::standard(d), &Flag::opposite(d)) - 1.0).abs() < 1e-15);
            assert!(flag_dist(&Flag::standard(d), &Flag::standard(d)) < 1e-15);
            assert!(flag_delta(&Flag::standard(d), &Flag::standard(d)) < 1e-15);
        }
        for th in [0.1, 0.7, 1.2, 2.5] {
            let xi = Flag::from_frame(&rot(th));
            let brute = (th as f64).cos().abs();
            assert!((flag_delta(&xi, &Flag::opposite(2)) - brute).abs() < 1e-14);
        }
    }

    #[test]
    fn cocycle_examples() {
        let g = GroupElement::from_rows(2, &[1.0, 0.0, 1.0, 1.0]).unwrap();
        let s = iwasawa_cocycle(&g, &Flag::standard(2));
        assert!((s.entries()[0] - 2f64.ln() / 2.0).abs() < 1e-14);
        let k = GroupElement::from_matrix_unchecked(rot(0.9));
        let mut rng = seeded(1);
        let xi = mu_o_sample(2, &mut rng);
        assert!(iwasawa_cocycle(&k, &xi).norm() < 1e-14);
        assert!((quasi_density(&k, &xi) - 1.0).abs() < 1e-14);
        let v = CartanVector::new(vec![0.5, 0.2, -0.7]).unwrap();
        let s = iwasawa_cocycle(&GroupElement::exp_cartan(&v), &Flag::standard(3));
        assert!(s.max_abs_diff(&v) < 1e-14);
    }

    #[test]
    fn gromov_examples() {
        let id = GroupElement::identity(3);
        let z = gromov_product(&Flag::standard(3), &Flag::opposite(3), &id).unwrap();
        assert!(z.norm() < 1e-14);
        let th = 0.6f64;
        let xi = Flag::from_frame(&rot(th));
        let z = gromov_product(&xi, &Flag::opposite(2), &GroupElement::identity(2)).unwrap();
        assert!((z.entries()[0] + th.cos().abs().ln()).abs() < 1e-13);
        assert!(matches!(
            gromov_product(&Flag::standard(2), &Flag::standard(2), &GroupElement::identity(2)),
            Err(Error::NotTransverse(_))
        ));
    }

    #[test]
    fn gromov_transform_rule() {
        let mut rng = seeded(7);
        for d in [2, 3] {
            let w = WeylGeometry { d };
            let id = GroupElement::identity(d);
            for _ in 0..50 {
                let g = gaussian_group_element(d, &mut rng);
                let xi = mu_o_sample(d, &mut rng);
                let eta = mu_o_sample(d, &mut rng);
                let lhs = gromov_product(&xi.act(&g), &eta.act(&g), &id)
                    .unwrap()
                    .sub(&gromov_product(&xi, &eta, &id).unwrap());
                let rhs = w.opposition(&iwasawa_cocycle(&g, &xi)).add(&iwasawa_cocycle(&g, &eta));
                assert!(lhs.max_abs_diff(&rhs) < 1e-7, "{lhs:?} vs {rhs:?}");
            }
        }
    }

    #[test]
    fn hopf_identity_and_round_trip() {
        let p = hopf_forward(&GroupElement::identity(3));
        assert!(flag_dist(&p.xi, &Flag::standard(3)) < 1e-15);
        assert!(flag_dist(&p.eta, &Flag::opposite(3)) < 1e-15);
        assert!(p.y.norm() < 1e-15);
        let mut rng = seeded(3);
        for d in [2, 3] {
            for _ in 0..50 {
                let g = gaussian_group_element(d, &mut rng);
                let back = hopf_inverse(&hopf_forward(&g)).unwrap();
                // g^{-1} back must be a diagonal sign matrix.
                let m = g.inverse().mul(&back).into_matrix();
                for i in 0..d {
                    for j in 0..d {
                        let want = if i == j { m[(i, i)].signum() } else { 0.0 };
                        assert!((m[(i, j)] - want).abs() < 1e-8);
                    }
                }
            }
        }
    }

    #[test]
    fn xi_perp_examples() {
        let id = GroupElement::identity(3);
        assert!(flag_dist(&xi_perp(&id, &Flag::standard(3)), &Flag::opposite(3)) < 1e-14);
        let mut rng = seeded(5);
        for d in [2, 3] {
            for _ in 0..30 {
                let g = gaussian_group_element(d, &mut rng);
                let hx = random_kak_element(d, 1.0, &mut rng);
                let xi = mu_o_sample(d, &mut rng);
                let lhs = xi_perp(&g.mul(&hx), &xi.act(&g));
                let rhs = xi_perp(&hx, &xi).act(&g);
                assert!(flag_dist(&lhs, &rhs) < 1e-8);
                // A point of the flat of (xi, eta) sees eta opposite to xi.
                let eta = mu_o_sample(d, &mut rng);
                let flat = hopf_inverse(&HopfPoint { xi: xi.clone(), eta: eta.clone(), y: CartanVector::zero(d) }).unwrap();
                let v = crate::random::random_direction(d, &mut rng);
                let p = flat.mul(&GroupElement::exp_cartan(&v));
                assert!(flag_dist(&xi_perp(&p, &xi), &eta) < 1e-8);
            }
        }
    }

    #[test]
    fn flat_distance_matches_grid_oracle() {
        let d = 2;
        let pair = TransversePair::new(Flag::standard(d), Flag::opposite(d)).unwrap();
        let n = GroupElement::from_rows(2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
        let (dist, _) = flat_distance(&n, &pair).unwrap();
        let mut best = f64::INFINITY;
        for k in -4000..=4000 {
            let s = k as f64 * 1e-3;
            let e = GroupElement::exp_cartan(&CartanVector::new(vec![s, -s]).unwrap());
            best = best.min(symmetric_distance(&n, &e).unwrap());
        }
        assert!((dist - best).abs() < 1e-6, "{dist} vs {best}");
        let (on, _) = flat_distance(&GroupElement::identity(2), &pair).unwrap();
        assert!(on < 1e-6);
    }

    #[test]
    fn eigenflags_examples() {
        let v = CartanVector::new(vec![1.0, 0.2, -1.2]).unwrap();
        let g = GroupElement::exp_cartan(&v);
        let (p, m) = eigenflags(&g).unwrap();
        assert!(flag_dist(&p, &Flag::standard(3)) < 1e-12);
        assert!(flag_dist(&m, &Flag::opposite(3)) < 1e-12);
        let (p, m) = gamma_x_flags(&g, &GroupElement::identity(3)).unwrap();
        assert!(flag_dist(&p, &Flag::standard(3)) < 1e-12);
        assert!(flag_dist(&m, &Flag::opposite(3)) < 1e-12);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let g = GroupElement::from_rows(2, &[2.0, 1.0, 1.0, 1.0]).unwrap();
        let (p, _) = eigenflags(&g).unwrap();
        let line = DVector::from_vec(vec![phi, 1.0]);
        assert!(proj_dist(&wedge_line(&p, 1), &line).unwrap() < 1e-12);
        // g acts on (g+, g-, Y) by translation by its Jordan projection.
        let (p, m) = eigenflags(&g).unwrap();
        let y = CartanVector::new(vec![0.3, -0.3]).unwrap();
        let q = hopf_g_action(&g, &HopfPoint { xi: p.clone(), eta: m, y: y.clone() });
        let lam = jordan_projection(&g).lambda;
        assert!(q.y.sub(&y).max_abs_diff(&lam) < 1e-12);
        assert!(flag_dist(&q.xi, &p) < 1e-12);
        assert!(eigenflags(&GroupElement::from_rows(2, &[1.0, 1.0, 0.0, 1.0]).unwrap()).is_err());
    }

    #[test]
    fn config_check_trivial_cases() {
        let mut rng = seeded(11);
        let h = random_kak_element(3, 0.4, &mut rng);
        let a = CartanVector::new(vec![12.0, 0.0, -12.0]).unwrap();
        let g = GroupElement::exp_cartan(&a).conjugate_by(&h.inverse());
        let rep = loxodromic_config_check(&g, &h, 1.0, 0.05, &LoxConfigParams::default());
        assert!(rep.regular_deep && rep.near_flat);
        assert_eq!(rep.predicted_loxodromic, Some(true));
        assert!(rep.flag_error.unwrap() < 1e-8, "{rep:?}");
        let u = GroupElement::from_rows(3, &[1.0, 5.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        let rep = loxodromic_config_check(&u, &GroupElement::identity(3), 1.0, 0.05, &LoxConfigParams::default());
        assert!(!rep.regular_deep && rep.predicted_loxodromic.is_none());
    }
}
