//! Systoles of unimodular lattices `Z^d g`, Siegel reduction and the height function.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::boundary::{hopf_inverse, HopfPoint};
use crate::error::{Error, Result};
use crate::lattice::IntegerGroupElement;
use crate::lie::{CartanVector, GroupElement, WeylGeometry};
use crate::random::haar_rotation;
use crate::reduce::{lll, shortest_vector};
use crate::tori::{TorusFrame, TorusRecord};

/// Shortest nonzero vector of the row lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct Systole {
    pub length: f64,
    /// Integer coefficients `c` with `c g` shortest.
    pub witness: Vec<i64>,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// `s(g)`, the length of a shortest nonzero vector of `Z^d g`.
pub fn systole(g: &GroupElement) -> Systole {
    let (witness, length) = shortest_vector(&rows(g.matrix()));
    Systole { length, witness }
}

/// `1 / s(g)`.
pub fn omega_level(g: &GroupElement) -> f64 {
    1.0 / systole(g).length
}

pub fn omega_level_hopf(p: &HopfPoint) -> Result<f64> {
    Ok(omega_level(&hopf_inverse(p)?))
}

/// Hermite's constant `γ_d` for `d <= 3`: `s(g)² <= γ_d` on unimodular lattices.
pub fn hermite_constant(d: usize) -> Result<f64> {
    match d {
        1 => Ok(1.0),
        2 => Ok((4.0f64 / 3.0).sqrt()),
        3 => Ok(2f64.cbrt()),
        _ => Err(Error::Unsupported(format!("Hermite constant for d = {d}"))),
    }
}

/// Smallest possible height `1 / sqrt(γ_d)`.
pub fn height_floor(d: usize) -> Result<f64> {
    Ok(1.0 / hermite_constant(d)?.sqrt())
}

/// `γ g = n exp(a) k` with `n` upper unipotent, `k` orthogonal.
#[derive(Clone, Debug)]
pub struct SiegelForm {
    pub gamma: IntegerGroupElement,
    pub n: DMatrix<f64>,
    pub a: CartanVector,
    pub k: DMatrix<f64>,
    pub s0: f64,
    pub u0: f64,
}

impl SiegelForm {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let d = self.n.nrows();
        let diag = DMatrix::from_fn(d, d, |i, j| if i == j { self.a.entries()[i].exp() } else { 0.0 });
        &self.n * diag * &self.k
    }

    /// Largest off-diagonal entry of `n`.
    pub fn n_norm(&self) -> f64 {
        let d = self.n.nrows();
        (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).fold(0.0, |m, (i, j)| m.max(self.n[(i, j)].abs()))
    }

    /// Smallest `a_i / a_{i+1}`.
    pub fn min_ratio(&self) -> f64 {
        self.a.entries().windows(2).map(|w| (w[0] - w[1]).exp()).fold(f64::INFINITY, f64::min)
    }

    pub fn in_domain(&self, tol: f64) -> bool {
        self.n_norm() <= self.s0 + tol && self.min_ratio() >= self.u0 - tol
    }

    /// `a_d`, the length of the last row.
    pub fn a_last(&self) -> f64 {
        self.a.entries().last().unwrap().exp()
    }
}

/// `g = n exp(a) k`, orthogonalizing the rows from the last one upward.
pub fn nak(g: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let d = g.nrows();
    let mut k = DMatrix::zeros(d, d);
    let mut n = DMatrix::identity(d, d);
    let mut a = vec![0.0; d];
    for i in (0..d).rev() {
        let mut v = g.row(i).into_owned();
        for j in i + 1..d {
            let c = v.dot(&k.row(j));
            n[(i, j)] = c / a[j];
            v -= k.row(j) * c;
        }
        a[i] = v.norm();
        k.set_row(i, &(v / a[i]));
    }
    (n, a, k)
}

/// Bring `g` into the Siegel domain with `s0 = 1`, `u0 = 0.8`.
///
/// LLL with `δ = 0.99` on the rows taken bottom-up gives `|n_ij| <= 1/2` and
/// `a_i / a_{i+1} >= sqrt(0.74)`.
pub fn siegel_reduce(g: &GroupElement) -> Result<SiegelForm> {
    let d = g.dim();
    if d > 3 {
        return Err(Error::Unsupported(format!("Siegel reduction for d = {d}")));
    }
    let m = g.matrix();
    let reversed: Vec<Vec<f64>> = (0..d).rev().map(|i| m.row(i).iter().copied().collect()).collect();
    let red = lll(&reversed, 0.99);
    // Rows of γ in the original (top-down) order.
    let mut gamma: Vec<i64> = vec![0; d * d];
    for (r, u) in red.transform.iter().enumerate() {
        let i = d - 1 - r;
        for (c, &x) in u.iter().enumerate() {
            gamma[i * d + (d - 1 - c)] = x;
        }
    }
    if crate::lattice::integer::det_i128(d, &gamma) < 0 {
        gamma[..d].iter_mut().for_each(|x| *x = -*x);
    }
    let gamma = IntegerGroupElement::new(d, &gamma)?;
    let reduced = gamma.to_group_element().matrix() * m;
    let (n, a, k) = nak(&reduced);
    Ok(SiegelForm { gamma, n, a: CartanVector::project(a.iter().map(|x| x.ln()).collect()), k, s0: 1.0, u0: 0.8 })
}

/// Heights `1/s` along a sample, with summary quantiles.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HeightProfile {
    pub values: Vec<f64>,
    pub min: f64,
    pub median: f64,
    pub p90: f64,
    pub max: f64,
    /// `1 / sqrt(γ_d)`: no unimodular lattice is lower.
    pub floor: f64,
}

impl HeightProfile {
    pub fn new(d: usize, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("empty height sample".into()));
        }
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        let q = |p: f64| sorted[((sorted.len() - 1) as f64 * p).round() as usize];
        Ok(Self { min: sorted[0], median: q(0.5), p90: q(0.9), max: *sorted.last().unwrap(), floor: height_floor(d)?, values })
    }

    /// Fraction of values strictly above `r`.
    pub fn mass_above(&self, r: f64) -> f64 {
        self.values.iter().filter(|&&v| v > r).count() as f64 / self.values.len() as f64
    }
}

/// Maximal sampled height on one torus and the exponent `log(max) / ||λ||`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TorusHeight {
    pub class_key: String,
    pub lambda_norm: f64,
    pub profile: HeightProfile,
    pub exponent: f64,
}

pub fn torus_height_check<R: Rng + ?Sized>(record: &TorusRecord, n_samples: usize, rng: &mut R) -> Result<TorusHeight> {
    let frame = TorusFrame::new(record)?;
    let values = (0..n_samples.max(1)).map(|_| Ok(omega_level(&frame.sample_element(rng)?))).collect::<Result<Vec<_>>>()?;
    let profile = HeightProfile::new(record.d, values)?;
    let lambda_norm = record.lambda_norm();
    Ok(TorusHeight { class_key: record.class_key.clone(), lambda_norm, exponent: profile.max.ln() / lambda_norm, profile })
}

/// A constant `C` with `max height <= exp(C ||λ||)` fitted on one set of tori and tested on another.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HeightFit {
    pub c: f64,
    pub calibration: usize,
    pub holdout: usize,
    pub violations: usize,
}

pub fn fit_height_constant(calibration: &[TorusHeight], holdout: &[TorusHeight]) -> HeightFit {
    let c = calibration.iter().map(|h| h.exponent).fold(0.0, f64::max);
    let violations = holdout.iter().filter(|h| h.profile.max > (c * h.lambda_norm).exp() * (1.0 + 1e-9)).count();
    HeightFit { c, calibration: calibration.len(), holdout: holdout.len(), violations }
}

/// Outcome of the bounded search for `b` with `1/s(g exp(b))` in a target band.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthSearch {
    pub b: Option<CartanVector>,
    pub initial_height: f64,
    pub final_height: Option<f64>,
    pub directions: usize,
    pub trials: usize,
    /// Height closest to the band among all trials.
    pub closest_height: f64,
}

/// Search `b` with `||b|| <= step_bound` and `1/s(g exp(b))` in `(lo, hi)`.
///
/// After Siegel reduction the short vectors of the lattice are read off the
/// last rows; the search scans rays along the direction that stretches the
/// shortest vector, its Weyl images and the root directions, and keeps the
/// shortest `b` found.
pub fn systole_growth_search(g: &GroupElement, target: (f64, f64), step_bound: f64) -> Result<GrowthSearch> {
    let d = g.dim();
    let (lo, hi) = target;
    if !(lo < hi) {
        return Err(Error::InvalidArgument("empty target band".into()));
    }
    let h0 = omega_level(g);
    let mut out = GrowthSearch { b: None, initial_height: h0, final_height: None, directions: 0, trials: 0, closest_height: h0 };
    if h0 > lo && h0 < hi {
        out.b = Some(CartanVector::zero(d));
        out.final_height = Some(h0);
        return Ok(out);
    }
    let sf = siegel_reduce(g)?;
    let reduced = GroupElement::from_matrix_unchecked(sf.gamma.to_group_element().matrix() * g.matrix());
    let s = systole(&reduced);
    let v: Vec<f64> = (0..d).map(|j| (0..d).map(|i| s.witness[i] as f64 * reduced.matrix()[(i, j)]).sum()).collect();
    let norm2: f64 = v.iter().map(|x| x * x).sum();
    let stretch = CartanVector::project(v.iter().map(|x| x * x / norm2).collect());
    let weyl = WeylGeometry::new(d)?;
    let mut dirs: Vec<CartanVector> = Vec::new();
    let mut push = |u: CartanVector| {
        let n = u.norm();
        if n > 1e-9 {
            dirs.push(u.scale(1.0 / n));
        }
    };
    for w in weyl.weyl_group() {
        push(weyl.weyl_apply(&w, &stretch));
    }
    for i in 0..d {
        for j in 0..d {
            if i != j {
                let mut e = vec![0.0; d];
                e[i] = 1.0;
                e[j] = -1.0;
                push(CartanVector::project(e));
            }
        }
    }
    out.directions = dirs.len();
    let steps = 400usize;
    let dist = |h: f64| if h <= lo { lo / h } else if h >= hi { h / hi } else { 1.0 };
    let mut best: Option<(f64, CartanVector, f64)> = None;
    for u in &dirs {
        for k in 1..=steps {
            let t = step_bound * k as f64 / steps as f64;
            if best.as_ref().is_some_and(|(bt, _, _)| t >= *bt) {
                break;
            }
            let b = u.scale(t);
            let h = omega_level(&g.mul(&GroupElement::exp_cartan(&b)));
            out.trials += 1;
            if dist(h) < dist(out.closest_height) {
                out.closest_height = h;
            }
            if h > lo && h < hi {
                best = Some((t, b, h));
                break;
            }
        }
    }
    if let Some((_, b, h)) = best {
        out.b = Some(b);
        out.final_height = Some(h);
    }
    Ok(out)
}

/// `z = x + iy` in the standard fundamental domain of `SL(2, Z)`, drawn from
/// `dx dy / y²` by rejection from the strip `|x| <= 1/2, y >= sqrt(3)/2`.
/// Returns the point and the number of proposals used.
pub fn modular_domain_sample<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64, usize) {
    let mut tries = 0;
    loop {
        tries += 1;
        let x = rng.random::<f64>() - 0.5;
        let u: f64 = 1.0 - rng.random::<f64>();
        let y = 3f64.sqrt() / 2.0 / u;
        if x * x + y * y >= 1.0 {
            return (x, y, tries);
        }
    }
}

/// A coset of `SL(2, Z)\SL(2, R)` drawn from the Haar probability.
pub fn haar_sample_quotient<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<GroupElement> {
    if d != 2 {
        return Err(Error::Unsupported(format!("quotient Haar sampling for d = {d}")));
    }
    let (x, y, _) = modular_domain_sample(rng);
    let r = y.sqrt();
    let g = DMatrix::from_row_slice(2, 2, &[r, x / r, 0.0, 1.0 / r]);
    Ok(GroupElement::from_matrix_unchecked(g * haar_rotation(2, rng)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{gaussian_group_element, random_kak_element, seeded};

    fn diag(v: &[f64]) -> GroupElement {
        GroupElement::from_matrix_unchecked(DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(v)))
    }

    #[test]
    fn small_examples() {
        let s = systole(&GroupElement::identity(3));
        assert!((s.length - 1.0).abs() < 1e-12);
        assert_eq!(s.witness.iter().map(|x| x.abs()).sum::<i64>(), 1);
        assert!((systole(&diag(&[2.0, 0.5])).length - 0.5).abs() < 1e-12);
        assert!((omega_level(&diag(&[1e-3, 1e3])) - 1e3).abs() < 1e-6);
    }

    #[test]
    fn siegel_forms_reconstruct_and_bound_the_systole() {
        let mut rng = seeded(5);
        for d in [2, 3] {
            for _ in 0..200 {
                let g = random_kak_element(d, 4.0, &mut rng);
                let sf = siegel_reduce(&g).unwrap();
                let target = sf.gamma.to_group_element().matrix() * g.matrix();
                assert!((sf.reconstruct() - &target).amax() < 1e-8 * target.amax().max(1.0));
                assert!(sf.in_domain(1e-9), "{} {}", sf.n_norm(), sf.min_ratio());
                let s = systole(&g).length;
                let ad = sf.a_last();
                assert!(ad * sf.u0.powi(d as i32 - 1) <= s + 1e-9 && s <= ad + 1e-9);
            }
        }
    }

    #[test]
    fn diagonal_reduction_sorts_the_entries() {
        let sf = siegel_reduce(&diag(&[1.0 / 3.0, 3.0])).unwrap();
        let a = sf.a.entries();
        assert!(a[0] > a[1]);
        assert!((a[0] - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn heights_are_invariant() {
        let mut rng = seeded(8);
        let gamma = IntegerGroupElement::new(3, &[1, 2, 0, 0, 1, 0, 3, 7, 1]).unwrap().to_group_element();
        for _ in 0..50 {
            let g = gaussian_group_element(3, &mut rng);
            let k = GroupElement::from_matrix_unchecked(haar_rotation(3, &mut rng));
            let h = omega_level(&g);
            assert!((omega_level(&gamma.mul(&g).mul(&k)) - h).abs() < 1e-10 * h);
            assert!(h >= height_floor(3).unwrap() - 1e-9);
        }
    }

    #[test]
    fn growth_search_brings_cusp_points_down() {
        let g = diag(&[1e-4, 1e4]);
        let r = systole_growth_search(&g, (10.0, 100.0), 20.0).unwrap();
        let b = r.b.unwrap();
        let h = omega_level(&g.mul(&GroupElement::exp_cartan(&b)));
        assert!(h > 10.0 && h < 100.0);
        let r0 = systole_growth_search(&diag(&[0.5, 2.0]), (1.5, 3.0), 5.0).unwrap();
        assert_eq!(r0.b.unwrap().norm(), 0.0);
        assert!(systole_growth_search(&g, (10.0, 100.0), 0.1).unwrap().b.is_none());
    }

    #[test]
    fn modular_rejection_rate() {
        let mut rng = seeded(1);
        let n = 200_000;
        let tries: usize = (0..n).map(|_| modular_domain_sample(&mut rng).2).sum();
        let rate = n as f64 / tries as f64;
        let want = std::f64::consts::PI / (2.0 * 3f64.sqrt());
        assert!((rate - want).abs() < 0.02 * want);
        assert!(haar_sample_quotient(3, &mut rng).is_err());
    }
}
