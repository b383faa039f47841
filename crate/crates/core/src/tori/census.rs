//! Conjugacy classes of compact-type loxodromic elements with bounded Jordan projection.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use nalgebra::DMatrix;

use crate::arith::gcd_i128;
use crate::error::{Error, Result};
use crate::lattice::integer::det_i128;
use crate::lattice::{par_fold, EnumConfig, IntegerGroupElement};
use crate::lie::{CartanVector, CHAMBER_MARGIN};
use crate::reduce::{ball_point_estimate, lll, short_vectors};
use crate::tori::charpoly::{char_poly, is_irreducible_q, lambda_from_charpoly, CharPoly};
use crate::tori::forms::{form_classes, BinaryForm, FactorSieve};
use crate::tori::units::{cell_exp_bound, centralizer_basis, eigen_frame, period_lattice, period_lattice_exact_2, saturate, vol_a_torus, PeriodLattice};

/// One conjugacy class of compact-type loxodromic elements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusRecord {
    pub d: usize,
    pub repr: Vec<i64>,
    pub charpoly: Vec<i128>,
    pub disc: i128,
    pub lambda: Vec<f64>,
    pub periods: Vec<Vec<f64>>,
    pub vol_a: f64,
    pub stabilized: bool,
    pub class_key: String,
}

impl TorusRecord {
    pub fn element(&self) -> Result<IntegerGroupElement> {
        IntegerGroupElement::new(self.d, &self.repr)
    }

    pub fn lambda_norm(&self) -> f64 {
        self.lambda.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn period_lattice(&self) -> PeriodLattice {
        PeriodLattice {
            basis: self.periods.iter().map(|p| CartanVector::project(p.clone())).collect(),
            coeff_bound: 0,
            stabilized: self.stabilized,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CensusOptions {
    /// Coefficient bound of the unit search (doubled once to test stabilization).
    pub coeff_bound: i64,
    /// Point budget of each conjugacy test in dimension three.
    pub conjugacy_cap: usize,
    /// Cartan radius of the enumeration feeding the dimension-three census.
    pub enum_radius: Option<f64>,
}

impl Default for CensusOptions {
    fn default() -> Self {
        Self { coeff_bound: 12, conjugacy_cap: 1_000_000, enum_radius: None }
    }
}

/// `√2 log μ` with `μ + 1/μ = τ`.
pub fn lambda_norm_of_trace(tau: i64) -> f64 {
    let t = tau as f64;
    std::f64::consts::SQRT_2 * ((t + (t * t - 4.0).sqrt()) / 2.0).ln()
}

/// Largest trace whose hyperbolic classes have `||λ|| <= t`.
pub fn max_trace(t: f64) -> i64 {
    let mut tau = 2;
    while lambda_norm_of_trace(tau + 1) <= t {
        tau += 1;
    }
    tau
}

/// One record per class in `PSL(2, Z)` or `SL(3, Z)` with `||λ|| <= t`.
pub fn class_census(d: usize, t: f64, opts: &CensusOptions) -> Result<Vec<TorusRecord>> {
    match d {
        2 => census_2(t),
        3 => census_3(t, opts),
        _ => Err(Error::Unsupported(format!("census in dimension {d}"))),
    }
}

fn record_2(tau: i64, f: BinaryForm) -> Result<TorusRecord> {
    let g = f.to_matrix(tau)?;
    let periods = period_lattice_exact_2(&g)?;
    let l = lambda_norm_of_trace(tau) / std::f64::consts::SQRT_2;
    Ok(TorusRecord {
        d: 2,
        repr: g.entries().to_vec(),
        charpoly: vec![1, -(tau as i128), 1],
        disc: (tau as i128) * (tau as i128) - 4,
        lambda: vec![l, -l],
        vol_a: vol_a_torus(&periods),
        periods: periods.basis.iter().map(|b| b.entries().to_vec()).collect(),
        stabilized: periods.stabilized,
        class_key: format!("d2:{},{},{}", f.a, f.b, f.c),
    })
}

/// Classes of trace `τ >= 3` are the proper classes of forms of discriminant `τ² - 4`.
fn census_2(t: f64) -> Result<Vec<TorusRecord>> {
    let tmax = max_trace(t);
    if tmax < 3 {
        return Ok(Vec::new());
    }
    let sieve = FactorSieve::new((tmax * tmax) as usize);
    let chunks: Vec<Vec<TorusRecord>> = (3..=tmax)
        .into_par_iter()
        .map(|tau| form_classes(tau * tau - 4, &sieve).into_iter().map(|f| record_2(tau, f)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

/// The 24 signed permutation matrices of determinant one.
fn signed_permutations() -> Vec<IntegerGroupElement> {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out = Vec::new();
    for p in perms {
        for signs in 0..8 {
            let mut e = [0i64; 9];
            for (i, &j) in p.iter().enumerate() {
                e[i * 3 + j] = if signs & (1 << i) != 0 { -1 } else { 1 };
            }
            if det_i128(3, &e) == 1 {
                out.push(IntegerGroupElement::from_parts_unchecked(3, &e));
            }
        }
    }
    out
}

/// Smallest conjugate under signed permutations.
fn canonical_3(g: &IntegerGroupElement, perms: &[IntegerGroupElement]) -> IntegerGroupElement {
    perms
        .iter()
        .map(|p| p.checked_mul(g).and_then(|x| x.checked_mul(&p.inverse())).unwrap_or(*g))
        .min()
        .unwrap()
}

fn mat_vec(g: &IntegerGroupElement, v: &[i128; 3]) -> [i128; 3] {
    let mut out = [0i128; 3];
    for (i, o) in out.iter_mut().enumerate() {
        *o = (0..3).map(|j| g.get(i, j) as i128 * v[j]).sum();
    }
    out
}

/// Krylov matrix `[v, g v, g² v]` (columns).
fn krylov(g: &IntegerGroupElement, v: [i128; 3]) -> [[i128; 3]; 3] {
    let v1 = mat_vec(g, &v);
    let v2 = mat_vec(g, &v1);
    let cols = [v, v1, v2];
    let mut m = [[0i128; 3]; 3];
    for (j, c) in cols.iter().enumerate() {
        for i in 0..3 {
            m[i][j] = c[i];
        }
    }
    m
}

fn adjugate3(m: &[[i128; 3]; 3]) -> [[i128; 3]; 3] {
    let mut out = [[0i128; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            out[i][j] = m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConjugacyVerdict {
    /// Carries a witness `X` with `X g1 X^{-1} = g2`.
    Conjugate(IntegerGroupElement),
    NotConjugate,
    /// The unit lattice was not of full rank or the point budget ran out.
    Undecided,
}

/// Integral solutions of `X g1 = g2 X`, as a saturated row basis of 9-vectors.
///
/// Over `Q` they are spanned by `K2(e_i) adj(K1)` with `K` the Krylov matrices at `e_1`.
fn intertwiners(g1: &IntegerGroupElement, g2: &IntegerGroupElement) -> Result<Vec<Vec<i128>>> {
    let k1 = krylov(g1, [1, 0, 0]);
    let adj = adjugate3(&k1);
    let mut rows = Vec::new();
    for i in 0..3 {
        let mut e = [0i128; 3];
        e[i] = 1;
        let k2 = krylov(g2, e);
        let mut x = vec![0i128; 9];
        for r in 0..3 {
            for c in 0..3 {
                x[r * 3 + c] = (0..3).map(|l| k2[r][l] * adj[l][c]).sum();
            }
        }
        let g = x.iter().fold(0, |a, &b| gcd_i128(a, b));
        rows.push(x.into_iter().map(|v| v / g.max(1)).collect());
    }
    saturate(rows)
}

fn to_matrix3(v: &[i128]) -> DMatrix<f64> {
    DMatrix::from_fn(3, 3, |i, j| v[i * 3 + j] as f64)
}

/// Decide conjugacy of `g1` and `g2` in `SL(3, Z)`.
///
/// Writing intertwiners as `X = Y c` with `c` in `Q[g1]`, the map
/// `X -> (σ_j(c))` embeds them as a lattice in `R^3`. Any conjugator can be
/// multiplied by units of `g1` (whose log-moduli form `units`) until its
/// log-moduli lie in a fundamental cell of `units` centered at the balanced
/// point, so a finite Fincke–Pohst search is exhaustive. Any full-rank
/// sublattice of the unit logs suffices.
pub fn conjugacy(
    g1: &IntegerGroupElement,
    g2: &IntegerGroupElement,
    units: &PeriodLattice,
    cap: usize,
) -> Result<ConjugacyVerdict> {
    if g1.dim() != 3 || g2.dim() != 3 {
        return Err(Error::Unsupported("conjugacy test needs d = 3".into()));
    }
    if char_poly(g1) != char_poly(g2) {
        return Ok(ConjugacyVerdict::NotConjugate);
    }
    if !units.is_full_rank() {
        return Ok(ConjugacyVerdict::Undecided);
    }
    let sols = intertwiners(g1, g2)?;
    let (e, e_inv) = eigen_frame(g1)?;
    let y_inv = to_matrix3(&sols[0])
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("singular intertwiner".into()))?;
    let nu = 1.0 / to_matrix3(&sols[0]).determinant().abs();
    let embed = |v: &[i128]| -> Vec<f64> {
        let m = &e_inv * &y_inv * to_matrix3(v) * &e;
        (0..3).map(|j| m[(j, j)]).collect()
    };
    let rows: Vec<Vec<f64>> = sols.iter().map(|r| embed(r)).collect();
    let cell: Vec<Vec<f64>> = units.basis.iter().map(|b| b.entries().to_vec()).collect();
    let radius = nu.cbrt() * cell_exp_bound(&cell).sqrt() * (1.0 + 1e-9);
    let red = lll(&rows, 0.99);
    if ball_point_estimate(&red.basis, radius) <= 2.0 * cap as f64 {
        let pts = short_vectors(&red.basis, radius, cap);
        let exhausted = pts.len() < cap;
        for v in integer_points(&pts, &red.transform, &sols) {
            if let Some(w) = unimodular(v) {
                return Ok(ConjugacyVerdict::Conjugate(w));
            }
        }
        if exhausted {
            return Ok(ConjugacyVerdict::NotConjugate);
        }
    }
    // Too many points for an exhaustive search: look for X in the intertwiners
    // and z in the centralizer with equal |det| and X z^{-1} integral.
    let small = nu.cbrt() * 3f64.sqrt() * 3f64.exp();
    let pts = short_vectors(&red.basis, small, cap / 4);
    let mut by_norm: BTreeMap<i128, Vec<Vec<i128>>> = BTreeMap::new();
    for v in integer_points(&pts, &red.transform, &sols) {
        let n = det_i128_wide(&v).abs();
        if n > 0 {
            by_norm.entry(n).or_default().push(v);
        }
    }
    let cent: Vec<Vec<i128>> = centralizer_basis(g1)?.into_iter().map(|r| r.into_iter().map(i128::from).collect()).collect();
    let cent_rows: Vec<Vec<f64>> = cent
        .iter()
        .map(|c| {
            let m = &e_inv * to_matrix3(c) * &e;
            (0..3).map(|j| m[(j, j)]).collect()
        })
        .collect();
    let cred = lll(&cent_rows, 0.99);
    let cpts = short_vectors(&cred.basis, 3f64.sqrt() * 3f64.exp(), cap / 4);
    for z in integer_points(&cpts, &cred.transform, &cent) {
        let n = det_i128_wide(&z).abs();
        let Some(xs) = by_norm.get(&n) else { continue };
        let adj = adjugate3(&[[z[0], z[1], z[2]], [z[3], z[4], z[5]], [z[6], z[7], z[8]]]);
        for x in xs {
            let mut w = vec![0i128; 9];
            let mut ok = true;
            for i in 0..3 {
                for j in 0..3 {
                    let p: i128 = (0..3).map(|l| x[i * 3 + l] * adj[l][j]).sum();
                    if p % n != 0 {
                        ok = false;
                    }
                    w[i * 3 + j] = p / n;
                }
            }
            if ok {
                if let Some(w) = unimodular(w) {
                    return Ok(ConjugacyVerdict::Conjugate(w));
                }
            }
        }
    }
    Ok(ConjugacyVerdict::Undecided)
}

fn det_i128_wide(v: &[i128]) -> i128 {
    v[0] * (v[4] * v[8] - v[5] * v[7]) - v[1] * (v[3] * v[8] - v[5] * v[6]) + v[2] * (v[3] * v[7] - v[4] * v[6])
}

/// `X` normalized to determinant one, when `det X = ±1`.
fn unimodular(v: Vec<i128>) -> Option<IntegerGroupElement> {
    let sign = match det_i128_wide(&v) {
        1 => 1,
        -1 => -1,
        _ => return None,
    };
    let e: Vec<i64> = v.iter().map(|&z| i64::try_from(sign * z).ok()).collect::<Option<_>>()?;
    Some(IntegerGroupElement::from_parts_unchecked(3, &e))
}

/// Integer 9-vectors of enumerated points, mapped back through the LLL transform.
fn integer_points(pts: &[(Vec<i64>, f64)], transform: &[Vec<i64>], rows: &[Vec<i128>]) -> Vec<Vec<i128>> {
    pts.iter()
        .map(|(x, _)| {
            let mut coef = vec![0i128; rows.len()];
            for (xi, u) in x.iter().zip(transform) {
                for (c, &uk) in coef.iter_mut().zip(u) {
                    *c += *xi as i128 * uk as i128;
                }
            }
            (0..9).map(|k| coef.iter().zip(rows).map(|(c, r)| c * r[k]).sum()).collect()
        })
        .collect()
}

struct Candidate {
    poly: CharPoly,
    canon: IntegerGroupElement,
}

fn census_3(t: f64, opts: &CensusOptions) -> Result<Vec<TorusRecord>> {
    let radius = opts.enum_radius.unwrap_or(t);
    let perms = signed_permutations();
    let cfg = EnumConfig::new(3, radius);
    let found: Vec<Candidate> = par_fold(
        &cfg,
        Vec::new,
        |acc: &mut Vec<Candidate>, g, _| {
            let poly = char_poly(g);
            let Some(lam) = lambda_from_charpoly(&poly) else { return };
            if lam.norm() > t || !lam.in_open_chamber(CHAMBER_MARGIN) {
                return;
            }
            if !is_irreducible_q(&poly).unwrap_or(false) {
                return;
            }
            acc.push(Candidate { poly, canon: canonical_3(g, &perms) });
        },
        |mut a, b| {
            a.extend(b);
            a
        },
    )?;
    let mut buckets: BTreeMap<CharPoly, BTreeSet<IntegerGroupElement>> = BTreeMap::new();
    for c in found {
        buckets.entry(c.poly).or_default().insert(c.canon);
    }
    let coeff_bound = opts.coeff_bound;
    let cap = opts.conjugacy_cap;
    let per_bucket: Vec<Vec<(IntegerGroupElement, PeriodLattice, bool)>> = buckets
        .into_par_iter()
        .map(|(_, elems)| {
            let mut reps: Vec<(IntegerGroupElement, PeriodLattice, bool)> = Vec::new();
            for g in elems {
                let mut merged = false;
                let mut undecided = false;
                for (r, units, _) in &reps {
                    match conjugacy(r, &g, units, cap)? {
                        ConjugacyVerdict::Conjugate(_) => {
                            merged = true;
                            break;
                        }
                        ConjugacyVerdict::Undecided => undecided = true,
                        ConjugacyVerdict::NotConjugate => {}
                    }
                }
                if !merged {
                    let units = period_lattice(&g, coeff_bound)?;
                    reps.push((g, units, undecided));
                }
            }
            Ok(reps)
        })
        .collect::<Result<_>>()?;
    per_bucket
        .into_iter()
        .flatten()
        .map(|(g, periods, undecided)| {
            let poly = char_poly(&g);
            let lam = lambda_from_charpoly(&poly).ok_or_else(|| Error::Degenerate("complex spectrum".into()))?;
            Ok(TorusRecord {
                d: 3,
                repr: g.entries().to_vec(),
                charpoly: poly.0.clone(),
                disc: poly.discriminant()?,
                lambda: lam.into_vec(),
                vol_a: vol_a_torus(&periods),
                periods: periods.basis.iter().map(|b| b.entries().to_vec()).collect(),
                stabilized: periods.stabilized && periods.is_full_rank(),
                class_key: format!(
                    "d3:charpoly={:?};repr={:?};enum_radius={radius}{}",
                    poly.0,
                    g.entries(),
                    if undecided { ";undecided" } else { "" }
                ),
            })
        })
        .collect()
}

pub fn write_jsonl<W: Write>(records: &[TorusRecord], mut w: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl<R: BufRead>(r: R) -> Result<Vec<TorusRecord>> {
    r.lines()
        .filter(|l| l.as_ref().map_or(true, |s| !s.trim().is_empty()))
        .map(|l| Ok(serde_json::from_str(&l?)?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_three_has_one_class() {
        let recs = class_census(2, 1.5, &CensusOptions::default()).unwrap();
        assert_eq!(recs.len(), 1);
        let r = &recs[0];
        assert_eq!(r.disc, 5);
        assert!((r.vol_a - 2.0 * 2f64.sqrt() * ((1.0 + 5f64.sqrt()) / 2.0).ln()).abs() < 1e-9);
    }

    #[test]
    fn records_round_trip() {
        let recs = class_census(2, 3.0, &CensusOptions::default()).unwrap();
        assert!(!recs.is_empty());
        let mut buf = Vec::new();
        write_jsonl(&recs, &mut buf).unwrap();
        let back = read_jsonl(buf.as_slice()).unwrap();
        assert_eq!(back, recs);
    }

    #[test]
    fn signed_permutation_group() {
        let p = signed_permutations();
        assert_eq!(p.len(), 24);
    }

    #[test]
    fn conjugators_are_found() {
        let g = IntegerGroupElement::new(3, &[0, 0, 1, 1, 0, 2, 0, 1, -1]).unwrap();
        let x = IntegerGroupElement::new(3, &[1, 2, 0, 0, 1, 3, 0, 0, 1]).unwrap();
        let h = x.checked_mul(&g).unwrap().checked_mul(&x.inverse()).unwrap();
        let units = period_lattice(&g, 12).unwrap();
        match conjugacy(&g, &h, &units, 1 << 20).unwrap() {
            ConjugacyVerdict::Conjugate(w) => {
                assert_eq!(w.checked_mul(&g).unwrap(), h.checked_mul(&w).unwrap());
            }
            v => panic!("expected a conjugator, got {v:?}"),
        }
        // The inverse has the reciprocal characteristic polynomial.
        assert_eq!(conjugacy(&g, &g.inverse(), &units, 1 << 20).unwrap(), ConjugacyVerdict::NotConjugate);
    }
}
