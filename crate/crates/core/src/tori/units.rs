//! Units of the integral centralizer of a loxodromic element and its period lattice.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::arith::gcd_i128;
use crate::error::{Error, Result};
use crate::lattice::integer::det_i128;
use crate::lattice::IntegerGroupElement;
use crate::lie::{jordan_projection, CartanVector};
use crate::reduce::{ball_point_estimate, combine, dot, gram_schmidt, lll, short_vectors};
use crate::tori::charpoly::{is_compact_torus, TorusVerdict};
use crate::tori::forms::fundamental_automorph;

/// Lattice of periods in `𝔞`, recorded in the eigen-order of the defining element.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodLattice {
    pub basis: Vec<CartanVector>,
    /// Coefficient bound of the last unit search (0 for the exact path).
    pub coeff_bound: i64,
    /// Proven complete, or unchanged when the search bound was doubled.
    pub stabilized: bool,
}

impl PeriodLattice {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn is_full_rank(&self) -> bool {
        self.basis.first().is_some_and(|b| self.rank() + 1 == b.dim())
    }
}

/// All `r × r` minors of an `r × m` integer matrix.
fn minors(rows: &[Vec<i128>]) -> Vec<i128> {
    let r = rows.len();
    let m = rows[0].len();
    let mut out = Vec::new();
    let mut cols: Vec<usize> = (0..r).collect();
    loop {
        let sub: Vec<i64> = rows.iter().flat_map(|row| cols.iter().map(|&c| row[c] as i64)).collect();
        out.push(if r == 1 { sub[0] as i128 } else { det_i128(r, &sub) });
        // Next combination.
        let mut i = r;
        while i > 0 && cols[i - 1] == m - r + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        cols[i - 1] += 1;
        for j in i..r {
            cols[j] = cols[j - 1] + 1;
        }
    }
    out
}

fn smallest_prime_factor(n: i128) -> i128 {
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            return p;
        }
        p += 1;
    }
    n
}

fn inv_mod(a: i128, p: i128) -> i128 {
    let (mut r0, mut r1, mut s0, mut s1) = (a.rem_euclid(p), p, 1i128, 0i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    s0.rem_euclid(p)
}

/// Nonzero `c` with `Σ c_i rows_i ≡ 0 (mod p)`, if any.
fn left_kernel_mod(rows: &[Vec<i128>], p: i128) -> Option<Vec<i128>> {
    let r = rows.len();
    let m = rows[0].len();
    let mut aug: Vec<Vec<i128>> = rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut v: Vec<i128> = row.iter().map(|x| x.rem_euclid(p)).collect();
            v.extend((0..r).map(|j| i128::from(i == j)));
            v
        })
        .collect();
    let mut pivot_row = 0;
    for col in 0..m {
        let Some(pr) = (pivot_row..r).find(|&i| aug[i][col] != 0) else { continue };
        aug.swap(pivot_row, pr);
        let inv = inv_mod(aug[pivot_row][col], p);
        for x in aug[pivot_row].iter_mut() {
            *x = (*x * inv).rem_euclid(p);
        }
        for i in 0..r {
            if i != pivot_row && aug[i][col] != 0 {
                let f = aug[i][col];
                for j in 0..m + r {
                    aug[i][j] = (aug[i][j] - f * aug[pivot_row][j]).rem_euclid(p);
                }
            }
        }
        pivot_row += 1;
    }
    (pivot_row < r).then(|| aug[r - 1][m..].to_vec())
}

/// `Q`-span of the rows intersected with the integer lattice.
pub fn saturate(mut rows: Vec<Vec<i128>>) -> Result<Vec<Vec<i128>>> {
    for _ in 0..10_000 {
        let g = minors(&rows).into_iter().fold(0, gcd_i128);
        if g == 0 {
            return Err(Error::Degenerate("rows are linearly dependent".into()));
        }
        if g == 1 {
            return Ok(rows);
        }
        let p = smallest_prime_factor(g);
        let mut c = left_kernel_mod(&rows, p).ok_or_else(|| Error::Degenerate("no kernel modulo a minor prime".into()))?;
        let i = c.iter().position(|&x| x != 0).unwrap();
        let inv = inv_mod(c[i], p);
        for x in c.iter_mut() {
            *x = (*x * inv).rem_euclid(p);
        }
        let m = rows[0].len();
        let new: Vec<i128> = (0..m).map(|k| rows.iter().zip(&c).map(|(row, ci)| row[k] * ci).sum::<i128>() / p).collect();
        rows[i] = new;
    }
    Err(Error::Degenerate("saturation did not terminate".into()))
}

/// LLL-reduced basis of the integral centralizer `Q[γ] ∩ M_d(Z)`.
pub fn centralizer_basis(g: &IntegerGroupElement) -> Result<Vec<Vec<i64>>> {
    let d = g.dim();
    let mut rows = Vec::with_capacity(d);
    let mut p = IntegerGroupElement::identity(d);
    for _ in 0..d {
        rows.push(p.entries().iter().map(|&x| x as i128).collect::<Vec<_>>());
        p = p.checked_mul(g)?;
    }
    let sat = saturate(rows)?;
    let real: Vec<Vec<f64>> = sat.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
    let red = lll(&real, 0.99);
    red.transform
        .iter()
        .map(|u| {
            (0..d * d)
                .map(|k| {
                    let v: i128 = u.iter().zip(&sat).map(|(&ui, row)| ui as i128 * row[k]).sum();
                    i64::try_from(v).map_err(|_| Error::Overflow("centralizer basis entry".into()))
                })
                .collect()
        })
        .collect()
}

/// Determinant-one elements `Σ m_i B_i` of the integral centralizer with `|m_i| <= bound`.
pub fn unit_search(g: &IntegerGroupElement, coeff_bound: i64) -> Result<Vec<IntegerGroupElement>> {
    if is_compact_torus(g)? != TorusVerdict::Compact {
        return Err(Error::InvalidArgument("unit search needs a compact-type loxodromic element".into()));
    }
    let d = g.dim();
    let basis = centralizer_basis(g)?;
    let side = 2 * coeff_bound + 1;
    let total = (side as u128).checked_pow(d as u32).filter(|&n| n <= 1 << 32).ok_or_else(|| {
        Error::Overflow(format!("unit search box of side {side} in dimension {d} is too large"))
    })?;
    let mut out = Vec::new();
    let mut entries = vec![0i64; d * d];
    'outer: for mut code in 0..total {
        let mut acc = vec![0i128; d * d];
        for b in &basis {
            let m = (code % side as u128) as i128 - coeff_bound as i128;
            code /= side as u128;
            for (a, &x) in acc.iter_mut().zip(b) {
                *a += m * x as i128;
            }
        }
        for (e, &a) in entries.iter_mut().zip(&acc) {
            match i64::try_from(a) {
                Ok(v) => *e = v,
                Err(_) => continue 'outer,
            }
        }
        if det_i128(d, &entries) == 1 {
            out.push(IntegerGroupElement::from_parts_unchecked(d, &entries));
        }
    }
    out.sort();
    Ok(out)
}

/// Eigenbasis of `γ` (descending modulus) used to read units coherently.
pub(crate) fn eigen_frame(g: &IntegerGroupElement) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let j = jordan_projection(&g.to_group_element());
    let e = j.eigenbasis.ok_or_else(|| Error::NotRegular("eigenvalue moduli are not distinct".into()))?;
    let inv = e.clone().try_inverse().ok_or_else(|| Error::Degenerate("singular eigenbasis".into()))?;
    Ok((e, inv))
}

/// `(log |μ_i(u)|)_i` for `u` commuting with `γ`, in the eigen-order of `γ`.
pub fn unit_log(u: &IntegerGroupElement, frame: &(DMatrix<f64>, DMatrix<f64>)) -> CartanVector {
    let m = &frame.1 * u.to_group_element().matrix() * &frame.0;
    CartanVector::project((0..u.dim()).map(|i| m[(i, i)].abs().ln()).collect())
}

/// Integer row basis of the lattice generated by `rows` (Hermite normal form).
fn hnf_rows(mut rows: Vec<Vec<i128>>) -> Vec<Vec<i128>> {
    let m = rows.first().map_or(0, |r| r.len());
    let mut out = Vec::new();
    for col in 0..m {
        loop {
            let nz: Vec<usize> = (0..rows.len()).filter(|&i| rows[i][col] != 0).collect();
            if nz.len() <= 1 {
                break;
            }
            let p = *nz.iter().min_by_key(|&&i| rows[i][col].abs()).unwrap();
            for &i in &nz {
                if i != p {
                    let q = rows[i][col].div_euclid(rows[p][col]);
                    for k in 0..m {
                        rows[i][k] -= q * rows[p][k];
                    }
                }
            }
        }
        if let Some(i) = (0..rows.len()).find(|&i| rows[i][col] != 0) {
            out.push(rows.remove(i));
        }
    }
    out
}

fn coordinates(v: &[f64], basis: &[Vec<f64>]) -> Option<Vec<f64>> {
    let r = basis.len();
    let gram = DMatrix::from_fn(r, r, |i, j| dot(&basis[i], &basis[j]));
    let rhs = nalgebra::DVector::from_fn(r, |i, _| dot(&basis[i], v));
    let c = gram.lu().solve(&rhs)?;
    Some(c.iter().copied().collect())
}

/// Lattice generated by a discrete set of vectors of rank at most `rank`.
pub fn lattice_from_generators(gens: &[Vec<f64>], rank: usize) -> Result<Vec<Vec<f64>>> {
    let scale = gens.iter().map(|g| dot(g, g).sqrt()).fold(0.0, f64::max).max(1.0);
    let mut gens: Vec<Vec<f64>> = gens.iter().filter(|g| dot(g, g).sqrt() > 1e-9 * scale).cloned().collect();
    gens.sort_by(|a, b| dot(a, a).total_cmp(&dot(b, b)));
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in &gens {
        if basis.len() == rank {
            break;
        }
        let mut trial = basis.clone();
        trial.push(v.clone());
        let (_, norms) = gram_schmidt(&trial);
        if norms.last().unwrap().sqrt() > 1e-7 * dot(v, v).sqrt() {
            basis = trial;
        }
    }
    if basis.is_empty() {
        return Ok(basis);
    }
    let r = basis.len();
    for _ in 0..100 {
        let mut changed = false;
        for v in &gens {
            let c = coordinates(v, &basis).ok_or_else(|| Error::Degenerate("singular period basis".into()))?;
            let resid: Vec<f64> = v.iter().zip(combine(&c.iter().map(|x| x.round() as i64).collect::<Vec<_>>(), &basis)).map(|(a, b)| a - b).collect();
            let near = |x: f64| (x - x.round()).abs() < 1e-6;
            if c.iter().all(|&x| near(x)) && dot(&resid, &resid).sqrt() < 1e-6 * scale {
                continue;
            }
            let q = (1..=10_000i128)
                .find(|&q| c.iter().all(|&x| near(q as f64 * x)))
                .ok_or_else(|| Error::Degenerate("generators are not commensurable".into()))?;
            let mut rows: Vec<Vec<i128>> = (0..r).map(|i| (0..r).map(|j| if i == j { q } else { 0 }).collect()).collect();
            rows.push(c.iter().map(|&x| (q as f64 * x).round() as i128).collect());
            let w = hnf_rows(rows);
            basis = w
                .iter()
                .map(|row| {
                    let mut out = vec![0.0; basis[0].len()];
                    for (k, &wk) in row.iter().enumerate() {
                        for (o, b) in out.iter_mut().zip(&basis[k]) {
                            *o += wk as f64 * b / q as f64;
                        }
                    }
                    out
                })
                .collect();
            basis = lll(&basis, 0.99).basis;
            changed = true;
        }
        if !changed {
            return Ok(lll(&basis, 0.99).basis);
        }
    }
    Err(Error::Degenerate("period lattice refinement did not settle".into()))
}

fn covolume(basis: &[Vec<f64>]) -> f64 {
    let (_, norms) = gram_schmidt(basis);
    norms.iter().product::<f64>().sqrt()
}

fn to_cartan(basis: Vec<Vec<f64>>) -> Vec<CartanVector> {
    basis.into_iter().map(CartanVector::project).collect()
}

/// Log-moduli of all units `u` of the integral centralizer with `max_j |log |σ_j(u)|| <= log_radius`.
///
/// The eigenvalues `σ(x)` of centralizer elements embed them as a lattice in
/// `R^d`, and such units lie in the ball of radius `√d e^{log_radius}`.
/// Returns `None` when more than `cap` lattice points would have to be examined.
pub fn units_in_ball(g: &IntegerGroupElement, log_radius: f64, cap: usize) -> Result<Option<Vec<Vec<f64>>>> {
    let radius = (g.dim() as f64).sqrt() * log_radius.exp();
    Ok(units_in_sigma_ball(g, radius, cap)?
        .map(|v| v.into_iter().filter(|l| l.iter().all(|x| x.abs() <= log_radius + 1e-9)).collect()))
}

/// Units whose eigenvalue vector has Euclidean norm at most `radius`.
fn units_in_sigma_ball(g: &IntegerGroupElement, radius: f64, cap: usize) -> Result<Option<Vec<Vec<f64>>>> {
    let d = g.dim();
    let frame = eigen_frame(g)?;
    let basis = centralizer_basis(g)?;
    let sigma: Vec<Vec<f64>> = basis
        .iter()
        .map(|b| {
            let m = &frame.1 * DMatrix::from_fn(d, d, |i, j| b[i * d + j] as f64) * &frame.0;
            (0..d).map(|j| m[(j, j)]).collect()
        })
        .collect();
    let red = lll(&sigma, 0.99);
    if ball_point_estimate(&red.basis, radius) > 2.0 * cap as f64 {
        return Ok(None);
    }
    let pts = short_vectors(&red.basis, radius * (1.0 + 1e-9), cap);
    if pts.len() >= cap {
        return Ok(None);
    }
    let mut out = Vec::new();
    let mut entries = vec![0i64; d * d];
    'outer: for (x, _) in pts {
        let mut coef = vec![0i128; d];
        for (xi, u) in x.iter().zip(&red.transform) {
            for (c, &uk) in coef.iter_mut().zip(u) {
                *c += *xi as i128 * uk as i128;
            }
        }
        for (k, e) in entries.iter_mut().enumerate() {
            let v: i128 = coef.iter().zip(&basis).map(|(c, b)| c * b[k] as i128).sum();
            match i64::try_from(v) {
                Ok(v) => *e = v,
                Err(_) => continue 'outer,
            }
        }
        let det = det_i128(d, &entries);
        if det == 1 || (det == -1 && d % 2 == 1) {
            let s = combine(&x, &red.basis);
            out.push(CartanVector::project(s.iter().map(|v| v.abs().ln()).collect()).into_vec());
        }
    }
    Ok(Some(out))
}

/// Largest `Σ_j e^{2 v_j}` over the vertices `v` of the centered fundamental
/// parallelepiped of `basis`. Every coset of the lattice meets that cell, and
/// by convexity this bounds `|e^{v}|²` on the whole cell.
pub fn cell_exp_bound(basis: &[Vec<f64>]) -> f64 {
    let r = basis.len();
    let d = basis.first().map_or(0, |b| b.len());
    (0u32..1 << r)
        .map(|mask| {
            let v: Vec<f64> = (0..d)
                .map(|j| (0..r).map(|i| if mask & (1 << i) != 0 { 0.5 } else { -0.5 } * basis[i][j]).sum())
                .collect();
            v.iter().map(|x| (2.0 * x).exp()).sum::<f64>()
        })
        .fold(d as f64, f64::max)
}

fn adjugate(d: usize, m: &[i128]) -> Vec<i128> {
    let e = |i: usize, j: usize| m[i * d + j];
    match d {
        2 => vec![e(1, 1), -e(0, 1), -e(1, 0), e(0, 0)],
        _ => {
            let mut out = vec![0i128; 9];
            for i in 0..3 {
                for j in 0..3 {
                    let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
                    let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
                    out[i * 3 + j] = e(r0, c0) * e(r1, c1) - e(r0, c1) * e(r1, c0);
                }
            }
            out
        }
    }
}

/// Log-moduli of units `x y^{-1}` for pairs of centralizer elements in a log-ball
/// that have equal `|det|` and generate the same ideal.
///
/// Units found this way can lie far outside the ball, which makes the search
/// effective when the regulator is large.
pub fn units_from_relations(g: &IntegerGroupElement, log_radius: f64, cap: usize) -> Result<Vec<Vec<f64>>> {
    let d = g.dim();
    let frame = eigen_frame(g)?;
    let basis = centralizer_basis(g)?;
    let sigma: Vec<Vec<f64>> = basis
        .iter()
        .map(|b| {
            let m = &frame.1 * DMatrix::from_fn(d, d, |i, j| b[i * d + j] as f64) * &frame.0;
            (0..d).map(|j| m[(j, j)]).collect()
        })
        .collect();
    let red = lll(&sigma, 0.99);
    let radius = (d as f64).sqrt() * log_radius.exp();
    let mut reps: std::collections::HashMap<i128, Vec<(Vec<i128>, Vec<f64>)>> = std::collections::HashMap::new();
    let mut out = Vec::new();
    for (x, _) in short_vectors(&red.basis, radius, cap) {
        let mut coef = vec![0i128; d];
        for (xi, u) in x.iter().zip(&red.transform) {
            for (c, &uk) in coef.iter_mut().zip(u) {
                *c += *xi as i128 * uk as i128;
            }
        }
        let m: Vec<i128> = (0..d * d).map(|k| coef.iter().zip(&basis).map(|(c, b)| c * b[k] as i128).sum()).collect();
        let me: Vec<i64> = match m.iter().map(|&v| i64::try_from(v)).collect() {
            Ok(v) => v,
            Err(_) => continue,
        };
        let n = det_i128(d, &me).abs();
        if n == 0 || n > 1 << 40 {
            continue;
        }
        let logs: Vec<f64> = combine(&x, &red.basis).iter().map(|v| v.abs().ln()).collect();
        let bucket = reps.entry(n).or_default();
        let mut related = false;
        for (y, ylogs) in bucket.iter() {
            let adj = adjugate(d, y);
            let divisible = (0..d).all(|i| {
                (0..d).all(|j| (0..d).map(|l| m[i * d + l] * adj[l * d + j]).sum::<i128>() % n == 0)
            });
            if divisible {
                let diff: Vec<f64> = logs.iter().zip(ylogs).map(|(a, b)| a - b).collect();
                out.push(CartanVector::project(diff).into_vec());
                related = true;
                break;
            }
        }
        if !related && bucket.len() < 64 {
            bucket.push((m, logs));
        }
    }
    Ok(out)
}

/// Point budget of the ball searches behind `period_lattice`.
pub const UNIT_BALL_CAP: usize = 1_000_000;

/// Period lattice of the torus attached to `γ`.
///
/// Generators are `γ` itself, the box search at `coeff_bound`, and units from
/// norm relations in growing log-balls until the rank is full. Once a full-rank sublattice `L`
/// is known, all units in the ball reaching every coset of `L` are added; the
/// result is then the complete unit lattice and is flagged stabilized. If that
/// ball exceeds the point budget, the searches are widened once (twice the box,
/// one more relation radius) and stabilization means nothing new turned up. In dimension two the result is
/// cross-checked against the exact automorph.
pub fn period_lattice(g: &IntegerGroupElement, coeff_bound: i64) -> Result<PeriodLattice> {
    let d = g.dim();
    let full = d - 1;
    let frame = eigen_frame(g)?;
    let own = unit_log(g, &frame).into_vec();
    let mut gens: Vec<Vec<f64>> = unit_search(g, coeff_bound)?.iter().map(|u| unit_log(u, &frame).into_vec()).collect();
    gens.push(own.clone());
    let mut basis = lattice_from_generators(&gens, full)?;
    let mut r = 1.0;
    while basis.len() < full && r <= 5.0 {
        gens.extend(units_from_relations(g, r, UNIT_BALL_CAP / 4)?);
        basis = lattice_from_generators(&gens, full)?;
        r += 1.0;
    }
    let mut stabilized = false;
    if basis.len() == full {
        if let Some(more) = units_in_sigma_ball(g, cell_exp_bound(&basis).sqrt(), UNIT_BALL_CAP)? {
            gens.extend(more);
            basis = lattice_from_generators(&gens, full)?;
            stabilized = true;
        } else {
            gens.extend(units_from_relations(g, r, UNIT_BALL_CAP / 4)?);
            gens.extend(unit_search(g, 2 * coeff_bound)?.iter().map(|u| unit_log(u, &frame).into_vec()));
            let large = lattice_from_generators(&gens, full)?;
            stabilized = large.len() == full && (covolume(&basis) - covolume(&large)).abs() <= 1e-9 * covolume(&large);
            basis = large;
        }
    }
    if d == 2 {
        let exact = period_lattice_exact_2(g)?;
        stabilized &= (covolume(&basis) - vol_a_torus(&exact)).abs() <= 1e-9 * vol_a_torus(&exact);
    }
    Ok(PeriodLattice { basis: to_cartan(basis), coeff_bound, stabilized })
}

/// Exact periods in dimension two from the fundamental automorph.
pub fn period_lattice_exact_2(g: &IntegerGroupElement) -> Result<PeriodLattice> {
    if g.dim() != 2 {
        return Err(Error::Unsupported("exact periods need d = 2".into()));
    }
    let (eps, _) = fundamental_automorph(g)?;
    let t = eps.trace() as f64;
    let l = ((t + (t * t - 4.0).sqrt()) / 2.0).ln();
    Ok(PeriodLattice { basis: vec![CartanVector::project(vec![l, -l])], coeff_bound: 0, stabilized: true })
}

/// Covolume of the periods in `𝔞` (trace-form metric).
pub fn vol_a_torus(lattice: &PeriodLattice) -> f64 {
    covolume(&lattice.basis.iter().map(|b| b.entries().to_vec()).collect::<Vec<_>>())
}

/// Number of periods in the open chamber with norm at most `t`.
pub fn count_regular_periods(lattice: &PeriodLattice, t: f64) -> u64 {
    let basis: Vec<Vec<f64>> = lattice.basis.iter().map(|b| b.entries().to_vec()).collect();
    if basis.is_empty() {
        return 0;
    }
    short_vectors(&basis, t, usize::MAX)
        .into_iter()
        .filter(|(x, _)| CartanVector::project(combine(x, &basis)).in_open_chamber(1e-9))
        .count() as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden_gamma() -> IntegerGroupElement {
        IntegerGroupElement::new(2, &[2, 1, 1, 1]).unwrap()
    }

    #[test]
    fn units_of_the_golden_element() {
        let g = golden_gamma();
        let units = unit_search(&g, 5).unwrap();
        for u in [IntegerGroupElement::identity(2), g, g.neg(), g.inverse()] {
            assert!(units.contains(&u), "{u:?}");
        }
        for u in &units {
            assert_eq!(u.checked_mul(&g).unwrap(), g.checked_mul(u).unwrap());
        }
        // Every unit is ±γ^k.
        let frame = eigen_frame(&g).unwrap();
        let l = unit_log(&g, &frame).entries()[0];
        for u in &units {
            let k = unit_log(u, &frame).entries()[0] / l;
            assert!((k - k.round()).abs() < 1e-9);
        }
    }

    #[test]
    fn golden_period_lattice() {
        let g = golden_gamma();
        let lat = period_lattice(&g, 5).unwrap();
        assert!(lat.stabilized);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((vol_a_torus(&lat) - 2.0 * 2f64.sqrt() * phi.ln()).abs() < 1e-9);
        assert_eq!(count_regular_periods(&lat, 3.0), 2);
        assert_eq!(count_regular_periods(&lat, 1.0), 0);
        let exact = period_lattice_exact_2(&g).unwrap();
        assert!((vol_a_torus(&exact) - 1.36107).abs() < 1e-5);
    }

    #[test]
    fn saturation_adds_missing_elements() {
        // Rows spanning 2Z x Z inside Q^2 saturate to Z^2.
        let sat = saturate(vec![vec![2, 0], vec![0, 1]]).unwrap();
        assert_eq!(minors(&sat).into_iter().fold(0, gcd_i128), 1);
        let sat = saturate(vec![vec![2, 4, 6], vec![1, 1, 1]]).unwrap();
        assert_eq!(minors(&sat).into_iter().fold(0, gcd_i128), 1);
    }

    #[test]
    fn cubic_period_lattice_has_full_rank() {
        // Companion matrix of x^3 + x^2 - 2x - 1 (discriminant 49).
        let g = IntegerGroupElement::new(3, &[0, 0, 1, 1, 0, 2, 0, 1, -1]).unwrap();
        assert_eq!(crate::tori::charpoly::char_poly(&g).0, vec![1, 1, -2, -1]);
        let lat = period_lattice(&g, 3).unwrap();
        assert_eq!(lat.rank(), 2);
        assert!(lat.stabilized);
        let lam = jordan_projection(&g.to_group_element()).lambda;
        // λ(γ) lies in the period lattice.
        let basis: Vec<Vec<f64>> = lat.basis.iter().map(|b| b.entries().to_vec()).collect();
        let c = coordinates(lam.entries(), &basis).unwrap();
        assert!(c.iter().all(|x| (x - x.round()).abs() < 1e-8), "{c:?}");
    }

    #[test]
    fn generated_lattices() {
        let gens = vec![vec![2.0, -2.0], vec![3.0, -3.0]];
        let b = lattice_from_generators(&gens, 1).unwrap();
        assert!((dot(&b[0], &b[0]).sqrt() - 2f64.sqrt()).abs() < 1e-12);
        let gens = vec![vec![1.0, 0.0, -1.0], vec![0.5, 0.5, -1.0], vec![1.5, 0.5, -2.0]];
        let b = lattice_from_generators(&gens, 2).unwrap();
        assert!((covolume(&b) - covolume(&gens[..2])).abs() < 1e-12);
        let gens = vec![vec![2.0, 0.0, -2.0], vec![1.0, 0.0, -1.0]];
        let b = lattice_from_generators(&gens, 2).unwrap();
        assert_eq!(b.len(), 1);
    }
}
