//! Exact characteristic polynomials and the compactness criterion.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::divisors;
use crate::error::{Error, Result};
use crate::lattice::IntegerGroupElement;
use crate::lie::{jordan_projection, CartanVector, CHAMBER_MARGIN};

/// Monic integer polynomial, coefficients from the leading one down to the constant.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CharPoly(pub Vec<i128>);

impl fmt::Debug for CharPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl CharPoly {
    pub fn degree(&self) -> usize {
        self.0.len() - 1
    }

    pub fn coeffs(&self) -> &[i128] {
        &self.0
    }

    pub fn eval(&self, x: i128) -> i128 {
        self.0.iter().fold(0, |acc, &c| acc * x + c)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.0.iter().fold(0.0, |acc, &c| acc * x + c as f64)
    }

    /// Discriminant for degrees 1 to 3.
    pub fn discriminant(&self) -> Result<i128> {
        match self.0.as_slice() {
            [_, _] => Ok(1),
            [_, b, c] => Ok(b * b - 4 * c),
            [_, a, b, c] => {
                Ok(a * a * b * b - 4 * b * b * b - 4 * a * a * a * c - 27 * c * c + 18 * a * b * c)
            }
            _ => Err(Error::Unsupported(format!("discriminant of degree {}", self.degree()))),
        }
    }

    /// Real roots in decreasing order, when all roots are real.
    pub fn real_roots(&self) -> Option<Vec<f64>> {
        let c: Vec<f64> = self.0.iter().map(|&x| x as f64).collect();
        let mut roots = match c.len() {
            2 => vec![-c[1]],
            3 => {
                let disc = c[1] * c[1] - 4.0 * c[2];
                if disc < 0.0 {
                    return None;
                }
                // Avoid cancellation in the smaller root.
                let sign = if c[1] >= 0.0 { 1.0 } else { -1.0 };
                let q = -0.5 * (c[1] + sign * disc.sqrt());
                vec![q, if q != 0.0 { c[2] / q } else { 0.0 }]
            }
            4 => {
                let (a, b, cc) = (c[1], c[2], c[3]);
                let p = b - a * a / 3.0;
                let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + cc;
                if p >= 0.0 {
                    if p == 0.0 && q == 0.0 {
                        vec![-a / 3.0; 3]
                    } else {
                        return None;
                    }
                } else {
                    let r = 2.0 * (-p / 3.0).sqrt();
                    let arg = (3.0 * q / (p * r)).clamp(-1.0, 1.0);
                    let phi = arg.acos() / 3.0;
                    (0..3).map(|k| r * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() - a / 3.0).collect()
                }
            }
            _ => return None,
        };
        // Newton polish on the exact coefficients.
        for r in roots.iter_mut() {
            for _ in 0..3 {
                let f = self.eval_f64(*r);
                let df = self.derivative_f64(*r);
                if df != 0.0 {
                    *r -= f / df;
                }
            }
        }
        roots.sort_by(|x, y| y.total_cmp(x));
        Some(roots)
    }

    fn derivative_f64(&self, x: f64) -> f64 {
        let n = self.degree();
        self.0[..n].iter().enumerate().fold(0.0, |acc, (i, &c)| acc * x + (n - i) as f64 * c as f64)
    }
}

/// `det(x I - γ)` by Faddeev–LeVerrier in exact integer arithmetic.
pub fn char_poly(g: &IntegerGroupElement) -> CharPoly {
    let d = g.dim();
    let m: Vec<Vec<i128>> = (0..d).map(|i| (0..d).map(|j| g.get(i, j) as i128).collect()).collect();
    let mut coeffs = vec![1i128];
    let mut mk: Vec<Vec<i128>> = vec![vec![0; d]; d];
    let mut c_prev = 1i128;
    for k in 1..=d {
        // M_k = A M_{k-1} + c_{k-1} I, then c_k = -tr(A M_k) / k.
        let mut next = vec![vec![0i128; d]; d];
        for i in 0..d {
            for j in 0..d {
                next[i][j] = (0..d).map(|l| m[i][l] * mk[l][j]).sum::<i128>();
            }
            next[i][i] += c_prev;
        }
        mk = next;
        let tr: i128 = (0..d).map(|i| (0..d).map(|l| m[i][l] * mk[l][i]).sum::<i128>()).sum();
        let c = -tr / k as i128;
        coeffs.push(c);
        c_prev = c;
    }
    CharPoly(coeffs)
}

/// Irreducibility over `Q` for monic integer polynomials of degree at most 4.
pub fn is_irreducible_q(p: &CharPoly) -> Result<bool> {
    let n = p.degree();
    if n > 4 {
        return Err(Error::Unsupported(format!("irreducibility test for degree {n}")));
    }
    if n <= 1 {
        return Ok(n == 1);
    }
    let c0 = *p.0.last().unwrap();
    if c0 == 0 {
        return Ok(false);
    }
    // Rational roots of a monic integer polynomial are integer divisors of c0.
    for r in divisors(c0.unsigned_abs() as u64) {
        let r = r as i128;
        if p.eval(r) == 0 || p.eval(-r) == 0 {
            return Ok(false);
        }
    }
    if n < 4 {
        return Ok(true);
    }
    // x^4 + a x^3 + b x^2 + c x + e = (x^2 + s x + q)(x^2 + r x + q').
    let (a, b, c, e) = (p.0[1], p.0[2], p.0[3], p.0[4]);
    let bound = 1 + p.0[1..].iter().map(|x| x.abs()).max().unwrap();
    for q in divisors(e.unsigned_abs() as u64) {
        for q in [q as i128, -(q as i128)] {
            let q2 = e / q;
            for s in -2 * bound..=2 * bound {
                let r = a - s;
                if q + q2 + s * r == b && s * q2 + q * r == c {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// A proper nonempty subset `I` of `{1..d}` with `|Σ_{i in I} λ_i| <= tol`.
pub fn subset_sum_zero(lambda: &CartanVector, tol: f64) -> Option<Vec<usize>> {
    let v = lambda.entries();
    let d = v.len();
    (1u32..(1 << d) - 1)
        .map(|mask| (0..d).filter(|i| mask & (1 << i) != 0).collect::<Vec<_>>())
        .filter(|set| set.iter().map(|&i| v[i]).sum::<f64>().abs() <= tol)
        .min_by_key(|set| (set.len(), set.clone()))
        .map(|set| set.into_iter().map(|i| i + 1).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TorusVerdict {
    Compact,
    NonCompact,
    NotLoxodromic,
}

/// Whether the periodic orbit of `γ` is a compact torus.
pub fn is_compact_torus(g: &IntegerGroupElement) -> Result<TorusVerdict> {
    let j = jordan_projection(&g.to_group_element());
    if !j.lambda.in_open_chamber(CHAMBER_MARGIN) {
        return Ok(TorusVerdict::NotLoxodromic);
    }
    Ok(if is_irreducible_q(&char_poly(g))? { TorusVerdict::Compact } else { TorusVerdict::NonCompact })
}

/// Jordan projection read off the exact characteristic polynomial.
pub fn lambda_from_charpoly(p: &CharPoly) -> Option<CartanVector> {
    let roots = p.real_roots()?;
    let mut logs: Vec<f64> = roots.iter().map(|r| r.abs().ln()).collect();
    logs.sort_by(|a, b| b.total_cmp(a));
    Some(CartanVector::project(logs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ig(d: usize, e: &[i64]) -> IntegerGroupElement {
        IntegerGroupElement::new(d, e).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(char_poly(&IntegerGroupElement::identity(3)).0, vec![1, -3, 3, -1]);
        assert_eq!(char_poly(&ig(2, &[2, 1, 1, 1])).0, vec![1, -3, 1]);
        let block = ig(3, &[2, 1, 0, 1, 1, 0, 0, 0, 1]);
        // (x - 1)(x^2 - 3x + 1)
        assert_eq!(char_poly(&block).0, vec![1, -4, 4, -1]);
        assert!(is_irreducible_q(&CharPoly(vec![1, -3, 1])).unwrap());
        assert!(!is_irreducible_q(&CharPoly(vec![1, -2, 1])).unwrap());
        assert!(is_irreducible_q(&CharPoly(vec![1, 0, -1, -1])).unwrap());
        assert!(is_irreducible_q(&CharPoly(vec![1, 0, 0, 0, 0, 0])).is_err());
    }

    #[test]
    fn quartic_quadratic_factors() {
        // (x^2 - 3x + 1)(x^2 - 4x + 1)
        assert!(!is_irreducible_q(&CharPoly(vec![1, -7, 14, -7, 1])).unwrap());
        // x^4 - 10x^2 + 1 has no rational roots and no rational quadratic factor.
        assert!(is_irreducible_q(&CharPoly(vec![1, 0, -10, 0, 1])).unwrap());
        // (x^2 + 1)(x^2 - 2)
        assert!(!is_irreducible_q(&CharPoly(vec![1, 0, -1, 0, -2])).unwrap());
    }

    #[test]
    fn subset_sums() {
        let v = CartanVector::project(vec![0.9624, 0.0, -0.9624]);
        assert_eq!(subset_sum_zero(&v, 1e-9), Some(vec![2]));
        assert_eq!(subset_sum_zero(&CartanVector::project(vec![2.0, 1.0, -3.0]), 1e-9), None);
        assert_eq!(subset_sum_zero(&CartanVector::project(vec![1.2, -1.2]), 1e-9), None);
    }

    #[test]
    fn verdicts() {
        assert_eq!(is_compact_torus(&ig(2, &[2, 1, 1, 1])).unwrap(), TorusVerdict::Compact);
        let block = ig(3, &[2, 1, 0, 1, 1, 0, 0, 0, 1]);
        assert_eq!(is_compact_torus(&block).unwrap(), TorusVerdict::NonCompact);
        let lam = jordan_projection(&block.to_group_element()).lambda;
        assert_eq!(subset_sum_zero(&lam, 1e-8), Some(vec![2]));
        assert_eq!(is_compact_torus(&ig(2, &[1, 1, 0, 1])).unwrap(), TorusVerdict::NotLoxodromic);
    }

    #[test]
    fn roots_and_discriminants() {
        let p = CharPoly(vec![1, -1, -2, 1]);
        assert_eq!(p.discriminant().unwrap(), 49);
        let r = p.real_roots().unwrap();
        for x in &r {
            assert!(p.eval_f64(*x).abs() < 1e-12);
        }
        assert!(r[0] > r[1] && r[1] > r[2]);
        assert_eq!(CharPoly(vec![1, -3, 1]).discriminant().unwrap(), 5);
        let q = CharPoly(vec![1, -1000, 1]).real_roots().unwrap();
        assert!((q[0] * q[1] - 1.0).abs() < 1e-12);
        assert!(CharPoly(vec![1, 0, 1]).real_roots().is_none());
    }
}
