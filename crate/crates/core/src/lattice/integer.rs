use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::GroupElement;

/// Largest supported dimension for integer elements.
pub const MAX_DIM: usize = 3;

/// An element of `SL(d, Z)` for `d <= 3`, stored row-major.
///
/// The derived order compares dimension first and then entries
/// lexicographically, which is the canonical order of enumeration output.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct IntegerGroupElement {
    d: u8,
    e: [i64; 9],
}

impl fmt::Debug for IntegerGroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.entries())
    }
}

pub(crate) fn det_i128(d: usize, e: &[i64]) -> i128 {
    let m = |i: usize, j: usize| e[i * d + j] as i128;
    match d {
        1 => m(0, 0),
        2 => m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0),
        3 => {
            m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
                + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
        }
        _ => unreachable!("dimension checked on construction"),
    }
}

impl IntegerGroupElement {
    pub fn new(d: usize, entries: &[i64]) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&d) {
            return Err(Error::Unsupported(format!("integer elements need 2 <= d <= {MAX_DIM}, got {d}")));
        }
        if entries.len() != d * d {
            return Err(Error::Dimension { expected: d * d, got: entries.len() });
        }
        let det = det_i128(d, entries);
        if det != 1 {
            return Err(Error::InvalidArgument(format!("determinant is {det}, expected 1")));
        }
        Ok(Self::from_parts_unchecked(d, entries))
    }

    pub(crate) fn from_parts_unchecked(d: usize, entries: &[i64]) -> Self {
        let mut e = [0i64; 9];
        e[..d * d].copy_from_slice(entries);
        Self { d: d as u8, e }
    }

    pub fn identity(d: usize) -> Self {
        let mut e = [0i64; 9];
        for i in 0..d {
            e[i * d + i] = 1;
        }
        Self { d: d as u8, e }
    }

    pub fn dim(&self) -> usize {
        self.d as usize
    }

    pub fn entries(&self) -> &[i64] {
        &self.e[..self.dim() * self.dim()]
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.e[i * self.dim() + j]
    }

    pub fn trace(&self) -> i64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_sq(&self) -> i128 {
        self.entries().iter().map(|&x| (x as i128) * (x as i128)).sum()
    }

    pub fn max_abs_entry(&self) -> i64 {
        self.entries().iter().map(|x| x.abs()).max().unwrap_or(0)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        let d = self.dim();
        if other.dim() != d {
            return Err(Error::Dimension { expected: d, got: other.dim() });
        }
        let mut e = [0i64; 9];
        for i in 0..d {
            for j in 0..d {
                let mut s: i128 = 0;
                for k in 0..d {
                    s += self.get(i, k) as i128 * other.get(k, j) as i128;
                }
                e[i * d + j] = i64::try_from(s).map_err(|_| Error::Overflow("product entry exceeds i64".into()))?;
            }
        }
        Ok(Self { d: self.d, e })
    }

    /// Inverse through the adjugate (exact since the determinant is one).
    pub fn inverse(&self) -> Self {
        let d = self.dim();
        let g = |i: usize, j: usize| self.get(i, j);
        let mut e = [0i64; 9];
        if d == 2 {
            e[..4].copy_from_slice(&[g(1, 1), -g(0, 1), -g(1, 0), g(0, 0)]);
        } else {
            for i in 0..3 {
                for j in 0..3 {
                    // (adj)_{ij} = cofactor_{ji}
                    let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
                    let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
                    e[i * 3 + j] = g(r0, c0) * g(r1, c1) - g(r0, c1) * g(r1, c0);
                }
            }
        }
        Self { d: self.d, e }
    }

    pub fn neg(&self) -> Self {
        let mut e = self.e;
        for x in &mut e {
            *x = -*x;
        }
        Self { d: self.d, e }
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim();
        let mut e = [0i64; 9];
        for i in 0..d {
            for j in 0..d {
                e[j * d + i] = self.get(i, j);
            }
        }
        Self { d: self.d, e }
    }

    pub fn to_group_element(&self) -> GroupElement {
        let d = self.dim();
        GroupElement::from_matrix_unchecked(nalgebra::DMatrix::from_fn(d, d, |i, j| self.get(i, j) as f64))
    }

    /// `gamma ≡ I (mod p)`.
    pub fn is_congruent_identity(&self, p: i64) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| (self.get(i, j) - i64::from(i == j)).rem_euclid(p) == 0))
    }
}

impl TryFrom<Vec<i64>> for IntegerGroupElement {
    type Error = Error;

    fn try_from(v: Vec<i64>) -> Result<Self> {
        let d = (v.len() as f64).sqrt().round() as usize;
        Self::new(d, &v)
    }
}

impl From<IntegerGroupElement> for Vec<i64> {
    fn from(g: IntegerGroupElement) -> Vec<i64> {
        g.entries().to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_is_enforced() {
        assert!(IntegerGroupElement::new(2, &[2, 1, 1, 1]).is_ok());
        assert!(IntegerGroupElement::new(2, &[2, 0, 0, 1]).is_err());
        assert!(IntegerGroupElement::new(4, &[0; 16]).is_err());
    }

    #[test]
    fn inverse_and_product() {
        let g = IntegerGroupElement::new(3, &[2, 1, 0, 1, 1, 0, 3, -2, 1]).unwrap();
        let p = g.checked_mul(&g.inverse()).unwrap();
        assert_eq!(p, IntegerGroupElement::identity(3));
        let h = IntegerGroupElement::new(2, &[5, 2, 2, 1]).unwrap();
        assert_eq!(h.checked_mul(&h.inverse()).unwrap(), IntegerGroupElement::identity(2));
        let json = serde_json::to_string(&g).unwrap();
        assert_eq!(json, "[2,1,0,1,1,0,3,-2,1]");
        let back: IntegerGroupElement = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn congruence() {
        let g = IntegerGroupElement::new(2, &[1, 3, 0, 1]).unwrap();
        assert!(g.is_congruent_identity(3));
        assert!(!g.is_congruent_identity(2));
    }
}
