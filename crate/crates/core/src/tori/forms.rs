//! Indefinite binary quadratic forms, Zagier reduction and Pell units.
//!
//! A hyperbolic `γ = [[p, q], [r, s]]` of trace `τ` corresponds to the form
//! `[r, s - p, -q]` of discriminant `τ² - 4`, and conjugation of `γ` by `M`
//! corresponds to the substitution `f ∘ M`. Classes of `γ` with trace `τ` are
//! therefore the proper equivalence classes of forms of that discriminant,
//! primitive or not.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::{gcd, isqrt};
use crate::error::{Error, Result};
use crate::lattice::IntegerGroupElement;

/// `a x² + b x y + c y²`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BinaryForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl fmt::Debug for BinaryForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}, {}]", self.a, self.b, self.c)
    }
}

/// `floor((p + sqrt(n)) / q)` for `n` not a square and `q != 0`.
fn floor_quadratic(p: i128, n: i128, q: i128) -> i128 {
    let s = isqrt(n as u128) as i128;
    if q > 0 {
        (p + s).div_euclid(q)
    } else {
        // (p + √n)/q = (-p - √n)/(-q) and floor((P - √n)/Q) = floor((P - s - 1)/Q).
        (-p - s - 1).div_euclid(-q)
    }
}

impl BinaryForm {
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        Self { a, b, c }
    }

    pub fn disc(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn content(&self) -> i64 {
        gcd(gcd(self.a, self.b), self.c)
    }

    /// `a > 0`, `c > 0`, `b > a + c`.
    pub fn is_zagier_reduced(&self) -> bool {
        self.a > 0 && self.c > 0 && self.b > self.a + self.c
    }

    /// `f(p x + q y, r x + s y)` for `m = [p, q, r, s]`.
    pub fn act(&self, m: [i64; 4]) -> BinaryForm {
        let [p, q, r, s] = m.map(|x| x as i128);
        let (a, b, c) = (self.a as i128, self.b as i128, self.c as i128);
        let na = a * p * p + b * p * r + c * r * r;
        let nb = 2 * a * p * q + b * (p * s + q * r) + 2 * c * r * s;
        let nc = a * q * q + b * q * s + c * s * s;
        BinaryForm::new(na as i64, nb as i64, nc as i64)
    }

    /// One step of the minus continued fraction of the root `(b + √D) / 2a`,
    /// returning the new form and the substitution used.
    pub fn minus_cf_step(&self) -> (BinaryForm, [i64; 4]) {
        let n = floor_quadratic(self.b as i128, self.disc() as i128, 2 * self.a as i128) as i64 + 1;
        let m = [-n, -1, 1, 0];
        (self.act(m), m)
    }

    /// Equivalent Zagier-reduced form and a substitution `M` in `SL(2, Z)` with
    /// `self ∘ M = reduced`.
    pub fn zagier_reduce(&self) -> Result<(BinaryForm, [i64; 4])> {
        let d = self.disc();
        if d <= 0 || crate::arith::is_square(d as i128) {
            return Err(Error::InvalidArgument(format!("form {self:?} is not indefinite with non-square discriminant")));
        }
        let mut f = *self;
        let mut m = [1i64, 0, 0, 1];
        for _ in 0..100_000 {
            if f.is_zagier_reduced() {
                return Ok((f, m));
            }
            let (g, s) = f.minus_cf_step();
            m = mul2(m, s);
            f = g;
        }
        Err(Error::Degenerate(format!("reduction of {self:?} did not terminate")))
    }

    /// The Zagier cycle starting at a reduced form.
    pub fn zagier_cycle(&self) -> Vec<BinaryForm> {
        debug_assert!(self.is_zagier_reduced());
        let mut out = vec![*self];
        let mut f = self.minus_cf_step().0;
        while f != *self {
            out.push(f);
            f = f.minus_cf_step().0;
        }
        out
    }

    /// Smallest form of the cycle, used as the class key.
    pub fn cycle_key(&self) -> Result<BinaryForm> {
        let (r, _) = self.zagier_reduce()?;
        Ok(*r.zagier_cycle().iter().min().unwrap())
    }

    /// The hyperbolic matrix of trace `τ` attached to this form.
    pub fn to_matrix(&self, trace: i64) -> Result<IntegerGroupElement> {
        if (trace - self.b).rem_euclid(2) != 0 {
            return Err(Error::InvalidArgument(format!("trace {trace} and form {self:?} have different parity")));
        }
        IntegerGroupElement::new(2, &[(trace - self.b) / 2, -self.c, self.a, (trace + self.b) / 2])
    }

    pub fn of_matrix(g: &IntegerGroupElement) -> BinaryForm {
        BinaryForm::new(g.get(1, 0), g.get(1, 1) - g.get(0, 0), -g.get(0, 1))
    }
}

fn mul2(x: [i64; 4], y: [i64; 4]) -> [i64; 4] {
    [x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3], x[2] * y[0] + x[3] * y[2], x[2] * y[1] + x[3] * y[3]]
}

/// Smallest prime factors below `n`.
pub struct FactorSieve {
    spf: Vec<u32>,
}

impl FactorSieve {
    pub fn new(n: usize) -> Self {
        let mut spf = vec![0u32; n + 1];
        for i in 2..=n {
            if spf[i] == 0 {
                let mut j = i;
                while j <= n {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        Self { spf }
    }

    pub fn limit(&self) -> usize {
        self.spf.len() - 1
    }

    pub fn divisors(&self, mut n: usize) -> Vec<usize> {
        let mut out = vec![1usize];
        while n > 1 {
            let p = self.spf[n] as usize;
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            let len = out.len();
            let mut pk = 1;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    out.push(out[i] * pk);
                }
            }
        }
        out
    }
}

/// All Zagier-reduced forms of discriminant `d`, primitive or not, sorted.
///
/// With `k = a - c` and `s = a + c` the conditions read `b > s > |k|` and
/// `(b - s)(b + s) = d - k²`, so each form comes from a factorization.
pub fn zagier_reduced_forms(d: i64, sieve: &FactorSieve) -> Vec<BinaryForm> {
    let mut out = Vec::new();
    let kmax = isqrt(d as u128) as i64;
    for k in -kmax..=kmax {
        let n = d - k * k;
        if n <= 0 {
            continue;
        }
        assert!(n as usize <= sieve.limit(), "sieve too small for discriminant {d}");
        for e in sieve.divisors(n as usize) {
            let e = e as i64;
            let f = n / e;
            if e >= f || (f - e) % 2 != 0 {
                continue;
            }
            let (b, s) = ((f + e) / 2, (f - e) / 2);
            if s <= k.abs() || (s + k) % 2 != 0 {
                continue;
            }
            let form = BinaryForm::new((s + k) / 2, b, (s - k) / 2);
            debug_assert!(form.is_zagier_reduced() && form.disc() == d);
            out.push(form);
        }
    }
    out.sort();
    out
}

/// Proper equivalence classes of forms of discriminant `d`, each given by the
/// smallest form of its Zagier cycle.
pub fn form_classes(d: i64, sieve: &FactorSieve) -> Vec<BinaryForm> {
    let forms = zagier_reduced_forms(d, sieve);
    let mut seen = std::collections::HashSet::with_capacity(forms.len());
    let mut keys = Vec::new();
    for f in forms {
        if seen.contains(&f) {
            continue;
        }
        let cycle = f.zagier_cycle();
        keys.push(*cycle.iter().min().unwrap());
        seen.extend(cycle);
    }
    keys.sort();
    keys
}

/// Fundamental solution `(t, u)` of `t² - d u² = 4` with `t, u > 0`, from the
/// continued fraction of `(σ + √d) / 2` (σ the parity of `d`).
pub fn pell_fundamental(d: i64) -> Result<(i128, i128)> {
    if d <= 0 || crate::arith::is_square(d as i128) || d.rem_euclid(4) > 1 {
        return Err(Error::InvalidArgument(format!("{d} is not a non-square discriminant")));
    }
    let dd = d as i128;
    // ω = (P + √d) / Q with Q | d - P².
    let (mut p, mut q) = (dd & 1, 2i128);
    // Convergents h/k of ω; a unit (h - k ω')... track via ε = x + y ω.
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let omega_bar_num = |h: i128, k: i128| -> (i128, i128) {
        // h - k ω' with ω' = (σ - √d)/2, written as (t + u √d)/2.
        (2 * h - k * (dd & 1), k)
    };
    for _ in 0..1_000_000 {
        let a = floor_quadratic(p, dd, q);
        (h0, h1) = (h1, a.checked_mul(h1).and_then(|x| x.checked_add(h0)).ok_or_else(overflow)?);
        (k0, k1) = (k1, a.checked_mul(k1).and_then(|x| x.checked_add(k0)).ok_or_else(overflow)?);
        let (t, u) = omega_bar_num(h1, k1);
        if u > 0 && t > 0 && t.checked_mul(t).ok_or_else(overflow)? - dd * u * u == 4 {
            return Ok((t, u));
        }
        p = a * q - p;
        q = (dd - p * p) / q;
    }
    Err(Error::Degenerate(format!("no Pell solution found for {d}")))
}

fn overflow() -> Error {
    Error::Overflow("Pell convergents exceed 128 bits".into())
}

/// Generator of the centralizer of a hyperbolic `γ` in `PSL(2, Z)`, with
/// positive trace, and the exponent `k` with `ε^k = γ` (up to sign).
pub fn fundamental_automorph(g: &IntegerGroupElement) -> Result<(IntegerGroupElement, u32)> {
    let tau = g.trace();
    if tau.abs() <= 2 {
        return Err(Error::InvalidArgument(format!("trace {tau} is not hyperbolic")));
    }
    let sign = tau.signum();
    let g = if sign < 0 { g.neg() } else { *g };
    let tau = tau.abs();
    let f = BinaryForm::of_matrix(&g);
    let content = f.content();
    let prim = BinaryForm::new(f.a / content, f.b / content, f.c / content);
    let dp = prim.disc() as i128;
    let (t, u) = pell_fundamental(dp as i64)?;
    let (t, u) = (t as i64, u as i64);
    let eps = IntegerGroupElement::new(2, &[(t - prim.b * u) / 2, -prim.c * u, prim.a * u, (t + prim.b * u) / 2])?;
    let mut pow = eps;
    for k in 1u32.. {
        if pow == g {
            return Ok((eps, k));
        }
        if pow.trace() >= tau {
            break;
        }
        pow = pow.checked_mul(&eps)?;
    }
    Err(Error::Degenerate(format!("no automorph found for {:?}", g.entries())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_preserves_class_and_reducedness() {
        let sieve = FactorSieve::new(2000);
        for d in [5i64, 12, 21, 32, 45, 60, 77, 96, 117, 140] {
            for f in zagier_reduced_forms(d, &sieve) {
                let (g, m) = f.minus_cf_step();
                assert!(g.is_zagier_reduced(), "{f:?} -> {g:?}");
                assert_eq!(f.act(m), g);
                assert_eq!(m[0] * m[3] - m[1] * m[2], 1);
            }
        }
    }

    #[test]
    fn reduction_of_arbitrary_forms() {
        for f in [BinaryForm::new(1, 1, -1), BinaryForm::new(-3, 7, 2), BinaryForm::new(10, 33, -4), BinaryForm::new(2, 0, -7)] {
            let (r, m) = f.zagier_reduce().unwrap();
            assert!(r.is_zagier_reduced());
            assert_eq!(f.act(m), r);
            assert_eq!(r.disc(), f.disc());
        }
    }

    #[test]
    fn matrices_and_forms() {
        let g = IntegerGroupElement::new(2, &[2, 1, 1, 1]).unwrap();
        let f = BinaryForm::of_matrix(&g);
        assert_eq!(f.disc(), 5);
        assert_eq!(f.to_matrix(3).unwrap(), g);
        // Conjugation by M corresponds to f ∘ M.
        let m = IntegerGroupElement::new(2, &[3, 2, 1, 1]).unwrap();
        let conj = m.inverse().checked_mul(&g).unwrap().checked_mul(&m).unwrap();
        let mm = [3, 2, 1, 1];
        assert_eq!(BinaryForm::of_matrix(&conj), f.act(mm));
    }

    #[test]
    fn pell_small_cases() {
        // t² - 5u² = 4: (3, 1); t² - 12u² = 4: (4, 1); t² - 13u² = 4: (11, 3).
        assert_eq!(pell_fundamental(5).unwrap(), (3, 1));
        assert_eq!(pell_fundamental(12).unwrap(), (4, 1));
        assert_eq!(pell_fundamental(13).unwrap(), (11, 3));
        assert_eq!(pell_fundamental(8).unwrap(), (6, 2));
        for d in [21i64, 24, 28, 29, 33, 40, 41, 44, 53, 61, 97, 109] {
            let (t, u) = pell_fundamental(d).unwrap();
            // Minimality against a direct scan.
            let mut first = None;
            for uu in 1..=u {
                let x = 4 + d as i128 * uu * uu;
                if crate::arith::is_square(x) {
                    first = Some((isqrt(x as u128) as i128, uu));
                    break;
                }
            }
            assert_eq!(first, Some((t, u)), "d = {d}");
        }
    }

    #[test]
    fn automorphs() {
        let g = IntegerGroupElement::new(2, &[2, 1, 1, 1]).unwrap();
        let (eps, k) = fundamental_automorph(&g).unwrap();
        assert_eq!((eps, k), (g, 1));
        let g5 = (0..4).fold(IntegerGroupElement::identity(2), |acc, _| acc.checked_mul(&g).unwrap());
        let (eps, k) = fundamental_automorph(&g5).unwrap();
        assert_eq!((eps, k), (g, 4));
        let (eps, k) = fundamental_automorph(&g5.neg()).unwrap();
        assert_eq!((eps, k), (g, 4));
        // Exponents where log μ / log φ² is an exact integer.
        let h = IntegerGroupElement::new(2, &[0, -1, 1, 3]).unwrap();
        let mut p = h;
        for want in 1..=12 {
            let (eps, k) = fundamental_automorph(&p).unwrap();
            assert_eq!((eps, k), (h, want));
            p = p.checked_mul(&h).unwrap();
        }
    }
}
