//! Lattice basis reduction and short-vector enumeration for small real lattices.
//!
//! Bases are lists of row vectors. Every routine tracks the integer change of
//! basis so callers can recover exact integer witnesses.

/// Gram–Schmidt data: `mu[i][j]` and the squared lengths `b*_i · b*_i`.
pub fn gram_schmidt(b: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = b.len();
    let mut star: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut mu = vec![vec![0.0; n]; n];
    let mut norms = vec![0.0; n];
    for i in 0..n {
        let mut v = b[i].clone();
        for j in 0..i {
            mu[i][j] = if norms[j] > 0.0 { dot(&b[i], &star[j]) / norms[j] } else { 0.0 };
            for (x, y) in v.iter_mut().zip(&star[j]) {
                *x -= mu[i][j] * y;
            }
        }
        norms[i] = dot(&v, &v);
        mu[i][i] = 1.0;
        star.push(v);
    }
    (mu, norms)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Result of LLL: the reduced basis and `u` with `reduced = u · input`.
#[derive(Clone, Debug)]
pub struct Reduced {
    pub basis: Vec<Vec<f64>>,
    pub transform: Vec<Vec<i64>>,
}

/// LLL reduction with parameter `delta` of linearly independent rows.
pub fn lll(input: &[Vec<f64>], delta: f64) -> Reduced {
    let n = input.len();
    let mut b: Vec<Vec<f64>> = input.to_vec();
    let mut u: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    if n == 0 {
        return Reduced { basis: b, transform: u };
    }
    let (mut mu, mut norms) = gram_schmidt(&b);
    let mut k = 1;
    let mut guard = 0usize;
    while k < n {
        guard += 1;
        if guard > 100_000 {
            break;
        }
        for j in (0..k).rev() {
            let q = mu[k][j].round();
            if q != 0.0 {
                let qi = q as i64;
                for t in 0..b[k].len() {
                    b[k][t] -= q * b[j][t];
                }
                for t in 0..n {
                    u[k][t] -= qi * u[j][t];
                }
                for t in 0..=j {
                    mu[k][t] -= q * mu[j][t];
                }
            }
        }
        if norms[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * norms[k - 1] {
            k += 1;
        } else {
            b.swap(k, k - 1);
            u.swap(k, k - 1);
            (mu, norms) = gram_schmidt(&b);
            k = k.saturating_sub(1).max(1);
        }
    }
    Reduced { basis: b, transform: u }
}

/// Integer coefficient vectors `x != 0` with `|Σ x_i b_i| <= radius`, by
/// Fincke–Pohst enumeration. Returns coefficients in the given basis together
/// with squared lengths. Stops early once `cap` points are found.
pub fn short_vectors(b: &[Vec<f64>], radius: f64, cap: usize) -> Vec<(Vec<i64>, f64)> {
    let n = b.len();
    let (mu, norms) = gram_schmidt(b);
    let r2 = radius * radius * (1.0 + 1e-12) + 1e-300;
    let mut out = Vec::new();
    let mut x = vec![0i64; n];
    // Partial squared lengths from level i upward.
    let mut partial = vec![0.0; n + 1];
    fn rec(
        i: usize,
        x: &mut Vec<i64>,
        partial: &mut Vec<f64>,
        mu: &[Vec<f64>],
        norms: &[f64],
        r2: f64,
        cap: usize,
        out: &mut Vec<(Vec<i64>, f64)>,
    ) {
        let n = x.len();
        let c: f64 = -(i + 1..n).map(|j| x[j] as f64 * mu[j][i]).sum::<f64>();
        let room = r2 - partial[i + 1];
        if room < 0.0 || norms[i] <= 0.0 {
            return;
        }
        let w = (room / norms[i]).sqrt();
        let lo = (c - w).ceil() as i64;
        let hi = (c + w).floor() as i64;
        for v in lo..=hi {
            if out.len() >= cap {
                return;
            }
            x[i] = v;
            let y = v as f64 - c;
            partial[i] = partial[i + 1] + y * y * norms[i];
            if partial[i] > r2 {
                continue;
            }
            if i == 0 {
                if x.iter().any(|&z| z != 0) {
                    out.push((x.clone(), partial[0]));
                }
            } else {
                rec(i - 1, x, partial, mu, norms, r2, cap, out);
            }
        }
        x[i] = 0;
    }
    if n > 0 {
        rec(n - 1, &mut x, &mut partial, &mu, &norms, r2, cap, &mut out);
    }
    out
}

/// Heuristic number of lattice points of a full-rank basis in a ball: volume over covolume.
pub fn ball_point_estimate(b: &[Vec<f64>], radius: f64) -> f64 {
    let n = b.len();
    let (_, norms) = gram_schmidt(b);
    let covol = norms.iter().product::<f64>().sqrt();
    // V_n(r) = V_{n-2}(r) 2π r² / n.
    let mut v = if n % 2 == 0 { 1.0 } else { 2.0 * radius };
    let mut k = if n % 2 == 0 { 2 } else { 3 };
    while k <= n {
        v *= 2.0 * std::f64::consts::PI * radius * radius / k as f64;
        k += 2;
    }
    if covol > 0.0 { v / covol } else { f64::INFINITY }
}

/// `Σ x_i b_i`.
pub fn combine(x: &[i64], b: &[Vec<f64>]) -> Vec<f64> {
    let m = b.first().map_or(0, |r| r.len());
    let mut v = vec![0.0; m];
    for (xi, row) in x.iter().zip(b) {
        for (t, r) in v.iter_mut().zip(row) {
            *t += *xi as f64 * r;
        }
    }
    v
}

/// Shortest nonzero vector: `(coefficients, length)`.
pub fn shortest_vector(b: &[Vec<f64>]) -> (Vec<i64>, f64) {
    let red = lll(b, 0.99);
    let first = red.basis[0].clone();
    let bound = dot(&first, &first).sqrt();
    let (coef, len2) = short_vectors(&red.basis, bound, usize::MAX)
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)))
        .unwrap_or_else(|| ((0..b.len()).map(|i| i64::from(i == 0)).collect(), bound * bound));
    // Back to the input basis.
    let n = b.len();
    let mut x = vec![0i64; n];
    for (ci, row) in coef.iter().zip(&red.transform) {
        for (t, r) in x.iter_mut().zip(row) {
            *t += ci * r;
        }
    }
    (x, len2.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lll_preserves_the_lattice() {
        let b = vec![vec![1.0, 1.0, 1.0], vec![-1.0, 0.0, 2.0], vec![3.0, 5.0, 6.0]];
        let r = lll(&b, 0.99);
        for (row, u) in r.basis.iter().zip(&r.transform) {
            let back = combine(u, &b);
            for (x, y) in row.iter().zip(&back) {
                assert!((x - y).abs() < 1e-9);
            }
        }
        let (_, norms) = gram_schmidt(&r.basis);
        let vol: f64 = norms.iter().product::<f64>().sqrt();
        assert!((vol - 3.0).abs() < 1e-9);
        for k in 1..3 {
            assert!(norms[k] >= 0.5 * norms[k - 1]);
        }
    }

    #[test]
    fn short_vectors_match_a_box_scan() {
        let b = vec![vec![1.0, 0.3], vec![0.4, 2.1]];
        let got = short_vectors(&b, 2.5, usize::MAX).len();
        let mut want = 0;
        for i in -10i64..=10 {
            for j in -10i64..=10 {
                let v = combine(&[i, j], &b);
                if (i, j) != (0, 0) && dot(&v, &v) <= 6.25 {
                    want += 1;
                }
            }
        }
        assert_eq!(got, want);
        let est = ball_point_estimate(&b, 25.0);
        let exact = short_vectors(&b, 25.0, usize::MAX).len() as f64;
        assert!((est - exact).abs() < 0.05 * exact);
    }

    #[test]
    fn shortest_vector_of_a_skewed_basis() {
        // Same lattice as Z^2, badly presented.
        let b = vec![vec![13.0, 8.0], vec![8.0, 5.0]];
        let (x, len) = shortest_vector(&b);
        assert!((len - 1.0).abs() < 1e-9);
        let v = combine(&x, &b);
        assert!((dot(&v, &v) - 1.0).abs() < 1e-9);
    }
}
