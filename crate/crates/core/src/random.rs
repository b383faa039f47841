//! Seedable samplers for group elements and orthogonal frames.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;

use crate::lie::{qr_positive, sum_zero_basis, CartanVector, GroupElement};

/// The generator used throughout; reproducible across platforms.
pub type Rand = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rand {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |_, _| rng.sample(StandardNormal))
}

/// Haar-distributed element of `SO(d)`.
pub fn haar_rotation<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<f64> {
    loop {
        let (mut q, _) = qr_positive(&gaussian_matrix(d, rng));
        if q.determinant() < 0.0 {
            q.column_mut(d - 1).neg_mut();
        }
        if q.iter().all(|x| x.is_finite()) {
            return q;
        }
    }
}

/// Gaussian matrix rescaled into `SL(d, R)` (a row is negated when the determinant is negative).
pub fn gaussian_group_element<R: Rng + ?Sized>(d: usize, rng: &mut R) -> GroupElement {
    loop {
        let mut m = gaussian_matrix(d, rng);
        let det = m.determinant();
        if det.abs() < 1e-3 {
            continue;
        }
        if det < 0.0 {
            m.row_mut(0).neg_mut();
        }
        if let Ok(g) = GroupElement::new(m) {
            return g;
        }
    }
}

/// Uniform direction on the unit sphere of the Cartan subspace.
pub fn random_direction<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CartanVector {
    let basis = sum_zero_basis(d);
    loop {
        let mut v = vec![0.0; d];
        for b in &basis {
            let c: f64 = rng.sample(StandardNormal);
            for i in 0..d {
                v[i] += c * b[i];
            }
        }
        let cv = CartanVector::project(v);
        let n = cv.norm();
        if n > 1e-9 {
            return cv.scale(1.0 / n);
        }
    }
}

/// `k exp(a) l^T` with Haar `k, l` and `||a||` uniform in `[0, radius]`.
/// The point `g o` is then at distance `||a||` from the basepoint.
pub fn random_kak_element<R: Rng + ?Sized>(d: usize, radius: f64, rng: &mut R) -> GroupElement {
    let a = random_direction(d, rng).scale(radius * rng.random::<f64>());
    let k = haar_rotation(d, rng);
    let l = haar_rotation(d, rng);
    let e = GroupElement::exp_cartan(&a);
    GroupElement::from_matrix_unchecked(k * e.matrix() * l.transpose())
}
