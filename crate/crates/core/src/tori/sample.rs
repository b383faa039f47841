//! Uniform points on a periodic torus, in Hopf coordinates.

use rand::Rng;

use crate::boundary::{eigenflags, hopf_inverse, Flag, HopfPoint};
use crate::error::{Error, Result};
use crate::lie::{CartanVector, GroupElement};
use crate::tori::census::TorusRecord;

/// The torus through `(γ+, γ-, 0)` together with its period basis.
#[derive(Clone, Debug)]
pub struct TorusFrame {
    pub plus: Flag,
    pub minus: Flag,
    pub basis: Vec<CartanVector>,
}

impl TorusFrame {
    pub fn new(record: &TorusRecord) -> Result<Self> {
        if record.periods.len() + 1 != record.d {
            return Err(Error::InvalidArgument("torus sampling needs a full-rank period lattice".into()));
        }
        let g = record.element()?.to_group_element();
        let (plus, minus) = eigenflags(&g)?;
        let basis = record.periods.iter().map(|p| CartanVector::project(p.clone())).collect();
        Ok(Self { plus, minus, basis })
    }

    /// `Σ u_i b_i`.
    pub fn point(&self, u: &[f64]) -> HopfPoint {
        let d = self.plus.dim();
        let y = self.basis.iter().zip(u).fold(CartanVector::zero(d), |acc, (b, &t)| acc.add(&b.scale(t)));
        HopfPoint { xi: self.plus.clone(), eta: self.minus.clone(), y }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> HopfPoint {
        let u: Vec<f64> = (0..self.basis.len()).map(|_| rng.random::<f64>()).collect();
        self.point(&u)
    }

    /// A group element representing the sampled point of `Γ\G/M`.
    pub fn sample_element<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<GroupElement> {
        hopf_inverse(&self.sample(rng))
    }
}

/// `n` points `(γ+, γ-, Y)` with `Y` uniform in the fundamental parallelepiped of the periods.
pub fn torus_sample<R: Rng + ?Sized>(record: &TorusRecord, n: usize, rng: &mut R) -> Result<Vec<HopfPoint>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let frame = TorusFrame::new(record)?;
    Ok((0..n).map(|_| frame.sample(rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::seeded;
    use crate::reduce::shortest_vector;
    use crate::tori::census::{class_census, CensusOptions};

    fn systole(g: &GroupElement) -> f64 {
        let m = g.matrix();
        let rows: Vec<Vec<f64>> = (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
        shortest_vector(&rows).1
    }

    #[test]
    fn samples_fill_the_parallelepiped() {
        let recs = class_census(2, 1.5, &CensusOptions::default()).unwrap();
        let mut rng = seeded(3);
        assert!(torus_sample(&recs[0], 0, &mut rng).unwrap().is_empty());
        let pts = torus_sample(&recs[0], 20_000, &mut rng).unwrap();
        let b = &recs[0].periods[0];
        let mean: f64 = pts.iter().map(|p| p.y.entries()[0]).sum::<f64>() / pts.len() as f64;
        // Uniform on [0, b]: mean b/2, standard error |b| / sqrt(12 n).
        let se = b[0].abs() / (12.0 * pts.len() as f64).sqrt();
        assert!((mean - b[0] / 2.0).abs() < 5.0 * se);
    }

    #[test]
    fn period_translates_are_gamma_translates() {
        // Shifting Y by a period moves the point by an element of Γ, so the systole is unchanged.
        let recs = class_census(3, 2.0, &CensusOptions::default()).unwrap();
        let frame = TorusFrame::new(&recs[0]).unwrap();
        for u in [[0.1, 0.7], [0.4, 0.25]] {
            let a = hopf_inverse(&frame.point(&u)).unwrap();
            for shift in [[1.0, 0.0], [0.0, 1.0], [-1.0, 2.0]] {
                let v = [u[0] + shift[0], u[1] + shift[1]];
                let b = hopf_inverse(&frame.point(&v)).unwrap();
                assert!((systole(&a) - systole(&b)).abs() < 1e-7 * systole(&a));
            }
        }
    }
}
