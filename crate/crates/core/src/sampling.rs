//! Seeded sampling of points, polynomial fields and family parameters.
//!
//! All randomness in the crate goes through [`Sampler`], a ChaCha8 stream
//! keyed by a `u64` seed, so every sweep is reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::{Point4, ScalarField, Var};
use crate::lr::FamilyParams;
use crate::pullback::Point2;

/// Closed interval `[lo, hi]` used for every coordinate.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SampleBox {
    pub lo: f64,
    pub hi: f64,
}

impl SampleBox {
    pub const DEFAULT: SampleBox = SampleBox { lo: -2.0, hi: 2.0 };

    pub fn new(lo: f64, hi: f64) -> Option<Self> {
        (lo.is_finite() && hi.is_finite() && lo < hi).then_some(SampleBox { lo, hi })
    }
}

impl Default for SampleBox {
    fn default() -> Self {
        SampleBox::DEFAULT
    }
}

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..=hi)
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn point4(&mut self, b: SampleBox) -> Point4 {
        Point4::new(
            self.uniform(b.lo, b.hi),
            self.uniform(b.lo, b.hi),
            self.uniform(b.lo, b.hi),
            self.uniform(b.lo, b.hi),
        )
    }

    pub fn point2(&mut self, b: SampleBox) -> Point2 {
        Point2::new(self.uniform(b.lo, b.hi), self.uniform(b.lo, b.hi))
    }

    pub fn points4(&mut self, count: usize, b: SampleBox) -> Vec<Point4> {
        (0..count).map(|_| self.point4(b)).collect()
    }

    pub fn points2(&mut self, count: usize, b: SampleBox) -> Vec<Point2> {
        (0..count).map(|_| self.point2(b)).collect()
    }

    /// Points in the box that avoid the singular locus of the family `c`.
    pub fn family_points(&mut self, c: &FamilyParams, count: usize, b: SampleBox) -> Vec<Point4> {
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let pt = self.point4(b);
            if !c.is_singular(&pt) {
                out.push(pt);
            }
        }
        out
    }

    /// Dense polynomial of total degree `degree` in `vars`, coefficients
    /// uniform in `[-scale, scale]`.
    pub fn polynomial(&mut self, vars: &[Var], degree: u32, scale: f64) -> ScalarField {
        let mut acc = ScalarField::zero();
        for exps in monomials(vars.len(), degree) {
            let coeff = self.uniform(-scale, scale);
            let term = vars
                .iter()
                .zip(&exps)
                .fold(ScalarField::constant(coeff), |t, (&v, &e)| {
                    t.mul(&ScalarField::var(v).powi(e as i32))
                });
            acc = acc.add(&term);
        }
        acc
    }

    /// Parameters with entries uniform in `[-1, 1]`.
    pub fn family_params(&mut self) -> FamilyParams {
        loop {
            let c: [f64; 6] = std::array::from_fn(|_| self.uniform(-1.0, 1.0));
            if let Ok(params) = FamilyParams::new(c) {
                return params;
            }
        }
    }

    /// Parameters on the quadric `c2c4 + c3c5 − c1c6 = 0`, obtained by
    /// solving for `c6` (or for `c1` when `c1` is tiny).
    pub fn admissible_family_params(&mut self) -> FamilyParams {
        loop {
            let mut c: [f64; 6] = std::array::from_fn(|_| self.uniform(-1.0, 1.0));
            let s = c[1] * c[3] + c[2] * c[4];
            if c[0].abs() > 0.2 {
                c[5] = s / c[0];
            } else if c[5].abs() > 0.2 {
                c[0] = s / c[5];
            } else {
                continue;
            }
            if c[5].abs() > 4.0 || c[0].abs() > 4.0 {
                continue;
            }
            if let Ok(params) = FamilyParams::new(c) {
                return params;
            }
        }
    }
}

/// All exponent vectors of length `n` with total degree `<= degree`.
fn monomials(n: usize, degree: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 0..=degree {
        for mut rest in monomials(n - 1, degree - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}
