//! Finite-dimensional model spaces: `ℓ₂ⁿ` and `ℓ_pⁿ` for `p ≥ 2`.
//!
//! A [`Space`] carries its norm, its (single-valued) normalized duality map
//! and the geometry constants the rest of the crate relies on:
//!
//! * `c` with `ρ_E(τ) ≤ c·τ²` (2-uniform smoothness),
//! * `d ≥ 1` with `‖x+y‖² ≤ ‖x‖² + 2·j(x)(y) + d·‖y‖²`,
//! * a valid modulus of uniform convexity `η`.
//!
//! For `ℓ_p` the constants are declarations. `d` defaults to `p − 1` and is
//! meant to be checked with [`crate::moduli::check_lemma1_ii`] before use.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// A point of the space, stored by coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(Vec<f64>);

/// A linear functional, stored by its coordinates in the dual basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DualVector(Vec<f64>);

fn check_finite(coords: &[f64]) -> Result<()> {
    match coords.iter().position(|c| !c.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_finite(&coords)?;
        Ok(Self(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    /// The `i`-th coordinate unit vector scaled by `sign`.
    pub fn basis(dim: usize, i: usize, sign: f64) -> Self {
        let mut v = vec![0.0; dim];
        v[i] = sign;
        Self(v)
    }

    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &Vector) -> Vector {
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + alpha * b).collect())
    }

    /// Largest absolute coordinate difference.
    pub fn max_abs_diff(&self, other: &Vector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Add<&Vector> for &Vector {
    type Output = Vector;

    fn add(self, rhs: &Vector) -> Vector {
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub<&Vector> for &Vector {
    type Output = Vector;

    fn sub(self, rhs: &Vector) -> Vector {
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Mul<&Vector> for f64 {
    type Output = Vector;

    fn mul(self, rhs: &Vector) -> Vector {
        Vector(rhs.0.iter().map(|c| self * c).collect())
    }
}

impl Neg for &Vector {
    type Output = Vector;

    fn neg(self) -> Vector {
        Vector(self.0.iter().map(|c| -c).collect())
    }
}

impl DualVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_finite(&coords)?;
        Ok(Self(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// Which norm the space carries.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceKind {
    Hilbert,
    Lp { p: f64 },
}

/// A valid modulus of uniform convexity `η`, i.e. `η(ε) ≤ δ_E(ε)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Modulus {
    /// `η(ε) = ε²/8`, valid in every inner-product space.
    Hilbert,
    /// `η(ε) = (ε/2)^p / p`, a lower bound of Clarkson's modulus of `ℓ_p`.
    Clarkson { p: f64 },
    /// `η(ε) = coef · ε^exponent`, user declared.
    Power { coef: f64, exponent: f64 },
}

impl Modulus {
    pub fn eval(&self, eps: f64) -> f64 {
        match *self {
            Modulus::Hilbert => eps * eps / 8.0,
            Modulus::Clarkson { p } => (eps / 2.0).powf(p) / p,
            Modulus::Power { coef, exponent } => coef * eps.powf(exponent),
        }
    }
}

/// A finite-dimensional smooth normed space with declared geometry constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Space {
    #[serde(flatten)]
    kind: SpaceKind,
    dim: usize,
    c: f64,
    d: f64,
    eta: Modulus,
}

impl Space {
    /// Euclidean `ℝ^dim` with `c = 1/2`, `d = 1` and `η(ε) = ε²/8`.
    pub fn hilbert(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            kind: SpaceKind::Hilbert,
            dim,
            c: 0.5,
            d: 1.0,
            eta: Modulus::Hilbert,
        })
    }

    /// `ℓ_p^dim` for `p ≥ 2`, declaring `c = (p−1)/2`, `d = p − 1` and
    /// Clarkson's modulus.
    pub fn lp(dim: usize, p: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(p.is_finite() && p >= 2.0) {
            return Err(Error::InvalidParameter {
                name: "p",
                value: p,
                reason: "only 2 <= p < inf is 2-uniformly smooth",
            });
        }
        Ok(Self {
            kind: SpaceKind::Lp { p },
            dim,
            c: (p - 1.0) / 2.0,
            d: p - 1.0,
            eta: Modulus::Clarkson { p },
        })
    }

    pub fn with_c(mut self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter {
                name: "c",
                value: c,
                reason: "must be positive",
            });
        }
        self.c = c;
        Ok(self)
    }

    pub fn with_d(mut self, d: f64) -> Result<Self> {
        if !(d.is_finite() && d >= 1.0) {
            return Err(Error::InvalidParameter {
                name: "d",
                value: d,
                reason: "must be >= 1",
            });
        }
        self.d = d;
        Ok(self)
    }

    pub fn with_eta(mut self, eta: Modulus) -> Self {
        self.eta = eta;
        self
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn is_hilbert(&self) -> bool {
        matches!(self.kind, SpaceKind::Hilbert)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn eta(&self) -> Modulus {
        self.eta
    }

    fn exponent(&self) -> f64 {
        match self.kind {
            SpaceKind::Hilbert => 2.0,
            SpaceKind::Lp { p } => p,
        }
    }

    /// Exponent of the dual norm, `1/p + 1/q = 1`.
    pub fn dual_exponent(&self) -> f64 {
        let p = self.exponent();
        p / (p - 1.0)
    }

    fn check(&self, x: &Vector) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.dim(),
            });
        }
        Ok(())
    }

    pub fn norm(&self, x: &Vector) -> Result<f64> {
        self.check(x)?;
        Ok(self.norm_unchecked(x))
    }

    pub(crate) fn norm_unchecked(&self, x: &Vector) -> f64 {
        match self.kind {
            SpaceKind::Hilbert => x.0.iter().map(|c| c * c).sum::<f64>().sqrt(),
            SpaceKind::Lp { p } => lp_norm(&x.0, p),
        }
    }

    /// `‖x‖²`, computed without a square root in the Hilbert case.
    pub(crate) fn norm_sq_unchecked(&self, x: &Vector) -> f64 {
        match self.kind {
            SpaceKind::Hilbert => x.0.iter().map(|c| c * c).sum(),
            SpaceKind::Lp { p } => lp_norm(&x.0, p).powi(2),
        }
    }

    /// The normalized duality map `j`, with `j(x)(x) = ‖x‖²` and `‖j(x)‖_* = ‖x‖`.
    pub fn duality_map(&self, x: &Vector) -> Result<DualVector> {
        self.check(x)?;
        Ok(self.duality_unchecked(x))
    }

    pub(crate) fn duality_unchecked(&self, x: &Vector) -> DualVector {
        match self.kind {
            SpaceKind::Hilbert => DualVector(x.0.clone()),
            SpaceKind::Lp { p } => {
                let n = lp_norm(&x.0, p);
                if n == 0.0 {
                    return DualVector(vec![0.0; x.dim()]);
                }
                // ‖x‖^{2−p}|x_i|^{p−1} = ‖x‖·(|x_i|/‖x‖)^{p−1}
                DualVector(
                    x.0.iter()
                        .map(|&c| {
                            if c == 0.0 {
                                0.0
                            } else {
                                n * (c.abs() / n).powf(p - 1.0) * c.signum()
                            }
                        })
                        .collect(),
                )
            }
        }
    }

    /// Norm of a functional in the dual space (`ℓ_q`).
    pub fn dual_norm(&self, f: &DualVector) -> Result<f64> {
        if f.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: f.dim(),
            });
        }
        Ok(match self.kind {
            SpaceKind::Hilbert => f.0.iter().map(|c| c * c).sum::<f64>().sqrt(),
            SpaceKind::Lp { .. } => lp_norm(&f.0, self.dual_exponent()),
        })
    }

    /// Deterministic probes on the unit sphere: the `2·dim` signed coordinate
    /// vectors `e₁, −e₁, e₂, −e₂, …` first, then seeded random directions.
    pub fn sphere_probes(&self, seed: u64) -> SphereProbes<'_> {
        SphereProbes {
            space: self,
            next: 0,
            rng: rng::stream(seed, 0),
        }
    }

    /// The first `count` elements of [`Space::sphere_probes`].
    pub fn sample_unit_sphere(&self, seed: u64, count: usize) -> Result<Vec<Vector>> {
        if count == 0 {
            return Err(Error::InvalidParameter {
                name: "count",
                value: 0.0,
                reason: "must be >= 1",
            });
        }
        Ok(self.sphere_probes(seed).take(count).collect())
    }

    /// A uniformly random point of the cube `[−radius, radius]^dim`.
    pub(crate) fn random_cube_point(&self, rng: &mut ChaCha8Rng, radius: f64) -> Vector {
        Vector((0..self.dim).map(|_| rng.random_range(-radius..=radius)).collect())
    }

    pub(crate) fn random_unit(&self, rng: &mut ChaCha8Rng) -> Vector {
        loop {
            let g = Vector((0..self.dim).map(|_| rng.sample(StandardNormal)).collect());
            let n = self.norm_unchecked(&g);
            if n > 0.0 && n.is_finite() {
                return Vector(g.0.iter().map(|c| c / n).collect());
            }
        }
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidParameter {
            name: "dim",
            value: 0.0,
            reason: "must be positive",
        });
    }
    Ok(())
}

/// Overflow-safe `ℓ_p` norm.
fn lp_norm(coords: &[f64], p: f64) -> f64 {
    let scale = coords.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let s: f64 = coords.iter().map(|c| (c.abs() / scale).powf(p)).sum();
    scale * s.powf(1.0 / p)
}

/// Evaluation `f(y)` of a functional at a point.
pub fn pairing(f: &DualVector, y: &Vector) -> Result<f64> {
    if f.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: y.dim(),
        });
    }
    Ok(pairing_unchecked(f, y))
}

pub(crate) fn pairing_unchecked(f: &DualVector, y: &Vector) -> f64 {
    f.0.iter().zip(&y.0).map(|(a, b)| a * b).sum()
}

/// Iterator returned by [`Space::sphere_probes`].
pub struct SphereProbes<'a> {
    space: &'a Space,
    next: usize,
    rng: ChaCha8Rng,
}

impl Iterator for SphereProbes<'_> {
    type Item = Vector;

    fn next(&mut self) -> Option<Vector> {
        let i = self.next;
        self.next += 1;
        let dim = self.space.dim;
        if i < 2 * dim {
            let sign = if i.is_multiple_of(2) { 1.0 } else { -1.0 };
            Some(Vector::basis(dim, i / 2, sign))
        } else {
            Some(self.space.random_unit(&mut self.rng))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn hilbert_norm_is_euclidean() {
        let h = Space::hilbert(2).unwrap();
        assert_eq!(h.norm(&v(&[3.0, 4.0])).unwrap(), 5.0);
        assert_eq!(h.norm(&Vector::zeros(2)).unwrap(), 0.0);
    }

    #[test]
    fn lp_norm_direct_evaluation() {
        let l4 = Space::lp(2, 4.0).unwrap();
        assert_relative_eq!(l4.norm(&v(&[1.0, 1.0])).unwrap(), 2f64.powf(0.25), epsilon = 1e-15);
        assert_eq!(l4.norm(&Vector::zeros(2)).unwrap(), 0.0);
    }

    #[test]
    fn norm_rejects_wrong_dimension() {
        let h = Space::hilbert(3).unwrap();
        assert_eq!(
            h.norm(&v(&[1.0, 2.0])),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        );
        assert!(h.duality_map(&v(&[1.0])).is_err());
    }

    #[test]
    fn duality_map_values() {
        let h = Space::hilbert(2).unwrap();
        assert_eq!(h.duality_map(&v(&[1.0, 2.0])).unwrap().coords(), &[1.0, 2.0]);
        assert_eq!(h.duality_map(&Vector::zeros(2)).unwrap().coords(), &[0.0, 0.0]);

        let l4 = Space::lp(2, 4.0).unwrap();
        let x = v(&[1.0, 1.0]);
        let j = l4.duality_map(&x).unwrap();
        let s = 0.5f64.sqrt();
        assert_relative_eq!(j.coords()[0], s, epsilon = 1e-15);
        assert_relative_eq!(j.coords()[1], s, epsilon = 1e-15);
        assert_relative_eq!(pairing(&j, &x).unwrap(), 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(l4.duality_map(&Vector::zeros(2)).unwrap().coords(), &[0.0, 0.0]);
    }

    #[test]
    fn duality_map_handles_zero_coordinates() {
        let l6 = Space::lp(3, 6.0).unwrap();
        let j = l6.duality_map(&v(&[0.0, -2.0, 0.0])).unwrap();
        assert_eq!(j.coords(), &[0.0, -2.0, 0.0]);
    }

    #[test]
    fn pairing_is_a_dot_product() {
        let f = DualVector::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(pairing(&f, &v(&[0.0, 1.0])).unwrap(), 0.0);
        let f = DualVector::new(vec![1.0, 2.0]).unwrap();
        assert_eq!(pairing(&f, &v(&[3.0, 4.0])).unwrap(), 11.0);
        assert!(pairing(&f, &v(&[1.0])).is_err());
    }

    #[test]
    fn sphere_probe_prefix_is_signed_basis() {
        let h = Space::hilbert(2).unwrap();
        let s = h.sample_unit_sphere(7, 4).unwrap();
        assert_eq!(
            s,
            vec![v(&[1.0, 0.0]), v(&[-1.0, 0.0]), v(&[0.0, 1.0]), v(&[0.0, -1.0])]
        );
    }

    #[test]
    fn sphere_samples_are_deterministic_and_unit() {
        let l4 = Space::lp(3, 4.0).unwrap();
        let a = l4.sample_unit_sphere(11, 100).unwrap();
        let b = l4.sample_unit_sphere(11, 100).unwrap();
        assert_eq!(a, b);
        for u in &a {
            assert!((l4.norm(u).unwrap() - 1.0).abs() <= 1e-12);
        }
        assert_ne!(a, l4.sample_unit_sphere(12, 100).unwrap());
        assert!(l4.sample_unit_sphere(0, 0).is_err());
    }

    #[test]
    fn construction_rejects_bad_parameters() {
        assert!(Space::lp(3, 1.5).is_err());
        assert!(Space::lp(3, f64::INFINITY).is_err());
        assert!(Space::hilbert(0).is_err());
        assert!(Space::hilbert(2).unwrap().with_d(0.5).is_err());
        assert!(Space::hilbert(2).unwrap().with_c(0.0).is_err());
        assert!(Vector::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn declared_constants() {
        let h = Space::hilbert(4).unwrap();
        assert_eq!((h.c(), h.d()), (0.5, 1.0));
        assert_eq!(h.eta().eval(2.0), 0.5);
        let l4 = Space::lp(4, 4.0).unwrap();
        assert_eq!((l4.c(), l4.d()), (1.5, 3.0));
        assert_relative_eq!(l4.dual_exponent(), 4.0 / 3.0);
    }
}
