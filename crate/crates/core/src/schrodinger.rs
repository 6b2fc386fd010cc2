//! The skew-shift Schrödinger operator `H = Δ + V` with
//! `V(n) = g f(T^n x)`, `f(x) = cos 2πx_r − cos 2π(x_r + x_{r−1})`, and its
//! Dirichlet restrictions to finite intervals.

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{norm2, SymTridiagonal, TridiagonalLu};
use crate::scalar::{Real, C};
use crate::torus::{SkewShiftMap, TorusPoint};

/// `f(x) = cos 2πx_r − cos 2π(x_r + x_{r−1})`.
#[inline]
pub fn potential_shape<T: Real>(x: &[T]) -> T {
    let r = x.len();
    let last = x[r - 1];
    let next = crate::scalar::frac(last + x[r - 2]);
    (T::TAU() * last).cos() - (T::TAU() * next).cos()
}

/// Coupling, dynamics and base point of the potential.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PotentialSpec<T> {
    pub g: T,
    pub map: SkewShiftMap<T>,
    pub x: TorusPoint<T>,
}

impl<T: Real> PotentialSpec<T> {
    pub fn new(g: T, map: SkewShiftMap<T>, x: TorusPoint<T>) -> Result<Self> {
        if !(g > T::zero()) {
            return Err(Error::contract(format!("coupling g = {g} must be > 0")));
        }
        if map.r() < 2 {
            return Err(Error::contract("the potential needs r >= 2"));
        }
        if x.dim() != map.r() {
            return Err(Error::contract("base point and map dimensions differ"));
        }
        Ok(Self { g, map, x })
    }

    /// `g f(T^n x)`.
    pub fn potential_at(&self, n: i64) -> Result<T> {
        let y = self.map.orbit_coordinate(&self.x, n)?;
        Ok(self.g * potential_shape(y.coords()))
    }

    /// `V(a), …, V(b)` along one orbit sweep.
    pub fn potentials(&self, a: i64, b: i64) -> Result<Vec<T>> {
        if a > b {
            return Err(Error::contract(format!("empty interval [{a}, {b}]")));
        }
        let mut orbit = self.map.orbit(&self.x, a)?;
        let mut v = Vec::with_capacity((b - a + 1) as usize);
        for _ in a..=b {
            v.push(self.g * potential_shape(orbit.peek()));
            orbit.advance();
        }
        Ok(v)
    }
}

/// `H^{[a,b]}`: diagonal `V(a..=b)`, off-diagonal 1, Dirichlet boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct SchrodingerFiniteOp<T> {
    a: i64,
    potential: Vec<T>,
}

/// A Green's function entry with the condition estimate of the solve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GreenEntry<T> {
    pub value: C<T>,
    pub condition: T,
}

impl<T: Real> SchrodingerFiniteOp<T> {
    pub fn new(spec: &PotentialSpec<T>, a: i64, b: i64) -> Result<Self> {
        Self::from_potential(a, spec.potentials(a, b)?)
    }

    pub fn from_potential(a: i64, potential: Vec<T>) -> Result<Self> {
        if potential.is_empty() {
            return Err(Error::contract("empty interval"));
        }
        if potential.iter().any(|v| !v.is_finite()) {
            return Err(Error::contract("non-finite potential"));
        }
        Ok(Self { a, potential })
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn b(&self) -> i64 {
        self.a + self.potential.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.potential.len()
    }

    pub fn is_empty(&self) -> bool {
        self.potential.is_empty()
    }

    pub fn potential(&self) -> &[T] {
        &self.potential
    }

    pub fn as_sym(&self) -> SymTridiagonal<T> {
        SymTridiagonal::new(self.potential.clone(), vec![T::one(); self.len() - 1])
    }

    /// Factorization of `H − z`.
    pub fn resolvent(&self, z: C<T>) -> Result<TridiagonalLu<T>> {
        self.as_sym().shifted(z).factor()
    }

    /// `⟨δ_k, (H − z)^{-1} δ_l⟩` with a residual check on the solved column.
    pub fn green_entry(&self, z: C<T>, k: i64, l: i64) -> Result<GreenEntry<T>> {
        for s in [k, l] {
            if s < self.a || s > self.b() {
                return Err(Error::contract(format!("site {s} outside [{}, {}]", self.a, self.b())));
            }
        }
        let lu = self.resolvent(z)?;
        let li = (l - self.a) as usize;
        let col = lu.inverse_column(li);
        let mut r = self.as_sym().shifted(z).matvec(&col);
        r[li] -= C::new(T::one(), T::zero());
        let resid = r.iter().map(|v| v.norm()).fold(T::zero(), T::max);
        let tol = T::of(1e-10).max(T::epsilon() * T::of(1e4)) * (T::one() + norm2(&col));
        if !(resid <= tol) {
            return Err(Error::NearSpectrum {
                condition: lu.condition().to_f64_lossy(),
            });
        }
        Ok(GreenEntry {
            value: col[(k - self.a) as usize],
            condition: lu.condition(),
        })
    }

    /// Gershgorin enclosure `[min V − 2, max V + 2]` of the spectrum.
    pub fn spectral_enclosure(&self) -> (T, T) {
        let lo = self.potential.iter().copied().fold(T::infinity(), T::min);
        let hi = self.potential.iter().copied().fold(T::neg_infinity(), T::max);
        let two = if self.len() > 1 { T::of(2.0) } else { T::zero() };
        (lo - two, hi + two)
    }
}

impl<T: Real> GreenEntry<T> {
    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }
}
