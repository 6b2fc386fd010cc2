//! The skew-shift `T_ω` on the torus `T^r`, its orbits, frequency quality
//! and return-time statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{circle_dist, dist_to_int, frac, Real};

/// `(√5 − 1)/2`, the default frequency.
pub const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// A point of `T^r` with every coordinate in `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint<T> {
    coords: Vec<T>,
}

impl<T: Real> TorusPoint<T> {
    /// Validating constructor.
    pub fn new(coords: Vec<T>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::contract("torus point needs dimension r >= 1"));
        }
        if let Some(c) = coords.iter().find(|c| !(**c >= T::zero() && **c < T::one())) {
            return Err(Error::contract(format!("torus coordinate {c} outside [0, 1)")));
        }
        Ok(Self { coords })
    }

    /// Reduces arbitrary real coordinates mod 1.
    pub fn wrapped(coords: impl IntoIterator<Item = T>) -> Result<Self> {
        Self::new(coords.into_iter().map(frac).collect())
    }

    pub fn origin(r: usize) -> Self {
        Self {
            coords: vec![T::zero(); r],
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    #[inline]
    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    /// The last coordinate `x_r`.
    #[inline]
    pub fn last(&self) -> T {
        self.coords[self.coords.len() - 1]
    }

    /// Componentwise circular sup-distance.
    pub fn sup_dist(&self, other: &Self) -> T {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(&a, &b)| circle_dist(a, b))
            .fold(T::zero(), T::max)
    }
}

/// The skew-shift `(x_1, ..., x_r) ↦ (x_1 + ω, x_2 + x_1, ..., x_r + x_{r−1}) mod 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkewShiftMap<T> {
    r: usize,
    omega: T,
}

impl<T: Real> SkewShiftMap<T> {
    /// `r >= 1`, `omega` in `[0, 1)`. `r = 1` is the plain rotation.
    pub fn new(r: usize, omega: T) -> Result<Self> {
        if r == 0 {
            return Err(Error::contract("skew-shift dimension must be >= 1"));
        }
        if !(omega >= T::zero() && omega < T::one()) {
            return Err(Error::contract(format!("frequency {omega} outside [0, 1)")));
        }
        Ok(Self { r, omega })
    }

    pub fn golden(r: usize) -> Result<Self> {
        Self::new(r, T::of(GOLDEN))
    }

    #[inline]
    pub fn r(&self) -> usize {
        self.r
    }

    #[inline]
    pub fn omega(&self) -> T {
        self.omega
    }

    /// True when `omega` has a denominator `q <= 10^4` up to rounding.
    pub fn looks_rational(&self) -> bool {
        diophantine_quality(self.omega, 10_000)
            .map(|d| d.kappa_lower < T::of(1e3) * T::epsilon())
            .unwrap_or(false)
    }

    fn check(&self, x: &TorusPoint<T>) -> Result<()> {
        if x.dim() != self.r {
            return Err(Error::contract(format!(
                "point of dimension {} for a map on T^{}",
                x.dim(),
                self.r
            )));
        }
        Ok(())
    }

    /// One application of the map.
    pub fn step(&self, x: &TorusPoint<T>) -> Result<TorusPoint<T>> {
        self.check(x)?;
        let mut y = x.clone();
        self.step_in_place(&mut y.coords);
        Ok(y)
    }

    /// One application of the inverse map
    /// `(x_1 − ω, x_2 − x_1', ..., x_r − x_{r−1}')` where primes are new values.
    pub fn step_inverse(&self, x: &TorusPoint<T>) -> Result<TorusPoint<T>> {
        self.check(x)?;
        let mut y = x.clone();
        self.step_inverse_in_place(&mut y.coords);
        Ok(y)
    }

    #[inline]
    pub(crate) fn step_in_place(&self, c: &mut [T]) {
        // update from the top so x_{l-1} is still the old value
        for l in (1..c.len()).rev() {
            c[l] = frac(c[l] + c[l - 1]);
        }
        c[0] = frac(c[0] + self.omega);
    }

    #[inline]
    pub(crate) fn step_inverse_in_place(&self, c: &mut [T]) {
        c[0] = frac(c[0] - self.omega);
        for l in 1..c.len() {
            c[l] = frac(c[l] - c[l - 1]);
        }
    }

    /// `T^n x` for any integer `n`, iterating with a mod-1 reduction per step.
    /// Negative `n` iterates the explicit inverse.
    pub fn orbit_coordinate(&self, x: &TorusPoint<T>, n: i64) -> Result<TorusPoint<T>> {
        self.check(x)?;
        let mut y = x.clone();
        if n >= 0 {
            for _ in 0..n {
                self.step_in_place(&mut y.coords);
            }
        } else {
            for _ in 0..n.unsigned_abs() {
                self.step_inverse_in_place(&mut y.coords);
            }
        }
        Ok(y)
    }

    /// Iterator over `T^n x, T^{n+1} x, ...` starting at `n = start`.
    pub fn orbit(&self, x: &TorusPoint<T>, start: i64) -> Result<Orbit<T>> {
        let first = self.orbit_coordinate(x, start)?;
        Ok(Orbit {
            map: *self,
            current: first.coords,
        })
    }

    /// Closed form of the second coordinate for `r = 2`:
    /// `x_2(n) = frac(x_2 + n x_1 + ω n(n−1)/2)`.
    ///
    /// Evaluated in `f64` regardless of `T`; accurate while `ω n^2` stays well
    /// inside the double mantissa.
    pub fn closed_form_r2(&self, x: &TorusPoint<T>, n: u64) -> Result<TorusPoint<T>> {
        if self.r != 2 {
            return Err(Error::contract("closed form only for r = 2"));
        }
        self.check(x)?;
        let x1 = x.coords[0].to_f64_lossy();
        let x2 = x.coords[1].to_f64_lossy();
        let w = self.omega.to_f64_lossy();
        let nf = n as f64;
        // split n(n-1)/2 * ω to keep the product exact-ish
        let tri = (n as u128 * (n as u128).saturating_sub(1) / 2) as f64;
        let first = frac(x1 + nf * w);
        let second = frac(frac(x2 + nf * x1) + frac(tri * w));
        TorusPoint::new(vec![T::of(first), T::of(second)])
    }
}

/// Forward orbit iterator; yields owned points.
#[derive(Clone, Debug)]
pub struct Orbit<T> {
    map: SkewShiftMap<T>,
    current: Vec<T>,
}

impl<T: Real> Orbit<T> {
    /// Current point without advancing.
    #[inline]
    pub fn peek(&self) -> &[T] {
        &self.current
    }

    /// Advances one step in place.
    #[inline]
    pub fn advance(&mut self) {
        self.map.step_in_place(&mut self.current);
    }
}

impl<T: Real> Iterator for Orbit<T> {
    type Item = TorusPoint<T>;

    fn next(&mut self) -> Option<Self::Item> {
        let out = TorusPoint {
            coords: self.current.clone(),
        };
        self.advance();
        Some(out)
    }
}

/// Lower estimate of the Diophantine constant over `1 <= q <= q_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiophantineReport<T> {
    pub kappa_lower: T,
    pub q_max: u64,
    pub worst_q: u64,
}

/// `min_{1<=q<=q_max} q^2 dist(q ω, Z)` and the `q` attaining it.
pub fn diophantine_quality<T: Real>(omega: T, q_max: u64) -> Result<DiophantineReport<T>> {
    if q_max < 1 {
        return Err(Error::contract("q_max must be >= 1"));
    }
    let mut best = T::infinity();
    let mut worst_q = 1;
    for q in 1..=q_max {
        let qf = T::of(q as f64);
        let v = qf * qf * dist_to_int(qf * omega);
        if v < best {
            best = v;
            worst_q = q;
        }
    }
    Ok(DiophantineReport {
        kappa_lower: best,
        q_max,
        worst_q,
    })
}

/// Closed sup-metric ball `{x : max_l ||x_l − a_l|| <= ε}` on the torus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallRegion<T> {
    pub center: TorusPoint<T>,
    pub radius: T,
}

impl<T: Real> BallRegion<T> {
    /// `radius > 0`; radii of `1/2` or more cover the whole torus.
    pub fn new(center: TorusPoint<T>, radius: T) -> Result<Self> {
        if !(radius > T::zero()) {
            return Err(Error::contract("ball radius must be positive"));
        }
        Ok(Self { center, radius })
    }

    #[inline]
    pub fn contains(&self, x: &[T]) -> bool {
        self.center
            .coords
            .iter()
            .zip(x)
            .all(|(&a, &b)| circle_dist(a, b) <= self.radius)
    }

    /// Haar measure `(2ε)^r`, capped at 1.
    pub fn measure(&self) -> T {
        let side = (T::of(2.0) * self.radius).min(T::one());
        side.powi(self.center.dim() as i32)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReturnTimeStats<T> {
    pub horizon: u64,
    pub hits: u64,
    pub frequency: T,
    pub target_measure: T,
}

impl<T: Real> ReturnTimeStats<T> {
    pub fn abs_error(&self) -> T {
        (self.frequency - self.target_measure).abs()
    }
}

/// Counts `1 <= l <= L` with `T^l x` in the ball.
pub fn return_time_count<T: Real>(
    map: &SkewShiftMap<T>,
    x: &TorusPoint<T>,
    region: &BallRegion<T>,
    horizon: u64,
) -> Result<ReturnTimeStats<T>> {
    if horizon < 1 {
        return Err(Error::contract("horizon L must be >= 1"));
    }
    if region.center.dim() != map.r() {
        return Err(Error::contract("ball dimension differs from map dimension"));
    }
    let mut orbit = map.orbit(x, 1)?;
    let mut hits = 0u64;
    for _ in 0..horizon {
        if region.contains(orbit.peek()) {
            hits += 1;
        }
        orbit.advance();
    }
    Ok(ReturnTimeStats {
        horizon,
        hits,
        frequency: T::of(hits as f64) / T::of(horizon as f64),
        target_measure: region.measure(),
    })
}
