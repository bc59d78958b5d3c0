//! Uniform spatial discretization of the truncated line, sampled functions,
//! and the discrete norms (sup, Hölder, weighted-decay) everything else is
//! measured in.
//!
//! The domain is [-X, X] with homogeneous Dirichlet closure at the ends.
//! Grids always have an odd point count so that x = 0 is a grid point.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Pairwise Hölder seminorm is exact up to this size; above it, strided
/// offset subsampling is used.
pub const HOLDER_EXACT_LIMIT: usize = 2000;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("grid half-width must be positive, got {0}")]
    NonPositiveHalfWidth(f64),
    #[error("grid needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("grid point count must be odd so x = 0 is a grid point, got {0}")]
    EvenPointCount(usize),
    #[error("value count {got} does not match grid point count {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("non-finite value at index {0}")]
    NonFiniteValue(usize),
    #[error("Hölder exponent must lie in (0, 1], got {0}")]
    BadHolderExponent(f64),
    #[error("decay rate must be positive, got {0}")]
    BadDecayRate(f64),
    #[error("decay rate {rate} is not smaller than the reference eigenvalue {reference}")]
    DecayRateTooLarge { rate: f64, reference: f64 },
}

/// Uniform grid on [-X, X] with an odd number of points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    half_width: f64,
    n: usize,
    h: f64,
}

impl Grid {
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Coordinate of the i-th point; i = 0 is -X, i = n-1 is +X.
    pub fn x(&self, i: usize) -> f64 {
        -self.half_width + self.h * i as f64
    }

    /// Index of x = 0.
    pub fn midpoint(&self) -> usize {
        (self.n - 1) / 2
    }

    /// Number of interior points (Dirichlet unknowns).
    pub fn interior_len(&self) -> usize {
        self.n - 2
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.x(i))
    }
}

/// `make_grid(X, n)`: uniform grid with first point -X, last point +X.
pub fn make_grid(half_width: f64, n: usize) -> Result<Grid, GridError> {
    if !(half_width > 0.0) {
        return Err(GridError::NonPositiveHalfWidth(half_width));
    }
    if n < 3 {
        return Err(GridError::TooFewPoints(n));
    }
    if n % 2 == 0 {
        return Err(GridError::EvenPointCount(n));
    }
    let h = 2.0 * half_width / (n - 1) as f64;
    Ok(Grid { half_width, n, h })
}

/// A real-valued function sampled on a grid. Carrier for u(t,·), f, φ,
/// eigenfunctions. Values are finite by construction; blow-up detection
/// quarantines non-finite states before they reach this type.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::LengthMismatch {
                got: values.len(),
                expected: grid.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFiniteValue(i));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self, GridError> {
        let values: Vec<f64> = grid.points().map(f).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Interior values (Dirichlet unknowns), excluding both endpoints.
    pub fn interior(&self) -> &[f64] {
        &self.values[1..self.values.len() - 1]
    }

    /// Build from interior values, padding zeros at the Dirichlet ends.
    pub fn from_interior(grid: Grid, interior: &[f64]) -> Result<Self, GridError> {
        if interior.len() != grid.interior_len() {
            return Err(GridError::LengthMismatch {
                got: interior.len(),
                expected: grid.interior_len(),
            });
        }
        let mut values = Vec::with_capacity(grid.len());
        values.push(0.0);
        values.extend_from_slice(interior);
        values.push(0.0);
        Self::new(grid, values)
    }

    /// Pointwise linear combination a*self + b*other.
    pub fn axpy(&self, a: f64, b: f64, other: &GridFunction) -> GridFunction {
        debug_assert_eq!(self.grid, other.grid);
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(u, v)| a * u + b * v)
            .collect();
        GridFunction {
            grid: self.grid,
            values,
        }
    }

    /// Discrete L² inner product h·Σ uᵢvᵢ.
    pub fn inner(&self, other: &GridFunction) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        self.grid.spacing()
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(u, v)| u * v)
                .sum::<f64>()
    }
}

/// Hölder exponent α ∈ (0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderExponent(f64);

impl HolderExponent {
    pub fn new(alpha: f64) -> Result<Self, GridError> {
        if alpha > 0.0 && alpha <= 1.0 {
            Ok(Self(alpha))
        } else {
            Err(GridError::BadHolderExponent(alpha))
        }
    }

    pub fn get(&self) -> f64 {
        self.0
    }
}

impl Default for HolderExponent {
    fn default() -> Self {
        Self(0.5)
    }
}

/// Backward-decay rate a > 0 of the weighted space. By convention a must be
/// smaller than the smallest relevant eigenvalue magnitude when one is given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRate(f64);

impl DecayRate {
    pub fn new(a: f64) -> Result<Self, GridError> {
        if a > 0.0 && a.is_finite() {
            Ok(Self(a))
        } else {
            Err(GridError::BadDecayRate(a))
        }
    }

    /// Enforce the convention a < |reference| against a supplied eigenvalue.
    pub fn checked_against(a: f64, reference_eigenvalue: f64) -> Result<Self, GridError> {
        let r = Self::new(a)?;
        if a >= reference_eigenvalue.abs() {
            return Err(GridError::DecayRateTooLarge {
                rate: a,
                reference: reference_eigenvalue,
            });
        }
        Ok(r)
    }

    pub fn get(&self) -> f64 {
        self.0
    }
}

/// The forcing φ of the equation. The standard profile is
/// φ(x) = (x² − c)·exp(−x²/2); `Zero` turns the forcing off for the
/// degenerate test cases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Forcing {
    Standard { c: f64 },
    Zero,
}

impl Forcing {
    pub fn standard(c: f64) -> Self {
        Forcing::Standard { c }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Forcing::Standard { c } => (x * x - c) * (-x * x / 2.0).exp(),
            Forcing::Zero => 0.0,
        }
    }

    pub fn sample(&self, grid: Grid) -> GridFunction {
        GridFunction {
            grid,
            values: grid.points().map(|x| self.eval(x)).collect(),
        }
    }

    /// The c parameter when present, for labels and manifests.
    pub fn c(&self) -> Option<f64> {
        match self {
            Forcing::Standard { c } => Some(*c),
            Forcing::Zero => None,
        }
    }
}

/// `sample_forcing(grid, c)`: φ(xᵢ) = (xᵢ² − c)·exp(−xᵢ²/2).
pub fn sample_forcing(grid: Grid, c: f64) -> GridFunction {
    Forcing::standard(c).sample(grid)
}

/// Max of |values|.
pub fn sup_norm(u: &GridFunction) -> f64 {
    u.values().iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn sup_norm_slice(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Sup distance between two functions on the same grid.
pub fn sup_distance(u: &GridFunction, v: &GridFunction) -> f64 {
    u.values()
        .iter()
        .zip(v.values())
        .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
}

/// sup_norm + discrete Hölder seminorm sup_{i≠j} |uᵢ−uⱼ|/|xᵢ−xⱼ|^α.
///
/// All pairs are scanned for n ≤ `HOLDER_EXACT_LIMIT`; above that the
/// seminorm maximizes over strided offsets {1, 2, 4, …}, which preserves
/// the maximizer for smooth decaying profiles.
pub fn holder_norm(u: &GridFunction, alpha: HolderExponent) -> f64 {
    sup_norm(u) + holder_seminorm(u, alpha)
}

pub fn holder_seminorm(u: &GridFunction, alpha: HolderExponent) -> f64 {
    let v = u.values();
    let n = v.len();
    let h = u.grid().spacing();
    let a = alpha.get();
    let mut semi: f64 = 0.0;
    if n <= HOLDER_EXACT_LIMIT {
        for offset in 1..n {
            let dist = (h * offset as f64).powf(a);
            let mut worst: f64 = 0.0;
            for i in 0..n - offset {
                worst = worst.max((v[i + offset] - v[i]).abs());
            }
            semi = semi.max(worst / dist);
        }
    } else {
        let mut offset = 1usize;
        while offset < n {
            let dist = (h * offset as f64).powf(a);
            let mut worst: f64 = 0.0;
            for i in 0..n - offset {
                worst = worst.max((v[i + offset] - v[i]).abs());
            }
            semi = semi.max(worst / dist);
            offset *= 2;
        }
        // full-span pair, so widely separated points are still compared
        let dist = (h * (n - 1) as f64).powf(a);
        semi = semi.max((v[n - 1] - v[0]).abs() / dist);
    }
    semi
}

/// Brute-force O(n²) pairwise seminorm; the oracle the optimized path is
/// validated against in tests.
pub fn holder_seminorm_pairwise(u: &GridFunction, alpha: HolderExponent) -> f64 {
    let v = u.values();
    let h = u.grid().spacing();
    let a = alpha.get();
    let mut semi: f64 = 0.0;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            let dist = (h * (j - i) as f64).powf(a);
            semi = semi.max((v[j] - v[i]).abs() / dist);
        }
    }
    semi
}

/// max over frames of e^{−a·t}·holder_norm(u(t)); finite iff the family
/// decays backward at rate ≥ a. Frames are (t, u) pairs with t ≤ 0.
pub fn weighted_decay_norm<'a, I>(frames: I, a: DecayRate, alpha: HolderExponent) -> f64
where
    I: IntoIterator<Item = (f64, &'a GridFunction)>,
{
    frames
        .into_iter()
        .map(|(t, u)| (-a.get() * t).exp() * holder_norm(u, alpha))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_legal_grid() {
        let g = make_grid(1.0, 3).unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(g.spacing(), 1.0);
        let pts: Vec<f64> = g.points().collect();
        assert_eq!(pts, vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn default_grid_midpoint() {
        let g = make_grid(20.0, 801).unwrap();
        assert!((g.spacing() - 0.05).abs() < 1e-15);
        assert_eq!(g.midpoint(), 400);
        assert_eq!(g.x(400), 0.0);
    }

    #[test]
    fn rejects_even_n_and_bad_width() {
        assert_eq!(make_grid(20.0, 800), Err(GridError::EvenPointCount(800)));
        assert_eq!(
            make_grid(-1.0, 801),
            Err(GridError::NonPositiveHalfWidth(-1.0))
        );
        assert_eq!(make_grid(1.0, 1), Err(GridError::TooFewPoints(1)));
    }

    #[test]
    fn forcing_values() {
        let g = make_grid(20.0, 801).unwrap();
        // c=0 at x=0: x²−c vanishes
        let phi = sample_forcing(g, 0.0);
        assert_eq!(phi.values()[g.midpoint()], 0.0);
        // c=−1.2 at x=0: φ(0) = 1.2
        let phi = sample_forcing(g, -1.2);
        assert!((phi.values()[g.midpoint()] - 1.2).abs() < 1e-15);
        // c=0.05 at x=10: effectively zero
        let phi = sample_forcing(g, 0.05);
        let i10 = g.midpoint() + 200;
        assert_eq!(g.x(i10), 10.0);
        let expected = (100.0 - 0.05) * (-50.0f64).exp();
        assert!((phi.values()[i10] - expected).abs() < 1e-25);
        assert!(phi.values()[i10].abs() < 1e-19);
    }

    #[test]
    fn forcing_even_symmetry() {
        let g = make_grid(20.0, 801).unwrap();
        let phi = sample_forcing(g, 0.7);
        let v = phi.values();
        for i in 0..g.len() {
            assert_eq!(v[i], v[g.len() - 1 - i]);
        }
    }

    #[test]
    fn sup_norm_basics() {
        let g = make_grid(1.0, 3).unwrap();
        assert_eq!(sup_norm(&GridFunction::zeros(g)), 0.0);
        let u = GridFunction::from_fn(g, |x| x).unwrap();
        assert_eq!(sup_norm(&u), 1.0);
    }

    #[test]
    fn sup_norm_of_forcing_matches_continuum_max() {
        // max of (x²+1.2)e^{−x²/2} is at x² = 0.8, value 2·e^{−0.4}
        let g = make_grid(20.0, 801).unwrap();
        let phi = sample_forcing(g, -1.2);
        let brute = phi
            .values()
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        assert_eq!(sup_norm(&phi), brute);
        let continuum = 2.0 * (-0.4f64).exp();
        // grid does not hit x=√0.8 exactly; agreement to O(h²)
        assert!((sup_norm(&phi) - continuum).abs() < 1e-3);
    }

    #[test]
    fn holder_norm_constants() {
        let g = make_grid(1.0, 101).unwrap();
        let u = GridFunction::constant(g, 1.0);
        let alpha = HolderExponent::new(0.5).unwrap();
        assert_eq!(holder_norm(&u, alpha), 1.0);
    }

    #[test]
    fn holder_norm_linear_on_unit_interval() {
        // u(x)=x on [0,1]: realized here on [-0.5,0.5] shifted; use the
        // direct construction instead: sup|u| = 1, seminorm sup |Δu|/|Δx|^α
        // attained at the endpoints with value 1 for α = 1/2.
        let g = make_grid(0.5, 201).unwrap();
        let u = GridFunction::from_fn(g, |x| x + 0.5).unwrap();
        let alpha = HolderExponent::new(0.5).unwrap();
        let hn = holder_norm(&u, alpha);
        assert!((hn - 2.0).abs() < 1e-12, "got {hn}");
    }

    #[test]
    fn holder_norm_homogeneous() {
        let g = make_grid(2.0, 51).unwrap();
        let u = GridFunction::from_fn(g, |x| (x * 1.3).sin()).unwrap();
        let u2 = u.axpy(2.0, 0.0, &u);
        let alpha = HolderExponent::default();
        assert!((holder_norm(&u2, alpha) - 2.0 * holder_norm(&u, alpha)).abs() < 1e-12);
    }

    #[test]
    fn holder_subsampled_matches_pairwise_for_smooth_profiles() {
        let g = make_grid(5.0, 401).unwrap();
        let u = GridFunction::from_fn(g, |x| (1.0 + x * x).recip()).unwrap();
        let alpha = HolderExponent::default();
        let exact = holder_seminorm_pairwise(&u, alpha);
        let fast = holder_seminorm(&u, alpha);
        assert!((exact - fast).abs() < 1e-12);
    }

    #[test]
    fn weighted_norm_trivial_cases() {
        let g = make_grid(1.0, 11).unwrap();
        let alpha = HolderExponent::default();
        let a = DecayRate::new(0.3).unwrap();
        let z = GridFunction::zeros(g);
        assert_eq!(weighted_decay_norm([(0.0, &z)], a, alpha), 0.0);
        let u = GridFunction::from_fn(g, |x| x * x).unwrap();
        let single = weighted_decay_norm([(0.0, &u)], a, alpha);
        assert_eq!(single, holder_norm(&u, alpha));
    }

    #[test]
    fn weighted_norm_exponential_mode() {
        // u(t) = e^{bt} v with b > a: weight e^{(b−a)t} ≤ 1 on t ≤ 0,
        // max attained at t = 0.
        let g = make_grid(1.0, 11).unwrap();
        let v = GridFunction::from_fn(g, |x| 1.0 - x * x).unwrap();
        let alpha = HolderExponent::default();
        let a = DecayRate::new(0.2).unwrap();
        let b = 0.9;
        let frames: Vec<(f64, GridFunction)> = (0..=40)
            .map(|k| {
                let t = -0.25 * k as f64;
                (t, v.axpy((b * t).exp(), 0.0, &v))
            })
            .collect();
        let norm = weighted_decay_norm(frames.iter().map(|(t, u)| (*t, u)), a, alpha);
        let expected = holder_norm(&v, alpha);
        assert!((norm - expected).abs() < 1e-12);
    }

    #[test]
    fn decay_rate_convention() {
        assert!(DecayRate::checked_against(0.05, -0.1088).is_ok());
        assert!(DecayRate::checked_against(0.2, -0.1088).is_err());
        assert!(DecayRate::new(-1.0).is_err());
    }

    #[test]
    fn holder_exponent_bounds() {
        assert!(HolderExponent::new(0.0).is_err());
        assert!(HolderExponent::new(1.0).is_ok());
        assert!(HolderExponent::new(1.5).is_err());
    }

    #[test]
    fn rejects_nonfinite_values() {
        let g = make_grid(1.0, 3).unwrap();
        assert_eq!(
            GridFunction::new(g, vec![0.0, f64::NAN, 0.0]),
            Err(GridError::NonFiniteValue(1))
        );
    }
}
