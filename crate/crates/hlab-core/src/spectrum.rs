//! Discretization of the Schrödinger operator H = ∂²/∂x² − 2f as a symmetric
//! tridiagonal matrix on the interior grid points (Dirichlet closure), with
//! Sturm-bisection eigenvalues and inverse-iteration eigenfunctions.
//!
//! The count of positive eigenvalues is the unstable-manifold dimension of
//! the equilibrium f. Eigenvalues embedded in (−∞, 0] approximate the
//! essential spectrum of the continuum operator and are reported but not
//! interpreted; only λ > 0 (and the smallest-magnitude eigenvalue, for decay
//! rates) carry meaning.

use crate::grid::{Grid, GridFunction};
use crate::tridiag::{ShiftedLu, SymTridiag};
use serde::Serialize;
use thiserror::Error;

pub const DEFAULT_TOL_BISECT: f64 = 1e-10;
pub const DEFAULT_TOL_EIG: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("eigenvalue {lambda} is not isolated: {count} eigenvalues within ±{window:.3e}")]
    NotIsolated {
        lambda: f64,
        window: f64,
        count: usize,
    },
    #[error("inverse iteration did not reach residual {tol:.3e} (got {respect:.3e})")]
    NoConvergence { tol: f64, respect: f64 },
}

/// H = ∂²/∂x² − 2f discretized on interior points: diagonal −2/h² − 2f(xᵢ),
/// off-diagonal 1/h².
#[derive(Debug, Clone)]
pub struct SchroedingerMatrix {
    grid: Grid,
    tri: SymTridiag,
    potential_source: String,
}

impl SchroedingerMatrix {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn size(&self) -> usize {
        self.tri.size()
    }

    pub fn tridiag(&self) -> &SymTridiag {
        &self.tri
    }

    pub fn potential_source(&self) -> &str {
        &self.potential_source
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.potential_source = source.into();
        self
    }

    /// Apply H to interior values.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.tri.matvec(v)
    }

    /// Apply H to a full grid function (Dirichlet ends stay zero).
    pub fn apply_grid(&self, u: &GridFunction) -> GridFunction {
        let interior = self.tri.matvec(u.interior());
        GridFunction::from_interior(self.grid, &interior).expect("size preserved")
    }
}

/// Assemble the centered second-difference H with Dirichlet closure.
pub fn assemble_h(f: &GridFunction) -> SchroedingerMatrix {
    let grid = f.grid();
    let h2 = grid.spacing() * grid.spacing();
    let m = grid.interior_len();
    let mut diag = Vec::with_capacity(m);
    for i in 0..m {
        diag.push(-2.0 / h2 - 2.0 * f.values()[i + 1]);
    }
    let off = vec![1.0 / h2; m - 1];
    SchroedingerMatrix {
        grid,
        tri: SymTridiag::new(diag, off),
        potential_source: String::from("anonymous"),
    }
}

/// Eigenvalues and optional eigenfunctions of a discretized H.
#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    /// Sorted descending.
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub eigenfunctions: Option<Vec<GridFunction>>,
    pub positive_count: usize,
}

/// All eigenvalues strictly above `cutoff`, sorted descending, found by
/// Sturm-sequence counting plus bisection to absolute tolerance `tol`.
/// The returned length equals the Sturm count at the cutoff.
pub fn eigenvalues_above_with_tol(m: &SchroedingerMatrix, cutoff: f64, tol: f64) -> Vec<f64> {
    eigenvalues_above_tri(&m.tri, cutoff, tol)
}

pub fn eigenvalues_above(m: &SchroedingerMatrix, cutoff: f64) -> Vec<f64> {
    eigenvalues_above_with_tol(m, cutoff, DEFAULT_TOL_BISECT)
}

pub(crate) fn eigenvalues_above_tri(tri: &SymTridiag, cutoff: f64, tol: f64) -> Vec<f64> {
    let size = tri.size();
    let below = tri.count_below(cutoff);
    let count = size - below;
    if count == 0 {
        return Vec::new();
    }
    let (glo, ghi) = tri.gershgorin();
    let indices: Vec<usize> = (below..size).collect();
    let eigs = crate::parallel::map(&indices, |&j| {
        bisect_index(tri, j, cutoff.max(glo) - tol, ghi + tol, tol)
    });
    let mut out = eigs;
    out.reverse(); // ascending index order -> descending value order
    out
}

/// k-th eigenvalue in ascending order (0-based) via Sturm bisection.
fn bisect_index(tri: &SymTridiag, k: usize, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if tri.count_below(mid) <= k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Distance from `lambda` to the nearest other eigenvalue, measured by
/// expanding Sturm windows. Returns the window half-width at which a second
/// eigenvalue appears.
pub fn isolation_distance(m: &SchroedingerMatrix, lambda: f64, tol_bisect: f64) -> f64 {
    let tri = &m.tri;
    let (glo, ghi) = tri.gershgorin();
    let span = ghi - glo;
    let mut w = (tol_bisect * 4.0).max(span * 1e-15);
    while w < span {
        let inside = tri.count_below(lambda + w) - tri.count_below(lambda - w);
        if inside >= 2 {
            return w;
        }
        w *= 2.0;
    }
    span
}

#[derive(Debug, Clone, Copy)]
pub struct EigenfunctionParams {
    pub tol_eig: f64,
    pub tol_bisect: f64,
    pub max_iterations: usize,
}

impl Default for EigenfunctionParams {
    fn default() -> Self {
        Self {
            tol_eig: DEFAULT_TOL_EIG,
            tol_bisect: DEFAULT_TOL_BISECT,
            max_iterations: 60,
        }
    }
}

/// Inverse iteration at shift `lambda`. Sup-normalized, sign fixed so the
/// entry of largest magnitude is positive. Errors with `NotIsolated` when a
/// second eigenvalue sits inside half the nearest-neighbor distance.
pub fn eigenfunction_with(
    m: &SchroedingerMatrix,
    lambda: f64,
    params: EigenfunctionParams,
) -> Result<GridFunction, SpectrumError> {
    let interior = eigenvector_interior(m, lambda, params)?;
    Ok(GridFunction::from_interior(m.grid, &interior).expect("interior length"))
}

pub fn eigenfunction(m: &SchroedingerMatrix, lambda: f64) -> Result<GridFunction, SpectrumError> {
    eigenfunction_with(m, lambda, EigenfunctionParams::default())
}

pub(crate) fn eigenvector_interior(
    m: &SchroedingerMatrix,
    lambda: f64,
    params: EigenfunctionParams,
) -> Result<Vec<f64>, SpectrumError> {
    let tri = &m.tri;
    let size = tri.size();
    let gap = isolation_distance(m, lambda, params.tol_bisect);
    let window = 0.5 * gap;
    let degenerate_floor = 64.0 * params.tol_bisect;
    if gap <= degenerate_floor {
        let inside =
            tri.count_below(lambda + window.max(degenerate_floor)) - tri.count_below(lambda - window.max(degenerate_floor));
        return Err(SpectrumError::NotIsolated {
            lambda,
            window: window.max(degenerate_floor),
            count: inside.max(2),
        });
    }

    let lu = ShiftedLu::factor(tri, lambda);
    // deterministic start vector, incommensurate with grid symmetries
    let mut v: Vec<f64> = (0..size)
        .map(|i| 1.0 + 0.5 * ((i as f64) * 2.399_963).sin())
        .collect();
    normalize_sup(&mut v);
    let mut res = f64::INFINITY;
    for _ in 0..params.max_iterations {
        let mut w = lu.solve(&v);
        normalize_sup(&mut w);
        v = w;
        let hv = tri.matvec(&v);
        res = hv
            .iter()
            .zip(&v)
            .fold(0.0f64, |acc, (hvi, vi)| acc.max((hvi - lambda * vi).abs()));
        if res <= params.tol_eig {
            break;
        }
    }
    if res > params.tol_eig {
        return Err(SpectrumError::NoConvergence {
            tol: params.tol_eig,
            respect: res,
        });
    }
    fix_sign(&mut v);
    Ok(v)
}

fn normalize_sup(v: &mut [f64]) {
    let m = v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if m > 0.0 {
        for x in v.iter_mut() {
            *x /= m;
        }
    }
}

fn fix_sign(v: &mut [f64]) {
    let mut idx = 0;
    let mut best = 0.0f64;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > best {
            best = x.abs();
            idx = i;
        }
    }
    if v[idx] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Positive eigenspace: dimension and sup-normalized eigenfunction basis.
#[derive(Debug, Clone)]
pub struct UnstableSubspace {
    pub dimension: usize,
    /// λ-descending order; e₁ of the two-dimensional case is `basis.last()`.
    pub eigenvalues: Vec<f64>,
    pub basis: Vec<GridFunction>,
}

pub fn unstable_subspace(f: &GridFunction) -> Result<UnstableSubspace, SpectrumError> {
    unstable_subspace_with(f, EigenfunctionParams::default())
}

pub fn unstable_subspace_with(
    f: &GridFunction,
    params: EigenfunctionParams,
) -> Result<UnstableSubspace, SpectrumError> {
    let m = assemble_h(f);
    let eigenvalues = eigenvalues_above_with_tol(&m, 0.0, params.tol_bisect);
    let mut basis = Vec::with_capacity(eigenvalues.len());
    for &lam in &eigenvalues {
        basis.push(eigenfunction_with(&m, lam, params)?);
    }
    Ok(UnstableSubspace {
        dimension: eigenvalues.len(),
        eigenvalues,
        basis,
    })
}

/// Positive-eigenvalue count alone, without eigenfunctions.
pub fn positive_count(f: &GridFunction) -> usize {
    let m = assemble_h(f);
    let size = m.size();
    size - m.tri.count_below(0.0)
}

/// Spectrum of the top `k` eigenvalues plus everything positive.
pub fn top_spectrum(f: &GridFunction, k: usize, tol_bisect: f64) -> Spectrum {
    let m = assemble_h(f);
    let size = m.size();
    let pos = size - m.tri.count_below(0.0);
    let want = k.max(pos).min(size);
    let (glo, ghi) = m.tri.gershgorin();
    let indices: Vec<usize> = (size - want..size).collect();
    let mut eigenvalues = crate::parallel::map(&indices, |&j| {
        bisect_index(&m.tri, j, glo - tol_bisect, ghi + tol_bisect, tol_bisect)
    });
    eigenvalues.reverse();
    Spectrum {
        eigenvalues,
        eigenfunctions: None,
        positive_count: pos,
    }
}

/// Full eigendecomposition: all eigenvalues (descending) with
/// Euclidean-orthonormal eigenvectors on the interior points.
#[derive(Debug, Clone)]
pub struct Eigendecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
}

pub fn full_decomposition(
    m: &SchroedingerMatrix,
    params: EigenfunctionParams,
) -> Result<Eigendecomposition, SpectrumError> {
    let tri = &m.tri;
    let size = tri.size();
    let (glo, ghi) = tri.gershgorin();
    let indices: Vec<usize> = (0..size).collect();
    let mut eigenvalues = crate::parallel::map(&indices, |&j| {
        bisect_index(tri, j, glo - params.tol_bisect, ghi + params.tol_bisect, params.tol_bisect)
    });
    eigenvalues.reverse();

    let eigenvalues_ref = &eigenvalues;
    let mut eigenvectors = crate::parallel::try_map(&indices, |&j| {
        let lam = eigenvalues_ref[j];
        let lu = ShiftedLu::factor(tri, lam);
        let mut v: Vec<f64> = (0..size)
            .map(|i| 1.0 + 0.5 * ((i as f64 + j as f64) * 2.399_963).sin())
            .collect();
        normalize_sup(&mut v);
        for _ in 0..params.max_iterations {
            let mut w = lu.solve(&v);
            normalize_sup(&mut w);
            v = w;
            let hv = tri.matvec(&v);
            let res = hv
                .iter()
                .zip(&v)
                .fold(0.0f64, |acc, (hvi, vi)| acc.max((hvi - lam * vi).abs()));
            if res <= params.tol_eig {
                break;
            }
        }
        Ok::<Vec<f64>, SpectrumError>(v)
    })?;

    // orthonormalize within near-degenerate clusters, then scale to unit 2-norm
    let scale = eigenvalues[0].abs().max(eigenvalues[size - 1].abs()).max(1.0);
    let cluster_tol = scale * 1e-9;
    let mut start = 0;
    while start < size {
        let mut end = start + 1;
        while end < size && (eigenvalues[end - 1] - eigenvalues[end]).abs() <= cluster_tol {
            end += 1;
        }
        for j in start..end {
            for k in start..j {
                let (head, tail) = eigenvectors.split_at_mut(j);
                let prev = &head[k];
                let dot: f64 = prev.iter().zip(tail[0].iter()).map(|(a, b)| a * b).sum();
                let nrm: f64 = prev.iter().map(|a| a * a).sum();
                if nrm > 0.0 {
                    let coef = dot / nrm;
                    for (t, p) in tail[0].iter_mut().zip(prev.iter()) {
                        *t -= coef * p;
                    }
                }
            }
        }
        start = end;
    }
    for v in eigenvectors.iter_mut() {
        let nrm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if nrm > 0.0 {
            for x in v.iter_mut() {
                *x /= nrm;
            }
        }
    }
    Ok(Eigendecomposition {
        eigenvalues,
        eigenvectors,
    })
}
