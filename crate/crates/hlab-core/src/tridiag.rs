//! Symmetric tridiagonal matrices: Sturm counts, Thomas solves, and a
//! partially-pivoted LU for near-singular shifted systems (inverse iteration).

/// Symmetric tridiagonal matrix given by its main diagonal and off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len(), "off-diagonal length mismatch");
        Self { diag, off }
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.size();
        debug_assert_eq!(v.len(), n);
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut s = self.diag[i] * v[i];
            if i > 0 {
                s += self.off[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                s += self.off[i] * v[i + 1];
            }
            out[i] = s;
        }
        out
    }

    /// Gershgorin interval containing all eigenvalues.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.size();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence via LDLᵀ
    /// pivots, guarded against zero pivots).
    pub fn count_below(&self, x: f64) -> usize {
        let n = self.size();
        if n == 0 {
            return 0;
        }
        let scale = self
            .diag
            .iter()
            .chain(self.off.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(1.0);
        let guard = scale * 1e-300_f64.max(f64::MIN_POSITIVE);
        let mut count = 0usize;
        let mut q = self.diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..n {
            let q_safe = if q.abs() < guard {
                if q >= 0.0 {
                    guard
                } else {
                    -guard
                }
            } else {
                q
            };
            q = (self.diag[i] - x) - self.off[i - 1] * self.off[i - 1] / q_safe;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }
}

/// Solve (I - s·T)·u = rhs by the Thomas algorithm, where T is symmetric
/// tridiagonal and the system is diagonally dominant. Panics on a zero pivot.
pub fn thomas_solve(diag: &[f64], off: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    debug_assert_eq!(off.len() + 1, n);
    debug_assert_eq!(rhs.len(), n);
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = if n > 1 { off[0] / diag[0] } else { 0.0 };
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - off[i - 1] * c[i - 1];
        if i + 1 < n {
            c[i] = off[i] / m;
        }
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / m;
    }
    let mut u = vec![0.0; n];
    u[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        u[i] = d[i] - c[i] * u[i + 1];
    }
    u
}

/// LU factorization with partial pivoting of (T - shift·I) for a symmetric
/// tridiagonal T. Pivoting introduces a second superdiagonal; this is the
/// standard device for inverse iteration at a near-eigenvalue shift.
pub struct ShiftedLu {
    n: usize,
    lower: Vec<f64>,
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    pub fn factor(t: &SymTridiag, shift: f64) -> Self {
        let n = t.size();
        let mut a = vec![0.0; n]; // sub
        let mut b = vec![0.0; n]; // main
        let mut c = vec![0.0; n]; // super
        for i in 0..n {
            b[i] = t.diag[i] - shift;
            if i > 0 {
                a[i] = t.off[i - 1];
            }
            if i + 1 < n {
                c[i] = t.off[i];
            }
        }
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut lower = vec![0.0; n];
        let mut swapped = vec![false; n];

        let scale = t
            .diag
            .iter()
            .chain(t.off.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(shift.abs())
            .max(1.0);
        let tiny = scale * f64::EPSILON * 1e-3;

        let mut bi = b[0];
        let mut ci = c[0];
        let mut di = 0.0;
        for i in 0..n {
            let (sub, nb, nc) = if i + 1 < n {
                (a[i + 1], b[i + 1], c[i + 1])
            } else {
                (0.0, 0.0, 0.0)
            };
            if sub.abs() > bi.abs() {
                swapped[i] = true;
                u0[i] = sub;
                u1[i] = nb;
                u2[i] = nc;
                let l = bi / sub;
                lower[i] = l;
                bi = ci - l * nb;
                ci = di - l * nc;
                di = 0.0;
            } else {
                swapped[i] = false;
                u0[i] = if bi.abs() < tiny {
                    if bi >= 0.0 {
                        tiny
                    } else {
                        -tiny
                    }
                } else {
                    bi
                };
                u1[i] = ci;
                u2[i] = di;
                if i + 1 < n {
                    let l = sub / u0[i];
                    lower[i] = l;
                    bi = nb - l * ci;
                    ci = nc - l * di;
                    di = 0.0;
                }
            }
        }
        Self {
            n,
            lower,
            u0,
            u1,
            u2,
            swapped,
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n;
        debug_assert_eq!(rhs.len(), n);
        let mut y = rhs.to_vec();
        for i in 0..n - 1 {
            if self.swapped[i] {
                y.swap(i, i + 1);
            }
            let l = self.lower[i];
            y[i + 1] -= l * y[i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            if i + 1 < n {
                s -= self.u1[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= self.u2[i] * x[i + 2];
            }
            x[i] = s / self.u0[i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> SymTridiag {
        SymTridiag::new(vec![2.0; n], vec![-1.0; n - 1])
    }

    #[test]
    fn sturm_count_2x2() {
        // [[1,-1],[-1,3]] has eigenvalues 2±√2
        let t = SymTridiag::new(vec![1.0, 3.0], vec![-1.0]);
        assert_eq!(t.count_below(0.0), 0);
        assert_eq!(t.count_below(1.0), 1);
        assert_eq!(t.count_below(4.0), 2);
    }

    #[test]
    fn sturm_count_matches_closed_form_chain() {
        // d=2, e=-1 chain: eigenvalues 2 - 2cos(kπ/(n+1))
        let n = 40;
        let t = laplacian(n);
        for k in 1..=n {
            let lam = 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos();
            assert_eq!(t.count_below(lam + 1e-9), k);
            assert_eq!(t.count_below(lam - 1e-9), k - 1);
        }
    }

    #[test]
    fn thomas_roundtrip() {
        let n = 50;
        let diag: Vec<f64> = (0..n).map(|i| 3.0 + 0.01 * i as f64).collect();
        let off: Vec<f64> = (0..n - 1).map(|i| -1.0 + 0.002 * i as f64).collect();
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let t = SymTridiag::new(diag.clone(), off.clone());
        let rhs = t.matvec(&x);
        let got = thomas_solve(&diag, &off, &rhs);
        for i in 0..n {
            assert!((got[i] - x[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn shifted_lu_solves_near_singular() {
        let n = 30;
        let t = laplacian(n);
        let lam = 2.0 - 2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
        // shift close to (but off) the eigenvalue: solve stays accurate
        let lu = ShiftedLu::factor(&t, lam + 1e-6);
        let x: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64).cos()).collect();
        let mut rhs = t.matvec(&x);
        for i in 0..n {
            rhs[i] -= (lam + 1e-6) * x[i];
        }
        let got = lu.solve(&rhs);
        for i in 0..n {
            assert!((got[i] - x[i]).abs() < 1e-6, "i={i}: {} vs {}", got[i], x[i]);
        }
    }
}
