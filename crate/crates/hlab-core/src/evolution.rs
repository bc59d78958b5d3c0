//! Time-stepping for u_t = u_xx − u² + φ and its linearization, blow-up
//! detection with bracket refinement, and asymptotic outcome classification.
//!
//! One step is IMEX: Crank–Nicolson for the diffusion (tridiagonal solve)
//! with the reaction evaluated explicitly at the midpoint state, which is
//! itself predicted by a half implicit-Euler step of the full right-hand
//! side. Second order, unconditionally stable in the stiff part, and exact
//! on discrete equilibria up to round-off. Homogeneous Dirichlet ends.

use crate::equilibria::Equilibrium;
use crate::grid::{sup_norm_slice, Forcing, Grid, GridFunction};
use crate::tridiag::thomas_solve;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvolutionError {
    #[error("step overflowed the blow-up threshold")]
    Overflow,
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error("ambiguous convergence: {first} and {second} both within tolerance")]
    AmbiguousConvergence { first: String, second: String },
    #[error("base trajectory does not cover t = {t}")]
    BaseTooShort { t: f64 },
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct StepperConfig {
    pub dt: f64,
    pub t_max: f64,
    pub blowup_threshold: f64,
    pub snapshot_stride: usize,
    pub adaptive: bool,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            t_max: 150.0,
            blowup_threshold: 1e6,
            snapshot_stride: 25,
            adaptive: true,
        }
    }
}

/// Convergence classification thresholds: dwell duration inside the sup-norm
/// tolerance before an orbit is declared converged.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ClassifyParams {
    pub tol_conv: f64,
    pub t_dwell: f64,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        Self {
            tol_conv: 1e-4,
            t_dwell: 5.0,
        }
    }
}

/// Time-stamped frames of one run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub frames: Vec<GridFunction>,
    pub forcing: Forcing,
    pub config: StepperConfig,
}

impl Trajectory {
    pub fn grid(&self) -> Grid {
        self.frames[0].grid()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &GridFunction)> {
        self.times.iter().copied().zip(self.frames.iter())
    }

    pub fn last(&self) -> (f64, &GridFunction) {
        (
            *self.times.last().expect("nonempty"),
            self.frames.last().expect("nonempty"),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Outcome {
    Converged {
        equilibrium_label: String,
        t_enter: f64,
    },
    BlowUp {
        t_star_bracket: (f64, f64),
    },
    Undetermined {
        t_max: f64,
    },
}

impl Outcome {
    pub fn is_converged(&self) -> bool {
        matches!(self, Outcome::Converged { .. })
    }

    pub fn is_blowup(&self) -> bool {
        matches!(self, Outcome::BlowUp { .. })
    }
}

/// Cached Crank–Nicolson factor for a fixed (grid, dt).
struct CnSolver {
    diag: Vec<f64>,
    off: Vec<f64>,
    h2: f64,
}

impl CnSolver {
    fn new(grid: Grid, dt: f64) -> Self {
        let h2 = grid.spacing() * grid.spacing();
        let m = grid.interior_len();
        let a = dt / (2.0 * h2);
        Self {
            diag: vec![1.0 + 2.0 * a; m],
            off: vec![-a; m - 1],
            h2,
        }
    }

    /// Dirichlet Laplacian applied to interior values.
    fn laplacian(&self, u: &[f64]) -> Vec<f64> {
        let m = u.len();
        let mut out = vec![0.0; m];
        out[0] = (-2.0 * u[0] + u[1]) / self.h2;
        for i in 1..m - 1 {
            out[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) / self.h2;
        }
        out[m - 1] = (u[m - 2] - 2.0 * u[m - 1]) / self.h2;
        out
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        thomas_solve(&self.diag, &self.off, rhs)
    }
}

/// One IMEX step on interior values. Returns Err on non-finite output.
fn step_interior(
    u: &[f64],
    phi: &[f64],
    cn: &CnSolver,
    dt: f64,
) -> Result<Vec<f64>, EvolutionError> {
    let m = u.len();
    // predictor: (I − dt/2·T) u_half = u + dt/2·r(u)
    let mut rhs = Vec::with_capacity(m);
    for i in 0..m {
        rhs.push(u[i] + 0.5 * dt * (-u[i] * u[i] + phi[i]));
    }
    let u_half = cn.solve(&rhs);
    // corrector: (I − dt/2·T) u_new = u + dt/2·T u + dt·r(u_half)
    let lap = cn.laplacian(u);
    let mut rhs2 = Vec::with_capacity(m);
    for i in 0..m {
        rhs2.push(u[i] + 0.5 * dt * lap[i] + dt * (-u_half[i] * u_half[i] + phi[i]));
    }
    let u_new = cn.solve(&rhs2);
    if u_new.iter().any(|v| !v.is_finite()) {
        return Err(EvolutionError::Overflow);
    }
    Ok(u_new)
}

fn phi_interior(grid: Grid, forcing: Forcing) -> Vec<f64> {
    (1..grid.len() - 1).map(|i| forcing.eval(grid.x(i))).collect()
}

/// One IMEX step of the nonlinear equation. Dirichlet ends.
pub fn step(u: &GridFunction, dt: f64, forcing: Forcing) -> Result<GridFunction, EvolutionError> {
    let grid = u.grid();
    let cn = CnSolver::new(grid, dt);
    let phi = phi_interior(grid, forcing);
    let next = step_interior(u.interior(), &phi, &cn, dt)?;
    GridFunction::from_interior(grid, &next).map_err(|_| EvolutionError::Overflow)
}

/// Forward evolution until blow-up, convergence dwell (when `targets` is
/// nonempty), or t_max. Near blow-up, dt halves whenever the sup-norm more
/// than doubles in one step, so the final bracket is as tight as the step.
pub fn evolve_classified(
    u0: &GridFunction,
    cfg: &StepperConfig,
    forcing: Forcing,
    targets: &[Equilibrium],
    classify_params: &ClassifyParams,
) -> (Trajectory, Outcome) {
    let grid = u0.grid();
    let phi = phi_interior(grid, forcing);
    let base_cn = CnSolver::new(grid, cfg.dt);

    let mut times = vec![0.0];
    let mut frames = vec![u0.clone()];
    let mut u = u0.interior().to_vec();
    let mut t = 0.0;
    let mut dt = cfg.dt;
    let mut cn_current: Option<CnSolver> = None; // reduced-dt solver when adaptive
    let mut step_index = 0usize;
    let mut dwell: Option<(usize, f64)> = None; // (target index, entered at)
    let dt_floor = cfg.dt * 1e-9;
    let growth_activation = 100.0;

    let push_frame = |times: &mut Vec<f64>, frames: &mut Vec<GridFunction>, t: f64, u: &[f64]| {
        times.push(t);
        frames.push(GridFunction::from_interior(grid, u).expect("finite interior"));
    };

    while t < cfg.t_max {
        let solver = cn_current.as_ref().unwrap_or(&base_cn);
        let attempted = step_interior(&u, &phi, solver, dt);
        let sup_now = sup_norm_slice(&u);
        let accept = match &attempted {
            Err(_) => false,
            Ok(next) => {
                let sup_next = sup_norm_slice(next);
                if sup_next > cfg.blowup_threshold {
                    false
                } else if cfg.adaptive
                    && sup_next > 2.0 * sup_now
                    && sup_next > growth_activation
                {
                    false
                } else {
                    true
                }
            }
        };
        if !accept {
            if !cfg.adaptive || dt <= dt_floor {
                // blow-up bracket: last finite time to the failed step's end
                push_frame(&mut times, &mut frames, t, &u);
                return (
                    Trajectory {
                        times,
                        frames,
                        forcing,
                        config: *cfg,
                    },
                    Outcome::BlowUp {
                        t_star_bracket: (t, t + dt),
                    },
                );
            }
            dt *= 0.5;
            cn_current = Some(CnSolver::new(grid, dt));
            continue;
        }
        u = attempted.expect("accepted");
        t += dt;
        step_index += 1;
        if step_index % cfg.snapshot_stride == 0 {
            push_frame(&mut times, &mut frames, t, &u);
        }

        if !targets.is_empty() {
            let mut hit: Option<usize> = None;
            for (k, eq) in targets.iter().enumerate() {
                let d = u
                    .iter()
                    .zip(eq.profile.interior())
                    .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                if d <= classify_params.tol_conv {
                    hit = Some(k);
                    break;
                }
            }
            match (hit, dwell) {
                (Some(k), Some((k0, entered))) if k == k0 => {
                    if t - entered >= classify_params.t_dwell {
                        if *times.last().unwrap() < t {
                            push_frame(&mut times, &mut frames, t, &u);
                        }
                        return (
                            Trajectory {
                                times,
                                frames,
                                forcing,
                                config: *cfg,
                            },
                            Outcome::Converged {
                                equilibrium_label: targets[k].label.clone(),
                                t_enter: entered,
                            },
                        );
                    }
                }
                (Some(k), _) => dwell = Some((k, t)),
                (None, _) => dwell = None,
            }
        }
    }
    if *times.last().unwrap() < t {
        push_frame(&mut times, &mut frames, t, &u);
    }
    (
        Trajectory {
            times,
            frames,
            forcing,
            config: *cfg,
        },
        Outcome::Undetermined { t_max: cfg.t_max },
    )
}

/// Forward evolution without convergence targets: terminal states are
/// blow-up or the horizon.
pub fn evolve(u0: &GridFunction, cfg: &StepperConfig, forcing: Forcing) -> (Trajectory, Outcome) {
    evolve_classified(u0, cfg, forcing, &[], &ClassifyParams::default())
}

/// Post-hoc classification of a recorded trajectory against a set of
/// equilibria: converged when frames stay within tol for a dwell window.
pub fn classify(
    traj: &Trajectory,
    equilibria: &[Equilibrium],
    params: &ClassifyParams,
) -> Result<Outcome, EvolutionError> {
    if traj.is_empty() {
        return Err(EvolutionError::EmptyTrajectory);
    }
    let mut dwell: Option<(usize, f64)> = None;
    for (t, frame) in traj.iter() {
        let mut hits = Vec::new();
        for (k, eq) in equilibria.iter().enumerate() {
            let d = frame
                .values()
                .iter()
                .zip(eq.profile.values())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            if d <= params.tol_conv {
                hits.push(k);
            }
        }
        if hits.len() > 1 {
            return Err(EvolutionError::AmbiguousConvergence {
                first: equilibria[hits[0]].label.clone(),
                second: equilibria[hits[1]].label.clone(),
            });
        }
        match (hits.first().copied(), dwell) {
            (Some(k), Some((k0, entered))) if k == k0 => {
                if t - entered >= params.t_dwell {
                    return Ok(Outcome::Converged {
                        equilibrium_label: equilibria[k].label.clone(),
                        t_enter: entered,
                    });
                }
            }
            (Some(k), _) => dwell = Some((k, t)),
            (None, _) => dwell = None,
        }
    }
    Ok(Outcome::Undetermined {
        t_max: traj.last().0,
    })
}

/// Linearized evolution v_t = v_xx − 2u(t)·v along a base trajectory, with
/// the base interpolated linearly between frames and the linear reaction
/// frozen at the step midpoint inside the Crank–Nicolson solve. Overflow of
/// a growing mode ends the run and is reported, not an error.
pub fn evolve_linearized(
    v0: &GridFunction,
    base: &Trajectory,
    cfg: &StepperConfig,
) -> (Trajectory, Option<f64>) {
    let grid = v0.grid();
    let h2 = grid.spacing() * grid.spacing();
    let m = grid.interior_len();
    let a = cfg.dt / (2.0 * h2);
    let guard = 1e120;

    let base_at = |t: f64, out: &mut Vec<f64>| {
        let times = &base.times;
        let clamped = t.clamp(times[0], *times.last().unwrap());
        let k = match times.binary_search_by(|x| x.partial_cmp(&clamped).unwrap()) {
            Ok(i) => i.min(times.len() - 2),
            Err(i) => i.saturating_sub(1).min(times.len() - 2),
        };
        let (t0, t1) = (times[k], times[k + 1]);
        let w = if t1 > t0 { (clamped - t0) / (t1 - t0) } else { 0.0 };
        let f0 = base.frames[k].interior();
        let f1 = base.frames[k + 1].interior();
        out.clear();
        for i in 0..m {
            out.push((1.0 - w) * f0[i] + w * f1[i]);
        }
    };

    let mut v = v0.interior().to_vec();
    let mut times = vec![0.0];
    let mut frames = vec![v0.clone()];
    let mut t = 0.0;
    let mut umid = Vec::with_capacity(m);
    let t_end = cfg.t_max.min(base.last().0);
    let mut step_index = 0usize;

    while t + 0.5 * cfg.dt <= t_end {
        base_at(t + 0.5 * cfg.dt, &mut umid);
        // (I − dt/2(T − 2U)) v⁺ = (I + dt/2(T − 2U)) v
        let mut diag_i = Vec::with_capacity(m);
        for i in 0..m {
            diag_i.push(1.0 + 2.0 * a + cfg.dt * umid[i]);
        }
        let off = vec![-a; m - 1];
        let mut rhs = Vec::with_capacity(m);
        for i in 0..m {
            let lap = if i == 0 {
                -2.0 * v[0] + v[1]
            } else if i == m - 1 {
                v[m - 2] - 2.0 * v[m - 1]
            } else {
                v[i - 1] - 2.0 * v[i] + v[i + 1]
            } / h2;
            rhs.push(v[i] + 0.5 * cfg.dt * (lap - 2.0 * umid[i] * v[i]));
        }
        let v_new = thomas_solve(&diag_i, &off, &rhs);
        if v_new.iter().any(|x| !x.is_finite()) || sup_norm_slice(&v_new) > guard {
            return (
                Trajectory {
                    times,
                    frames,
                    forcing: base.forcing,
                    config: *cfg,
                },
                Some(t),
            );
        }
        v = v_new;
        t += cfg.dt;
        step_index += 1;
        if step_index % cfg.snapshot_stride == 0 {
            times.push(t);
            frames.push(GridFunction::from_interior(grid, &v).expect("finite"));
        }
    }
    if *times.last().unwrap() < t {
        times.push(t);
        frames.push(GridFunction::from_interior(grid, &v).expect("finite"));
    }
    (
        Trajectory {
            times,
            frames,
            forcing: base.forcing,
            config: *cfg,
        },
        None,
    )
}

/// Least-squares slope of log‖u(t) − ref‖∞ over frames whose amplitude lies
/// inside `window`. Returns (rate, rms residual of the fit, points used).
pub fn fit_log_rate(
    traj: &Trajectory,
    reference: &GridFunction,
    window: (f64, f64),
) -> Option<(f64, f64, usize)> {
    let mut ts = Vec::new();
    let mut ys = Vec::new();
    for (t, frame) in traj.iter() {
        let amp = frame
            .values()
            .iter()
            .zip(reference.values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if amp >= window.0 && amp <= window.1 {
            ts.push(t);
            ys.push(amp.ln());
        }
    }
    if ts.len() < 3 {
        return None;
    }
    let n = ts.len() as f64;
    let tm = ts.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let sxx: f64 = ts.iter().map(|t| (t - tm) * (t - tm)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = ts.iter().zip(&ys).map(|(t, y)| (t - tm) * (y - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * tm;
    let rss: f64 = ts
        .iter()
        .zip(&ys)
        .map(|(t, y)| {
            let e = y - (intercept + slope * t);
            e * e
        })
        .sum();
    Some((slope, (rss / n).sqrt(), ts.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::{solve_equilibrium, ShootState, SolverParams};
    use crate::grid::{make_grid, sup_distance, sup_norm};

    #[test]
    fn zero_is_fixed_with_zero_forcing() {
        let g = make_grid(10.0, 201).unwrap();
        let u = GridFunction::zeros(g);
        let next = step(&u, 0.01, Forcing::Zero).unwrap();
        assert_eq!(sup_norm(&next), 0.0);
    }

    #[test]
    fn constant_interior_follows_riccati() {
        // u′ = −u² pointwise away from the boundary layer
        let g = make_grid(20.0, 801).unwrap();
        let u = GridFunction::constant(g, 1.0);
        let dt = 0.01;
        let next = step(&u, dt, Forcing::Zero).unwrap();
        let mid = g.midpoint();
        let expected = 1.0 / (1.0 + dt);
        assert!(
            (next.values()[mid] - expected).abs() < 1e-6 * dt,
            "{} vs {}",
            next.values()[mid],
            expected
        );
    }

    #[test]
    fn equilibrium_is_discrete_fixed_point() {
        let g = make_grid(20.0, 801).unwrap();
        let params = SolverParams::default();
        let eq = solve_equilibrium(
            &ShootState {
                f0: 1.0,
                fp0: 0.0,
                c: -1.2,
            },
            g,
            Forcing::standard(-1.2),
            &params,
        )
        .unwrap();
        let dt = 0.01;
        let mut u = eq.profile.clone();
        for _ in 0..1000 {
            u = step(&u, dt, Forcing::standard(-1.2)).unwrap();
        }
        let drift = sup_distance(&u, &eq.profile);
        assert!(
            drift <= 1000.0 * params.tol_eq * dt * 10.0 + 1e-10,
            "drift {drift}"
        );
    }

    #[test]
    fn riccati_blowup_bracket_contains_one() {
        let g = make_grid(20.0, 801).unwrap();
        let u0 = GridFunction::constant(g, -1.0);
        let cfg = StepperConfig {
            t_max: 3.0,
            ..Default::default()
        };
        let (_, out) = evolve(&u0, &cfg, Forcing::Zero);
        match out {
            Outcome::BlowUp { t_star_bracket: (lo, hi) } => {
                assert!(hi - lo <= cfg.dt + 1e-12);
                let mid = 0.5 * (lo + hi);
                assert!((mid - 1.0).abs() <= 0.02, "bracket ({lo}, {hi})");
            }
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn positive_constant_decays() {
        let g = make_grid(20.0, 801).unwrap();
        let u0 = GridFunction::constant(g, 1.0);
        let cfg = StepperConfig {
            t_max: 30.0,
            ..Default::default()
        };
        let (traj, out) = evolve(&u0, &cfg, Forcing::Zero);
        assert!(matches!(out, Outcome::Undetermined { .. }));
        // u → 0 like 1/t
        let (_, last) = traj.last();
        assert!(sup_norm(last) < 0.05);
    }

    #[test]
    fn temporal_order_at_least_1_8() {
        // smooth short run, Richardson triple
        let g = make_grid(10.0, 201).unwrap();
        let u0 = GridFunction::from_fn(g, |x| 0.5 * (-x * x / 4.0).exp()).unwrap();
        let forcing = Forcing::standard(-0.5);
        let t_end = 0.5;
        let run = |dt: f64| {
            let mut u = u0.clone();
            let steps = (t_end / dt).round() as usize;
            for _ in 0..steps {
                u = step(&u, dt, forcing).unwrap();
            }
            u
        };
        let a = run(0.02);
        let b = run(0.01);
        let c = run(0.005);
        let e1 = sup_distance(&a, &b);
        let e2 = sup_distance(&b, &c);
        let order = (e1 / e2).log2();
        assert!(order >= 1.8, "observed order {order} (e1={e1}, e2={e2})");
    }

    #[test]
    fn riccati_bound_dominates_smaller_data() {
        // maximum-principle consequence: |u0| ≤ |const| pointwise keeps the
        // solution below the constant Riccati solution before its blow-up
        let g = make_grid(20.0, 801).unwrap();
        let u0 = GridFunction::from_fn(g, |x| -0.8 * (-x * x / 16.0).exp()).unwrap();
        let dt = 0.01;
        let mut u = u0;
        let mut t = 0.0;
        while t < 0.9 {
            u = step(&u, dt, Forcing::Zero).unwrap();
            t += dt;
            let bound = 1.0 / (1.0 - t); // |const| = 1 Riccati envelope
            assert!(sup_norm(&u) <= bound + 1e-6);
        }
    }

    #[test]
    fn classify_converged_immediately_on_equilibrium_frames() {
        let g = make_grid(20.0, 801).unwrap();
        let eq = solve_equilibrium(
            &ShootState {
                f0: 1.0,
                fp0: 0.0,
                c: -1.2,
            },
            g,
            Forcing::standard(-1.2),
            &SolverParams::default(),
        )
        .unwrap();
        let cfg = StepperConfig::default();
        let times: Vec<f64> = (0..=30).map(|k| 0.5 * k as f64).collect();
        let frames = vec![eq.profile.clone(); times.len()];
        let traj = Trajectory {
            times,
            frames,
            forcing: Forcing::standard(-1.2),
            config: cfg,
        };
        let out = classify(&traj, std::slice::from_ref(&eq), &ClassifyParams::default()).unwrap();
        match out {
            Outcome::Converged { t_enter, .. } => assert_eq!(t_enter, 0.0),
            other => panic!("expected converged, got {other:?}"),
        }
    }

    #[test]
    fn linearized_zero_stays_zero() {
        let g = make_grid(10.0, 201).unwrap();
        let cfg = StepperConfig {
            t_max: 1.0,
            ..Default::default()
        };
        let base = Trajectory {
            times: vec![0.0, 1.0],
            frames: vec![GridFunction::zeros(g), GridFunction::zeros(g)],
            forcing: Forcing::Zero,
            config: cfg,
        };
        let (traj, overflow) = evolve_linearized(&GridFunction::zeros(g), &base, &cfg);
        assert!(overflow.is_none());
        assert_eq!(sup_norm(traj.frames.last().unwrap()), 0.0);
    }
}
