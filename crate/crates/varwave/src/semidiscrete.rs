//! Method-of-lines right-hand side and fixed-step time integration.
//!
//! The spatial operator is upwind in each family:
//!
//!   dR_j = c_{j+1/2} D₊R_j + tc_j (R_j² − S_j²)
//!   dS_j = −c_{j−1/2} D₋S_j − tc_j (R_j² − S_j²)
//!
//! with ghost zeros outside the grid. Coefficients are rebuilt from the
//! current state at every evaluation, so the operator is a pure function of
//! the state.

use crate::coefficients::{CoefficientField, Strategy};
use crate::diagnostics::{
    dissipation, higher_integrability_increment, make_record, DiagnosticsConfig, DiagnosticsRecord,
};
use crate::error::{Error, Result};
use crate::grid::{Grid, StateRS};
use crate::par;
use crate::wavespeed::WaveSpeedModel;

/// One right-hand-side evaluation, with the coefficient field retained for
/// diagnostics.
#[derive(Clone, Debug)]
pub struct RhsEval {
    pub dr: Vec<f64>,
    pub ds: Vec<f64>,
    pub coeffs: CoefficientField,
}

/// The per-cell upwind arithmetic, shared verbatim with the fully-discrete
/// stepper so one Euler step and one explicit step are bit-identical.
pub(crate) fn rs_kernel(
    r: &[f64],
    s: &[f64],
    c_half: &[f64],
    tc: &[f64],
    dx: f64,
    parallel: bool,
) -> (Vec<f64>, Vec<f64>) {
    let n = r.len();
    let cell = |j: usize| {
        let r_next = if j + 1 < n { r[j + 1] } else { 0.0 };
        let s_prev = if j > 0 { s[j - 1] } else { 0.0 };
        let source = tc[j] * (r[j] * r[j] - s[j] * s[j]);
        let dr = c_half[j + 1] * (r_next - r[j]) / dx + source;
        let ds = -c_half[j] * (s[j] - s_prev) / dx - source;
        (dr, ds)
    };
    let pairs: Vec<(f64, f64)> = if parallel {
        par::map_range(n, cell)
    } else {
        par::map_range_seq(n, cell)
    };
    pairs.into_iter().unzip()
}

/// Evaluate the semi-discrete right-hand side at `state`.
pub fn rhs(
    state: &StateRS,
    grid: &Grid,
    model: &WaveSpeedModel,
    strategy: Strategy,
) -> Result<RhsEval> {
    rhs_impl(state, grid, model, strategy, 0.0, true)
}

/// Sequential reference path for [`rhs`]; identical output, benchmarked
/// against the parallel path.
pub fn rhs_seq(
    state: &StateRS,
    grid: &Grid,
    model: &WaveSpeedModel,
    strategy: Strategy,
) -> Result<RhsEval> {
    rhs_impl(state, grid, model, strategy, 0.0, false)
}

/// [`rhs`] with a nonzero left-boundary u value (needed when u₀ does not
/// decay at the left edge of the domain).
pub fn rhs_with_left(
    state: &StateRS,
    grid: &Grid,
    model: &WaveSpeedModel,
    strategy: Strategy,
    u_left: f64,
) -> Result<RhsEval> {
    rhs_impl(state, grid, model, strategy, u_left, true)
}

fn rhs_impl(
    state: &StateRS,
    grid: &Grid,
    model: &WaveSpeedModel,
    strategy: Strategy,
    u_left: f64,
    parallel: bool,
) -> Result<RhsEval> {
    let u_half = if parallel {
        crate::coefficients::reconstruct_u(strategy, model, state, grid, u_left)?
    } else {
        crate::coefficients::reconstruct_u_seq(strategy, model, state, grid, u_left)?
    };
    let coeffs = crate::coefficients::compute_coefficients(strategy, model, &u_half, state, grid);
    let (dr, ds) = rs_kernel(
        &state.r,
        &state.s,
        &coeffs.c_half,
        &coeffs.tc,
        grid.dx,
        parallel,
    );
    Ok(RhsEval { dr, ds, coeffs })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeMethod {
    Euler,
    Rk4,
}

#[derive(Clone, Debug)]
pub struct IntegrateOptions {
    pub method: TimeMethod,
    pub strategy: Strategy,
    /// CFL number; Δt = cfl·Δx / (max edge speed of the initial state).
    pub cfl: f64,
    /// Absolute step override; when set, `cfl` is ignored.
    pub dt_override: Option<f64>,
    pub u_left: f64,
    pub diag: DiagnosticsConfig,
    /// Times the stepper lands on exactly (snapshots); t_end is implicit.
    pub forced_times: Vec<f64>,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            method: TimeMethod::Rk4,
            strategy: Strategy::ExactF,
            cfl: 0.45,
            dt_override: None,
            u_left: 0.0,
            diag: DiagnosticsConfig::default(),
            forced_times: Vec::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    /// State at t = 0 and after every accepted step.
    pub states: Vec<StateRS>,
    /// One record per stored state.
    pub records: Vec<DiagnosticsRecord>,
    /// The fixed step used (before end-of-interval shortening).
    pub dt: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &StateRS {
        self.states.last().expect("trajectory never empty")
    }

    pub fn final_record(&self) -> &DiagnosticsRecord {
        self.records.last().expect("trajectory never empty")
    }

    /// State stored at time `t`, if the stepper landed there.
    pub fn state_at(&self, t: f64) -> Option<&StateRS> {
        self.states
            .iter()
            .find(|s| (s.t - t).abs() <= 1e-9 * t.abs().max(1.0))
    }
}

/// Δx-weighted inner product of two RHS evaluations over both families.
fn dot(grid: &Grid, a: &RhsEval, b: &RhsEval) -> f64 {
    let mut acc = 0.0;
    for j in 0..a.dr.len() {
        acc += a.dr[j] * b.dr[j] + a.ds[j] * b.ds[j];
    }
    grid.dx * acc
}

fn axpy(state: &StateRS, dt: f64, k: &RhsEval, t: f64) -> StateRS {
    let n = state.n_cells();
    let mut r = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    for j in 0..n {
        r.push(state.r[j] + dt * k.dr[j]);
        s.push(state.s[j] + dt * k.ds[j]);
    }
    StateRS { t, r, s }
}

/// Integrate the semi-discrete system to `t_end` with a fixed step.
///
/// The step is frozen from the initial state's largest edge speed. The
/// dissipation ledger is accumulated with the integrator's own stage
/// quadrature so that energy + ∫dissipation tracks the initial energy to
/// the integrator's order; the higher-integrability functional uses the
/// trapezoid rule.
pub fn integrate(
    state0: &StateRS,
    t_end: f64,
    grid: &Grid,
    model: &WaveSpeedModel,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    if !(t_end > 0.0) {
        return Err(Error::Range {
            key: "t_end".into(),
            msg: format!("must be positive, got {t_end}"),
        });
    }
    if opts.dt_override.is_none() && !(opts.cfl > 0.0 && opts.cfl <= 1.0) {
        return Err(Error::Range {
            key: "cfl".into(),
            msg: format!("must lie in (0, 1], got {}", opts.cfl),
        });
    }

    let eval = |st: &StateRS| rhs_impl(st, grid, model, opts.strategy, opts.u_left, true);

    let mut current = state0.clone();
    current.t = 0.0;
    let mut current_rhs = eval(&current)?;

    let dt = match opts.dt_override {
        Some(dt) => dt,
        None => opts.cfl * grid.dx / current_rhs.coeffs.max_speed(),
    };
    let scale0 = current.max_abs();
    let blowup_threshold = if scale0 > 0.0 {
        1e6 * scale0
    } else {
        f64::INFINITY
    };

    let mut forced: Vec<f64> = opts
        .forced_times
        .iter()
        .copied()
        .filter(|t| *t > 0.0 && *t < t_end)
        .collect();
    forced.sort_by(|a, b| a.partial_cmp(b).unwrap());
    forced.dedup();
    forced.push(t_end);

    let mut diss_cum = 0.0;
    let mut hi_alpha = 0.0;
    let mut records = vec![make_record(
        0.0,
        &current,
        &current_rhs,
        grid,
        diss_cum,
        hi_alpha,
    )];
    let mut states = vec![current.clone()];

    let eps = 1e-12 * t_end.max(1.0);
    let mut next_forced = 0usize;
    let mut t = 0.0;
    while t < t_end - eps {
        while forced[next_forced] <= t + eps {
            next_forced += 1;
        }
        let step = dt.min(forced[next_forced] - t);
        let t_new = if (forced[next_forced] - (t + step)).abs() <= eps {
            forced[next_forced]
        } else {
            t + step
        };

        let hi_inc_old = higher_integrability_increment(&current, &current_rhs.coeffs, grid, &opts.diag);

        // The dissipation ledger is the scheme's own discrete energy
        // balance. For quadratic energy the step algebra is exact:
        //   E(y⁺) − E(y) = 2Δt Σᵢ bᵢ⟨Yᵢ, kᵢ⟩ + Δt² Σᵢⱼ (bᵢbⱼ − 2bᵢaᵢⱼ)⟨kᵢ, kⱼ⟩
        // and 2⟨Yᵢ, kᵢ⟩ = −D(Yᵢ) + boundary telescope, so accumulating
        //   Δt Σ bᵢ D(Yᵢ) − Δt² Σ (bᵢbⱼ − 2bᵢaᵢⱼ)⟨kᵢ, kⱼ⟩
        // keeps E + diss_cum equal to E(0) up to the (ghost-zero) boundary
        // fluxes and roundoff; the residual is what the energy checks probe.
        let (next, diss_inc) = match opts.method {
            TimeMethod::Euler => {
                let next = axpy(&current, step, &current_rhs, t_new);
                let d1 = dissipation(&current, &current_rhs.coeffs, grid);
                let inc = step * d1 - step * step * dot(grid, &current_rhs, &current_rhs);
                (next, inc)
            }
            TimeMethod::Rk4 => {
                let k1 = &current_rhs;
                let y2 = axpy(&current, 0.5 * step, k1, t + 0.5 * step);
                let k2 = eval(&y2)?;
                let y3 = axpy(&current, 0.5 * step, &k2, t + 0.5 * step);
                let k3 = eval(&y3)?;
                let y4 = axpy(&current, step, &k3, t_new);
                let k4 = eval(&y4)?;

                let n = current.n_cells();
                let mut r = Vec::with_capacity(n);
                let mut s = Vec::with_capacity(n);
                let w = step / 6.0;
                for j in 0..n {
                    r.push(
                        current.r[j]
                            + w * (k1.dr[j] + 2.0 * k2.dr[j] + 2.0 * k3.dr[j] + k4.dr[j]),
                    );
                    s.push(
                        current.s[j]
                            + w * (k1.ds[j] + 2.0 * k2.ds[j] + 2.0 * k3.ds[j] + k4.ds[j]),
                    );
                }
                let d1 = dissipation(&current, &k1.coeffs, grid);
                let d2 = dissipation(&y2, &k2.coeffs, grid);
                let d3 = dissipation(&y3, &k3.coeffs, grid);
                let d4 = dissipation(&y4, &k4.coeffs, grid);
                let quad = w * (d1 + 2.0 * d2 + 2.0 * d3 + d4);
                // Coefficients bᵢbⱼ − bᵢaᵢⱼ − bⱼaⱼᵢ of the classical
                // tableau, summed over symmetric pairs; they add up to zero.
                let cross = (dot(grid, k1, k1) + dot(grid, &k4, &k4)) / 36.0
                    + (dot(grid, &k2, &k2) + dot(grid, &k3, &k3)) * (4.0 / 36.0)
                    - dot(grid, k1, &k2) * (2.0 / 9.0)
                    + dot(grid, k1, &k3) / 9.0
                    + dot(grid, k1, &k4) / 18.0
                    - dot(grid, &k2, &k3) / 9.0
                    + dot(grid, &k2, &k4) / 9.0
                    - dot(grid, &k3, &k4) * (2.0 / 9.0);
                (
                    StateRS { t: t_new, r, s },
                    quad - step * step * cross,
                )
            }
        };

        let max_abs = next.max_abs();
        if !next.all_finite() || max_abs > blowup_threshold {
            return Err(Error::BlowupDetected {
                t: t_new,
                max_abs,
                threshold: blowup_threshold,
            });
        }

        let next_rhs = eval(&next)?;
        diss_cum += diss_inc;
        let hi_inc_new = higher_integrability_increment(&next, &next_rhs.coeffs, grid, &opts.diag);
        hi_alpha += 0.5 * step * (hi_inc_old + hi_inc_new);

        records.push(make_record(t_new, &next, &next_rhs, grid, diss_cum, hi_alpha));
        states.push(next.clone());
        current = next;
        current_rhs = next_rhs;
        t = t_new;
    }

    Ok(Trajectory {
        states,
        records,
        dt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial::{build_scenario, Scenario, ScenarioKind};

    fn grid_n(n: usize, dx: f64) -> Grid {
        Grid {
            x_min: 0.0,
            x_max: n as f64 * dx,
            n_cells: n,
            dx,
        }
    }

    #[test]
    fn rhs_of_zero_state_is_zero() {
        let g = grid_n(5, 0.5);
        let st = StateRS::zeros(5);
        let ev = rhs(&st, &g, &WaveSpeedModel::arctan(), Strategy::ExactF).unwrap();
        assert!(ev.dr.iter().all(|v| *v == 0.0));
        assert!(ev.ds.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn rhs_constant_state_is_stationary_in_the_interior() {
        // R ≡ S ≡ const, so u is flat, tc·(R²−S²) = 0 and interior
        // differences vanish; only the boundary cells see the ghost zeros.
        let g = grid_n(6, 0.5);
        let st = StateRS::new(0.0, vec![-1.0; 6], vec![-1.0; 6]);
        let ev = rhs(&st, &g, &WaveSpeedModel::arctan(), Strategy::ExactF).unwrap();
        for j in 0..5 {
            assert!(ev.dr[j].abs() < 1e-13, "dr[{j}] = {}", ev.dr[j]);
        }
        for j in 1..6 {
            assert!(ev.ds[j].abs() < 1e-13, "ds[{j}] = {}", ev.ds[j]);
        }
    }

    #[test]
    fn rhs_hand_arithmetic_constant_model() {
        let g = grid_n(3, 1.0);
        let st = StateRS::new(0.0, vec![0.0, -1.0, 0.0], vec![0.0; 3]);
        let ev = rhs(&st, &g, &WaveSpeedModel::constant(1.0), Strategy::ExactF).unwrap();
        // tc = 0; dR_j = (R_{j+1} − R_j)/dx with ghost zero on the right.
        assert!((ev.dr[0] + 1.0).abs() < 1e-15);
        assert!((ev.dr[1] - 1.0).abs() < 1e-15);
        assert!(ev.dr[2].abs() < 1e-15);
        assert!(ev.ds.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn rhs_seq_matches_parallel_bitwise() {
        let g = grid_n(64, 30.0 / 64.0);
        let mut rng = <rand::rngs::StdRng as rand::SeedableRng>::seed_from_u64(2);
        let st = crate::initial::random_nonpositive_state(&mut rng, &g, 2.0);
        let model = WaveSpeedModel::arctan();
        let a = rhs(&st, &g, &model, Strategy::ExactF).unwrap();
        let b = rhs_seq(&st, &g, &model, Strategy::ExactF).unwrap();
        assert_eq!(a.dr, b.dr);
        assert_eq!(a.ds, b.ds);
        assert_eq!(a.coeffs.c_half, b.coeffs.c_half);
    }

    #[test]
    fn zero_state_integrates_to_zero() {
        let g = grid_n(8, 0.5);
        let st = StateRS::zeros(8);
        let traj = integrate(
            &st,
            1.0,
            &g,
            &WaveSpeedModel::arctan(),
            &IntegrateOptions::default(),
        )
        .unwrap();
        assert!(traj.final_state().max_abs() == 0.0);
        for rec in &traj.records {
            assert_eq!(rec.energy, 0.0);
        }
    }

    #[test]
    fn energy_is_nonincreasing_on_nonpositive_data() {
        let g = Grid::new(-15.0, 15.0, 128).unwrap();
        let data = build_scenario(&Scenario::new(ScenarioKind::GaussRsNeg), &g).unwrap();
        let traj = integrate(
            &data.state,
            2.0,
            &g,
            &data.model,
            &IntegrateOptions::default(),
        )
        .unwrap();
        let e0 = traj.records[0].energy;
        for rec in &traj.records {
            assert!(rec.energy <= e0 * (1.0 + 1e-8), "E({}) = {}", rec.t, rec.energy);
            // Ledger: E(t) + ∫D = E(0) to roundoff while the fields stay
            // clear of the boundary.
            assert!(
                (rec.energy + rec.diss_cum - e0).abs() <= 1e-7 * e0,
                "ledger off at t = {}: {}",
                rec.t,
                (rec.energy + rec.diss_cum - e0).abs() / e0
            );
        }
        // Strict decrease by the end: the dissipation is O(Δx) but finite.
        assert!(traj.final_record().energy < e0 * 0.99);
    }

    #[test]
    fn forced_times_are_hit_exactly() {
        let g = Grid::new(-15.0, 15.0, 64).unwrap();
        let data = build_scenario(&Scenario::new(ScenarioKind::GaussRsNeg), &g).unwrap();
        let opts = IntegrateOptions {
            forced_times: vec![0.35, 0.7],
            ..Default::default()
        };
        let traj = integrate(&data.state, 1.0, &g, &data.model, &opts).unwrap();
        assert!(traj.state_at(0.35).is_some());
        assert!(traj.state_at(0.7).is_some());
        assert!(traj.state_at(1.0).is_some());
    }

    #[test]
    fn cfl_out_of_range_is_rejected() {
        let g = grid_n(4, 0.5);
        let st = StateRS::zeros(4);
        let opts = IntegrateOptions {
            cfl: 1.5,
            ..Default::default()
        };
        let r = integrate(&st, 1.0, &g, &WaveSpeedModel::arctan(), &opts);
        assert!(matches!(r, Err(Error::Range { .. })));
    }

    #[test]
    fn hi_alpha_is_nondecreasing_for_monotone_models() {
        let g = Grid::new(-15.0, 15.0, 96).unwrap();
        let data = build_scenario(&Scenario::new(ScenarioKind::GaussRsNeg), &g).unwrap();
        let traj = integrate(
            &data.state,
            1.5,
            &g,
            &data.model,
            &IntegrateOptions::default(),
        )
        .unwrap();
        for w in traj.records.windows(2) {
            assert!(w[1].hi_alpha >= w[0].hi_alpha);
        }
        assert!(traj.final_record().hi_alpha > 0.0);
    }

    #[test]
    fn blowup_guard_trips_on_unstable_steps() {
        // Euler far beyond the CFL limit amplifies grid-scale modes; the
        // guard must stop the run instead of streaming garbage.
        let g = grid_n(64, 0.1);
        let r: Vec<f64> = (0..64).map(|j| if j % 2 == 0 { -1.0 } else { -0.2 }).collect();
        let st = StateRS::new(0.0, r, vec![0.0; 64]);
        let opts = IntegrateOptions {
            method: TimeMethod::Euler,
            dt_override: Some(4.0 * g.dx / 3.0),
            ..Default::default()
        };
        let result = integrate(&st, 50.0, &g, &WaveSpeedModel::arctan(), &opts);
        assert!(
            matches!(result, Err(Error::BlowupDetected { .. })),
            "expected blow-up, got {result:?}"
        );
    }
}
