//! Fully-discrete explicit upwind stepper and its two u-update variants.
//!
//! R and S advance by forward Euler on the upwind operator; the edge field
//! u^n_{j+1/2} advances either by a staggered time average of R + S
//! (`TimeIntegrate`) or by re-marching the balanced space recurrence from
//! the left boundary every step (`SpaceIntegrate`). Coefficients come from
//! the *stored* u field, which is exactly what distinguishes the variants.

use crate::coefficients::{balanced_edge_solve, CoefficientField, Strategy};
use crate::diagnostics::{
    dissipation, higher_integrability_increment, make_record, DiagnosticsConfig, DiagnosticsRecord,
};
use crate::error::{Error, Result};
use crate::grid::{Grid, StateRS};
use crate::par;
use crate::semidiscrete::{rs_kernel, RhsEval};
use crate::wavespeed::WaveSpeedModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UUpdate {
    /// u^{n+1}_{j+1/2} = u^n_{j+1/2} + (Δt/8) Σ of the eight neighboring
    /// R, S values across both time levels.
    TimeIntegrate,
    /// Re-march u from the left boundary through the balanced recurrence.
    SpaceIntegrate,
}

impl UUpdate {
    pub fn name(self) -> &'static str {
        match self {
            UUpdate::TimeIntegrate => "time",
            UUpdate::SpaceIntegrate => "space",
        }
    }
}

/// State of the fully-discrete scheme at one time level.
#[derive(Clone, Debug)]
pub struct FullState {
    pub state: StateRS,
    /// u at the n_cells + 1 edges.
    pub u_half: Vec<f64>,
    /// Step count n.
    pub level: usize,
}

impl FullState {
    /// Initialize with the balanced space recurrence, the choice that makes
    /// both u-update variants start from identical data.
    pub fn new(state: StateRS, grid: &Grid, model: &WaveSpeedModel, u_left: f64) -> Result<Self> {
        let u_half = update_u_space(u_left, &state, grid, model)?;
        Ok(FullState {
            state,
            u_half,
            level: 0,
        })
    }
}

/// March u^n_{j+1/2} from the left boundary:
/// u_{j+1/2} = u_{j−1/2} + Δx (R_j − S_j)/(c(u_{j−1/2}) + c(u_{j+1/2})),
/// each step a scalar Newton solve — the balanced reconstruction recurrence.
pub fn update_u_space(
    u_left: f64,
    state: &StateRS,
    grid: &Grid,
    model: &WaveSpeedModel,
) -> Result<Vec<f64>> {
    let n = state.n_cells();
    let mut u = Vec::with_capacity(n + 1);
    u.push(u_left);
    for j in 0..n {
        let target = grid.dx * (state.r[j] - state.s[j]);
        let next = balanced_edge_solve(model, u[j], target, j + 1)?;
        u.push(next);
    }
    Ok(u)
}

/// Staggered time average: edge j+1/2 collects the four neighboring cell
/// values of R and S at both time levels, ghost zeros at the ends.
pub fn update_u_time(
    u_half: &[f64],
    state_n: &StateRS,
    state_np1: &StateRS,
    dt: f64,
) -> Vec<f64> {
    let n = state_n.n_cells();
    assert_eq!(state_np1.n_cells(), n);
    assert_eq!(u_half.len(), n + 1);
    let cell = |st: &StateRS, j: isize| -> f64 {
        if j < 0 || j as usize >= n {
            0.0
        } else {
            st.r[j as usize] + st.s[j as usize]
        }
    };
    (0..=n)
        .map(|k| {
            let left = k as isize - 1;
            let right = k as isize;
            let sum = cell(state_n, left)
                + cell(state_n, right)
                + cell(state_np1, left)
                + cell(state_np1, right);
            u_half[k] + dt / 8.0 * sum
        })
        .collect()
}

/// One explicit step. The CFL guard compares dt against the observed edge
/// speeds of the current level; `allow_supercritical` bypasses it to allow
/// the literal Δt = Δx runs.
pub fn step_explicit(
    fs: &FullState,
    dt: f64,
    grid: &Grid,
    model: &WaveSpeedModel,
    u_update: UUpdate,
    u_left: f64,
    allow_supercritical: bool,
) -> Result<FullState> {
    let n = fs.state.n_cells();
    let c_half: Vec<f64> = par::map_range(n + 1, |k| model.eval_c(fs.u_half[k]));

    let c_max = c_half.iter().fold(0.0f64, |m, c| m.max(*c));
    let ratio = dt * c_max / grid.dx;
    if !allow_supercritical && ratio > 1.0 + 1e-9 {
        return Err(Error::CflViolation {
            dt,
            dx: grid.dx,
            ratio,
        });
    }

    let tc = source_coefficients(&fs.state, &c_half, &fs.u_half, grid, model);
    let (dr, ds) = rs_kernel(&fs.state.r, &fs.state.s, &c_half, &tc, grid.dx, true);

    let t_new = fs.state.t + dt;
    let mut r = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    for j in 0..n {
        r.push(fs.state.r[j] + dt * dr[j]);
        s.push(fs.state.s[j] + dt * ds[j]);
    }
    let state_np1 = StateRS { t: t_new, r, s };
    if !state_np1.all_finite() {
        return Err(Error::BlowupDetected {
            t: t_new,
            max_abs: f64::INFINITY,
            threshold: f64::INFINITY,
        });
    }

    let u_half = match u_update {
        UUpdate::TimeIntegrate => update_u_time(&fs.u_half, &fs.state, &state_np1, dt),
        UUpdate::SpaceIntegrate => update_u_space(u_left, &state_np1, grid, model)?,
    };

    Ok(FullState {
        state: state_np1,
        u_half,
        level: fs.level + 1,
    })
}

/// tc from the stored edge speeds, with the same degeneracy rule as the
/// coefficient module.
fn source_coefficients(
    state: &StateRS,
    c_half: &[f64],
    u_half: &[f64],
    grid: &Grid,
    model: &WaveSpeedModel,
) -> Vec<f64> {
    let n = state.n_cells();
    let mut max_jump = 0.0f64;
    for j in 0..n {
        max_jump = max_jump.max((state.r[j] - state.s[j]).abs());
    }
    let eps_deg = 1e-12 * max_jump.max(1.0);
    par::map_range(n, |j| {
        let jump = state.r[j] - state.s[j];
        if jump.abs() > eps_deg {
            (c_half[j + 1] - c_half[j]) / (2.0 * grid.dx * jump)
        } else {
            model.eval_c_prime(u_half[j]) / (4.0 * model.eval_c(u_half[j]))
        }
    })
}

#[derive(Clone, Debug)]
pub struct ExplicitOptions {
    pub u_update: UUpdate,
    /// Absolute step; when None, Δt = cfl·Δx / (initial max edge speed).
    pub dt: Option<f64>,
    pub cfl: f64,
    pub allow_supercritical: bool,
    pub u_left: f64,
    pub diag: DiagnosticsConfig,
    pub forced_times: Vec<f64>,
}

impl Default for ExplicitOptions {
    fn default() -> Self {
        ExplicitOptions {
            u_update: UUpdate::SpaceIntegrate,
            dt: None,
            cfl: 0.9,
            allow_supercritical: false,
            u_left: 0.0,
            diag: DiagnosticsConfig::default(),
            forced_times: Vec::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExplicitTrajectory {
    pub states: Vec<FullState>,
    pub records: Vec<DiagnosticsRecord>,
    pub dt: f64,
}

impl ExplicitTrajectory {
    pub fn final_state(&self) -> &FullState {
        self.states.last().expect("trajectory never empty")
    }

    pub fn state_at(&self, t: f64) -> Option<&FullState> {
        self.states
            .iter()
            .find(|s| (s.state.t - t).abs() <= 1e-9 * t.abs().max(1.0))
    }
}

/// Drive the explicit scheme to `t_end` with a fixed step (last step
/// shortened; forced times landed exactly). Diagnostics accumulate by the
/// trapezoid rule.
pub fn integrate_explicit(
    state0: &StateRS,
    t_end: f64,
    grid: &Grid,
    model: &WaveSpeedModel,
    opts: &ExplicitOptions,
) -> Result<ExplicitTrajectory> {
    if !(t_end > 0.0) {
        return Err(Error::Range {
            key: "t_end".into(),
            msg: format!("must be positive, got {t_end}"),
        });
    }
    let mut initial = state0.clone();
    initial.t = 0.0;
    let mut current = FullState::new(initial, grid, model, opts.u_left)?;

    let dt = match opts.dt {
        Some(dt) => dt,
        None => {
            let c0 = current
                .u_half
                .iter()
                .map(|u| model.eval_c(*u))
                .fold(0.0f64, f64::max);
            opts.cfl * grid.dx / c0
        }
    };
    let scale0 = current.state.max_abs();
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
    let eval = |fs: &FullState| -> RhsEval {
        let n = fs.state.n_cells();
        let c_half: Vec<f64> = par::map_range(n + 1, |k| model.eval_c(fs.u_half[k]));
        let tc = source_coefficients(&fs.state, &c_half, &fs.u_half, grid, model);
        let (dr, ds) = rs_kernel(&fs.state.r, &fs.state.s, &c_half, &tc, grid.dx, true);
        let f_half = crate::coefficients::accumulate_f(&fs.state, grid);
        RhsEval {
            dr,
            ds,
            coeffs: CoefficientField {
                f_half,
                u_half: fs.u_half.clone(),
                c_half,
                tc,
                strategy: Strategy::Balanced,
            },
        }
    };

    let mut current_eval = eval(&current);
    let mut records = vec![make_record(
        0.0,
        &current.state,
        &current_eval,
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
        let next = step_explicit(
            &current,
            step,
            grid,
            model,
            opts.u_update,
            opts.u_left,
            opts.allow_supercritical,
        )?;
        let t_new = if (forced[next_forced] - next.state.t).abs() <= eps {
            forced[next_forced]
        } else {
            next.state.t
        };
        let mut next = next;
        next.state.t = t_new;

        let max_abs = next.state.max_abs();
        if max_abs > blowup_threshold {
            return Err(Error::BlowupDetected {
                t: t_new,
                max_abs,
                threshold: blowup_threshold,
            });
        }

        let next_eval = eval(&next);
        diss_cum += 0.5
            * step
            * (dissipation(&current.state, &current_eval.coeffs, grid)
                + dissipation(&next.state, &next_eval.coeffs, grid));
        hi_alpha += 0.5
            * step
            * (higher_integrability_increment(&current.state, &current_eval.coeffs, grid, &opts.diag)
                + higher_integrability_increment(&next.state, &next_eval.coeffs, grid, &opts.diag));

        records.push(make_record(
            t_new,
            &next.state,
            &next_eval,
            grid,
            diss_cum,
            hi_alpha,
        ));
        states.push(next.clone());
        current = next;
        current_eval = next_eval;
        t = t_new;
    }

    Ok(ExplicitTrajectory {
        states,
        records,
        dt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::reconstruct_u;
    use crate::initial::random_nonpositive_state;
    use crate::semidiscrete::{integrate, IntegrateOptions, TimeMethod};
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn grid_n(n: usize, dx: f64) -> Grid {
        Grid {
            x_min: 0.0,
            x_max: n as f64 * dx,
            n_cells: n,
            dx,
        }
    }

    #[test]
    fn zero_state_is_fixed() {
        let g = grid_n(4, 0.5);
        let model = WaveSpeedModel::arctan();
        let fs = FullState::new(StateRS::zeros(4), &g, &model, 0.0).unwrap();
        let next = step_explicit(&fs, 0.1, &g, &model, UUpdate::SpaceIntegrate, 0.0, false).unwrap();
        assert_eq!(next.state.r, vec![0.0; 4]);
        assert_eq!(next.state.s, vec![0.0; 4]);
        assert_eq!(next.u_half, fs.u_half);
        assert_eq!(next.level, 1);
    }

    #[test]
    fn hand_arithmetic_step() {
        // Constant model, tc = 0: every cell moves by dt·D₊R, including the
        // first one, whose neighbor is the interior cell.
        let g = grid_n(3, 1.0);
        let model = WaveSpeedModel::constant(1.0);
        let st = StateRS::new(0.0, vec![0.0, -1.0, 0.0], vec![0.0; 3]);
        let fs = FullState::new(st, &g, &model, 0.0).unwrap();
        let next = step_explicit(&fs, 0.5, &g, &model, UUpdate::SpaceIntegrate, 0.0, false).unwrap();
        assert!((next.state.r[0] + 0.5).abs() < 1e-15);
        assert!((next.state.r[1] + 0.5).abs() < 1e-15);
        assert!(next.state.r[2].abs() < 1e-15);
        assert!(next.state.s.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn cfl_violation_is_rejected() {
        let g = grid_n(4, 0.5);
        let model = WaveSpeedModel::constant(1.0);
        let st = StateRS::new(0.0, vec![-1.0; 4], vec![-1.0; 4]);
        let fs = FullState::new(st, &g, &model, 0.0).unwrap();
        let dt = 2.0 * g.dx / model.c_max;
        let r = step_explicit(&fs, dt, &g, &model, UUpdate::SpaceIntegrate, 0.0, false);
        assert!(matches!(r, Err(Error::CflViolation { .. })));
        // The same step goes through when supercritical runs are allowed.
        assert!(step_explicit(&fs, dt, &g, &model, UUpdate::SpaceIntegrate, 0.0, true).is_ok());
    }

    #[test]
    fn update_u_time_examples() {
        let st0 = StateRS::zeros(3);
        let u = vec![0.1, 0.2, 0.3, 0.4];
        assert_eq!(update_u_time(&u, &st0, &st0, 0.8), u);

        // R ≡ S ≡ −1 at both levels: every interior edge loses dt; the two
        // boundary edges only see one neighboring cell.
        let stm = StateRS::new(0.0, vec![-1.0; 3], vec![-1.0; 3]);
        let moved = update_u_time(&u, &stm, &stm, 0.8);
        for k in 1..3 {
            assert!((moved[k] - (u[k] - 0.8)).abs() < 1e-15);
        }
        assert!((moved[0] - (u[0] - 0.4)).abs() < 1e-15);
        assert!((moved[3] - (u[3] - 0.4)).abs() < 1e-15);

        // Single interior edge with only the time-level-n R values set.
        let two_n = StateRS::new(0.0, vec![-1.0, -1.0], vec![0.0, 0.0]);
        let two_np1 = StateRS::zeros(2);
        let u2 = vec![0.0, 0.0, 0.0];
        let got = update_u_time(&u2, &two_n, &two_np1, 1.0);
        assert!((got[1] - (-2.0 / 8.0)).abs() < 1e-15);
    }

    #[test]
    fn update_u_space_examples() {
        let g = grid_n(1, 1.0);
        let model = WaveSpeedModel::constant(1.0);
        let st = StateRS::new(0.0, vec![2.0], vec![0.0]);
        let u = update_u_space(0.0, &st, &g, &model).unwrap();
        assert!((u[1] - 1.0).abs() < 1e-12);

        // R ≡ S keeps u flat.
        let st = StateRS::new(0.0, vec![-1.0; 1], vec![-1.0; 1]);
        let u = update_u_space(0.7, &st, &g, &model).unwrap();
        assert_eq!(u, vec![0.7, 0.7]);
    }

    #[test]
    fn update_u_space_equals_balanced_reconstruction() {
        let g = grid_n(32, 0.4);
        let model = WaveSpeedModel::arctan();
        let mut rng = StdRng::seed_from_u64(17);
        let st = random_nonpositive_state(&mut rng, &g, 2.0);
        let a = update_u_space(0.0, &st, &g, &model).unwrap();
        let b = reconstruct_u(Strategy::Balanced, &model, &st, &g, 0.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn euler_semidiscrete_step_equals_explicit_step() {
        let g = grid_n(48, 30.0 / 48.0);
        let model = WaveSpeedModel::arctan();
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..5 {
            let st = random_nonpositive_state(&mut rng, &g, 2.0);
            let dt = 0.3 * g.dx / model.c_max;
            let opts = IntegrateOptions {
                method: TimeMethod::Euler,
                strategy: Strategy::Balanced,
                dt_override: Some(dt),
                ..Default::default()
            };
            let semi = integrate(&st, dt, &g, &model, &opts).unwrap();
            let fs = FullState::new(st.clone(), &g, &model, 0.0).unwrap();
            let full =
                step_explicit(&fs, dt, &g, &model, UUpdate::SpaceIntegrate, 0.0, false).unwrap();
            let semi_final = semi.final_state();
            for j in 0..48 {
                assert!((semi_final.r[j] - full.state.r[j]).abs() <= 1e-13);
                assert!((semi_final.s[j] - full.state.s[j]).abs() <= 1e-13);
            }
        }
    }
}
