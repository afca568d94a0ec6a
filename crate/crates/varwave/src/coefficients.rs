//! Edge reconstruction and source coefficients.
//!
//! From a state (R_j, S_j) this module rebuilds the edge quantities the
//! scheme needs: the running sum F_{j+1/2}, the edge values u_{j+1/2}, the
//! edge speeds c_{j±1/2} and the per-cell source coefficient tc_j. The
//! defining property, used by every discrete estimate, is the chain rule
//!
//!   (c_{j+1/2} − c_{j−1/2}) / Δx = 2 · tc_j · (R_j − S_j),
//!
//! which holds to machine precision because tc_j is *defined* through that
//! divided difference whenever the cell is nondegenerate.

use crate::error::{Error, Result};
use crate::grid::{Grid, StateRS};
use crate::par;
use crate::wavespeed::WaveSpeedModel;

/// How u_{j+1/2} is reconstructed from the state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Invert F at the accumulated F_{j+1/2} (the analyzed scheme).
    ExactF,
    /// Solve D₊u_{j−1/2} = (R_j−S_j)/(c(u_{j−1/2})+c(u_{j+1/2})) per edge.
    Balanced,
    /// March u_{j+1/2} = u_{j−1/2} + Δx (R_j−S_j)/(2c(u_{j−1/2})).
    March,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::ExactF => "exact_f",
            Strategy::Balanced => "balanced",
            Strategy::March => "march",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CoefficientField {
    /// F at edges, length n_cells + 1; running partial sum of Δx (R − S).
    pub f_half: Vec<f64>,
    /// u at edges, length n_cells + 1.
    pub u_half: Vec<f64>,
    /// c(u) at edges, length n_cells + 1.
    pub c_half: Vec<f64>,
    /// Source coefficient per cell, length n_cells.
    pub tc: Vec<f64>,
    pub strategy: Strategy,
}

impl CoefficientField {
    /// Full pipeline: accumulate F, reconstruct u, evaluate speeds and tc.
    pub fn from_state(
        strategy: Strategy,
        model: &WaveSpeedModel,
        state: &StateRS,
        grid: &Grid,
        u_left: f64,
    ) -> Result<Self> {
        let u_half = reconstruct_u(strategy, model, state, grid, u_left)?;
        Ok(compute_coefficients(strategy, model, &u_half, state, grid))
    }

    /// Largest edge speed; used for CFL-based step selection.
    pub fn max_speed(&self) -> f64 {
        self.c_half.iter().fold(0.0f64, |m, c| m.max(*c))
    }
}

/// Running sums F_{j+1/2} = Δx Σ_{i≤j} (R_i − S_i), with F = 0 at the left
/// boundary (the ghost region carries no mass). Length n_cells + 1.
pub fn accumulate_f(state: &StateRS, grid: &Grid) -> Vec<f64> {
    let n = state.n_cells();
    let mut f = Vec::with_capacity(n + 1);
    f.push(0.0);
    let mut acc = 0.0;
    for j in 0..n {
        acc += grid.dx * (state.r[j] - state.s[j]);
        f.push(acc);
    }
    f
}

/// Reconstruct u at the n_cells + 1 edges under the given strategy.
/// `u_left` is the known value at the leftmost edge (0 for compactly
/// supported data).
pub fn reconstruct_u(
    strategy: Strategy,
    model: &WaveSpeedModel,
    state: &StateRS,
    grid: &Grid,
    u_left: f64,
) -> Result<Vec<f64>> {
    reconstruct_u_impl(strategy, model, state, grid, u_left, true)
}

/// Sequential variant of [`reconstruct_u`]; same results, used by the
/// benchmark suite to compare against the parallel path.
pub fn reconstruct_u_seq(
    strategy: Strategy,
    model: &WaveSpeedModel,
    state: &StateRS,
    grid: &Grid,
    u_left: f64,
) -> Result<Vec<f64>> {
    reconstruct_u_impl(strategy, model, state, grid, u_left, false)
}

fn reconstruct_u_impl(
    strategy: Strategy,
    model: &WaveSpeedModel,
    state: &StateRS,
    grid: &Grid,
    u_left: f64,
    parallel: bool,
) -> Result<Vec<f64>> {
    let n = state.n_cells();
    match strategy {
        Strategy::ExactF => {
            let f_half = accumulate_f(state, grid);
            let f_offset = model.eval_f(u_left)?;
            let results: Vec<Result<f64>> = if parallel {
                par::map_range(n + 1, |k| model.invert_f(f_offset + f_half[k]))
            } else {
                par::map_range_seq(n + 1, |k| model.invert_f(f_offset + f_half[k]))
            };
            results.into_iter().collect()
        }
        Strategy::Balanced => {
            let mut u = Vec::with_capacity(n + 1);
            u.push(u_left);
            for j in 0..n {
                let target = grid.dx * (state.r[j] - state.s[j]);
                let next = balanced_edge_solve(model, u[j], target, j + 1)?;
                u.push(next);
            }
            Ok(u)
        }
        Strategy::March => {
            let mut u = Vec::with_capacity(n + 1);
            u.push(u_left);
            for j in 0..n {
                let inc = grid.dx * (state.r[j] - state.s[j]) / (2.0 * model.eval_c(u[j]));
                u.push(u[j] + inc);
            }
            Ok(u)
        }
    }
}

/// Solve (w − u_prev)(c(u_prev) + c(w)) = target for w by safeguarded
/// Newton, where target = Δx (R_j − S_j). Shared with the fully-discrete
/// space-integration update, which uses the identical recurrence.
pub(crate) fn balanced_edge_solve(
    model: &WaveSpeedModel,
    u_prev: f64,
    target: f64,
    edge: usize,
) -> Result<f64> {
    if target == 0.0 {
        return Ok(u_prev);
    }
    let c_prev = model.eval_c(u_prev);
    let g = |w: f64| (w - u_prev) * (c_prev + model.eval_c(w)) - target;
    let tol = 1e-12 * target.abs().max(1.0);

    // March predictor; already within tolerance for tiny increments, where
    // the a-priori bracket below would collapse to a point in fp.
    let predictor = u_prev + target / (2.0 * c_prev);
    if g(predictor).abs() <= tol {
        return Ok(predictor);
    }

    // (w − u_prev)(c_prev + c(w)) is pinched between 2 c_min (w − u_prev)
    // and 2 c_max (w − u_prev), so the root is bracketed a priori.
    let mut a = u_prev + target / (2.0 * model.c_max) * 0.99;
    let mut b = u_prev + target / (2.0 * model.c_min) * 1.01;
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    let mut ga = g(a);
    let gb = g(b);
    if ga * gb > 0.0 {
        return Err(Error::NewtonFailure {
            edge,
            detail: format!("no bracket for edge increment {target}"),
        });
    }

    let mut w = u_prev + target / (2.0 * c_prev);
    if w <= a || w >= b {
        w = 0.5 * (a + b);
    }
    for _ in 0..100 {
        let gw = g(w);
        if gw.abs() <= tol {
            return Ok(w);
        }
        if gw * ga > 0.0 {
            a = w;
            ga = gw;
        } else {
            b = w;
        }
        let slope = c_prev + model.eval_c(w) + (w - u_prev) * model.eval_c_prime(w);
        let newton = if slope != 0.0 { w - gw / slope } else { w };
        w = if newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        if (b - a).abs() <= f64::EPSILON * w.abs().max(1.0) {
            return Ok(w);
        }
    }
    Err(Error::NewtonFailure {
        edge,
        detail: "no convergence in 100 iterations (excessive gradient?)".into(),
    })
}

/// Edge speeds and the per-cell source coefficient.
///
/// tc_j is the divided difference (c_{j+1/2} − c_{j−1/2}) / (2Δx (R_j − S_j))
/// whenever |R_j − S_j| exceeds a state-relative degeneracy threshold;
/// otherwise the analytic limit c'(u)/(4c(u)) at the left edge value.
pub fn compute_coefficients(
    strategy: Strategy,
    model: &WaveSpeedModel,
    u_half: &[f64],
    state: &StateRS,
    grid: &Grid,
) -> CoefficientField {
    let n = state.n_cells();
    assert_eq!(u_half.len(), n + 1);
    let f_half = accumulate_f(state, grid);
    let c_half = par::map_range(n + 1, |k| model.eval_c(u_half[k]));

    let mut max_jump = 0.0f64;
    for j in 0..n {
        max_jump = max_jump.max((state.r[j] - state.s[j]).abs());
    }
    let eps_deg = 1e-12 * max_jump.max(1.0);

    let tc = par::map_range(n, |j| {
        let jump = state.r[j] - state.s[j];
        if jump.abs() > eps_deg {
            (c_half[j + 1] - c_half[j]) / (2.0 * grid.dx * jump)
        } else {
            model.eval_c_prime(u_half[j]) / (4.0 * model.eval_c(u_half[j]))
        }
    });

    CoefficientField {
        f_half,
        u_half: u_half.to_vec(),
        c_half,
        tc,
        strategy,
    }
}
