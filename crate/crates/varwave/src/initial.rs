//! Discrete initial states: from (u₀, v₀) pairs, from directly specified
//! (R₀, S₀), and the built-in scenarios used throughout the test suite.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::{Grid, StateRS};
use crate::wavespeed::WaveSpeedModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScenarioKind {
    /// Two opposed Gaussian pulses, R ≤ 0 and S ≥ 0, arctan speed. This is
    /// the sign pattern as printed in the source material; it leaves the
    /// nonpositivity regime.
    GaussRs,
    /// Same R, sign-corrected S ≤ 0; stays inside the invariant domain.
    GaussRsNeg,
    /// u₀ = π/4 + e^{−x²}, v₀ = −c(u₀)u₀ₓ on the liquid-crystal model; the
    /// classical blow-up-prone pulse, not covered by the convergence theory.
    GlasseyPulse,
    /// Placeholder for states assembled directly by callers; not buildable
    /// through [`build_scenario`].
    Custom,
}

impl ScenarioKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "gauss_rs" => Ok(ScenarioKind::GaussRs),
            "gauss_rs_neg" => Ok(ScenarioKind::GaussRsNeg),
            "glassey_pulse" => Ok(ScenarioKind::GlasseyPulse),
            other => Err(Error::UnknownScenario(other.to_string())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::GaussRs => "gauss_rs",
            ScenarioKind::GaussRsNeg => "gauss_rs_neg",
            ScenarioKind::GlasseyPulse => "glassey_pulse",
            ScenarioKind::Custom => "custom",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub params: BTreeMap<String, f64>,
}

impl Scenario {
    pub fn new(kind: ScenarioKind) -> Self {
        let mut params = BTreeMap::new();
        match kind {
            ScenarioKind::GaussRs | ScenarioKind::GaussRsNeg => {
                params.insert("r_amp".into(), -2.0);
                params.insert("r_center".into(), 5.0);
                params.insert(
                    "s_amp".into(),
                    if kind == ScenarioKind::GaussRs { 2.0 } else { -2.0 },
                );
                params.insert("s_center".into(), -5.0);
                params.insert("width".into(), 1.0);
            }
            ScenarioKind::GlasseyPulse => {
                params.insert("u_offset".into(), PI / 4.0);
                params.insert("amp".into(), 1.0);
                params.insert("alpha".into(), 1.5);
                params.insert("beta".into(), 0.5);
            }
            ScenarioKind::Custom => {}
        }
        Scenario { kind, params }
    }

    /// Override a named parameter; rejects names the scenario doesn't have.
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<()> {
        match self.params.get_mut(name) {
            Some(slot) => {
                *slot = value;
                Ok(())
            }
            None => Err(Error::Range {
                key: format!("scenario.{name}"),
                msg: format!("unknown parameter for scenario `{}`", self.kind.name()),
            }),
        }
    }

    fn p(&self, name: &str) -> f64 {
        self.params[name]
    }
}

/// A built scenario: the initial state, the wave-speed model it runs on,
/// and the u value at the left boundary edge (nonzero when u₀ does not
/// decay, as for the Glassey pulse).
#[derive(Clone, Debug)]
pub struct ScenarioData {
    pub state: StateRS,
    pub model: WaveSpeedModel,
    pub u_left: f64,
}

/// Build the discrete initial state from (u₀, v₀).
///
/// u is point-sampled at cell centers, v₀ is cell-averaged, and u₀' is the
/// exact telescoped difference of u₀ at the cell edges — which is also its
/// exact cell average, and keeps the initial F sums summation-by-parts
/// clean. Then R = v₀ + c(u₀)u₀', S = v₀ − c(u₀)u₀'.
pub fn discretize_uv<U, V>(u0: U, v0: V, grid: &Grid, model: &WaveSpeedModel) -> StateRS
where
    U: Fn(f64) -> f64,
    V: Fn(f64) -> f64 + Sync,
{
    let n = grid.n_cells;
    let v_avg = grid.project_cell_averages(v0);
    let mut r = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    for j in 0..n {
        let u_j = u0(grid.cell_center(j));
        let up_j = (u0(grid.edge(j + 1)) - u0(grid.edge(j))) / grid.dx;
        let cu = model.eval_c(u_j) * up_j;
        r.push(v_avg[j] + cu);
        s.push(v_avg[j] - cu);
    }
    StateRS::new(0.0, r, s)
}

/// Instantiate a named scenario on the given grid.
pub fn build_scenario(scenario: &Scenario, grid: &Grid) -> Result<ScenarioData> {
    match scenario.kind {
        ScenarioKind::GaussRs | ScenarioKind::GaussRsNeg => {
            let (ra, rc) = (scenario.p("r_amp"), scenario.p("r_center"));
            let (sa, sc) = (scenario.p("s_amp"), scenario.p("s_center"));
            let w = scenario.p("width");
            let r = grid.project_cell_averages(|x: f64| {
                let z = (x - rc) / w;
                ra * (-z * z).exp()
            });
            let s = grid.project_cell_averages(|x: f64| {
                let z = (x - sc) / w;
                sa * (-z * z).exp()
            });
            Ok(ScenarioData {
                state: StateRS::new(0.0, r, s),
                model: WaveSpeedModel::arctan(),
                u_left: 0.0,
            })
        }
        ScenarioKind::GlasseyPulse => {
            let off = scenario.p("u_offset");
            let amp = scenario.p("amp");
            let model = WaveSpeedModel::liquid_crystal(scenario.p("alpha"), scenario.p("beta"));
            let u0 = |x: f64| off + amp * (-x * x).exp();
            let u0_prime = |x: f64| -2.0 * x * amp * (-x * x).exp();
            let m = model.clone();
            let v0 = move |x: f64| -m.eval_c(u0(x)) * u0_prime(x);
            let state = discretize_uv(u0, v0, grid, &model);
            let u_left = u0(grid.x_min);
            Ok(ScenarioData {
                state,
                model,
                u_left,
            })
        }
        ScenarioKind::Custom => Err(Error::UnknownScenario("custom".into())),
    }
}

/// Uniform-random nonpositive state, the input family the property tests
/// and the randomized acceptance checks draw from.
pub fn random_nonpositive_state<R: Rng>(rng: &mut R, grid: &Grid, amp: f64) -> StateRS {
    let n = grid.n_cells;
    let r = (0..n).map(|_| -rng.gen_range(0.0..amp)).collect();
    let s = (0..n).map(|_| -rng.gen_range(0.0..amp)).collect();
    StateRS::new(0.0, r, s)
}
