//! Run orchestration: drive a configured simulation, persist CSV series and
//! snapshots, evaluate the enabled invariant checks, and run grid-refinement
//! studies.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::rngs::StdRng;
use rand::SeedableRng;

use crate::coefficients::{reconstruct_u, CoefficientField};
use crate::config::{SchemeKind, SimConfig};
use crate::diagnostics::{CheckKind, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::fulldiscrete::{integrate_explicit, ExplicitOptions};
use crate::grid::{Grid, StateRS};
use crate::initial::{build_scenario, random_nonpositive_state};
use crate::par;
use crate::semidiscrete::{integrate, rhs, IntegrateOptions, TimeMethod};
use crate::wavespeed::WaveSpeedModel;

/// Environment variable that overrides `output_dir`.
pub const OUTPUT_DIR_ENV: &str = "VARWAVE_OUTPUT_DIR";

const SERIES_HEADER: &str =
    "t,energy,l1,l3,diss_cum,r_max,s_max,r_min,s_min,hlem_residual_max,hi_alpha";

#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub records: Vec<DiagnosticsRecord>,
    pub checks: Vec<CheckOutcome>,
    pub warnings: Vec<String>,
    pub files: Vec<PathBuf>,
    pub dt: f64,
}

impl RunSummary {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Everything a finished simulation exposes to the harness.
struct RunArtifacts {
    grid: Grid,
    records: Vec<DiagnosticsRecord>,
    /// (time, state, active u field) for t = 0, requested snapshots, t_end.
    snapshots: Vec<(f64, StateRS, Vec<f64>)>,
    dt: f64,
    hypothesis_ok: bool,
    m_bound: f64,
    monotone_model: bool,
    scheme: SchemeKind,
    method: TimeMethod,
}

fn simulate(cfg: &SimConfig) -> Result<RunArtifacts> {
    let grid = Grid::new(cfg.x_min, cfg.x_max, cfg.n_cells)?;
    let data = build_scenario(&cfg.scenario, &grid)?;
    let model = match cfg.model {
        Some(choice) => choice.build(),
        None => data.model.clone(),
    };

    let tol0 = 1e-12;
    let hypothesis_ok = data
        .state
        .r
        .iter()
        .chain(data.state.s.iter())
        .all(|v| *v <= tol0);
    let mut m_bound = 0.0f64;
    for v in data.state.r.iter().chain(data.state.s.iter()) {
        m_bound = m_bound.max(-*v);
    }

    let mut wanted: Vec<f64> = cfg.snapshot_times.clone();
    if !wanted.iter().any(|t| (*t - cfg.t_end).abs() < 1e-12) {
        wanted.push(cfg.t_end);
    }

    let (records, snapshots, dt) = match cfg.scheme {
        SchemeKind::Semidiscrete => {
            let opts = IntegrateOptions {
                method: cfg.method,
                strategy: cfg.strategy,
                cfl: cfg.cfl,
                dt_override: cfg.dt,
                u_left: data.u_left,
                diag: cfg.diag.clone(),
                forced_times: wanted.clone(),
            };
            let traj = integrate(&data.state, cfg.t_end, &grid, &model, &opts)?;
            let mut snaps = Vec::new();
            for t in wanted.iter().filter(|t| **t < cfg.t_end).chain([cfg.t_end].iter()) {
                if let Some(st) = traj.state_at(*t) {
                    let u = reconstruct_u(cfg.strategy, &model, st, &grid, data.u_left)?;
                    snaps.push((*t, st.clone(), u));
                }
            }
            (traj.records, snaps, traj.dt)
        }
        SchemeKind::Explicit => {
            let opts = ExplicitOptions {
                u_update: cfg.u_update,
                dt: cfg.dt,
                cfl: cfg.cfl,
                allow_supercritical: cfg.allow_supercritical,
                u_left: data.u_left,
                diag: cfg.diag.clone(),
                forced_times: wanted.clone(),
            };
            let traj = integrate_explicit(&data.state, cfg.t_end, &grid, &model, &opts)?;
            let mut snaps = Vec::new();
            for t in wanted.iter().filter(|t| **t < cfg.t_end).chain([cfg.t_end].iter()) {
                if let Some(fs) = traj.state_at(*t) {
                    snaps.push((*t, fs.state.clone(), fs.u_half.clone()));
                }
            }
            (traj.records, snaps, traj.dt)
        }
    };

    Ok(RunArtifacts {
        grid,
        records,
        snapshots,
        dt,
        hypothesis_ok,
        m_bound,
        monotone_model: model.monotone,
        scheme: cfg.scheme,
        method: cfg.method,
    })
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_series(path: &Path, records: &[DiagnosticsRecord], every: usize) -> Result<()> {
    let mut out = String::with_capacity(records.len() * 96);
    out.push_str(SERIES_HEADER);
    out.push('\n');
    let last = records.len() - 1;
    for (i, r) in records.iter().enumerate() {
        if i % every != 0 && i != last {
            continue;
        }
        let row = [
            r.t,
            r.energy,
            r.l1,
            r.l3,
            r.diss_cum,
            r.r_max,
            r.s_max,
            r.r_min,
            r.s_min,
            r.hlem_residual_max,
            r.hi_alpha,
        ];
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            out.push_str(&fmt17(v));
            first = false;
        }
        out.push('\n');
    }
    let mut f = fs::File::create(path)?;
    f.write_all(out.as_bytes())?;
    Ok(())
}

fn snapshot_name(t: f64) -> String {
    // Trim trailing zeros so snapshot_2.csv, snapshot_0.5.csv read naturally.
    let mut s = format!("{t}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    format!("snapshot_{s}.csv")
}

fn write_snapshot(path: &Path, grid: &Grid, state: &StateRS, u_half: &[f64]) -> Result<()> {
    let mut out = String::new();
    out.push_str("x,u,R,S\n");
    for k in 0..=grid.n_cells {
        let x = grid.edge(k);
        let r = if k < grid.n_cells { state.r[k] } else { 0.0 };
        let s = if k < grid.n_cells { state.s[k] } else { 0.0 };
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt17(x),
            fmt17(u_half[k]),
            fmt17(r),
            fmt17(s)
        ));
    }
    let mut f = fs::File::create(path)?;
    f.write_all(out.as_bytes())?;
    Ok(())
}

fn evaluate_checks(art: &RunArtifacts, cfg: &SimConfig) -> Vec<CheckOutcome> {
    let mut checks = Vec::new();
    let enabled = &cfg.diag.enabled_checks;
    let records = &art.records;
    let e0 = records[0].energy;
    let tight_energy = art.scheme == SchemeKind::Semidiscrete && art.method == TimeMethod::Rk4;

    if enabled.contains(&CheckKind::EnergyNonincrease) && tight_energy {
        let worst = records
            .iter()
            .map(|r| r.energy - e0)
            .fold(f64::NEG_INFINITY, f64::max);
        checks.push(CheckOutcome {
            name: CheckKind::EnergyNonincrease.name().into(),
            passed: worst <= 1e-7 * e0.max(1e-300),
            detail: format!("max E(t) - E(0) = {worst:.3e}"),
        });
    }
    if enabled.contains(&CheckKind::EnergyLedger) && tight_energy {
        let worst = records
            .iter()
            .map(|r| (r.energy + r.diss_cum - e0).abs())
            .fold(0.0f64, f64::max);
        checks.push(CheckOutcome {
            name: CheckKind::EnergyLedger.name().into(),
            passed: worst <= 1e-7 * e0.max(1e-300),
            detail: format!("max |E + ∫D - E0| = {worst:.3e} (E0 = {e0:.3e})"),
        });
    }
    if enabled.contains(&CheckKind::InvariantDomain) && art.hypothesis_ok {
        let m = art.m_bound.max(1e-30);
        let tol = 1e-8 * m.max(1.0);
        let mut ok = true;
        let mut worst = f64::NEG_INFINITY;
        for r in records {
            let hi = r.r_max.max(r.s_max);
            let lo = r.r_min.min(r.s_min);
            worst = worst.max(hi).max(-m - lo);
            if hi > tol || lo < -m - tol {
                ok = false;
            }
        }
        checks.push(CheckOutcome {
            name: CheckKind::InvariantDomain.name().into(),
            passed: ok,
            detail: format!("M = {m:.3}, worst excursion = {worst:.3e}"),
        });
    }
    if enabled.contains(&CheckKind::LpMonotone) && art.hypothesis_ok && tight_energy {
        // Only p > 1 is monotone: the source term −c̃(R−S)² pushes both
        // invariants down, so the L¹ mass of a nonpositive state grows.
        // The L¹ column is logged but not gated on.
        let mut ok = true;
        let mut worst = 0.0f64;
        for w in records.windows(2) {
            let (a, b) = (w[0].l3, w[1].l3);
            let growth = (b - a) / a.max(1e-300);
            worst = worst.max(growth);
            if b > a * (1.0 + 1e-7) {
                ok = false;
            }
        }
        checks.push(CheckOutcome {
            name: CheckKind::LpMonotone.name().into(),
            passed: ok,
            detail: format!("l3: max relative step growth = {worst:.3e}"),
        });
    }
    if enabled.contains(&CheckKind::HlemResidual) {
        let mut ok = true;
        let mut worst_ratio = 0.0f64;
        for r in records {
            let scale = r
                .r_max
                .abs()
                .max(r.r_min.abs())
                .max(r.s_max.abs())
                .max(r.s_min.abs());
            if scale == 0.0 {
                continue;
            }
            let tol = 1e-11 * scale.powi(3) / art.grid.dx;
            worst_ratio = worst_ratio.max(r.hlem_residual_max / tol.max(1e-300));
            if r.hlem_residual_max > tol {
                ok = false;
            }
        }
        checks.push(CheckOutcome {
            name: CheckKind::HlemResidual.name().into(),
            passed: ok,
            detail: format!("worst residual/tolerance = {worst_ratio:.3e}"),
        });
    }
    checks
}

fn collect_warnings(art: &RunArtifacts) -> Vec<String> {
    let mut warnings = Vec::new();
    if !art.monotone_model {
        warnings.push(
            "wave speed is not monotone (c' changes sign): outside the proven-convergence regime"
                .into(),
        );
    }
    if !art.hypothesis_ok {
        warnings.push(
            "initial data is not nonpositive: invariant-domain and L^p checks are skipped".into(),
        );
    }
    warnings
}

/// Run a configured simulation, writing `series.csv` and one
/// `snapshot_<t>.csv` per requested time into the output directory
/// (`VARWAVE_OUTPUT_DIR` overrides the config value).
pub fn run_simulation(cfg: &SimConfig) -> Result<RunSummary> {
    let art = simulate(cfg)?;
    let dir = std::env::var(OUTPUT_DIR_ENV).unwrap_or_else(|_| cfg.output_dir.clone());
    let dir = PathBuf::from(dir);
    fs::create_dir_all(&dir)?;

    let mut files = Vec::new();
    let series = dir.join("series.csv");
    write_series(&series, &art.records, cfg.every_n_steps)?;
    files.push(series);

    for (t, state, u_half) in &art.snapshots {
        if !cfg.snapshot_times.iter().any(|w| (w - t).abs() < 1e-12) {
            continue;
        }
        let path = dir.join(snapshot_name(*t));
        write_snapshot(&path, &art.grid, state, u_half)?;
        files.push(path);
    }

    let checks = evaluate_checks(&art, cfg);
    let warnings = collect_warnings(&art);
    Ok(RunSummary {
        records: art.records,
        checks,
        warnings,
        files,
        dt: art.dt,
    })
}

/// Invariant suite only: trajectory checks plus seeded random-state checks
/// of the pointwise identities. Writes nothing.
pub fn run_checks(cfg: &SimConfig) -> Result<RunSummary> {
    let art = simulate(cfg)?;
    let mut checks = evaluate_checks(&art, cfg);
    checks.extend(random_state_checks(cfg)?);
    let warnings = collect_warnings(&art);
    Ok(RunSummary {
        records: art.records,
        checks,
        warnings,
        files: Vec::new(),
        dt: art.dt,
    })
}

/// Seeded random-state checks: the chain rule under all three strategies
/// and the per-cell energy identity on both a constant-speed and the
/// arctan model.
fn random_state_checks(cfg: &SimConfig) -> Result<Vec<CheckOutcome>> {
    let grid = Grid::new(cfg.x_min, cfg.x_max, cfg.n_cells.min(64))?;
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let arctan = WaveSpeedModel::arctan();
    let constant = WaveSpeedModel::constant(1.0);

    let mut chain_ok = true;
    let mut chain_worst = 0.0f64;
    for _ in 0..30 {
        let st = random_nonpositive_state(&mut rng, &grid, 2.0);
        for strategy in [
            crate::coefficients::Strategy::ExactF,
            crate::coefficients::Strategy::Balanced,
            crate::coefficients::Strategy::March,
        ] {
            let cf = CoefficientField::from_state(strategy, &arctan, &st, &grid, 0.0)?;
            let mut max_jump = 0.0f64;
            for j in 0..grid.n_cells {
                max_jump = max_jump.max((st.r[j] - st.s[j]).abs());
            }
            let eps = 1e-12 * max_jump.max(1.0);
            for j in 0..grid.n_cells {
                let jump = st.r[j] - st.s[j];
                if jump.abs() <= eps {
                    continue;
                }
                let res = ((cf.c_half[j + 1] - cf.c_half[j]) / grid.dx
                    - 2.0 * cf.tc[j] * jump)
                    .abs();
                chain_worst = chain_worst.max(res);
                if res > 1e-12 * arctan.c_max / grid.dx {
                    chain_ok = false;
                }
            }
        }
    }

    let mut hlem_ok = true;
    let mut hlem_worst = 0.0f64;
    for model in [&constant, &arctan] {
        for _ in 0..30 {
            let st = random_nonpositive_state(&mut rng, &grid, 2.0);
            let ev = rhs(&st, &grid, model, crate::coefficients::Strategy::ExactF)?;
            let res = crate::diagnostics::hlem_residual(&st, &ev, &grid);
            let tol = 1e-11 * st.max_abs().powi(3) / grid.dx;
            hlem_worst = hlem_worst.max(res / tol.max(1e-300));
            if res > tol {
                hlem_ok = false;
            }
        }
    }

    Ok(vec![
        CheckOutcome {
            name: "chain_rule_random".into(),
            passed: chain_ok,
            detail: format!("worst residual = {chain_worst:.3e}"),
        },
        CheckOutcome {
            name: "hlem_random".into(),
            passed: hlem_ok,
            detail: format!("worst residual/tolerance = {hlem_worst:.3e}"),
        },
    ])
}

#[derive(Clone, Debug)]
pub struct RefinementReport {
    /// (n_cells, dx) per level, strictly refining by doubling.
    pub levels: Vec<(usize, f64)>,
    /// L² distance between consecutive levels' u fields at t_end, measured
    /// at the coarse level's edges.
    pub pairwise_l2_u: Vec<f64>,
    /// Mean log2 of consecutive distance ratios.
    pub observed_order: f64,
    pub hi_alpha_per_level: Vec<f64>,
}

/// Run `cfg` at n_cells·2^k for k = 0..levels and measure self-convergence
/// of the u field. Fine levels are restricted to coarse edges by
/// subsampling (edges nest exactly under doubling).
pub fn refinement_study(cfg: &SimConfig, levels: usize) -> Result<RefinementReport> {
    if levels < 3 {
        return Err(Error::Range {
            key: "levels".into(),
            msg: format!("refinement needs at least 3 levels, got {levels}"),
        });
    }

    let runs: Vec<Result<(usize, f64, Vec<f64>, f64)>> = par::map_range(levels, |k| {
        let mut level_cfg = cfg.clone();
        level_cfg.n_cells = cfg.n_cells << k;
        let art = simulate(&level_cfg)?;
        let (_, _, u_half) = art
            .snapshots
            .last()
            .expect("simulate always stores the final snapshot");
        Ok((
            level_cfg.n_cells,
            art.grid.dx,
            u_half.clone(),
            art.records.last().unwrap().hi_alpha,
        ))
    });
    let mut level_data = Vec::with_capacity(levels);
    for r in runs {
        level_data.push(r?);
    }

    let mut pairwise = Vec::new();
    for w in level_data.windows(2) {
        let (n_c, dx_c, u_c, _) = &w[0];
        let (_, _, u_f, _) = &w[1];
        let mut acc = 0.0;
        for i in 0..=*n_c {
            let d = u_c[i] - u_f[2 * i];
            acc += d * d;
        }
        pairwise.push((dx_c * acc).sqrt());
    }

    let mut orders = Vec::new();
    for w in pairwise.windows(2) {
        orders.push((w[0] / w[1]).log2());
    }
    let observed_order = orders.iter().sum::<f64>() / orders.len() as f64;

    Ok(RefinementReport {
        levels: level_data.iter().map(|(n, dx, _, _)| (*n, *dx)).collect(),
        pairwise_l2_u: pairwise,
        observed_order,
        hi_alpha_per_level: level_data.iter().map(|(_, _, _, h)| *h).collect(),
    })
}
