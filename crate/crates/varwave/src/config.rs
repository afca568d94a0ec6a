//! Flat `key = value` run configuration.
//!
//! `#` starts a comment, blank lines are skipped, unknown keys are rejected
//! so typos cannot silently change an experiment. Defaults: cfl = 0.45
//! (0.9 for the explicit scheme), method = rk4, coeff_strategy = exact_f,
//! scheme = semidiscrete, u_update = space.

use std::collections::BTreeMap;

use crate::coefficients::Strategy;
use crate::diagnostics::DiagnosticsConfig;
use crate::error::{Error, Result};
use crate::fulldiscrete::UUpdate;
use crate::initial::{Scenario, ScenarioKind};
use crate::semidiscrete::TimeMethod;
use crate::wavespeed::WaveSpeedModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeKind {
    Semidiscrete,
    Explicit,
}

/// Which wave-speed model a config names explicitly (the scenario supplies
/// one otherwise).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModelChoice {
    Arctan,
    LiquidCrystal { alpha: f64, beta: f64 },
    Constant { c0: f64 },
}

impl ModelChoice {
    pub fn build(self) -> WaveSpeedModel {
        match self {
            ModelChoice::Arctan => WaveSpeedModel::arctan(),
            ModelChoice::LiquidCrystal { alpha, beta } => {
                WaveSpeedModel::liquid_crystal(alpha, beta)
            }
            ModelChoice::Constant { c0 } => WaveSpeedModel::constant(c0),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n_cells: usize,
    pub scenario: Scenario,
    pub t_end: f64,
    pub scheme: SchemeKind,
    pub method: TimeMethod,
    pub strategy: Strategy,
    pub u_update: UUpdate,
    pub cfl: f64,
    /// Absolute step override (reproduces the literal Δt = Δx runs).
    pub dt: Option<f64>,
    pub allow_supercritical: bool,
    /// Explicit model override; scenario default when None.
    pub model: Option<ModelChoice>,
    pub diag: DiagnosticsConfig,
    pub every_n_steps: usize,
    pub output_dir: String,
    pub snapshot_times: Vec<f64>,
    pub seed: u64,
}

fn parse_f64(line: usize, key: &str, raw: &str) -> Result<f64> {
    raw.parse::<f64>().map_err(|_| Error::Parse {
        line,
        msg: format!("`{raw}` is not a number (key `{key}`)"),
    })
}

fn parse_bool(line: usize, key: &str, raw: &str) -> Result<bool> {
    match raw {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::Parse {
            line,
            msg: format!("`{raw}` is not `true` or `false` (key `{key}`)"),
        }),
    }
}

/// Parse and validate a configuration. Per-key range checks run as keys are
/// seen; cross-key checks run once the file is read.
pub fn parse_config(text: &str) -> Result<SimConfig> {
    let mut raw: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let stripped = match line.find('#') {
            Some(p) => &line[..p],
            None => line,
        }
        .trim();
        if stripped.is_empty() {
            continue;
        }
        let (key, value) = stripped.split_once('=').ok_or_else(|| Error::Parse {
            line: lineno,
            msg: format!("expected `key = value`, got `{stripped}`"),
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() || value.is_empty() {
            return Err(Error::Parse {
                line: lineno,
                msg: "empty key or value".into(),
            });
        }
        if raw.insert(key.clone(), (lineno, value)).is_some() {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("duplicate key `{key}`"),
            });
        }
    }

    const KNOWN: &[&str] = &[
        "x_min",
        "x_max",
        "n_cells",
        "scenario",
        "t_end",
        "scheme",
        "method",
        "coeff_strategy",
        "u_update",
        "cfl",
        "dt",
        "allow_supercritical",
        "model",
        "model.alpha",
        "model.beta",
        "model.c0",
        "diag.alpha",
        "diag.window_a",
        "diag.window_b",
        "diag.every_n_steps",
        "output_dir",
        "snapshot_times",
        "seed",
    ];
    for (key, (line, _)) in &raw {
        if !KNOWN.contains(&key.as_str()) && !key.starts_with("scenario.") {
            return Err(Error::UnknownKey {
                line: *line,
                key: key.clone(),
            });
        }
    }

    let take = |key: &str| raw.get(key).cloned();
    let require = |key: &str| raw.get(key).cloned().ok_or(Error::MissingKey(key.into()));

    // Per-key range checks fire even in fragmentary configs, before the
    // required-key completeness check.
    if let Some((line, v)) = take("cfl") {
        let cfl = parse_f64(line, "cfl", &v)?;
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(Error::Range {
                key: "cfl".into(),
                msg: format!("must lie in (0, 1], got {cfl}"),
            });
        }
    }
    if let Some((line, v)) = take("t_end") {
        let t_end = parse_f64(line, "t_end", &v)?;
        if !(t_end > 0.0) {
            return Err(Error::Range {
                key: "t_end".into(),
                msg: format!("must be positive, got {t_end}"),
            });
        }
    }
    if let Some((line, v)) = take("dt") {
        let dt = parse_f64(line, "dt", &v)?;
        if !(dt > 0.0) {
            return Err(Error::Range {
                key: "dt".into(),
                msg: format!("must be positive, got {dt}"),
            });
        }
    }
    if let Some((line, v)) = take("diag.alpha") {
        let alpha = parse_f64(line, "diag.alpha", &v)?;
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::Range {
                key: "diag.alpha".into(),
                msg: format!("must lie in [0, 1), got {alpha}"),
            });
        }
    }

    let (line, v) = require("scenario")?;
    let kind = ScenarioKind::parse(&v).map_err(|e| match e {
        Error::UnknownScenario(s) => Error::Parse {
            line,
            msg: format!("unknown scenario `{s}`"),
        },
        other => other,
    })?;
    let mut scenario = Scenario::new(kind);
    for (key, (_, value)) in &raw {
        if let Some(param) = key.strip_prefix("scenario.") {
            let (line, _) = raw[key.as_str()];
            scenario.set_param(param, parse_f64(line, key, value)?)?;
        }
    }

    let (line, v) = require("t_end")?;
    let t_end = parse_f64(line, "t_end", &v)?;
    if !(t_end > 0.0) {
        return Err(Error::Range {
            key: "t_end".into(),
            msg: format!("must be positive, got {t_end}"),
        });
    }

    let (line, v) = require("n_cells")?;
    let n_cells = v.parse::<usize>().map_err(|_| Error::Parse {
        line,
        msg: format!("`{v}` is not a cell count"),
    })?;
    if n_cells < 3 {
        return Err(Error::Range {
            key: "n_cells".into(),
            msg: format!("must be at least 3, got {n_cells}"),
        });
    }

    let (line, v) = require("x_min")?;
    let x_min = parse_f64(line, "x_min", &v)?;
    let (line, v) = require("x_max")?;
    let x_max = parse_f64(line, "x_max", &v)?;
    if !(x_max > x_min) {
        return Err(Error::Range {
            key: "x_max".into(),
            msg: format!("x_max ({x_max}) must exceed x_min ({x_min})"),
        });
    }

    let scheme = match take("scheme") {
        None => SchemeKind::Semidiscrete,
        Some((line, v)) => match v.as_str() {
            "semidiscrete" => SchemeKind::Semidiscrete,
            "explicit" => SchemeKind::Explicit,
            other => {
                return Err(Error::Parse {
                    line,
                    msg: format!("scheme must be semidiscrete|explicit, got `{other}`"),
                })
            }
        },
    };

    let method = match take("method") {
        None => TimeMethod::Rk4,
        Some((line, v)) => match v.as_str() {
            "euler" => TimeMethod::Euler,
            "rk4" => TimeMethod::Rk4,
            other => {
                return Err(Error::Parse {
                    line,
                    msg: format!("method must be euler|rk4, got `{other}`"),
                })
            }
        },
    };

    let strategy = match take("coeff_strategy") {
        None => Strategy::ExactF,
        Some((line, v)) => match v.as_str() {
            "exact_f" => Strategy::ExactF,
            "balanced" => Strategy::Balanced,
            "march" => Strategy::March,
            other => {
                return Err(Error::Parse {
                    line,
                    msg: format!("coeff_strategy must be exact_f|balanced|march, got `{other}`"),
                })
            }
        },
    };

    let u_update = match take("u_update") {
        None => UUpdate::SpaceIntegrate,
        Some((line, v)) => match v.as_str() {
            "time" => UUpdate::TimeIntegrate,
            "space" => UUpdate::SpaceIntegrate,
            other => {
                return Err(Error::Parse {
                    line,
                    msg: format!("u_update must be time|space, got `{other}`"),
                })
            }
        },
    };

    let allow_supercritical = match take("allow_supercritical") {
        None => false,
        Some((line, v)) => parse_bool(line, "allow_supercritical", &v)?,
    };

    let cfl = match take("cfl") {
        None => match scheme {
            SchemeKind::Semidiscrete => 0.45,
            SchemeKind::Explicit => 0.9,
        },
        Some((line, v)) => {
            let cfl = parse_f64(line, "cfl", &v)?;
            if !(cfl > 0.0 && cfl <= 1.0) {
                return Err(Error::Range {
                    key: "cfl".into(),
                    msg: format!("must lie in (0, 1], got {cfl}"),
                });
            }
            cfl
        }
    };

    let dt = match take("dt") {
        None => None,
        Some((line, v)) => {
            let dt = parse_f64(line, "dt", &v)?;
            if !(dt > 0.0) {
                return Err(Error::Range {
                    key: "dt".into(),
                    msg: format!("must be positive, got {dt}"),
                });
            }
            Some(dt)
        }
    };

    let model = match take("model") {
        None => None,
        Some((line, v)) => Some(match v.as_str() {
            "arctan" => ModelChoice::Arctan,
            "liquid_crystal" => {
                let alpha = match take("model.alpha") {
                    Some((l, v)) => parse_f64(l, "model.alpha", &v)?,
                    None => 1.5,
                };
                let beta = match take("model.beta") {
                    Some((l, v)) => parse_f64(l, "model.beta", &v)?,
                    None => 0.5,
                };
                if alpha <= 0.0 || beta <= 0.0 {
                    return Err(Error::Range {
                        key: "model.alpha".into(),
                        msg: "alpha and beta must be positive".into(),
                    });
                }
                ModelChoice::LiquidCrystal { alpha, beta }
            }
            "constant" => {
                let c0 = match take("model.c0") {
                    Some((l, v)) => parse_f64(l, "model.c0", &v)?,
                    None => 1.0,
                };
                if c0 <= 0.0 {
                    return Err(Error::Range {
                        key: "model.c0".into(),
                        msg: format!("must be positive, got {c0}"),
                    });
                }
                ModelChoice::Constant { c0 }
            }
            other => {
                return Err(Error::Parse {
                    line,
                    msg: format!("model must be arctan|liquid_crystal|constant, got `{other}`"),
                })
            }
        }),
    };

    let mut diag = DiagnosticsConfig::default();
    if let Some((line, v)) = take("diag.alpha") {
        diag.alpha = parse_f64(line, "diag.alpha", &v)?;
        if !(0.0..1.0).contains(&diag.alpha) {
            return Err(Error::Range {
                key: "diag.alpha".into(),
                msg: format!("must lie in [0, 1), got {}", diag.alpha),
            });
        }
    }
    if let Some((line, v)) = take("diag.window_a") {
        diag.window_a = parse_f64(line, "diag.window_a", &v)?;
    }
    if let Some((line, v)) = take("diag.window_b") {
        diag.window_b = parse_f64(line, "diag.window_b", &v)?;
    }
    if diag.window_a >= diag.window_b {
        return Err(Error::Range {
            key: "diag.window_a".into(),
            msg: "window_a must be below window_b".into(),
        });
    }

    let every_n_steps = match take("diag.every_n_steps") {
        None => 1,
        Some((line, v)) => {
            let n = v.parse::<usize>().map_err(|_| Error::Parse {
                line,
                msg: format!("`{v}` is not a step count"),
            })?;
            if n == 0 {
                return Err(Error::Range {
                    key: "diag.every_n_steps".into(),
                    msg: "must be at least 1".into(),
                });
            }
            n
        }
    };

    let output_dir = match take("output_dir") {
        None => "out".to_string(),
        Some((_, v)) => v,
    };

    let snapshot_times = match take("snapshot_times") {
        None => Vec::new(),
        Some((line, v)) => {
            let mut times = Vec::new();
            for piece in v.split(',') {
                let t = parse_f64(line, "snapshot_times", piece.trim())?;
                if !(0.0..=t_end).contains(&t) {
                    return Err(Error::Range {
                        key: "snapshot_times".into(),
                        msg: format!("snapshot time {t} outside [0, {t_end}]"),
                    });
                }
                times.push(t);
            }
            times.sort_by(|a, b| a.partial_cmp(b).unwrap());
            times.dedup();
            times
        }
    };

    let seed = match take("seed") {
        None => 0,
        Some((line, v)) => v.parse::<u64>().map_err(|_| Error::Parse {
            line,
            msg: format!("`{v}` is not a seed"),
        })?,
    };

    Ok(SimConfig {
        x_min,
        x_max,
        n_cells,
        scenario,
        t_end,
        scheme,
        method,
        strategy,
        u_update,
        cfl,
        dt,
        allow_supercritical,
        model,
        diag,
        every_n_steps,
        output_dir,
        snapshot_times,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "n_cells = 256\nx_min = -15\nx_max = 15\nscenario = gauss_rs_neg\nt_end = 2";

    #[test]
    fn reference_resolution_config() {
        let cfg = parse_config(BASE).unwrap();
        assert_eq!(cfg.n_cells, 256);
        assert_eq!((cfg.x_max - cfg.x_min) / cfg.n_cells as f64, 30.0 / 256.0);
        assert_eq!(cfg.cfl, 0.45);
        assert_eq!(cfg.method, TimeMethod::Rk4);
        assert_eq!(cfg.strategy, Strategy::ExactF);
        assert_eq!(cfg.scheme, SchemeKind::Semidiscrete);
    }

    #[test]
    fn cfl_out_of_range() {
        let text = format!("{BASE}\ncfl = 1.5");
        assert!(matches!(
            parse_config(&text),
            Err(Error::Range { key, .. }) if key == "cfl"
        ));
        // The per-key check fires even if required keys are absent.
        assert!(matches!(
            parse_config("cfl = 1.5"),
            Err(Error::Range { key, .. }) if key == "cfl"
        ));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{BASE}\nbogus = 1");
        assert!(matches!(
            parse_config(&text),
            Err(Error::UnknownKey { key, .. }) if key == "bogus"
        ));
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = format!("# run setup\n\n{BASE}\ncfl = 0.3 # tighter step\n");
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.cfl, 0.3);
    }

    #[test]
    fn missing_required_key() {
        assert!(matches!(
            parse_config("scenario = gauss_rs\nt_end = 1"),
            Err(Error::MissingKey(k)) if k == "n_cells"
        ));
    }

    #[test]
    fn parse_error_carries_line_number() {
        let text = "n_cells = 256\nnot a key value\n";
        match parse_config(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn snapshot_times_validated_against_t_end() {
        let text = format!("{BASE}\nsnapshot_times = 0, 1, 3");
        assert!(matches!(
            parse_config(&text),
            Err(Error::Range { key, .. }) if key == "snapshot_times"
        ));
        let text = format!("{BASE}\nsnapshot_times = 0, 1, 2");
        assert_eq!(parse_config(&text).unwrap().snapshot_times, vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn scenario_overrides_and_explicit_scheme_defaults() {
        let text = format!("{BASE}\nscenario.r_amp = 0\nscheme = explicit");
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.scenario.params["r_amp"], 0.0);
        assert_eq!(cfg.cfl, 0.9);
        assert_eq!(cfg.u_update, UUpdate::SpaceIntegrate);
    }

    #[test]
    fn model_override() {
        let text = format!("{BASE}\nmodel = constant\nmodel.c0 = 2.0");
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.model, Some(ModelChoice::Constant { c0: 2.0 }));
    }

    #[test]
    fn duplicate_key_is_a_parse_error() {
        let text = format!("{BASE}\ncfl = 0.4\ncfl = 0.5");
        assert!(matches!(parse_config(&text), Err(Error::Parse { .. })));
    }
}
