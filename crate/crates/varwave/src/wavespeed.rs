//! Wave-speed models c(u), their derivatives, the strictly increasing
//! antiderivative F(u) = ∫₀ᵘ 2c(v) dv, and its inverse.
//!
//! Every model guarantees 0 < c_min ≤ c(u) ≤ c_max, so F is one-to-one and
//! u can always be recovered from F(u). Models are immutable and cheap to
//! clone; all evaluation is pure.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;

/// Relative tolerance for F-inversion. Kept three orders of magnitude below
/// any scheme tolerance so inversion error never pollutes convergence data.
pub const INVERT_F_REL_TOL: f64 = 1e-12;

/// Quadrature tolerance for models without a closed-form antiderivative.
/// Tighter than the inversion tolerance so the Newton residual can settle.
const QUAD_REL_TOL: f64 = 1e-13;

pub type SpeedFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum ModelKind {
    /// c(u) = (2/π)(π + arctan u); increasing, c ∈ (1, 3).
    Arctan,
    /// c(u) = sqrt(α cos²u + β sin²u); the planar liquid-crystal speed.
    LiquidCrystal { alpha: f64, beta: f64 },
    /// c(u) = c0.
    Constant { c0: f64 },
    /// User-supplied speed and derivative; F is computed by quadrature.
    Custom { c: SpeedFn, c_prime: SpeedFn },
}

impl fmt::Debug for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::Arctan => write!(f, "Arctan"),
            ModelKind::LiquidCrystal { alpha, beta } => {
                write!(f, "LiquidCrystal {{ alpha: {alpha}, beta: {beta} }}")
            }
            ModelKind::Constant { c0 } => write!(f, "Constant {{ c0: {c0} }}"),
            ModelKind::Custom { .. } => write!(f, "Custom"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct WaveSpeedModel {
    pub kind: ModelKind,
    /// Lower bound C1 for c(u).
    pub c_min: f64,
    /// Upper bound C2 for c(u).
    pub c_max: f64,
    /// Bound M1 for |c'(u)|.
    pub cprime_max: f64,
    /// Whether c'(u) ≥ 0 holds everywhere (the regime the convergence
    /// theory covers). Non-monotone models still run, with a warning at the
    /// CLI level.
    pub monotone: bool,
}

impl WaveSpeedModel {
    pub fn arctan() -> Self {
        WaveSpeedModel {
            kind: ModelKind::Arctan,
            c_min: 1.0,
            c_max: 3.0,
            cprime_max: 2.0 / PI,
            monotone: true,
        }
    }

    /// Panics if `alpha` or `beta` is not strictly positive.
    pub fn liquid_crystal(alpha: f64, beta: f64) -> Self {
        assert!(
            alpha > 0.0 && beta > 0.0,
            "liquid_crystal needs alpha, beta > 0"
        );
        let lo = alpha.min(beta).sqrt();
        let hi = alpha.max(beta).sqrt();
        WaveSpeedModel {
            kind: ModelKind::LiquidCrystal { alpha, beta },
            c_min: lo,
            c_max: hi,
            // |c'| = |β − α| |sin 2u| / (2c) ≤ |β − α| / (2 c_min)
            cprime_max: (beta - alpha).abs() / (2.0 * lo),
            monotone: alpha == beta,
        }
    }

    pub fn constant(c0: f64) -> Self {
        assert!(c0 > 0.0, "constant speed must be positive");
        WaveSpeedModel {
            kind: ModelKind::Constant { c0 },
            c_min: c0,
            c_max: c0,
            cprime_max: 0.0,
            monotone: true,
        }
    }

    pub fn custom(
        c: SpeedFn,
        c_prime: SpeedFn,
        c_min: f64,
        c_max: f64,
        cprime_max: f64,
        monotone: bool,
    ) -> Self {
        assert!(0.0 < c_min && c_min <= c_max);
        WaveSpeedModel {
            kind: ModelKind::Custom { c, c_prime },
            c_min,
            c_max,
            cprime_max,
            monotone,
        }
    }

    /// c(u). Total function.
    pub fn eval_c(&self, u: f64) -> f64 {
        match &self.kind {
            ModelKind::Arctan => (2.0 / PI) * (PI + u.atan()),
            ModelKind::LiquidCrystal { alpha, beta } => {
                let (s, c) = u.sin_cos();
                (alpha * c * c + beta * s * s).sqrt()
            }
            ModelKind::Constant { c0 } => *c0,
            ModelKind::Custom { c, .. } => c(u),
        }
    }

    /// c'(u), from the analytic formula of each model.
    pub fn eval_c_prime(&self, u: f64) -> f64 {
        match &self.kind {
            ModelKind::Arctan => (2.0 / PI) / (1.0 + u * u),
            ModelKind::LiquidCrystal { alpha, beta } => {
                (beta - alpha) * (2.0 * u).sin() / (2.0 * self.eval_c(u))
            }
            ModelKind::Constant { .. } => 0.0,
            ModelKind::Custom { c_prime, .. } => c_prime(u),
        }
    }

    /// F(u) = ∫₀ᵘ 2c(v) dv. Closed form where available, adaptive
    /// quadrature otherwise. F(0) = 0 exactly.
    pub fn eval_f(&self, u: f64) -> Result<f64> {
        if u == 0.0 {
            return Ok(0.0);
        }
        match &self.kind {
            ModelKind::Arctan => {
                // ∫ 2c = 4u + (4/π)(u arctan u − ½ ln(1 + u²))
                Ok(4.0 * u + (4.0 / PI) * (u * u.atan() - 0.5 * (u * u).ln_1p()))
            }
            ModelKind::Constant { c0 } => Ok(2.0 * c0 * u),
            ModelKind::LiquidCrystal { .. } => {
                // c has period π; reduce to one period so the quadrature
                // interval never grows with |u|.
                let k = (u / PI).floor();
                let r = u - k * PI;
                let period = adaptive_simpson(&|v| 2.0 * self.eval_c(v), 0.0, PI, QUAD_REL_TOL)?;
                let rest = adaptive_simpson(&|v| 2.0 * self.eval_c(v), 0.0, r, QUAD_REL_TOL)?;
                Ok(k * period + rest)
            }
            ModelKind::Custom { c, .. } => adaptive_simpson(&|v| 2.0 * c(v), 0.0, u, QUAD_REL_TOL),
        }
    }

    /// Solve F(u) = f for u by safeguarded Newton with a bisection
    /// fallback. The result satisfies |F(u) − f| ≤ 1e−12 · max(1, |f|).
    pub fn invert_f(&self, f: f64) -> Result<f64> {
        if !f.is_finite() {
            return Err(Error::BracketFailure { target: f });
        }
        if f == 0.0 {
            return Ok(0.0);
        }
        let tol = INVERT_F_REL_TOL * f.abs().max(1.0);

        // 2 c_min u ≤ F(u) ≤ 2 c_max u for u > 0 (reversed for u < 0), so
        // the root lies between f/(2 c_max) and f/(2 c_min). Pad slightly
        // and fall back to geometric growth in case a custom model's
        // declared bounds are loose.
        let mut a = f / (2.0 * self.c_max) * 0.99;
        let mut b = f / (2.0 * self.c_min) * 1.01;
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        let mut fa = self.eval_f(a)? - f;
        let mut fb = self.eval_f(b)? - f;
        let mut grow = 1.0;
        while fa * fb > 0.0 {
            grow *= 2.0;
            if grow > 1e9 {
                return Err(Error::BracketFailure { target: f });
            }
            a -= grow;
            b += grow;
            if a.abs() > 1e9 || b.abs() > 1e9 {
                return Err(Error::BracketFailure { target: f });
            }
            fa = self.eval_f(a)? - f;
            fb = self.eval_f(b)? - f;
        }
        if fa == 0.0 {
            return Ok(a);
        }
        if fb == 0.0 {
            return Ok(b);
        }

        let mut x = f / (self.c_min + self.c_max);
        if x <= a || x >= b {
            x = 0.5 * (a + b);
        }
        for _ in 0..200 {
            let fx = self.eval_f(x)? - f;
            if fx.abs() <= tol {
                return Ok(x);
            }
            // Shrink the bracket around the sign change.
            if fx * fa > 0.0 {
                a = x;
                fa = fx;
            } else {
                b = x;
            }
            let newton = x - fx / (2.0 * self.eval_c(x));
            x = if newton > a && newton < b {
                newton
            } else {
                0.5 * (a + b)
            };
            if (b - a).abs() <= f64::EPSILON * x.abs().max(1.0) {
                return Ok(x);
            }
        }
        Err(Error::BracketFailure { target: f })
    }
}
