//! Uniform 1-D grid, the (R, S) state container, piecewise-constant
//! extension, cell-average projection and discrete norms.
//!
//! The grid replaces the infinite line with a finite interval; everything
//! outside it is a ghost region where R = S = 0, matching rapidly decaying
//! data and the boundary condition u → 0 as x → −∞. Cells are half-open,
//! I_j = [x_{j−1/2}, x_{j+1/2}), which fixes edge ties deterministically.

use crate::error::{Error, Result};
use crate::par;

// 5-point Gauss–Legendre rule on [-1, 1]; exact through degree 9.
const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_08,
    0.478_628_670_499_366_47,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
];

#[derive(Clone, Debug)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_cells: usize,
    /// Uniform spacing, computed once at construction and reused everywhere.
    pub dx: f64,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_cells: usize) -> Result<Self> {
        if !(x_max > x_min) {
            return Err(Error::InvalidGrid(format!(
                "x_max ({x_max}) must exceed x_min ({x_min})"
            )));
        }
        if n_cells < 3 {
            return Err(Error::InvalidGrid(format!(
                "n_cells must be at least 3, got {n_cells}"
            )));
        }
        Ok(Grid {
            x_min,
            x_max,
            n_cells,
            dx: (x_max - x_min) / n_cells as f64,
        })
    }

    /// Center of cell j.
    #[inline]
    pub fn cell_center(&self, j: usize) -> f64 {
        self.x_min + (j as f64 + 0.5) * self.dx
    }

    /// Edge k sits at x_min + k·dx; edge k is the left edge of cell k, so
    /// edges run k = 0..=n_cells.
    #[inline]
    pub fn edge(&self, k: usize) -> f64 {
        self.x_min + k as f64 * self.dx
    }

    /// Cell averages φ_j = (1/Δx) ∫_{I_j} φ dx by 5-point Gauss–Legendre.
    pub fn project_cell_averages<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn(f64) -> f64 + Sync,
    {
        let half = 0.5 * self.dx;
        par::map_range(self.n_cells, |j| {
            let mid = self.cell_center(j);
            let mut acc = 0.0;
            for (node, w) in GL5_NODES.iter().zip(GL5_WEIGHTS.iter()) {
                acc += w * f(mid + half * node);
            }
            0.5 * acc
        })
    }

    /// Value of the piecewise-constant extension at x; zero outside the grid.
    pub fn piecewise_eval(&self, values: &[f64], x: f64) -> f64 {
        if x < self.x_min || x >= self.x_max {
            return 0.0;
        }
        let j = ((x - self.x_min) / self.dx) as usize;
        values[j.min(self.n_cells - 1)]
    }

    /// (Δx Σ_j |v_j|^p)^{1/p}, summed in ascending j for reproducibility.
    pub fn lp_norm(&self, values: &[f64], p: f64) -> f64 {
        assert!(p >= 1.0, "lp_norm needs p >= 1");
        let mut acc = 0.0;
        if p == 1.0 {
            for v in values {
                acc += v.abs();
            }
            return self.dx * acc;
        }
        if p == 2.0 {
            for v in values {
                acc += v * v;
            }
            return (self.dx * acc).sqrt();
        }
        for v in values {
            acc += v.abs().powf(p);
        }
        (self.dx * acc).powf(1.0 / p)
    }
}

/// Riemann-invariant state (R_j, S_j) at one time level.
#[derive(Clone, Debug)]
pub struct StateRS {
    pub t: f64,
    pub r: Vec<f64>,
    pub s: Vec<f64>,
}

impl StateRS {
    pub fn new(t: f64, r: Vec<f64>, s: Vec<f64>) -> Self {
        assert_eq!(r.len(), s.len());
        StateRS { t, r, s }
    }

    pub fn zeros(n: usize) -> Self {
        StateRS {
            t: 0.0,
            r: vec![0.0; n],
            s: vec![0.0; n],
        }
    }

    pub fn n_cells(&self) -> usize {
        self.r.len()
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for v in self.r.iter().chain(self.s.iter()) {
            m = m.max(v.abs());
        }
        m
    }

    pub fn all_finite(&self) -> bool {
        self.r.iter().chain(self.s.iter()).all(|v| v.is_finite())
    }
}
