//! Time averages of the Dirichlet polynomial `D_N(t) = Σ_{n ≤ N} n^{−it}`.
//!
//! The average of `|D_N(t)|^q` over `[0, T]` is taken with the composite
//! midpoint rule. The grid is cut into fixed blocks; inside a block each term
//! `n^{−it}` is advanced by multiplying with `n^{−i·step}`, and every block
//! restarts from an exact `cos`/`sin` evaluation. Block partial sums are
//! combined in block order.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LabError, Result};

const BLOCK: usize = 1024;

#[derive(Debug, Clone)]
pub struct DirichletGrid {
    n: usize,
    t_max: f64,
    step: f64,
    logs: Vec<f64>,
}

impl DirichletGrid {
    /// Grid over `[0, t_max]` with the default spacing `π / (4 log N)`.
    pub fn new(n: usize, t_max: f64) -> Result<Self> {
        Self::with_step(n, t_max, Self::default_step(n))
    }

    pub fn default_step(n: usize) -> f64 {
        if n < 2 {
            0.5
        } else {
            std::f64::consts::PI / (4.0 * (n as f64).ln())
        }
    }

    /// Largest spacing that resolves the fastest term `N^{−it}`.
    pub fn max_step(n: usize) -> f64 {
        if n < 2 {
            f64::INFINITY
        } else {
            std::f64::consts::PI / (n as f64).ln()
        }
    }

    pub fn with_step(n: usize, t_max: f64, step: f64) -> Result<Self> {
        if n == 0 {
            return Err(LabError::Domain("Dirichlet sum needs N ≥ 1".into()));
        }
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(LabError::Domain(format!("T must be positive, got {t_max}")));
        }
        if !(step > 0.0) || step > Self::max_step(n) {
            return Err(LabError::Domain(format!(
                "step {step} must lie in (0, π / log N = {}]",
                Self::max_step(n)
            )));
        }
        if step > t_max {
            return Err(LabError::Domain(format!("step {step} exceeds T = {t_max}")));
        }
        Ok(Self {
            n,
            t_max,
            step,
            logs: (1..=n).map(|k| (k as f64).ln()).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Number of midpoints `t_j = (j + ½)·step`, `j < ⌊T / step⌋`.
    pub fn points(&self) -> usize {
        (self.t_max / self.step).floor() as usize
    }

    /// `D_N(t)` by direct summation.
    pub fn dirichlet_sum(&self, t: f64) -> Complex64 {
        self.logs
            .iter()
            .map(|&l| {
                let (s, c) = (t * l).sin_cos();
                Complex64::new(c, -s)
            })
            .sum()
    }

    /// Applies `f` to `|D_N(t_j)|` for every grid point and returns the block
    /// results in grid order.
    fn map_blocks<T, F>(&self, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&[f64]) -> T + Sync,
    {
        let points = self.points();
        let blocks = points.div_ceil(BLOCK);
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let start = b * BLOCK;
                let len = BLOCK.min(points - start);
                let t0 = (start as f64 + 0.5) * self.step;
                let mut acc = vec![Complex64::new(0.0, 0.0); len];
                for &l in &self.logs {
                    let (s0, c0) = (t0 * l).sin_cos();
                    let (ds, dc) = (self.step * l).sin_cos();
                    let mut z = Complex64::new(c0, -s0);
                    let w = Complex64::new(dc, -ds);
                    for a in acc.iter_mut() {
                        *a += z;
                        z *= w;
                    }
                }
                let mods: Vec<f64> = acc.iter().map(|a| a.norm()).collect();
                f(&mods)
            })
            .collect()
    }

    /// Midpoint-rule average of `|D_N(t)|^q` over `[0, T]`.
    pub fn time_average_moment(&self, q: f64) -> Result<TimeAverage> {
        if !(q > 0.0) {
            return Err(LabError::Domain(format!("q must be positive, got {q}")));
        }
        let blocks = self.map_blocks(|mods| {
            let sum: f64 = mods.iter().map(|m| m.powf(q)).sum();
            let max = mods.iter().copied().fold(0.0, f64::max);
            (sum, max)
        });
        let (mut total, mut max_abs) = (0.0, 0.0f64);
        for (s, m) in blocks {
            total += s;
            max_abs = max_abs.max(m);
        }
        let points = self.points();
        Ok(TimeAverage {
            n: self.n,
            q,
            t_max: self.t_max,
            step: self.step,
            points,
            value: total / points as f64,
            max_abs,
        })
    }

    /// Fraction of grid points with `|D_N(t)| ≥ threshold`.
    pub fn large_values_fraction(&self, threshold: f64) -> Result<f64> {
        if !(threshold >= 0.0) {
            return Err(LabError::Domain(format!(
                "threshold must be non-negative, got {threshold}"
            )));
        }
        let hits: usize = self
            .map_blocks(|mods| mods.iter().filter(|&&m| m >= threshold).count())
            .into_iter()
            .sum();
        Ok(hits as f64 / self.points() as f64)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TimeAverage {
    pub n: usize,
    pub q: f64,
    pub t_max: f64,
    pub step: f64,
    pub points: usize,
    pub value: f64,
    /// Largest `|D_N(t_j)|` seen on the grid.
    pub max_abs: f64,
}
