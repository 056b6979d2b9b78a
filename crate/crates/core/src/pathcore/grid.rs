use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Uniform discretization `s_i = i * t / n` of `[0, t]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid<T> {
    t_horizon: T,
    n_steps: usize,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(t_horizon: T, n_steps: usize) -> Result<Self> {
        if !(t_horizon > T::zero()) || !t_horizon.is_finite() {
            return Err(Error::config(format!(
                "time horizon must be positive and finite, got {t_horizon}"
            )));
        }
        if n_steps < 2 {
            return Err(Error::config(format!(
                "a grid needs at least 2 steps, got {n_steps}"
            )));
        }
        Ok(TimeGrid { t_horizon, n_steps })
    }

    #[inline]
    pub fn t_horizon(&self) -> T {
        self.t_horizon
    }

    #[inline]
    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of nodes, `n_steps + 1`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn step(&self) -> T {
        self.t_horizon / T::from_count(self.n_steps)
    }

    /// `s_i`; the last node is exactly `t_horizon`.
    #[inline]
    pub fn node(&self, i: usize) -> T {
        debug_assert!(i <= self.n_steps);
        if i == self.n_steps {
            self.t_horizon
        } else {
            self.t_horizon * self.fraction(i)
        }
    }

    /// `s_i / t`, exactly 1 at the last node.
    #[inline]
    pub fn fraction(&self, i: usize) -> T {
        T::from_count(i) / T::from_count(self.n_steps)
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..=self.n_steps).map(|i| self.node(i)).collect()
    }

    /// Node closest to `frac * t`, for `frac` in `[0, 1]`.
    pub fn nearest_index(&self, frac: f64) -> usize {
        let raw = (frac * self.n_steps as f64).round();
        (raw.max(0.0) as usize).min(self.n_steps)
    }

    /// Index `k` with `s_k == time` up to a relative tolerance of `1e-9` steps.
    pub fn index_of(&self, time: T) -> Option<usize> {
        let k = (time / self.step()).round();
        let k_us = k.to_usize()?;
        if k_us > self.n_steps {
            return None;
        }
        let off = (time - self.node(k_us)).abs() / self.step();
        (off <= T::lit(1e-9)).then_some(k_us)
    }

    /// The grid over `[0, s_k]` sharing this grid's step.
    pub fn prefix(&self, k: usize) -> Result<Self> {
        if k > self.n_steps {
            return Err(Error::domain(format!(
                "prefix node {k} beyond last node {}",
                self.n_steps
            )));
        }
        TimeGrid::new(self.node(k), k)
    }
}
