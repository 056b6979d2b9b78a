use crate::error::{Error, Result};
use crate::functionals::QuadRule;
use crate::pathcore::TimeGrid;
use crate::scalar::Real;

/// Values `phi(s_i)` of a continuous path on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Path<T> {
    grid: TimeGrid<T>,
    values: Vec<T>,
}

impl<T: Real> Path<T> {
    pub fn new(grid: TimeGrid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::config(format!(
                "path has {} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Overflow { what: "path value", node: i });
        }
        Ok(Path { grid, values })
    }

    /// Samples `f(s_i)` at every node.
    pub fn from_fn(grid: TimeGrid<T>, f: impl Fn(T) -> T) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(grid.node(i))).collect();
        Path::new(grid, values)
    }

    pub(crate) fn from_raw(grid: TimeGrid<T>, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Path { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn at(&self, i: usize) -> T {
        self.values[i]
    }

    #[inline]
    pub fn terminal(&self) -> T {
        self.values[self.grid.n_steps()]
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// Restriction to `[0, s_k]`.
    pub fn prefix(&self, k: usize) -> Result<Self> {
        let grid = self.grid.prefix(k)?;
        Ok(Path::from_raw(grid, self.values[..=k].to_vec()))
    }
}

/// How the `A` values of an [`AugmentedPath`] were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AProvenance {
    /// Cumulative quadrature of `exp(2 * phi)` with the given rule.
    Quadrature(QuadRule),
    /// Carried through a transformation by its closed-form rule.
    RulePropagated,
}

/// A path together with its exponential functional `A_s = int_0^s exp(2 phi_u) du`
/// on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedPath<T> {
    path: Path<T>,
    a_values: Vec<T>,
    provenance: AProvenance,
}

impl<T: Real> AugmentedPath<T> {
    /// Checked constructor: `A_0 = 0`, `A` finite and strictly increasing.
    pub fn new(path: Path<T>, a_values: Vec<T>, provenance: AProvenance) -> Result<Self> {
        if a_values.len() != path.grid().len() {
            return Err(Error::config(format!(
                "{} A values for a grid of {} nodes",
                a_values.len(),
                path.grid().len()
            )));
        }
        if a_values[0] != T::zero() {
            return Err(Error::domain("A must vanish at the origin"));
        }
        for i in 1..a_values.len() {
            if !a_values[i].is_finite() {
                return Err(Error::Overflow { what: "exponential functional", node: i });
            }
            if !(a_values[i] > a_values[i - 1]) {
                return Err(Error::domain(format!("A is not strictly increasing at node {i}")));
            }
        }
        Ok(AugmentedPath { path, a_values, provenance })
    }

    pub(crate) fn from_raw(path: Path<T>, a_values: Vec<T>, provenance: AProvenance) -> Self {
        debug_assert_eq!(a_values.len(), path.grid().len());
        AugmentedPath { path, a_values, provenance }
    }

    #[inline]
    pub fn path(&self) -> &Path<T> {
        &self.path
    }

    #[inline]
    pub fn grid(&self) -> &TimeGrid<T> {
        self.path.grid()
    }

    #[inline]
    pub fn phi(&self) -> &[T] {
        self.path.values()
    }

    #[inline]
    pub fn a(&self) -> &[T] {
        &self.a_values
    }

    #[inline]
    pub fn provenance(&self) -> AProvenance {
        self.provenance
    }

    #[inline]
    pub fn n_steps(&self) -> usize {
        self.grid().n_steps()
    }

    #[inline]
    pub fn terminal_phi(&self) -> T {
        self.path.terminal()
    }

    #[inline]
    pub fn terminal_a(&self) -> T {
        self.a_values[self.n_steps()]
    }

    /// Restriction to `[0, s_k]`; `A` on the prefix is unchanged.
    pub fn prefix(&self, k: usize) -> Result<Self> {
        let path = self.path.prefix(k)?;
        Ok(AugmentedPath {
            path,
            a_values: self.a_values[..=k].to_vec(),
            provenance: self.provenance,
        })
    }

    pub fn into_parts(self) -> (Path<T>, Vec<T>, AProvenance) {
        (self.path, self.a_values, self.provenance)
    }
}
