//! Sampled fields on one-dimensional grids, with quadrature weights attached.

use crate::error::{Error, Result};

/// Spatial domain of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// The whole real line (grid covers a finite window, field assumed
    /// negligible outside).
    RealLine,
    /// The open half-line (0, ∞).
    HalfLine,
}

/// A one-dimensional grid with paired quadrature weights, so that
/// `Σ w_i f(x_i)` approximates the integral of `f` over the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub domain: Domain,
}

impl Grid {
    /// Uniform grid on [a, b] with trapezoid weights. For smooth fields that
    /// decay below round-off at the window ends this is spectrally accurate.
    pub fn uniform(a: f64, b: f64, n: usize, domain: Domain) -> Result<Grid> {
        if !(b > a) || n < 2 {
            return Err(Error::invalid("grid window must satisfy b > a, n >= 2"));
        }
        let h = (b - a) / (n - 1) as f64;
        let points: Vec<f64> = (0..n).map(|i| a + h * i as f64).collect();
        let mut weights = vec![h; n];
        weights[0] = h / 2.0;
        weights[n - 1] = h / 2.0;
        Ok(Grid {
            points,
            weights,
            domain,
        })
    }

    /// Grid from explicit strictly increasing points, with trapezoid weights
    /// for the (possibly non-uniform) spacing.
    pub fn from_points(points: Vec<f64>, domain: Domain) -> Result<Grid> {
        if points.len() < 2 {
            return Err(Error::invalid("need at least two grid points"));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("grid points must be strictly increasing"));
        }
        if domain == Domain::HalfLine && points[0] <= 0.0 {
            return Err(Error::invalid("half-line grid points must be positive"));
        }
        let n = points.len();
        let mut weights = vec![0.0; n];
        for i in 0..n - 1 {
            let h = points[i + 1] - points[i];
            weights[i] += h / 2.0;
            weights[i + 1] += h / 2.0;
        }
        Ok(Grid {
            points,
            weights,
            domain,
        })
    }

    /// Geometric (log-spaced) grid on [a, b] with a > 0.
    pub fn geometric(a: f64, b: f64, n: usize, domain: Domain) -> Result<Grid> {
        if !(a > 0.0) || !(b > a) || n < 2 {
            return Err(Error::invalid("geometric grid needs 0 < a < b, n >= 2"));
        }
        let r = (b / a).ln() / (n - 1) as f64;
        let points = (0..n).map(|i| a * (r * i as f64).exp()).collect();
        Grid::from_points(points, domain)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Quadrature of a scalar function sampled on this grid.
    pub fn integrate_samples(&self, values: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(values)
            .map(|(w, v)| w * v)
            .sum()
    }
}

/// A B-valued function sampled on a grid; `values[i]` is the vector value at
/// `grid.points[i]`. Scalar fields have component dimension 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    pub grid: Grid,
    pub values: Vec<Vec<f64>>,
}

impl SampledField {
    pub fn new(grid: Grid, values: Vec<Vec<f64>>) -> Result<SampledField> {
        if values.len() != grid.len() {
            return Err(Error::invalid("value count does not match grid"));
        }
        let dim = values.first().map(|v| v.len()).unwrap_or(0);
        if dim == 0 || values.iter().any(|v| v.len() != dim) {
            return Err(Error::invalid("all values must share a positive dimension"));
        }
        Ok(SampledField { grid, values })
    }

    pub fn scalar(grid: Grid, samples: Vec<f64>) -> Result<SampledField> {
        let values = samples.into_iter().map(|v| vec![v]).collect();
        SampledField::new(grid, values)
    }

    /// Sample a scalar function on the grid.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> SampledField {
        let values = grid.points.iter().map(|&x| vec![f(x)]).collect();
        SampledField { grid, values }
    }

    pub fn zeros(grid: Grid, dim: usize) -> SampledField {
        let values = vec![vec![0.0; dim]; grid.len()];
        SampledField { grid, values }
    }

    /// Component dimension of the target space B.
    pub fn dim(&self) -> usize {
        self.values.first().map(|v| v.len()).unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Scalar samples of component j.
    pub fn component(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[j]).collect()
    }

    /// L² inner product ∫ f·g (Euclidean dot in B) by grid quadrature.
    pub fn inner(&self, other: &SampledField) -> f64 {
        self.grid
            .weights
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(w, (a, b))| w * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>())
            .sum()
    }

    /// L^q norm with a pointwise B-norm supplied by the caller.
    pub fn lq_norm(&self, q: f64, bnorm: impl Fn(&[f64]) -> f64) -> f64 {
        let s: f64 = self
            .grid
            .weights
            .iter()
            .zip(&self.values)
            .map(|(w, v)| w * bnorm(v).powf(q))
            .sum();
        s.powf(1.0 / q)
    }

    /// Euclidean L² norm.
    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    /// Pointwise linear combination a·self + b·other (same grid assumed).
    pub fn axpy(&self, a: f64, other: &SampledField, b: f64) -> SampledField {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(u, v)| u.iter().zip(v).map(|(x, y)| a * x + b * y).collect())
            .collect();
        SampledField {
            grid: self.grid.clone(),
            values,
        }
    }
}
