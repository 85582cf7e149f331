use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform `n x n` node lattice of the periodization cell. Node `(ix, iy)`
/// sits at `origin + h (ix, iy)`; arrays are stored with `ix` fastest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    pub n: usize,
    pub h: f64,
    pub origin: [f64; 2],
}

impl GridGeometry {
    /// Cell `[-side/2, side/2)^2` sampled with `n` nodes per side.
    pub fn centered(n: usize, side: f64) -> Self {
        GridGeometry {
            n,
            h: side / n as f64,
            origin: [-0.5 * side, -0.5 * side],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 4 || !self.n.is_power_of_two() {
            return Err(Error::Config(format!(
                "solver grid size {} must be a power of two >= 4",
                self.n
            )));
        }
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(Error::Config(format!(
                "cell size {} must be positive",
                self.h
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn node(&self, ix: usize, iy: usize) -> [f64; 2] {
        [
            self.origin[0] + ix as f64 * self.h,
            self.origin[1] + iy as f64 * self.h,
        ]
    }

    #[inline]
    pub fn node_at(&self, index: usize) -> [f64; 2] {
        self.node(index % self.n, index / self.n)
    }
}

/// How scene contrast is transferred onto solver nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum ContrastSampling {
    /// Point value at each node.
    Nodes,
    /// Second-moment-free box filter estimated from `subsamples^2` points per cell.
    Filtered { subsamples: usize },
}

impl Default for ContrastSampling {
    fn default() -> Self {
        ContrastSampling::Filtered { subsamples: 8 }
    }
}

/// Contrast `eta` on the solver lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct ContrastGrid {
    geometry: GridGeometry,
    eta: Vec<Complex64>,
    support: Vec<usize>,
}

impl ContrastGrid {
    /// Validates the lattice and the wrap-around guard: the nonzero contrast
    /// must span fewer than `n/2` nodes along each axis so that the circular
    /// convolution reproduces the free-space one on the support.
    pub fn new(geometry: GridGeometry, eta: Vec<Complex64>) -> Result<Self> {
        geometry.validate()?;
        if eta.len() != geometry.len() {
            return Err(Error::Config(format!(
                "contrast array has {} entries, grid needs {}",
                eta.len(),
                geometry.len()
            )));
        }
        let n = geometry.n;
        let support: Vec<usize> = eta
            .iter()
            .enumerate()
            .filter(|(_, v)| v.re != 0.0 || v.im != 0.0)
            .map(|(i, _)| i)
            .collect();
        if !support.is_empty() {
            let (mut x0, mut x1, mut y0, mut y1) = (n, 0, n, 0);
            for &i in &support {
                let (ix, iy) = (i % n, i / n);
                x0 = x0.min(ix);
                x1 = x1.max(ix);
                y0 = y0.min(iy);
                y1 = y1.max(iy);
            }
            if x1 - x0 >= n / 2 || y1 - y0 >= n / 2 {
                return Err(Error::Geometry(format!(
                    "contrast support spans {}x{} nodes, more than half of the {n}-node cell",
                    x1 - x0 + 1,
                    y1 - y0 + 1
                )));
            }
        }
        Ok(ContrastGrid {
            geometry,
            eta,
            support,
        })
    }

    pub fn zeros(geometry: GridGeometry) -> Result<Self> {
        Self::new(geometry, vec![Complex64::new(0.0, 0.0); geometry.len()])
    }

    pub fn geometry(&self) -> GridGeometry {
        self.geometry
    }

    pub fn n(&self) -> usize {
        self.geometry.n
    }

    pub fn h(&self) -> f64 {
        self.geometry.h
    }

    pub fn eta(&self) -> &[Complex64] {
        &self.eta
    }

    /// Flat indices of nodes with nonzero contrast, ascending.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    /// Smallest distance from `p` to a node with nonzero contrast.
    pub fn distance_to_support(&self, p: [f64; 2]) -> f64 {
        self.support
            .iter()
            .map(|&i| {
                let y = self.geometry.node_at(i);
                (p[0] - y[0]).hypot(p[1] - y[1])
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Flat index of the node located at `p`, if `p` is a node.
    pub fn index_of_node(&self, p: [f64; 2]) -> Option<usize> {
        let g = self.geometry;
        let fx = (p[0] - g.origin[0]) / g.h;
        let fy = (p[1] - g.origin[1]) / g.h;
        let (ix, iy) = (fx.round(), fy.round());
        let close = (fx - ix).abs() < 1e-9 && (fy - iy).abs() < 1e-9;
        let inside = ix >= 0.0 && iy >= 0.0 && (ix as usize) < g.n && (iy as usize) < g.n;
        (close && inside).then(|| iy as usize * g.n + ix as usize)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.geometry, self.eta.iter().map(|v| v * factor).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_requires_power_of_two() {
        assert!(GridGeometry::centered(100, 8.0).validate().is_err());
        assert!(GridGeometry::centered(256, 8.0).validate().is_ok());
        let g = GridGeometry::centered(256, 8.0);
        assert_eq!(g.h, 1.0 / 32.0);
        assert_eq!(g.node(128, 128), [0.0, 0.0]);
    }

    #[test]
    fn wrap_guard_rejects_wide_support() {
        let g = GridGeometry::centered(16, 8.0);
        let mut eta = vec![Complex64::new(0.0, 0.0); g.len()];
        eta[8 * 16 + 2] = Complex64::new(1.0, 0.0);
        eta[8 * 16 + 9] = Complex64::new(1.0, 0.0);
        assert!(ContrastGrid::new(g, eta.clone()).is_ok());
        eta[8 * 16 + 10] = Complex64::new(1.0, 0.0);
        assert!(matches!(ContrastGrid::new(g, eta), Err(Error::Geometry(_))));
    }
}
