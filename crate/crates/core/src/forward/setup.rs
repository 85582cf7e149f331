use serde::{Deserialize, Serialize};

use super::grid::{ContrastGrid, ContrastSampling, GridGeometry};
use super::solver::{ls_solve_with, SolverOptions, TotalField};
use crate::error::Result;
use crate::scene::{sample_contrast_with, ContrastScene};

/// Discretization knobs for solving a scene.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForwardConfig {
    /// Grid points per side of the periodization cell.
    pub n: usize,
    /// Cell side as a multiple of the scene domain half-width.
    pub cell_factor: f64,
    pub sampling: ContrastSampling,
    pub solver: SolverOptions,
}

impl Default for ForwardConfig {
    fn default() -> Self {
        ForwardConfig {
            n: 256,
            cell_factor: 4.0,
            sampling: ContrastSampling::default(),
            solver: SolverOptions::default(),
        }
    }
}

impl ForwardConfig {
    pub fn with_n(n: usize) -> Self {
        ForwardConfig {
            n,
            ..Default::default()
        }
    }

    /// Cell centered on the scene domain.
    pub fn geometry(&self, scene: &ContrastScene) -> GridGeometry {
        let d = scene.domain;
        let side = self.cell_factor * 0.5 * d.width().max(d.height());
        let c = [0.5 * (d.min[0] + d.max[0]), 0.5 * (d.min[1] + d.max[1])];
        let h = side / self.n as f64;
        GridGeometry {
            n: self.n,
            h,
            origin: [c[0] - 0.5 * side, c[1] - 0.5 * side],
        }
    }
}

/// A solved scene: the sampled contrast and the total field on its grid.
#[derive(Debug, Clone)]
pub struct Solution {
    pub grid: ContrastGrid,
    pub total: TotalField,
}

pub fn solve_scene(
    scene: &ContrastScene,
    k: f64,
    theta: f64,
    cfg: &ForwardConfig,
) -> Result<Solution> {
    scene.validate()?;
    let grid = sample_contrast_with(scene, cfg.geometry(scene), cfg.sampling)?;
    let total = ls_solve_with(&grid, k, theta, &cfg.solver)?;
    Ok(Solution { grid, total })
}
