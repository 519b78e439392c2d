//! Metrics shared by the experiment runners: training error, evaluation
//! grids on the unit square, and block recovery for the denoising signal.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::functions::{GridSignalSpec, SampleSet, ScaleTransform};
use crate::tree::PwPolyModel;

/// Default evaluation grid resolution.
pub const DEFAULT_RESOLUTION: usize = 101;

/// Values on a `resolution x resolution` lattice of the unit square. Row `i`
/// holds `x2 = i / (resolution - 1)`, column `j` holds `x1 = j / (resolution - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub resolution: usize,
    pub values: Vec<f64>,
}

impl Grid {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.resolution + col]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.resolution)
    }

    /// Lattice points without a prediction.
    pub fn uncovered(&self) -> usize {
        self.values.iter().filter(|v| v.is_nan()).count()
    }
}

fn lattice(resolution: usize) -> Result<impl Iterator<Item = [f64; 2]>> {
    if resolution < 2 {
        return Err(Error::InvalidInput(format!("grid resolution must be at least 2, got {resolution}")));
    }
    let step = 1.0 / (resolution - 1) as f64;
    Ok((0..resolution).flat_map(move |i| (0..resolution).map(move |j| [j as f64 * step, i as f64 * step])))
}

/// Predictions of a two-dimensional model over the unit square. A lattice
/// point routed to an empty leaf has no prediction and holds NaN.
pub fn eval_grid(model: &PwPolyModel, resolution: usize) -> Result<Grid> {
    if model.dim() != 2 {
        return Err(Error::InvalidInput(format!("grids are two-dimensional, the model has dimension {}", model.dim())));
    }
    let values = lattice(resolution)?
        .map(|u| match model.predict(&u) {
            Err(Error::InactiveLeaf { .. }) => Ok(f64::NAN),
            other => other,
        })
        .collect::<Result<_>>()?;
    Ok(Grid { resolution, values })
}


/// `f` evaluated at the original-domain image of every lattice point.
pub fn truth_grid<F: Fn(&[f64]) -> f64>(f: F, transform: &ScaleTransform, resolution: usize) -> Result<Grid> {
    if transform.center.len() != 2 {
        return Err(Error::InvalidInput("grids are two-dimensional".into()));
    }
    let values = lattice(resolution)?.map(|u| f(&transform.from_unit(&u))).collect();
    Ok(Grid { resolution, values })
}

pub fn sup_norm_error(a: &Grid, b: &Grid) -> Result<f64> {
    if a.resolution != b.resolution {
        return Err(Error::LengthMismatch { expected: a.resolution, found: b.resolution });
    }
    // NaN cells are skipped: `f64::max` ignores a NaN operand.
    Ok(a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

/// Mean absolute residual of `model` on the samples.
pub fn training_mae(model: &PwPolyModel, samples: &SampleSet) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut total = 0.0;
    for i in 0..samples.len() {
        total += (samples.value(i) - model.predict(samples.point(i))?).abs();
    }
    Ok(total / samples.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockEstimate {
    pub truth: f64,
    /// Mean prediction over the block's cells.
    pub recovered: f64,
    pub cells: usize,
    /// `|recovered - truth|`.
    pub error: f64,
    /// `3 sigma / sqrt(cells)`.
    pub tolerance: f64,
}

impl BlockEstimate {
    pub fn within_tolerance(&self) -> bool {
        self.error <= self.tolerance + 1e-9
    }
}

/// Recovered value of every block of a grid signal, with samples laid out as
/// by [`crate::functions::make_grid_signal`].
pub fn block_estimates(model: &PwPolyModel, spec: &GridSignalSpec, samples: &SampleSet) -> Result<Vec<BlockEstimate>> {
    let owners = spec.cell_owners()?;
    if owners.len() != samples.len() {
        return Err(Error::LengthMismatch { expected: owners.len(), found: samples.len() });
    }
    let mut sums = alloc::vec![0.0; spec.blocks.len()];
    let mut counts = alloc::vec![0usize; spec.blocks.len()];
    for (i, &b) in owners.iter().enumerate() {
        sums[b] += model.predict(samples.point(i))?;
        counts[b] += 1;
    }
    Ok(spec
        .blocks
        .iter()
        .enumerate()
        .map(|(b, block)| {
            let recovered = sums[b] / counts[b] as f64;
            BlockEstimate {
                truth: block.value,
                recovered,
                cells: counts[b],
                error: (recovered - block.value).abs(),
                tolerance: 3.0 * spec.noise_sigma / libm::sqrt(counts[b] as f64),
            }
        })
        .collect())
}
