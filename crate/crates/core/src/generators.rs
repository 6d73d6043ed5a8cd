//! Deterministic test inputs: singular powers, spikes, step functions,
//! log-normal noise, and measures that need not be doubling.
//!
//! Random kinds draw from `rand_distr` 0.4's `LogNormal(0, log_sigma)` driven
//! by ChaCha8 (`rand_chacha` 0.3) seeded through `SeedableRng::seed_from_u64`,
//! stream 0 for function values and stream 1 for weights. Without `std` the
//! distribution's transcendental functions come from `libm`, so identical
//! specs give bitwise-identical grids on every platform.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::LogNormal;

use crate::enumerate::EnumerationMode;
use crate::error::{Error, Result};
use crate::grid::{Grid, WeightedGrid};
use crate::oscillation::gr_epsilon;

/// A distinguished cell, by row-major index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Position {
    First,
    Last,
    /// Cell `N/2` on every axis.
    Center,
    Cell(usize),
}

impl Position {
    fn index(&self, grid: &Grid) -> Result<usize> {
        match *self {
            Position::First => Ok(0),
            Position::Last => Ok(grid.cell_count() - 1),
            Position::Center => {
                let mid = vec![grid.cells_per_axis() / 2; grid.dim()];
                Ok(grid.cell_index(&mid))
            }
            Position::Cell(i) if i < grid.cell_count() => Ok(i),
            Position::Cell(i) => Err(spec_err(alloc::format!(
                "cell {i} outside a grid of {} cells",
                grid.cell_count()
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "type", rename_all = "snake_case"))]
pub enum FunctionKind {
    /// Cell averages of `x^{-a}` on `[0, 1]`, `0 < a < 1`; one dimension only.
    Power { a: f64 },
    /// `m` on one cell, zero elsewhere.
    Spike { m: f64, position: Position },
    /// `v_hi` on the first `round(fraction * cells)` cells, `v_lo` after.
    TwoLevel { v_lo: f64, v_hi: f64, fraction: f64 },
    /// `exp(log_sigma * Z)`, `Z` standard normal.
    Random { seed: u64, log_sigma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "type", rename_all = "snake_case"))]
pub enum MeasureKind {
    /// Lebesgue measure on the unit cube: `h^n` per cell.
    #[default]
    Uniform,
    /// Exact cell masses of `prod_k x_k^b dx`, `b > -1`.
    PowerWeight { b: f64 },
    /// Lebesgue measure with one cell's mass multiplied by `w`.
    SpikeWeight { w: f64, position: Position },
    /// Lebesgue cell masses multiplied by `exp(log_sigma * Z)`.
    RandomWeight { seed: u64, log_sigma: f64 },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GenSpec {
    pub kind: FunctionKind,
    #[cfg_attr(feature = "serde", serde(default))]
    pub measure_kind: MeasureKind,
    pub shape: Vec<usize>,
}

fn spec_err(msg: impl Into<alloc::string::String>) -> Error {
    Error::InvalidSpec(msg.into())
}

fn finite_nonneg(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(spec_err(alloc::format!(
            "{name} must be finite and >= 0, got {x}"
        )))
    }
}

impl GenSpec {
    pub fn validate(&self) -> Result<Grid> {
        let grid = Grid::from_shape(&self.shape).map_err(|e| spec_err(alloc::format!("{e}")))?;
        match self.kind {
            FunctionKind::Power { a } => {
                if !(a > 0.0 && a < 1.0) {
                    return Err(spec_err(alloc::format!("power needs 0 < a < 1, got {a}")));
                }
                if grid.dim() != 1 {
                    return Err(spec_err("power is one-dimensional"));
                }
            }
            FunctionKind::Spike { m, position } => {
                finite_nonneg("m", m)?;
                position.index(&grid)?;
            }
            FunctionKind::TwoLevel {
                v_lo,
                v_hi,
                fraction,
            } => {
                finite_nonneg("v_lo", v_lo)?;
                finite_nonneg("v_hi", v_hi)?;
                if !(0.0..=1.0).contains(&fraction) {
                    return Err(spec_err(alloc::format!(
                        "fraction must lie in [0, 1], got {fraction}"
                    )));
                }
            }
            FunctionKind::Random { log_sigma, .. } => finite_nonneg("log_sigma", log_sigma)?,
        }
        match self.measure_kind {
            MeasureKind::Uniform => {}
            MeasureKind::PowerWeight { b } => {
                if !(b > -1.0 && b.is_finite()) {
                    return Err(spec_err(alloc::format!(
                        "power_weight needs b > -1, got {b}"
                    )));
                }
            }
            MeasureKind::SpikeWeight { w, position } => {
                if !(w > 0.0 && w.is_finite()) {
                    return Err(spec_err(alloc::format!(
                        "spike_weight needs w > 0, got {w}"
                    )));
                }
                position.index(&grid)?;
            }
            MeasureKind::RandomWeight { log_sigma, .. } => finite_nonneg("log_sigma", log_sigma)?,
        }
        Ok(grid)
    }
}

/// `count` samples of `exp(log_sigma * Z)`.
fn log_normals(seed: u64, stream: u64, count: usize, log_sigma: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let dist = LogNormal::new(0.0, log_sigma).expect("log_sigma validated");
    (&mut rng).sample_iter(dist).take(count).collect()
}

/// `integral_{x_i}^{x_{i+1}} x^q dx` on the uniform partition of `[0, 1]`.
fn power_cell_integrals(n: usize, q: f64) -> Vec<f64> {
    let h = 1.0 / n as f64;
    let antiderivative = |i: usize| libm::pow(i as f64 * h, q + 1.0) / (q + 1.0);
    (0..n)
        .map(|i| antiderivative(i + 1) - antiderivative(i))
        .collect()
}

pub fn generate(spec: &GenSpec) -> Result<WeightedGrid> {
    let grid = spec.validate()?;
    let cells = grid.cell_count();
    let n = grid.cells_per_axis();
    let dim = grid.dim();
    let cell_volume = libm::pow(grid.cell_edge(), dim as f64);

    let values = match spec.kind {
        FunctionKind::Power { a } => {
            let h = grid.cell_edge();
            power_cell_integrals(n, -a)
                .into_iter()
                .map(|x| x / h)
                .collect()
        }
        FunctionKind::Spike { m, position } => {
            let mut v = vec![0.0; cells];
            v[position.index(&grid)?] = m;
            v
        }
        FunctionKind::TwoLevel {
            v_lo,
            v_hi,
            fraction,
        } => {
            let hi_cells = libm::round(fraction * cells as f64) as usize;
            (0..cells)
                .map(|i| if i < hi_cells { v_hi } else { v_lo })
                .collect()
        }
        FunctionKind::Random { seed, log_sigma } => log_normals(seed, 0, cells, log_sigma),
    };

    let weights = match spec.measure_kind {
        MeasureKind::Uniform => vec![cell_volume; cells],
        MeasureKind::PowerWeight { b } => {
            let axis = power_cell_integrals(n, b);
            (0..cells)
                .map(|i| {
                    let c = grid.cell_coords(i);
                    c[..dim].iter().map(|&k| axis[k]).product()
                })
                .collect()
        }
        MeasureKind::SpikeWeight { w, position } => {
            let mut m = vec![cell_volume; cells];
            m[position.index(&grid)?] *= w;
            m
        }
        MeasureKind::RandomWeight { seed, log_sigma } => log_normals(seed, 1, cells, log_sigma)
            .into_iter()
            .map(|x| cell_volume * x)
            .collect(),
    };

    WeightedGrid::new(grid, weights, values)
}

/// GR parameter of the generated grid on the family of `mode`.
pub fn measured_epsilon(spec: &GenSpec, mode: &EnumerationMode) -> Result<f64> {
    Ok(gr_epsilon(&generate(spec)?, mode)?.epsilon)
}
