//! Discrete covering of a cell set by cubes of controlled density.
//!
//! Exact density `mu(Q_i ∩ E) = rho mu(Q_i)` is not attainable on a grid.
//! Instead each cube is grown around an uncovered seed cell of `E` until its
//! `E`-density first drops to `<= rho_cap`; the achieved density interval and
//! the overlap constant are measured and reported. Two growth rules exist:
//!
//! * [`CoveringStyle::Centered`]: side `1, 2, 3, ...`, centred on the seed
//!   and shifted to stay inside the grid;
//! * [`CoveringStyle::Dyadic`]: the dyadic ancestors of the seed cell. The
//!   family is then disjoint, and every cube is in the dyadic family.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{Cube, Grid, WeightedGrid, MAX_DIM};
use crate::numeric::compensated_sum;
use crate::prefix::PrefixTable;

/// A set of cells together with its mu-mass.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSet {
    membership: Vec<bool>,
    mass: f64,
}

impl CellSet {
    pub fn new(wg: &WeightedGrid, membership: Vec<bool>) -> Result<Self> {
        if membership.len() != wg.grid().cell_count() {
            return Err(Error::param(alloc::format!(
                "cell set has {} entries, grid has {} cells",
                membership.len(),
                wg.grid().cell_count()
            )));
        }
        let mass = mass_of(wg, &membership);
        Ok(Self { membership, mass })
    }

    pub fn from_predicate(wg: &WeightedGrid, mut pred: impl FnMut(usize) -> bool) -> Self {
        let membership: Vec<bool> = (0..wg.grid().cell_count()).map(&mut pred).collect();
        let mass = mass_of(wg, &membership);
        Self { membership, mass }
    }

    pub fn contains(&self, cell: usize) -> bool {
        self.membership[cell]
    }

    pub fn membership(&self) -> &[bool] {
        &self.membership
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn is_empty(&self) -> bool {
        !self.membership.iter().any(|&m| m)
    }
}

fn mass_of(wg: &WeightedGrid, membership: &[bool]) -> f64 {
    compensated_sum(
        wg.weights()
            .iter()
            .zip(membership)
            .filter(|(_, &m)| m)
            .map(|(&w, _)| w),
    )
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CoveringResult {
    pub cubes: Vec<Cube>,
    /// `mu(Q_i ∩ E) / mu(Q_i)` per cube.
    pub densities: Vec<f64>,
    /// Smallest density; `None` for the empty family.
    pub rho_lo: Option<f64>,
    pub rho_hi: Option<f64>,
    /// Largest number of cubes sharing one cell; 1 for the empty family.
    pub overlap: usize,
    /// Every positive-weight cell of `E` lies in some cube.
    pub covered: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CoveringStyle {
    #[default]
    Centered,
    /// Needs a power-of-two grid.
    Dyadic,
}

/// Covers the positive-weight cells of `set` by cubes whose `E`-density is
/// at most `rho_cap`. Requires `0 < rho <= rho_cap < 1` and
/// `mu(E) <= rho mu(Q0)`, which guarantees that growth stops by `Q0`.
pub fn build_covering(
    wg: &WeightedGrid,
    set: &CellSet,
    rho: f64,
    rho_cap: f64,
) -> Result<CoveringResult> {
    build_covering_with(wg, set, rho, rho_cap, CoveringStyle::Centered)
}

pub fn build_covering_with(
    wg: &WeightedGrid,
    set: &CellSet,
    rho: f64,
    rho_cap: f64,
    style: CoveringStyle,
) -> Result<CoveringResult> {
    if !(0.0 < rho && rho <= rho_cap && rho_cap < 1.0) {
        return Err(Error::param(alloc::format!(
            "need 0 < rho <= rho_cap < 1, got rho = {rho}, rho_cap = {rho_cap}"
        )));
    }
    if set.membership.len() != wg.grid().cell_count() {
        return Err(Error::param("cell set does not match the grid"));
    }
    if style == CoveringStyle::Dyadic && !wg.grid().cells_per_axis().is_power_of_two() {
        return Err(Error::param("dyadic covering needs a power-of-two grid"));
    }
    let bound = rho * wg.total_mass();
    // a few ulps of slack: callers derive mu(E) and rho from independent sums
    if set.mass > bound * (1.0 + 1e-12) {
        return Err(Error::CoveringPrecondition {
            set_mass: set.mass,
            bound,
        });
    }

    let grid = *wg.grid();
    let n = grid.cells_per_axis();
    let dim = grid.dim();
    let w = wg.weights();
    let set_weights: Vec<f64> = w
        .iter()
        .zip(&set.membership)
        .map(|(&x, &m)| if m { x } else { 0.0 })
        .collect();
    let set_table = PrefixTable::build(&grid, &set_weights);

    let mut covered = vec![false; grid.cell_count()];
    let mut cubes = Vec::new();
    let mut densities = Vec::new();
    for seed in 0..grid.cell_count() {
        if !set.membership[seed] || w[seed] <= 0.0 || covered[seed] {
            continue;
        }
        let coords = grid.cell_coords(seed);
        let mut chosen = None;
        let mut side = 1;
        while side <= n {
            let mut origin = [0; MAX_DIM];
            for k in 0..dim {
                origin[k] = match style {
                    CoveringStyle::Centered => {
                        coords[k].saturating_sub((side - 1) / 2).min(n - side)
                    }
                    CoveringStyle::Dyadic => coords[k] / side * side,
                };
            }
            let cube = Cube::from_parts(origin, dim, side);
            let density = set_table.query(&cube) / wg.mass_unchecked(&cube);
            if density <= rho_cap || side == n {
                chosen = Some((cube, density));
                break;
            }
            side = match style {
                CoveringStyle::Centered => side + 1,
                CoveringStyle::Dyadic => side * 2,
            };
        }
        let (cube, density) = chosen.expect("side n always terminates growth");
        for i in grid.rows(&cube).flatten() {
            covered[i] = true;
        }
        if style == CoveringStyle::Dyadic {
            // dyadic cubes are nested or disjoint; absorbing earlier cubes
            // keeps the family disjoint
            let mut k = 0;
            while k < cubes.len() {
                if contains(&cube, &cubes[k]) {
                    cubes.swap_remove(k);
                    densities.swap_remove(k);
                } else {
                    k += 1;
                }
            }
        }
        cubes.push(cube);
        densities.push(density);
    }

    if style == CoveringStyle::Dyadic {
        let mut order: Vec<usize> = (0..cubes.len()).collect();
        order.sort_by_key(|&k| grid.cell_index(cubes[k].origin()));
        cubes = order.iter().map(|&k| cubes[k]).collect();
        densities = order.iter().map(|&k| densities[k]).collect();
    }
    let all_covered =
        (0..grid.cell_count()).all(|i| !set.membership[i] || w[i] <= 0.0 || covered[i]);
    let rho_lo = densities.iter().copied().reduce(f64::min);
    let rho_hi = densities.iter().copied().reduce(f64::max);
    Ok(CoveringResult {
        overlap: overlap_constant(&cubes, &grid),
        cubes,
        densities,
        rho_lo,
        rho_hi,
        covered: all_covered,
    })
}

fn contains(outer: &Cube, inner: &Cube) -> bool {
    inner.side() <= outer.side()
        && outer
            .origin()
            .iter()
            .zip(inner.origin())
            .all(|(&o, &i)| o <= i && i + inner.side() <= o + outer.side())
}

/// Largest number of cubes containing a single cell (1 for no cubes).
pub fn overlap_constant(cubes: &[Cube], grid: &Grid) -> usize {
    if cubes.is_empty() {
        return 1;
    }
    let mut counts = vec![0usize; grid.cell_count()];
    for cube in cubes {
        for i in grid.rows(cube).flatten() {
            counts[i] += 1;
        }
    }
    counts.into_iter().max().unwrap_or(0).max(1)
}
