//! The discrete model of `(Q0, mu, f)`: a regular grid over the unit cube,
//! cell-aligned subcubes, and per-cell masses and values.

use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use crate::error::{Error, Result};
use crate::numeric::compensated_sum;
use crate::prefix::PrefixTable;

/// Largest supported dimension. All-subcube enumeration is further limited to
/// `dim <= 3`.
pub const MAX_DIM: usize = 8;

/// Regular grid of `n^dim` cells over `[0,1]^dim`.
///
/// Every axis has the same cell count so that cell-aligned cubes are
/// geometric cubes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    dim: usize,
    n: usize,
    cells: usize,
}

impl Grid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidGrid(alloc::format!(
                "dimension {dim} outside 1..={MAX_DIM}"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidGrid(
                "cell count per axis must be >= 1".into(),
            ));
        }
        let cells = u32::try_from(dim)
            .ok()
            .and_then(|d| n.checked_pow(d))
            .ok_or_else(|| Error::InvalidGrid("cell count overflows".into()))?;
        Ok(Self { dim, n, cells })
    }

    /// Builds a grid from a per-axis shape; all entries must agree.
    pub fn from_shape(shape: &[usize]) -> Result<Self> {
        let Some(&n) = shape.first() else {
            return Err(Error::InvalidGrid("empty shape".into()));
        };
        if shape.iter().any(|&k| k != n) {
            return Err(Error::InvalidGrid(alloc::format!(
                "shape {shape:?} is not a cube; every axis needs the same cell count"
            )));
        }
        Self::new(shape.len(), n)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cells per axis.
    pub fn cells_per_axis(&self) -> usize {
        self.n
    }

    pub fn shape(&self) -> Vec<usize> {
        alloc::vec![self.n; self.dim]
    }

    pub fn cell_count(&self) -> usize {
        self.cells
    }

    /// Edge length of one cell.
    pub fn cell_edge(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// The whole domain `Q0`.
    pub fn full_cube(&self) -> Cube {
        Cube {
            origin: [0; MAX_DIM],
            dim: self.dim,
            side: self.n,
        }
    }

    pub fn contains(&self, cube: &Cube) -> bool {
        cube.dim == self.dim
            && cube.side <= self.n
            && cube.origin().iter().all(|&o| o + cube.side <= self.n)
    }

    /// Row-major flat index of a cell (last axis fastest).
    pub fn cell_index(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.dim);
        coords.iter().fold(0, |acc, &c| acc * self.n + c)
    }

    pub fn cell_coords(&self, mut index: usize) -> [usize; MAX_DIM] {
        let mut coords = [0; MAX_DIM];
        for k in (0..self.dim).rev() {
            coords[k] = index % self.n;
            index /= self.n;
        }
        coords
    }

    pub(crate) fn check(&self, cube: &Cube) -> Result<()> {
        if self.contains(cube) {
            Ok(())
        } else {
            Err(Error::InvalidCube(*cube))
        }
    }

    /// Flat-index ranges of the rows (runs along the last axis) of `cube`.
    pub fn rows(&self, cube: &Cube) -> CubeRows {
        CubeRows {
            n: self.n,
            dim: self.dim,
            origin: cube.origin,
            side: cube.side,
            counter: [0; MAX_DIM],
            done: false,
        }
    }
}

/// Axis-aligned, cell-aligned cube: `origin` is the lowest cell index per
/// axis, `side` the edge length in cells.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cube {
    origin: [usize; MAX_DIM],
    dim: usize,
    side: usize,
}

impl Cube {
    pub fn new(origin: &[usize], side: usize) -> Result<Self> {
        if origin.is_empty() || origin.len() > MAX_DIM {
            return Err(Error::InvalidGrid(alloc::format!(
                "cube dimension {} outside 1..={MAX_DIM}",
                origin.len()
            )));
        }
        if side == 0 {
            return Err(Error::InvalidGrid("cube side must be >= 1".into()));
        }
        let mut o = [0; MAX_DIM];
        o[..origin.len()].copy_from_slice(origin);
        Ok(Self {
            origin: o,
            dim: origin.len(),
            side,
        })
    }

    pub(crate) fn from_parts(origin: [usize; MAX_DIM], dim: usize, side: usize) -> Self {
        Self { origin, dim, side }
    }

    pub fn origin(&self) -> &[usize] {
        &self.origin[..self.dim]
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of cells.
    pub fn volume(&self) -> usize {
        self.side.pow(self.dim as u32)
    }

    pub fn contains_cell(&self, coords: &[usize]) -> bool {
        self.origin()
            .iter()
            .zip(coords)
            .all(|(&o, &c)| c >= o && c < o + self.side)
    }
}

impl fmt::Debug for Cube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cube({:?}, side {})", self.origin(), self.side)
    }
}

impl fmt::Display for Cube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[origin {:?}, side {}]", self.origin(), self.side)
    }
}

#[cfg(feature = "serde")]
mod cube_serde {
    use super::Cube;
    use alloc::vec::Vec;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Repr {
        origin: Vec<usize>,
        side: usize,
    }

    impl Serialize for Cube {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            Repr {
                origin: self.origin().to_vec(),
                side: self.side,
            }
            .serialize(s)
        }
    }

    impl<'de> Deserialize<'de> for Cube {
        fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
            let r = Repr::deserialize(d)?;
            Cube::new(&r.origin, r.side).map_err(serde::de::Error::custom)
        }
    }
}

/// Iterator over the rows of a cube, see [`Grid::rows`].
#[derive(Debug, Clone)]
pub struct CubeRows {
    n: usize,
    dim: usize,
    origin: [usize; MAX_DIM],
    side: usize,
    counter: [usize; MAX_DIM],
    done: bool,
}

impl Iterator for CubeRows {
    type Item = Range<usize>;

    fn next(&mut self) -> Option<Range<usize>> {
        if self.done {
            return None;
        }
        let last = self.dim - 1;
        let mut start = 0;
        for k in 0..last {
            start = start * self.n + self.origin[k] + self.counter[k];
        }
        start = start * self.n + self.origin[last];
        // advance the odometer over the leading axes
        let mut k = last;
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.counter[k] += 1;
            if self.counter[k] < self.side {
                break;
            }
            self.counter[k] = 0;
        }
        Some(start..start + self.side)
    }
}

/// One invariant breach found by [`validate`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Violation {
    LengthMismatch {
        expected: usize,
        weights: usize,
        values: usize,
    },
    NonFiniteWeight {
        cell: usize,
    },
    NegativeWeight {
        cell: usize,
    },
    NonFiniteValue {
        cell: usize,
    },
    NegativeValue {
        cell: usize,
    },
    ZeroTotalMass,
    NonFiniteTotalMass,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::LengthMismatch {
                expected,
                weights,
                values,
            } => write!(
                f,
                "expected {expected} cells, got {weights} weights and {values} values"
            ),
            Violation::NonFiniteWeight { cell } => write!(f, "non-finite weight at cell {cell}"),
            Violation::NegativeWeight { cell } => write!(f, "negative weight at cell {cell}"),
            Violation::NonFiniteValue { cell } => write!(f, "non-finite value at cell {cell}"),
            Violation::NegativeValue { cell } => write!(f, "negative value at cell {cell}"),
            Violation::ZeroTotalMass => f.write_str("zero total mass"),
            Violation::NonFiniteTotalMass => f.write_str("total mass overflows"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const SHOWN: usize = 20;
        if self.is_ok() {
            return f.write_str("OK");
        }
        for (i, v) in self.violations.iter().take(SHOWN).enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        if self.violations.len() > SHOWN {
            write!(f, "; and {} more", self.violations.len() - SHOWN)?;
        }
        Ok(())
    }
}

/// Checks raw per-cell data against the [`WeightedGrid`] invariants.
pub fn validate(grid: &Grid, weights: &[f64], values: &[f64]) -> ValidationReport {
    let mut violations = Vec::new();
    let expected = grid.cell_count();
    if weights.len() != expected || values.len() != expected {
        violations.push(Violation::LengthMismatch {
            expected,
            weights: weights.len(),
            values: values.len(),
        });
        return ValidationReport { violations };
    }
    for (cell, (&w, &v)) in weights.iter().zip(values).enumerate() {
        if !w.is_finite() {
            violations.push(Violation::NonFiniteWeight { cell });
        } else if w < 0.0 {
            violations.push(Violation::NegativeWeight { cell });
        }
        if !v.is_finite() {
            violations.push(Violation::NonFiniteValue { cell });
        } else if v < 0.0 {
            violations.push(Violation::NegativeValue { cell });
        }
    }
    if violations.is_empty() {
        let total = compensated_sum(weights.iter().copied());
        if !total.is_finite() {
            violations.push(Violation::NonFiniteTotalMass);
        } else if total <= 0.0 {
            violations.push(Violation::ZeroTotalMass);
        }
    }
    ValidationReport { violations }
}

/// A nonnegative function `f` and a measure `mu` on a grid, both constant per
/// cell. Weights are cell *masses*, not densities.
///
/// Immutable after construction; the prefix tables backing
/// [`cube_mass`](Self::cube_mass) and [`cube_integral`](Self::cube_integral)
/// are built once.
#[derive(Debug, Clone)]
pub struct WeightedGrid {
    grid: Grid,
    weights: Vec<f64>,
    values: Vec<f64>,
    total_mass: f64,
    mass_table: PrefixTable,
    moment_table: PrefixTable,
}

impl WeightedGrid {
    pub fn new(grid: Grid, weights: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let report = validate(&grid, &weights, &values);
        if !report.is_ok() {
            return Err(Error::Validation(report));
        }
        let mass_table = PrefixTable::build(&grid, &weights);
        let moments: Vec<f64> = weights.iter().zip(&values).map(|(w, v)| w * v).collect();
        let moment_table = PrefixTable::build(&grid, &moments);
        let total_mass = compensated_sum(weights.iter().copied());
        Ok(Self {
            grid,
            weights,
            values,
            total_mass,
            mass_table,
            moment_table,
        })
    }

    /// Uniform grid helper for one dimension: `weights[i]`, `values[i]`.
    pub fn from_1d(weights: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let grid = Grid::new(1, weights.len().max(values.len()))?;
        Self::new(grid, weights, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `mu(Q0)`.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// `mu(Q)` from the prefix table: `2^dim` lookups.
    pub fn cube_mass(&self, cube: &Cube) -> Result<f64> {
        self.grid.check(cube)?;
        Ok(self.mass_table.query(cube))
    }

    /// `integral_Q f dmu` from the prefix table.
    pub fn cube_integral(&self, cube: &Cube) -> Result<f64> {
        self.grid.check(cube)?;
        Ok(self.moment_table.query(cube))
    }

    pub(crate) fn mass_unchecked(&self, cube: &Cube) -> f64 {
        self.mass_table.query(cube)
    }

    pub(crate) fn integral_unchecked(&self, cube: &Cube) -> f64 {
        self.moment_table.query(cube)
    }

    /// Same grid with every value multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let values = self.values.iter().map(|v| v * c).collect();
        Self::new(self.grid, self.weights.clone(), values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn uniform_data_is_valid() {
        let g = Grid::new(1, 4).unwrap();
        assert!(validate(&g, &[1.0; 4], &[1.0; 4]).is_ok());
    }

    #[test]
    fn negative_weight_is_reported_with_cell() {
        let g = Grid::new(1, 3).unwrap();
        let r = validate(&g, &[1.0, -0.5, 1.0], &[1.0; 3]);
        assert_eq!(r.violations, vec![Violation::NegativeWeight { cell: 1 }]);
        assert_eq!(alloc::format!("{r}"), "negative weight at cell 1");
    }

    #[test]
    fn zero_total_mass_is_reported() {
        let g = Grid::new(1, 3).unwrap();
        let r = validate(&g, &[0.0; 3], &[1.0; 3]);
        assert_eq!(r.violations, vec![Violation::ZeroTotalMass]);
    }

    #[test]
    fn nan_and_negative_values_are_reported() {
        let g = Grid::new(1, 3).unwrap();
        let r = validate(&g, &[1.0, f64::INFINITY, 1.0], &[f64::NAN, 1.0, -2.0]);
        assert_eq!(
            r.violations,
            vec![
                Violation::NonFiniteValue { cell: 0 },
                Violation::NonFiniteWeight { cell: 1 },
                Violation::NegativeValue { cell: 2 },
            ]
        );
    }

    #[test]
    fn non_cubic_shape_is_rejected() {
        assert!(Grid::from_shape(&[4, 8]).is_err());
        assert!(Grid::from_shape(&[]).is_err());
        assert_eq!(Grid::from_shape(&[4, 4]).unwrap().cell_count(), 16);
    }

    #[test]
    fn cube_mass_examples() {
        let wg = WeightedGrid::from_1d(vec![1.0; 4], vec![1.0; 4]).unwrap();
        assert_eq!(wg.cube_mass(&wg.grid().full_cube()).unwrap(), 4.0);

        let wg = WeightedGrid::from_1d(vec![1.0, 2.0, 1.0, 4.0], vec![3.0, 1.0, 4.0, 1.0]).unwrap();
        assert_eq!(wg.cube_mass(&wg.grid().full_cube()).unwrap(), 8.0);
        for i in 0..4 {
            let q = Cube::new(&[i], 1).unwrap();
            assert_eq!(wg.cube_mass(&q).unwrap(), wg.weights()[i]);
        }
        assert!(wg.cube_mass(&Cube::new(&[3], 2).unwrap()).is_err());
    }

    #[test]
    fn rows_cover_cube_cells_in_row_major_order() {
        let g = Grid::new(2, 4).unwrap();
        let q = Cube::new(&[1, 2], 2).unwrap();
        let rows: Vec<_> = g.rows(&q).collect();
        assert_eq!(rows, vec![6..8, 10..12]);

        let g3 = Grid::new(3, 3).unwrap();
        let q3 = Cube::new(&[1, 1, 0], 2).unwrap();
        let cells: Vec<usize> = g3.rows(&q3).flatten().collect();
        let mut expect = Vec::new();
        for i in 1..3 {
            for j in 1..3 {
                for k in 0..2 {
                    expect.push(g3.cell_index(&[i, j, k]));
                }
            }
        }
        assert_eq!(cells, expect);
    }

    #[test]
    fn coords_roundtrip() {
        let g = Grid::new(3, 5).unwrap();
        for idx in 0..g.cell_count() {
            let c = g.cell_coords(idx);
            assert_eq!(g.cell_index(&c[..3]), idx);
        }
    }
}
