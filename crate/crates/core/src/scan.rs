//! Exhaustive cube scans.
//!
//! Every analysis is a reduction over an enumerated cube family of per-cube
//! statistics: the mass and integral (prefix tables, `O(2^n)` per cube), the
//! mean oscillation, and the mass of a strict upper level set (neither is
//! prefix-summable). Two strategies provide those statistics:
//!
//! * [`ScanStrategy::Direct`] walks the cells of each cube with compensated
//!   sums. It works for every mode and dimension and is the reference path.
//! * [`ScanStrategy::Sweep`] handles the full one-dimensional family in
//!   `O(N^2 log N)`: for each left end it extends the interval one cell at a
//!   time, inserting the new cell into Fenwick trees indexed by value rank, so
//!   `sum w` and `sum w*v` over cells below (or above) any threshold cost
//!   `O(log N)`. Results agree with `Direct` to a few ulps.
//!
//! Reductions break exact ties by canonical rank, so the reported witness
//! does not depend on the strategy's visiting order.

use alloc::vec;
use alloc::vec::Vec;

use crate::enumerate::{enumerate_cubes, EnumerationMode};
use crate::error::{Error, Result};
use crate::grid::{Cube, WeightedGrid, MAX_DIM};
use crate::numeric::Compensated;

/// Above this many cells, [`ScanStrategy::Auto`] sweeps the 1D full family.
pub const SWEEP_MIN_CELLS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScanStrategy {
    /// `Sweep` for the 1D full family above [`SWEEP_MIN_CELLS`] cells,
    /// `Direct` otherwise.
    #[default]
    Auto,
    Direct,
    Sweep,
}

/// Per-cube statistics offered to a reduction.
pub(crate) trait Probe {
    fn cube(&self) -> Cube;
    /// `mu(Q) > 0` for every probe handed out.
    fn mass(&self) -> f64;
    fn integral(&self) -> f64;

    fn mean(&self) -> f64 {
        self.integral() / self.mass()
    }

    /// `sum_Q w |mu(Q) v - integral_Q f|`, that is `mu(Q)^2 Omega_mu(f; Q)`.
    /// Working with `mu(Q) v - integral` instead of `v - mean` keeps every
    /// term exact on small-integer data.
    fn deviation(&self) -> f64;

    /// `Omega_mu(f; Q)`.
    fn oscillation(&self) -> f64 {
        self.deviation() / (self.mass() * self.mass())
    }

    /// `Omega_mu(f; Q) / f_{Q,mu}` as one quotient, `0/0 = 0`.
    fn gr_ratio(&self) -> f64 {
        let integral = self.integral();
        if integral > 0.0 {
            self.deviation() / (self.mass() * integral)
        } else {
            0.0
        }
    }

    /// `mu{x in Q : f(x) > threshold}`.
    fn mass_above(&self, threshold: f64) -> f64;
}

/// Visits every positive-mass cube of `mode` with its canonical rank.
/// Returns the number of cubes visited.
pub(crate) fn scan(
    wg: &WeightedGrid,
    mode: &EnumerationMode,
    strategy: ScanStrategy,
    visit: &mut dyn FnMut(u64, &dyn Probe),
) -> Result<usize> {
    let sweep_ok = wg.grid().dim() == 1 && *mode == EnumerationMode::All;
    match strategy {
        ScanStrategy::Sweep if !sweep_ok => Err(Error::InvalidMode(
            "the sweep strategy needs a one-dimensional grid in 'all' mode".into(),
        )),
        ScanStrategy::Sweep => Ok(sweep(wg, visit)),
        ScanStrategy::Auto if sweep_ok && wg.grid().cells_per_axis() > SWEEP_MIN_CELLS => {
            Ok(sweep(wg, visit))
        }
        _ => direct(wg, mode, visit),
    }
}

fn direct(
    wg: &WeightedGrid,
    mode: &EnumerationMode,
    visit: &mut dyn FnMut(u64, &dyn Probe),
) -> Result<usize> {
    let mut visited = 0;
    for (rank, cube) in enumerate_cubes(wg.grid(), mode)?.enumerate() {
        let mass = wg.mass_unchecked(&cube);
        if mass <= 0.0 {
            continue;
        }
        let probe = DirectProbe {
            wg,
            cube,
            mass,
            integral: wg.integral_unchecked(&cube),
        };
        visit(rank as u64, &probe);
        visited += 1;
    }
    Ok(visited)
}

pub(crate) struct DirectProbe<'a> {
    pub wg: &'a WeightedGrid,
    pub cube: Cube,
    pub mass: f64,
    pub integral: f64,
}

impl<'a> DirectProbe<'a> {
    /// `(sum w |M v - I|, sum_{M v < I} w (I - M v))` in one pass, with
    /// `M = mu(Q)` and `I = integral_Q f`.
    pub fn deviations(&self) -> (f64, f64) {
        let (w, v) = (self.wg.weights(), self.wg.values());
        let mut abs = Compensated::new();
        let mut lower = Compensated::new();
        for row in self.wg.grid().rows(&self.cube) {
            for i in row {
                let d = self.mass * v[i] - self.integral;
                abs.add(w[i] * d.abs());
                if d < 0.0 {
                    lower.add(w[i] * -d);
                }
            }
        }
        (abs.value(), lower.value())
    }
}

impl Probe for DirectProbe<'_> {
    fn cube(&self) -> Cube {
        self.cube
    }

    fn mass(&self) -> f64 {
        self.mass
    }

    fn integral(&self) -> f64 {
        self.integral
    }

    fn deviation(&self) -> f64 {
        let (w, v) = (self.wg.weights(), self.wg.values());
        let mut abs = Compensated::new();
        for row in self.wg.grid().rows(&self.cube) {
            for i in row {
                abs.add(w[i] * (self.mass * v[i] - self.integral).abs());
            }
        }
        abs.value()
    }

    fn mass_above(&self, threshold: f64) -> f64 {
        let (w, v) = (self.wg.weights(), self.wg.values());
        let mut acc = Compensated::new();
        for row in self.wg.grid().rows(&self.cube) {
            for i in row {
                if v[i] > threshold {
                    acc.add(w[i]);
                }
            }
        }
        acc.value()
    }
}

/// Fenwick tree over value ranks.
struct Fenwick {
    tree: Vec<f64>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Self {
            tree: vec![0.0; n + 1],
        }
    }

    fn clear(&mut self) {
        self.tree.fill(0.0);
    }

    fn add(&mut self, rank: usize, x: f64) {
        let mut i = rank + 1;
        while i < self.tree.len() {
            self.tree[i] += x;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum over ranks `< k`.
    fn prefix(&self, k: usize) -> f64 {
        let mut i = k;
        let mut s = 0.0;
        while i > 0 {
            s += self.tree[i];
            i &= i - 1;
        }
        s
    }
}

struct SweepProbe<'a> {
    cube: Cube,
    mass: f64,
    integral: f64,
    sorted: &'a [f64],
    weight: &'a Fenwick,
    moment: &'a Fenwick,
}

impl Probe for SweepProbe<'_> {
    fn cube(&self) -> Cube {
        self.cube
    }

    fn mass(&self) -> f64 {
        self.mass
    }

    fn integral(&self) -> f64 {
        self.integral
    }

    fn deviation(&self) -> f64 {
        // twice the lower half: 2 sum_{M v < I} w (I - M v)
        let k = self
            .sorted
            .partition_point(|&v| self.mass * v < self.integral);
        let below_mass = self.weight.prefix(k);
        let below_moment = self.moment.prefix(k);
        2.0 * (self.integral * below_mass - self.mass * below_moment).max(0.0)
    }

    fn mass_above(&self, threshold: f64) -> f64 {
        let n = self.sorted.len();
        let k = self.sorted.partition_point(|&v| v <= threshold);
        if k == n {
            return 0.0;
        }
        (self.weight.prefix(n) - self.weight.prefix(k)).max(0.0)
    }
}

/// Canonical rank of the 1D interval `[origin, origin + side)` among `n` cells.
pub(crate) fn interval_rank(n: usize, origin: usize, side: usize) -> u64 {
    let s = (side - 1) as u64;
    s * (n as u64 + 1) - s * (s + 1) / 2 + origin as u64
}

fn sweep(wg: &WeightedGrid, visit: &mut dyn FnMut(u64, &dyn Probe)) -> usize {
    let n = wg.grid().cells_per_axis();
    let (w, v) = (wg.weights(), wg.values());

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]).then(a.cmp(&b)));
    let sorted: Vec<f64> = order.iter().map(|&i| v[i]).collect();
    let mut rank_of = vec![0; n];
    for (r, &i) in order.iter().enumerate() {
        rank_of[i] = r;
    }

    let mut weight = Fenwick::new(n);
    let mut moment = Fenwick::new(n);
    let mut visited = 0;
    for origin in 0..n {
        weight.clear();
        moment.clear();
        for end in origin..n {
            weight.add(rank_of[end], w[end]);
            moment.add(rank_of[end], w[end] * v[end]);
            let side = end - origin + 1;
            let mut o = [0; MAX_DIM];
            o[0] = origin;
            let cube = Cube::from_parts(o, 1, side);
            let mass = wg.mass_unchecked(&cube);
            if mass <= 0.0 {
                continue;
            }
            let probe = SweepProbe {
                cube,
                mass,
                integral: wg.integral_unchecked(&cube),
                sorted: &sorted,
                weight: &weight,
                moment: &moment,
            };
            visit(interval_rank(n, origin, side), &probe);
            visited += 1;
        }
    }
    visited
}

/// Running arg-max / arg-min with canonical-rank tie-breaking.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Extremum {
    pub value: f64,
    pub rank: u64,
    pub cube: Cube,
}

pub(crate) fn offer_max(best: &mut Option<Extremum>, value: f64, rank: u64, probe: &dyn Probe) {
    let better = match best {
        None => true,
        Some(b) => value > b.value || (value == b.value && rank < b.rank),
    };
    if better {
        *best = Some(Extremum {
            value,
            rank,
            cube: probe.cube(),
        });
    }
}

pub(crate) fn offer_min(best: &mut Option<Extremum>, value: f64, rank: u64, probe: &dyn Probe) {
    let better = match best {
        None => true,
        Some(b) => value < b.value || (value == b.value && rank < b.rank),
    };
    if better {
        *best = Some(Extremum {
            value,
            rank,
            cube: probe.cube(),
        });
    }
}
