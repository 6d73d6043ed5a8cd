//! Non-increasing rearrangement `f*_mu` and its running average `f**_mu`.
//!
//! Grid cells are atoms, so `f*` is a step function. We use the
//! right-continuous convention
//!
//! ```text
//! f*(t) = min { s >= 0 : mu{f > s} <= t },   0 < t < mu(Q0),
//! ```
//!
//! which agrees with the sup-inf definition away from breakpoints and makes
//! the tail identity
//!
//! ```text
//! t f**(t) = sum_{v > f*(t)} w v + (t - mu{f > f*(t)}) f*(t)
//! ```
//!
//! exact. At `t = mu(Q0)` the last level is returned.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{Cube, WeightedGrid};
use crate::numeric::Compensated;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct StepFunction {
    /// `t_1 < ... < t_m = total_mass`; level `j` holds on `[t_{j-1}, t_j)`.
    breakpoints: Vec<f64>,
    /// Strictly decreasing.
    levels: Vec<f64>,
    /// `integral_0^{t_j} f*`, with a leading zero.
    #[cfg_attr(feature = "serde", serde(skip))]
    integrals: Vec<f64>,
    total_mass: f64,
}

impl StepFunction {
    /// Rearranges `(weight, value)` atoms; zero-weight atoms are dropped.
    pub fn from_cells<I: IntoIterator<Item = (f64, f64)>>(cells: I) -> Result<Self> {
        let mut atoms: Vec<(f64, f64)> = cells.into_iter().filter(|&(w, _)| w > 0.0).collect();
        if atoms.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        // value descending; equal values by weight so that the order of the
        // input cells cannot change any accumulated sum
        atoms.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.total_cmp(&b.0)));

        let mut breakpoints = Vec::new();
        let mut levels = Vec::new();
        let mut integrals = Vec::from([0.0]);
        let mut mass = Compensated::new();
        let mut integral = Compensated::new();
        for (i, &(w, v)) in atoms.iter().enumerate() {
            mass.add(w);
            integral.add(w * v);
            let last_of_level = atoms.get(i + 1).map_or(true, |next| next.1 != v);
            if last_of_level {
                breakpoints.push(mass.value());
                levels.push(v);
                integrals.push(integral.value());
            }
        }
        let total_mass = mass.value();
        Ok(Self {
            breakpoints,
            levels,
            integrals,
            total_mass,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// `integral_0^{mu(Q0)} f*`, which equals `sum w v`.
    pub fn total_integral(&self) -> f64 {
        *self.integrals.last().unwrap()
    }

    fn check(&self, t: f64) -> Result<()> {
        if t > 0.0 && t <= self.total_mass {
            Ok(())
        } else {
            Err(Error::param(alloc::format!(
                "t = {t} outside (0, {}]",
                self.total_mass
            )))
        }
    }

    /// Index of the step containing `t`.
    fn step(&self, t: f64) -> usize {
        let j = self.breakpoints.partition_point(|&b| b <= t);
        j.min(self.levels.len() - 1)
    }

    /// `f*(t)`.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.levels[self.step(t)])
    }

    /// `f**(t) = t^{-1} integral_0^t f*`, in closed form.
    pub fn average(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        let j = self.step(t);
        let start = if j == 0 { 0.0 } else { self.breakpoints[j - 1] };
        // f**(t) = v_j + (integral_0^start (f* - v_j)) / t, exact on the first step
        let v = self.levels[j];
        let mut excess = Compensated::new();
        excess.add(self.integrals[j]);
        excess.add(-v * start);
        Ok(v + excess.value().max(0.0) / t)
    }

    /// Distribution function `mu{f > s}`.
    pub fn distribution(&self, s: f64) -> f64 {
        let c = self.levels.partition_point(|&v| v > s);
        if c == 0 {
            0.0
        } else {
            self.breakpoints[c - 1]
        }
    }

    /// `(t_j, v_j)` pairs: level `v_j` holds up to `t_j`.
    pub fn steps(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.breakpoints
            .iter()
            .copied()
            .zip(self.levels.iter().copied())
    }
}

/// `f*_mu` on the whole grid.
pub fn rearrangement(wg: &WeightedGrid) -> Result<StepFunction> {
    StepFunction::from_cells(
        wg.weights()
            .iter()
            .copied()
            .zip(wg.values().iter().copied()),
    )
}

/// `(f chi_Q)*_mu`, the rearrangement of `f` restricted to `cube`.
pub fn rearrangement_on(wg: &WeightedGrid, cube: &Cube) -> Result<StepFunction> {
    wg.grid().check(cube)?;
    let (w, v) = (wg.weights(), wg.values());
    StepFunction::from_cells(wg.grid().rows(cube).flatten().map(|i| (w[i], v[i])))
}
