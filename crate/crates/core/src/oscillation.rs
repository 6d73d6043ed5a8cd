//! Weighted means, mean oscillations and the discrete Gurov-Reshetnyak
//! parameter.

use crate::enumerate::EnumerationMode;
use crate::error::{Error, Result};
use crate::grid::{Cube, WeightedGrid};
use crate::scan::{offer_max, scan, DirectProbe, Probe, ScanStrategy};

/// Statistics of `f` on one cube.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OscStats {
    /// `f_{Q,mu}`
    pub mean: f64,
    /// `Omega_mu(f; Q)`
    pub osc: f64,
    /// `integral over {f < f_Q} of (f_Q - f) dmu`; equals `mass * osc / 2`.
    pub lower_half: f64,
    /// `mu(Q)`
    pub mass: f64,
}

/// Result of [`gr_epsilon`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GrResult {
    /// `max Omega/f_Q` over the scanned family.
    pub epsilon: f64,
    /// First cube in canonical order attaining the maximum.
    pub witness: Cube,
    pub mode: EnumerationMode,
    pub cubes_scanned: usize,
}

fn direct_probe<'a>(wg: &'a WeightedGrid, cube: &Cube) -> Result<DirectProbe<'a>> {
    let mass = wg.cube_mass(cube)?;
    if mass <= 0.0 {
        return Err(Error::ZeroMassCube(*cube));
    }
    Ok(DirectProbe {
        wg,
        cube: *cube,
        mass,
        integral: wg.integral_unchecked(cube),
    })
}

/// `f_{Q,mu}`.
pub fn mean(wg: &WeightedGrid, cube: &Cube) -> Result<f64> {
    Ok(direct_probe(wg, cube)?.mean())
}

/// Mean, oscillation and lower half-deviation of `f` on `cube`, in a single
/// pass over the cube's cells.
pub fn oscillation(wg: &WeightedGrid, cube: &Cube) -> Result<OscStats> {
    let probe = direct_probe(wg, cube)?;
    let (abs, lower) = probe.deviations();
    let mass = probe.mass;
    Ok(OscStats {
        mean: probe.mean(),
        osc: abs / (mass * mass),
        lower_half: lower / mass,
        mass,
    })
}

/// Sharp discrete GR parameter: the largest `Omega_mu(f;Q) / f_{Q,mu}` over
/// the positive-mass cubes of `mode`, with `0/0 = 0` on cubes where `f`
/// vanishes mu-a.e.
pub fn gr_epsilon(wg: &WeightedGrid, mode: &EnumerationMode) -> Result<GrResult> {
    gr_epsilon_with(wg, mode, ScanStrategy::Auto)
}

pub fn gr_epsilon_with(
    wg: &WeightedGrid,
    mode: &EnumerationMode,
    strategy: ScanStrategy,
) -> Result<GrResult> {
    let mut best = None;
    let scanned = scan(wg, mode, strategy, &mut |rank, p| {
        offer_max(&mut best, p.gr_ratio(), rank, p);
    })?;
    let best = best.ok_or(Error::EmptyMeasure)?;
    Ok(GrResult {
        epsilon: best.value,
        witness: best.cube,
        mode: *mode,
        cubes_scanned: scanned,
    })
}
