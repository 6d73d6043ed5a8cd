//! Level-set certificates for `A_inf(mu)` and both directions of the
//! GR / `A_inf` equivalence, with explicit constants.
//!
//! Conventions shared by every scan here:
//!
//! * cubes with `f_Q = 0` are skipped: `f` vanishes mu-a.e. on them, so no
//!   level-set certificate with `alpha > 0` can hold, while the GR inequality
//!   holds vacuously; the count of skipped cubes is reported;
//! * the level set is the strict `{f > beta * f_Q}`, and the `A_inf`
//!   condition is the strict `> alpha * mu(Q)`;
//! * a verified inequality "holds" when every cube's margin, divided by the
//!   cube's natural scale (`mu(Q)` for mass inequalities, `f_Q` for
//!   oscillation inequalities), is at least `-HOLDS_REL_TOL`.

use crate::enumerate::EnumerationMode;
use crate::error::{Error, Result};
use crate::grid::{Cube, WeightedGrid};
use crate::oscillation::mean;
use crate::scan::{offer_max, offer_min, scan, Extremum, ScanStrategy};

/// Relative tolerance behind every `holds` flag.
pub const HOLDS_REL_TOL: f64 = 1e-12;

/// Slack allowed when re-checking `Omega/f_Q <= epsilon`; the ratio is
/// dimensionless, and a measured epsilon fed back in must pass even when a
/// different scan strategy recomputes it.
pub const GR_SLACK: f64 = 1e-12;

/// `(alpha, beta)`, both strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LevelParams {
    alpha: f64,
    beta: f64,
}

impl LevelParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let open = |x: f64| x > 0.0 && x < 1.0;
        if !open(alpha) || !open(beta) {
            return Err(Error::param(alloc::format!(
                "need 0 < alpha, beta < 1, got alpha = {alpha}, beta = {beta}"
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Outcome of verifying an inequality over a cube family.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MarginReport {
    /// Smallest `LHS - RHS` over the scanned cubes.
    pub worst_margin: f64,
    /// Cube attaining `worst_margin` (canonical tie-break).
    pub witness: Cube,
    /// Smallest margin relative to its cube's scale.
    pub relative_margin: f64,
    pub holds: bool,
    pub mode: EnumerationMode,
    pub cubes_scanned: usize,
    pub zero_mean_skipped: usize,
}

impl MarginReport {
    /// Re-evaluates `holds` at another relative tolerance.
    pub fn holds_at(&self, tol: f64) -> bool {
        self.relative_margin >= -tol
    }
}

/// Result of [`alpha_profile`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AlphaProfile {
    pub beta: f64,
    /// `min mu{f > beta f_Q} / mu(Q)`; `(alpha, beta)` certifies `A_inf` for
    /// every `alpha < alpha_star`.
    pub alpha_star: f64,
    pub witness: Cube,
    pub mode: EnumerationMode,
    pub cubes_scanned: usize,
    pub zero_mean_skipped: usize,
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(Error::param(alloc::format!(
            "need 0 < beta < 1, got {beta}"
        )))
    }
}

fn check_epsilon_lambda(epsilon: f64, lambda: f64) -> Result<()> {
    if 0.0 < epsilon && epsilon < lambda && lambda < 2.0 {
        Ok(())
    } else {
        Err(Error::param(alloc::format!(
            "need 0 < epsilon < lambda < 2, got epsilon = {epsilon}, lambda = {lambda}"
        )))
    }
}

/// `mu{x in Q : f(x) > beta f_Q} / mu(Q)`.
pub fn level_fraction(wg: &WeightedGrid, cube: &Cube, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let m = mean(wg, cube)?;
    let mass = wg.mass_unchecked(cube);
    let threshold = beta * m;
    let (w, v) = (wg.weights(), wg.values());
    let above = crate::numeric::compensated_sum(
        wg.grid()
            .rows(cube)
            .flatten()
            .filter(|&i| v[i] > threshold)
            .map(|i| w[i]),
    );
    Ok(above / mass)
}

pub fn alpha_profile(wg: &WeightedGrid, beta: f64, mode: &EnumerationMode) -> Result<AlphaProfile> {
    alpha_profile_with(wg, beta, mode, ScanStrategy::Auto)
}

pub fn alpha_profile_with(
    wg: &WeightedGrid,
    beta: f64,
    mode: &EnumerationMode,
    strategy: ScanStrategy,
) -> Result<AlphaProfile> {
    check_beta(beta)?;
    let mut best = None;
    let mut first = None;
    let mut skipped = 0;
    let scanned = scan(wg, mode, strategy, &mut |rank, p| {
        // fallback witness if f vanishes everywhere
        offer_min(&mut first, rank as f64, rank, p);
        let m = p.mean();
        if m <= 0.0 {
            skipped += 1;
            return;
        }
        let fraction = p.mass_above(beta * m) / p.mass();
        offer_min(&mut best, fraction, rank, p);
    })?;
    let first = first.ok_or(Error::EmptyMeasure)?;
    // f = 0 mu-a.e.: the certificate holds vacuously
    let best = best.unwrap_or(Extremum {
        value: 1.0,
        ..first
    });
    Ok(AlphaProfile {
        beta,
        alpha_star: best.value,
        witness: best.cube,
        mode: *mode,
        cubes_scanned: scanned,
        zero_mean_skipped: skipped,
    })
}

/// Certificate guaranteed by GR(epsilon): `beta = 1 - epsilon/lambda`,
/// `alpha = 1 - lambda/2` (attained with `>=`; any smaller alpha is strict).
pub fn thm1_forward_params(epsilon: f64, lambda: f64) -> Result<LevelParams> {
    check_epsilon_lambda(epsilon, lambda)?;
    LevelParams::new(1.0 - lambda / 2.0, 1.0 - epsilon / lambda)
}

/// GR parameter implied by an `A_inf(alpha, beta)` certificate:
/// `2 (1 - alpha beta)`.
pub fn thm1_reverse_bound(params: &LevelParams) -> f64 {
    2.0 * (1.0 - params.alpha * params.beta)
}

/// GR parameter after going forward then back:
/// `2(1 - (1 - lambda/2)(1 - epsilon/lambda)) = lambda + 2 epsilon/lambda - epsilon`.
pub fn roundtrip_epsilon(epsilon: f64, lambda: f64) -> Result<f64> {
    check_epsilon_lambda(epsilon, lambda)?;
    Ok(lambda + 2.0 * epsilon / lambda - epsilon)
}

struct MarginScan {
    raw: Option<Extremum>,
    relative: Option<Extremum>,
    skipped: usize,
}

impl MarginScan {
    fn new() -> Self {
        Self {
            raw: None,
            relative: None,
            skipped: 0,
        }
    }

    fn finish(self, wg: &WeightedGrid, mode: &EnumerationMode, scanned: usize) -> MarginReport {
        let (worst_margin, witness) = match self.raw {
            Some(e) => (e.value, e.cube),
            None => (0.0, wg.grid().full_cube()),
        };
        let relative_margin = self.relative.map_or(0.0, |e| e.value);
        MarginReport {
            worst_margin,
            witness,
            relative_margin,
            holds: relative_margin >= -HOLDS_REL_TOL,
            mode: *mode,
            cubes_scanned: scanned,
            zero_mean_skipped: self.skipped,
        }
    }
}

/// Checks `mu{f > (1 - epsilon/lambda) f_Q} >= (1 - lambda/2) mu(Q)` on every
/// cube, after confirming the input is in GR(epsilon) on the same family.
pub fn verify_thm1_forward(
    wg: &WeightedGrid,
    epsilon: f64,
    lambda: f64,
    mode: &EnumerationMode,
) -> Result<MarginReport> {
    verify_thm1_forward_with(wg, epsilon, lambda, mode, ScanStrategy::Auto)
}

pub fn verify_thm1_forward_with(
    wg: &WeightedGrid,
    epsilon: f64,
    lambda: f64,
    mode: &EnumerationMode,
    strategy: ScanStrategy,
) -> Result<MarginReport> {
    let params = thm1_forward_params(epsilon, lambda)?;
    let mut margins = MarginScan::new();
    let mut worst_ratio = None;
    let scanned = scan(wg, mode, strategy, &mut |rank, p| {
        let m = p.mean();
        if m <= 0.0 {
            margins.skipped += 1;
            return;
        }
        offer_max(&mut worst_ratio, p.gr_ratio(), rank, p);
        let mass = p.mass();
        let margin = p.mass_above(params.beta * m) - params.alpha * mass;
        offer_min(&mut margins.raw, margin, rank, p);
        offer_min(&mut margins.relative, margin / mass, rank, p);
    })?;
    if scanned == 0 {
        return Err(Error::EmptyMeasure);
    }
    if let Some(w) = worst_ratio {
        if w.value > epsilon + GR_SLACK {
            return Err(Error::NotInGr {
                witness: w.cube,
                ratio: w.value,
                epsilon,
            });
        }
    }
    Ok(margins.finish(wg, mode, scanned))
}

/// Checks `Omega_mu(f;Q) <= 2(1 - alpha beta) f_Q` on every cube, after
/// confirming the strict level-set condition with `(alpha, beta)` on the
/// same family.
pub fn verify_thm1_reverse(
    wg: &WeightedGrid,
    params: &LevelParams,
    mode: &EnumerationMode,
) -> Result<MarginReport> {
    verify_thm1_reverse_with(wg, params, mode, ScanStrategy::Auto)
}

pub fn verify_thm1_reverse_with(
    wg: &WeightedGrid,
    params: &LevelParams,
    mode: &EnumerationMode,
    strategy: ScanStrategy,
) -> Result<MarginReport> {
    let bound = thm1_reverse_bound(params);
    let mut margins = MarginScan::new();
    let mut worst_fraction = None;
    let scanned = scan(wg, mode, strategy, &mut |rank, p| {
        let m = p.mean();
        if m <= 0.0 {
            margins.skipped += 1;
            return;
        }
        let mass = p.mass();
        offer_min(
            &mut worst_fraction,
            p.mass_above(params.beta * m) / mass,
            rank,
            p,
        );
        let margin = bound * m - p.oscillation();
        offer_min(&mut margins.raw, margin, rank, p);
        offer_min(&mut margins.relative, margin / m, rank, p);
    })?;
    if scanned == 0 {
        return Err(Error::EmptyMeasure);
    }
    if let Some(w) = worst_fraction {
        if w.value <= params.alpha {
            return Err(Error::NotInAInfty {
                witness: w.cube,
                fraction: w.value,
                alpha: params.alpha,
            });
        }
    }
    Ok(margins.finish(wg, mode, scanned))
}
