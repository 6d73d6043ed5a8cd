//! Rearrangement bound for GR functions, the reverse Hölder exponent it
//! implies, and the empirical reverse Hölder constant.
//!
//! With `K = B (lambda/rho + 1) epsilon / (lambda - epsilon) + 1` the bound
//! reads `f**(t) <= K f*(t)` for `t <= rho mu(Q0)`, and the exponent bound is
//! `p_max = 1 + 1/(K - 1)`. The verifier builds an actual covering for every
//! `t` and checks the bound with the constants that covering achieves.

use alloc::vec::Vec;

use crate::ainfty::GR_SLACK;
use crate::covering::{build_covering_with, CellSet, CoveringStyle};
use crate::enumerate::{enumerate_cubes, EnumerationMode};
use crate::error::{Error, Result};
use crate::grid::{Cube, WeightedGrid};
use crate::oscillation::{gr_epsilon_with, oscillation, GrResult};
use crate::prefix::PrefixTable;
use crate::rearrangement::{rearrangement, StepFunction};
use crate::scan::ScanStrategy;

/// Relative slack on `t <= rho mu(Q0)` and on the final inequality.
const REL_TOL: f64 = 1e-12;

fn check_constants(epsilon: f64, lambda: f64, rho: f64, b: f64) -> Result<()> {
    if !(0.0 < epsilon && epsilon < lambda && lambda < 2.0) {
        return Err(Error::param(alloc::format!(
            "need 0 < epsilon < lambda < 2, got epsilon = {epsilon}, lambda = {lambda}"
        )));
    }
    if !(0.0 < rho && rho < 1.0 - lambda / 2.0) {
        return Err(Error::param(alloc::format!(
            "need 0 < rho < 1 - lambda/2 = {}, got rho = {rho}",
            1.0 - lambda / 2.0
        )));
    }
    if !(b >= 1.0 && b.is_finite()) {
        return Err(Error::param(alloc::format!("need B >= 1, got {b}")));
    }
    Ok(())
}

fn k_formula(epsilon: f64, lambda: f64, rho: f64, b: f64) -> f64 {
    b * (lambda / rho + 1.0) * epsilon / (lambda - epsilon) + 1.0
}

/// `K = B (lambda/rho + 1) epsilon / (lambda - epsilon) + 1`.
pub fn thm2_bound(epsilon: f64, lambda: f64, rho: f64, b: f64) -> Result<f64> {
    check_constants(epsilon, lambda, rho, b)?;
    Ok(k_formula(epsilon, lambda, rho, b))
}

/// `p_max = 1 + (lambda - epsilon) / (B (lambda/rho + 1) epsilon)`.
pub fn rh_exponent_bound(epsilon: f64, lambda: f64, rho: f64, b: f64) -> Result<f64> {
    check_constants(epsilon, lambda, rho, b)?;
    Ok(1.0 + (lambda - epsilon) / (b * (lambda / rho + 1.0) * epsilon))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Thm2Params {
    epsilon: f64,
    lambda: f64,
    rho: f64,
    t_values: Vec<f64>,
}

impl Thm2Params {
    /// Checks `0 < epsilon < lambda < 2`, `0 < rho < 1 - lambda/2` and
    /// `t > 0`; the bound `t <= rho mu(Q0)` depends on the data and is
    /// checked by the verifier.
    pub fn new(epsilon: f64, lambda: f64, rho: f64, t_values: Vec<f64>) -> Result<Self> {
        check_constants(epsilon, lambda, rho, 1.0)?;
        if let Some(t) = t_values.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(Error::param(alloc::format!("need t > 0, got {t}")));
        }
        Ok(Self {
            epsilon,
            lambda,
            rho,
            t_values,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn t_values(&self) -> &[f64] {
        &self.t_values
    }
}

/// Constants achieved by one covering, or aggregated over several.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CoveringConstants {
    pub cubes: usize,
    pub rho_lo: Option<f64>,
    pub rho_hi: Option<f64>,
    pub overlap: usize,
}

impl CoveringConstants {
    fn merge(self, other: Self) -> Self {
        let opt = |a: Option<f64>, b: Option<f64>, f: fn(f64, f64) -> f64| match (a, b) {
            (Some(x), Some(y)) => Some(f(x, y)),
            (x, y) => x.or(y),
        };
        Self {
            cubes: self.cubes + other.cubes,
            rho_lo: opt(self.rho_lo, other.rho_lo, f64::min),
            rho_hi: opt(self.rho_hi, other.rho_hi, f64::max),
            overlap: self.overlap.max(other.overlap),
        }
    }
}

/// Outcome at one `t`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Thm2Record {
    pub t: f64,
    pub fstar: f64,
    pub fstarstar: f64,
    /// `mu(E_t)`, `E_t = {f > f*(t)}`.
    pub set_mass: f64,
    /// Bound with the requested `rho` and the achieved overlap.
    pub k_nominal: f64,
    /// Bound with the achieved lower density and overlap.
    pub k_achieved: f64,
    /// `min_i (lambda/(lambda - epsilon) f*(t) - f_{Q_i})`; `None` without cubes.
    pub eq4_margin: Option<f64>,
    /// `min_i (epsilon lambda/(lambda - epsilon) f*(t) - Omega(f; Q_i))`.
    pub eq5_margin: Option<f64>,
    pub holds: bool,
    /// `f*(t) = 0`; then `holds` means `f**(t) = 0`.
    pub degenerate: bool,
    pub covering: CoveringConstants,
}

impl Thm2Record {
    /// `f**(t) <= K_achieved f*(t) (1 + tol)`, or `f**(t) = 0` when `f*(t) = 0`.
    pub fn holds_at(&self, tol: f64) -> bool {
        if self.degenerate {
            self.fstarstar == 0.0
        } else {
            self.fstarstar <= self.k_achieved * self.fstar * (1.0 + tol)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Thm2Report {
    pub params: Thm2Params,
    /// GR parameter measured by the precondition scan.
    pub measured_epsilon: f64,
    pub mode: EnumerationMode,
    pub covering_style: CoveringStyle,
    pub per_t: Vec<Thm2Record>,
    pub covering_constants: CoveringConstants,
    pub holds: bool,
}

/// Precondition scan and rearrangement, shared by the per-`t` checks so
/// that those can run independently.
#[derive(Debug, Clone)]
pub struct Thm2Verifier<'a> {
    wg: &'a WeightedGrid,
    params: Thm2Params,
    mode: EnumerationMode,
    style: CoveringStyle,
    gr: GrResult,
    fstar: StepFunction,
}

impl<'a> Thm2Verifier<'a> {
    /// Confirms `GR(epsilon)` on the family of `mode` and that every `t` is
    /// at most `rho mu(Q0)`. Dyadic mode uses dyadic coverings, so that the
    /// covering cubes are in the verified family.
    pub fn new(wg: &'a WeightedGrid, params: Thm2Params, mode: &EnumerationMode) -> Result<Self> {
        Self::with_strategy(wg, params, mode, ScanStrategy::Auto)
    }

    pub fn with_strategy(
        wg: &'a WeightedGrid,
        params: Thm2Params,
        mode: &EnumerationMode,
        strategy: ScanStrategy,
    ) -> Result<Self> {
        let t_max = params.rho * wg.total_mass();
        if let Some(t) = params
            .t_values
            .iter()
            .find(|&&t| t > t_max * (1.0 + REL_TOL))
        {
            return Err(Error::param(alloc::format!(
                "t = {t} exceeds rho * mu(Q0) = {t_max}"
            )));
        }
        let gr = gr_epsilon_with(wg, mode, strategy)?;
        if gr.epsilon > params.epsilon + GR_SLACK {
            return Err(Error::NotInGr {
                witness: gr.witness,
                ratio: gr.epsilon,
                epsilon: params.epsilon,
            });
        }
        let style = match mode {
            EnumerationMode::Dyadic => CoveringStyle::Dyadic,
            _ => CoveringStyle::Centered,
        };
        Ok(Self {
            wg,
            fstar: rearrangement(wg)?,
            params,
            mode: *mode,
            style,
            gr,
        })
    }

    pub fn params(&self) -> &Thm2Params {
        &self.params
    }

    pub fn rearrangement(&self) -> &StepFunction {
        &self.fstar
    }

    pub fn check_t(&self, t: f64) -> Result<Thm2Record> {
        let Thm2Params {
            epsilon,
            lambda,
            rho,
            ..
        } = self.params;
        let wg = self.wg;
        let fstar = self.fstar.evaluate(t)?;
        let fstarstar = self.fstar.average(t)?;
        let values = wg.values();
        let set = CellSet::from_predicate(wg, |i| values[i] > fstar);
        let cover = build_covering_with(wg, &set, rho, 1.0 - lambda / 2.0, self.style)?;

        let mean_bound = lambda / (lambda - epsilon) * fstar;
        let osc_bound = epsilon * mean_bound;
        let mut eq4: Option<f64> = None;
        let mut eq5: Option<f64> = None;
        for cube in &cover.cubes {
            let s = oscillation(wg, cube)?;
            // the covering cube may lie outside a sampled family
            if s.osc > (epsilon + GR_SLACK) * s.mean {
                return Err(Error::NotInGr {
                    witness: *cube,
                    ratio: s.osc / s.mean,
                    epsilon,
                });
            }
            eq4 = Some(eq4.map_or(mean_bound - s.mean, |m| m.min(mean_bound - s.mean)));
            eq5 = Some(eq5.map_or(osc_bound - s.osc, |m| m.min(osc_bound - s.osc)));
        }

        let b = cover.overlap as f64;
        let k_nominal = k_formula(epsilon, lambda, rho, b);
        let k_achieved = cover
            .rho_lo
            .map_or(1.0, |lo| k_formula(epsilon, lambda, lo, b));
        let mut record = Thm2Record {
            t,
            fstar,
            fstarstar,
            set_mass: set.mass(),
            k_nominal,
            k_achieved,
            eq4_margin: eq4,
            eq5_margin: eq5,
            holds: false,
            degenerate: fstar == 0.0,
            covering: CoveringConstants {
                cubes: cover.cubes.len(),
                rho_lo: cover.rho_lo,
                rho_hi: cover.rho_hi,
                overlap: cover.overlap,
            },
        };
        record.holds = record.holds_at(REL_TOL);
        Ok(record)
    }

    /// Assembles per-`t` records, in the order given, into a report.
    pub fn report(&self, per_t: Vec<Thm2Record>) -> Thm2Report {
        let covering_constants = per_t
            .iter()
            .map(|r| r.covering)
            .reduce(CoveringConstants::merge)
            .unwrap_or(CoveringConstants {
                cubes: 0,
                rho_lo: None,
                rho_hi: None,
                overlap: 1,
            });
        Thm2Report {
            params: self.params.clone(),
            measured_epsilon: self.gr.epsilon,
            mode: self.mode,
            covering_style: self.style,
            holds: per_t.iter().all(|r| r.holds),
            covering_constants,
            per_t,
        }
    }
}

/// Checks `f**(t) <= K f*(t)` at every requested `t` with the constants of
/// an actual covering of `{f > f*(t)}`.
pub fn verify_thm2(
    wg: &WeightedGrid,
    params: &Thm2Params,
    mode: &EnumerationMode,
) -> Result<Thm2Report> {
    let v = Thm2Verifier::new(wg, params.clone(), mode)?;
    let records = params
        .t_values
        .iter()
        .map(|&t| v.check_t(t))
        .collect::<Result<Vec<_>>>()?;
    Ok(v.report(records))
}

/// Maximiser of the exponent bound over `lambda`, with
/// `rho(lambda) = (1 - lambda/2)(1 - delta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RhOptimum {
    pub lambda: f64,
    pub rho: f64,
    pub p: f64,
}

pub const DEFAULT_DELTA: f64 = 1e-6;

/// Golden-section search for the best exponent bound at fixed `epsilon`
/// and `B`. Falls back to a `10^4`-point grid if a coarse pre-scan finds
/// more than one local maximum.
pub fn optimize_rh_exponent(epsilon: f64, b: f64, delta: f64) -> Result<RhOptimum> {
    if !(0.0 < epsilon && epsilon < 2.0) {
        return Err(Error::param(alloc::format!(
            "need 0 < epsilon < 2, got {epsilon}"
        )));
    }
    if !(b >= 1.0 && b.is_finite()) {
        return Err(Error::param(alloc::format!("need B >= 1, got {b}")));
    }
    if !(0.0 < delta && delta < 1.0) {
        return Err(Error::param(alloc::format!(
            "need 0 < delta < 1, got {delta}"
        )));
    }
    let rho_of = |lambda: f64| (1.0 - lambda / 2.0) * (1.0 - delta);
    // p_max on the open interval; endpoints evaluate to 1 in the limit
    let objective = |lambda: f64| {
        if lambda <= epsilon || lambda >= 2.0 {
            1.0
        } else {
            1.0 + (lambda - epsilon) / (b * (lambda / rho_of(lambda) + 1.0) * epsilon)
        }
    };
    let (lo, hi) = (epsilon, 2.0);

    let coarse: Vec<f64> = (1..64)
        .map(|k| objective(lo + (hi - lo) * k as f64 / 64.0))
        .collect();
    let turns = coarse
        .windows(3)
        .filter(|w| w[1] > w[0] && w[1] > w[2])
        .count()
        + coarse
            .windows(3)
            .filter(|w| w[1] < w[0] && w[1] < w[2])
            .count();

    let lambda = if turns <= 1 {
        golden_section_max(objective, lo, hi, 1e-9)
    } else {
        let grid = 10_000;
        (1..grid)
            .map(|k| lo + (hi - lo) * k as f64 / grid as f64)
            .fold((lo, f64::NEG_INFINITY), |best, x| {
                let y = objective(x);
                if y > best.1 {
                    (x, y)
                } else {
                    best
                }
            })
            .0
    };
    Ok(RhOptimum {
        lambda,
        rho: rho_of(lambda),
        p: objective(lambda),
    })
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (libm::sqrt(5.0) - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

/// Largest `p`-mean to mean ratio over a cube family.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RhConstant {
    pub p: f64,
    pub c_hat: f64,
    /// First cube in enumeration order attaining `c_hat`.
    pub witness: Cube,
    pub mode: EnumerationMode,
    pub cubes_scanned: usize,
}

/// `max_Q (mu(Q)^{-1} sum_Q w v^p)^{1/p} / f_Q` over the positive-mass,
/// positive-mean cubes of `mode`. Only certifies the inequality on that
/// family.
pub fn rh_constant(wg: &WeightedGrid, p: f64, mode: &EnumerationMode) -> Result<RhConstant> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::param(alloc::format!("need p > 1, got {p}")));
    }
    let powers: Vec<f64> = wg
        .weights()
        .iter()
        .zip(wg.values())
        .map(|(&w, &v)| w * libm::pow(v, p))
        .collect();
    let table = PrefixTable::build(wg.grid(), &powers);
    let mut best: Option<(f64, Cube)> = None;
    let mut first = None;
    let mut scanned = 0;
    for cube in enumerate_cubes(wg.grid(), mode)? {
        let mass = wg.mass_unchecked(&cube);
        if mass <= 0.0 {
            continue;
        }
        scanned += 1;
        first.get_or_insert(cube);
        let mean = wg.integral_unchecked(&cube) / mass;
        if mean <= 0.0 {
            continue;
        }
        let ratio = libm::pow(table.query(&cube) / mass, 1.0 / p) / mean;
        if best.map_or(true, |(b, _)| ratio > b) {
            best = Some((ratio, cube));
        }
    }
    let first = first.ok_or(Error::EmptyMeasure)?;
    // f = 0 mu-a.e. on every cube: every cube is an equality case
    let (c_hat, witness) = best.unwrap_or((1.0, first));
    Ok(RhConstant {
        p,
        c_hat,
        witness,
        mode: *mode,
        cubes_scanned: scanned,
    })
}
