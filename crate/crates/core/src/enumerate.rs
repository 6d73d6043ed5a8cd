//! Cube families standing in for the quantifier "for any cube `Q ⊂ Q0`".
//!
//! Canonical order (part of the external contract): ascending side, then
//! lexicographic origin with the first axis most significant. The dyadic
//! family is emitted in the same order, so it is a subsequence of the full
//! family. Samples come out in draw order.

use alloc::boxed::Box;
#[cfg(feature = "serde")]
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{Cube, Grid, MAX_DIM};

/// Largest dimension for which every cell-aligned subcube is enumerated or
/// sampled.
pub const MAX_ALL_DIM: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnumerationMode {
    /// Every cell-aligned subcube.
    All,
    /// Dyadic cubes: side `N / 2^j`, origin a multiple of the side.
    Dyadic,
    /// `count` cubes drawn uniformly with replacement from the full family,
    /// using ChaCha8 seeded through `SeedableRng::seed_from_u64(seed)`.
    RandomSample { count: usize, seed: u64 },
}

impl EnumerationMode {
    /// `All` in one dimension, `Dyadic` otherwise.
    pub fn default_for(grid: &Grid) -> Self {
        if grid.dim() == 1 {
            EnumerationMode::All
        } else {
            EnumerationMode::Dyadic
        }
    }

    pub fn check(&self, grid: &Grid) -> Result<()> {
        match self {
            EnumerationMode::All | EnumerationMode::RandomSample { .. }
                if grid.dim() > MAX_ALL_DIM =>
            {
                Err(Error::InvalidMode(alloc::format!(
                    "'{self}' needs dimension <= {MAX_ALL_DIM}, grid has {}",
                    grid.dim()
                )))
            }
            EnumerationMode::Dyadic if !grid.cells_per_axis().is_power_of_two() => {
                Err(Error::InvalidMode(alloc::format!(
                    "dyadic mode needs a power-of-two grid, got {} cells per axis",
                    grid.cells_per_axis()
                )))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for EnumerationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnumerationMode::All => f.write_str("all"),
            EnumerationMode::Dyadic => f.write_str("dyadic"),
            EnumerationMode::RandomSample { count, seed } => write!(f, "sample:{count}:{seed}"),
        }
    }
}

impl FromStr for EnumerationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(EnumerationMode::All),
            "dyadic" => Ok(EnumerationMode::Dyadic),
            _ => {
                let bad = || {
                    Error::InvalidMode(alloc::format!(
                        "'{s}' (expected all, dyadic or sample:COUNT:SEED)"
                    ))
                };
                let rest = s.strip_prefix("sample:").ok_or_else(bad)?;
                let (count, seed) = rest.split_once(':').ok_or_else(bad)?;
                let count = count.parse().map_err(|_| bad())?;
                let seed = seed.parse().map_err(|_| bad())?;
                Ok(EnumerationMode::RandomSample { count, seed })
            }
        }
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for EnumerationMode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for EnumerationMode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse()
            .map_err(|e: Error| serde::de::Error::custom(e.to_string()))
    }
}

/// Number of cubes in the full family: `sum_{s=1..N} (N - s + 1)^dim`.
pub fn all_cube_count(grid: &Grid) -> u128 {
    let n = grid.cells_per_axis() as u128;
    (1..=n).map(|s| (n - s + 1).pow(grid.dim() as u32)).sum()
}

/// Number of cubes `enumerate_cubes` will yield.
pub fn cube_count(grid: &Grid, mode: &EnumerationMode) -> u128 {
    match mode {
        EnumerationMode::All => all_cube_count(grid),
        EnumerationMode::Dyadic => {
            let n = grid.cells_per_axis() as u128;
            let mut side = 1;
            let mut total = 0;
            while side <= n {
                total += (n / side).pow(grid.dim() as u32);
                side *= 2;
            }
            total
        }
        EnumerationMode::RandomSample { count, .. } => *count as u128,
    }
}

/// Deterministic cube sequence for `mode`, see the module docs for the order.
pub fn enumerate_cubes(grid: &Grid, mode: &EnumerationMode) -> Result<CubeIter> {
    mode.check(grid)?;
    let n = grid.cells_per_axis();
    let kind = match *mode {
        EnumerationMode::All | EnumerationMode::Dyadic => Kind::Sides {
            dyadic: *mode == EnumerationMode::Dyadic,
            side: 1,
            origin: [0; MAX_DIM],
        },
        EnumerationMode::RandomSample { count, seed } => {
            let d = grid.dim() as u32;
            let mut offsets = Vec::with_capacity(n + 1);
            let mut acc = 0u128;
            offsets.push(0);
            for s in 1..=n as u128 {
                acc += (n as u128 - s + 1).pow(d);
                offsets.push(acc);
            }
            Kind::Sample {
                rng: Box::new(ChaCha8Rng::seed_from_u64(seed)),
                remaining: count,
                offsets,
            }
        }
    };
    Ok(CubeIter {
        dim: grid.dim(),
        n,
        kind,
    })
}

#[derive(Debug, Clone)]
enum Kind {
    Sides {
        dyadic: bool,
        side: usize,
        origin: [usize; MAX_DIM],
    },
    Sample {
        rng: Box<ChaCha8Rng>,
        remaining: usize,
        offsets: Vec<u128>,
    },
}

/// Iterator returned by [`enumerate_cubes`].
#[derive(Debug, Clone)]
pub struct CubeIter {
    dim: usize,
    n: usize,
    kind: Kind,
}

impl Iterator for CubeIter {
    type Item = Cube;

    fn next(&mut self) -> Option<Cube> {
        let (dim, n) = (self.dim, self.n);
        match &mut self.kind {
            Kind::Sides {
                dyadic,
                side,
                origin,
            } => {
                if *side > n {
                    return None;
                }
                let cube = Cube::from_parts(*origin, dim, *side);
                let step = if *dyadic { *side } else { 1 };
                let max = n - *side;
                let mut k = dim;
                loop {
                    if k == 0 {
                        // odometer wrapped: next side
                        *side = if *dyadic { *side * 2 } else { *side + 1 };
                        *origin = [0; MAX_DIM];
                        break;
                    }
                    k -= 1;
                    if origin[k] + step <= max {
                        origin[k] += step;
                        break;
                    }
                    origin[k] = 0;
                }
                Some(cube)
            }
            Kind::Sample {
                rng,
                remaining,
                offsets,
            } => {
                if *remaining == 0 {
                    return None;
                }
                *remaining -= 1;
                let total = *offsets.last().unwrap();
                let idx = rng.gen_range(0..total);
                Some(unrank(idx, dim, n, offsets))
            }
        }
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        match &self.kind {
            Kind::Sample { remaining, .. } => (*remaining, Some(*remaining)),
            Kind::Sides { .. } => (0, None),
        }
    }
}

/// Cube at position `idx` of the canonical full family.
fn unrank(idx: u128, dim: usize, n: usize, offsets: &[u128]) -> Cube {
    // offsets[s-1] <= idx < offsets[s]
    let side = offsets.partition_point(|&o| o <= idx);
    let mut r = idx - offsets[side - 1];
    let base = (n - side + 1) as u128;
    let mut origin = [0; MAX_DIM];
    for k in (0..dim).rev() {
        origin[k] = (r % base) as usize;
        r /= base;
    }
    Cube::from_parts(origin, dim, side)
}
