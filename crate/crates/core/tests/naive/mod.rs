//! Brute-force reference implementations on integer data.
//!
//! Masses, integrals and deviation sums are computed in `i128`, so each
//! reported quantity is a single correctly rounded quotient (or one `pow`
//! of one). Cube order is rebuilt here from the definition: ascending side,
//! then origins lexicographically with the first axis most significant.

#![allow(dead_code)]

pub struct IntGrid {
    pub dim: usize,
    pub n: usize,
    pub weights: Vec<i64>,
    pub values: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NaiveCube {
    pub origin: Vec<usize>,
    pub side: usize,
}

pub fn cubes(dim: usize, n: usize, dyadic: bool) -> Vec<NaiveCube> {
    let mut out = Vec::new();
    for side in 1..=n {
        if dyadic && (n % side != 0 || !(n / side).is_power_of_two()) {
            continue;
        }
        let step = if dyadic { side } else { 1 };
        let per_axis: Vec<usize> = (0..=n - side).step_by(step).collect();
        let total = per_axis.len().pow(dim as u32);
        for k in 0..total {
            let mut origin = vec![0; dim];
            let mut rest = k;
            for axis in (0..dim).rev() {
                origin[axis] = per_axis[rest % per_axis.len()];
                rest /= per_axis.len();
            }
            out.push(NaiveCube { origin, side });
        }
    }
    out
}

impl IntGrid {
    pub fn cells_of(&self, q: &NaiveCube) -> Vec<usize> {
        let mut cells = Vec::new();
        let count = q.side.pow(self.dim as u32);
        for k in 0..count {
            let mut idx = 0;
            let mut rest = k;
            let mut coords = vec![0; self.dim];
            for axis in (0..self.dim).rev() {
                coords[axis] = q.origin[axis] + rest % q.side;
                rest /= q.side;
            }
            for &c in &coords {
                idx = idx * self.n + c;
            }
            cells.push(idx);
        }
        cells
    }

    fn mass_integral(&self, cells: &[usize]) -> (i128, i128) {
        let m = cells.iter().map(|&i| self.weights[i] as i128).sum();
        let s = cells
            .iter()
            .map(|&i| self.weights[i] as i128 * self.values[i] as i128)
            .sum();
        (m, s)
    }

    /// `(epsilon, witness)`.
    pub fn gr_epsilon(&self, dyadic: bool) -> (f64, NaiveCube) {
        let mut best: Option<(f64, NaiveCube)> = None;
        for q in cubes(self.dim, self.n, dyadic) {
            let cells = self.cells_of(&q);
            let (m, s) = self.mass_integral(&cells);
            if m == 0 {
                continue;
            }
            let ratio = if s > 0 {
                let dev: i128 = cells
                    .iter()
                    .map(|&i| self.weights[i] as i128 * (m * self.values[i] as i128 - s).abs())
                    .sum();
                dev as f64 / (m * s) as f64
            } else {
                0.0
            };
            if best.as_ref().map_or(true, |b| ratio > b.0) {
                best = Some((ratio, q));
            }
        }
        best.unwrap()
    }

    /// `(alpha_star, witness)`.
    pub fn alpha_profile(&self, beta: f64, dyadic: bool) -> (f64, NaiveCube) {
        let mut best: Option<(f64, NaiveCube)> = None;
        let mut first = None;
        for q in cubes(self.dim, self.n, dyadic) {
            let cells = self.cells_of(&q);
            let (m, s) = self.mass_integral(&cells);
            if m == 0 {
                continue;
            }
            if first.is_none() {
                first = Some(q.clone());
            }
            if s == 0 {
                continue;
            }
            let threshold = beta * (s as f64 / m as f64);
            let above: i128 = cells
                .iter()
                .filter(|&&i| self.values[i] as f64 > threshold)
                .map(|&i| self.weights[i] as i128)
                .sum();
            let fraction = above as f64 / m as f64;
            if best.as_ref().map_or(true, |b| fraction < b.0) {
                best = Some((fraction, q));
            }
        }
        best.unwrap_or((1.0, first.unwrap()))
    }

    /// `(c_hat, witness)` for an integer exponent.
    pub fn rh_constant(&self, p: u32, dyadic: bool) -> (f64, NaiveCube) {
        let mut best: Option<(f64, NaiveCube)> = None;
        let mut first = None;
        for q in cubes(self.dim, self.n, dyadic) {
            let cells = self.cells_of(&q);
            let (m, s) = self.mass_integral(&cells);
            if m == 0 {
                continue;
            }
            if first.is_none() {
                first = Some(q.clone());
            }
            if s == 0 {
                continue;
            }
            let moment: i128 = cells
                .iter()
                .map(|&i| self.weights[i] as i128 * (self.values[i] as i128).pow(p))
                .sum();
            let pmean = libm::pow(moment as f64 / m as f64, 1.0 / p as f64);
            let c = pmean / (s as f64 / m as f64);
            if best.as_ref().map_or(true, |b| c > b.0) {
                best = Some((c, q));
            }
        }
        best.unwrap_or((1.0, first.unwrap()))
    }
}
