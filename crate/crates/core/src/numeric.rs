//! Error-free transformations and compensated accumulation.
//!
//! Every sum that feeds an oscillation, a level-set mass or a prefix table goes
//! through [`Compensated`], so results stay accurate when cell masses span
//! twelve orders of magnitude (non-doubling weights).

/// Knuth's TwoSum: `a + b = s + e` exactly.
#[inline]
pub(crate) fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bp = s - a;
    let e = (a - (s - bp)) + (b - bp);
    (s, e)
}

/// Dekker's FastTwoSum, valid when `|a| >= |b|` or `a == 0`.
#[inline]
pub(crate) fn fast_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

/// Running sum with a separately accumulated rounding error
/// (Kahan-Babuška-Neumaier, expressed through [`two_sum`]).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Compensated {
    sum: f64,
    err: f64,
}

impl Compensated {
    pub const fn new() -> Self {
        Self { sum: 0.0, err: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let (s, e) = two_sum(self.sum, x);
        self.sum = s;
        self.err += e;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.err
    }
}

impl core::iter::FromIterator<f64> for Compensated {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Compensated::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<Compensated>().value()
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`; the storage type of
/// prefix tables.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn add(self, other: Self) -> Self {
        let (s, e) = two_sum(self.hi, other.hi);
        let e = e + self.lo + other.lo;
        let (hi, lo) = fast_two_sum(s, e);
        Self { hi, lo }
    }
}
