use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Compressed sample of positive integers: sorted unique values with their
/// multiplicities. Zeros are tallied separately and never enter the fit.
///
/// Prefix sums of counts, `count·x` and `count·ln x` are kept so that the bulk
/// part of a log-likelihood costs `O(log k)` for `k` unique values.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTable {
    values: Vec<u64>,
    counts: Vec<u64>,
    zero_count: u64,
    n: u64,
    cum_count: Vec<u64>,
    cum_x: Vec<f64>,
    cum_ln_x: Vec<f64>,
}

impl FrequencyTable {
    /// Builds a table from `(value, count)` pairs in any order. Duplicate values
    /// are merged, zero counts dropped, and zero values moved to `zero_count`.
    pub fn from_counts<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, u64)>,
    {
        let mut pairs: Vec<(u64, u64)> = pairs.into_iter().filter(|&(_, c)| c > 0).collect();
        pairs.sort_unstable_by_key(|&(v, _)| v);

        let mut zero_count = 0u64;
        let mut values: Vec<u64> = Vec::with_capacity(pairs.len());
        let mut counts: Vec<u64> = Vec::with_capacity(pairs.len());
        for (v, c) in pairs {
            if v == 0 {
                zero_count += c;
            } else if values.last() == Some(&v) {
                *counts.last_mut().unwrap() += c;
            } else {
                values.push(v);
                counts.push(c);
            }
        }
        if values.is_empty() {
            return Err(Error::EmptyTable);
        }
        Ok(Self::assemble(values, counts, zero_count))
    }

    /// Tabulates raw observations.
    pub fn from_values<I>(values: I) -> Result<Self>
    where
        I: IntoIterator<Item = u64>,
    {
        let mut v: Vec<u64> = values.into_iter().collect();
        v.sort_unstable();
        let mut pairs: Vec<(u64, u64)> = Vec::new();
        for x in v {
            match pairs.last_mut() {
                Some((last, c)) if *last == x => *c += 1,
                _ => pairs.push((x, 1)),
            }
        }
        Self::from_counts(pairs)
    }

    fn assemble(values: Vec<u64>, counts: Vec<u64>, zero_count: u64) -> Self {
        let k = values.len();
        let mut cum_count = Vec::with_capacity(k + 1);
        let mut cum_x = Vec::with_capacity(k + 1);
        let mut cum_ln_x = Vec::with_capacity(k + 1);
        cum_count.push(0);
        cum_x.push(0.0);
        cum_ln_x.push(0.0);
        for (&v, &c) in values.iter().zip(&counts) {
            let cf = c as f64;
            cum_count.push(cum_count.last().unwrap() + c);
            cum_x.push(cum_x.last().unwrap() + cf * v as f64);
            cum_ln_x.push(cum_ln_x.last().unwrap() + cf * math::ln(v as f64));
        }
        let n = *cum_count.last().unwrap();
        FrequencyTable { values, counts, zero_count, n, cum_count, cum_x, cum_ln_x }
    }

    /// `(value, count)` pairs in increasing value order.
    pub fn entries(&self) -> impl ExactSizeIterator<Item = (u64, u64)> + '_ {
        self.values.iter().copied().zip(self.counts.iter().copied())
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Number of unique positive values.
    pub fn unique_len(&self) -> usize {
        self.values.len()
    }

    /// Total positive observations.
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn zero_count(&self) -> u64 {
        self.zero_count
    }

    pub fn min_value(&self) -> u64 {
        self.values[0]
    }

    pub fn max_value(&self) -> u64 {
        *self.values.last().unwrap()
    }

    /// Index of the first unique value strictly greater than `u`.
    pub fn split_index(&self, u: u64) -> usize {
        self.values.partition_point(|&v| v <= u)
    }

    /// `#{x_i <= u}`
    pub fn count_at_most(&self, u: u64) -> u64 {
        self.cum_count[self.split_index(u)]
    }

    /// `#{x_i > u}`
    pub fn count_exceeding(&self, u: u64) -> u64 {
        self.n - self.count_at_most(u)
    }

    /// `Σ_{x_i <= u} x_i`
    pub(crate) fn sum_at_most(&self, u: u64) -> f64 {
        self.cum_x[self.split_index(u)]
    }

    /// `Σ_{x_i <= u} ln x_i`
    pub(crate) fn sum_ln_at_most(&self, u: u64) -> f64 {
        self.cum_ln_x[self.split_index(u)]
    }

    /// Empirical `Pr(X >= x)` with zeros excluded.
    pub fn empirical_survival(&self, x: u64) -> f64 {
        if x == 0 {
            return 1.0;
        }
        self.count_exceeding(x - 1) as f64 / self.n as f64
    }

    /// Table with every count multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> Self {
        assert!(factor > 0, "scale factor must be positive");
        let counts = self.counts.iter().map(|c| c * factor).collect();
        Self::assemble(self.values.clone(), counts, self.zero_count * factor)
    }

    /// Expands the table back into sorted raw observations, zeros included.
    pub fn to_values(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity((self.n + self.zero_count) as usize);
        out.extend(core::iter::repeat(0).take(self.zero_count as usize));
        for (v, c) in self.entries() {
            out.extend(core::iter::repeat(v).take(c as usize));
        }
        out
    }
}
