//! Compensated sums and Monte-Carlo summary statistics.

use crate::error::{Error, Result};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

pub fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut s = CompensatedSum::default();
    for x in xs {
        s.add(x);
    }
    s.value()
}

/// `(mean, standard error of the mean)`; the error is 0 for one sample.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = compensated_sum(xs.iter().copied()) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss = compensated_sum(xs.iter().map(|x| (x - mean) * (x - mean)));
    let var = ss / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Mean of `a - b` over paired trials and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedDifference {
    pub mean: f64,
    pub std_err: f64,
    pub n: usize,
}

impl PairedDifference {
    /// `mean > k * std_err` with a strictly positive mean.
    pub fn exceeds(&self, k: f64) -> bool {
        self.mean > 0.0 && self.mean > k * self.std_err
    }

    /// `|mean| <= k * std_err`.
    pub fn indistinguishable(&self, k: f64) -> bool {
        self.mean.abs() <= k * self.std_err
    }

    /// `mean <= k * std_err`: not significantly positive.
    pub fn not_above(&self, k: f64) -> bool {
        self.mean <= k * self.std_err
    }
}

pub fn paired_difference(a: &[f64], b: &[f64]) -> Result<PairedDifference> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            field: "paired samples",
            found: b.len(),
            expected: a.len(),
        });
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let (mean, std_err) = mean_and_stderr(&diffs);
    Ok(PairedDifference {
        mean,
        std_err,
        n: diffs.len(),
    })
}

/// Pooled ratio `sum(num) / sum(den)` with a ratio-estimator standard error
/// computed across trials.
pub fn pooled_ratio(num: &[f64], den: &[f64]) -> (f64, f64) {
    let total_den = compensated_sum(den.iter().copied());
    if total_den == 0.0 {
        return (0.0, 0.0);
    }
    let p = compensated_sum(num.iter().copied()) / total_den;
    let n = num.len() as f64;
    if n < 2.0 {
        return (p, 0.0);
    }
    let ss = compensated_sum(num.iter().zip(den).map(|(a, d)| (a - p * d).powi(2)));
    let se = (ss * n / (n - 1.0)).sqrt() / total_den;
    (p, se)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensation_recovers_lost_bits() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(xs), 2.0);
        let naive: f64 = xs.iter().sum();
        assert_ne!(naive, 2.0);
    }

    #[test]
    fn stderr_examples() {
        assert_eq!(mean_and_stderr(&[3.0]), (3.0, 0.0));
        let (m, se) = mean_and_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn paired_examples() {
        let d = paired_difference(&[2.0, 3.0, 4.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((d.mean, d.std_err), (1.0, 0.0));
        assert!(d.exceeds(3.0));
        assert!(paired_difference(&[1.0], &[]).is_err());
        let same = paired_difference(&[1.0, 5.0], &[1.0, 5.0]).unwrap();
        assert!(same.indistinguishable(3.0) && !same.exceeds(3.0));
    }

    #[test]
    fn pooled_ratio_matches_binomial_for_unit_trials() {
        let num = [1.0, 0.0, 1.0, 1.0];
        let den = [1.0; 4];
        let (p, se) = pooled_ratio(&num, &den);
        assert_eq!(p, 0.75);
        assert!((se - (0.75f64 * 0.25 / 3.0).sqrt()).abs() < 1e-12);
    }
}
