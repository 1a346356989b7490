//! Replication statistics: mean and Student-t confidence half-width.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::num::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary<T> {
    pub n: usize,
    pub mean: T,
    /// Half-width of the 95% interval; absent below two samples.
    pub ci95: Option<T>,
}

/// Two-sided 95% critical value of Student's t with `df` degrees of freedom.
pub fn t_critical(df: usize) -> f64 {
    StudentsT::new(0.0, 1.0, df as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975)
}

/// Aggregates replication values. Values are sorted first so that the
/// result does not depend on replication order. Returns `None` when empty.
pub fn aggregate<T: Scalar>(values: &[T]) -> Option<Summary<T>> {
    if values.is_empty() {
        return None;
    }
    let mut v: Vec<T> = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = v.len();
    let nf = T::of(n as f64);
    if v[0] == v[n - 1] {
        return Some(Summary { n, mean: v[0], ci95: (n >= 2).then(T::zero) });
    }
    let mean = v.iter().fold(T::zero(), |a, &x| a + x) / nf;
    if n < 2 {
        return Some(Summary { n, mean, ci95: None });
    }
    let ss = v.iter().fold(T::zero(), |a, &x| a + (x - mean) * (x - mean));
    let sd = (ss / T::of((n - 1) as f64)).sqrt();
    let half = T::of(t_critical(n - 1)) * sd / nf.sqrt();
    Some(Summary { n, mean, ci95: Some(half) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_values_have_zero_width() {
        let s = aggregate(&[0.7_f64; 10]).unwrap();
        assert!((s.mean - 0.7).abs() < 1e-15);
        assert_eq!(s.ci95, Some(0.0));
    }

    #[test]
    fn two_samples_use_t_with_one_df() {
        let s = aggregate(&[0.9_f64, 1.0]).unwrap();
        assert!((s.mean - 0.95).abs() < 1e-12);
        // independent: t(0.975, 1) = tan(0.475 pi); sd/sqrt(2) = 0.05
        let oracle = (0.475 * std::f64::consts::PI).tan() * 0.05;
        assert!((s.ci95.unwrap() - oracle).abs() < 1e-6);
        assert!((s.ci95.unwrap() - 0.635).abs() < 1e-3);
    }

    #[test]
    fn single_sample_has_no_interval() {
        let s = aggregate(&[3.0_f32]).unwrap();
        assert_eq!(s.mean, 3.0);
        assert!(s.ci95.is_none());
        assert!(aggregate::<f64>(&[]).is_none());
    }
}
