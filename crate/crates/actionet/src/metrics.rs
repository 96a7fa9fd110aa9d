//! Rank correlation.
//!
//! Spearman's rho is the Pearson correlation of the two rank vectors;
//! ties get the average of their positional ranks, which keeps the
//! centered form exact under ties (the shortcut d^2 formula does not).
//! A constant series has a zero denominator and is reported as an
//! error rather than 0, so a collapsed model surfaces loudly.

use crate::error::{Error, Result};

/// Ascending fractional ranks starting at 1; tied values receive the
/// average of their positional ranks.
pub fn rank(values: &[f64]) -> Result<Vec<f64>> {
    for (i, v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("rank input at index {i}")));
        }
    }
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite"));

    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j (0-based) share the average rank
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    Ok(ranks)
}

/// Spearman's rank correlation of two aligned series.
pub fn spearman(predicted: &[f64], actual: &[f64]) -> Result<f64> {
    if predicted.len() != actual.len() {
        return Err(Error::shape(
            "spearman",
            format!("{} vs {} values", predicted.len(), actual.len()),
        ));
    }
    if predicted.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "spearman needs at least 2 pairs, got {}",
            predicted.len()
        )));
    }
    let rx = rank(predicted)?;
    let ry = rank(actual)?;
    pearson(&rx, &ry)
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut dx = 0.0;
    let mut dy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        num += (a - mx) * (b - my);
        dx += (a - mx) * (a - mx);
        dy += (b - my) * (b - my);
    }
    if dx == 0.0 || dy == 0.0 {
        return Err(Error::UndefinedCorrelation(
            "a series is constant (zero rank variance)".into(),
        ));
    }
    Ok(num / (dx * dy).sqrt())
}

/// Arithmetic mean of correlation values from repeated splits.
pub fn mean_rho(rhos: &[f64]) -> Result<f64> {
    if rhos.is_empty() {
        return Err(Error::InvalidArgument("mean_rho of empty input".into()));
    }
    Ok(rhos.iter().sum::<f64>() / rhos.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_sorted_input() {
        assert_eq!(rank(&[10.0, 20.0, 30.0]).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn rank_ties_average() {
        assert_eq!(rank(&[5.0, 5.0]).unwrap(), vec![1.5, 1.5]);
        assert_eq!(rank(&[1.0, 2.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.5, 2.5, 4.0]);
    }

    #[test]
    fn rank_permutation() {
        assert_eq!(rank(&[3.0, 1.0, 2.0]).unwrap(), vec![3.0, 1.0, 2.0]);
    }

    #[test]
    fn rank_rejects_non_finite() {
        assert!(rank(&[1.0, f64::NAN]).is_err());
        assert!(rank(&[f64::INFINITY]).is_err());
    }

    #[test]
    fn spearman_perfect_agreement() {
        let rho = spearman(&[1.0, 2.0, 3.0, 4.0], &[10.0, 20.0, 30.0, 40.0]).unwrap();
        assert!((rho - 1.0).abs() < 1e-15);
    }

    #[test]
    fn spearman_perfect_disagreement() {
        let rho = spearman(&[1.0, 2.0, 3.0, 4.0], &[9.0, 7.0, 5.0, 3.0]).unwrap();
        assert!((rho + 1.0).abs() < 1e-15);
    }

    #[test]
    fn spearman_constant_series_is_error() {
        let err = spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap_err();
        assert!(matches!(err, Error::UndefinedCorrelation(_)), "{err}");
    }

    #[test]
    fn spearman_needs_two_pairs() {
        assert!(spearman(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn spearman_is_symmetric_and_reflexive() {
        let a = [0.3, 0.9, 0.1, 0.5, 0.7];
        let b = [2.0, 1.0, 4.0, 4.0, 3.0];
        let ab = spearman(&a, &b).unwrap();
        let ba = spearman(&b, &a).unwrap();
        assert!((ab - ba).abs() < 1e-15);
        assert!((spearman(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        assert!(ab.abs() <= 1.0);
    }

    #[test]
    fn mean_rho_examples() {
        assert_eq!(mean_rho(&[0.6]).unwrap(), 0.6);
        assert!((mean_rho(&[0.5, 0.7]).unwrap() - 0.6).abs() < 1e-15);
        assert!(mean_rho(&[]).is_err());
    }
}
