use std::collections::HashSet;

use crate::class::EvaluationMatrix;
use crate::error::{Error, Result};

/// Number of distinct vectors `(f(X_1), ..., f(X_n))` over a binary class.
pub fn shattering_number(matrix: &EvaluationMatrix) -> Result<usize> {
    if !matrix.is_binary() {
        return Err(Error::NotBinary);
    }
    let words = matrix.n().div_ceil(64);
    let patterns: HashSet<Vec<u64>> = (0..matrix.m())
        .map(|j| {
            let mut bits = vec![0u64; words];
            for (i, v) in matrix.column(j).iter().enumerate() {
                if *v == 1.0 {
                    bits[i / 64] |= 1 << (i % 64);
                }
            }
            bits
        })
        .collect();
    Ok(patterns.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn thresholds(points: &[f64], cuts: &[f64]) -> EvaluationMatrix {
        let cols: Vec<Vec<f64>> =
            cuts.iter().map(|c| points.iter().map(|x| if x >= c { 1.0 } else { 0.0 }).collect()).collect();
        EvaluationMatrix::from_columns(&cols).unwrap()
    }

    #[test]
    fn interleaved_thresholds() {
        let points: Vec<f64> = (0..10).map(|i| i as f64 + 0.5).collect();
        let cuts: Vec<f64> = (0..11).map(|i| i as f64).collect();
        assert_eq!(shattering_number(&thresholds(&points, &cuts)).unwrap(), 11);
    }

    #[test]
    fn coincident_columns_collapse() {
        let points = [0.5, 1.5];
        assert_eq!(shattering_number(&thresholds(&points, &[0.0, 0.1, 0.2])).unwrap(), 1);
    }

    #[test]
    fn fractional_values_rejected() {
        let m = EvaluationMatrix::from_columns(&[vec![0.5, 1.0]]).unwrap();
        assert_eq!(shattering_number(&m), Err(Error::NotBinary));
    }
}
