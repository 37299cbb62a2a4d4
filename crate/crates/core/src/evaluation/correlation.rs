use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::model::SimilarityMatrix;

/// Product-moment correlation, computed in two passes (means, then centered
/// sums).
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::argument(format!(
            "vector lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::argument("correlation needs at least 3 values"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::argument("correlation input is not finite"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::argument("correlation is undefined for a constant vector"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Correlation of the strictly-lower triangles of two similarity matrices
/// over the same concepts. `b` is reordered to `a`'s concept order if
/// needed. Returns `(r, number of pairs)`.
pub fn matrix_correlation(a: &SimilarityMatrix, b: &SimilarityMatrix) -> Result<(f64, usize)> {
    let b = if a.ids() == b.ids() {
        b.clone()
    } else {
        let left: BTreeSet<&String> = a.ids().iter().collect();
        let right: BTreeSet<&String> = b.ids().iter().collect();
        if left != right {
            return Err(Error::ConceptMismatch {
                only_left: left.difference(&right).map(|s| s.to_string()).collect(),
                only_right: right.difference(&left).map(|s| s.to_string()).collect(),
            });
        }
        b.subset(a.ids())?
    };
    let (x, y) = (a.lower_triangle(), b.lower_triangle());
    Ok((pearson(&x, &y)?, x.len()))
}
