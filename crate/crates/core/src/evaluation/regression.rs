use crate::error::{Error, Result};

const RANK_TOL: f64 = 1e-10;

/// OLS coefficient of determination with an intercept.
///
/// Columns are centered (absorbing the intercept) and factored with
/// Householder QR; the explained sum of squares is the squared norm of the
/// leading `p` entries of `Qᵀy`.
pub fn rsquared(target: &[f64], predictors: &[&[f64]]) -> Result<f64> {
    let n = target.len();
    let p = predictors.len();
    if p == 0 {
        return Err(Error::argument("regression needs at least one predictor"));
    }
    if let Some(x) = predictors.iter().find(|x| x.len() != n) {
        return Err(Error::argument(format!(
            "predictor has {} values, target has {n}",
            x.len()
        )));
    }
    if n <= p + 1 {
        return Err(Error::argument(format!(
            "{n} observations for {p} predictors and an intercept"
        )));
    }
    if target
        .iter()
        .chain(predictors.iter().flat_map(|x| x.iter()))
        .any(|v| !v.is_finite())
    {
        return Err(Error::argument("regression input is not finite"));
    }
    let center = |v: &[f64]| -> Vec<f64> {
        let m = v.iter().sum::<f64>() / n as f64;
        v.iter().map(|x| x - m).collect()
    };
    let mut y = center(target);
    let sst: f64 = y.iter().map(|v| v * v).sum();
    if sst == 0.0 {
        return Err(Error::argument("target is constant"));
    }
    let mut cols: Vec<Vec<f64>> = predictors.iter().map(|x| center(x)).collect();
    let scale = cols
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max);

    let mut rank = 0;
    for k in 0..p {
        let norm = cols[k][k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= RANK_TOL * scale.max(f64::MIN_POSITIVE) {
            continue;
        }
        rank += 1;
        // reflector v = x + sign(x_k)‖x‖e_k, applied as I − 2vvᵀ/vᵀv
        let alpha = if cols[k][k] >= 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = cols[k][k..].to_vec();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|a| a * a).sum();
        let reflect = |x: &mut [f64]| {
            let dot: f64 = v.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
            let f = 2.0 * dot / vv;
            for (xi, vi) in x.iter_mut().zip(&v) {
                *xi -= f * vi;
            }
        };
        for col in cols.iter_mut().skip(k) {
            reflect(&mut col[k..]);
        }
        reflect(&mut y[k..]);
    }
    if rank < p {
        return Err(Error::RankDeficient { predictors: p, rank });
    }
    let explained: f64 = y[..p].iter().map(|v| v * v).sum();
    Ok((explained / sst).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_values() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!((rsquared(&x, &[&x]).unwrap() - 1.0).abs() < 1e-12);
        // centered x = [-1.5,-.5,.5,1.5], centered y (mean 2.75) = [-1.75,-.75,.25,2.25]
        // Sxy = 6.5, Sxx = 5, Syy = 8.75 → R² = 6.5² / (5 · 8.75)
        let r2 = rsquared(&[1.0, 2.0, 3.0, 5.0], &[&x]).unwrap();
        assert!((r2 - 42.25 / 43.75).abs() < 1e-12);
        // orthogonal after centering
        let r2 = rsquared(&[1.0, -1.0, -1.0, 1.0], &[&x]).unwrap();
        assert!(r2.abs() < 1e-12);
    }

    #[test]
    fn rank_deficiency() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let twice: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let y = [2.0, 1.0, 4.0, 3.0, 6.0];
        assert!(matches!(
            rsquared(&y, &[&x, &twice]),
            Err(Error::RankDeficient { predictors: 2, rank: 1 })
        ));
        assert!(rsquared(&y, &[&[1.0; 5]]).is_err());
        assert!(rsquared(&[1.0, 2.0], &[&[1.0, 3.0]]).is_err());
    }
}
