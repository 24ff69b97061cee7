use crate::error::{Error, Result};
use serde::Serialize;

/// Least-squares line through `(ln lambda, ln error)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeFit {
    pub lambdas: Vec<f64>,
    pub errors: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Minimal number of points entering a fit.
pub const MIN_FIT_POINTS: usize = 4;

/// Fits `ln error = slope ln lambda + intercept` over the strictly positive errors.
pub fn fit_slope(lambdas: &[f64], errors: &[f64]) -> Result<SlopeFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = lambdas
        .iter()
        .zip(errors)
        .filter(|(l, e)| **e > 0.0 && **l > 0.0 && e.is_finite())
        .map(|(l, e)| (*l, *e))
        .unzip();
    if xs.len() < MIN_FIT_POINTS {
        return Err(Error::InvalidArgument(format!(
            "a slope fit needs at least {MIN_FIT_POINTS} positive errors, got {}",
            xs.len()
        )));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let count = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / count;
    let my = ly.iter().sum::<f64>() / count;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(SlopeFit {
        lambdas: xs,
        errors: ys,
        slope,
        intercept,
        r2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_power_law() {
        let l = [0.1, 0.05, 0.02, 0.01];
        let e: Vec<f64> = l.iter().map(|x: &f64| 3.0 * x.powf(1.5)).collect();
        let f = fit_slope(&l, &e).unwrap();
        assert!((f.slope - 1.5).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn drops_nonpositive_errors() {
        let l = [0.1, 0.05, 0.02, 0.01, 0.005];
        let e = [1e-2, 0.0, 4e-4, 1e-4, 2.5e-5];
        assert_eq!(fit_slope(&l, &e).unwrap().lambdas.len(), 4);
        assert!(fit_slope(&l[..4], &e[..4]).is_err());
    }
}
