use alloc::vec::Vec;

use super::{DemingConfig, EstimateResult, EstimationError, Method};
use crate::numerics::{dot, sum_of_squares, Matrix, Projector};

/// Maximum-likelihood slope of the no-intercept Deming model from the
/// sufficient statistics `gᵀg`, `eᵀe`, `eᵀg`:
///
/// `α = [gᵀg − δ·eᵀe + √((gᵀg − δ·eᵀe)² + 4δ(eᵀg)²)] / (2·eᵀg)`
///
/// When `gᵀg − δ·eᵀe < 0` the numerator cancels badly, so the algebraically
/// equal form `2δ·eᵀg / (√(…) − (gᵀg − δ·eᵀe))` is used instead.
pub fn deming_closed_form(gg: f64, ee: f64, eg: f64, delta: f64) -> Result<f64, EstimationError> {
    if eg == 0.0 {
        return Err(EstimationError::DegenerateCross);
    }
    let a = gg - delta * ee;
    let root = libm::sqrt(a * a + 4.0 * delta * eg * eg);
    Ok(if a >= 0.0 {
        (a + root) / (2.0 * eg)
    } else {
        2.0 * delta * eg / (root - a)
    })
}

fn check_lengths(g: &[f64], e: &[f64]) -> Result<(), EstimationError> {
    if g.len() != e.len() {
        return Err(EstimationError::LengthMismatch {
            expected: g.len(),
            found: e.len(),
        });
    }
    if g.len() < 2 {
        return Err(EstimationError::RankError {
            rows: g.len(),
            cols: 1,
        });
    }
    Ok(())
}

/// Univariate Deming regression through the origin.
///
/// No standard error is attached; see [`crate::bootstrap`].
pub fn deming_univariate(
    g: &[f64],
    e: &[f64],
    cfg: DemingConfig,
) -> Result<EstimateResult, EstimationError> {
    check_lengths(g, e)?;
    let alpha = deming_closed_form(sum_of_squares(g), sum_of_squares(e), dot(e, g), cfg.delta())?;
    let rss: f64 = g
        .iter()
        .zip(e)
        .map(|(gi, ei)| (gi - alpha * ei) * (gi - alpha * ei))
        .sum();
    let mut r = EstimateResult::new(
        Method::Deming,
        alpha,
        Vec::new(),
        rss / g.len() as f64,
        g.len(),
    );
    r.delta = Some(cfg.delta());
    Ok(r)
}

/// Deming regression with error-free covariates `W`.
///
/// α is the univariate Deming slope of `(I − P_W)g` on `(I − P_W)e`; the
/// covariate coefficients are then the least-squares fit of `g − α·e` on `W`.
pub fn deming_multivariate(
    g: &[f64],
    e: &[f64],
    w: &Matrix,
    cfg: DemingConfig,
) -> Result<EstimateResult, EstimationError> {
    check_lengths(g, e)?;
    if w.rows() != g.len() {
        return Err(EstimationError::LengthMismatch {
            expected: g.len(),
            found: w.rows(),
        });
    }
    let projector = Projector::new(w)?;
    deming_with_projector(g, e, &projector, cfg)
}

pub(crate) fn deming_with_projector(
    g: &[f64],
    e: &[f64],
    projector: &Projector,
    cfg: DemingConfig,
) -> Result<EstimateResult, EstimationError> {
    let g_res = projector.annihilate(g)?;
    let e_res = projector.annihilate(e)?;
    let alpha = deming_closed_form(
        sum_of_squares(&g_res),
        sum_of_squares(&e_res),
        dot(&e_res, &g_res),
        cfg.delta(),
    )?;
    let remainder: Vec<f64> = g.iter().zip(e).map(|(gi, ei)| gi - alpha * ei).collect();
    let gamma = projector.coefficients(&remainder)?;
    let fitted = projector.project(&remainder)?;
    let rss: f64 = remainder
        .iter()
        .zip(fitted.iter())
        .map(|(r, f)| (r - f) * (r - f))
        .sum();
    let mut r = EstimateResult::new(
        Method::Deming,
        alpha,
        gamma.into_inner(),
        rss / g.len() as f64,
        g.len(),
    );
    r.delta = Some(cfg.delta());
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{ols, EstimatorOptions};
    use alloc::vec;

    fn cfg(delta: f64) -> DemingConfig {
        DemingConfig::new(delta).unwrap()
    }

    fn sample() -> (Vec<f64>, Vec<f64>) {
        let e = vec![3.1, 3.4, 3.9, 4.2, 4.8, 5.1, 5.9, 6.3, 6.8, 7.5];
        let g = vec![1.3, 1.7, 1.6, 2.1, 2.0, 2.6, 2.5, 3.0, 3.2, 3.3];
        (g, e)
    }

    #[test]
    fn noiseless_line() {
        let e = [1.0, 2.0, 4.0, 5.5];
        let g: Vec<f64> = e.iter().map(|v| 0.5 * v).collect();
        for d in [1e-3, 0.2, 1.0, 5.0, 1e4] {
            let r = deming_univariate(&g, &e, cfg(d)).unwrap();
            assert!(
                (r.alpha_hat - 0.5).abs() < 1e-12,
                "delta {d}: {}",
                r.alpha_hat
            );
        }
    }

    #[test]
    fn delta_limits() {
        let (g, e) = sample();
        let ls = ols(
            &g,
            &Matrix::from_columns(&[&e]).unwrap(),
            &EstimatorOptions::default(),
        )
        .unwrap();
        let big = deming_univariate(&g, &e, cfg(1e8)).unwrap();
        assert!((big.alpha_hat - ls.alpha_hat).abs() < 1e-6);
        let small = deming_univariate(&g, &e, cfg(1e-8)).unwrap();
        let reverse = sum_of_squares(&g) / dot(&e, &g);
        assert!((small.alpha_hat - reverse).abs() < 1e-6);
    }

    #[test]
    fn stable_branch_agrees_with_direct_formula() {
        let (g, e) = sample();
        let (gg, ee, eg) = (sum_of_squares(&g), sum_of_squares(&e), dot(&e, &g));
        for d in [0.05, 0.2, 0.5, 1.0, 2.0, 5.0] {
            let a = gg - d * ee;
            let direct = (a + libm::sqrt(a * a + 4.0 * d * eg * eg)) / (2.0 * eg);
            let got = deming_closed_form(gg, ee, eg, d).unwrap();
            assert!((got - direct).abs() < 1e-13);
        }
    }

    #[test]
    fn degenerate_cross_product() {
        assert_eq!(
            deming_univariate(&[1.0, 1.0], &[1.0, -1.0], cfg(1.0)),
            Err(EstimationError::DegenerateCross)
        );
        assert!(matches!(
            deming_univariate(&[1.0], &[1.0], cfg(1.0)),
            Err(EstimationError::RankError { .. })
        ));
    }

    #[test]
    fn multivariate_rejects_zero_column() {
        let (g, e) = sample();
        let w = Matrix::from_columns(&[
            &[0.0; 10],
            &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0],
        ])
        .unwrap();
        assert!(matches!(
            deming_multivariate(&g, &e, &w, cfg(1.0)),
            Err(EstimationError::Numerics(
                crate::numerics::NumericsError::NotPositiveDefinite { .. }
            ))
        ));
    }

    #[test]
    fn multivariate_recovers_noiseless_covariate_model() {
        let e = [1.0, 2.0, 2.5, 4.0, 5.0, 6.5];
        let w1 = [0.1, -0.3, 0.2, 0.0, 0.4, -0.1];
        let w2 = [0.0, 1.0, 0.0, 0.0, 0.5, 0.0];
        let g: Vec<f64> = (0..6)
            .map(|t| 0.45 * e[t] + 0.2 * w1[t] - 0.8 * w2[t])
            .collect();
        let w = Matrix::from_columns(&[&w1, &w2]).unwrap();
        let r = deming_multivariate(&g, &e, &w, cfg(0.5)).unwrap();
        assert!((r.alpha_hat - 0.45).abs() < 1e-12);
        assert!((r.gamma_hat[0] - 0.2).abs() < 1e-11);
        assert!((r.gamma_hat[1] + 0.8).abs() < 1e-11);
        assert!(r.sigma2_hat < 1e-24);
        assert_eq!(r.delta, Some(0.5));
    }
}
