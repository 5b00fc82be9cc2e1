use alloc::vec::Vec;

use super::{EstimateResult, EstimationError, EstimatorOptions, Method, VarianceDivisor, Warning};
use crate::inference::gaussian_ci;
use crate::numerics::{self, dot, Ldlt, Matrix, Projector};

/// Instruments whose absolute correlation with the regressor falls below
/// this value are flagged with [`Warning::WeakInstrument`].
pub const WEAK_INSTRUMENT_CORRELATION: f64 = 0.1;

fn residual_sum_of_squares(y: &[f64], x: &Matrix, coef: &[f64]) -> Result<f64, EstimationError> {
    let fitted = x.mul_vec(coef)?;
    Ok(y.iter()
        .zip(fitted.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum())
}

fn check_rows(y: &[f64], rows: usize) -> Result<(), EstimationError> {
    if y.len() != rows {
        return Err(EstimationError::LengthMismatch {
            expected: rows,
            found: y.len(),
        });
    }
    Ok(())
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        // constant columns carry no information about the correlation
        return if saa == sbb { 1.0 } else { 0.0 };
    }
    sab / libm::sqrt(saa * sbb)
}

/// Least squares through the origin: `b = (XᵀX)⁻¹Xᵀy`, `Var = s²(XᵀX)⁻¹`.
pub fn ols(
    y: &[f64],
    x: &Matrix,
    opts: &EstimatorOptions,
) -> Result<EstimateResult, EstimationError> {
    check_rows(y, x.rows())?;
    let (t, k) = (x.rows(), x.cols());
    if k == 0 || t < k + 1 {
        return Err(EstimationError::RankError { rows: t, cols: k });
    }
    let normal = Ldlt::factor(&numerics::gram(x)?)?;
    let coef = normal.solve(&x.t_mul_vec(y)?)?;
    let rss = residual_sum_of_squares(y, x, &coef)?;
    let divisor = match opts.ols_variance {
        VarianceDivisor::Observations => t,
        VarianceDivisor::DegreesOfFreedom => t - k,
    } as f64;
    let s2 = rss / divisor;
    let se = libm::sqrt(s2 * normal.inverse_diagonal(0));
    let ci = gaussian_ci(coef[0], se, opts.level)?;
    Ok(
        EstimateResult::new(Method::Ols, coef[0], coef[1..].to_vec(), s2, t)
            .with_uncertainty(se, ci),
    )
}

/// Just-identified IV with one instrument: `α = zᵀy / zᵀx`.
///
/// The standard error uses the GIVE variance with `Z = z`, i.e.
/// `σ̂² zᵀz / (zᵀx)²` with `σ̂² = (1/T) Σ (y − αx)²`.
pub fn iv(
    y: &[f64],
    x: &[f64],
    z: &[f64],
    opts: &EstimatorOptions,
) -> Result<EstimateResult, EstimationError> {
    check_rows(x, y.len())?;
    check_rows(z, y.len())?;
    let t = y.len();
    if t < 2 {
        return Err(EstimationError::RankError { rows: t, cols: 1 });
    }
    let zx = dot(z, x);
    if zx == 0.0 {
        return Err(EstimationError::ZeroCross);
    }
    let alpha = dot(z, y) / zx;
    let rss: f64 = y
        .iter()
        .zip(x)
        .map(|(yi, xi)| (yi - alpha * xi) * (yi - alpha * xi))
        .sum();
    let s2 = rss / t as f64;
    let se = libm::sqrt(s2 * dot(z, z) / (zx * zx));
    let ci = gaussian_ci(alpha, se, opts.level)?;
    let mut r = EstimateResult::new(Method::Iv, alpha, Vec::new(), s2, t).with_uncertainty(se, ci);
    let corr = pearson(z, x);
    if libm::fabs(corr) < WEAK_INSTRUMENT_CORRELATION {
        r.warnings.push(Warning::WeakInstrument {
            column: 0,
            correlation: corr,
        });
    }
    Ok(r)
}

/// Generalised IV: `b = (XᵀP_Z X)⁻¹ XᵀP_Z y`, `Var = σ̂² (XᵀP_Z X)⁻¹`,
/// `σ̂² = (1/T) Σ (y − Xb)²`.
pub fn give(
    y: &[f64],
    x: &Matrix,
    z: &Matrix,
    opts: &EstimatorOptions,
) -> Result<EstimateResult, EstimationError> {
    check_rows(y, x.rows())?;
    check_rows(y, z.rows())?;
    let (t, k) = (x.rows(), x.cols());
    if z.cols() < k {
        return Err(EstimationError::OrderCondition {
            instruments: z.cols(),
            regressors: k,
        });
    }
    if k == 0 || t < z.cols() + 1 {
        return Err(EstimationError::RankError {
            rows: t,
            cols: z.cols(),
        });
    }
    let projector = Projector::new(z)?;
    let mut projected = Vec::with_capacity(k);
    for j in 0..k {
        projected.push(projector.project(&x.column(j))?);
    }
    let refs: Vec<&[f64]> = projected.iter().map(|c| c.as_slice()).collect();
    let pzx = Matrix::from_columns(&refs)?;
    // XᵀP_Z X = (P_Z X)ᵀ(P_Z X) because P_Z is a symmetric idempotent
    let normal = Ldlt::factor(&numerics::gram(&pzx)?)?;
    let coef = normal.solve(&pzx.t_mul_vec(y)?)?;
    let s2 = residual_sum_of_squares(y, x, &coef)? / t as f64;
    let se = libm::sqrt(s2 * normal.inverse_diagonal(0));
    let ci = gaussian_ci(coef[0], se, opts.level)?;
    let mut r = EstimateResult::new(Method::Give, coef[0], coef[1..].to_vec(), s2, t)
        .with_uncertainty(se, ci);

    let target = x.column(0);
    let strongest = (0..z.cols())
        .map(|j| (j, pearson(&z.column(j), &target)))
        .max_by(|a, b| libm::fabs(a.1).total_cmp(&libm::fabs(b.1)));
    if let Some((column, correlation)) = strongest {
        if libm::fabs(correlation) < WEAK_INSTRUMENT_CORRELATION {
            r.warnings.push(Warning::WeakInstrument {
                column,
                correlation,
            });
        }
    }
    Ok(r)
}
