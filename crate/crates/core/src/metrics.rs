//! Image quality and reduction measures, and a robust-threshold object
//! detector.
//!
//! The recover error is `‖X - X̃‖₂ / ‖X‖₂` with the induced matrix 2-norm
//! (largest singular value). For column vectors this is the Euclidean norm.
//! [`recover_error_frobenius`] gives the entrywise variant.

use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::stats::median_and_mad;

/// Peak value used by PSNR (8-bit intensities).
pub const PSNR_PEAK: f64 = 255.0;

/// Scale factor turning a MAD into a Gaussian standard deviation estimate.
pub const MAD_TO_SIGMA: f64 = 1.4826;

pub const DEFAULT_DETECTION_K: f64 = 3.0;

fn same_shape(x: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch(format!(
            "images are {:?} and {:?}",
            x.dim(),
            y.dim()
        )));
    }
    Ok(())
}

pub fn mse(x: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<f64> {
    same_shape(x, y)?;
    if x.is_empty() {
        return Err(Error::InvalidArgument("empty image".into()));
    }
    let sum: f64 = x.iter().zip(y.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sum / x.len() as f64)
}

/// `10 log10(255² / mse)`; `+inf` when `mse` is zero.
pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (PSNR_PEAK * PSNR_PEAK / mse).log10()
    }
}

pub fn psnr(x: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<f64> {
    mse(x, y).map(psnr_from_mse)
}

/// Largest singular value, by power iteration on `MᵀM`.
pub fn spectral_norm(m: ArrayView2<f64>) -> f64 {
    let (rows, cols) = m.dim();
    if rows == 0 || cols == 0 {
        return 0.0;
    }
    if cols == 1 || rows == 1 {
        return m.iter().map(|v| v * v).sum::<f64>().sqrt();
    }
    let b = m.t().dot(&m);
    // fixed, non-degenerate start vector
    let mut v = Array1::from_shape_fn(cols, |i| 1.0 + 0.5 * (i as f64 * 0.7548776662).sin());
    let mut lambda = 0.0;
    for _ in 0..5000 {
        let norm = v.dot(&v).sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        v /= norm;
        let w = b.dot(&v);
        let next = v.dot(&w);
        v = w;
        if (next - lambda).abs() <= 1e-15 * next.abs() {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda.max(0.0).sqrt()
}

/// Relative error in the spectral norm. Errors when the reference is zero.
pub fn recover_error(reference: ArrayView2<f64>, reconstruction: ArrayView2<f64>) -> Result<f64> {
    same_shape(reference, reconstruction)?;
    let denom = spectral_norm(reference);
    if denom == 0.0 {
        return Err(Error::InvalidArgument("reference image is all zero".into()));
    }
    let diff = &reference - &reconstruction;
    Ok(spectral_norm(diff.view()) / denom)
}

/// Relative error in the Frobenius norm.
pub fn recover_error_frobenius(
    reference: ArrayView2<f64>,
    reconstruction: ArrayView2<f64>,
) -> Result<f64> {
    same_shape(reference, reconstruction)?;
    let denom = reference.iter().map(|v| v * v).sum::<f64>().sqrt();
    if denom == 0.0 {
        return Err(Error::InvalidArgument("reference image is all zero".into()));
    }
    let num = reference
        .iter()
        .zip(reconstruction.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(num / denom)
}

/// Reduction level of a plain `level`-deep decomposition: `4^level`.
pub fn irl_linear(level: u32) -> u64 {
    4u64.pow(level)
}

/// Original pixel count over stored coefficient count.
pub fn irl_cs(total_pixels: u64, i_cs: u64) -> Result<f64> {
    if i_cs == 0 || total_pixels == 0 {
        return Err(Error::InvalidArgument(
            "pixel and coefficient counts must be positive".into(),
        ));
    }
    Ok(total_pixels as f64 / i_cs as f64)
}

/// Rounds half away from zero and clamps to `[0, 255]`, as when the
/// reconstruction is written out as an 8-bit image.
pub fn quantize(image: ArrayView2<f64>) -> Array2<f64> {
    image.mapv(|v| {
        if v.is_nan() {
            0.0
        } else {
            v.round().clamp(0.0, 255.0)
        }
    })
}

/// MSE and recover error together. An exact reconstruction has zero error
/// even when the reference is all zero.
pub fn mse_and_epsilon(
    reference: ArrayView2<f64>,
    reconstruction: ArrayView2<f64>,
) -> Result<(f64, f64)> {
    let mse = mse(reference, reconstruction)?;
    if mse == 0.0 {
        return Ok((0.0, 0.0));
    }
    Ok((mse, recover_error(reference, reconstruction)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityReport {
    pub mse: f64,
    pub psnr_db: f64,
    pub epsilon: f64,
    pub i_cs: usize,
    pub irl_cs: f64,
}

impl QualityReport {
    pub fn evaluate(
        reference: ArrayView2<f64>,
        reconstruction: ArrayView2<f64>,
        i_cs: usize,
    ) -> Result<Self> {
        let (mse, epsilon) = mse_and_epsilon(reference, reconstruction)?;
        Ok(QualityReport {
            mse,
            psnr_db: psnr_from_mse(mse),
            epsilon,
            i_cs,
            irl_cs: irl_cs(reference.len() as u64, i_cs as u64)?,
        })
    }

    /// Same as [`evaluate`](Self::evaluate) after quantizing the
    /// reconstruction to 8 bits.
    pub fn evaluate_quantized(
        reference: ArrayView2<f64>,
        reconstruction: ArrayView2<f64>,
        i_cs: usize,
    ) -> Result<Self> {
        Self::evaluate(reference, quantize(reconstruction).view(), i_cs)
    }

    /// `image,wavelet,psnr_db,epsilon,i_cs,irl_cs`
    pub fn csv_row(&self, image: &str, wavelet: &str) -> String {
        format!(
            "{image},{wavelet},{},{},{},{:.1}",
            format_psnr(self.psnr_db, 2),
            format_epsilon(self.epsilon),
            self.i_cs,
            self.irl_cs
        )
    }
}

/// PSNR with `decimals` places, or the literal `inf`.
pub fn format_psnr(psnr: f64, decimals: usize) -> String {
    if psnr.is_infinite() && psnr > 0.0 {
        "inf".to_string()
    } else {
        format!("{psnr:.decimals$}")
    }
}

/// Epsilon to four places, with an exact zero printed as `0`.
pub fn format_epsilon(epsilon: f64) -> String {
    if epsilon == 0.0 {
        "0".to_string()
    } else {
        format!("{epsilon:.4}")
    }
}

/// Flags pixels brighter than `median + k · 1.4826 · MAD`.
pub fn detect_objects(image: ArrayView2<f64>, k: f64) -> Result<Array2<bool>> {
    if k.is_nan() || k <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "detection multiplier must be positive, got {k}"
        )));
    }
    let values: Vec<f64> = image.iter().copied().collect();
    let Some((median, mad)) = median_and_mad(&values) else {
        return Ok(Array2::from_elem(image.dim(), false));
    };
    let threshold = median + k * MAD_TO_SIGMA * mad;
    Ok(image.mapv(|v| v > threshold))
}
