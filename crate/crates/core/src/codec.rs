//! End-to-end compressed-sensing codec.
//!
//! Encoding decomposes the image until the approximation band is 16x16,
//! stores that band verbatim, compresses the two coarsest detail scales
//! (sides 16 and 32, vectors of 768 and 3072 coefficients) with independent
//! sphere matrices, and drops every finer scale. Decoding regenerates the
//! matrices from their seeds, recovers both detail vectors with the shrinkage
//! solver, zero-fills the dropped scales and inverts the transform.
//!
//! The stored coefficient count is therefore
//! `256 + round(rr_coarse * 768) + round(rr_next * 3072)` regardless of the
//! image size, i.e. 3136 at the default rates.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::sensing::{backproject, gram, project, sample_sphere_matrix_with};
use crate::solver::{hals_recover, RecoveryReport, ThresholdSchedule};
use crate::wavelet::{dwt2d_with, idwt2d_with, DetailTriple, SubbandPyramid, WaveletName};

/// Side of the stored approximation band.
pub const APPROX_SIDE: usize = 16;
/// Side of the deepest ("coarse") kept detail scale.
pub const COARSE_SIDE: usize = 16;
/// Side of the second-deepest ("next") kept detail scale.
pub const NEXT_SIDE: usize = 32;
/// Flattened length of the coarse detail triple.
pub const COARSE_LEN: usize = 3 * COARSE_SIDE * COARSE_SIDE;
/// Flattened length of the next detail triple.
pub const NEXT_LEN: usize = 3 * NEXT_SIDE * NEXT_SIDE;
/// Smallest image side the plan supports.
pub const MIN_SIDE: usize = 64;

pub const DEFAULT_REDUCTION_RATE: f64 = 0.75;

/// Which scales an `N x N` image keeps and drops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionPlan {
    pub image_side: usize,
    /// Decomposition depth, `log2(N) - 4`.
    pub levels: usize,
    /// Band sides of the kept detail scales, coarse first.
    pub kept_scales: [usize; 2],
    /// Band sides of the zero-filled scales, coarsest first.
    pub discarded_scales: Vec<usize>,
}

impl ReductionPlan {
    /// Lengths of the flattened kept vectors, coarse first.
    pub fn kept_lengths(&self) -> [usize; 2] {
        self.kept_scales.map(|s| 3 * s * s)
    }
}

pub fn plan_reduction(image_side: usize) -> Result<ReductionPlan> {
    if image_side < MIN_SIDE || !image_side.is_power_of_two() {
        return Err(Error::NonDyadic(format!(
            "image side must be a power of two ≥ {MIN_SIDE}, got {image_side}"
        )));
    }
    let levels = (image_side / APPROX_SIDE).trailing_zeros() as usize;
    let discarded_scales = (1..=levels - 2).rev().map(|l| image_side >> l).collect();
    Ok(ReductionPlan {
        image_side,
        levels,
        kept_scales: [COARSE_SIDE, NEXT_SIDE],
        discarded_scales,
    })
}

/// Concatenates the horizontal, vertical and diagonal bands of the scale with
/// the given side, each in row-major order.
pub fn flatten_details(pyramid: &SubbandPyramid, scale_side: usize) -> Result<Vec<f64>> {
    let triple = pyramid.scale(scale_side).ok_or_else(|| {
        Error::InvalidArgument(format!("pyramid has no detail scale of side {scale_side}"))
    })?;
    Ok(flatten_triple(triple))
}

fn flatten_triple(triple: &DetailTriple) -> Vec<f64> {
    triple
        .bands()
        .into_iter()
        .flat_map(|b| b.iter().copied())
        .collect()
}

/// Inverse of [`flatten_details`].
pub fn unflatten_details(values: &[f64], scale_side: usize) -> Result<DetailTriple> {
    let band = scale_side * scale_side;
    if values.len() != 3 * band {
        return Err(Error::DimensionMismatch(format!(
            "{} values cannot fill three {scale_side}x{scale_side} bands",
            values.len()
        )));
    }
    let make = |i: usize| {
        Array2::from_shape_vec(
            (scale_side, scale_side),
            values[i * band..(i + 1) * band].to_vec(),
        )
        .expect("length checked")
    };
    Ok(DetailTriple {
        horizontal: make(0),
        vertical: make(1),
        diagonal: make(2),
    })
}

fn check_rate(rr: f64) -> Result<()> {
    if rr > 0.0 && rr <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "reduction rate must be in (0, 1], got {rr}"
        )))
    }
}

/// `round(rr * len)`, rounding half away from zero; at least one measurement.
pub fn measurement_count(rr: f64, len: usize) -> Result<usize> {
    check_rate(rr)?;
    Ok(((rr * len as f64).round() as usize).max(1))
}

/// Total stored coefficient count.
pub fn compute_ics(rr_coarse: f64, rr_next: f64) -> Result<usize> {
    Ok(APPROX_SIDE * APPROX_SIDE
        + measurement_count(rr_coarse, COARSE_LEN)?
        + measurement_count(rr_next, NEXT_LEN)?)
}

/// The stored compressed image.
#[derive(Debug, Clone, PartialEq)]
pub struct CsPayload {
    pub width: u32,
    pub height: u32,
    pub wavelet: WaveletName,
    pub levels: u8,
    pub rr_coarse: f64,
    pub rr_next: f64,
    pub seed_coarse: u64,
    pub seed_next: u64,
    /// 16x16 approximation band.
    pub approx: Array2<f64>,
    pub y_coarse: Vec<f64>,
    pub y_next: Vec<f64>,
}

impl CsPayload {
    pub fn i_cs(&self) -> usize {
        self.approx.len() + self.y_coarse.len() + self.y_next.len()
    }

    pub fn side(&self) -> usize {
        self.width as usize
    }

    /// Structural checks shared by the decoder and the file reader.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.width != self.height {
            return bad(format!("payload image is {}x{}", self.width, self.height));
        }
        let plan = plan_reduction(self.width as usize)?;
        if plan.levels != self.levels as usize {
            return bad(format!(
                "payload levels {} do not match side {} (expected {})",
                self.levels, self.width, plan.levels
            ));
        }
        self.wavelet.filter()?;
        if self.approx.dim() != (APPROX_SIDE, APPROX_SIDE) {
            return bad(format!(
                "approximation is {:?}, expected 16x16",
                self.approx.dim()
            ));
        }
        let expect_coarse = measurement_count(self.rr_coarse, COARSE_LEN)?;
        let expect_next = measurement_count(self.rr_next, NEXT_LEN)?;
        if self.y_coarse.len() != expect_coarse || self.y_next.len() != expect_next {
            return bad(format!(
                "measurement lengths ({}, {}) do not match rates (expected {expect_coarse}, {expect_next})",
                self.y_coarse.len(),
                self.y_next.len()
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncodeParams {
    pub wavelet: WaveletName,
    pub rr_coarse: f64,
    pub rr_next: f64,
    /// Seed of the coarse matrix; the next matrix uses `seed + 1`.
    pub seed: u64,
}

impl Default for EncodeParams {
    fn default() -> Self {
        EncodeParams {
            wavelet: WaveletName::SYMMLET_8,
            rr_coarse: DEFAULT_REDUCTION_RATE,
            rr_next: DEFAULT_REDUCTION_RATE,
            seed: 0,
        }
    }
}

pub fn encode(image: ArrayView2<f64>, params: &EncodeParams) -> Result<CsPayload> {
    encode_with(image, params, Execution::default())
}

pub fn encode_with(
    image: ArrayView2<f64>,
    params: &EncodeParams,
    exec: Execution,
) -> Result<CsPayload> {
    let (rows, cols) = image.dim();
    if rows != cols {
        return Err(Error::NonDyadic(format!(
            "image must be square, got {cols}x{rows}"
        )));
    }
    let plan = plan_reduction(rows)?;
    check_rate(params.rr_coarse)?;
    check_rate(params.rr_next)?;
    let filter = params.wavelet.filter()?;
    let pyramid = dwt2d_with(image, &filter, plan.levels, exec)?;

    let seed_coarse = params.seed;
    let seed_next = params.seed.wrapping_add(1);
    let compress = |side: usize, rr: f64, seed: u64| -> Result<Vec<f64>> {
        let x = flatten_details(&pyramid, side)?;
        let a = sample_sphere_matrix_with(measurement_count(rr, x.len())?, x.len(), seed, exec)?;
        let x = Array2::from_shape_vec((x.len(), 1), x).expect("column vector");
        Ok(project(&a, x.view())?.into_raw_vec_and_offset().0)
    };
    let (y_coarse, y_next) = exec.join(
        || compress(COARSE_SIDE, params.rr_coarse, seed_coarse),
        || compress(NEXT_SIDE, params.rr_next, seed_next),
    );

    Ok(CsPayload {
        width: cols as u32,
        height: rows as u32,
        wavelet: params.wavelet,
        levels: plan.levels as u8,
        rr_coarse: params.rr_coarse,
        rr_next: params.rr_next,
        seed_coarse,
        seed_next,
        approx: pyramid.approx().clone(),
        y_coarse: y_coarse?,
        y_next: y_next?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub image: Array2<f64>,
    pub coarse: RecoveryReport,
    pub next: RecoveryReport,
}

pub fn decode(payload: &CsPayload, schedule: &ThresholdSchedule) -> Result<Decoded> {
    decode_with(payload, schedule, Execution::default())
}

/// Recovers one flattened detail vector of length `len` from `y`.
fn recover_scale(
    y: &[f64],
    len: usize,
    seed: u64,
    schedule: &ThresholdSchedule,
    exec: Execution,
) -> Result<(Vec<f64>, RecoveryReport)> {
    let a = sample_sphere_matrix_with(y.len(), len, seed, exec)?;
    let y = Array2::from_shape_vec((y.len(), 1), y.to_vec()).expect("column vector");
    let y_tilde = backproject(&a, y.view())?;
    let g = gram(&a);
    let (x, report) = hals_recover(y_tilde.view(), &g, schedule, Array2::zeros((len, 1)))?;
    Ok((x.into_raw_vec_and_offset().0, report))
}

pub fn decode_with(
    payload: &CsPayload,
    schedule: &ThresholdSchedule,
    exec: Execution,
) -> Result<Decoded> {
    payload.validate()?;
    let filter = payload.wavelet.filter()?;
    let n = payload.side();

    let (coarse, next) = exec.join(
        || {
            recover_scale(
                &payload.y_coarse,
                COARSE_LEN,
                payload.seed_coarse,
                schedule,
                exec,
            )
        },
        || recover_scale(&payload.y_next, NEXT_LEN, payload.seed_next, schedule, exec),
    );
    let (x_coarse, coarse) = coarse?;
    let (x_next, next) = next?;

    let mut pyramid = SubbandPyramid::zeros(n, payload.levels as usize)?;
    pyramid.approx_mut().assign(&payload.approx);
    *pyramid.scale_mut(COARSE_SIDE).expect("plan keeps side 16") =
        unflatten_details(&x_coarse, COARSE_SIDE)?;
    *pyramid.scale_mut(NEXT_SIDE).expect("plan keeps side 32") =
        unflatten_details(&x_next, NEXT_SIDE)?;
    let image = idwt2d_with(&pyramid, &filter, exec)?;
    Ok(Decoded {
        image,
        coarse,
        next,
    })
}
