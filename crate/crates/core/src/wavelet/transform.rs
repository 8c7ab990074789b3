//! Periodized fast wavelet transforms in one and two dimensions.
//!
//! Analysis uses the even downsampling phase:
//!
//! ```text
//! approx[k] = sum_n h[n] x[(2k + n) mod N]
//! detail[k] = sum_n g[n] x[(2k + n) mod N]
//! ```
//!
//! which is an orthogonal change of basis on any even length, so synthesis is
//! the transpose. The 2D transform filters rows first, then columns, and
//! recurses on the low-low quadrant.

use ndarray::{s, Array2, ArrayView2};

use super::filters::WaveletFilter;
use crate::error::{Error, Result};
use crate::exec::Execution;

/// The three orientation bands of one decomposition level.
///
/// `horizontal` is low-pass along rows and high-pass along columns (it
/// responds to horizontal edges), `vertical` is the converse and `diagonal` is
/// high-pass in both directions.
#[derive(Debug, Clone, PartialEq)]
pub struct DetailTriple {
    pub horizontal: Array2<f64>,
    pub vertical: Array2<f64>,
    pub diagonal: Array2<f64>,
}

impl DetailTriple {
    pub fn zeros(side: usize) -> Self {
        DetailTriple {
            horizontal: Array2::zeros((side, side)),
            vertical: Array2::zeros((side, side)),
            diagonal: Array2::zeros((side, side)),
        }
    }

    pub fn side(&self) -> usize {
        self.horizontal.nrows()
    }

    pub fn bands(&self) -> [&Array2<f64>; 3] {
        [&self.horizontal, &self.vertical, &self.diagonal]
    }

    fn is_square_of(&self, side: usize) -> bool {
        self.bands().iter().all(|b| b.dim() == (side, side))
    }
}

/// Output of a multi-level 2D transform of an `N x N` image.
///
/// `details[0]` is level 1 (the finest, side `N/2`); the last entry is the
/// deepest level, whose side equals the approximation side.
#[derive(Debug, Clone, PartialEq)]
pub struct SubbandPyramid {
    source_size: usize,
    approx: Array2<f64>,
    details: Vec<DetailTriple>,
}

impl SubbandPyramid {
    /// Builds a pyramid from parts, checking that the band sizes are dyadic
    /// and consistent with `source_size`.
    pub fn from_parts(
        source_size: usize,
        approx: Array2<f64>,
        details: Vec<DetailTriple>,
    ) -> Result<Self> {
        let pyramid = SubbandPyramid {
            source_size,
            approx,
            details,
        };
        pyramid.validate()?;
        Ok(pyramid)
    }

    /// All-zero pyramid for an `n x n` image.
    pub fn zeros(n: usize, levels: usize) -> Result<Self> {
        check_levels(n, levels)?;
        let details = (1..=levels).map(|l| DetailTriple::zeros(n >> l)).collect();
        Ok(SubbandPyramid {
            source_size: n,
            approx: Array2::zeros((n >> levels, n >> levels)),
            details,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let levels = self.details.len();
        check_levels(self.source_size, levels)
            .map_err(|e| Error::InvalidArgument(format!("malformed pyramid: {e}")))?;
        let side = self.source_size >> levels;
        if self.approx.dim() != (side, side) {
            return Err(Error::InvalidArgument(format!(
                "malformed pyramid: approximation is {:?}, expected {side}x{side}",
                self.approx.dim()
            )));
        }
        for (i, triple) in self.details.iter().enumerate() {
            let side = self.source_size >> (i + 1);
            if !triple.is_square_of(side) {
                return Err(Error::InvalidArgument(format!(
                    "malformed pyramid: level {} bands must be {side}x{side}",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    pub fn source_size(&self) -> usize {
        self.source_size
    }

    pub fn levels(&self) -> usize {
        self.details.len()
    }

    pub fn approx(&self) -> &Array2<f64> {
        &self.approx
    }

    pub fn approx_mut(&mut self) -> &mut Array2<f64> {
        &mut self.approx
    }

    /// Detail triple at `level` (1 = finest).
    pub fn level(&self, level: usize) -> Option<&DetailTriple> {
        level.checked_sub(1).and_then(|i| self.details.get(i))
    }

    pub fn level_mut(&mut self, level: usize) -> Option<&mut DetailTriple> {
        level
            .checked_sub(1)
            .and_then(move |i| self.details.get_mut(i))
    }

    /// Detail triple whose bands are `side x side`.
    pub fn scale(&self, side: usize) -> Option<&DetailTriple> {
        self.details.iter().find(|t| t.side() == side)
    }

    pub fn scale_mut(&mut self, side: usize) -> Option<&mut DetailTriple> {
        self.details.iter_mut().find(|t| t.side() == side)
    }

    pub fn details(&self) -> &[DetailTriple] {
        &self.details
    }

    /// Every coefficient, approximation first, then levels from finest.
    pub fn coefficients(&self) -> impl Iterator<Item = f64> + '_ {
        self.approx.iter().copied().chain(
            self.details
                .iter()
                .flat_map(|t| t.bands().into_iter().flat_map(|b| b.iter().copied())),
        )
    }

    pub fn coefficient_count(&self) -> usize {
        self.approx.len()
            + self
                .details
                .iter()
                .map(|t| 3 * t.horizontal.len())
                .sum::<usize>()
    }

    pub fn norm(&self) -> f64 {
        self.coefficients().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Packs the pyramid into the usual in-place square layout: approximation
    /// in the top-left corner, and for each level the vertical band to its
    /// right, horizontal below and diagonal diagonally opposite.
    pub fn to_mosaic(&self) -> Array2<f64> {
        let n = self.source_size;
        let mut out = Array2::zeros((n, n));
        let a = self.approx.nrows();
        out.slice_mut(s![..a, ..a]).assign(&self.approx);
        for t in &self.details {
            let h = t.side();
            out.slice_mut(s![..h, h..2 * h]).assign(&t.vertical);
            out.slice_mut(s![h..2 * h, ..h]).assign(&t.horizontal);
            out.slice_mut(s![h..2 * h, h..2 * h]).assign(&t.diagonal);
        }
        out
    }
}

fn check_levels(n: usize, levels: usize) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::NonDyadic(format!(
            "image side {n} is not a power of two"
        )));
    }
    let max = n.trailing_zeros() as usize - 1;
    if levels == 0 || levels > max {
        return Err(Error::InvalidArgument(format!(
            "levels must be in 1..={max} for side {n}, got {levels}"
        )));
    }
    Ok(())
}

/// One analysis step on `src`, writing `n/2` approximation values followed by
/// `n/2` detail values into `dst`.
fn analyze(src: &[f64], low: &[f64], high: &[f64], dst: &mut [f64]) {
    let n = src.len();
    let half = n / 2;
    for k in 0..half {
        let mut a = 0.0;
        let mut d = 0.0;
        let base = 2 * k;
        for (i, (&h, &g)) in low.iter().zip(high).enumerate() {
            let x = src[(base + i) % n];
            a += h * x;
            d += g * x;
        }
        dst[k] = a;
        dst[half + k] = d;
    }
}

/// Inverse of [`analyze`]: `src` holds approximation then detail halves.
fn synthesize(src: &[f64], low: &[f64], high: &[f64], dst: &mut [f64]) {
    let n = dst.len();
    let half = n / 2;
    dst.fill(0.0);
    for k in 0..half {
        let a = src[k];
        let d = src[half + k];
        let base = 2 * k;
        for (i, (&h, &g)) in low.iter().zip(high).enumerate() {
            dst[(base + i) % n] += h * a + g * d;
        }
    }
}

/// Single-level periodized analysis of an even-length signal.
pub fn dwt1d(signal: &[f64], filter: &WaveletFilter) -> Result<(Vec<f64>, Vec<f64>)> {
    if signal.is_empty() || !signal.len().is_multiple_of(2) {
        return Err(Error::NonDyadic(format!(
            "signal length {} is not even",
            signal.len()
        )));
    }
    let mut out = vec![0.0; signal.len()];
    analyze(signal, filter.low_pass(), &filter.high_pass(), &mut out);
    let detail = out.split_off(signal.len() / 2);
    Ok((out, detail))
}

/// Exact inverse of [`dwt1d`].
pub fn idwt1d(approx: &[f64], detail: &[f64], filter: &WaveletFilter) -> Result<Vec<f64>> {
    if approx.len() != detail.len() {
        return Err(Error::DimensionMismatch(format!(
            "approximation has {} values, detail has {}",
            approx.len(),
            detail.len()
        )));
    }
    let mut src = Vec::with_capacity(2 * approx.len());
    src.extend_from_slice(approx);
    src.extend_from_slice(detail);
    let mut out = vec![0.0; src.len()];
    synthesize(&src, filter.low_pass(), &filter.high_pass(), &mut out);
    Ok(out)
}

/// One-dimensional analysis or synthesis: `(input, low, high, output)`.
type FilterStep = fn(&[f64], &[f64], &[f64], &mut [f64]);

/// Applies `step` to every row of the standard-layout square `block`.
fn rows_pass(
    block: &mut Array2<f64>,
    low: &[f64],
    high: &[f64],
    step: FilterStep,
    exec: Execution,
) {
    let side = block.ncols();
    let data = block.as_slice_mut().expect("standard layout");
    exec.for_each_chunk_mut(data, side, |_, row| {
        let src = row.to_vec();
        step(&src, low, high, row);
    });
}

/// Rows, then columns (via transposition) of a square block.
fn separable_pass(
    block: Array2<f64>,
    low: &[f64],
    high: &[f64],
    step: FilterStep,
    exec: Execution,
) -> Array2<f64> {
    let mut block = block;
    rows_pass(&mut block, low, high, step, exec);
    let mut t = block.t().as_standard_layout().into_owned();
    rows_pass(&mut t, low, high, step, exec);
    t.t().as_standard_layout().into_owned()
}

/// Multi-level separable 2D transform.
pub fn dwt2d(
    image: ArrayView2<f64>,
    filter: &WaveletFilter,
    levels: usize,
) -> Result<SubbandPyramid> {
    dwt2d_with(image, filter, levels, Execution::default())
}

pub fn dwt2d_with(
    image: ArrayView2<f64>,
    filter: &WaveletFilter,
    levels: usize,
    exec: Execution,
) -> Result<SubbandPyramid> {
    let (rows, cols) = image.dim();
    if rows != cols {
        return Err(Error::NonDyadic(format!(
            "image is {rows}x{cols}, not square"
        )));
    }
    check_levels(rows, levels)?;
    let low = filter.low_pass();
    let high = filter.high_pass();

    let mut current = image.as_standard_layout().into_owned();
    let mut details = Vec::with_capacity(levels);
    for _ in 0..levels {
        let side = current.nrows();
        let h = side / 2;
        let out = separable_pass(current, low, &high, analyze, exec);
        details.push(DetailTriple {
            horizontal: out.slice(s![h.., ..h]).to_owned(),
            vertical: out.slice(s![..h, h..]).to_owned(),
            diagonal: out.slice(s![h.., h..]).to_owned(),
        });
        current = out.slice(s![..h, ..h]).to_owned();
    }
    Ok(SubbandPyramid {
        source_size: rows,
        approx: current,
        details,
    })
}

/// Inverse of [`dwt2d`].
pub fn idwt2d(pyramid: &SubbandPyramid, filter: &WaveletFilter) -> Result<Array2<f64>> {
    idwt2d_with(pyramid, filter, Execution::default())
}

pub fn idwt2d_with(
    pyramid: &SubbandPyramid,
    filter: &WaveletFilter,
    exec: Execution,
) -> Result<Array2<f64>> {
    pyramid.validate()?;
    let low = filter.low_pass();
    let high = filter.high_pass();

    let mut current = pyramid.approx.clone();
    for triple in pyramid.details.iter().rev() {
        let h = triple.side();
        let mut block = Array2::zeros((2 * h, 2 * h));
        block.slice_mut(s![..h, ..h]).assign(&current);
        block.slice_mut(s![..h, h..]).assign(&triple.vertical);
        block.slice_mut(s![h.., ..h]).assign(&triple.horizontal);
        block.slice_mut(s![h.., h..]).assign(&triple.diagonal);
        current = separable_pass(block, low, &high, synthesize, exec);
    }
    Ok(current)
}
