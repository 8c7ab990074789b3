//! Sparse recovery from `Ỹ = G X` by row-wise HALS sweeps with the
//! Abramovich shrinkage rule and a linearly decreasing threshold.
//!
//! One outer iteration visits rows `j = 0..J` in ascending order. For each row
//! the residual `e_j = Ỹ(j,:) - G(j,:) X` gives the local least-squares
//! candidate `X(j,:) + e_j` (exact because `G(j,j) = 1`), which is shrunk in
//! place, so later rows in the same sweep already see the update
//! (Gauss-Seidel order).
//!
//! The threshold is `λ = α · MAD`, where `α` falls by `delta_alpha` per
//! iteration. The MAD is taken over the candidates, not the current
//! estimate: with a zero start the estimate has no spread at all. With more
//! than one column each row gets its own MAD over its candidate row. With one
//! column a row has no spread either, so the MAD is taken over the whole
//! candidate vector `X + E` at the start of each sweep.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::sensing::GramOperator;
use crate::stats::{median_and_mad, median_in_place};

/// Largest accepted `|G(j,j) - 1|`.
pub const GRAM_DIAGONAL_TOLERANCE: f64 = 1e-6;

/// `sign(x) sqrt(x^2 - λ^2)` for `|x| >= λ`, zero inside the threshold.
#[inline]
pub fn shrink(x: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return x;
    }
    let ax = x.abs();
    if ax <= lambda {
        return 0.0;
    }
    // factored to avoid cancellation; clamped so rounding never grows |x|
    let mag = ((ax - lambda) * (ax + lambda)).sqrt().min(ax);
    mag.copysign(x)
}

/// Checked form of [`shrink`].
pub fn abramovich_shrink(x: f64, lambda: f64) -> Result<f64> {
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "shrinkage threshold must be nonnegative, got {lambda}"
        )));
    }
    Ok(shrink(x, lambda))
}

/// Median absolute deviation about the median.
pub fn mad(row: &[f64]) -> Result<f64> {
    median_and_mad(row)
        .map(|(_, m)| m)
        .ok_or_else(|| Error::InvalidArgument("MAD of an empty row".into()))
}

/// `alpha · MAD(x(j, :))`.
pub fn threshold_for(x: ArrayView2<f64>, j: usize, alpha: f64) -> Result<f64> {
    if j >= x.nrows() {
        return Err(Error::IndexOutOfRange {
            index: j,
            len: x.nrows(),
        });
    }
    let row: Vec<f64> = x.row(j).to_vec();
    let m = mad(&row)?;
    Ok(if m == 0.0 || alpha == 0.0 {
        0.0
    } else {
        alpha * m
    })
}

/// Linear threshold-multiplier schedule `α_k = max(α_max - k Δα, α_min)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSchedule {
    alpha_max: f64,
    alpha_min: f64,
    k_max: usize,
    delta_alpha: f64,
}

impl ThresholdSchedule {
    pub const DEFAULT_ALPHA_MAX: f64 = 4.0;
    pub const DEFAULT_ALPHA_MIN: f64 = 0.0;
    pub const DEFAULT_ITERATIONS: usize = 10;

    pub fn new(alpha_max: f64, alpha_min: f64, k_max: usize, delta_alpha: f64) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if alpha_min.is_nan() || alpha_min < 0.0 || !alpha_max.is_finite() || alpha_max < alpha_min
        {
            return bad(format!(
                "schedule needs alpha_max >= alpha_min >= 0, got {alpha_max}, {alpha_min}"
            ));
        }
        if k_max == 0 {
            return bad("schedule needs at least one iteration".into());
        }
        if !delta_alpha.is_finite() || delta_alpha < 0.0 {
            return bad(format!(
                "delta_alpha must be nonnegative, got {delta_alpha}"
            ));
        }
        if alpha_max - (k_max - 1) as f64 * delta_alpha < alpha_min - 1e-12 {
            return bad(format!(
                "schedule undershoots: {alpha_max} - {}*{delta_alpha} < {alpha_min}",
                k_max - 1
            ));
        }
        Ok(ThresholdSchedule {
            alpha_max,
            alpha_min,
            k_max,
            delta_alpha,
        })
    }

    /// Decreases from `alpha_max` toward `alpha_min` in `k_max` equal steps.
    pub fn linear(alpha_max: f64, alpha_min: f64, k_max: usize) -> Result<Self> {
        let steps = k_max.max(1) as f64;
        Self::new(alpha_max, alpha_min, k_max, (alpha_max - alpha_min) / steps)
    }

    pub fn alpha_max(&self) -> f64 {
        self.alpha_max
    }

    pub fn alpha_min(&self) -> f64 {
        self.alpha_min
    }

    pub fn iterations(&self) -> usize {
        self.k_max
    }

    pub fn delta_alpha(&self) -> f64 {
        self.delta_alpha
    }

    /// Multiplier used during iteration `k` (0-based).
    pub fn alpha_at(&self, k: usize) -> f64 {
        (self.alpha_max - k as f64 * self.delta_alpha).max(self.alpha_min)
    }
}

impl Default for ThresholdSchedule {
    fn default() -> Self {
        Self::linear(
            Self::DEFAULT_ALPHA_MAX,
            Self::DEFAULT_ALPHA_MIN,
            Self::DEFAULT_ITERATIONS,
        )
        .expect("default schedule is valid")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryReport {
    pub iterations_run: usize,
    /// `‖Ỹ - G X0‖_F` before the first sweep.
    pub initial_residual: f64,
    /// `‖Ỹ - G X‖_F` after each sweep.
    pub residual_history: Vec<f64>,
    /// Largest threshold applied during the last sweep.
    pub final_threshold: f64,
}

impl RecoveryReport {
    pub fn final_residual(&self) -> f64 {
        self.residual_history
            .last()
            .copied()
            .unwrap_or(self.initial_residual)
    }
}

fn frobenius(m: &Array2<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn check_shapes(y_tilde: ArrayView2<f64>, gram: &GramOperator, x: ArrayView2<f64>) -> Result<()> {
    let j = gram.dim();
    if y_tilde.nrows() != j {
        return Err(Error::DimensionMismatch(format!(
            "Ỹ has {} rows, G is {j}x{j}",
            y_tilde.nrows()
        )));
    }
    if x.dim() != y_tilde.dim() {
        return Err(Error::DimensionMismatch(format!(
            "X is {:?}, Ỹ is {:?}",
            x.dim(),
            y_tilde.dim()
        )));
    }
    Ok(())
}

/// Recovers `X` from `Ỹ = G X` starting at `x0`.
pub fn hals_recover(
    y_tilde: ArrayView2<f64>,
    gram: &GramOperator,
    schedule: &ThresholdSchedule,
    x0: Array2<f64>,
) -> Result<(Array2<f64>, RecoveryReport)> {
    check_shapes(y_tilde, gram, x0.view())?;
    let g = gram.matrix();
    if let Some((j, d)) = g
        .diag()
        .iter()
        .enumerate()
        .find(|(_, d)| (*d - 1.0).abs() > GRAM_DIAGONAL_TOLERANCE)
    {
        return Err(Error::InvalidArgument(format!(
            "Gram diagonal must be 1, G[{j},{j}] = {d}"
        )));
    }

    let (rows, cols) = y_tilde.dim();
    let mut x = x0.as_standard_layout().into_owned();
    let mut residual = &y_tilde - &g.dot(&x);
    let initial_residual = frobenius(&residual);
    let mut history = Vec::with_capacity(schedule.iterations());
    let mut final_threshold = 0.0;
    let mut candidate = vec![0.0; cols];
    let mut scratch = vec![0.0; cols.max(rows)];

    for k in 0..schedule.iterations() {
        let alpha = schedule.alpha_at(k);
        let global_lambda = if cols == 1 {
            let buf = &mut scratch[..rows];
            for (b, (xv, rv)) in buf.iter_mut().zip(x.iter().zip(residual.iter())) {
                *b = xv + rv;
            }
            Some(alpha * spread(buf))
        } else {
            None
        };

        let mut sweep_max = 0.0f64;
        for j in 0..rows {
            let g_row = g.row(j);
            for (t, c) in candidate.iter_mut().enumerate() {
                let e = y_tilde[[j, t]] - g_row.dot(&x.column(t));
                *c = x[[j, t]] + e;
            }
            let lambda = match global_lambda {
                Some(l) => l,
                None => {
                    let buf = &mut scratch[..cols];
                    buf.copy_from_slice(&candidate);
                    alpha * spread(buf)
                }
            };
            sweep_max = sweep_max.max(lambda);
            for (t, &c) in candidate.iter().enumerate() {
                x[[j, t]] = shrink(c, lambda);
            }
        }
        final_threshold = sweep_max;
        residual = &y_tilde - &g.dot(&x);
        history.push(frobenius(&residual));
    }

    Ok((
        x,
        RecoveryReport {
            iterations_run: schedule.iterations(),
            initial_residual,
            residual_history: history,
            final_threshold,
        },
    ))
}

/// MAD of `buf`, clobbering it.
fn spread(buf: &mut [f64]) -> f64 {
    let med = median_in_place(buf).unwrap_or(0.0);
    buf.iter_mut().for_each(|v| *v = (*v - med).abs());
    median_in_place(buf).unwrap_or(0.0)
}

/// Terms of the local cost summed over rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalCost {
    /// `½ ‖Ỹ - G X‖_F²`.
    pub data: f64,
    /// `Σ_j λ_j · #{t : X(j,t) ≠ 0}`, a count-based sparsity surrogate.
    pub penalty: f64,
}

pub fn eval_local_cost(
    y_tilde: ArrayView2<f64>,
    gram: &GramOperator,
    x: ArrayView2<f64>,
    lambda_row: &[f64],
) -> Result<LocalCost> {
    check_shapes(y_tilde, gram, x)?;
    if lambda_row.len() != x.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{} thresholds for {} rows",
            lambda_row.len(),
            x.nrows()
        )));
    }
    let residual = &y_tilde - &gram.apply(x)?;
    let data = 0.5 * residual.iter().map(|v| v * v).sum::<f64>();
    let penalty = x
        .rows()
        .into_iter()
        .zip(lambda_row)
        .map(|(row, l)| l * row.iter().filter(|v| **v != 0.0).count() as f64)
        .sum();
    Ok(LocalCost { data, penalty })
}
