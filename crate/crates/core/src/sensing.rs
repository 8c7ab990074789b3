//! Random projection matrices with columns uniform on the unit sphere, and
//! the products `Y = A X`, `A^T Y` and `G = A^T A` used by the decoder.
//!
//! # Reproducibility
//!
//! The matrix is never stored; it is regenerated from `(seed, rows, cols)`.
//! Column `j` is drawn from ChaCha20 seeded with `seed_from_u64(seed)` and
//! switched to stream `j`. Each pair of standard normals comes from one pair
//! of uniforms through the Box-Muller transform:
//!
//! ```text
//! u = (next_u64 >> 11) * 2^-53            (two draws, u1 then u2)
//! r = sqrt(-2 ln(1 - u1)),  z0 = r cos(2 pi u2),  z1 = r sin(2 pi u2)
//! ```
//!
//! and the column is then divided by its Euclidean norm.

use ndarray::{Array2, ArrayView2, Axis};
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::exec::Execution;

/// Version of the generation rule above. Bumped whenever any part changes.
pub const GENERATOR_VERSION: u32 = 1;

/// Projection matrix `A` (`rows x cols`) with unit-norm columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingMatrix {
    seed: u64,
    entries: Array2<f64>,
}

impl SensingMatrix {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }
}

fn uniform(rng: &mut ChaCha20Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal variates for column `col` under `seed`.
fn normal_column(seed: u64, col: usize, len: usize) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(col as u64);
    let mut out = Vec::with_capacity(len + 1);
    while out.len() < len {
        let u1 = uniform(&mut rng);
        let u2 = uniform(&mut rng);
        let r = (-2.0 * (1.0 - u1).ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        out.push(r * c);
        out.push(r * s);
    }
    out.truncate(len);
    out
}

fn unit_column(seed: u64, col: usize, len: usize) -> Vec<f64> {
    let mut v = normal_column(seed, col, len);
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

/// Draws a `rows x cols` matrix whose columns are i.i.d. uniform on the unit
/// sphere in `R^rows`.
///
/// `rows == cols` is accepted so that a reduction rate of 1 is representable.
pub fn sample_sphere_matrix(rows: usize, cols: usize, seed: u64) -> Result<SensingMatrix> {
    sample_sphere_matrix_with(rows, cols, seed, Execution::default())
}

pub fn sample_sphere_matrix_with(
    rows: usize,
    cols: usize,
    seed: u64,
    exec: Execution,
) -> Result<SensingMatrix> {
    if rows == 0 || rows > cols {
        return Err(Error::InvalidArgument(format!(
            "sensing matrix needs 1 <= rows <= cols, got {rows}x{cols}"
        )));
    }
    let indices: Vec<usize> = (0..cols).collect();
    let columns = exec.map(&indices, |&j| unit_column(seed, j, rows));
    let mut entries = Array2::zeros((rows, cols));
    for (mut dst, src) in entries.axis_iter_mut(Axis(1)).zip(&columns) {
        dst.iter_mut().zip(src).for_each(|(d, s)| *d = *s);
    }
    Ok(SensingMatrix { seed, entries })
}

/// `Y = A X`.
pub fn project(a: &SensingMatrix, x: ArrayView2<f64>) -> Result<Array2<f64>> {
    if x.nrows() != a.cols() {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{}, X has {} rows",
            a.rows(),
            a.cols(),
            x.nrows()
        )));
    }
    Ok(a.entries.dot(&x))
}

/// `A^T Y`.
pub fn backproject(a: &SensingMatrix, y: ArrayView2<f64>) -> Result<Array2<f64>> {
    if y.nrows() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{}, Y has {} rows",
            a.rows(),
            a.cols(),
            y.nrows()
        )));
    }
    Ok(a.entries.t().dot(&y))
}

/// Dense `G = A^T A`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramOperator {
    gram: Array2<f64>,
}

impl GramOperator {
    /// Wraps an arbitrary square matrix. The solver still insists on a unit
    /// diagonal; this exists for tests and for callers with their own `G`.
    pub fn from_dense(gram: Array2<f64>) -> Result<Self> {
        if gram.nrows() != gram.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "Gram matrix must be square, got {:?}",
                gram.dim()
            )));
        }
        Ok(GramOperator { gram })
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.gram
    }

    /// `G X`.
    pub fn apply(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        if x.nrows() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "G is {0}x{0}, X has {1} rows",
                self.dim(),
                x.nrows()
            )));
        }
        Ok(self.gram.dot(&x))
    }
}

/// `G = A^T A`, with the lower triangle mirrored from the upper so that `G`
/// is exactly symmetric.
pub fn gram(a: &SensingMatrix) -> GramOperator {
    let mut g = a.entries.t().dot(&a.entries);
    let n = g.nrows();
    for i in 0..n {
        for j in 0..i {
            g[[i, j]] = g[[j, i]];
        }
    }
    GramOperator { gram: g }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use ndarray::Array1;

    fn to_na(m: &Array2<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[[i, j]])
    }

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0xdead_beef);
        Array2::from_shape_fn((rows, cols), |_| uniform(&mut rng) - 0.5)
    }

    #[test]
    fn one_row_entries_are_signs() {
        let a = sample_sphere_matrix(1, 4, 11).unwrap();
        assert!(a.entries().iter().all(|&v| v == 1.0 || v == -1.0));
    }

    #[test]
    fn same_seed_same_matrix() {
        let a = sample_sphere_matrix(576, 768, 42).unwrap();
        let b = sample_sphere_matrix(576, 768, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_sphere_matrix(576, 768, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn columns_are_unit_norm() {
        let a = sample_sphere_matrix(100, 200, 7).unwrap();
        let worst = a
            .entries()
            .axis_iter(Axis(1))
            .map(|c| (c.dot(&c).sqrt() - 1.0).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-12);
    }

    #[test]
    fn mean_coherence_matches_sphere_statistics() {
        // E|<u, v>| for independent uniform unit vectors in R^100 is
        // Gamma(50) / (sqrt(pi) Gamma(50.5)) = 0.0799882 (spread across
        // matrices about 4e-4 from an independent numpy simulation).
        let a = sample_sphere_matrix(100, 200, 7).unwrap();
        let g = gram(&a);
        let m = g.matrix();
        let mut sum = 0.0;
        let mut count = 0usize;
        for i in 0..200 {
            for j in i + 1..200 {
                sum += m[[i, j]].abs();
                count += 1;
            }
        }
        let mean = sum / count as f64;
        assert!((mean - 0.0799882).abs() < 0.002, "mean coherence {mean}");
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(sample_sphere_matrix(0, 4, 1).is_err());
        assert!(sample_sphere_matrix(5, 4, 1).is_err());
        assert!(sample_sphere_matrix(4, 4, 1).is_ok());
    }

    #[test]
    fn parallel_generation_is_identical() {
        let a = sample_sphere_matrix_with(64, 96, 5, Execution::Sequential).unwrap();
        let b = sample_sphere_matrix_with(64, 96, 5, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn project_zero_and_basis() {
        let a = sample_sphere_matrix(6, 10, 3).unwrap();
        let y = project(&a, Array2::zeros((10, 2)).view()).unwrap();
        assert!(y.iter().all(|&v| v == 0.0));
        let mut e = Array2::zeros((10, 1));
        e[[4, 0]] = 1.0;
        let y = project(&a, e.view()).unwrap();
        assert_eq!(y.column(0), a.entries().column(4));
        assert!(project(&a, Array2::zeros((9, 1)).view()).is_err());
        assert!(backproject(&a, Array2::zeros((7, 1)).view()).is_err());
    }

    #[test]
    fn backproject_of_column_is_gram_column() {
        let a = sample_sphere_matrix(20, 30, 9).unwrap();
        let g = gram(&a);
        let mut e = Array2::zeros((30, 1));
        e[[12, 0]] = 1.0;
        let col = backproject(&a, project(&a, e.view()).unwrap().view()).unwrap();
        for i in 0..30 {
            assert!((col[[i, 0]] - g.matrix()[[i, 12]]).abs() < 1e-14);
        }
        assert!(backproject(&a, Array2::zeros((20, 3)).view())
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn backproject_project_is_gram_apply() {
        for seed in 0..5 {
            let a = sample_sphere_matrix(15, 40, seed).unwrap();
            let x = random_matrix(40, 3, seed);
            let lhs = backproject(&a, project(&a, x.view()).unwrap().view()).unwrap();
            let rhs = gram(&a).apply(x.view()).unwrap();
            let diff = (&lhs - &rhs)
                .mapv(f64::abs)
                .fold(0.0, |m: f64, &v| m.max(v));
            assert!(diff < 1e-10);
        }
    }

    #[test]
    fn adjoint_identity() {
        for seed in 0..5 {
            let a = sample_sphere_matrix(12, 33, seed).unwrap();
            let x = random_matrix(33, 2, seed + 100);
            let y = random_matrix(12, 2, seed + 200);
            let lhs = (&backproject(&a, y.view()).unwrap() * &x).sum();
            let rhs = (&y * &project(&a, x.view()).unwrap()).sum();
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn projection_bounded_by_largest_singular_value() {
        let a = sample_sphere_matrix(10, 25, 4).unwrap();
        let sigma_max = to_na(a.entries()).singular_values().max();
        for seed in 0..10 {
            let x = random_matrix(25, 1, seed);
            let ax = project(&a, x.view()).unwrap();
            let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let nax = ax.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(nax <= sigma_max * nx * (1.0 + 1e-12));
        }
    }

    #[test]
    fn gram_invariants() {
        let g = gram(&sample_sphere_matrix(100, 200, 7).unwrap());
        let d: Array1<f64> = g.matrix().diag().to_owned();
        assert!(d.iter().all(|v| (v - 1.0).abs() < 1e-12));

        let g = gram(&sample_sphere_matrix(50, 80, 3).unwrap());
        let m = g.matrix();
        assert_eq!(m, &m.t().to_owned());
        let eig = to_na(m).symmetric_eigen().eigenvalues;
        assert!(eig.iter().all(|&l| l >= -1e-10));
        // rank deficiency: 80 - 50 eigenvalues vanish
        assert_eq!(eig.iter().filter(|l| l.abs() < 1e-8).count(), 30);
    }

    #[test]
    fn identical_columns_give_all_ones() {
        let col = unit_column(1, 0, 5);
        let mut entries = Array2::zeros((5, 2));
        for i in 0..5 {
            entries[[i, 0]] = col[i];
            entries[[i, 1]] = col[i];
        }
        let a = SensingMatrix { seed: 0, entries };
        let g = gram(&a);
        assert!(g.matrix().iter().all(|v| (v - 1.0).abs() < 1e-14));
    }
}
