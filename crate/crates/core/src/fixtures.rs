//! Seeded toy inverse problems.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::field::Field;
use crate::solver::LinearModel;

/// Seed of the committed deconvolution fixture.
pub const DECONVOLUTION_SEED: u64 = 20_240_611;
pub const DECONVOLUTION_BINS: usize = 32;
pub const DECONVOLUTION_WIDTH: f64 = 1.5;

#[derive(Debug, Clone, PartialEq)]
pub struct DeconvolutionFixture {
    pub model: LinearModel,
    pub x_true: Vec<f64>,
    /// uniform, with the same total as `y`
    pub x0: Vec<f64>,
}

/// Gaussian blur of width `sigma` bins, cut beyond `3 sigma` and with unit
/// column sums, applied to a seeded random signal in `[0.5, 5)`. The data
/// are exact: `y = H x_true`.
pub fn deconvolution(n: usize, sigma: f64, seed: u64) -> Result<DeconvolutionFixture> {
    let mut h = vec![0.0; n * n];
    let reach = (3.0 * sigma).floor() as i64;
    for j in 0..n {
        let mut col = 0.0;
        for i in 0..n {
            let d = i as i64 - j as i64;
            if d.abs() <= reach {
                let v = (-(d * d) as f64 / (2.0 * sigma * sigma)).exp();
                h[i * n + j] = v;
                col += v;
            }
        }
        for i in 0..n {
            h[i * n + j] /= col;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x_true: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..5.0)).collect();
    let placeholder = Field::new(vec![1.0; n])?;
    let y = LinearModel::new(n, n, h.clone(), placeholder)?.forward(&x_true)?;
    let total = y.total();
    let model = LinearModel::new(n, n, h, y)?;
    Ok(DeconvolutionFixture {
        model,
        x_true,
        x0: vec![total / n as f64; n],
    })
}

/// The committed 32-bin fixture.
pub fn deconvolution_fixture() -> DeconvolutionFixture {
    deconvolution(DECONVOLUTION_BINS, DECONVOLUTION_WIDTH, DECONVOLUTION_SEED).expect("fixture parameters are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn columns_sum_to_one_and_data_exact() {
        let f = deconvolution_fixture();
        let (n, h) = (f.model.cols(), f.model.matrix());
        for j in 0..n {
            let s: f64 = (0..n).map(|i| h[i * n + j]).sum();
            assert!((s - 1.0).abs() < 1e-15);
        }
        assert_eq!(f.model.forward(&f.x_true).unwrap(), *f.model.y());
        let sx: f64 = f.x_true.iter().sum();
        assert!((f.model.y().total() - sx).abs() < 1e-12 * sx);
        assert_eq!(deconvolution_fixture(), f);
    }
}
