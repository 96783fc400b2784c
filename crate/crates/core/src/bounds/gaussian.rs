use serde::{Deserialize, Serialize};

use super::{BoundKind, BoundPoint, Witness};
use crate::chernoff::{chernoff_info, DEFAULT_CHERNOFF_TOL};
use crate::error::{Error, Result};
use crate::prob::Dist;

/// Output quantization: `range / cell` cells of width `cell` covering
/// `[-range/2, range/2)`, tails folded into the end cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantization {
    pub range: f64,
    pub cell: f64,
}

impl Quantization {
    pub fn cells(&self) -> Result<usize> {
        if !(self.cell > 0.0 && self.range > 0.0) {
            return Err(Error::InvalidArgument("quantization range and cell must be positive".into()));
        }
        let ratio = self.range / self.cell;
        let m = ratio.round();
        if (ratio - m).abs() > 1e-6 * m.max(1.0) || m < 2.0 || m % 2.0 != 0.0 {
            return Err(Error::InvalidArgument(format!(
                "range/cell = {ratio} must be an even integer"
            )));
        }
        Ok(m as usize)
    }
}

impl Default for Quantization {
    fn default() -> Self {
        Self {
            range: 20.0,
            cell: 1e-2,
        }
    }
}

/// `P(Z < z)` for a standard normal.
fn norm_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// `P(Z >= z)` for a standard normal.
fn norm_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

/// Mass of `[a, b)` under `N(0,1)`, computed on the side of the smaller tail.
fn interval_mass(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        norm_sf(a) - norm_sf(b)
    } else if b <= 0.0 {
        norm_cdf(b) - norm_cdf(a)
    } else {
        1.0 - norm_cdf(a) - norm_sf(b)
    }
}

/// Cell probabilities of `N(mean, variance)` on the grid of `quant`.
pub fn quantized_gaussian(mean: f64, variance: f64, quant: &Quantization) -> Result<Dist> {
    let cells = quant.cells()?;
    if !(variance > 0.0) {
        return Err(Error::InvalidArgument(format!("variance {variance} must be positive")));
    }
    let sd = variance.sqrt();
    let lo = -quant.range / 2.0;
    let z = |x: f64| (x - mean) / sd;
    let mut w: Vec<f64> = (0..cells)
        .map(|i| {
            let a = lo + i as f64 * quant.cell;
            interval_mass(z(a), z(a + quant.cell))
        })
        .collect();
    w[0] += norm_cdf(z(lo));
    w[cells - 1] += norm_sf(z(-lo));
    for v in &mut w {
        *v = v.max(0.0);
    }
    Ok(Dist::from_weights(w))
}

/// Achievability exponent of the unit-noise Gaussian channel under power
/// `power` with Gaussian inputs: the mean is as large as the rate allows,
/// `mu^2 = power - (e^{2R} - 1)`, so the output is `N(mu, e^{2R})` against
/// noise `N(0, 1)`. Both densities are quantized onto `quant`.
pub fn gaussian_lower_bound(power: f64, rate: f64, quant: &Quantization) -> Result<BoundPoint> {
    if !(power >= 0.0) || !(rate >= 0.0) {
        return Err(Error::InvalidArgument("power and rate must be non-negative".into()));
    }
    let input_variance = (2.0 * rate).exp_m1();
    let mean_sq = power - input_variance;
    if mean_sq < -1e-12 {
        return Err(Error::RateOutOfRange {
            rate,
            capacity: 0.5 * power.ln_1p(),
        });
    }
    let mean = mean_sq.max(0.0).sqrt();
    let output = quantized_gaussian(mean, 1.0 + input_variance, quant)?;
    let noise = quantized_gaussian(0.0, 1.0, quant)?;
    let r = chernoff_info(&output, &noise, DEFAULT_CHERNOFF_TOL)?;
    Ok(BoundPoint {
        rate,
        alpha: r.value,
        kind: BoundKind::GaussianAchievability,
        witness: Some(Witness::Gaussian {
            mean,
            variance: input_variance,
        }),
    })
}
