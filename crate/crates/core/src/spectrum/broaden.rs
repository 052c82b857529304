use serde::{Deserialize, Serialize};

use super::Stick;
use crate::{Error, Result};

/// Uniform frequency grid, endpoints included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl FrequencyGrid {
    /// Symmetric grid covering sticks up to `fmax` with room for the tails.
    pub fn around(fmax: f64, width: f64, points: usize) -> Self {
        let span = (1.5 * fmax).max(fmax + 10.0 * width);
        FrequencyGrid {
            min: -span,
            max: span,
            points,
        }
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.points - 1) as f64
    }

    pub fn frequency(&self, i: usize) -> f64 {
        self.min + i as f64 * self.step()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.frequency(i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BroadenedCurve {
    pub grid: FrequencyGrid,
    pub intensities: Vec<f64>,
}

impl BroadenedCurve {
    pub fn area(&self) -> f64 {
        trapezoid(&self.intensities, self.grid.step())
    }
}

pub fn trapezoid(y: &[f64], dx: f64) -> f64 {
    match y.len() {
        0 | 1 => 0.0,
        n => dx * (y.iter().sum::<f64>() - 0.5 * (y[0] + y[n - 1])),
    }
}

/// Sum of unit-area Gaussians of standard deviation `width`, rescaled to
/// unit trapezoidal area. An empty stick list gives a zero curve.
pub fn broaden(sticks: &[Stick], grid: &FrequencyGrid, width: f64) -> Result<BroadenedCurve> {
    if !(width > 0.0) || grid.points < 2 || !(grid.max > grid.min) {
        return Err(Error::Domain("broadening needs a positive width and a non-empty grid".into()));
    }
    let step = grid.step();
    let reach = 8.0 * width;
    let norm = 1.0 / (width * (2.0 * std::f64::consts::PI).sqrt());
    let mut y = vec![0.0; grid.points];
    for s in sticks {
        if s.weight == 0.0 {
            continue;
        }
        let lo = ((s.frequency - reach - grid.min) / step).ceil().max(0.0) as usize;
        let hi = ((s.frequency + reach - grid.min) / step).floor();
        if hi < 0.0 {
            continue;
        }
        let hi = (hi as usize).min(grid.points - 1);
        for (i, v) in y.iter_mut().enumerate().take(hi + 1).skip(lo) {
            let u = (grid.frequency(i) - s.frequency) / width;
            *v += s.weight * norm * (-0.5 * u * u).exp();
        }
    }
    let area = trapezoid(&y, step);
    if area > 0.0 {
        y.iter_mut().for_each(|v| *v /= area);
    }
    Ok(BroadenedCurve {
        grid: grid.clone(),
        intensities: y,
    })
}

/// Overlapping coefficient `∫ min(p, q)` of two unit-area curves on one grid:
/// 0 for fully resolved peaks, 1 for identical ones.
pub fn addressability_metric(on: &BroadenedCurve, off: &BroadenedCurve) -> Result<f64> {
    let same = on.grid.points == off.grid.points
        && (on.grid.min - off.grid.min).abs() <= 1e-9 * on.grid.min.abs().max(1.0)
        && (on.grid.max - off.grid.max).abs() <= 1e-9 * on.grid.max.abs().max(1.0);
    if !same {
        return Err(Error::Domain("curves are sampled on different grids".into()));
    }
    let m: Vec<f64> = on
        .intensities
        .iter()
        .zip(&off.intensities)
        .map(|(a, b)| a.min(*b))
        .collect();
    Ok(trapezoid(&m, on.grid.step()).clamp(0.0, 1.0))
}
