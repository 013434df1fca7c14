use serde::{Deserialize, Serialize};

/// Ordinary least-squares line `y ≈ slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; 0 when fewer than three points.
    pub slope_stderr: f64,
    /// Coefficient of determination; 1 for a constant response fitted exactly.
    pub r_squared: f64,
    pub n: usize,
}

impl LinearFit {
    pub fn fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
        let n = xs.len();
        if n < 2 || ys.len() != n {
            return None;
        }
        let nf = n as f64;
        let mx = xs.iter().sum::<f64>() / nf;
        let my = ys.iter().sum::<f64>() / nf;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        if sxx == 0.0 {
            return None;
        }
        let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let sse: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| (y - slope * x - intercept).powi(2))
            .sum();
        let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
        let slope_stderr = if n > 2 {
            (sse / (nf - 2.0) / sxx).sqrt()
        } else {
            0.0
        };
        let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
        Some(LinearFit {
            slope,
            intercept,
            slope_stderr,
            r_squared,
            n,
        })
    }

    pub fn predict(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}
