//! Logical error rate per `d` cycles from per-shot failure rates at
//! several cycle counts.
//!
//! Under the per-cycle ansatz `1 - 2 p_n = (1 - 2q)(1 - 2 p_1)^n`, the
//! quantity `ln(1 - 2 p_n)` is linear in `n`. The slope is estimated by
//! weighted least squares on centred data, with `x_n = (n - n̄)/d` so that
//! the slope is `ln(1 - 2 p_L(d))` directly. Estimates at different `n`
//! share shots and are therefore correlated; the reported variance is the
//! triangle-inequality bound `(Σ|x| w σ / Σ w x²)²`, which holds for any
//! correlation.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Failure rate at one cycle count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NPoint {
    pub n: usize,
    pub shots: u64,
    pub p_hat: f64,
}

impl NPoint {
    pub fn from_counts(n: usize, shots: u64, failures: u64) -> Self {
        NPoint {
            n,
            shots,
            p_hat: failures as f64 / shots as f64,
        }
    }
}

/// One regression row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub n: usize,
    pub p_hat: f64,
    pub x: f64,
    pub y: f64,
    pub var_y: f64,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub d: usize,
    pub rows: Vec<FitRow>,
    /// Cycle counts left out because their failure rate reached 1/2.
    pub dropped: Vec<usize>,
    /// Fitted `ln(1 - 2 p_L(d))`.
    pub slope: f64,
    /// Logical error rate per `d` cycles.
    pub p_l: f64,
    /// Logical error rate per cycle.
    pub p_l_cycle: f64,
    /// Probability that preparation and final readout flip the logical. Not
    /// clamped: the first and last cycles can be cleaner than a bulk cycle,
    /// which shows up as a slightly negative value.
    pub q: f64,
    /// Conservative variance of `slope`.
    pub variance: f64,
    /// One standard deviation of `p_l`, propagated linearly from `variance`.
    pub std_err: f64,
    /// 95% interval for `p_l`, clamped to `[0, 1/2]`.
    pub interval: (f64, f64),
}

fn rate_from_log(l: f64) -> f64 {
    (-l.exp_m1() / 2.0).clamp(0.0, 0.5)
}

/// Variance of `ln(1 - 2 p̂)` by the delta method. Zero-failure estimates
/// are floored at half a failure so that their weight stays finite.
fn log_variance(p_hat: f64, shots: u64) -> f64 {
    let n = shots as f64;
    let p = if p_hat > 0.0 { p_hat } else { 0.5 / n };
    let g = 2.0 / (2.0 * p - 1.0);
    g * g * p * (1.0 - p) / n
}

/// Weighted least-squares fit of the per-cycle ansatz.
pub fn fit_logical_rate(d: usize, points: &[NPoint]) -> Result<FitResult> {
    if d == 0 {
        return Err(Error::Fit("distance must be positive".into()));
    }
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for pt in points {
        if pt.shots == 0 || !(0.0..=1.0).contains(&pt.p_hat) || pt.p_hat.is_nan() {
            return Err(Error::Fit(format!("bad estimate {} from {} shots at n={}", pt.p_hat, pt.shots, pt.n)));
        }
        if pt.p_hat >= 0.5 {
            warn!("dropping n={} from the fit: failure rate {} is not below 1/2", pt.n, pt.p_hat);
            dropped.push(pt.n);
        } else {
            kept.push(*pt);
        }
    }
    let mut ns: Vec<usize> = kept.iter().map(|p| p.n).collect();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 2 {
        return Err(Error::Fit(format!(
            "need at least two distinct cycle counts with failure rate below 1/2, have {}",
            ns.len()
        )));
    }

    let k = kept.len() as f64;
    let n_bar = kept.iter().map(|p| p.n as f64).sum::<f64>() / k;
    let logs: Vec<f64> = kept.iter().map(|p| (-2.0 * p.p_hat).ln_1p()).collect();
    let log_bar = logs.iter().sum::<f64>() / k;
    let rows: Vec<FitRow> = kept
        .iter()
        .zip(&logs)
        .map(|(p, &l)| {
            let var_y = log_variance(p.p_hat, p.shots);
            FitRow {
                n: p.n,
                p_hat: p.p_hat,
                x: (p.n as f64 - n_bar) / d as f64,
                y: l - log_bar,
                var_y,
                w: 1.0 / var_y,
            }
        })
        .collect();

    let sxx: f64 = rows.iter().map(|r| r.w * r.x * r.x).sum();
    let sxy: f64 = rows.iter().map(|r| r.w * r.x * r.y).sum();
    let slope = sxy / sxx;
    let spread: f64 = rows.iter().map(|r| r.x.abs() * r.w * r.var_y.sqrt()).sum::<f64>() / sxx;
    let variance = spread * spread;
    let sigma = variance.sqrt();

    let p_l = rate_from_log(slope);
    let intercept = log_bar - slope * n_bar / d as f64;
    Ok(FitResult {
        d,
        rows,
        dropped,
        slope,
        p_l,
        p_l_cycle: rate_from_log(slope / d as f64),
        q: -intercept.exp_m1() / 2.0,
        variance,
        std_err: slope.exp() / 2.0 * sigma,
        interval: (rate_from_log(slope + Z95 * sigma), rate_from_log(slope - Z95 * sigma)),
    })
}

/// One-sided 95% upper bound on a failure rate; the rule of three when
/// nothing failed.
pub fn upper_bound(failures: u64, shots: u64) -> f64 {
    let n = shots as f64;
    if failures == 0 {
        return (3.0 / n).min(1.0);
    }
    let p = failures as f64 / n;
    (p + 1.644_853_626_951_472_2 * (p * (1.0 - p) / n).sqrt()).min(1.0)
}

/// Threshold estimate from `(d, [(p, p_L)])` series: the median of the
/// points where adjacent distances cross, interpolating linearly in
/// `(ln p, ln p_L)`. Points with `p_L = 0` are skipped.
pub fn crossing_point(series: &[(usize, Vec<(f64, f64)>)]) -> Option<f64> {
    let mut sorted: Vec<&(usize, Vec<(f64, f64)>)> = series.iter().collect();
    sorted.sort_by_key(|s| s.0);
    let mut crossings = Vec::new();
    for pair in sorted.windows(2) {
        let (small, large) = (&pair[0].1, &pair[1].1);
        let mut diffs: Vec<(f64, f64)> = small
            .iter()
            .filter_map(|&(p, a)| {
                let &(_, b) = large.iter().find(|&&(q, _)| q == p)?;
                (a > 0.0 && b > 0.0 && p > 0.0).then(|| (p.ln(), b.ln() - a.ln()))
            })
            .collect();
        diffs.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in diffs.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if y0 == 0.0 {
                crossings.push(x0.exp());
            } else if y0.signum() != y1.signum() && y1 != 0.0 {
                crossings.push((x0 + (x1 - x0) * y0 / (y0 - y1)).exp());
            }
        }
        if let Some(&(x, y)) = diffs.last() {
            if y == 0.0 {
                crossings.push(x.exp());
            }
        }
    }
    if crossings.is_empty() {
        return None;
    }
    crossings.sort_by(f64::total_cmp);
    let m = crossings.len();
    Some(if m % 2 == 1 {
        crossings[m / 2]
    } else {
        (crossings[m / 2 - 1] + crossings[m / 2]) / 2.0
    })
}
