//! Singularity bookkeeping, predicted asymptotic shapes, and empirical checks
//! against census tables (exponent fits, slice ratios, scaling).

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{CensusError, Result};
use crate::group::{GroupData, OmegaSet, ParamVector};
use crate::profile::{enumerate_census, CensusQuery, CensusTable, Mode};
use crate::structure::{delta_x, gamma_x};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SingularityCase {
    /// Omega is empty or every xi parameter exceeds the global minimum.
    Separated,
    /// Some xi parameter attains the global minimum.
    OmegaAtMinimum,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingularityData {
    pub sigma0: Ratio<u64>,
    pub pole_order: u64,
    pub log_power: u32,
    pub case: SingularityCase,
    /// When the pole vanishes the log log exponent is not pinned down: the
    /// transfer theorem gives `log_power - 1`, while the closed-form count for
    /// the Klein example states `gamma`. Both are reported.
    pub loglog_candidates: Option<(u32, u32)>,
}

impl SingularityData {
    pub fn is_ambiguous(&self) -> bool {
        self.loglog_candidates.is_some_and(|(a, b)| a != b)
    }
}

/// Abscissa, pole order and log power of the surjection series in slice `gamma`.
pub fn singularity_data(gd: &GroupData, x: &ParamVector, omega: &OmegaSet, gamma: u32) -> Result<SingularityData> {
    let x1 = x.min();
    let sigma0 = x1.recip();
    let xi = gd.xi_classes(omega);
    let min_xi = xi.iter().map(|&i| x.values[i]).min();
    if min_xi.is_none_or(|m| m > x1) {
        let (_, beta) = gd.beta_aggregate(x, omega)?;
        return Ok(SingularityData {
            sigma0,
            pole_order: beta,
            log_power: 0,
            case: SingularityCase::Separated,
            loglog_candidates: None,
        });
    }
    let (gx, _) = gamma_x(gd, x, omega)?;
    if gamma < gx {
        return Err(CensusError::WitnessNotFound { gamma });
    }
    let (d, _) = delta_x(gd, x, omega)?;
    let (x0, beta) = gd.beta_aggregate(x, omega)?;
    let log_power = gamma - d;
    let pole_order = if x0 == x1 { beta } else { 0 };
    Ok(SingularityData {
        sigma0,
        pole_order,
        log_power,
        case: SingularityCase::OmegaAtMinimum,
        loglog_candidates: (pole_order == 0).then(|| (log_power.saturating_sub(1), gamma)),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticShape {
    /// Exponent of `x`.
    pub x_exponent: Ratio<u64>,
    pub log_power: i64,
    pub loglog_power: i64,
    /// Symbolic leading constant.
    pub constant: String,
    /// `Gamma(beta)` for the pole branch.
    pub gamma_function: Option<f64>,
}

impl AsymptoticShape {
    /// `log(x^a (log x)^b (log log x)^c)`, without the constant.
    pub fn log_shape(&self, x: f64) -> f64 {
        let l = x.ln();
        self.x_exponent.to_f64().unwrap_or(f64::NAN) * l
            + self.log_power as f64 * l.ln()
            + self.loglog_power as f64 * l.ln().ln()
    }
}

impl std::fmt::Display for AsymptoticShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} * x^{}", self.constant, self.x_exponent)?;
        if self.log_power != 0 {
            write!(f, " * (log x)^{}", self.log_power)?;
        }
        if self.loglog_power != 0 {
            write!(f, " * (log log x)^{}", self.loglog_power)?;
        }
        Ok(())
    }
}

fn factorial(n: u64) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Delange's transfer from a singularity of type
/// `(s - sigma0)^(-beta) log^k(1/(s - sigma0))` to the shape of the count.
pub fn delange_shape(sd: &SingularityData) -> AsymptoticShape {
    let k = sd.log_power as i64;
    if sd.pole_order > 0 {
        let beta = sd.pole_order;
        AsymptoticShape {
            x_exponent: sd.sigma0,
            log_power: beta as i64 - 1,
            loglog_power: k,
            constant: format!("g(sigma0)/Gamma({beta})"),
            gamma_function: Some(factorial(beta - 1)),
        }
    } else if k > 0 {
        AsymptoticShape {
            x_exponent: sd.sigma0,
            log_power: -1,
            loglog_power: k - 1,
            constant: format!("{k}*g_{k}(sigma0)"),
            gamma_function: None,
        }
    } else {
        AsymptoticShape {
            x_exponent: Ratio::zero(),
            log_power: 0,
            loglog_power: 0,
            constant: "c".into(),
            gamma_function: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Fitted exponent of `X`.
    pub sigma_hat: f64,
    /// Fitted exponent of `log X`.
    pub logpow_hat: f64,
    pub intercept: f64,
    /// `log N - fitted` at each point used.
    pub residuals: Vec<f64>,
    /// Largest deviation of `sigma_hat` over half-length sub-windows.
    pub stability: f64,
    pub points: usize,
}

const MIN_FIT_POINTS: usize = 8;
const MIN_FIT_DECADES: f64 = 3.0;

/// Least squares of `log N` on `1, log X, log log X`.
pub fn fit_points(points: &[(f64, f64)]) -> Result<FitResult> {
    let pts: Vec<(f64, f64)> = points.iter().copied().filter(|&(x, n)| n > 0.0 && x > 1.0).collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(CensusError::Fit(format!(
            "need at least {MIN_FIT_POINTS} checkpoints with positive counts, got {}",
            pts.len()
        )));
    }
    let span = (pts.last().unwrap().0 / pts[0].0).log10();
    if span < MIN_FIT_DECADES {
        return Err(CensusError::Fit(format!("checkpoints span {span:.2} decades, need {MIN_FIT_DECADES}")));
    }
    let (coef, residuals) = least_squares(&pts)?;
    let half = pts.len().div_ceil(2).max(4);
    let stability = (0..=pts.len() - half)
        .filter_map(|s| least_squares(&pts[s..s + half]).ok())
        .map(|(c, _)| (c[1] - coef[1]).abs())
        .fold(0.0, f64::max);
    Ok(FitResult {
        sigma_hat: coef[1],
        logpow_hat: coef[2],
        intercept: coef[0],
        residuals,
        stability,
        points: pts.len(),
    })
}

/// Fits one slice (or the total) of a census table.
pub fn fit_exponents(table: &CensusTable, mode: Mode, gamma: Option<u32>) -> Result<FitResult> {
    fit_points(&table.series(mode, gamma))
}

fn least_squares(pts: &[(f64, f64)]) -> Result<([f64; 3], Vec<f64>)> {
    let rows: Vec<[f64; 3]> = pts.iter().map(|&(x, _)| [1.0, x.ln(), x.ln().ln()]).collect();
    let ys: Vec<f64> = pts.iter().map(|&(_, n)| n.ln()).collect();
    let mut a = [[0.0; 4]; 3];
    for (r, &y) in rows.iter().zip(&ys) {
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] += r[i] * r[j];
            }
            a[i][3] += r[i] * y;
        }
    }
    // Gauss-Jordan with partial pivoting on the normal equations.
    for c in 0..3 {
        let p = (c..3)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap();
        a.swap(c, p);
        if a[c][c].abs() < 1e-12 {
            return Err(CensusError::Fit("singular design matrix".into()));
        }
        for r in 0..3 {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..4 {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    let coef = [a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]];
    let residuals = rows
        .iter()
        .zip(&ys)
        .map(|(r, y)| y - (coef[0] * r[0] + coef[1] * r[1] + coef[2] * r[2]))
        .collect();
    Ok((coef, residuals))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Trend {
    ToZero,
    BoundedPositive,
    Growing,
    /// Fewer defined ratios than windows.
    Undetermined,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendThresholds {
    pub windows: usize,
    /// `ToZero` needs `last < vanish * first`.
    pub vanish: f64,
    /// `Growing` needs `last > growth * first`.
    pub growth: f64,
}

impl Default for TrendThresholds {
    fn default() -> Self {
        TrendThresholds {
            windows: 4,
            vanish: 0.5,
            growth: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub gamma1: u32,
    pub gamma2: u32,
    /// `(X, N_gamma1 / N_gamma2)`, `None` where the denominator vanishes.
    pub ratios: Vec<(u64, Option<f64>)>,
    /// Ratio at the window boundaries.
    pub window_values: Vec<f64>,
    pub trend: Trend,
}

/// Finite-`X` values of `N(gamma1) / N(gamma2)` (surjections) with a trend class.
///
/// The defined ratios are cut into `windows` consecutive windows and the ratio
/// is read off at the `windows + 1` boundaries (first point, every window end).
/// The trend is `ToZero` when these boundary values strictly decrease and the
/// last is below `vanish` times the first, `Growing` for the mirror condition,
/// and `BoundedPositive` otherwise. Window means are dominated by the
/// small-`X` transient of the sparser slice, so they are not used.
pub fn ratio_r(gamma1: u32, gamma2: u32, table: &CensusTable, th: &TrendThresholds) -> Result<RatioReport> {
    let ratios: Vec<(u64, Option<f64>)> = table
        .rows
        .iter()
        .map(|r| {
            let den = r.sur_at(gamma2);
            (r.bound, (den > 0).then(|| r.sur_at(gamma1) as f64 / den as f64))
        })
        .collect();
    let defined: Vec<f64> = ratios.iter().filter_map(|&(_, v)| v).collect();
    if defined.is_empty() {
        return Err(CensusError::UndefinedRatio);
    }
    let windows = th.windows.max(3);
    if defined.len() < windows + 1 {
        return Ok(RatioReport {
            gamma1,
            gamma2,
            ratios,
            window_values: Vec::new(),
            trend: Trend::Undetermined,
        });
    }
    let last_idx = defined.len() - 1;
    let values: Vec<f64> = (0..=windows).map(|w| defined[w * last_idx / windows]).collect();
    let first = values[0];
    let last = values[windows];
    let trend = if values.windows(2).all(|w| w[1] < w[0]) && last < th.vanish * first {
        Trend::ToZero
    } else if values.windows(2).all(|w| w[1] > w[0]) && last > th.growth * first {
        Trend::Growing
    } else {
        Trend::BoundedPositive
    };
    Ok(RatioReport {
        gamma1,
        gamma2,
        ratios,
        window_values: values,
        trend,
    })
}

/// Checks `N(theta_{a x}; X^a) = N(theta_x; X)` for every slice, hom and sur.
pub fn scaling_check(
    gd: &GroupData,
    x: &ParamVector,
    omega: &OmegaSet,
    a: Ratio<u64>,
    bound: u64,
    gamma_max: u32,
) -> Result<bool> {
    let ax = x.scaled(a)?;
    let base = enumerate_census(CensusQuery::new(gd, x, omega, bound).with_gamma_max(gamma_max), 1)?;
    let scaled = enumerate_census(
        CensusQuery::new(gd, &ax, omega, bound)
            .with_exponent(a)
            .with_gamma_max(gamma_max),
        1,
    )?;
    Ok(base.rows == scaled.rows)
}
