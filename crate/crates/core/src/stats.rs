//! Group-level regression of workload on principle adherence: design-matrix
//! screening, variance-inflation checks, Huber-robust fitting, and a
//! two-sample Kolmogorov-Smirnov goodness-of-fit test.
//!
//! Principle indicator columns are binary and groups are small, so columns
//! are screened before fitting: near-constant columns carry no information
//! and exact duplicates or complements make the normal equations singular.

use crate::principles::{Principle, PrincipleSet};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};
use std::collections::BTreeMap;
use thiserror::Error;

/// Huber tuning constant: 95% efficiency at the Gaussian model.
pub const HUBER_C: f64 = 1.345;
/// IRLS stops when no coefficient moves more than this.
pub const IRLS_TOL: f64 = 1e-8;
pub const IRLS_MAX_ITERS: usize = 200;
/// Screening rejects a design whose worst variance inflation exceeds this.
pub const VIF_LIMIT: f64 = 20.0;
pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

/// One rule revision in a regression group: which principles it follows and
/// its observed workload response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub labels: PrincipleSet,
    pub response: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DropReason {
    /// Fewer than two adhering or two violating rules: the indicator is
    /// (nearly) constant in this group.
    Degenerate,
    /// Identical or complementary to an earlier retained column.
    Aliased,
}

impl std::fmt::Display for DropReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DropReason::Degenerate => "degenerate",
            DropReason::Aliased => "aliased",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    /// Retained column names, `intercept` first.
    pub columns: Vec<String>,
    /// Row-major design, one row per observation.
    pub rows: Vec<Vec<f64>>,
    pub response: Vec<f64>,
    pub dropped: BTreeMap<String, DropReason>,
}

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("no observations")]
    Empty,
    #[error("design matrix is rank deficient at column {column}")]
    RankDeficient { column: String },
    #[error("collinearity screening failed: {column} has VIF {vif:.1} (limit {limit})")]
    VifExceeded { column: String, vif: f64, limit: f64 },
    #[error("KS test requires two non-empty samples")]
    EmptySample,
}

/// Builds the regression design from group observations. Degenerate
/// principle columns are dropped first, then the second member of any
/// exactly collinear or complementary pair; the intercept is always kept.
pub fn build_design_matrix(observations: &[Observation]) -> Result<DesignMatrix, StatsError> {
    if observations.is_empty() {
        return Err(StatsError::Empty);
    }
    let n = observations.len();
    let mut dropped = BTreeMap::new();
    let mut kept: Vec<(Principle, Vec<f64>)> = Vec::new();
    for p in Principle::ALL {
        let col: Vec<f64> =
            observations.iter().map(|o| f64::from(u8::from(o.labels.get(p)))).collect();
        let ones = col.iter().filter(|&&v| v == 1.0).count();
        if ones < 2 || n - ones < 2 {
            dropped.insert(p.name().to_string(), DropReason::Degenerate);
        } else {
            kept.push((p, col));
        }
    }

    let mut i = 0;
    while i < kept.len() {
        let mut j = i + 1;
        while j < kept.len() {
            let same = kept[i].1 == kept[j].1;
            let complement =
                kept[i].1.iter().zip(&kept[j].1).all(|(a, b)| (a + b - 1.0).abs() < f64::EPSILON);
            if same || complement {
                let (p, _) = kept.remove(j);
                dropped.insert(p.name().to_string(), DropReason::Aliased);
            } else {
                j += 1;
            }
        }
        i += 1;
    }

    let mut columns = vec!["intercept".to_string()];
    columns.extend(kept.iter().map(|(p, _)| p.name().to_string()));
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|r| {
            let mut row = vec![1.0];
            row.extend(kept.iter().map(|(_, col)| col[r]));
            row
        })
        .collect();
    let response = observations.iter().map(|o| o.response).collect();
    Ok(DesignMatrix { columns, rows, response, dropped })
}

/// Variance inflation factor for each non-intercept column: SST/SSR of an
/// ordinary regression of that column on the remaining ones.
pub fn vif(design: &DesignMatrix) -> Result<Vec<(String, f64)>, StatsError> {
    let p = design.columns.len();
    let mut out = Vec::new();
    for j in 1..p {
        let target: Vec<f64> = design.rows.iter().map(|r| r[j]).collect();
        let others: Vec<Vec<f64>> = design
            .rows
            .iter()
            .map(|r| r.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, v)| *v).collect())
            .collect();
        let beta = weighted_least_squares(&others, &target, None, &design.columns[j])?;
        let mean = target.iter().sum::<f64>() / target.len() as f64;
        let mut ssr = 0.0;
        let mut sst = 0.0;
        for (row, &t) in others.iter().zip(&target) {
            let fitted = dot(row, &beta);
            ssr += (t - fitted) * (t - fitted);
            sst += (t - mean) * (t - mean);
        }
        if ssr <= sst * 1e-12 {
            return Err(StatsError::RankDeficient { column: design.columns[j].clone() });
        }
        out.push((design.columns[j].clone(), sst / ssr));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustFit {
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// Two-sided p-values from z-tests on the robust standard errors.
    pub p_values: Vec<f64>,
    /// Final MAD-based residual scale; 0 means a perfect fit.
    pub scale: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Huber M-estimate via iteratively reweighted least squares, starting from
/// the ordinary solution and rescaling residuals by MAD each round.
pub fn fit_robust(design: &DesignMatrix) -> Result<RobustFit, StatsError> {
    let x = &design.rows;
    let y = &design.response;
    let n = x.len();
    let p = design.columns.len();

    let mut beta = weighted_least_squares(x, y, None, "intercept")?;
    let mut scale = 0.0;
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..IRLS_MAX_ITERS {
        iterations += 1;
        let residuals: Vec<f64> = x.iter().zip(y).map(|(row, &yi)| yi - dot(row, &beta)).collect();
        scale = mad(&residuals) / 0.6745;
        if scale < 1e-12 {
            converged = true;
            scale = 0.0;
            break;
        }
        let weights: Vec<f64> = residuals
            .iter()
            .map(|r| {
                let u = (r / scale).abs();
                if u <= HUBER_C { 1.0 } else { HUBER_C / u }
            })
            .collect();
        let next = weighted_least_squares(x, y, Some(&weights), "intercept")?;
        let delta = beta
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        beta = next;
        if delta < IRLS_TOL {
            converged = true;
            break;
        }
    }

    let residuals: Vec<f64> = x.iter().zip(y).map(|(row, &yi)| yi - dot(row, &beta)).collect();
    let (std_errors, p_values) = if scale == 0.0 {
        let se = vec![0.0; p];
        let pv = beta.iter().map(|&b| if b.abs() > 1e-12 { 0.0 } else { 1.0 }).collect();
        (se, pv)
    } else {
        // Asymptotic M-estimator covariance:
        // scale^2 * [sum psi^2 / (n-p)] / [mean psi']^2 * (X'X)^-1.
        let mut psi_sq = 0.0;
        let mut psi_prime = 0.0;
        for r in &residuals {
            let u = r / scale;
            psi_sq += u.clamp(-HUBER_C, HUBER_C).powi(2);
            psi_prime += f64::from(u8::from(u.abs() <= HUBER_C));
        }
        let denom = (psi_prime / n as f64).powi(2);
        let inv = inverse_xtx(x, "intercept")?;
        let kappa = if denom > 0.0 && n > p {
            scale * scale * (psi_sq / (n - p) as f64) / denom
        } else {
            f64::INFINITY
        };
        let se: Vec<f64> = (0..p).map(|j| (kappa * inv[j][j]).max(0.0).sqrt()).collect();
        let pv = beta
            .iter()
            .zip(&se)
            .map(|(&b, &s)| {
                if !s.is_finite() || s == 0.0 {
                    1.0
                } else {
                    two_sided_p(b / s)
                }
            })
            .collect();
        (se, pv)
    };

    Ok(RobustFit { coefficients: beta, std_errors, p_values, scale, iterations, converged })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsTest {
    pub d: f64,
    pub p_value: f64,
}

/// Two-sample Kolmogorov-Smirnov: largest ECDF gap, with the asymptotic
/// Kolmogorov p-value at effective size na*nb/(na+nb).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsTest, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(|x, y| x.partial_cmp(y).expect("finite samples"));
    sb.sort_by(|x, y| x.partial_cmp(y).expect("finite samples"));

    let (na, nb) = (sa.len(), sb.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < na || j < nb {
        let value = match (sa.get(i), sb.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        while i < na && sa[i] == value {
            i += 1;
        }
        while j < nb && sb[j] == value {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }

    let effective = (na * nb) as f64 / (na + nb) as f64;
    let lambda = d * effective.sqrt();
    Ok(KsTest { d, p_value: kolmogorov_survival(lambda) })
}

/// P(K > lambda) for the Kolmogorov distribution. The alternating series
/// converges fast for large lambda; the Jacobi theta dual is used below 1.0
/// where the series is slow.
fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 1e-8 {
        return 1.0;
    }
    if lambda < 1.0 {
        let v = std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let w = (2.0 * std::f64::consts::PI).sqrt() / lambda;
        let cdf = w * ((-v).exp() + (-9.0 * v).exp() + (-25.0 * v).exp() + (-49.0 * v).exp());
        (1.0 - cdf).clamp(0.0, 1.0)
    } else {
        let mut sum = 0.0;
        for k in 1..=100 {
            let term = (-2.0 * (k as f64 * lambda).powi(2)).exp();
            sum += if k % 2 == 1 { term } else { -term };
            if term < 1e-16 {
                break;
            }
        }
        (2.0 * sum).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupRegression {
    pub n_obs: usize,
    pub converged: bool,
    pub iterations: usize,
    pub coefficients: BTreeMap<String, f64>,
    pub std_errors: BTreeMap<String, f64>,
    pub p_values: BTreeMap<String, f64>,
    pub vif: BTreeMap<String, f64>,
    pub dropped: BTreeMap<String, DropReason>,
    pub ks: KsTest,
}

impl GroupRegression {
    /// Column names with p below the significance level.
    pub fn significant(&self) -> Vec<&str> {
        self.p_values
            .iter()
            .filter(|(_, &p)| p < SIGNIFICANCE_LEVEL)
            .map(|(name, _)| name.as_str())
            .collect()
    }
}

/// Screens the design, fits the robust model, and tests fitted-vs-observed
/// distributional agreement. Every principle ends up either as a
/// coefficient or in the dropped ledger.
pub fn run_group_regression(observations: &[Observation]) -> Result<GroupRegression, StatsError> {
    let design = build_design_matrix(observations)?;
    let vifs = vif(&design)?;
    for (column, value) in &vifs {
        if *value > VIF_LIMIT {
            return Err(StatsError::VifExceeded {
                column: column.clone(),
                vif: *value,
                limit: VIF_LIMIT,
            });
        }
    }
    let fit = fit_robust(&design)?;
    let fitted: Vec<f64> = design.rows.iter().map(|row| dot(row, &fit.coefficients)).collect();
    let ks = ks_two_sample(&fitted, &design.response)?;

    let zip_named = |values: &[f64]| -> BTreeMap<String, f64> {
        design.columns.iter().cloned().zip(values.iter().copied()).collect()
    };
    Ok(GroupRegression {
        n_obs: observations.len(),
        converged: fit.converged,
        iterations: fit.iterations,
        coefficients: zip_named(&fit.coefficients),
        std_errors: zip_named(&fit.std_errors),
        p_values: zip_named(&fit.p_values),
        vif: vifs.into_iter().collect(),
        dropped: design.dropped,
        ks,
    })
}

/// Fixed-width table of the fit, one row per model term in canonical
/// principle order; dropped principles show their reason, `*` marks
/// coefficients significant at the 5% level.
pub fn render_text(report: &GroupRegression) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<28} {:>12} {:>12} {:>10}\n",
        "term", "coef", "std err", "p-value"
    ));
    let mut terms = vec!["intercept".to_string()];
    terms.extend(Principle::ALL.iter().map(|p| p.name().to_string()));
    for term in &terms {
        if let Some(coef) = report.coefficients.get(term) {
            let se = report.std_errors[term];
            let p = report.p_values[term];
            let marker = if p < SIGNIFICANCE_LEVEL { " *" } else { "" };
            out.push_str(&format!(
                "{:<28} {:>12.4} {:>12.4} {:>10.4}{}\n",
                term, coef, se, p, marker
            ));
        } else if let Some(reason) = report.dropped.get(term) {
            out.push_str(&format!("{:<28} {:>12} ({})\n", term, "-", reason));
        }
    }
    out.push_str(&format!(
        "n={}  ks d={:.4} p={:.4}  {} after {} iterations\n",
        report.n_obs,
        report.ks.d,
        report.ks.p_value,
        if report.converged { "converged" } else { "did not converge" },
        report.iterations
    ));
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite residuals"));
    let n = v.len();
    if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 }
}

/// Median absolute deviation about the median.
fn mad(values: &[f64]) -> f64 {
    let m = median(values);
    let deviations: Vec<f64> = values.iter().map(|v| (v - m).abs()).collect();
    median(&deviations)
}

fn two_sided_p(z: f64) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    (2.0 * (1.0 - normal.cdf(z.abs()))).clamp(0.0, 1.0)
}

/// Solves (X'WX) beta = X'Wy by Gaussian elimination with partial pivoting.
fn weighted_least_squares(
    x: &[Vec<f64>],
    y: &[f64],
    weights: Option<&[f64]>,
    context: &str,
) -> Result<Vec<f64>, StatsError> {
    let p = x[0].len();
    let mut a = vec![vec![0.0; p]; p];
    let mut b = vec![0.0; p];
    for (i, (row, &yi)) in x.iter().zip(y).enumerate() {
        let w = weights.map_or(1.0, |ws| ws[i]);
        for j in 0..p {
            b[j] += w * row[j] * yi;
            for k in j..p {
                a[j][k] += w * row[j] * row[k];
            }
        }
    }
    for j in 0..p {
        for k in 0..j {
            a[j][k] = a[k][j];
        }
    }
    solve_linear(a, b, context)
}

/// Inverse of X'X via repeated solves against unit vectors.
fn inverse_xtx(x: &[Vec<f64>], context: &str) -> Result<Vec<Vec<f64>>, StatsError> {
    let p = x[0].len();
    let mut a = vec![vec![0.0; p]; p];
    for row in x {
        for j in 0..p {
            for k in 0..p {
                a[j][k] += row[j] * row[k];
            }
        }
    }
    let mut inv = vec![vec![0.0; p]; p];
    for col in 0..p {
        let mut e = vec![0.0; p];
        e[col] = 1.0;
        let solution = solve_linear(a.clone(), e, context)?;
        for (r, v) in solution.into_iter().enumerate() {
            inv[r][col] = v;
        }
    }
    Ok(inv)
}

fn solve_linear(
    mut a: Vec<Vec<f64>>,
    mut b: Vec<f64>,
    context: &str,
) -> Result<Vec<f64>, StatsError> {
    let n = a.len();
    let scale = a
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(1.0);
    for col in 0..n {
        let mut pivot = col;
        for r in col + 1..n {
            if a[r][col].abs() > a[pivot][col].abs() {
                pivot = r;
            }
        }
        if a[pivot][col].abs() < scale * 1e-12 {
            return Err(StatsError::RankDeficient { column: context.to_string() });
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in col + 1..n {
            let factor = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= factor * a[col][c];
            }
            b[r] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= a[i][j] * x[j];
        }
        x[i] = s / a[i][i];
    }
    Ok(x)
}

/// Deterministic demo fixtures shaped like the bundled rule groups.
pub mod fixtures {
    use super::*;
    use crate::principles::Principle;

    /// A group in the shape of the bundled `log4j` rules: throttling and a
    /// successful-action check each cut workload sharply, one generalized
    /// characteristic raises it slightly, the remaining principles are
    /// constant across the group. The noiseless response is
    /// 7.45 - 2.71*successful - 7.39*throttling + 0.82*characteristic.
    pub fn log4j_group(replicas: usize, noise_sd: f64, seed: u64) -> Vec<Observation> {
        use rand::{Rng, SeedableRng};
        let normal = Normal::new(0.0, 1.0).expect("unit normal");
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut observations = Vec::new();
        for _ in 0..replicas.max(1) {
            for i in 0..9 {
                let successful = i < 2;
                let throttled = i < 6;
                let characteristic = (3..5).contains(&i);
                let mut labels = PrincipleSet::default();
                labels.set(Principle::SuccessfulAction, successful);
                labels.set(Principle::AlertThrottling, throttled);
                labels.set(Principle::GeneralizedCharacteristic, characteristic);
                labels.set(Principle::GeneralizedPosition, true);
                let noise = noise_sd * normal.inverse_cdf(rng.gen_range(1e-9..1.0));
                let response = 7.45 - 2.71 * f64::from(u8::from(successful))
                    - 7.39 * f64::from(u8::from(throttled))
                    + 0.82 * f64::from(u8::from(characteristic))
                    + noise;
                observations.push(Observation { labels, response });
            }
        }
        observations
    }
}
