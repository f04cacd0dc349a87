//! Semi-empirical switching kinetics: Kolmogorov-Avrami-Ishibashi (single
//! time constant) and nucleation-limited switching (Lorentzian distribution
//! of log10 nucleation times), with least-squares fitting and model
//! selection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::{minimize, SimplexOptions};

/// Quadrature order used by [`nls_model`] unless the caller overrides it.
pub const DEFAULT_QUADRATURE_POINTS: usize = 129;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KaiParams {
    pub p_s: f64,
    pub tau: f64,
    pub n: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NlsParams {
    pub p_s: f64,
    pub n: f64,
    /// Median of log10 nucleation time (τ in seconds).
    pub log_tau_med: f64,
    /// Lorentzian half-width in decades.
    pub w: f64,
}

/// `2·p_s·(1 − exp(−(t/τ)ⁿ))`.
pub fn kai_model(t: f64, params: &KaiParams) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    -2.0 * params.p_s * (-(t / params.tau).powf(params.n)).exp_m1()
}

/// Lorentzian mixture of KAI kernels over `u = log10 τ`, truncated to ±8
/// half-widths and normalized on that interval.
///
/// The integral uses a composite Simpson rule in `s` with
/// `u = u_med + w·sinh(s)`, which turns the Lorentzian weight into the
/// smooth `1/cosh(s)` and concentrates nodes near the median.
/// `quadrature_points` is rounded up to an odd count of at least 17.
pub fn nls_model(t: f64, params: &NlsParams, quadrature_points: usize) -> f64 {
    nls_curve(&[t], params, quadrature_points)[0]
}

/// [`nls_model`] evaluated on many times, sharing the quadrature nodes.
pub fn nls_curve(times: &[f64], params: &NlsParams, quadrature_points: usize) -> Vec<f64> {
    if params.w <= 0.0 {
        let kai = KaiParams { p_s: params.p_s, tau: 10f64.powf(params.log_tau_med), n: params.n };
        return times.iter().map(|&t| kai_model(t, &kai)).collect();
    }
    let q = quadrature_points.max(17) | 1;
    let s_max = 8f64.asinh();
    let h = 2.0 * s_max / (q - 1) as f64;
    // Node j contributes weight_j·(1 − exp(−tⁿ·rate_j)), rate_j = 10^(−n·u_j).
    let mut rates = Vec::with_capacity(q);
    let mut weights = Vec::with_capacity(q);
    for j in 0..q {
        let s = -s_max + j as f64 * h;
        let u = params.log_tau_med + params.w * s.sinh();
        let simpson = if j == 0 || j == q - 1 { 1.0 } else if j % 2 == 1 { 4.0 } else { 2.0 };
        rates.push(10f64.powf(-params.n * u));
        weights.push(simpson / s.cosh());
    }
    let total: f64 = weights.iter().sum();
    let amplitude = 2.0 * params.p_s / total;
    times
        .iter()
        .map(|&t| {
            if t <= 0.0 {
                return 0.0;
            }
            let tn = t.powf(params.n);
            let acc: f64 = rates.iter().zip(&weights).map(|(r, w)| -w * (-tn * r).exp_m1()).sum();
            amplitude * acc
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult<P> {
    pub params: P,
    /// Sum of squared residuals [C²/m⁴].
    pub rss: f64,
    /// Root-mean-square residual [C/m²].
    pub rms: f64,
    pub points: usize,
}

impl<P> FitResult<P> {
    /// Residual variance `rss/(N − n_params)`.
    pub fn residual_variance(&self, n_params: usize) -> f64 {
        self.rss / (self.points.saturating_sub(n_params)).max(1) as f64
    }
}

fn check_data(times: &[f64], delta_p: &[f64]) -> Result<()> {
    if times.len() != delta_p.len() {
        return Err(Error::Fit(format!("{} times but {} values", times.len(), delta_p.len())));
    }
    if times.len() < 4 {
        return Err(Error::Fit(format!("need at least 4 points, got {}", times.len())));
    }
    if times.iter().chain(delta_p).any(|x| !x.is_finite()) || times.iter().any(|&t| t <= 0.0) {
        return Err(Error::Fit("times must be positive and all values finite".into()));
    }
    let (lo, hi) = delta_p.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
    if !(hi - lo > 1e-12 * hi.abs().max(lo.abs())) || !(hi > 0.0) {
        return Err(Error::Fit("degenerate data: no switching signal".into()));
    }
    Ok(())
}

/// Optimal amplitude and residual for a unit-amplitude model shape `g`:
/// `ΔP ≈ 2·p_s·g(t)` is linear in `p_s`.
fn profile_amplitude(delta_p: &[f64], shape: &[f64]) -> (f64, f64) {
    let gg: f64 = shape.iter().map(|g| g * g).sum();
    if !(gg > 0.0) {
        return (0.0, f64::INFINITY);
    }
    let gy: f64 = shape.iter().zip(delta_p).map(|(g, y)| g * y).sum();
    let amp = gy / gg;
    let rss = delta_p.iter().zip(shape).map(|(y, g)| (y - amp * g).powi(2)).sum();
    (0.5 * amp, rss)
}

fn simplex_options(scale: f64) -> SimplexOptions {
    SimplexOptions { max_evaluations: 3000, f_tol: 1e-12, f_abs: 1e-30 * scale * scale, x_tol: 1e-8 }
}

/// Refine from `x0` with restarts until a restart no longer improves.
fn polish(mut objective: impl FnMut(&[f64]) -> f64, x0: Vec<f64>, step: &[f64], scale: f64) -> (Vec<f64>, f64) {
    let opts = simplex_options(scale);
    let mut x = x0;
    let mut f = objective(&x);
    for _ in 0..4 {
        let r = minimize(&mut objective, &x, step, &opts);
        let improved = r.f < f * (1.0 - 1e-9);
        if r.f <= f {
            x = r.x;
            f = r.f;
        }
        if !improved {
            break;
        }
    }
    (x, f)
}

/// Time (log10 seconds) at which the data first reach `frac` of its maximum.
fn log_time_at_fraction(times: &[f64], delta_p: &[f64], frac: f64) -> f64 {
    let max = delta_p.iter().cloned().fold(f64::MIN, f64::max);
    let target = frac * max;
    for k in 0..times.len() {
        if delta_p[k] >= target {
            if k == 0 {
                return times[0].log10();
            }
            let (a, b) = (delta_p[k - 1], delta_p[k]);
            let (la, lb) = (times[k - 1].log10(), times[k].log10());
            return if b > a { la + (lb - la) * (target - a) / (b - a) } else { lb };
        }
    }
    times.last().unwrap().log10()
}

fn log_time_bounds(times: &[f64]) -> (f64, f64) {
    (times[0].log10(), times.last().unwrap().log10())
}

fn fit_result<P>(params: P, rss: f64, points: usize) -> FitResult<P> {
    FitResult { params, rss, rms: (rss / points as f64).sqrt(), points }
}

/// Least-squares KAI fit: coarse grid over (log10 τ, n) at `p_s =
/// max(ΔP)/2`, then simplex refinement of (log10 τ, n) with `p_s` solved
/// in closed form at every trial point.
pub fn fit_kai(times: &[f64], delta_p: &[f64]) -> Result<FitResult<KaiParams>> {
    check_data(times, delta_p)?;
    let scale = delta_p.iter().cloned().fold(f64::MIN, f64::max);
    let p_seed = 0.5 * scale;
    let (lo, hi) = log_time_bounds(times);
    let shape_of = |log_tau: f64, n: f64| -> Vec<f64> {
        let unit = KaiParams { p_s: 0.5, tau: 10f64.powf(log_tau), n };
        times.iter().map(|&t| kai_model(t, &unit)).collect()
    };

    let mut best = (vec![0.5 * (lo + hi), 1.0], f64::INFINITY);
    for i in 0..=40 {
        let log_tau = lo - 1.0 + (hi - lo + 2.0) * i as f64 / 40.0;
        for &n in &[0.3, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0] {
            let g = shape_of(log_tau, n);
            let rss: f64 = g.iter().zip(delta_p).map(|(g, y)| (2.0 * p_seed * g - y).powi(2)).sum();
            if rss < best.1 {
                best = (vec![log_tau, n], rss);
            }
        }
    }
    let objective = |x: &[f64]| {
        if !(x[1] > 0.0 && x[1] <= 4.0) {
            return f64::INFINITY;
        }
        profile_amplitude(delta_p, &shape_of(x[0], x[1])).1
    };
    let (x, rss) = polish(objective, best.0, &[0.3, 0.2], scale);
    let (p_s, _) = profile_amplitude(delta_p, &shape_of(x[0], x[1]));
    Ok(fit_result(KaiParams { p_s, tau: 10f64.powf(x[0]), n: x[1] }, rss, times.len()))
}

/// Least-squares NLS fit, structured like [`fit_kai`]. Grid seeds for the
/// half-width come from the data's 10-90% rise span in decades.
pub fn fit_nls(times: &[f64], delta_p: &[f64]) -> Result<FitResult<NlsParams>> {
    check_data(times, delta_p)?;
    let scale = delta_p.iter().cloned().fold(f64::MIN, f64::max);
    let p_seed = 0.5 * scale;
    let (lo, hi) = log_time_bounds(times);
    let span = log_time_at_fraction(times, delta_p, 0.9) - log_time_at_fraction(times, delta_p, 0.1);
    let w_seed = (0.5 * span).max(0.05);
    let q = DEFAULT_QUADRATURE_POINTS;
    let shape_of = |n: f64, u: f64, w: f64| -> Vec<f64> {
        nls_curve(times, &NlsParams { p_s: 0.5, n, log_tau_med: u, w }, q)
    };

    let mut starts: Vec<(Vec<f64>, f64)> = Vec::new();
    for i in 0..=24 {
        let u = lo - 1.0 + (hi - lo + 2.0) * i as f64 / 24.0;
        for &n in &[0.5, 1.0, 2.0, 3.0] {
            for &w in &[0.0, 0.5 * w_seed, w_seed] {
                let g = shape_of(n, u, w);
                let rss: f64 = g.iter().zip(delta_p).map(|(g, y)| (2.0 * p_seed * g - y).powi(2)).sum();
                starts.push((vec![n, u, w], rss));
            }
        }
    }
    starts.sort_by(|a, b| a.1.total_cmp(&b.1));
    let objective = |x: &[f64]| {
        if !(x[0] > 0.0 && x[0] <= 8.0) {
            return f64::INFINITY;
        }
        profile_amplitude(delta_p, &shape_of(x[0], x[1], x[2].abs())).1
    };
    let mut best: Option<(Vec<f64>, f64)> = None;
    // The few most promising seeds; the landscape has a w ↔ n ridge.
    for (x0, _) in starts.into_iter().take(3) {
        let (x, f) = polish(objective, x0, &[0.2, 0.3, 0.1 + 0.2 * w_seed], scale);
        if best.as_ref().is_none_or(|b| f < b.1) {
            best = Some((x, f));
        }
    }
    let (x, rss) = best.unwrap();
    let (n, u, w) = (x[0], x[1], x[2].abs());
    let (p_s, _) = profile_amplitude(delta_p, &shape_of(n, u, w));
    Ok(fit_result(NlsParams { p_s, n, log_tau_med: u, w }, rss, times.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KineticModel {
    Kai,
    Nls,
}

impl std::fmt::Display for KineticModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            KineticModel::Kai => "KAI",
            KineticModel::Nls => "NLS",
        })
    }
}

/// NLS is preferred only when its residual variance (N − 4 dof) is below
/// this fraction of the KAI residual variance (N − 3 dof).
pub const NLS_VARIANCE_RATIO: f64 = 0.5;

/// Residual RMS below this fraction of `max|ΔP|` counts as an exact fit, so
/// two round-off-level residuals do not decide the selection.
pub const VARIANCE_FLOOR_REL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSelection {
    pub selected: KineticModel,
    pub kai: FitResult<KaiParams>,
    pub nls: FitResult<NlsParams>,
    /// `s²_NLS / s²_KAI`.
    pub variance_ratio: f64,
}

/// Fit both models and select by penalized residual variance.
pub fn model_select(times: &[f64], delta_p: &[f64]) -> Result<ModelSelection> {
    let kai = fit_kai(times, delta_p)?;
    let nls = fit_nls(times, delta_p)?;
    let scale = delta_p.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let floor = (VARIANCE_FLOOR_REL * scale).powi(2);
    let s_kai = kai.residual_variance(3) + floor;
    let s_nls = nls.residual_variance(4) + floor;
    let variance_ratio = if s_kai > 0.0 { s_nls / s_kai } else { 1.0 };
    let selected = if variance_ratio < NLS_VARIANCE_RATIO { KineticModel::Nls } else { KineticModel::Kai };
    Ok(ModelSelection { selected, kai, nls, variance_ratio })
}

/// One ΔP(t) curve read from a data file. `field` is present when the file
/// carries the reversal-family layout.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredCurve {
    pub field: Option<f64>,
    pub times: Vec<f64>,
    pub delta_p: Vec<f64>,
}

/// Read reversal data from CSV.
///
/// Accepts the three-column family layout `field_Vm,t_s,delta_p_Cm2`
/// (rows grouped into curves by consecutive field value) and plain
/// two-column `t,ΔP` files. A non-numeric first row is taken as a header.
/// Blank lines and `#` comments are skipped. Line numbers in errors are
/// 1-based.
pub fn read_curves<R: std::io::BufRead>(reader: R) -> Result<Vec<MeasuredCurve>> {
    let mut columns: Option<usize> = None;
    let mut curves: Vec<MeasuredCurve> = Vec::new();
    let mut seen_row = false;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = text.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, _> = cells.iter().map(|c| c.parse::<f64>()).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if !seen_row && columns.is_none() => {
                if cells.len() != 2 && cells.len() != 3 {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("expected 2 or 3 columns in header, found {}", cells.len()),
                    });
                }
                columns = Some(cells.len());
                continue;
            }
            Err(e) => {
                let bad = cells.iter().find(|c| c.parse::<f64>().is_err()).copied().unwrap_or("");
                return Err(Error::Parse { line: lineno, message: format!("`{bad}` is not a number ({e})") });
            }
        };
        seen_row = true;
        let expected = *columns.get_or_insert(values.len());
        if values.len() != expected || !(expected == 2 || expected == 3) {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected {expected} columns, found {}", values.len()),
            });
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Parse { line: lineno, message: format!("non-finite value {bad}") });
        }
        let (field, t, dp) = if expected == 3 { (Some(values[0]), values[1], values[2]) } else { (None, values[0], values[1]) };
        if !(t > 0.0) {
            return Err(Error::Parse { line: lineno, message: format!("time must be positive, got {t}") });
        }
        match curves.last_mut() {
            Some(c) if c.field == field => {
                if t <= *c.times.last().unwrap() {
                    return Err(Error::Parse { line: lineno, message: "times must increase within a curve".into() });
                }
                c.times.push(t);
                c.delta_p.push(dp);
            }
            _ => curves.push(MeasuredCurve { field, times: vec![t], delta_p: vec![dp] }),
        }
    }
    if curves.is_empty() {
        return Err(Error::Usage("no data rows in input".into()));
    }
    Ok(curves)
}
