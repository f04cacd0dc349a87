//! Virtual instrument: triangular-sweep hysteresis loops, polarization
//! reversal under step fields, and quasi-static S-curve / negative
//! capacitance diagnostics.

use serde::{Deserialize, Serialize};

use crate::electrostatics::ColumnResponse;
use crate::error::{Error, Result};
use crate::lgd::{run_transient, PolarizationGrid, Simulation, SolverOptions, Trace};
use crate::material::{FerroMaterial, Stack};
use crate::parallel::map_ordered;
use crate::units::EPSILON_0;
use crate::waveform::{make_waveform, Segment, WaveformSpec};

pub const LOOP_HEADER: &str = "e_fe_Vm,p_t_Cm2";
pub const REVERSAL_HEADER: &str = "field_Vm,t_s,delta_p_Cm2";
pub const METRICS_HEADER: &str = "p_r_pos_Cm2,p_r_neg_Cm2,e_c_pos_Vm,e_c_neg_Vm,loop_area_Jm3,switching";

/// Cumulative trapezoidal integral of `i/area`, shifted so that the midpoint
/// of its range is zero.
pub fn integrate_current(i: &[f64], dt: f64, area: f64) -> Result<Vec<f64>> {
    if i.is_empty() {
        return Err(Error::Usage("integrate_current: empty current trace".into()));
    }
    let mut q = Vec::with_capacity(i.len());
    let mut acc = 0.0;
    q.push(0.0);
    for w in i.windows(2) {
        acc += 0.5 * (w[0] + w[1]) * dt / area;
        q.push(acc);
    }
    let (lo, hi) = q.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let mid = 0.5 * (lo + hi);
    for x in q.iter_mut() {
        *x -= mid;
    }
    Ok(q)
}

/// Polarization-field loop of one steady-state cycle.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PeLoop {
    /// Applied field `V/t_f` [V/m]; equals E_FE for ideal electrodes.
    pub e: Vec<f64>,
    /// Total polarization `P̄ + ε₀(ε_F − 1)·Ē_FE` [C/m²].
    pub p_t: Vec<f64>,
}

impl PeLoop {
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{LOOP_HEADER}")?;
        for (e, p) in self.e.iter().zip(&self.p_t) {
            writeln!(w, "{e},{p}")?;
        }
        Ok(())
    }

    /// `∮ E dP_T` over the cycle [J/m³] (trapezoidal, closed).
    pub fn area(&self) -> f64 {
        let n = self.e.len();
        if n < 2 {
            return 0.0;
        }
        let mut a = 0.0;
        for k in 0..n {
            let j = (k + 1) % n;
            a += 0.5 * (self.e[k] + self.e[j]) * (self.p_t[j] - self.p_t[k]);
        }
        a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopMetrics {
    /// Remnant polarization on the descending branch [C/m²].
    pub p_r_pos: f64,
    /// Remnant polarization on the ascending branch [C/m²].
    pub p_r_neg: f64,
    /// Coercive field on the ascending branch [V/m].
    pub e_c_pos: f64,
    /// Coercive field on the descending branch [V/m].
    pub e_c_neg: f64,
    /// Loop area [J/m³ per cycle].
    pub loop_area: f64,
    /// Slope `dP_T/dE` at each coercive crossing [F/m], ascending then
    /// descending.
    pub slope_at_e_c: (f64, f64),
}

impl LoopMetrics {
    pub fn write_csv<W: std::io::Write>(metrics: Option<&LoopMetrics>, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{METRICS_HEADER}")?;
        match metrics {
            Some(m) => writeln!(w, "{},{},{},{},{},true", m.p_r_pos, m.p_r_neg, m.e_c_pos, m.e_c_neg, m.loop_area),
            None => writeln!(w, "NaN,NaN,NaN,NaN,NaN,false"),
        }
    }

    /// Coercive-field half-width `(e_c_pos − e_c_neg)/2`.
    pub fn coercive_half_width(&self) -> f64 {
        0.5 * (self.e_c_pos - self.e_c_neg)
    }

    /// Remnant half-split `(p_r_pos − p_r_neg)/2`.
    pub fn remnant_half_split(&self) -> f64 {
        0.5 * (self.p_r_pos - self.p_r_neg)
    }
}

#[derive(Debug, Clone)]
pub struct HysteresisResult {
    pub curve: PeLoop,
    /// `None` when the loop never switches (no zero crossings).
    pub metrics: Option<LoopMetrics>,
    pub trace: Trace,
    pub final_grid: PolarizationGrid,
}

/// First crossing of `y` through zero in the requested direction, linearly
/// interpolated. Returns `(x at crossing, dy/dx between the bracketing samples)`.
fn zero_crossing(x: &[f64], y: &[f64], rising: bool) -> Option<(f64, f64)> {
    for k in 1..y.len() {
        let (y0, y1) = (y[k - 1], y[k]);
        let hit = if rising { y0 < 0.0 && y1 >= 0.0 } else { y0 > 0.0 && y1 <= 0.0 };
        if hit {
            let f = y0 / (y0 - y1);
            let xc = x[k - 1] + f * (x[k] - x[k - 1]);
            let slope = (y1 - y0) / (x[k] - x[k - 1]);
            return Some((xc, slope));
        }
    }
    None
}

/// Value of `y` where `x` crosses zero in the requested direction.
fn value_at_zero(x: &[f64], y: &[f64], rising: bool) -> Option<f64> {
    for k in 1..x.len() {
        let (x0, x1) = (x[k - 1], x[k]);
        let hit = if rising { x0 < 0.0 && x1 >= 0.0 } else { x0 > 0.0 && x1 <= 0.0 };
        if hit {
            let f = x0 / (x0 - x1);
            return Some(y[k - 1] + f * (y[k] - y[k - 1]));
        }
    }
    None
}

/// Start time, period and amplitude sign of the last full triangle cycle.
fn final_cycle(spec: &WaveformSpec) -> Result<(f64, f64, f64)> {
    let mut t = 0.0;
    let mut last = None;
    let mut total_cycles = 0;
    for seg in &spec.segments {
        if let Segment::Triangle { amplitude, period, cycles } = *seg {
            total_cycles += cycles;
            last = Some((t + period * (cycles - 1) as f64, period, amplitude.signum()));
        }
        t += seg.duration();
    }
    if total_cycles < 2 {
        return Err(Error::Usage(
            "hysteresis experiment needs at least 2 triangle cycles (the first is conditioning)".into(),
        ));
    }
    last.ok_or_else(|| Error::Usage("no triangle segment".into()))
}

/// Run a triangular-sweep loop measurement and extract metrics from the
/// final full cycle.
pub fn hysteresis_experiment(
    stack: &Stack,
    grid: &PolarizationGrid,
    spec: &WaveformSpec,
    options: &SolverOptions,
) -> Result<HysteresisResult> {
    let (t_start, period, sign) = final_cycle(spec)?;
    let waveform = make_waveform(spec)?;
    let (trace, final_grid) = run_transient(stack, grid, &waveform, options)?;
    let m = stack.material();
    let dt_rec = waveform.dt * options.record_stride as f64;
    let k0 = (t_start / dt_rec).round() as usize;
    let per = (period / dt_rec).round() as usize;
    if per < 8 || k0 + per >= trace.len() + 1 {
        return Err(Error::Usage("record stride too coarse to resolve the final cycle".into()));
    }
    let bg = EPSILON_0 * (m.eps_f - 1.0);
    let range = k0..(k0 + per + 1).min(trace.len());
    let curve = PeLoop {
        e: trace.v[range.clone()].iter().map(|v| v / m.t_f).collect(),
        p_t: range.clone().map(|k| trace.p_mean[k] + bg * trace.e_fe[k]).collect(),
    };

    // The branch through the cycle boundary runs trough → end, start → crest
    // (for a positive-first triangle that is the ascending one).
    let q1 = per / 4;
    let q3 = 3 * per / 4;
    let mut wrap_e: Vec<f64> = curve.e[q3..per].to_vec();
    let mut wrap_p: Vec<f64> = curve.p_t[q3..per].to_vec();
    wrap_e.extend_from_slice(&curve.e[..=q1]);
    wrap_p.extend_from_slice(&curve.p_t[..=q1]);
    let mid_e = curve.e[q1..=q3].to_vec();
    let mid_p = curve.p_t[q1..=q3].to_vec();
    let ((rise_e, rise_p), (fall_e, fall_p)) =
        if sign > 0.0 { ((wrap_e, wrap_p), (mid_e, mid_p)) } else { ((mid_e, mid_p), (wrap_e, wrap_p)) };

    let up = zero_crossing(&rise_e, &rise_p, true);
    let down = zero_crossing(&fall_e, &fall_p, false);
    let metrics = match (up, down) {
        (Some((e_c_pos, s_up)), Some((e_c_neg, s_down))) => {
            let p_r_neg = value_at_zero(&rise_e, &rise_p, true).unwrap_or(f64::NAN);
            let p_r_pos = value_at_zero(&fall_e, &fall_p, false).unwrap_or(f64::NAN);
            Some(LoopMetrics {
                p_r_pos,
                p_r_neg,
                e_c_pos,
                e_c_neg,
                loop_area: curve.area(),
                slope_at_e_c: (s_up, s_down),
            })
        }
        _ => None,
    };
    Ok(HysteresisResult { curve, metrics, trace, final_grid })
}

/// Triangle program with a preset pulse ahead of it. Defaults follow the
/// usual loop-tracer practice: preset amplitude 1.5× the triangle amplitude
/// with the sign opposite to the first sweep, width 100 sample intervals.
pub fn loop_program(amplitude: f64, period: f64, cycles: u32, samples_per_period: usize) -> WaveformSpec {
    let dt = period / samples_per_period as f64;
    WaveformSpec {
        segments: vec![
            Segment::PresetPulse { amplitude: -1.5 * amplitude, width: 100.0 * dt },
            Segment::Triangle { amplitude, period, cycles },
        ],
        sample_interval: dt,
    }
}

/// Preset applied before each reversal measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    /// Preset voltage [V]; must be negative (saturates P < 0).
    pub amplitude: f64,
    pub width: f64,
    /// Zero-bias rest between preset and step [s].
    pub relax: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReversalCurve {
    /// Applied step field `V/t_f` [V/m].
    pub field: f64,
    pub times: Vec<f64>,
    /// `P̄(t) − P̄(0)` [C/m²].
    pub delta_p: Vec<f64>,
    /// Saturation polarization measured after the preset [C/m²].
    pub p_s: f64,
}

impl ReversalCurve {
    /// `delta_p / (2·p_s)`.
    pub fn normalized(&self) -> Vec<f64> {
        self.delta_p.iter().map(|d| d / (2.0 * self.p_s)).collect()
    }
}

pub fn write_reversal_csv<W: std::io::Write>(curves: &[ReversalCurve], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{REVERSAL_HEADER}")?;
    for c in curves {
        for (t, d) in c.times.iter().zip(&c.delta_p) {
            writeln!(w, "{},{},{}", c.field, t, d)?;
        }
    }
    Ok(())
}

/// Logarithmic time grid with `n` points from `start` to `end` inclusive.
pub fn log_time_grid(start: f64, end: f64, n: usize) -> Result<Vec<f64>> {
    if !(start > 0.0 && end > start && n >= 2) {
        return Err(Error::Usage(format!("log time grid needs 0 < start < end and n >= 2 (got {start:e}, {end:e}, {n})")));
    }
    let (a, b) = (start.log10(), end.log10());
    Ok((0..n).map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)).collect())
}

fn reversal_single(
    stack: &Stack,
    grid: &PolarizationGrid,
    field: f64,
    t_grid: &[f64],
    preset: &Preset,
    options: &SolverOptions,
) -> Result<ReversalCurve> {
    let t_f = stack.material().t_f;
    let mut sim = Simulation::new(stack, grid.clone(), *options)?;
    let v_p = preset.amplitude;
    sim.advance_to(preset.width, |_| v_p)?;
    if preset.relax > 0.0 {
        sim.advance_to(preset.width + preset.relax, |_| 0.0)?;
    }
    let t0 = sim.time();
    let p_start = sim.grid().mean();
    let v = field * t_f;
    let mut delta_p = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        sim.advance_to(t0 + t, |_| v)?;
        delta_p.push(sim.grid().mean() - p_start);
    }
    Ok(ReversalCurve { field, times: t_grid.to_vec(), delta_p, p_s: p_start.abs() })
}

/// Preset to negative saturation, then step to each field of `fields` and
/// record `ΔP(t)` on `t_grid`. Fields run concurrently; results come back
/// in input order.
pub fn reversal_experiment(
    stack: &Stack,
    grid: &PolarizationGrid,
    fields: &[f64],
    t_grid: &[f64],
    preset: &Preset,
    options: &SolverOptions,
) -> Result<Vec<ReversalCurve>> {
    if fields.is_empty() {
        return Err(Error::Usage("reversal experiment needs at least one field".into()));
    }
    if let Some(f) = fields.iter().find(|f| !(**f >= 0.0 && f.is_finite())) {
        return Err(Error::invariant("experiment.e_list", "every step field >= 0", f));
    }
    if !(preset.amplitude < 0.0 && preset.width > 0.0 && preset.relax >= 0.0) {
        return Err(Error::Usage("preset must be a negative pulse of positive width".into()));
    }
    if t_grid.is_empty() || t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid[0] <= 0.0 {
        return Err(Error::Usage("reversal time grid must be positive and strictly increasing".into()));
    }
    map_ordered(fields, |&f| reversal_single(stack, grid, f, t_grid, preset, options))
        .into_iter()
        .collect()
}

/// Time at which `ΔP` first reaches `level·max(ΔP)`, linearly interpolated
/// (the curve is taken to start at ΔP = 0 at t = 0).
pub fn switching_time(curve: &ReversalCurve, level: f64) -> Option<f64> {
    let max = curve.delta_p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) || !(0.0..=1.0).contains(&level) {
        return None;
    }
    let target = level * max;
    if target <= 0.0 {
        return Some(0.0);
    }
    let (mut t_prev, mut d_prev) = (0.0, 0.0);
    for (&t, &d) in curve.times.iter().zip(&curve.delta_p) {
        if d >= target {
            if d == d_prev {
                return Some(t);
            }
            return Some(t_prev + (t - t_prev) * (target - d_prev) / (d - d_prev));
        }
        t_prev = t;
        d_prev = d;
    }
    None
}

/// Quasi-static S-curve `E(P)` of the Landau polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct SCurve {
    pub p: Vec<f64>,
    pub e: Vec<f64>,
    /// Interval of `P` where `dE/dP < 0`.
    pub nc_region: Option<(f64, f64)>,
}

pub const SCURVE_HEADER: &str = "p_Cm2,e_Vm";

impl SCurve {
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{SCURVE_HEADER}")?;
        for (p, e) in self.p.iter().zip(&self.e) {
            writeln!(w, "{p},{e}")?;
        }
        Ok(())
    }
}

/// Sample `E(P) = 2αP + 4βP³ + 6γP⁵` on `n` points symmetric about zero,
/// spanning ±1.5 times the spontaneous polarization (or ±`p_max` if given).
pub fn scurve(mat: &FerroMaterial, n: usize, p_max: Option<f64>) -> SCurve {
    let n = n.max(3) | 1;
    let span = p_max
        .or_else(|| mat.spontaneous_polarization(1.0).map(|p0| 1.5 * p0))
        .unwrap_or(1.0);
    let half = (n / 2) as f64;
    let p: Vec<f64> = (0..n).map(|i| span * (i as f64 - half) / half).collect();
    let e = p.iter().map(|&x| mat.landau_field(x, 1.0)).collect();
    let nc_region = mat.fold_polarization(1.0).map(|pf| (-pf, pf));
    SCurve { p, e, nc_region }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NcVerdict {
    NonHysteretic,
    Hysteretic,
}

impl std::fmt::Display for NcVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NcVerdict::NonHysteretic => "non_hysteretic",
            NcVerdict::Hysteretic => "hysteretic",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NcCheck {
    pub verdict: NcVerdict,
    /// Minimum of `dV/dP` over all P [V·m²/C].
    pub min_dv_dp: f64,
    /// P at which the minimum occurs (non-negative representative).
    pub p_at_min: f64,
}

/// Quasi-static stability of the series stack. With `V(P) = E(P)·t_f +
/// t_eff·(ε₀ε_F·E(P) + P)/ε₀` the stack is non-hysteretic iff `dV/dP > 0`
/// everywhere, i.e. the series capacitance outweighs the ferroelectric's
/// negative capacitance.
pub fn nc_hysteresis_check(stack: &Stack) -> NcCheck {
    let m = stack.material();
    let c = ColumnResponse::new(stack);
    // Minimum of dE/dP = 2α + 12βx + 30γx² over x = P² >= 0.
    let x = if m.gamma > 0.0 && m.beta < 0.0 { -m.beta / (5.0 * m.gamma) } else { 0.0 };
    let p_at_min = x.sqrt();
    let min_stiffness = m.landau_stiffness(p_at_min, 1.0);
    let min_dv_dp = min_stiffness * (c.t_f + c.eps_f * c.t_eff) + c.t_eff / EPSILON_0;
    let verdict = if min_dv_dp > 0.0 { NcVerdict::NonHysteretic } else { NcVerdict::Hysteretic };
    NcCheck { verdict, min_dv_dp, p_at_min }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::electrostatics::displacement_current;
    use crate::material::StackConfig;

    fn mat() -> FerroMaterial {
        FerroMaterial::from_targets(0.25, 1e8, 0.0, 1.0, 30.0, 10e-9).unwrap()
    }

    #[test]
    fn integrate_zero_current() {
        assert!(integrate_current(&[0.0; 50], 1e-9, 1e-10).unwrap().iter().all(|&q| q == 0.0));
        assert!(integrate_current(&[], 1e-9, 1.0).is_err());
    }

    #[test]
    fn linear_capacitor_square_wave_gives_triangle() {
        // Triangle V(t) on an ideal capacitor: current is a square wave and
        // the integrated charge retraces V(t)·C/area.
        let (c_area, area, dt) = (2e-2, 1e-10, 1e-9);
        let n = 401;
        let v: Vec<f64> = (0..n)
            .map(|k| {
                let x = 4.0 * k as f64 / (n - 1) as f64;
                if x <= 1.0 { x } else if x <= 3.0 { 2.0 - x } else { x - 4.0 }
            })
            .collect();
        let d: Vec<f64> = v.iter().map(|v| c_area * v).collect();
        let i = displacement_current(&d, dt, area).unwrap();
        let slope = c_area * 4.0 / ((n - 1) as f64 * dt);
        assert!((i[50] / area - slope).abs() / slope < 1e-9);
        assert!((i[200] / area + slope).abs() / slope < 1e-9);
        let q = integrate_current(&i, dt, area).unwrap();
        for k in 0..n {
            // Central differences round the corners by at most one sample.
            assert!((q[k] - d[k]).abs() <= c_area * 4.0 / (n - 1) as f64, "{k}: {} {}", q[k], d[k]);
        }
    }

    #[test]
    fn integrate_inverts_displacement_current() {
        let dt = 1e-9;
        // Trapezoid over central differences reproduces a binomially
        // smoothed D, so the error is second order in the sample interval.
        let d: Vec<f64> = (0..8000).map(|k| 0.2 * (k as f64 * 1e-3).sin()).collect();
        let i = displacement_current(&d, dt, 3e-10).unwrap();
        let q = integrate_current(&i, dt, 3e-10).unwrap();
        let (lo, hi) = d.iter().fold((f64::MAX, f64::MIN), |a, &x| (a.0.min(x), a.1.max(x)));
        let mid = 0.5 * (lo + hi);
        for k in 0..d.len() {
            assert!((q[k] - (d[k] - mid)).abs() < 1e-6 * 0.2, "{k}: {} {}", q[k], d[k] - mid);
        }
    }

    #[test]
    fn scurve_properties() {
        let m = mat();
        let s = scurve(&m, 2001, None);
        let p0 = m.spontaneous_polarization(1.0).unwrap();
        for (p, e) in s.p.iter().zip(&s.e) {
            let mirrored = m.landau_field(-p, 1.0);
            assert_eq!(mirrored, -e);
        }
        assert!(m.landau_field(p0, 1.0).abs() < 1e-6);
        let (lo, hi) = s.nc_region.unwrap();
        let analytic = (m.alpha.abs() / (6.0 * m.beta)).sqrt();
        assert!((hi - analytic).abs() / analytic < 1e-12 && lo == -hi);
        // Numeric check: slope negative inside, positive outside.
        for w in s.p.windows(2).zip(s.e.windows(2)) {
            let (pw, ew) = w;
            let mid = 0.5 * (pw[0] + pw[1]);
            let slope = (ew[1] - ew[0]) / (pw[1] - pw[0]);
            if mid.abs() < 0.99 * hi {
                assert!(slope < 0.0);
            } else if mid.abs() > 1.01 * hi {
                assert!(slope > 0.0);
            }
        }
    }

    #[test]
    fn nc_verdicts() {
        let bare = StackConfig::mfm(mat(), 1e-12).validate().unwrap();
        assert_eq!(nc_hysteresis_check(&bare).verdict, NcVerdict::Hysteretic);
        let thick = StackConfig::mfm(mat(), 1e-12).with_dielectric(3.9, 5e-9).validate().unwrap();
        let check = nc_hysteresis_check(&thick);
        assert_eq!(check.verdict, NcVerdict::NonHysteretic);
        // Oracle: dense numeric minimum of dV/dP.
        let c = ColumnResponse::new(&thick);
        let m = thick.material();
        let v_of_p = |p: f64| {
            let e = m.landau_field(p, 1.0);
            e * c.t_f + c.t_eff * (EPSILON_0 * c.eps_f * e + p) / EPSILON_0
        };
        let h = 1e-5;
        let numeric = (-4000..=4000)
            .map(|i| i as f64 * 1e-4)
            .map(|p| (v_of_p(p + h) - v_of_p(p - h)) / (2.0 * h))
            .fold(f64::INFINITY, f64::min);
        assert!((numeric - check.min_dv_dp).abs() / check.min_dv_dp.abs() < 1e-6, "{numeric} {}", check.min_dv_dp);
    }

    #[test]
    fn switching_time_levels() {
        let curve = ReversalCurve {
            field: 1.0,
            times: vec![1.0, 2.0, 3.0, 4.0],
            delta_p: vec![0.0, 0.1, 0.3, 0.4],
            p_s: 0.2,
        };
        assert_eq!(switching_time(&curve, 0.0), Some(0.0));
        assert_eq!(switching_time(&curve, 1.0), Some(4.0));
        assert!((switching_time(&curve, 0.5).unwrap() - 2.5).abs() < 1e-12);
        let mut last = 0.0;
        for l in 1..=20 {
            let t = switching_time(&curve, l as f64 / 20.0).unwrap();
            assert!(t >= last);
            last = t;
        }
        let flat = ReversalCurve { delta_p: vec![0.0; 4], ..curve };
        assert_eq!(switching_time(&flat, 0.5), None);
    }

    #[test]
    fn final_cycle_requires_two_cycles() {
        let one = loop_program(2.0, 1e-6, 1, 400);
        assert!(final_cycle(&one).is_err());
        let two = loop_program(2.0, 1e-6, 2, 400);
        let (t0, per, sign) = final_cycle(&two).unwrap();
        assert!((t0 - (100.0 * 1e-6 / 400.0 + 1e-6)).abs() < 1e-18);
        assert_eq!(per, 1e-6);
        assert_eq!(sign, 1.0);
        assert_eq!(final_cycle(&two.negated()).unwrap().2, -1.0);
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_time_grid(1e-9, 1e-5, 5).unwrap();
        assert!((g[0] - 1e-9).abs() < 1e-24 && (g[4] - 1e-5).abs() < 1e-18);
        assert!((g[1] - 1e-8).abs() < 1e-20);
        assert!(log_time_grid(0.0, 1.0, 4).is_err());
    }
}
