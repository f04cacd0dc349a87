//! Closed-form field solution of a layered capacitor column.
//!
//! Each lateral cell is an independent series column: dead layer, optional
//! dielectric, ferroelectric, dead layer, all sharing the electrode voltage.
//! With `t_eff = Σ t_i/ε_i` over the series layers, voltage balance and
//! displacement continuity give
//!
//! ```text
//! E_FE = (V − t_eff·P/ε₀) / (t_f + ε_F·t_eff)
//! ```

use crate::error::{Error, Result};
use crate::material::Stack;
use crate::units::EPSILON_0;

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSolution {
    /// Field in the ferroelectric [V/m].
    pub e_fe: f64,
    /// Field in each series layer, in [`Stack::series_layers`] order [V/m].
    pub e_d: Vec<f64>,
    /// Displacement `ε₀ε_F·E_FE + P` [C/m²].
    pub d: f64,
    /// Electrode charge per area [C/m²]; equal to `d`.
    pub sigma_m: f64,
}

/// Affine response `E_FE = voltage_gain·V − polarization_gain·P` of one
/// column, precomputed for the solver's inner loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnResponse {
    pub voltage_gain: f64,
    pub polarization_gain: f64,
    pub t_f: f64,
    pub t_eff: f64,
    pub eps_f: f64,
}

impl ColumnResponse {
    pub fn new(stack: &Stack) -> Self {
        let m = stack.material();
        let t_eff = stack.t_eff();
        let denom = m.t_f + m.eps_f * t_eff;
        ColumnResponse {
            voltage_gain: 1.0 / denom,
            polarization_gain: t_eff / (EPSILON_0 * denom),
            t_f: m.t_f,
            t_eff,
            eps_f: m.eps_f,
        }
    }

    #[inline]
    pub fn e_fe(&self, p: f64, v: f64) -> f64 {
        if self.t_eff == 0.0 {
            v / self.t_f
        } else {
            (v - self.t_eff * p / EPSILON_0) * self.voltage_gain
        }
    }

    #[inline]
    pub fn displacement(&self, p: f64, e_fe: f64) -> f64 {
        EPSILON_0 * self.eps_f * e_fe + p
    }

    /// Electrostatic part of the column's thermodynamic potential per unit
    /// electrode area at fixed voltage [J/m²]:
    /// `t_f·(−ε₀ε_F·E²/2 − E·P) − t_eff·D²/(2ε₀)`.
    ///
    /// Its derivative with respect to P is `−t_f·E_FE`.
    #[inline]
    pub fn electrostatic_energy(&self, p: f64, v: f64) -> f64 {
        let e = self.e_fe(p, v);
        let d = self.displacement(p, e);
        self.t_f * (-0.5 * EPSILON_0 * self.eps_f * e * e - e * p)
            - self.t_eff * d * d / (2.0 * EPSILON_0)
    }
}

/// Fields in every layer of the column for polarization `p` and voltage `v`.
pub fn solve_fields(stack: &Stack, p: f64, v: f64) -> FieldSolution {
    let column = ColumnResponse::new(stack);
    let e_fe = column.e_fe(p, v);
    let d = column.displacement(p, e_fe);
    let e_d = stack
        .series_layers()
        .iter()
        .map(|l| d / (EPSILON_0 * l.eps_d))
        .collect();
    FieldSolution { e_fe, e_d, d, sigma_m: d }
}

/// Field in the ferroelectric at zero applied voltage.
pub fn depolarization_field(stack: &Stack, p: f64) -> f64 {
    solve_fields(stack, p, 0.0).e_fe
}

/// Device current `area·dD/dt` from a uniformly sampled displacement trace,
/// using central differences inside and one-sided differences at the ends.
pub fn displacement_current(d: &[f64], dt: f64, area: f64) -> Result<Vec<f64>> {
    if d.len() < 2 {
        return Err(Error::Usage(format!(
            "displacement current needs at least 2 samples, got {}",
            d.len()
        )));
    }
    if !(dt > 0.0) {
        return Err(Error::invariant("dt", "dt > 0", dt));
    }
    let n = d.len();
    let mut i = Vec::with_capacity(n);
    i.push(area * (d[1] - d[0]) / dt);
    for k in 1..n - 1 {
        i.push(area * (d[k + 1] - d[k - 1]) / (2.0 * dt));
    }
    i.push(area * (d[n - 1] - d[n - 2]) / dt);
    Ok(i)
}
