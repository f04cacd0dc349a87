//! Ferroelectric materials, layer stacks and Landau-coefficient calibration.
//!
//! Everything in here is stored in strict SI units. Laboratory units only
//! appear when parsing configuration (see [`StackConfig::from_json`]).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{split_unit_suffix, Unit, EPSILON_0};

/// Landau-Ginzburg-Devonshire coefficients plus the film geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FerroMaterial {
    /// Second-order Landau coefficient [m/F].
    pub alpha: f64,
    /// Fourth-order coefficient [V·m⁵/C³].
    pub beta: f64,
    /// Sixth-order coefficient [V·m⁹/C⁵].
    pub gamma: f64,
    /// Domain-wall coupling [V·m³/C].
    pub k: f64,
    /// Kinetic resistivity [Ω·m]. Only rescales time.
    pub rho: f64,
    /// Background relative permittivity.
    pub eps_f: f64,
    /// Film thickness [m].
    pub t_f: f64,
}

impl FerroMaterial {
    /// Build a material from its measurable switching targets, using the
    /// calibrated quartic (`gamma = 0`).
    pub fn from_targets(p_r: f64, e_c: f64, k: f64, rho: f64, eps_f: f64, t_f: f64) -> Result<Self> {
        let (alpha, beta) = calibrate_landau(p_r, e_c)?;
        Ok(FerroMaterial {
            alpha,
            beta,
            gamma: 0.0,
            k,
            rho,
            eps_f,
            t_f,
        })
    }

    /// Quasi-static stationary field `E(P) = ∂f/∂P` of the Landau polynomial,
    /// with an optional multiplier on `alpha` (grain disorder).
    #[inline]
    pub fn landau_field(&self, p: f64, alpha_scale: f64) -> f64 {
        let p2 = p * p;
        p * (2.0 * self.alpha * alpha_scale + p2 * (4.0 * self.beta + 6.0 * self.gamma * p2))
    }

    /// `dE/dP` of [`landau_field`](Self::landau_field).
    #[inline]
    pub fn landau_stiffness(&self, p: f64, alpha_scale: f64) -> f64 {
        let p2 = p * p;
        2.0 * self.alpha * alpha_scale + p2 * (12.0 * self.beta + 30.0 * self.gamma * p2)
    }

    /// Landau part of the free-energy density, `αP² + βP⁴ + γP⁶` [J/m³].
    #[inline]
    pub fn landau_energy(&self, p: f64, alpha_scale: f64) -> f64 {
        let p2 = p * p;
        p2 * (self.alpha * alpha_scale + p2 * (self.beta + self.gamma * p2))
    }

    /// Zero-field spontaneous polarization (positive root), if the
    /// coefficients describe a ferroelectric.
    pub fn spontaneous_polarization(&self, alpha_scale: f64) -> Option<f64> {
        let a = self.alpha * alpha_scale;
        if a >= 0.0 {
            return None;
        }
        if self.gamma == 0.0 {
            return Some((-a / (2.0 * self.beta)).sqrt());
        }
        // 2a + 4b x + 6g x² = 0 with x = P²; pick the larger positive root.
        let disc = 16.0 * self.beta * self.beta - 48.0 * self.gamma * a;
        let x = (-4.0 * self.beta + disc.sqrt()) / (12.0 * self.gamma);
        (x > 0.0).then(|| x.sqrt())
    }

    /// Polarization magnitude at which E(P) folds (onset of the negative
    /// capacitance branch).
    pub fn fold_polarization(&self, alpha_scale: f64) -> Option<f64> {
        let a = self.alpha * alpha_scale;
        if a >= 0.0 {
            return None;
        }
        if self.gamma == 0.0 {
            return Some((-a / (6.0 * self.beta)).sqrt());
        }
        let disc = 144.0 * self.beta * self.beta - 240.0 * self.gamma * a;
        let x = (-12.0 * self.beta + disc.sqrt()) / (60.0 * self.gamma);
        (x > 0.0).then(|| x.sqrt())
    }

    /// Magnitude of the intrinsic (homogeneous switching) coercive field.
    pub fn intrinsic_coercive_field(&self, alpha_scale: f64) -> Option<f64> {
        self.fold_polarization(alpha_scale)
            .map(|p| self.landau_field(p, alpha_scale).abs())
    }
}

/// Invert the stationarity conditions of the quartic Landau polynomial
/// so that the zero-field minima sit at `±p_r` and the fold of `E(P)` has
/// magnitude `e_c`. Returns `(alpha, beta)`; `gamma` is implied zero.
pub fn calibrate_landau(p_r: f64, e_c: f64) -> Result<(f64, f64)> {
    if !(p_r > 0.0 && p_r.is_finite()) {
        return Err(Error::invariant("p_r", "p_r > 0", p_r));
    }
    if !(e_c > 0.0 && e_c.is_finite()) {
        return Err(Error::invariant("e_c", "e_c > 0", e_c));
    }
    let alpha = -(3.0 * 3f64.sqrt() / 4.0) * e_c / p_r;
    let beta = -alpha / (2.0 * p_r * p_r);
    Ok((alpha, beta))
}

/// A linear series layer: a dielectric film or an electrode dead layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DielectricLayer {
    pub eps_d: f64,
    /// Thickness [m]; zero means the layer is absent.
    pub t_d: f64,
}

impl DielectricLayer {
    /// Equivalent vacuum thickness `t_d / eps_d` [m].
    pub fn equivalent_thickness(&self) -> f64 {
        self.t_d / self.eps_d
    }
}

/// Unchecked stack description, as parsed from configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StackConfig {
    pub ferro: FerroMaterial,
    /// When false, `alpha > 0` is accepted (paraelectric film).
    #[serde(default = "default_true")]
    pub ferroelectric: bool,
    pub dielectric: Option<DielectricLayer>,
    /// Dead-layer model of finite electrode screening, applied at both
    /// electrodes.
    pub electrode_screen: Option<DielectricLayer>,
    /// Device area [m²].
    pub area: f64,
}

fn default_true() -> bool {
    true
}

/// A validated stack. Construct through [`StackConfig::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stack {
    config: StackConfig,
}

impl std::ops::Deref for Stack {
    type Target = StackConfig;

    fn deref(&self) -> &StackConfig {
        &self.config
    }
}

fn check(ok: bool, field: &str, requirement: &'static str, value: f64) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::invariant(field, requirement, value))
    }
}

fn check_layer(name: &str, layer: &DielectricLayer) -> Result<()> {
    check(layer.eps_d >= 1.0, &format!("{name}.eps_d"), "eps_d >= 1", layer.eps_d)?;
    check(layer.t_d >= 0.0, &format!("{name}.t_d"), "t_d >= 0", layer.t_d)
}

impl StackConfig {
    /// An MFM stack with ideal electrodes.
    pub fn mfm(ferro: FerroMaterial, area: f64) -> Self {
        StackConfig {
            ferro,
            ferroelectric: true,
            dielectric: None,
            electrode_screen: None,
            area,
        }
    }

    pub fn with_dielectric(mut self, eps_d: f64, t_d: f64) -> Self {
        self.dielectric = Some(DielectricLayer { eps_d, t_d });
        self
    }

    pub fn with_electrode_screening(mut self, eps_e: f64, lambda: f64) -> Self {
        self.electrode_screen = Some(DielectricLayer { eps_d: eps_e, t_d: lambda });
        self
    }

    /// Enforce every stack invariant and return the checked stack.
    pub fn validate(self) -> Result<Stack> {
        let m = &self.ferro;
        check(m.t_f > 0.0, "material.t_f", "t_f > 0", m.t_f)?;
        check(m.rho > 0.0, "material.rho", "rho > 0", m.rho)?;
        check(m.eps_f >= 1.0, "material.eps_f", "eps_f >= 1", m.eps_f)?;
        check(m.k >= 0.0, "material.k", "k >= 0", m.k)?;
        check(true, "material.alpha", "finite", m.alpha)?;
        check(true, "material.beta", "finite", m.beta)?;
        check(m.gamma >= 0.0, "material.gamma", "gamma >= 0", m.gamma)?;
        if self.ferroelectric {
            check(
                m.alpha < 0.0,
                "material.alpha",
                "alpha < 0 for a ferroelectric (positive alpha is paraelectric)",
                m.alpha,
            )?;
        }
        if m.gamma == 0.0 {
            check(m.beta > 0.0, "material.beta", "beta > 0 when gamma = 0", m.beta)?;
        }
        check(self.area > 0.0, "device.area", "area > 0", self.area)?;
        if let Some(d) = &self.dielectric {
            check_layer("dielectric", d)?;
        }
        if let Some(e) = &self.electrode_screen {
            check_layer("electrodes", e)?;
        }
        Ok(Stack { config: self })
    }

    /// Parse the structured configuration tree:
    /// `material.{p_r, e_c | alpha, beta, gamma, k, rho, eps_f, t_f}`,
    /// `dielectric.{eps_d, t_d}`, `electrodes.{lambda, eps_e}`, `device.area`.
    /// Dimensional keys may carry a unit suffix (`t_f_nm`, `p_r_uC_cm2`).
    pub fn from_json(tree: &serde_json::Value) -> Result<Self> {
        let material = Section::new(tree, "material", true)?;
        let ferro = if material.has("alpha") {
            FerroMaterial {
                alpha: material.require("alpha", None)?,
                beta: material.require("beta", None)?,
                gamma: material.optional("gamma", None)?.unwrap_or(0.0),
                k: material.require("k", None)?,
                rho: material.require("rho", None)?,
                eps_f: material.require("eps_f", None)?,
                t_f: material.require("t_f", Some(Unit::Meter))?,
            }
        } else {
            let p_r = material.require("p_r", Some(Unit::CoulombPerM2))?;
            let e_c = material.require("e_c", Some(Unit::VoltPerM))?;
            let (alpha, beta) = calibrate_landau(p_r, e_c)?;
            FerroMaterial {
                alpha,
                beta,
                gamma: material.optional("gamma", None)?.unwrap_or(0.0),
                k: material.require("k", None)?,
                rho: material.require("rho", None)?,
                eps_f: material.require("eps_f", None)?,
                t_f: material.require("t_f", Some(Unit::Meter))?,
            }
        };
        let ferroelectric = tree
            .get("material")
            .and_then(|m| m.get("ferroelectric"))
            .and_then(|v| v.as_bool())
            .unwrap_or(true);

        let dielectric = Section::new(tree, "dielectric", false)?;
        let dielectric = if dielectric.is_present() {
            Some(DielectricLayer {
                eps_d: dielectric.require("eps_d", None)?,
                t_d: dielectric.require("t_d", Some(Unit::Meter))?,
            })
        } else {
            None
        };
        let electrodes = Section::new(tree, "electrodes", false)?;
        let electrode_screen = if electrodes.is_present() {
            Some(DielectricLayer {
                eps_d: electrodes.require("eps_e", None)?,
                t_d: electrodes.require("lambda", Some(Unit::Meter))?,
            })
        } else {
            None
        };
        let device = Section::new(tree, "device", true)?;
        let area = device.require("area", Some(Unit::SquareMeter))?;
        Ok(StackConfig {
            ferro,
            ferroelectric,
            dielectric,
            electrode_screen,
            area,
        })
    }

    /// Resolved configuration tree in plain SI keys; parses back to `self`.
    pub fn to_json(&self) -> serde_json::Value {
        let m = &self.ferro;
        let mut tree = serde_json::json!({
            "material": {
                "alpha": m.alpha, "beta": m.beta, "gamma": m.gamma, "k": m.k,
                "rho": m.rho, "eps_f": m.eps_f, "t_f": m.t_f,
                "ferroelectric": self.ferroelectric,
            },
            "device": { "area": self.area },
        });
        if let Some(d) = &self.dielectric {
            tree["dielectric"] = serde_json::json!({ "eps_d": d.eps_d, "t_d": d.t_d });
        }
        if let Some(e) = &self.electrode_screen {
            tree["electrodes"] = serde_json::json!({ "eps_e": e.eps_d, "lambda": e.t_d });
        }
        tree
    }
}

/// View over one section of the configuration tree with unit-suffixed keys
/// resolved to SI.
pub(crate) struct Section {
    name: String,
    values: BTreeMap<String, (f64, Option<Unit>)>,
    present: bool,
}

impl Section {
    pub(crate) fn new(tree: &serde_json::Value, name: &str, mandatory: bool) -> Result<Self> {
        let mut values = BTreeMap::new();
        let Some(obj) = tree.get(name) else {
            if mandatory {
                return Err(Error::Usage(format!("missing configuration section `{name}`")));
            }
            return Ok(Section { name: name.into(), values, present: false });
        };
        let obj = obj
            .as_object()
            .ok_or_else(|| Error::Usage(format!("section `{name}` must be an object")))?;
        for (key, value) in obj {
            let Some(x) = value.as_f64() else { continue };
            let (stem, unit) = split_unit_suffix(key);
            if values.insert(stem.to_string(), (x, unit)).is_some() {
                return Err(Error::Usage(format!(
                    "`{name}.{stem}` given more than once (with different unit suffixes)"
                )));
            }
        }
        Ok(Section { name: name.into(), values, present: true })
    }

    pub(crate) fn is_present(&self) -> bool {
        self.present
    }

    pub(crate) fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    /// `si` is the SI unit of the quantity; `None` means dimensionless (no
    /// suffix allowed).
    pub(crate) fn optional(&self, key: &str, si: Option<Unit>) -> Result<Option<f64>> {
        let Some(&(x, unit)) = self.values.get(key) else {
            return Ok(None);
        };
        match (unit, si) {
            (None, _) => Ok(Some(x)),
            (Some(u), Some(target)) => crate::units::convert_units(x, u, target).map(Some),
            (Some(u), None) => Err(Error::Usage(format!(
                "`{}.{key}` is dimensionless but has unit suffix `{u}`",
                self.name
            ))),
        }
    }

    pub(crate) fn require(&self, key: &str, si: Option<Unit>) -> Result<f64> {
        self.optional(key, si)?
            .ok_or_else(|| Error::Usage(format!("missing required key `{}.{key}`", self.name)))
    }
}

impl Stack {
    pub fn config(&self) -> &StackConfig {
        &self.config
    }

    pub fn material(&self) -> &FerroMaterial {
        &self.config.ferro
    }

    /// Series layers from top electrode to bottom electrode, excluding the
    /// ferroelectric itself. Absent layers are skipped.
    pub fn series_layers(&self) -> Vec<DielectricLayer> {
        let mut layers = Vec::with_capacity(3);
        if let Some(e) = self.electrode_screen.filter(|l| l.t_d > 0.0) {
            layers.push(e);
        }
        if let Some(d) = self.dielectric.filter(|l| l.t_d > 0.0) {
            layers.push(d);
        }
        if let Some(e) = self.electrode_screen.filter(|l| l.t_d > 0.0) {
            layers.push(e);
        }
        layers
    }

    /// Total equivalent vacuum thickness of the series layers [m].
    pub fn t_eff(&self) -> f64 {
        self.series_layers()
            .iter()
            .map(DielectricLayer::equivalent_thickness)
            .sum()
    }

    /// Linear capacitance per area of the series layers [F/m²]; infinite for
    /// ideal MFM.
    pub fn series_capacitance(&self) -> f64 {
        EPSILON_0 / self.t_eff()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo() -> FerroMaterial {
        FerroMaterial::from_targets(0.25, 1e8, 1e-10, 1.0, 30.0, 10e-9).unwrap()
    }

    #[test]
    fn calibration_values() {
        let (a, b) = calibrate_landau(0.25, 1e8).unwrap();
        assert!((a - -5.196152e8).abs() / 5.196152e8 < 1e-6, "{a}");
        assert!((b - 4.156922e9).abs() / 4.156922e9 < 1e-6, "{b}");
    }

    #[test]
    fn calibration_rejects_nonpositive() {
        assert!(calibrate_landau(0.0, 1e8).is_err());
        assert!(calibrate_landau(0.25, -1.0).is_err());
        assert!(calibrate_landau(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn alpha_minus_one_roundtrip() {
        // e_c chosen so that alpha = -1 with p_r = 1.
        let e_c = 4.0 / (3.0 * 3f64.sqrt());
        let (a, b) = calibrate_landau(1.0, e_c).unwrap();
        assert!((a + 1.0).abs() < 1e-15);
        assert!(((-a / (2.0 * b)).sqrt() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn brute_force_scan_confirms_stationary_and_fold_points() {
        for &(p_r, e_c) in &[(0.25, 1e8), (0.05, 1.5e8), (1.0, 3e8)] {
            let m = FerroMaterial::from_targets(p_r, e_c, 0.0, 1.0, 1.0, 1e-8).unwrap();
            let n = 200_001;
            let grid: Vec<f64> = (0..n).map(|i| -2.0 * p_r + 4.0 * p_r * i as f64 / (n - 1) as f64).collect();
            // Minimum of the Landau energy on the positive half.
            let (p_min, _) = grid
                .iter()
                .filter(|p| **p > 0.0)
                .map(|&p| (p, m.landau_energy(p, 1.0)))
                .fold((0.0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
            assert!((p_min - p_r).abs() < 4.0 * p_r / n as f64 * 2.0, "{p_min} vs {p_r}");
            // Most negative E(P) on the positive half is the fold.
            let e_min = grid
                .iter()
                .filter(|p| **p > 0.0)
                .map(|&p| m.landau_field(p, 1.0))
                .fold(f64::INFINITY, f64::min);
            assert!((e_min + e_c).abs() / e_c < 1e-9, "{e_min} vs {e_c}");
            let p_star = m.fold_polarization(1.0).unwrap();
            assert!((m.landau_field(p_star, 1.0) + e_c).abs() / e_c < 1e-12);
            assert!((m.spontaneous_polarization(1.0).unwrap() - p_r).abs() / p_r < 1e-12);
        }
    }

    #[test]
    fn sextic_roots() {
        let m = FerroMaterial { alpha: -1.0, beta: 0.5, gamma: 2.0, ..demo() };
        let p0 = m.spontaneous_polarization(1.0).unwrap();
        assert!(m.landau_field(p0, 1.0).abs() < 1e-12);
        let pf = m.fold_polarization(1.0).unwrap();
        assert!(m.landau_stiffness(pf, 1.0).abs() < 1e-12);
    }

    #[test]
    fn validate_accepts_mfm() {
        let stack = StackConfig::mfm(demo(), 1e-10).validate().unwrap();
        assert_eq!(stack.t_eff(), 0.0);
    }

    #[test]
    fn validate_rejects_zero_thickness() {
        let mut m = demo();
        m.t_f = 0.0;
        let err = StackConfig::mfm(m, 1e-10).validate().unwrap_err().to_string();
        assert!(err.contains("t_f > 0"), "{err}");
    }

    #[test]
    fn validate_rejects_paraelectric_alpha() {
        let mut m = demo();
        m.alpha = 1e8;
        let err = StackConfig::mfm(m, 1e-10).validate().unwrap_err().to_string();
        assert!(err.contains("alpha"), "{err}");
        let mut cfg = StackConfig::mfm(m, 1e-10);
        cfg.ferroelectric = false;
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn validate_reports_layer_fields() {
        let err = StackConfig::mfm(demo(), 1e-10)
            .with_dielectric(0.5, 1e-9)
            .validate()
            .unwrap_err()
            .to_string();
        assert!(err.contains("dielectric.eps_d"), "{err}");
        let err = StackConfig::mfm(demo(), 0.0).validate().unwrap_err().to_string();
        assert!(err.contains("device.area"), "{err}");
    }

    #[test]
    fn dead_layers_count_twice() {
        let stack = StackConfig::mfm(demo(), 1e-10)
            .with_electrode_screening(8.0, 0.5e-9)
            .validate()
            .unwrap();
        assert!((stack.t_eff() - 2.0 * 0.5e-9 / 8.0).abs() < 1e-24);
    }

    #[test]
    fn config_with_suffixes() {
        let tree = serde_json::json!({
            "material": { "p_r_uC_cm2": 25.0, "e_c_MV_cm": 1.0, "k": 1e-10, "rho": 1.0,
                          "eps_f": 30.0, "t_f_nm": 10.0 },
            "dielectric": { "eps_d": 4.0, "t_d_nm": 1.0 },
            "device": { "area_um2": 100.0 }
        });
        let cfg = StackConfig::from_json(&tree).unwrap();
        assert!((cfg.ferro.t_f - 10e-9).abs() < 1e-22);
        assert!((cfg.area - 1e-10).abs() < 1e-24);
        assert!((cfg.dielectric.unwrap().t_d - 1e-9).abs() < 1e-22);
        let (a, _) = calibrate_landau(0.25, 1e8).unwrap();
        assert!((cfg.ferro.alpha - a).abs() < 1e-6);
        let back = StackConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn config_errors() {
        let tree = serde_json::json!({ "material": { "p_r": 0.25 }, "device": { "area": 1.0 } });
        let err = StackConfig::from_json(&tree).unwrap_err().to_string();
        assert!(err.contains("material.e_c"), "{err}");
        let tree = serde_json::json!({
            "material": { "p_r": 0.25, "e_c": 1e8, "k": 0.0, "rho": 1.0, "eps_f_nm": 3.0, "t_f": 1e-8 },
            "device": { "area": 1.0 }
        });
        assert!(StackConfig::from_json(&tree).is_err());
        let tree = serde_json::json!({
            "material": { "p_r": 0.25, "p_r_uC_cm2": 25.0 }, "device": { "area": 1.0 }
        });
        assert!(StackConfig::from_json(&tree).is_err());
    }
}
