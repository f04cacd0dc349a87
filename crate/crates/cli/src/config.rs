//! Run configuration: parsing, default resolution and the manifest form.
//!
//! Input files may use unit-suffixed keys (`dx_nm`, `e_list_MV_cm`). The
//! resolved form written to the manifest uses SI keys only, so a manifest
//! parses back to exactly the same run.

use std::path::{Path, PathBuf};

use ferrostack::experiments::{loop_program, Preset};
use ferrostack::lgd::{Boundary, SolverOptions};
use ferrostack::material::StackConfig;
use ferrostack::units::{convert_units, split_unit_suffix, Unit};
use ferrostack::waveform::WaveformSpec;
use serde_json::{json, Map, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Hysteresis,
    Reversal,
    Fit,
    Scurve,
    NcCheck,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Hysteresis => "hysteresis",
            Kind::Reversal => "reversal",
            Kind::Fit => "fit",
            Kind::Scurve => "scurve",
            Kind::NcCheck => "nc-check",
        }
    }

    fn parse(s: &str) -> Option<Kind> {
        [Kind::Hysteresis, Kind::Reversal, Kind::Fit, Kind::Scurve, Kind::NcCheck]
            .into_iter()
            .find(|k| k.name() == s || k.name().replace('-', "_") == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelChoice {
    Kai,
    Nls,
    Auto,
}

impl ModelChoice {
    pub fn name(self) -> &'static str {
        match self {
            ModelChoice::Kai => "kai",
            ModelChoice::Nls => "nls",
            ModelChoice::Auto => "auto",
        }
    }

    fn parse(s: &str) -> Option<ModelChoice> {
        match s.to_ascii_lowercase().as_str() {
            "kai" => Some(ModelChoice::Kai),
            "nls" => Some(ModelChoice::Nls),
            "auto" => Some(ModelChoice::Auto),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub n_cells: usize,
    pub dx: f64,
    pub boundary: Boundary,
    pub seed: u64,
    pub sigma_rel: f64,
    /// Initial polarization of every cell [C/m²].
    pub initial_p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    Hysteresis { waveform: WaveformSpec },
    Reversal { e_list: Vec<f64>, t_grid: TimeGrid, preset: Preset },
    Fit { input: PathBuf, model: ModelChoice },
    Scurve { points: usize, p_max: Option<f64> },
    NcCheck,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub kind: Kind,
    /// Absent only for `fit`.
    pub stack: Option<StackConfig>,
    pub grid: Option<GridConfig>,
    pub solver: Option<SolverOptions>,
    pub experiment: Experiment,
    pub directory: PathBuf,
    pub runname: String,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub input: Option<PathBuf>,
    pub model: Option<ModelChoice>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Object view with unit-suffix resolution.
struct Obj<'a> {
    name: &'a str,
    map: Option<&'a Map<String, Value>>,
}

impl<'a> Obj<'a> {
    fn new(tree: &'a Value, name: &'a str) -> Result<Self, CliError> {
        match tree.get(name) {
            None | Some(Value::Null) => Ok(Obj { name, map: None }),
            Some(Value::Object(m)) => Ok(Obj { name, map: Some(m) }),
            Some(_) => Err(usage(format!("`{name}` must be an object"))),
        }
    }

    fn child(&self, name: &'a str) -> Result<Obj<'a>, CliError> {
        match self.map.and_then(|m| m.get(name)) {
            None | Some(Value::Null) => Ok(Obj { name, map: None }),
            Some(Value::Object(m)) => Ok(Obj { name, map: Some(m) }),
            Some(_) => Err(usage(format!("`{}.{name}` must be an object", self.name))),
        }
    }

    fn entry(&self, stem: &str) -> Result<Option<(&'a Value, Option<Unit>)>, CliError> {
        let Some(map) = self.map else { return Ok(None) };
        let mut found = None;
        for (key, value) in map {
            let (s, unit) = split_unit_suffix(key);
            let unit = if key == stem {
                None
            } else if s == stem {
                unit
            } else {
                continue;
            };
            if found.replace((value, unit)).is_some() {
                return Err(usage(format!("`{}.{stem}` given more than once", self.name)));
            }
        }
        Ok(found)
    }

    fn quantity(&self, stem: &str, si: Option<Unit>) -> Result<Option<f64>, CliError> {
        let Some((value, unit)) = self.entry(stem)? else { return Ok(None) };
        let x = value
            .as_f64()
            .ok_or_else(|| usage(format!("`{}.{stem}` must be a number", self.name)))?;
        scale(x, unit, si, self.name, stem).map(Some)
    }

    fn quantities(&self, stem: &str, si: Option<Unit>) -> Result<Option<Vec<f64>>, CliError> {
        let Some((value, unit)) = self.entry(stem)? else { return Ok(None) };
        let items = value
            .as_array()
            .ok_or_else(|| usage(format!("`{}.{stem}` must be an array of numbers", self.name)))?;
        items
            .iter()
            .map(|v| {
                let x = v.as_f64().ok_or_else(|| usage(format!("`{}.{stem}` must hold numbers", self.name)))?;
                scale(x, unit, si, self.name, stem)
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    fn integer(&self, key: &str) -> Result<Option<u64>, CliError> {
        match self.map.and_then(|m| m.get(key)) {
            None => Ok(None),
            Some(v) => v
                .as_u64()
                .map(Some)
                .ok_or_else(|| usage(format!("`{}.{key}` must be a non-negative integer", self.name))),
        }
    }

    fn string(&self, key: &str) -> Result<Option<&'a str>, CliError> {
        match self.map.and_then(|m| m.get(key)) {
            None => Ok(None),
            Some(v) => v.as_str().map(Some).ok_or_else(|| usage(format!("`{}.{key}` must be a string", self.name))),
        }
    }

    fn raw(&self, key: &str) -> Option<&'a Value> {
        self.map.and_then(|m| m.get(key))
    }
}

fn scale(x: f64, unit: Option<Unit>, si: Option<Unit>, section: &str, stem: &str) -> Result<f64, CliError> {
    match (unit, si) {
        (None, _) => Ok(x),
        (Some(u), Some(target)) => Ok(convert_units(x, u, target)?),
        (Some(u), None) => Err(usage(format!("`{section}.{stem}` is dimensionless but has unit suffix `{u}`"))),
    }
}

/// Read a config file. A manifest written by a previous run is accepted in
/// place of a config; its embedded resolved config is used.
pub fn load(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let tree: Value = serde_json::from_str(&text)
        .map_err(|e| usage(format!("{}: invalid JSON at line {}: {e}", path.display(), e.line())))?;
    if tree.get("tool").is_some() {
        if let Some(inner) = tree.get("config") {
            return Ok(inner.clone());
        }
    }
    Ok(tree)
}

pub fn resolve(tree: &Value, kind: Kind, ov: &Overrides) -> Result<RunConfig, CliError> {
    if !tree.is_object() {
        return Err(usage("config must be a JSON object"));
    }
    let experiment = Obj::new(tree, "experiment")?;
    if let Some(k) = experiment.string("kind")? {
        let declared = Kind::parse(k).ok_or_else(|| usage(format!("unknown experiment kind `{k}`")))?;
        if declared != kind {
            return Err(usage(format!(
                "config declares experiment `{}` but the `{}` command was run",
                declared.name(),
                kind.name()
            )));
        }
    }
    let output = Obj::new(tree, "output")?;
    let directory = match (&ov.out, output.string("directory")?) {
        (Some(d), _) => d.clone(),
        (None, Some(d)) => PathBuf::from(d),
        (None, None) => PathBuf::from("out"),
    };
    let runname = output.string("runname")?.unwrap_or(kind.name()).to_string();
    if runname.is_empty() || runname.contains(['/', '\\']) {
        return Err(usage(format!("invalid output.runname `{runname}`")));
    }

    if kind == Kind::Fit {
        let input = match (&ov.input, experiment.string("input")?) {
            (Some(p), _) => p.clone(),
            (None, Some(p)) => PathBuf::from(p),
            (None, None) => return Err(usage("fit needs an input CSV (--input or experiment.input)")),
        };
        let model = match (ov.model, experiment.string("model")?) {
            (Some(m), _) => m,
            (None, Some(m)) => ModelChoice::parse(m).ok_or_else(|| usage(format!("unknown model `{m}`")))?,
            (None, None) => ModelChoice::Auto,
        };
        return Ok(RunConfig {
            kind,
            stack: None,
            grid: None,
            solver: None,
            experiment: Experiment::Fit { input, model },
            directory,
            runname,
        });
    }

    let stack_tree = tree.get("stack").ok_or_else(|| usage("missing `stack` section"))?;
    let stack = StackConfig::from_json(stack_tree)?;
    let validated = stack.clone().validate()?;
    let mat = *validated.material();
    let p0 = mat.spontaneous_polarization(1.0).unwrap_or(0.0);
    let tau_l = mat.rho / (2.0 * mat.alpha.abs());

    let grid = resolve_grid(tree, ov, p0)?;
    let solver = resolve_solver(tree, SolverOptions::for_material(&mat))?;

    let experiment = match kind {
        Kind::Hysteresis => {
            let waveform = if let Some(w) = experiment.raw("waveform") {
                serde_json::from_value::<WaveformSpec>(w.clone())
                    .map_err(|e| usage(format!("experiment.waveform: {e}")))?
            } else if experiment.raw("loop").is_some() {
                let lp = experiment.child("loop")?;
                let amplitude = lp.quantity("amplitude", None)?.ok_or_else(|| usage("loop.amplitude (V) is required"))?;
                let period = lp.quantity("period", None)?.ok_or_else(|| usage("loop.period (s) is required"))?;
                let cycles = lp.integer("cycles")?.unwrap_or(2) as u32;
                let samples = lp.integer("samples_per_period")?.unwrap_or(2000) as usize;
                loop_program(amplitude, period, cycles, samples)
            } else {
                return Err(usage("hysteresis needs experiment.waveform or experiment.loop"));
            };
            waveform.validate()?;
            Experiment::Hysteresis { waveform }
        }
        Kind::Reversal => {
            let e_list = experiment
                .quantities("e_list", Some(Unit::VoltPerM))?
                .ok_or_else(|| usage("reversal needs experiment.e_list"))?;
            if e_list.is_empty() {
                return Err(usage("experiment.e_list is empty"));
            }
            let tg = experiment.child("t_grid")?;
            let end = tg.quantity("end", None)?.unwrap_or(1e-5);
            let t_grid = TimeGrid {
                start: tg.quantity("start", None)?.unwrap_or(tau_l),
                end,
                points: tg.integer("points")?.unwrap_or(60) as usize,
            };
            let pr = experiment.child("preset")?;
            let e_max = e_list.iter().cloned().fold(0.0, f64::max);
            let e_c = mat.intrinsic_coercive_field(1.0).unwrap_or(e_max);
            let preset = Preset {
                amplitude: pr.quantity("amplitude", None)?.unwrap_or(-2.0 * e_max.max(1.5 * e_c) * mat.t_f),
                width: pr.quantity("width", None)?.unwrap_or(20.0 * tau_l),
                relax: pr.quantity("relax", None)?.unwrap_or(20.0 * tau_l),
            };
            Experiment::Reversal { e_list, t_grid, preset }
        }
        Kind::Scurve => Experiment::Scurve {
            points: experiment.integer("points")?.unwrap_or(401) as usize,
            p_max: experiment.quantity("p_max", Some(Unit::CoulombPerM2))?,
        },
        Kind::NcCheck => Experiment::NcCheck,
        Kind::Fit => unreachable!(),
    };
    Ok(RunConfig {
        kind,
        stack: Some(stack),
        grid: Some(grid),
        solver: Some(solver),
        experiment,
        directory,
        runname,
    })
}

fn resolve_grid(tree: &Value, ov: &Overrides, p0: f64) -> Result<GridConfig, CliError> {
    let g = Obj::new(tree, "grid")?;
    let boundary = match g.string("boundary")? {
        None | Some("zero-flux") | Some("zero_flux") => Boundary::ZeroFlux,
        Some("periodic") => Boundary::Periodic,
        Some(b) => return Err(usage(format!("unknown grid.boundary `{b}` (zero-flux | periodic)"))),
    };
    let d = g.child("disorder")?;
    let n_cells = g.integer("n_cells")?.unwrap_or(1) as usize;
    let grid = GridConfig {
        n_cells,
        dx: g.quantity("dx", Some(Unit::Meter))?.unwrap_or(2e-9),
        boundary,
        seed: ov.seed.or(d.integer("seed")?).unwrap_or(0),
        sigma_rel: d.quantity("sigma_rel", None)?.unwrap_or(0.0),
        initial_p: g.quantity("initial_p", Some(Unit::CoulombPerM2))?.unwrap_or(-p0),
    };
    if n_cells == 0 {
        return Err(usage("grid.n_cells must be at least 1"));
    }
    Ok(grid)
}

fn resolve_solver(tree: &Value, defaults: SolverOptions) -> Result<SolverOptions, CliError> {
    let mut merged = serde_json::to_value(defaults).expect("options serialize");
    if let Some(given) = tree.get("solver") {
        let given = given.as_object().ok_or_else(|| usage("`solver` must be an object"))?;
        for (key, value) in given {
            if merged.get(key).is_none() {
                return Err(usage(format!("unknown solver option `{key}`")));
            }
            merged[key] = value.clone();
        }
    }
    let options: SolverOptions =
        serde_json::from_value(merged).map_err(|e| usage(format!("solver options: {e}")))?;
    options.validate()?;
    Ok(options)
}

impl RunConfig {
    /// Fully resolved configuration in SI keys.
    pub fn to_json(&self) -> Value {
        let mut tree = json!({
            "experiment": { "kind": self.kind.name() },
            "output": { "directory": self.directory.to_string_lossy(), "runname": self.runname },
        });
        if let Some(s) = &self.stack {
            tree["stack"] = s.to_json();
        }
        if let Some(g) = &self.grid {
            tree["grid"] = json!({
                "n_cells": g.n_cells,
                "dx_m": g.dx,
                "boundary": match g.boundary { Boundary::ZeroFlux => "zero-flux", Boundary::Periodic => "periodic" },
                "disorder": { "seed": g.seed, "sigma_rel": g.sigma_rel },
                "initial_p_C_m2": g.initial_p,
            });
        }
        if let Some(o) = &self.solver {
            tree["solver"] = serde_json::to_value(o).expect("options serialize");
        }
        let e = &mut tree["experiment"];
        match &self.experiment {
            Experiment::Hysteresis { waveform } => {
                e["waveform"] = serde_json::to_value(waveform).expect("waveform serializes");
            }
            Experiment::Reversal { e_list, t_grid, preset } => {
                e["e_list_V_m"] = json!(e_list);
                e["t_grid"] = json!({ "start": t_grid.start, "end": t_grid.end, "points": t_grid.points });
                e["preset"] = json!({ "amplitude": preset.amplitude, "width": preset.width, "relax": preset.relax });
            }
            Experiment::Fit { input, model } => {
                e["input"] = json!(input.to_string_lossy());
                e["model"] = json!(model.name());
            }
            Experiment::Scurve { points, p_max } => {
                e["points"] = json!(points);
                if let Some(p) = p_max {
                    e["p_max_C_m2"] = json!(p);
                }
            }
            Experiment::NcCheck => {}
        }
        tree
    }
}

pub fn parse_model(s: &str) -> Result<ModelChoice, String> {
    ModelChoice::parse(s).ok_or_else(|| format!("unknown model `{s}` (kai | nls | auto)"))
}
