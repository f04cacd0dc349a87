//! Overdamped Landau-Ginzburg-Devonshire dynamics on a 1D lateral chain of
//! ferroelectric columns,
//!
//! ```text
//! ρ ∂P/∂t = −δU/δP = −(2αP + 4βP³ + 6γP⁵ − E_FE) + 2k ∇²P
//! ```
//!
//! integrated with explicit Euler steps. `U` is a Lyapunov functional at
//! fixed voltage, so a step that raises it is rejected and retried with half
//! the time step.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::electrostatics::{displacement_current, ColumnResponse};
use crate::error::{Error, Result};
use crate::material::{FerroMaterial, Stack};
use crate::waveform::SampledWaveform;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    #[default]
    ZeroFlux,
    Periodic,
}

/// Per-cell spontaneous polarization along the stack normal.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizationGrid {
    pub p: Vec<f64>,
    /// Lateral cell pitch [m].
    pub dx: f64,
    /// Per-cell multiplier on `alpha`.
    pub alpha_scale: Vec<f64>,
    pub boundary: Boundary,
}

impl PolarizationGrid {
    pub fn uniform(n: usize, dx: f64, p: f64, boundary: Boundary) -> Result<Self> {
        let grid = PolarizationGrid { p: vec![p; n], dx, alpha_scale: vec![1.0; n], boundary };
        grid.validate()?;
        Ok(grid)
    }

    pub fn from_values(p: Vec<f64>, dx: f64, boundary: Boundary) -> Result<Self> {
        let n = p.len();
        let grid = PolarizationGrid { p, dx, alpha_scale: vec![1.0; n], boundary };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p.is_empty() {
            return Err(Error::invariant("grid.n_cells", "N >= 1", 0));
        }
        if !(self.dx > 0.0 && self.dx.is_finite()) {
            return Err(Error::invariant("grid.dx", "dx > 0", self.dx));
        }
        if self.alpha_scale.len() != self.p.len() {
            return Err(Error::Usage("alpha_scale length differs from cell count".into()));
        }
        if let Some(s) = self.alpha_scale.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(Error::invariant("grid.alpha_scale", "finite and > 0", s));
        }
        if let Some(p) = self.p.iter().find(|p| !p.is_finite()) {
            return Err(Error::invariant("grid.p", "finite", p));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.p.iter().sum::<f64>() / self.p.len() as f64
    }

    /// Same grid with every polarization negated.
    pub fn mirrored(&self) -> Self {
        PolarizationGrid { p: self.p.iter().map(|p| -p).collect(), ..self.clone() }
    }

    fn neighbours(&self, i: usize) -> (f64, f64) {
        let n = self.p.len();
        let left = if i > 0 {
            self.p[i - 1]
        } else if self.boundary == Boundary::Periodic {
            self.p[n - 1]
        } else {
            self.p[i]
        };
        let right = if i + 1 < n {
            self.p[i + 1]
        } else if self.boundary == Boundary::Periodic {
            self.p[0]
        } else {
            self.p[i]
        };
        (left, right)
    }

    /// Three-point Laplacian with the grid's boundary condition (zero flux
    /// uses mirrored ghost cells).
    pub fn laplacian(&self, i: usize) -> f64 {
        let (l, r) = self.neighbours(i);
        (l - 2.0 * self.p[i] + r) / (self.dx * self.dx)
    }

    /// Central-difference gradient of cell `i`.
    pub fn gradient(&self, i: usize) -> f64 {
        let (l, r) = self.neighbours(i);
        (r - l) / (2.0 * self.dx)
    }

    /// `Σ (ΔP/dx)²` over the bonds of the chain: N−1 bonds for zero flux,
    /// N for periodic (none for a single cell).
    fn bond_gradient_sum(&self) -> f64 {
        let n = self.p.len();
        let inv = 1.0 / (self.dx * self.dx);
        let mut s: f64 = self.p.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).sum();
        if self.boundary == Boundary::Periodic && n > 1 {
            let d = self.p[0] - self.p[n - 1];
            s += d * d;
        }
        s * inv
    }
}

/// Multiply each cell's `alpha` by a log-normal factor of mean 1 and
/// relative standard deviation `sigma_rel`, drawn from a ChaCha8 stream
/// seeded with `seed`.
pub fn apply_disorder(grid: &PolarizationGrid, seed: u64, sigma_rel: f64) -> Result<PolarizationGrid> {
    if !(sigma_rel >= 0.0 && sigma_rel.is_finite()) {
        return Err(Error::invariant("disorder.sigma_rel", "sigma_rel >= 0", sigma_rel));
    }
    if sigma_rel == 0.0 {
        return Ok(grid.clone());
    }
    let sigma_ln = (1.0 + sigma_rel * sigma_rel).ln().sqrt();
    let dist = LogNormal::new(-0.5 * sigma_ln * sigma_ln, sigma_ln)
        .map_err(|e| Error::Usage(format!("disorder distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = grid.clone();
    for s in out.alpha_scale.iter_mut() {
        *s *= dist.sample(&mut rng);
    }
    Ok(out)
}

/// Free-energy density of a single cell [J/m³],
/// `αP² + βP⁴ + γP⁶ − ε₀ε_F·E²/2 − E·P + k·|∇P|²`.
pub fn free_energy_density(mat: &FerroMaterial, p: f64, e_fe: f64, grad_p: f64) -> f64 {
    mat.landau_energy(p, 1.0) - 0.5 * crate::units::EPSILON_0 * mat.eps_f * e_fe * e_fe - e_fe * p
        + mat.k * grad_p * grad_p
}

/// Precomputed coefficients shared by the energy and derivative routines.
#[derive(Debug, Clone, Copy)]
struct Model {
    mat: FerroMaterial,
    column: ColumnResponse,
    /// Electrode area of one cell [m²].
    cell_area: f64,
}

impl Model {
    fn new(stack: &Stack, n: usize) -> Self {
        Model { mat: *stack.material(), column: ColumnResponse::new(stack), cell_area: stack.area / n as f64 }
    }

    /// Total thermodynamic potential of the stack at voltage `v` [J].
    fn energy(&self, grid: &PolarizationGrid, v: f64) -> f64 {
        let t_f = self.mat.t_f;
        let mut local = 0.0;
        for (&p, &s) in grid.p.iter().zip(&grid.alpha_scale) {
            local += t_f * self.mat.landau_energy(p, s) + self.column.electrostatic_energy(p, v);
        }
        self.cell_area * (local + t_f * self.mat.k * grid.bond_gradient_sum())
    }

    fn derivative(&self, grid: &PolarizationGrid, v: f64, out: &mut [f64]) {
        let two_k = 2.0 * self.mat.k;
        for (i, d) in out.iter_mut().enumerate() {
            let p = grid.p[i];
            let e = self.column.e_fe(p, v);
            *d = self.mat.landau_field(p, grid.alpha_scale[i]) - e - two_k * grid.laplacian(i);
        }
    }

    /// Largest local stiffness `∂²U/∂P_i²` per unit volume and its cell.
    fn stiffest_cell(&self, grid: &PolarizationGrid) -> (usize, f64) {
        let wall = if grid.len() > 1 { 4.0 * self.mat.k / (grid.dx * grid.dx) } else { 0.0 };
        grid.p
            .iter()
            .zip(&grid.alpha_scale)
            .map(|(&p, &s)| self.mat.landau_stiffness(p, s) + self.column.polarization_gain + wall)
            .enumerate()
            .fold((0, f64::MIN), |best, (i, c)| if c > best.1 { (i, c) } else { best })
    }
}

/// Variational derivative `δU/δP` per cell for given ferroelectric fields
/// [V/m]: `2α_iP + 4βP³ + 6γP⁵ − E_FE,i − 2k·∇²P_i`.
pub fn variational_derivative(mat: &FerroMaterial, grid: &PolarizationGrid, e_fe: &[f64]) -> Vec<f64> {
    assert_eq!(e_fe.len(), grid.len(), "one field per cell");
    (0..grid.len())
        .map(|i| {
            mat.landau_field(grid.p[i], grid.alpha_scale[i]) - e_fe[i] - 2.0 * mat.k * grid.laplacian(i)
        })
        .collect()
}

/// Self-consistent fields of every cell at voltage `v`.
pub fn cell_fields(stack: &Stack, grid: &PolarizationGrid, v: f64) -> Vec<f64> {
    let column = ColumnResponse::new(stack);
    grid.p.iter().map(|&p| column.e_fe(p, v)).collect()
}

/// Total thermodynamic potential `U` [J] of the stack at voltage `v`.
///
/// For ideal electrodes this is the volume integral of
/// [`free_energy_density`]; series layers add `−t_eff·D²/(2ε₀)` per area.
pub fn total_energy(stack: &Stack, grid: &PolarizationGrid, v: f64) -> f64 {
    Model::new(stack, grid.len()).energy(grid, v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Initial time step [s].
    pub dt0: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Relative energy increase above which a step is rejected.
    pub energy_tolerance: f64,
    pub max_steps: usize,
    /// Record one trace row every `record_stride` waveform samples.
    pub record_stride: usize,
}

impl SolverOptions {
    /// Defaults scaled to the material's Landau relaxation time `ρ/(2|α|)`.
    pub fn for_material(mat: &FerroMaterial) -> Self {
        let tau = mat.rho / (2.0 * mat.alpha.abs());
        let dt_max = 0.05 * tau;
        SolverOptions {
            dt0: dt_max,
            dt_min: 1e-8 * dt_max,
            dt_max,
            energy_tolerance: 1e-9,
            max_steps: 200_000_000,
            record_stride: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt0 && self.dt0 <= self.dt_max && self.dt_max.is_finite()) {
            return Err(Error::Usage(format!(
                "solver requires 0 < dt_min <= dt0 <= dt_max (got {:e}, {:e}, {:e})",
                self.dt_min, self.dt0, self.dt_max
            )));
        }
        if !(self.energy_tolerance >= 0.0) {
            return Err(Error::invariant("solver.energy_tolerance", "energy_tolerance >= 0", self.energy_tolerance));
        }
        if self.record_stride == 0 {
            return Err(Error::invariant("solver.record_stride", "record_stride >= 1", 0));
        }
        Ok(())
    }
}

/// Outcome of one accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcceptedStep {
    pub dt: f64,
    pub energy_before: f64,
    pub energy_after: f64,
    /// Steps rejected before this one was accepted.
    pub rejections: usize,
}

const DT_GROWTH: f64 = 1.2;

/// A running simulation: grid state, clock and step-size controller.
#[derive(Debug, Clone)]
pub struct Simulation {
    model: Model,
    grid: PolarizationGrid,
    candidate: PolarizationGrid,
    derivative: Vec<f64>,
    options: SolverOptions,
    time: f64,
    dt: f64,
    steps: usize,
}

impl Simulation {
    pub fn new(stack: &Stack, grid: PolarizationGrid, options: SolverOptions) -> Result<Self> {
        grid.validate()?;
        options.validate()?;
        let n = grid.len();
        Ok(Simulation {
            model: Model::new(stack, n),
            candidate: grid.clone(),
            grid,
            derivative: vec![0.0; n],
            dt: options.dt0,
            options,
            time: 0.0,
            steps: 0,
        })
    }

    pub fn grid(&self) -> &PolarizationGrid {
        &self.grid
    }

    pub fn into_grid(self) -> PolarizationGrid {
        self.grid
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn energy(&self, v: f64) -> f64 {
        self.model.energy(&self.grid, v)
    }

    pub fn mean_field(&self, v: f64) -> f64 {
        let c = &self.model.column;
        self.grid.p.iter().map(|&p| c.e_fe(p, v)).sum::<f64>() / self.grid.len() as f64
    }

    pub fn mean_displacement(&self, v: f64) -> f64 {
        let c = &self.model.column;
        self.grid.p.iter().map(|&p| c.displacement(p, c.e_fe(p, v))).sum::<f64>() / self.grid.len() as f64
    }

    /// Take one accepted explicit step at constant voltage `v`, no longer
    /// than `max_dt`. Rejected trial steps halve the controller's step.
    pub fn step(&mut self, v: f64, max_dt: f64) -> Result<AcceptedStep> {
        let energy_before = self.model.energy(&self.grid, v);
        self.model.derivative(&self.grid, v, &mut self.derivative);
        let inv_rho = 1.0 / self.model.mat.rho;
        let mut rejections = 0;
        loop {
            let clipped = max_dt < self.dt;
            let dt = if clipped { max_dt } else { self.dt };
            let scale = dt * inv_rho;
            for ((c, &p), &d) in self.candidate.p.iter_mut().zip(&self.grid.p).zip(&self.derivative) {
                *c = p - scale * d;
            }
            let energy_after = self.model.energy(&self.candidate, v);
            let allowed = self.options.energy_tolerance * energy_before.abs().max(energy_after.abs());
            if energy_after - energy_before <= allowed {
                std::mem::swap(&mut self.grid, &mut self.candidate);
                self.time += dt;
                self.steps += 1;
                if !clipped {
                    self.dt = (self.dt * DT_GROWTH).min(self.options.dt_max);
                }
                return Ok(AcceptedStep { dt, energy_before, energy_after, rejections });
            }
            rejections += 1;
            self.dt = 0.5 * dt;
            if self.dt < self.options.dt_min {
                let (cell, curvature) = self.model.stiffest_cell(&self.grid);
                return Err(Error::Stiff { time: self.time, cell, curvature });
            }
        }
    }

    /// Integrate to `t_end` with the voltage given as a function of time; the
    /// voltage of each step is taken at the step's end.
    pub fn advance_to(&mut self, t_end: f64, voltage: impl Fn(f64) -> f64) -> Result<()> {
        // Relative slack absorbs round-off in the accumulated clock.
        let slack = 1e-12 * t_end.abs();
        while t_end - self.time > slack {
            if self.steps >= self.options.max_steps {
                return Err(Error::StepLimit { steps: self.steps, time: self.time });
            }
            let remaining = t_end - self.time;
            let dt_try = self.dt.min(remaining);
            let v = voltage(self.time + dt_try);
            self.step(v, remaining)?;
        }
        self.time = t_end;
        Ok(())
    }
}

/// Recorded time series of a transient run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub t: Vec<f64>,
    pub v: Vec<f64>,
    /// Grid-mean ferroelectric field [V/m].
    pub e_fe: Vec<f64>,
    pub p_mean: Vec<f64>,
    pub d_mean: Vec<f64>,
    /// Device current [A].
    pub i: Vec<f64>,
    /// Total thermodynamic potential [J].
    pub u_total: Vec<f64>,
}

pub const TRACE_HEADER: &str = "t_s,v_V,e_fe_Vm,p_mean_Cm2,d_mean_Cm2,i_A,u_J";

impl Trace {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    fn push(&mut self, sim: &Simulation, t: f64, v: f64) {
        self.t.push(t);
        self.v.push(v);
        self.e_fe.push(sim.mean_field(v));
        self.p_mean.push(sim.grid.mean());
        self.d_mean.push(sim.mean_displacement(v));
        self.u_total.push(sim.energy(v));
    }

    /// Uniform record interval [s].
    pub fn record_interval(&self) -> f64 {
        if self.t.len() < 2 {
            0.0
        } else {
            self.t[1] - self.t[0]
        }
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{TRACE_HEADER}")?;
        for k in 0..self.len() {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                self.t[k], self.v[k], self.e_fe[k], self.p_mean[k], self.d_mean[k], self.i[k], self.u_total[k]
            )?;
        }
        Ok(())
    }
}

/// Run the grid through a sampled voltage program. The solver lands exactly
/// on every waveform sample and records every `record_stride` samples.
pub fn run_transient(
    stack: &Stack,
    grid: &PolarizationGrid,
    waveform: &SampledWaveform,
    options: &SolverOptions,
) -> Result<(Trace, PolarizationGrid)> {
    if waveform.is_empty() {
        return Err(Error::Usage("empty waveform".into()));
    }
    let mut sim = Simulation::new(stack, grid.clone(), *options)?;
    let stride = options.record_stride;
    let mut trace = Trace::default();
    trace.push(&sim, 0.0, waveform.values[0]);
    for k in 1..waveform.len() {
        let t_k = waveform.time(k);
        sim.advance_to(t_k, |t| waveform.at(t))?;
        if k % stride == 0 {
            trace.push(&sim, t_k, waveform.values[k]);
        }
    }
    trace.i = if trace.len() >= 2 {
        displacement_current(&trace.d_mean, trace.record_interval(), stack.area)?
    } else {
        vec![0.0; trace.len()]
    };
    Ok((trace, sim.into_grid()))
}
