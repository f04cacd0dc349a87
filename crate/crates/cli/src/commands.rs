use std::io::BufReader;

use ferrostack::experiments::{
    hysteresis_experiment, log_time_grid, nc_hysteresis_check, reversal_experiment, scurve, switching_time,
    write_reversal_csv, LoopMetrics, NcVerdict,
};
use ferrostack::kinetics::{
    fit_kai, fit_nls, kai_model, model_select, nls_model, read_curves, FitResult, KaiParams, KineticModel,
    MeasuredCurve, NlsParams, DEFAULT_QUADRATURE_POINTS,
};
use ferrostack::lgd::{apply_disorder, PolarizationGrid};
use ferrostack::material::Stack;
use ferrostack::units::{convert_units, Unit};
use serde_json::json;

use crate::config::{Experiment, GridConfig, ModelChoice, RunConfig};
use crate::output::OutputSet;
use crate::CliError;

pub fn execute(cfg: &RunConfig) -> Result<(), CliError> {
    let mut out = OutputSet::create(&cfg.directory, &cfg.runname)?;
    match &cfg.experiment {
        Experiment::Hysteresis { waveform } => {
            let (stack, grid) = setup(cfg)?;
            let r = hysteresis_experiment(&stack, &grid, waveform, cfg.solver.as_ref().expect("solver"))?;
            out.csv("loop", |w| r.curve.write_csv(w))?;
            out.csv("metrics", |w| LoopMetrics::write_csv(r.metrics.as_ref(), w))?;
            out.csv("trace", |w| r.trace.write_csv(w))?;
            match &r.metrics {
                Some(m) => {
                    println!(
                        "P_r = {:+.3} / {:+.3} uC/cm^2   E_C = {:+.4} / {:+.4} MV/cm",
                        charge(m.p_r_pos)?,
                        charge(m.p_r_neg)?,
                        field(m.e_c_pos)?,
                        field(m.e_c_neg)?
                    );
                }
                None => println!("non-switching: polarization never reversed on the final cycle"),
            }
        }
        Experiment::Reversal { e_list, t_grid, preset } => {
            let (stack, grid) = setup(cfg)?;
            let times = log_time_grid(t_grid.start, t_grid.end, t_grid.points)?;
            let curves =
                reversal_experiment(&stack, &grid, e_list, &times, preset, cfg.solver.as_ref().expect("solver"))?;
            out.csv("family", |w| write_reversal_csv(&curves, w))?;
            let rows: Vec<_> = curves
                .iter()
                .map(|c| {
                    let t = |l| switching_time(c, l).unwrap_or(f64::NAN);
                    (c.field, t(0.1), t(0.5), t(0.9), c.delta_p.last().copied().unwrap_or(f64::NAN), c.p_s)
                })
                .collect();
            out.csv("switching", |w| {
                writeln!(w, "field_Vm,t10_s,t50_s,t90_s,delta_p_final_Cm2,p_s_Cm2")?;
                for r in &rows {
                    writeln!(w, "{},{},{},{},{},{}", r.0, r.1, r.2, r.3, r.4, r.5)?;
                }
                Ok(())
            })?;
            println!("{:>12} {:>12}", "E [MV/cm]", "t50 [s]");
            for r in &rows {
                println!("{:>12.4} {:>12.4e}", field(r.0)?, r.2);
            }
        }
        Experiment::Fit { input, model } => {
            let file = std::fs::File::open(input).map_err(|source| CliError::Io { path: input.clone(), source })?;
            let curves = read_curves(BufReader::new(file)).map_err(|e| match e {
                ferrostack::Error::Parse { line, message } => {
                    CliError::Usage(format!("{}: parse error at line {line}: {message}", input.display()))
                }
                other => other.into(),
            })?;
            let fits = curves.iter().map(|c| fit_curve(c, *model)).collect::<Result<Vec<_>, _>>()?;
            write_fits(&mut out, &curves, &fits)?;
            for (c, f) in curves.iter().zip(&fits) {
                let label = c.field.map(|e| field(e).map(|x| format!("E = {x:.4} MV/cm: "))).transpose()?;
                let mut line = label.unwrap_or_default();
                if let Some(k) = &f.kai {
                    line += &format!("KAI tau = {:.4e} s n = {:.3}  ", k.params.tau, k.params.n);
                }
                if let Some(n) = &f.nls {
                    line += &format!(
                        "NLS log10(tau) = {:.3} w = {:.3} n = {:.3}  ",
                        n.params.log_tau_med, n.params.w, n.params.n
                    );
                }
                if let Some(r) = f.variance_ratio {
                    line += &format!("-> {} (s2_NLS/s2_KAI = {r:.3})", f.selected);
                }
                println!("{}", line.trim_end());
            }
        }
        Experiment::Scurve { points, p_max } => {
            let stack = cfg.stack.clone().expect("stack").validate()?;
            let s = scurve(stack.material(), *points, *p_max);
            out.csv("scurve", |w| s.write_csv(w))?;
            match s.nc_region {
                Some((a, b)) => println!("negative-capacitance region: P in [{:.3}, {:.3}] uC/cm^2", charge(a)?, charge(b)?),
                None => println!("no negative-capacitance region"),
            }
        }
        Experiment::NcCheck => {
            let stack = cfg.stack.clone().expect("stack").validate()?;
            let nc = nc_hysteresis_check(&stack);
            out.csv("nc_check", |w| {
                writeln!(w, "verdict,min_dv_dp_Vm2_C,p_at_min_Cm2,t_eff_m")?;
                writeln!(w, "{},{},{},{}", nc.verdict, nc.min_dv_dp, nc.p_at_min, stack.t_eff())
            })?;
            let note = match nc.verdict {
                NcVerdict::NonHysteretic => "series capacitance stabilizes the negative-capacitance branch",
                NcVerdict::Hysteretic => "stack remains hysteretic",
            };
            println!("{} (min dV/dP = {:.4e} V m^2/C): {note}", nc.verdict, nc.min_dv_dp);
        }
    }
    let manifest = json!({
        "tool": "ferrostack",
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg.to_json(),
        "outputs": out.names(),
    });
    out.file("manifest.json", |w| {
        serde_json::to_writer_pretty(&mut *w, &manifest).map_err(std::io::Error::other)?;
        writeln!(w)
    })?;
    out.commit();
    Ok(())
}

fn setup(cfg: &RunConfig) -> Result<(Stack, PolarizationGrid), CliError> {
    let stack = cfg.stack.clone().expect("stack").validate()?;
    let g: &GridConfig = cfg.grid.as_ref().expect("grid");
    let grid = PolarizationGrid::uniform(g.n_cells, g.dx, g.initial_p, g.boundary)?;
    let grid = apply_disorder(&grid, g.seed, g.sigma_rel)?;
    Ok((stack, grid))
}

fn charge(x: f64) -> Result<f64, CliError> {
    Ok(convert_units(x, Unit::CoulombPerM2, Unit::MicroCoulombPerCm2)?)
}

fn field(x: f64) -> Result<f64, CliError> {
    Ok(convert_units(x, Unit::VoltPerM, Unit::MegaVoltPerCm)?)
}

struct CurveFit {
    kai: Option<FitResult<KaiParams>>,
    nls: Option<FitResult<NlsParams>>,
    selected: KineticModel,
    variance_ratio: Option<f64>,
}

fn fit_curve(c: &MeasuredCurve, model: ModelChoice) -> Result<CurveFit, CliError> {
    Ok(match model {
        ModelChoice::Kai => CurveFit {
            kai: Some(fit_kai(&c.times, &c.delta_p)?),
            nls: None,
            selected: KineticModel::Kai,
            variance_ratio: None,
        },
        ModelChoice::Nls => CurveFit {
            kai: None,
            nls: Some(fit_nls(&c.times, &c.delta_p)?),
            selected: KineticModel::Nls,
            variance_ratio: None,
        },
        ModelChoice::Auto => {
            let s = model_select(&c.times, &c.delta_p)?;
            CurveFit { kai: Some(s.kai), nls: Some(s.nls), selected: s.selected, variance_ratio: Some(s.variance_ratio) }
        }
    })
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn write_fits(out: &mut OutputSet, curves: &[MeasuredCurve], fits: &[CurveFit]) -> Result<(), CliError> {
    out.csv("fit_params", |w| {
        writeln!(w, "field_Vm,model,p_s_Cm2,tau_s,n,log10_tau_med_s,w_dec,rss_C2m4,rms_Cm2,selected")?;
        for (c, f) in curves.iter().zip(fits) {
            let e = opt(c.field);
            if let Some(k) = &f.kai {
                let p = &k.params;
                let sel = f.selected == KineticModel::Kai;
                writeln!(w, "{e},KAI,{},{},{},,,{},{},{sel}", p.p_s, p.tau, p.n, k.rss, k.rms)?;
            }
            if let Some(n) = &f.nls {
                let p = &n.params;
                let sel = f.selected == KineticModel::Nls;
                writeln!(w, "{e},NLS,{},,{},{},{},{},{},{sel}", p.p_s, p.n, p.log_tau_med, p.w, n.rss, n.rms)?;
            }
        }
        Ok(())
    })?;
    out.csv("fit_curve", |w| {
        writeln!(w, "field_Vm,t_s,delta_p_Cm2,model_Cm2")?;
        for (c, f) in curves.iter().zip(fits) {
            let e = opt(c.field);
            for (&t, &d) in c.times.iter().zip(&c.delta_p) {
                let m = match (f.selected, &f.kai, &f.nls) {
                    (KineticModel::Kai, Some(k), _) => kai_model(t, &k.params),
                    (KineticModel::Nls, _, Some(n)) => nls_model(t, &n.params, DEFAULT_QUADRATURE_POINTS),
                    _ => f64::NAN,
                };
                writeln!(w, "{e},{t},{d},{m}")?;
            }
        }
        Ok(())
    })?;
    Ok(())
}
