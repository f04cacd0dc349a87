use ferrostack::experiments::{
    hysteresis_experiment, log_time_grid, loop_program, reversal_experiment, Preset,
};
use ferrostack::lgd::{Boundary, PolarizationGrid, SolverOptions};
use ferrostack::material::{FerroMaterial, Stack, StackConfig};

fn material() -> FerroMaterial {
    FerroMaterial::from_targets(0.25, 1e8, 1e-10, 1.0, 30.0, 10e-9).unwrap()
}

fn mfm() -> Stack {
    StackConfig::mfm(material(), 1e-12).validate().unwrap()
}

fn one_cell(p: f64) -> PolarizationGrid {
    PolarizationGrid::uniform(1, 2e-9, p, Boundary::ZeroFlux).unwrap()
}

#[test]
fn negated_program_negates_metrics() {
    let s = mfm();
    let opts = SolverOptions::for_material(s.material());
    let spec = loop_program(2.0, 2e-6, 2, 400);
    let grid = PolarizationGrid::from_values(vec![-0.25, -0.2, -0.24], 2e-9, Boundary::ZeroFlux).unwrap();
    let a = hysteresis_experiment(&s, &grid, &spec, &opts).unwrap().metrics.unwrap();
    let b = hysteresis_experiment(&s, &grid.mirrored(), &spec.negated(), &opts).unwrap().metrics.unwrap();
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-10 * x.abs().max(y.abs());
    assert!(close(a.p_r_pos, -b.p_r_neg) && close(a.p_r_neg, -b.p_r_pos), "{a:?} {b:?}");
    assert!(close(a.e_c_pos, -b.e_c_neg) && close(a.e_c_neg, -b.e_c_pos), "{a:?} {b:?}");
    assert!(close(a.loop_area, b.loop_area));
}

#[test]
fn loop_area_is_dissipated_energy() {
    let s = mfm();
    let m = *s.material();
    let opts = SolverOptions::for_material(&m);
    let (period, samples) = (2e-6, 2000);
    let spec = loop_program(2.0, period, 2, samples);
    let r = hysteresis_experiment(&s, &one_cell(-0.25), &spec, &opts).unwrap();
    let metrics = r.metrics.unwrap();
    assert!(metrics.loop_area > 0.0);

    let dt = period / samples as f64;
    let k0 = r.trace.len() - 1 - samples;
    let tr = &r.trace;
    let work: f64 = (k0..k0 + samples)
        .map(|k| 0.5 * dt * (tr.v[k] * tr.i[k] + tr.v[k + 1] * tr.i[k + 1]))
        .sum();
    let stored = tr.u_total[k0 + samples] - tr.u_total[k0];
    let dissipated = work - stored;
    let expected = metrics.loop_area * m.t_f * s.area;
    assert!((dissipated / expected - 1.0).abs() < 0.01, "{dissipated:e} vs {expected:e}");
}

#[test]
fn slower_sweeps_lower_coercive_field() {
    let s = mfm();
    let opts = SolverOptions::for_material(s.material());
    let e_c: Vec<f64> = [0.5e-6, 2e-6, 8e-6]
        .iter()
        .map(|&period| {
            let spec = loop_program(2.0, period, 2, 800);
            let m = hysteresis_experiment(&s, &one_cell(-0.25), &spec, &opts).unwrap().metrics.unwrap();
            m.coercive_half_width()
        })
        .collect();
    assert!(e_c.windows(2).all(|w| w[1] <= w[0]), "{e_c:?}");
    assert!(e_c[2] > 1e8 && e_c[2] < 1.05e8, "{e_c:?}");
    // Converging: successive gaps shrink.
    assert!(e_c[1] - e_c[2] < e_c[0] - e_c[1]);
}

#[test]
fn sub_coercive_sweep_is_flagged() {
    let s = mfm();
    let opts = SolverOptions::for_material(s.material());
    let mut spec = loop_program(0.5, 2e-6, 2, 400);
    // Preset stays below threshold as well.
    spec.segments.remove(0);
    let r = hysteresis_experiment(&s, &one_cell(-0.25), &spec, &opts).unwrap();
    assert!(r.metrics.is_none());
    assert!(!r.curve.e.is_empty());
}

#[test]
fn reversal_curves_are_monotone() {
    let s = mfm();
    let opts = SolverOptions::for_material(s.material());
    let t = log_time_grid(1e-9, 1e-6, 25).unwrap();
    let preset = Preset { amplitude: -3.0, width: 20e-9, relax: 20e-9 };
    let grid = ferrostack::lgd::apply_disorder(
        &PolarizationGrid::uniform(16, 2e-9, -0.25, Boundary::ZeroFlux).unwrap(),
        3,
        0.2,
    )
    .unwrap();
    let curves = reversal_experiment(&s, &grid, &[0.0, 1.2e8, 1.6e8], &t, &preset, &opts).unwrap();
    assert!(curves[0].delta_p.iter().all(|d| d.abs() < 1e-6), "{:?}", curves[0].delta_p);
    for c in &curves[1..] {
        assert!(c.delta_p.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{:?}", c.delta_p);
        assert!(*c.delta_p.last().unwrap() > 0.4);
    }
}

#[test]
fn reversal_rejects_bad_inputs() {
    let s = mfm();
    let opts = SolverOptions::for_material(s.material());
    let t = log_time_grid(1e-9, 1e-6, 5).unwrap();
    let preset = Preset { amplitude: -3.0, width: 20e-9, relax: 0.0 };
    let g = one_cell(-0.25);
    assert!(reversal_experiment(&s, &g, &[], &t, &preset, &opts).is_err());
    assert!(reversal_experiment(&s, &g, &[-1e8], &t, &preset, &opts).is_err());
    let up = Preset { amplitude: 3.0, ..preset };
    assert!(reversal_experiment(&s, &g, &[1e8], &t, &up, &opts).is_err());
}
