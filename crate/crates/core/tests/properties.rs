use ferrostack::electrostatics::{depolarization_field, solve_fields};
use ferrostack::kinetics::{kai_model, nls_curve, KaiParams, NlsParams};
use ferrostack::lgd::{
    cell_fields, total_energy, variational_derivative, Boundary, PolarizationGrid, Simulation,
    SolverOptions,
};
use ferrostack::material::{calibrate_landau, FerroMaterial, StackConfig};
use ferrostack::units::{convert_units, Unit};
use proptest::prelude::*;

fn stack_strategy() -> impl Strategy<Value = (f64, f64, f64, f64, f64)> {
    // (eps_f, t_f, eps_d, t_d, screening length)
    (5.0..60.0f64, 3e-9..30e-9f64, 1.0..80.0f64, 0.0..5e-9f64, 0.0..0.5e-9f64)
}

fn build(eps_f: f64, t_f: f64, eps_d: f64, t_d: f64, lambda: f64) -> ferrostack::material::Stack {
    let m = FerroMaterial::from_targets(0.25, 1e8, 1e-10, 1.0, eps_f, t_f).unwrap();
    let mut cfg = StackConfig::mfm(m, 1e-12);
    if t_d > 0.0 {
        cfg = cfg.with_dielectric(eps_d, t_d);
    }
    if lambda > 0.0 {
        cfg = cfg.with_electrode_screening(8.0, lambda);
    }
    cfg.validate().unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

proptest! {
    #[test]
    fn calibration_reproduces_targets(p_r in 0.01..1.0f64, e_c in 1e6..1e9f64) {
        let (alpha, beta) = calibrate_landau(p_r, e_c).unwrap();
        let p0 = (-alpha / (2.0 * beta)).sqrt();
        prop_assert!(rel(p0, p_r) < 1e-12);
        let m = FerroMaterial::from_targets(p_r, e_c, 0.0, 1.0, 30.0, 1e-8).unwrap();
        let fold = (alpha.abs() / (6.0 * beta)).sqrt();
        prop_assert!(rel(m.landau_field(fold, 1.0), -e_c) < 1e-12);
    }

    #[test]
    fn landau_energy_even_and_bounded(p in -2.0..2.0f64, p_r in 0.05..0.5f64) {
        let m = FerroMaterial::from_targets(p_r, 1e8, 0.0, 1.0, 30.0, 1e-8).unwrap();
        let a = m.landau_energy(p, 1.0);
        let b = m.landau_energy(-p, 1.0);
        prop_assert_eq!(a, b);
        let floor = m.landau_energy(p_r, 1.0);
        prop_assert!(a >= floor * (1.0 + 1e-12));
    }

    #[test]
    fn unit_round_trips(x in -1e20..1e20f64, pick in 0usize..4) {
        let pairs = [
            (Unit::MicroCoulombPerCm2, Unit::ChargesPerCm2),
            (Unit::CoulombPerM2, Unit::MicroCoulombPerCm2),
            (Unit::MegaVoltPerCm, Unit::VoltPerM),
            (Unit::Nanometer, Unit::Meter),
        ];
        let (a, b) = pairs[pick];
        let back = convert_units(convert_units(x, a, b).unwrap(), b, a).unwrap();
        prop_assert!(rel(back, x) <= 1e-15 || x == 0.0);
    }

    #[test]
    fn field_solution_balances((eps_f, t_f, eps_d, t_d, lam) in stack_strategy(),
                               p in -0.5..0.5f64, v in -10.0..10.0f64) {
        let s = build(eps_f, t_f, eps_d, t_d, lam);
        let sol = solve_fields(&s, p, v);
        let layers = s.series_layers();
        let drop: f64 = sol.e_fe * t_f + layers.iter().zip(&sol.e_d).map(|(l, e)| l.t_d * e).sum::<f64>();
        let scale = v.abs() + sol.e_fe.abs() * t_f;
        prop_assert!((drop - v).abs() <= 1e-12 * scale);
        for (l, e) in layers.iter().zip(&sol.e_d) {
            let d_layer = ferrostack::units::EPSILON_0 * l.eps_d * e;
            prop_assert!(rel(d_layer, sol.d) < 1e-12);
        }
        let d_fe = ferrostack::units::EPSILON_0 * eps_f * sol.e_fe + p;
        prop_assert!((d_fe - sol.d).abs() <= 1e-12 * (p.abs() + sol.d.abs()));
    }

    #[test]
    fn field_is_affine((eps_f, t_f, eps_d, t_d, lam) in stack_strategy(),
                       p1 in -0.5..0.5f64, p2 in -0.5..0.5f64, v1 in -5.0..5.0f64, v2 in -5.0..5.0f64) {
        let s = build(eps_f, t_f, eps_d, t_d, lam);
        let e = |p, v| solve_fields(&s, p, v).e_fe;
        let lhs = e(p1 + p2, v1 + v2);
        let rhs = e(p1, v1) + e(p2, v2);
        let scale = e(p1, v1).abs() + e(p2, v2).abs() + 1.0;
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
        prop_assert_eq!(e(0.0, 0.0), 0.0);
    }

    #[test]
    fn depolarization_monotone(eps_f in 5.0..60.0f64, t_f in 3e-9..30e-9f64, eps_d in 1.0..80.0f64,
                               t_d in 0.1e-9..5e-9f64, grow in 1.0..3.0f64, p in 0.01..0.5f64) {
        let base = depolarization_field(&build(eps_f, t_f, eps_d, t_d, 0.0), p).abs();
        let thicker = depolarization_field(&build(eps_f, t_f, eps_d, t_d * grow, 0.0), p).abs();
        let stiffer = depolarization_field(&build(eps_f, t_f, eps_d * grow, t_d, 0.0), p).abs();
        prop_assert!(thicker >= base * (1.0 - 1e-15));
        prop_assert!(stiffer <= base * (1.0 + 1e-15));
    }

    #[test]
    fn forward_models_monotone_bounded(p_s in 0.01..0.5f64, log_tau in -9.0..-3.0f64, n in 0.3..4.0f64, w in 0.0..3.0f64) {
        let t: Vec<f64> = (0..200).map(|i| 10f64.powf(-12.0 + 12.0 * i as f64 / 199.0)).collect();
        let kai = KaiParams { p_s, tau: 10f64.powf(log_tau), n };
        let nls = NlsParams { p_s, n, log_tau_med: log_tau, w };
        let a: Vec<f64> = t.iter().map(|&x| kai_model(x, &kai)).collect();
        let b = nls_curve(&t, &nls, 129);
        for y in [&a, &b] {
            prop_assert!(y.windows(2).all(|w| w[1] >= w[0]));
            prop_assert!(y.iter().all(|&v| (0.0..=2.0 * p_s * (1.0 + 1e-12)).contains(&v)));
        }
    }
}

fn random_grid(values: Vec<f64>, boundary: Boundary) -> PolarizationGrid {
    PolarizationGrid::from_values(values, 2e-9, boundary).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gradient_matches_energy_differences(values in prop::collection::vec(-0.4..0.4f64, 2..12),
                                           v in -3.0..3.0f64, periodic in any::<bool>()) {
        let s = build(30.0, 10e-9, 4.0, 1e-9, 0.0);
        let boundary = if periodic { Boundary::Periodic } else { Boundary::ZeroFlux };
        let grid = random_grid(values, boundary);
        let m = s.material();
        let e = cell_fields(&s, &grid, v);
        let g = variational_derivative(m, &grid, &e);
        let cell_area = s.area / grid.len() as f64;
        for i in 0..grid.len() {
            let h = 1e-6;
            let mut up = grid.clone();
            up.p[i] += h;
            let mut dn = grid.clone();
            dn.p[i] -= h;
            let fd = (total_energy(&s, &up, v) - total_energy(&s, &dn, v)) / (2.0 * h);
            let analytic = g[i] * cell_area * m.t_f;
            let scale = analytic.abs().max(1e-3 * m.alpha.abs() * 0.25 * cell_area * m.t_f);
            prop_assert!((fd - analytic).abs() / scale < 1e-6, "cell {} fd {} analytic {}", i, fd, analytic);
        }
    }

    #[test]
    fn accepted_steps_never_raise_energy(values in prop::collection::vec(-0.4..0.4f64, 1..8), v in -3.0..3.0f64) {
        let s = build(30.0, 10e-9, 4.0, 0.5e-9, 0.0);
        let grid = random_grid(values, Boundary::ZeroFlux);
        let mut sim = Simulation::new(&s, grid, SolverOptions::for_material(s.material())).unwrap();
        for _ in 0..200 {
            let st = sim.step(v, f64::INFINITY).unwrap();
            let tol = 1e-9 * st.energy_before.abs().max(st.energy_after.abs());
            prop_assert!(st.energy_after <= st.energy_before + tol);
        }
    }
}

#[test]
fn antiparallel_pair_costs_wall_energy() {
    let s = build(30.0, 10e-9, 1.0, 0.0, 0.0);
    let p0 = s.material().spontaneous_polarization(1.0).unwrap();
    let uniform = random_grid(vec![p0, p0], Boundary::ZeroFlux);
    let split = random_grid(vec![p0, -p0], Boundary::ZeroFlux);
    assert!(total_energy(&s, &split, 0.0) > total_energy(&s, &uniform, 0.0));
}

#[test]
fn dielectric_never_enhances_polarization() {
    // Relax at V = 0 from the bulk spontaneous state; |P| can only shrink.
    for (eps_d, t_d) in [(4.0, 0.05e-9), (25.0, 0.5e-9), (4.0, 1e-9), (80.0, 3e-9)] {
        let s = build(30.0, 10e-9, eps_d, t_d, 0.0);
        let p0 = s.material().spontaneous_polarization(1.0).unwrap();
        let grid = random_grid(vec![p0; 4], Boundary::ZeroFlux);
        let mut sim = Simulation::new(&s, grid, SolverOptions::for_material(s.material())).unwrap();
        sim.advance_to(2e-7, |_| 0.0).unwrap();
        for &p in &sim.grid().p {
            assert!(p.abs() < p0, "eps_d {eps_d} t_d {t_d}: {p} vs {p0}");
        }
    }
}
