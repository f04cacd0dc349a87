//! Nelder-Mead downhill simplex minimizer.

#[derive(Debug, Clone)]
pub struct SimplexOptions {
    pub max_evaluations: usize,
    /// Stop when the spread of function values falls below
    /// `f_tol·|f_best| + f_abs`.
    pub f_tol: f64,
    pub f_abs: f64,
    /// Stop when every vertex is within `x_tol` of the best (per coordinate).
    pub x_tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions { max_evaluations: 20_000, f_tol: 1e-14, f_abs: 1e-300, x_tol: 1e-10 }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimize `f` from `x0` with initial simplex edge lengths `step`.
/// Non-finite objective values are treated as +∞.
pub fn minimize<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    step: &[f64],
    options: &SimplexOptions,
) -> SimplexResult {
    let n = x0.len();
    assert_eq!(step.len(), n);
    let mut eval = |x: &[f64], count: &mut usize| {
        *count += 1;
        let v = f(x);
        if v.is_finite() { v } else { f64::INFINITY }
    };
    let mut count = 0;
    let mut verts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    verts.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += step[i];
        verts.push(v);
    }
    let mut vals: Vec<f64> = verts.iter().map(|v| eval(v, &mut count)).collect();
    let mut converged = false;

    while count < options.max_evaluations {
        // Order vertices best → worst.
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        verts = idx.iter().map(|&i| verts[i].clone()).collect();
        vals = idx.iter().map(|&i| vals[i]).collect();

        let spread = vals[n] - vals[0];
        let size = verts[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&verts[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread.is_finite() && spread <= options.f_tol * vals[0].abs() + options.f_abs && size <= options.x_tol {
            converged = true;
            break;
        }
        if size == 0.0 {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; n];
        for v in &verts[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let along = |coef: f64| -> Vec<f64> {
            centroid.iter().zip(&verts[n]).map(|(c, w)| c + coef * (c - w)).collect()
        };

        let reflected = along(1.0);
        let f_r = eval(&reflected, &mut count);
        if f_r < vals[0] {
            let expanded = along(2.0);
            let f_e = eval(&expanded, &mut count);
            if f_e < f_r {
                verts[n] = expanded;
                vals[n] = f_e;
            } else {
                verts[n] = reflected;
                vals[n] = f_r;
            }
            continue;
        }
        if f_r < vals[n - 1] {
            verts[n] = reflected;
            vals[n] = f_r;
            continue;
        }
        let (contracted, f_c) = if f_r < vals[n] {
            let c = along(0.5);
            let fc = eval(&c, &mut count);
            (c, fc)
        } else {
            let c = along(-0.5);
            let fc = eval(&c, &mut count);
            (c, fc)
        };
        if f_c < vals[n].min(f_r) {
            verts[n] = contracted;
            vals[n] = f_c;
            continue;
        }
        // Shrink toward the best vertex.
        for i in 1..=n {
            let shrunk: Vec<f64> = verts[0].iter().zip(&verts[i]).map(|(b, x)| b + 0.5 * (x - b)).collect();
            vals[i] = eval(&shrunk, &mut count);
            verts[i] = shrunk;
        }
    }

    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    SimplexResult { x: verts[best].clone(), f: vals[best], evaluations: count, converged }
}
