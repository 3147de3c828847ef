//! Nelder–Mead minimizer with standard coefficients.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexSettings {
    /// Initial edge length along each coordinate.
    pub initial_step: f64,
    pub max_iter: usize,
    /// Stop once the best value drops below this.
    pub target: f64,
    /// Stop once the simplex diameter drops below this.
    pub x_tol: f64,
    /// Stop once the spread of values drops below this.
    pub f_tol: f64,
}

impl Default for SimplexSettings {
    fn default() -> Self {
        Self { initial_step: 0.02, max_iter: 500, target: 0.0, x_tol: 1e-13, f_tol: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

pub fn minimize(
    mut f: impl FnMut(&[f64]) -> f64,
    start: &[f64],
    settings: &SimplexSettings,
) -> SimplexResult {
    let n = start.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut points: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    points.push(start.to_vec());
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += settings.initial_step;
        points.push(p);
    }
    let mut values: Vec<f64> = points.iter().map(|p| eval(p)).collect();

    let mut iterations = 0;
    loop {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        points = order.iter().map(|&i| points[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let diameter = points[1..]
            .iter()
            .map(|p| p.iter().zip(&points[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if values[0] <= settings.target
            || diameter <= settings.x_tol
            || values[n] - values[0] <= settings.f_tol
            || iterations >= settings.max_iter
        {
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for p in &points[..n] {
            for (c, x) in centroid.iter_mut().zip(p) {
                *c += x / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&points[n]).map(|(c, w)| c + t * (c - w)).collect()
        };

        let reflected = along(REFLECT);
        let fr = eval(&reflected);
        if fr < values[0] {
            let expanded = along(REFLECT * EXPAND);
            let fe = eval(&expanded);
            if fe < fr {
                points[n] = expanded;
                values[n] = fe;
            } else {
                points[n] = reflected;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            points[n] = reflected;
            values[n] = fr;
            continue;
        }
        let contracted = if fr < values[n] { along(REFLECT * CONTRACT) } else { along(-CONTRACT) };
        let fc = eval(&contracted);
        if fc < values[n].min(fr) {
            points[n] = contracted;
            values[n] = fc;
            continue;
        }
        let best = points[0].clone();
        for i in 1..=n {
            for (x, b) in points[i].iter_mut().zip(&best) {
                *x = b + SHRINK * (*x - b);
            }
            values[i] = eval(&points[i]);
        }
    }
    SimplexResult { x: points.swap_remove(0), value: values[0], iterations, evaluations }
}
