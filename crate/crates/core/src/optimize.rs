//! Local minimizers used by the constant estimator.
//!
//! Both work on plain `&[f64] -> f64` objectives, treat non-finite values as
//! infeasible, and stop after a fixed number of objective evaluations.

#[derive(Debug, Clone)]
pub struct LocalResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub iterations: usize,
    /// Number of times the simplex collapsed and was rebuilt around the best point.
    pub restarts: usize,
}

/// Counts evaluations and remembers the best point seen, so the budget is
/// honored exactly and nothing found along the way is lost.
struct Tracked<F> {
    f: F,
    budget: usize,
    used: usize,
    best_x: Vec<f64>,
    best: f64,
}

impl<F: FnMut(&[f64]) -> f64> Tracked<F> {
    fn new(f: F, budget: usize, x0: &[f64]) -> Self {
        Tracked { f, budget, used: 0, best_x: x0.to_vec(), best: f64::INFINITY }
    }

    fn exhausted(&self) -> bool {
        self.used >= self.budget
    }

    fn eval(&mut self, x: &[f64]) -> f64 {
        self.used += 1;
        let v = (self.f)(x);
        let v = if v.is_finite() { v } else { f64::INFINITY };
        if v < self.best {
            self.best = v;
            self.best_x.copy_from_slice(x);
        }
        v
    }
}

#[derive(Debug, Clone)]
pub struct NelderMead {
    /// Edge length of the initial (and every rebuilt) simplex.
    pub initial_step: f64,
    /// Rebuild when the spread of simplex values falls below this.
    pub value_tol: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub rho: f64,
    pub sigma: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead { initial_step: 0.1, value_tol: 1e-10, alpha: 1.0, gamma: 2.0, rho: 0.5, sigma: 0.5 }
    }
}

impl NelderMead {
    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, f: F, x0: &[f64], budget: usize) -> LocalResult {
        let d = x0.len();
        let mut t = Tracked::new(f, budget, x0);
        let mut iterations = 0;
        let mut restarts: usize = 0;
        let mut step = self.initial_step;
        let mut center = x0.to_vec();

        'outer: while !t.exhausted() {
            let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
            simplex.push(center.clone());
            for i in 0..d {
                let mut v = center.clone();
                v[i] += step;
                simplex.push(v);
            }
            let mut values = Vec::with_capacity(d + 1);
            for v in &simplex {
                if t.exhausted() {
                    break 'outer;
                }
                values.push(t.eval(v));
            }

            loop {
                if t.exhausted() {
                    break 'outer;
                }
                iterations += 1;
                let mut order: Vec<usize> = (0..=d).collect();
                order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
                let (best, worst, second) = (order[0], order[d], order[d - 1]);
                let spread = values[worst] - values[best];
                let size = simplex
                    .iter()
                    .map(|v| v.iter().zip(&simplex[best]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                    .fold(0.0, f64::max);
                if (spread.is_finite() && spread <= self.value_tol * (1.0 + values[best].abs())) || size < 1e-12 {
                    break;
                }

                let mut centroid = vec![0.0; d];
                for &i in &order[..d] {
                    for (c, x) in centroid.iter_mut().zip(&simplex[i]) {
                        *c += x / d as f64;
                    }
                }
                let along = |coef: f64| -> Vec<f64> {
                    centroid
                        .iter()
                        .zip(&simplex[worst])
                        .map(|(c, w)| c + coef * (c - w))
                        .collect()
                };

                let xr = along(self.alpha);
                let fr = t.eval(&xr);
                if fr < values[best] {
                    if t.exhausted() {
                        simplex[worst] = xr;
                        values[worst] = fr;
                        continue;
                    }
                    let xe = along(self.alpha * self.gamma);
                    let fe = t.eval(&xe);
                    if fe < fr {
                        simplex[worst] = xe;
                        values[worst] = fe;
                    } else {
                        simplex[worst] = xr;
                        values[worst] = fr;
                    }
                } else if fr < values[second] {
                    simplex[worst] = xr;
                    values[worst] = fr;
                } else {
                    if t.exhausted() {
                        continue;
                    }
                    let (xc, fc) = if fr < values[worst] {
                        let xc = along(self.alpha * self.rho);
                        let fc = t.eval(&xc);
                        (xc, fc)
                    } else {
                        let xc = along(-self.rho);
                        let fc = t.eval(&xc);
                        (xc, fc)
                    };
                    if fc < values[worst].min(fr) {
                        simplex[worst] = xc;
                        values[worst] = fc;
                    } else {
                        let anchor = simplex[best].clone();
                        for i in 0..=d {
                            if i == best {
                                continue;
                            }
                            for (x, a) in simplex[i].iter_mut().zip(&anchor) {
                                *x = a + self.sigma * (*x - a);
                            }
                            if t.exhausted() {
                                break 'outer;
                            }
                            values[i] = t.eval(&simplex[i]);
                        }
                    }
                }
            }
            restarts += 1;
            center = t.best_x.clone();
            step *= 0.5;
            if step < 1e-8 {
                step = self.initial_step;
            }
        }
        LocalResult {
            x: t.best_x,
            value: t.best,
            evaluations: t.used,
            iterations,
            restarts: restarts.saturating_sub(1),
        }
    }
}

/// Steepest descent with central-difference gradients and backtracking.
#[derive(Debug, Clone)]
pub struct GradientDescent {
    pub fd_step: f64,
    pub initial_rate: f64,
    pub shrink: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
}

impl Default for GradientDescent {
    fn default() -> Self {
        GradientDescent { fd_step: 1e-6, initial_rate: 0.1, shrink: 0.5, armijo: 1e-4 }
    }
}

impl GradientDescent {
    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, f: F, x0: &[f64], budget: usize) -> LocalResult {
        let d = x0.len();
        let mut t = Tracked::new(f, budget, x0);
        let mut x = x0.to_vec();
        let mut fx = t.eval(&x);
        let mut iterations = 0;
        let mut rate = self.initial_rate;
        while t.used + 2 * d < budget && fx.is_finite() {
            iterations += 1;
            let mut g = vec![0.0; d];
            let mut probe = x.clone();
            for i in 0..d {
                probe[i] = x[i] + self.fd_step;
                let fp = t.eval(&probe);
                probe[i] = x[i] - self.fd_step;
                let fm = t.eval(&probe);
                probe[i] = x[i];
                g[i] = if fp.is_finite() && fm.is_finite() { (fp - fm) / (2.0 * self.fd_step) } else { 0.0 };
            }
            let g2: f64 = g.iter().map(|v| v * v).sum();
            if g2 == 0.0 {
                break;
            }
            let mut accepted = false;
            while !t.exhausted() {
                let trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - rate * b).collect();
                let ft = t.eval(&trial);
                if ft <= fx - self.armijo * rate * g2 {
                    x = trial;
                    fx = ft;
                    rate *= 2.0;
                    accepted = true;
                    break;
                }
                rate *= self.shrink;
                if rate < 1e-14 {
                    break;
                }
            }
            if !accepted {
                break;
            }
        }
        LocalResult { x: t.best_x, value: t.best, evaluations: t.used, iterations, restarts: 0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let r = NelderMead::default().minimize(rosenbrock, &[-1.2, 1.0], 4000);
        assert!(r.value < 1e-8, "{r:?}");
        assert!(r.evaluations <= 4000);
    }

    #[test]
    fn nelder_mead_respects_budget_and_infeasible() {
        let f = |x: &[f64]| if x[0] < 0.0 { f64::NAN } else { (x[0] - 0.5).powi(2) + x[1].powi(2) };
        let r = NelderMead::default().minimize(f, &[0.2, 0.3], 137);
        assert_eq!(r.evaluations, 137);
        assert!(r.value < 1e-6);
    }

    #[test]
    fn gradient_descent_quadratic() {
        let f = |x: &[f64]| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2);
        let r = GradientDescent::default().minimize(f, &[0.0, 0.0], 2000);
        assert!(r.value < 1e-8, "{r:?}");
        assert!(r.evaluations <= 2000);
    }

    #[test]
    fn deterministic() {
        let a = NelderMead::default().minimize(rosenbrock, &[0.3, -0.4], 500);
        let b = NelderMead::default().minimize(rosenbrock, &[0.3, -0.4], 500);
        assert_eq!(a.x, b.x);
        assert_eq!(a.value, b.value);
    }
}
