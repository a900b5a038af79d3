//! Proximal-gradient minimisation shared by both inference modules.
//!
//! Each target node's incoming parameters form an independent subproblem
//! `min f(x) + h(x)` with `f` smooth and convex and `h` either the indicator
//! of the nonnegative orthant or an L1 penalty. Steps use a Barzilai-Borwein
//! guess followed by backtracking until the usual sufficient-decrease test
//! for proximal steps holds, so the objective never increases.

/// Smooth part of one column subproblem.
pub(crate) trait SmoothObjective {
    fn dim(&self) -> usize;

    /// Objective value; `+inf` outside the domain.
    fn value(&self, x: &[f64]) -> f64;

    /// Objective value with its gradient written into `grad`.
    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Regularizer {
    NonNegative,
    L1(f64),
}

impl Regularizer {
    #[inline]
    fn prox(self, v: f64, step: f64) -> f64 {
        match self {
            Regularizer::NonNegative => v.max(0.0),
            Regularizer::L1(lambda) => soft_threshold(v, lambda * step),
        }
    }

    fn penalty(self, x: &[f64]) -> f64 {
        match self {
            Regularizer::NonNegative => 0.0,
            Regularizer::L1(lambda) => lambda * x.iter().map(|v| v.abs()).sum::<f64>(),
        }
    }
}

/// Shrinks `v` toward zero by `threshold`, clamping to exactly 0.
#[inline]
pub fn soft_threshold(v: f64, threshold: f64) -> f64 {
    if v > threshold {
        v - threshold
    } else if v < -threshold {
        v + threshold
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SolverOptions {
    pub max_iters: usize,
    pub tol: f64,
    pub step_init: f64,
    pub accelerate: bool,
}

#[derive(Debug, Clone)]
pub(crate) struct ColumnSolution {
    pub x: Vec<f64>,
    /// Objective (smooth part plus penalty) after every iteration, starting
    /// with the initial point.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

const MIN_STEP: f64 = 1e-30;
const MAX_STEP: f64 = 1e12;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Backtracks from `step` until the proximal step from `x` passes the
/// sufficient-decrease test. Returns the new point, its smooth value and the
/// accepted step, or `None` if the step underflowed.
fn backtrack<O: SmoothObjective>(
    obj: &O,
    reg: Regularizer,
    x: &[f64],
    fx: f64,
    grad: &[f64],
    mut step: f64,
) -> Option<(Vec<f64>, f64, f64)> {
    let mut y = vec![0.0; x.len()];
    // Round-off slack so that a converged point is not rejected forever.
    let slack = 1e-13 * fx.abs().max(1.0);
    while step >= MIN_STEP {
        for k in 0..x.len() {
            y[k] = reg.prox(x[k] - step * grad[k], step);
        }
        let fy = obj.value(&y);
        if fy.is_finite() {
            let mut lin = 0.0;
            let mut sq = 0.0;
            for k in 0..x.len() {
                let d = y[k] - x[k];
                lin += grad[k] * d;
                sq += d * d;
            }
            if fy <= fx + lin + sq / (2.0 * step) + slack {
                return Some((y, fy, step));
            }
        }
        step *= 0.5;
    }
    None
}

pub(crate) fn proximal_gradient<O: SmoothObjective>(
    obj: &O,
    reg: Regularizer,
    x0: Vec<f64>,
    opts: &SolverOptions,
) -> ColumnSolution {
    let n = obj.dim();
    debug_assert_eq!(n, x0.len());
    let mut x: Vec<f64> = match reg {
        Regularizer::NonNegative => x0.into_iter().map(|v| v.max(0.0)).collect(),
        Regularizer::L1(_) => x0,
    };
    let mut grad = vec![0.0; n];
    let mut fx = obj.value_grad(&x, &mut grad);
    let mut big_f = fx + reg.penalty(&x);
    let mut trace = vec![big_f];
    if n == 0 || !fx.is_finite() {
        return ColumnSolution {
            x,
            trace,
            iterations: 0,
            converged: n == 0,
        };
    }

    let mut step = opts.step_init;
    let mut converged = false;
    let mut iterations = 0;
    // Momentum state, only used with acceleration.
    let mut momentum = 1.0f64;
    let mut x_prev = x.clone();
    let mut new_grad = vec![0.0; n];

    while iterations < opts.max_iters {
        iterations += 1;

        let mut candidate = None;
        if opts.accelerate && momentum > 1.0 {
            let next_momentum = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
            let beta = (momentum - 1.0) / next_momentum;
            let z: Vec<f64> = x
                .iter()
                .zip(&x_prev)
                .map(|(a, b)| {
                    let v = a + beta * (a - b);
                    if reg == Regularizer::NonNegative {
                        v.max(0.0)
                    } else {
                        v
                    }
                })
                .collect();
            let mut gz = vec![0.0; n];
            let fz = obj.value_grad(&z, &mut gz);
            if fz.is_finite() {
                if let Some((y, fy, s)) = backtrack(obj, reg, &z, fz, &gz, step) {
                    if fy + reg.penalty(&y) <= big_f {
                        candidate = Some((y, fy, s));
                        momentum = next_momentum;
                    }
                }
            }
        }
        let (y, fy, accepted) = match candidate {
            Some(c) => c,
            None => {
                momentum = 1.0;
                match backtrack(obj, reg, &x, fx, &grad, step) {
                    Some(c) => c,
                    None => {
                        // No step makes progress: x is optimal to machine precision.
                        converged = true;
                        break;
                    }
                }
            }
        };
        if opts.accelerate && momentum == 1.0 {
            momentum = 2.0;
        }

        let fy_checked = obj.value_grad(&y, &mut new_grad);
        debug_assert!((fy_checked - fy).abs() <= 1e-9 * fy.abs().max(1.0));
        let big_fy = fy + reg.penalty(&y);

        let s: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
        let r: Vec<f64> = new_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sr = dot(&s, &r);
        step = if opts.accelerate {
            accepted * 2.0
        } else if sr > 0.0 {
            dot(&s, &s) / sr
        } else {
            accepted * 2.0
        }
        .clamp(MIN_STEP * 1e6, MAX_STEP);

        let change = (big_f - big_fy).abs() / big_fy.abs().max(1.0);
        x_prev = std::mem::replace(&mut x, y);
        std::mem::swap(&mut grad, &mut new_grad);
        fx = fy;
        big_f = big_fy;
        trace.push(big_f);
        if change < opts.tol {
            converged = true;
            break;
        }
    }

    ColumnSolution {
        x,
        trace,
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `0.5 * sum w_k (x_k - c_k)^2`
    struct Quadratic {
        w: Vec<f64>,
        c: Vec<f64>,
    }

    impl SmoothObjective for Quadratic {
        fn dim(&self) -> usize {
            self.w.len()
        }

        fn value(&self, x: &[f64]) -> f64 {
            (0..x.len())
                .map(|k| 0.5 * self.w[k] * (x[k] - self.c[k]).powi(2))
                .sum()
        }

        fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
            for k in 0..x.len() {
                grad[k] = self.w[k] * (x[k] - self.c[k]);
            }
            self.value(x)
        }
    }

    fn opts(accelerate: bool) -> SolverOptions {
        SolverOptions {
            max_iters: 5000,
            tol: 1e-14,
            step_init: 1.0,
            accelerate,
        }
    }

    #[test]
    fn soft_threshold_clamps_to_zero() {
        assert_eq!(soft_threshold(0.3, 0.5), 0.0);
        assert_eq!(soft_threshold(-0.3, 0.5), 0.0);
        assert_eq!(soft_threshold(2.0, 0.5), 1.5);
        assert_eq!(soft_threshold(-2.0, 0.5), -1.5);
    }

    #[test]
    fn projected_solution_on_quadratic() {
        let q = Quadratic {
            w: vec![1.0, 10.0, 0.1],
            c: vec![2.0, -1.0, 0.5],
        };
        for accelerate in [false, true] {
            let sol = proximal_gradient(&q, Regularizer::NonNegative, vec![1.0; 3], &opts(accelerate));
            assert!(sol.converged);
            assert!((sol.x[0] - 2.0).abs() < 1e-5, "{:?}", sol.x);
            assert_eq!(sol.x[1], 0.0);
            assert!((sol.x[2] - 0.5).abs() < 1e-5, "{:?}", sol.x);
            assert!(sol.trace.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        }
    }

    #[test]
    fn l1_solution_on_quadratic() {
        // Minimiser of 0.5 w (x - c)^2 + lambda |x| is soft(c, lambda / w).
        let q = Quadratic {
            w: vec![1.0, 4.0, 2.0],
            c: vec![2.0, -1.0, 0.1],
        };
        let lambda = 0.5;
        let sol = proximal_gradient(&q, Regularizer::L1(lambda), vec![0.0; 3], &opts(false));
        for k in 0..3 {
            let expected = soft_threshold(q.c[k], lambda / q.w[k]);
            assert!((sol.x[k] - expected).abs() < 1e-6, "{k}: {:?}", sol.x);
        }
        assert_eq!(sol.x[2], 0.0);
    }

    #[test]
    fn empty_problem_is_converged() {
        let q = Quadratic { w: vec![], c: vec![] };
        let sol = proximal_gradient(&q, Regularizer::NonNegative, vec![], &opts(false));
        assert!(sol.converged);
        assert_eq!(sol.iterations, 0);
    }
}
