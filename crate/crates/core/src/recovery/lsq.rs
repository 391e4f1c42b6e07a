use super::{dist, norm, Program, PsdProjector, RecoveryResult, SolverOptions};
use crate::error::{Error, Result};
use crate::measurement::{MeasurementScheme, OutcomeTable};

/// Minimizes `‖M(Y) − b‖₂` over PSD `Y`.
///
/// FISTA with step `1/L`, `L = σ_max(A)²`. Whenever the extrapolated step
/// would increase the objective, momentum is reset and a plain projected
/// gradient step is taken instead, so the accepted iterates are monotone.
/// Stops when both the last step and the estimated remaining distance to the
/// limit fall below `rel_tol · max(‖x‖, ‖Aᵀb‖/L)`. The remaining distance is
/// extrapolated from the observed linear rate, since a small step alone says
/// little on an ill-conditioned face of the cone.
pub fn solve_least_squares(
    scheme: &MeasurementScheme,
    b: &OutcomeTable,
    opts: &SolverOptions,
) -> Result<RecoveryResult> {
    opts.validate()?;
    scheme.check_table(b)?;
    let a = scheme.matrix();
    let bv = b.as_flat();
    let n = a.cols();
    let lip = scheme.operator_norm().powi(2);
    if !(lip > 0.0) {
        return Err(Error::Precondition("measurement matrix is zero".into()));
    }
    let step = 1.0 / lip;
    let f0 = 0.5 * norm(bv).powi(2);
    let scale_floor = norm(&a.tmatvec(bv)) * step;
    let mut proj = PsdProjector::new(*scheme.coords());

    let objective = |x: &[f64]| -> f64 {
        let r = a.matvec(x);
        0.5 * r.iter().zip(bv).map(|(p, q)| (p - q) * (p - q)).sum::<f64>()
    };
    let projected_step = |from: &[f64], proj: &mut PsdProjector| -> Result<Vec<f64>> {
        let mut r = a.matvec(from);
        for (ri, bi) in r.iter_mut().zip(bv) {
            *ri -= bi;
        }
        let g = a.tmatvec(&r);
        let trial: Vec<f64> = from.iter().zip(&g).map(|(x, gi)| x - step * gi).collect();
        proj.project(&trial)
    };

    let mut x = vec![0.0; n];
    let mut fx = f0;
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut converged = false;
    let mut iterations = 0;
    let mut window = RateWindow::default();
    for k in 1..=opts.max_iters {
        iterations = k;
        let mut x_new = projected_step(&y, &mut proj)?;
        let mut f_new = objective(&x_new);
        if f_new > fx {
            x_new = projected_step(&x, &mut proj)?;
            f_new = objective(&x_new);
            t = 1.0;
            debug_assert!(f_new <= fx + 1e-12 * f0, "objective increased: {fx} -> {f_new}");
        }
        let moved = dist(&x_new, &x);
        let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_new;
        y = x_new.iter().zip(&x).map(|(xn, xo)| xn + beta * (xn - xo)).collect();
        x = x_new;
        fx = f_new;
        t = t_new;
        let target = opts.rel_tol * norm(&x).max(scale_floor);
        if moved <= target && window.remaining(moved) <= target {
            converged = true;
            break;
        }
    }

    let estimate = scheme.coords().from_coords(&x);
    let residual = (2.0 * fx).sqrt();
    RecoveryResult::new(Program::Lsq, estimate, residual, iterations, converged, None, *opts)
}

/// Extrapolates `Σ_{j>k} ‖x_{j+1} − x_j‖` from the ratio of the largest
/// steps in the last two windows of iterations.
#[derive(Default)]
struct RateWindow {
    steps: Vec<f64>,
}

const RATE_WINDOW: usize = 25;

impl RateWindow {
    fn remaining(&mut self, moved: f64) -> f64 {
        self.steps.push(moved);
        if moved == 0.0 {
            return 0.0;
        }
        let k = self.steps.len();
        if k < 2 * RATE_WINDOW {
            return f64::INFINITY;
        }
        let peak = |w: &[f64]| w.iter().copied().fold(0.0, f64::max);
        let recent = peak(&self.steps[k - RATE_WINDOW..]);
        let earlier = peak(&self.steps[k - 2 * RATE_WINDOW..k - RATE_WINDOW]);
        let q = (recent / earlier).powf(1.0 / RATE_WINDOW as f64);
        if q >= 1.0 {
            f64::INFINITY
        } else {
            recent * q / (1.0 - q)
        }
    }
}
