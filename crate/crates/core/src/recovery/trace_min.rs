use super::{norm, solve_least_squares, Program, PsdProjector, RecoveryResult, SolverOptions, TableNorm};
use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;
use crate::measurement::{MeasurementScheme, OutcomeTable};

/// Over-relaxation factor.
const RELAX: f64 = 1.6;

/// Penalty updates: every `BALANCE_EVERY` iterations, when the normalized
/// residuals differ by more than `BALANCE`.
const BALANCE: f64 = 5.0;
const BALANCE_EVERY: usize = 50;

/// Minimizes `tr Y` over PSD `Y` subject to `‖M(Y) − b‖ ≤ ε`.
///
/// Scaled-form ADMM on the splitting
///
/// ```text
/// minimize ⟨t, y⟩ + 1_PSD(w) + 1_ball(z)   s.t.   A y − z = b,   y − w = 0,
/// ```
///
/// with `t` the coordinates of the identity. The `y`-step solves
/// `(AᵀA + I) y = Aᵀ(b + z − u) + (w − v) − t/ρ`, whose matrix does not
/// depend on `ρ` and is factored once per scheme. Both copies are
/// over-relaxed, and the penalty is doubled or halved when the normalized
/// primal and dual residuals drift apart. The estimate is the PSD block `w`.
///
/// If the iteration does not converge, least squares decides feasibility:
/// when even the least-squares residual exceeds `ε`, the result is
/// [`Error::Infeasible`]. Otherwise, if the PSD block overshoots the ball,
/// it is mixed with the least-squares solution just enough to land inside.
pub fn solve_trace_min(
    scheme: &MeasurementScheme,
    b: &OutcomeTable,
    epsilon: f64,
    opts: &SolverOptions,
) -> Result<RecoveryResult> {
    opts.validate()?;
    scheme.check_table(b)?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Precondition(format!("epsilon must be positive, got {epsilon}")));
    }
    let d = scheme.dim();
    let a = scheme.matrix();
    let bv = b.as_flat();
    let (n, rows, cols) = (a.cols(), a.rows(), b.cols());
    let ball = |x: &mut [f64]| project_ball(x, cols, epsilon, opts.constraint_norm);

    // Y = 0 is feasible and has the smallest possible trace.
    if table_norm(bv, cols, opts.constraint_norm) <= epsilon {
        let zero = HermitianMatrix::zeros(d);
        return RecoveryResult::new(Program::TraceMin, zero, norm(bv), 0, true, Some(epsilon), *opts);
    }

    let chol = scheme.normal_factor();
    let t = scheme.coords().identity_coords();
    let mut proj = PsdProjector::new(*scheme.coords());
    let mut rho = opts.penalty;
    let mut w = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut z = vec![0.0; rows];
    let mut u = vec![0.0; rows];
    let b_norm = norm(bv);
    let mut converged = false;
    let mut iterations = 0;

    for k in 1..=opts.max_iters {
        iterations = k;
        let rhs_data: Vec<f64> = bv.iter().zip(&z).zip(&u).map(|((bi, zi), ui)| bi + zi - ui).collect();
        let mut rhs = a.tmatvec(&rhs_data);
        for i in 0..n {
            rhs[i] += w[i] - v[i] - t[i] / rho;
        }
        let y = chol.solve(&rhs);
        let ay = a.matvec(&y);

        let w_old = std::mem::take(&mut w);
        let z_old = std::mem::take(&mut z);
        // over-relaxed copies of A y and y
        let ay_hat: Vec<f64> = (0..rows)
            .map(|i| RELAX * ay[i] + (1.0 - RELAX) * (z_old[i] + bv[i]))
            .collect();
        let y_hat: Vec<f64> = (0..n).map(|i| RELAX * y[i] + (1.0 - RELAX) * w_old[i]).collect();
        let shifted: Vec<f64> = y_hat.iter().zip(&v).map(|(yi, vi)| yi + vi).collect();
        w = proj.project(&shifted)?;
        z = ay_hat.iter().zip(bv).zip(&u).map(|((p, q), ui)| p - q + ui).collect();
        ball(&mut z);

        let mut r_sq = 0.0;
        for i in 0..rows {
            u[i] += ay_hat[i] - z[i] - bv[i];
            let r = ay[i] - z[i] - bv[i];
            r_sq += r * r;
        }
        for i in 0..n {
            v[i] += y_hat[i] - w[i];
            let r = y[i] - w[i];
            r_sq += r * r;
        }
        let r_pri = r_sq.sqrt();
        let dz: Vec<f64> = z.iter().zip(&z_old).map(|(p, q)| p - q).collect();
        let mut s = a.tmatvec(&dz);
        for i in 0..n {
            s[i] += w[i] - w_old[i];
        }
        let s_dual = rho * norm(&s);
        let mut dual = a.tmatvec(&u);
        for i in 0..n {
            dual[i] += v[i];
        }

        let eps_pri = opts.rel_tol * (norm(&ay).hypot(norm(&y))).max(norm(&z).hypot(norm(&w))).max(b_norm);
        let eps_dual = opts.rel_tol * rho * norm(&dual);
        if r_pri <= eps_pri && s_dual <= eps_dual {
            converged = true;
            break;
        }

        if k % BALANCE_EVERY != 0 {
            continue;
        }
        let (rp, sd) = (r_pri / eps_pri, s_dual / eps_dual.max(f64::MIN_POSITIVE));
        if rp > BALANCE * sd {
            rho *= 2.0;
            u.iter_mut().chain(v.iter_mut()).for_each(|x| *x *= 0.5);
        } else if sd > BALANCE * rp {
            rho *= 0.5;
            u.iter_mut().chain(v.iter_mut()).for_each(|x| *x *= 2.0);
        }
    }

    // Feasibility: least squares bounds the smallest attainable residual and
    // supplies a feasible point for the repair below.
    let mut w_table: Vec<f64> = a.matvec(&w).iter().zip(bv).map(|(p, q)| p - q).collect();
    let slack = epsilon * (1.0 + opts.rel_tol);
    if !converged || table_norm(&w_table, cols, opts.constraint_norm) > slack {
        let lsq = solve_least_squares(scheme, b, opts)?;
        let x = scheme.coords().to_coords(&lsq.estimate);
        let l_table: Vec<f64> = a.matvec(&x).iter().zip(bv).map(|(p, q)| p - q).collect();
        let l_norm = table_norm(&l_table, cols, opts.constraint_norm);
        if l_norm > epsilon {
            if !converged {
                return Err(Error::Infeasible {
                    min_residual: l_norm,
                    epsilon,
                });
            }
        } else if let Some(lambda) = mixing_weight(&w_table, &l_table, cols, epsilon, opts.constraint_norm) {
            // convex combination of two PSD points, the smallest weight on
            // the least-squares point that restores ‖M(Y) − b‖ ≤ ε
            for i in 0..n {
                w[i] += lambda * (x[i] - w[i]);
            }
            for i in 0..rows {
                w_table[i] += lambda * (l_table[i] - w_table[i]);
            }
        }
    }
    let residual = norm(&w_table);
    let estimate = scheme.coords().from_coords(&w);
    RecoveryResult::new(
        Program::TraceMin,
        estimate,
        residual,
        iterations,
        converged,
        Some(epsilon),
        *opts,
    )
}

/// Smallest `λ ∈ [0, 1]` with `‖(1−λ) p + λ q‖ ≤ ε`, given `‖q‖ ≤ ε`.
fn mixing_weight(p: &[f64], q: &[f64], cols: usize, epsilon: f64, kind: TableNorm) -> Option<f64> {
    let at = |lambda: f64| -> f64 {
        let mix: Vec<f64> = p.iter().zip(q).map(|(a, b)| a + lambda * (b - a)).collect();
        table_norm(&mix, cols, kind)
    };
    if at(0.0) <= epsilon {
        return None;
    }
    // the norm is convex in λ, so bisection on the sublevel boundary works
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if at(mid) <= epsilon {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

pub(crate) fn table_norm(x: &[f64], cols: usize, kind: TableNorm) -> f64 {
    match kind {
        TableNorm::HilbertSchmidt => norm(x),
        TableNorm::SupRowL1 => x
            .chunks(cols)
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max),
    }
}

fn project_ball(x: &mut [f64], cols: usize, radius: f64, kind: TableNorm) {
    match kind {
        TableNorm::HilbertSchmidt => {
            let n = norm(x);
            if n > radius {
                let s = radius / n;
                x.iter_mut().for_each(|v| *v *= s);
            }
        }
        TableNorm::SupRowL1 => {
            for row in x.chunks_mut(cols) {
                project_l1(row, radius);
            }
        }
    }
}

/// Euclidean projection onto `{x : ‖x‖₁ ≤ radius}` by soft thresholding at
/// the sorting-based threshold.
fn project_l1(x: &mut [f64], radius: f64) {
    let l1: f64 = x.iter().map(|v| v.abs()).sum();
    if l1 <= radius {
        return;
    }
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    mags.sort_by(|p, q| q.total_cmp(p));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, &m) in mags.iter().enumerate() {
        cum += m;
        let candidate = (cum - radius) / (k + 1) as f64;
        if m > candidate {
            theta = candidate;
        } else {
            break;
        }
    }
    for v in x.iter_mut() {
        *v = v.signum() * (v.abs() - theta).max(0.0);
    }
}
