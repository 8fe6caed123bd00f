use nalgebra::{DMatrix, DVector};

use crate::error::{internal, Result};

/// Difference constraint `λ[hi] − λ[lo] ≥ bound`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiffConstraint {
    pub lo: usize,
    pub hi: usize,
    pub bound: f64,
}

const STEP_TOL: f64 = 1e-13;
const MULT_TOL: f64 = 1e-12;

/// Minimizes `Σ w_k λ_k²` (all `w_k > 0`) subject to difference constraints,
/// by a primal active-set method started from the feasible point `start`.
pub fn min_weighted_norm(w: &[f64], cons: &[DiffConstraint], start: &[f64]) -> Result<Vec<f64>> {
    let n = w.len();
    let mut lam = DVector::from_column_slice(start);
    let slack = |lam: &DVector<f64>, c: &DiffConstraint| lam[c.hi] - lam[c.lo] - c.bound;
    if let Some(c) = cons.iter().find(|c| slack(&lam, c) < -1e-12) {
        return internal(format!("start point violates constraint {c:?}"));
    }

    let mut work: Vec<usize> = Vec::new();
    for (i, c) in cons.iter().enumerate() {
        if slack(&lam, c).abs() < 1e-12 && independent(n, cons, &work, i) {
            work.push(i);
        }
    }

    for _ in 0..10_000 {
        let m = work.len();
        let mut kkt = DMatrix::<f64>::zeros(n + m, n + m);
        let mut rhs = DVector::<f64>::zeros(n + m);
        for k in 0..n {
            kkt[(k, k)] = 2.0 * w[k];
            rhs[k] = -2.0 * w[k] * lam[k];
        }
        for (r, &i) in work.iter().enumerate() {
            let c = &cons[i];
            kkt[(c.hi, n + r)] = -1.0;
            kkt[(c.lo, n + r)] = 1.0;
            kkt[(n + r, c.hi)] = 1.0;
            kkt[(n + r, c.lo)] = -1.0;
        }
        let Some(sol) = kkt.lu().solve(&rhs) else {
            return internal("singular KKT system in active-set solve");
        };
        let p = sol.rows(0, n).into_owned();
        if p.amax() < STEP_TOL {
            // Multipliers of the working set: H λ = A_Wᵀ μ.
            let (r_min, mu_min) = (0..m)
                .map(|r| (r, sol[n + r]))
                .fold((usize::MAX, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
            if m == 0 || mu_min >= -MULT_TOL {
                return Ok(lam.iter().copied().collect());
            }
            work.remove(r_min);
            continue;
        }
        let mut alpha = 1.0;
        let mut block = None;
        for (i, c) in cons.iter().enumerate() {
            if work.contains(&i) {
                continue;
            }
            let ap = p[c.hi] - p[c.lo];
            if ap < -STEP_TOL {
                let step = (-slack(&lam, c) / ap).max(0.0);
                if step < alpha {
                    alpha = step;
                    block = Some(i);
                }
            }
        }
        lam += alpha * p;
        if let Some(i) = block {
            work.push(i);
        }
    }
    internal("active-set iteration limit reached")
}

fn independent(n: usize, cons: &[DiffConstraint], work: &[usize], cand: usize) -> bool {
    let rows: Vec<usize> = work.iter().copied().chain([cand]).collect();
    let mut a = DMatrix::<f64>::zeros(rows.len(), n);
    for (r, &i) in rows.iter().enumerate() {
        a[(r, cons[i].hi)] = 1.0;
        a[(r, cons[i].lo)] = -1.0;
    }
    a.rank(1e-9) == rows.len()
}
