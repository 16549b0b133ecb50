//! Damped complex Newton iteration confined to the ball.
//!
//! Residuals are evaluated in double-double; each correction is solved in `f64`
//! by LU, so the iteration doubles as iterative refinement and reaches
//! double-double accuracy near the sphere.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::geometry::point::BOUNDARY_GUARD;
use crate::numeric::{self, cx_from_f64, cx_to_f64, defect, norm, to_f64, CMatrix, Cx};

pub(crate) const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone)]
pub(crate) struct NewtonOutcome {
    pub z: Vec<Cx>,
    pub residual: f64,
}

/// Solves `F(z) = 0` from `seed`, halving steps that leave the ball or fail to
/// reduce `|F|`. Stops when the step falls below `1e-16 (1 - |z|^2)`, when the
/// residual stagnates, or after `max_iter` iterations.
pub(crate) fn newton_in_ball(
    residual: impl Fn(&[Cx]) -> Vec<Cx>,
    jacobian: impl Fn(&[Cx]) -> CMatrix,
    seed: &[Cx],
    max_iter: usize,
) -> NewtonOutcome {
    let q = seed.len();
    let mut z = seed.to_vec();
    let mut r = residual(&z);
    let mut rn = to_f64(norm(&r));
    let mut iterations = 0;
    while iterations < max_iter && rn > 0.0 {
        iterations += 1;
        let jac = jacobian(&z).to_nalgebra();
        let rhs = DVector::from_iterator(q, r.iter().map(|v| -cx_to_f64(*v)));
        let Some(step) = solve_f64(jac, rhs) else {
            break;
        };
        let step: Vec<Cx> = step.iter().map(|v| cx_from_f64(*v)).collect();
        let step_norm = to_f64(norm(&step));
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let cand: Vec<Cx> = z
                .iter()
                .zip(&step)
                .map(|(a, d)| *a + numeric::scale(*d, numeric::dd(t)))
                .collect();
            if to_f64(defect(&cand)) > 2.0 * BOUNDARY_GUARD {
                let rc = residual(&cand);
                let rcn = to_f64(norm(&rc));
                if rcn < rn || (rcn == rn && t == 1.0) {
                    accepted = Some((cand, rc, rcn));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((cand, rc, rcn)) = accepted else {
            break;
        };
        let d = to_f64(defect(&z));
        z = cand;
        r = rc;
        let progress = rcn < 0.5 * rn;
        rn = rcn;
        if t == 1.0 && step_norm <= 1e-16 * d {
            break;
        }
        if !progress && t < 1.0 {
            break;
        }
    }
    NewtonOutcome { z, residual: rn }
}

fn solve_f64(jac: DMatrix<Complex64>, rhs: DVector<Complex64>) -> Option<DVector<Complex64>> {
    let sol = jac.lu().solve(&rhs)?;
    if sol.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        Some(sol)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::cx;

    #[test]
    fn square_root_in_disc() {
        // z^2 = 0.25 from a seed near 0.4 lands on 0.5
        let target = cx(0.25, 0.0);
        let out = newton_in_ball(
            |z| vec![z[0] * z[0] - target],
            |z| {
                let mut m = CMatrix::zeros(1, 1);
                m.set(0, 0, z[0] + z[0]);
                m
            },
            &[cx(0.4, 0.1)],
            50,
        );
        assert!(out.residual < 1e-30, "{out:?}");
        assert!(to_f64((out.z[0] - cx(0.5, 0.0)).norm_sqr()) < 1e-60);
    }

    #[test]
    fn steps_are_kept_inside_the_ball() {
        // root at 1.5 lies outside; iterates must stay inside
        let out = newton_in_ball(
            |z| vec![z[0] - cx(1.5, 0.0)],
            |_| CMatrix::identity(1),
            &[cx(0.0, 0.0)],
            20,
        );
        assert!(to_f64(defect(&out.z)) > 0.0);
        assert!(out.residual > 0.4);
    }
}
