//! Non-smooth term `h(y)` and its exact `y`-subproblem for `B = −I`, `c = 0`.

use crate::error::{check_len, Error, Result};
use crate::linalg::dense::{norm1, DenseVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularizer {
    /// `h(y) = λ₁‖y‖₁`
    L1(f64),
    None,
}

impl Regularizer {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Regularizer::L1(l) if !(l >= 0.0 && l.is_finite()) => Err(Error::InvalidParameter(
                format!("l1 weight must be non-negative, got {l}"),
            )),
            _ => Ok(()),
        }
    }

    pub fn weight(&self) -> f64 {
        match *self {
            Regularizer::L1(l) => l,
            Regularizer::None => 0.0,
        }
    }

    pub fn value(&self, y: &[f64]) -> f64 {
        match *self {
            Regularizer::L1(l) => l * norm1(y),
            Regularizer::None => 0.0,
        }
    }

    /// Componentwise distance from `g` to the subdifferential `∂h(y)`.
    pub fn subgradient_residual(&self, y: &[f64], g: &[f64]) -> f64 {
        let l = self.weight();
        y.iter()
            .zip(g)
            .map(|(&yi, &gi)| {
                if yi > 0.0 {
                    (gi - l).abs()
                } else if yi < 0.0 {
                    (gi + l).abs()
                } else {
                    (gi.abs() - l).max(0.0)
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Bound on the constraint coupling. Only `B = −I, c = 0` is implemented;
/// the variant is carried so a general `y`-update can be added later.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Coupling {
    #[default]
    NegIdentityZeroOffset,
}

/// `sign(v)·max(|v| − τ, 0)` componentwise.
pub fn soft_threshold(v: &[f64], tau: f64) -> Result<DenseVector> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidParameter(format!("threshold must be non-negative, got {tau}")));
    }
    Ok(v.iter().map(|&x| shrink(x, tau)).collect())
}

#[inline]
pub fn shrink(x: f64, tau: f64) -> f64 {
    if x > tau {
        x - tau
    } else if x < -tau {
        x + tau
    } else {
        0.0
    }
}

/// `argmin_y h(y) + (β/2)‖Az − y + λ‖²`, written into `out`.
pub fn y_update_into(reg: &Regularizer, az: &[f64], lambda_dual: &[f64], beta: f64, out: &mut [f64]) {
    match *reg {
        Regularizer::L1(l) => {
            let tau = l / beta;
            for ((o, a), u) in out.iter_mut().zip(az).zip(lambda_dual) {
                *o = shrink(a + u, tau);
            }
        }
        Regularizer::None => {
            for ((o, a), u) in out.iter_mut().zip(az).zip(lambda_dual) {
                *o = a + u;
            }
        }
    }
}

/// Exact minimiser of the `y`-subproblem.
pub fn y_update(reg: &Regularizer, az: &[f64], lambda_dual: &[f64], beta: f64) -> Result<DenseVector> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    reg.validate()?;
    check_len("y_update dual", az.len(), lambda_dual.len())?;
    let mut out = vec![0.0; az.len()];
    y_update_into(reg, az, lambda_dual, beta, &mut out);
    Ok(out)
}

/// Objective of the `y`-subproblem, used by brute-force checks.
pub fn y_subproblem_objective(reg: &Regularizer, az: &[f64], lambda_dual: &[f64], beta: f64, y: &[f64]) -> f64 {
    let quad: f64 = az
        .iter()
        .zip(lambda_dual)
        .zip(y)
        .map(|((a, u), yi)| (a - yi + u).powi(2))
        .sum();
    reg.value(y) + 0.5 * beta * quad
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn soft_threshold_examples() {
        let v = [0.5, -2.0, 3.0];
        assert_eq!(soft_threshold(&v, 0.0).unwrap(), v.to_vec());
        assert_eq!(soft_threshold(&[0.5, -2.0], 1.0).unwrap(), vec![0.0, -1.0]);
        assert_eq!(soft_threshold(&[0.2, -0.9, 1.0], 1.0).unwrap(), vec![0.0, 0.0, 0.0]);
        assert!(soft_threshold(&v, -0.1).is_err());
    }

    #[test]
    fn y_update_examples() {
        let az = [1.5, 0.25, -2.5];
        let u = [0.5, 0.25, -0.5];
        assert_eq!(y_update(&Regularizer::None, &az, &u, 3.0).unwrap(), vec![2.0, 0.5, -3.0]);
        assert_eq!(y_update(&Regularizer::L1(2.0), &az, &u, 2.0).unwrap(), vec![1.0, 0.0, -2.0]);
        assert_eq!(
            y_update(&Regularizer::L1(2.0), &[0.0; 3], &[0.0; 3], 2.0).unwrap(),
            vec![0.0; 3]
        );
        assert!(y_update(&Regularizer::L1(1.0), &az, &u, 0.0).is_err());
        assert!(y_update(&Regularizer::L1(-1.0), &az, &u, 1.0).is_err());
    }

    #[test]
    fn grid_brute_force_agrees_on_example() {
        // λ₁/β = 1, Az + λ = (2, 0.5, −3)
        let reg = Regularizer::L1(1.0);
        let target = [2.0, 0.5, -3.0];
        let zeros = [0.0; 3];
        let y = y_update(&reg, &target, &zeros, 1.0).unwrap();
        for k in 0..3 {
            let mut best = (f64::INFINITY, 0.0);
            let mut t = -5.0;
            while t <= 5.0 {
                let obj = reg.weight() * f64::abs(t) + 0.5 * (target[k] - t).powi(2);
                if obj < best.0 {
                    best = (obj, t);
                }
                t += 1e-4;
            }
            assert!((best.1 - y[k]).abs() <= 2e-4, "component {k}: {} vs {}", best.1, y[k]);
        }
        assert_eq!(y, vec![1.0, 0.0, -2.0]);
    }

    #[test]
    fn subgradient_residual_detects_optimality() {
        let reg = Regularizer::L1(0.5);
        assert_eq!(reg.subgradient_residual(&[1.0, 0.0, -2.0], &[0.5, 0.3, -0.5]), 0.0);
        assert!(reg.subgradient_residual(&[1.0], &[0.2]) > 0.29);
        assert!(reg.subgradient_residual(&[0.0], &[0.9]) > 0.39);
    }
}
