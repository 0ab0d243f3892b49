//! Smooth analytic test functions with closed-form gradients.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    /// `½ Σ λ_i x_i²`
    Quadratic { eigenvalues: Vec<f64> },
    Rosenbrock,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    name: String,
    dim: usize,
    kind: Kind,
    minimizer: Vec<f64>,
    minimum: f64,
    domain: (f64, f64),
}

impl Objective {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn minimizer(&self) -> Tensor {
        Tensor::from_vec(self.minimizer.clone())
    }

    pub fn minimum(&self) -> f64 {
        self.minimum
    }

    /// Box `[lo, hi]^d` used for sampling test points.
    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    /// Diagonal of the Hessian for quadratics.
    pub fn eigenvalues(&self) -> Option<&[f64]> {
        match &self.kind {
            Kind::Quadratic { eigenvalues } => Some(eigenvalues),
            Kind::Rosenbrock => None,
        }
    }

    fn check(&self, x: &Tensor) -> Result<()> {
        if x.shape() != [self.dim] {
            return Err(Error::ShapeMismatch {
                left: vec![self.dim],
                right: x.shape().to_vec(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, x: &Tensor) -> Result<f64> {
        self.check(x)?;
        let x = x.data();
        Ok(match &self.kind {
            Kind::Quadratic { eigenvalues } => {
                0.5 * eigenvalues.iter().zip(x).map(|(l, v)| l * v * v).sum::<f64>()
            }
            Kind::Rosenbrock => x
                .windows(2)
                .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
                .sum(),
        })
    }

    pub fn grad(&self, x: &Tensor) -> Result<Tensor> {
        self.check(x)?;
        let x = x.data();
        let g = match &self.kind {
            Kind::Quadratic { eigenvalues } => eigenvalues.iter().zip(x).map(|(l, v)| l * v).collect(),
            Kind::Rosenbrock => {
                let mut g = vec![0.0; x.len()];
                for i in 0..x.len() - 1 {
                    let r = x[i + 1] - x[i] * x[i];
                    g[i] += -400.0 * x[i] * r - 2.0 * (1.0 - x[i]);
                    g[i + 1] += 200.0 * r;
                }
                g
            }
        };
        Ok(Tensor::from_vec(g))
    }
}

/// `f(x) = ½ xᵀ D x` with `D = diag(λ)`, `λ_i = condition^(i / (d - 1))`.
pub fn quadratic(dim: usize, condition: f64) -> Result<Objective> {
    if dim == 0 {
        return Err(Error::invalid("quadratic needs dim >= 1"));
    }
    if !(condition >= 1.0 && condition.is_finite()) {
        return Err(Error::invalid(format!("condition must be >= 1, got {condition}")));
    }
    let eigenvalues = if dim == 1 {
        vec![1.0]
    } else {
        (0..dim)
            .map(|i| condition.powf(i as f64 / (dim - 1) as f64))
            .collect()
    };
    Ok(Objective {
        name: format!("quadratic-{dim}-k{condition}"),
        dim,
        kind: Kind::Quadratic { eigenvalues },
        minimizer: vec![0.0; dim],
        minimum: 0.0,
        domain: (-5.0, 5.0),
    })
}

/// `Σ_{i<d} 100 (x_{i+1} - x_i²)² + (1 - x_i)²`, minimum 0 at all-ones.
pub fn rosenbrock(dim: usize) -> Result<Objective> {
    if dim < 2 {
        return Err(Error::invalid("rosenbrock needs dim >= 2"));
    }
    Ok(Objective {
        name: format!("rosenbrock-{dim}"),
        dim,
        kind: Kind::Rosenbrock,
        minimizer: vec![1.0; dim],
        minimum: 0.0,
        domain: (-2.0, 2.0),
    })
}
