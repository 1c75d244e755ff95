use crate::linalg::SymMatrix;

/// Value and gradient at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet1 {
    pub value: f64,
    pub grad: Vec<f64>,
}

/// Value, gradient and Hessian at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub grad: Vec<f64>,
    hess: SymMatrix,
}

impl Jet2 {
    pub fn constant(value: f64, dim: usize) -> Self {
        Jet2 {
            value,
            grad: vec![0.0; dim],
            hess: SymMatrix::zeros(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn hess(&self, i: usize, j: usize) -> f64 {
        self.hess.get(i, j)
    }

    pub fn hessian(&self) -> &SymMatrix {
        &self.hess
    }

    pub(crate) fn set_hess(&mut self, i: usize, j: usize, v: f64) {
        self.hess.set(i, j, v);
    }

    pub fn first(&self) -> Jet1 {
        Jet1 {
            value: self.value,
            grad: self.grad.clone(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().all(|g| g.is_finite())
            && self.hess.is_finite()
    }
}
