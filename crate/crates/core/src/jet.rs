//! Second-order jets of functions on Euclidean space, the common currency of
//! the critical-point and tubular-reduction code.

/// Value, gradient and Hessian of a function on `ℝ^D` at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet<const D: usize> {
    /// Function value.
    pub value: f64,
    /// Euclidean gradient.
    pub grad: [f64; D],
    /// Euclidean Hessian (symmetric).
    pub hess: [[f64; D]; D],
}

impl<const D: usize> Jet<D> {
    /// The zero jet.
    pub fn zero() -> Self {
        Jet { value: 0.0, grad: [0.0; D], hess: [[0.0; D]; D] }
    }
    /// `self + s·other`.
    pub fn add_scaled(&mut self, s: f64, other: &Jet<D>) {
        self.value += s * other.value;
        for i in 0..D {
            self.grad[i] += s * other.grad[i];
            for j in 0..D {
                self.hess[i][j] += s * other.hess[i][j];
            }
        }
    }
}

/// A smooth function on `ℝ^D` whose restriction to the unit sphere is the
/// object of study. Implementations provide exact derivatives.
pub trait SphereFunction<const D: usize>: Sync {
    /// Value, gradient and Hessian at `x`.
    fn jet(&self, x: &[f64; D]) -> Jet<D>;
    /// Value only; override when cheaper than the full jet.
    fn value(&self, x: &[f64; D]) -> f64 {
        self.jet(x).value
    }
}

/// `f + Σ cₖ gₖ` for functions sharing an ambient space.
pub struct LinearCombination<'a, const D: usize> {
    /// Terms `(coefficient, function)`.
    pub terms: Vec<(f64, &'a dyn SphereFunction<D>)>,
}

impl<const D: usize> SphereFunction<D> for LinearCombination<'_, D> {
    fn jet(&self, x: &[f64; D]) -> Jet<D> {
        let mut j = Jet::zero();
        for (c, f) in &self.terms {
            j.add_scaled(*c, &f.jet(x));
        }
        j
    }
    fn value(&self, x: &[f64; D]) -> f64 {
        self.terms.iter().map(|(c, f)| c * f.value(x)).sum()
    }
}
