//! The composite model `g∘F`, the per-component quadratic majorization
//! `H_α(x, ·)` and plain evaluation.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernels::OuterKernel;
use crate::linalg::{dot, norm_sq, sub};
use crate::Scalar;

/// Extended real value: either finite or `+∞`. `+∞` is how a point outside
/// `dom g` is reported; it is a signal, not an error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended<T> {
    Finite(T),
    PosInfinity,
}

impl<T: Scalar> Extended<T> {
    pub fn value(self) -> T {
        match self {
            Extended::Finite(v) => v,
            Extended::PosInfinity => T::infinity(),
        }
    }

    pub fn finite(self) -> Option<T> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::PosInfinity => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Extended::Finite(_))
    }
}

pub type ValueFn<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;
pub type GradientFn<T> = Arc<dyn Fn(&[T]) -> Vec<T> + Send + Sync>;

/// One coordinate `f_i` of `F`: a convex function with Lipschitz gradient.
///
/// `lipschitz` is the gradient Lipschitz constant `L_i`. `Some(0)` declares
/// the component affine; `None` means the constant is unknown (only usable
/// with backtracking).
#[derive(Clone)]
pub struct SmoothComponent<T> {
    value: ValueFn<T>,
    gradient: GradientFn<T>,
    lipschitz: Option<T>,
}

impl<T: Scalar> SmoothComponent<T> {
    pub fn new(value: ValueFn<T>, gradient: GradientFn<T>, lipschitz: Option<T>) -> Self {
        Self {
            value,
            gradient,
            lipschitz,
        }
    }

    pub fn from_fns<V, G>(value: V, gradient: G, lipschitz: Option<T>) -> Self
    where
        V: Fn(&[T]) -> T + Send + Sync + 'static,
        G: Fn(&[T]) -> Vec<T> + Send + Sync + 'static,
    {
        Self::new(Arc::new(value), Arc::new(gradient), lipschitz)
    }

    /// `x ↦ bᵀx + c`, declared with `L = 0`.
    pub fn affine(b: Vec<T>, c: T) -> Self {
        let b = Arc::new(b);
        let bg = Arc::clone(&b);
        Self::from_fns(
            move |x: &[T]| dot(&b, x) + c,
            move |_x: &[T]| bg.as_ref().clone(),
            Some(T::zero()),
        )
    }

    /// `x ↦ xᵀQx + bᵀx + c` with `Q` symmetric PSD, row-major `n × n`.
    /// The gradient is `2Qx + b`; the caller supplies `L = 2 λ_max(Q)`.
    pub fn quadratic(q: Vec<T>, b: Vec<T>, c: T, lipschitz: Option<T>) -> Self {
        let n = b.len();
        assert_eq!(q.len(), n * n, "quadratic form must be n × n");
        let data = Arc::new((q, b));
        let dg = Arc::clone(&data);
        Self::from_fns(
            move |x: &[T]| {
                let (q, b) = data.as_ref();
                let mut acc = c + dot(b, x);
                for (i, &xi) in x.iter().enumerate() {
                    acc += xi * dot(&q[i * n..(i + 1) * n], x);
                }
                acc
            },
            move |x: &[T]| {
                let (q, b) = dg.as_ref();
                let two = T::lit(2.0);
                (0..n)
                    .map(|i| two * dot(&q[i * n..(i + 1) * n], x) + b[i])
                    .collect()
            },
            lipschitz,
        )
    }

    /// `x ↦ x_j`, the building block of the identity blocks used by the
    /// NLP and separable kernels.
    pub fn coordinate(j: usize, n: usize) -> Self {
        Self::from_fns(
            move |x: &[T]| x[j],
            move |_x: &[T]| {
                let mut e = vec![T::zero(); n];
                e[j] = T::one();
                e
            },
            Some(T::zero()),
        )
    }

    pub fn value(&self, x: &[T]) -> T {
        (self.value)(x)
    }

    pub fn gradient(&self, x: &[T]) -> Vec<T> {
        (self.gradient)(x)
    }

    pub fn lipschitz(&self) -> Option<T> {
        self.lipschitz
    }
}

impl<T: fmt::Debug> fmt::Debug for SmoothComponent<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothComponent")
            .field("lipschitz", &self.lipschitz)
            .finish_non_exhaustive()
    }
}

/// The smooth map `F = (f_1, …, f_m): Rⁿ → Rᵐ`.
#[derive(Clone, Debug)]
pub struct SmoothMap<T> {
    dim: usize,
    components: Vec<SmoothComponent<T>>,
}

impl<T: Scalar> SmoothMap<T> {
    pub fn new(dim: usize, components: Vec<SmoothComponent<T>>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Empty("smooth map needs at least one component"));
        }
        if dim == 0 {
            return Err(Error::InvalidProblem("dimension must be positive".into()));
        }
        for (i, c) in components.iter().enumerate() {
            if let Some(l) = c.lipschitz {
                if !(l >= T::zero()) || !l.is_finite() {
                    return Err(Error::InvalidProblem(format!(
                        "component {i} has invalid curvature constant {l}"
                    )));
                }
            }
        }
        Ok(Self { dim, components })
    }

    /// Appends the identity block `x ↦ x` (n affine coordinates).
    pub fn with_identity_block(mut self) -> Self {
        let n = self.dim;
        self.components
            .extend((0..n).map(|j| SmoothComponent::coordinate(j, n)));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[SmoothComponent<T>] {
        &self.components
    }

    /// The curvature vector `𝑳`, if every constant is declared.
    pub fn curvature(&self) -> Option<Vec<T>> {
        self.components.iter().map(|c| c.lipschitz).collect()
    }

    pub fn curvature_or_err(&self) -> Result<Vec<T>> {
        self.curvature().ok_or(Error::MissingCurvature)
    }

    fn check_point(&self, x: &[T]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `(f_1(x), …, f_m(x))`.
    pub fn eval(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_point(x)?;
        self.components
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let v = c.value(x);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::NonFinite { component: i })
                }
            })
            .collect()
    }

    /// Rows of the Jacobian, `∇f_i(x)`.
    pub fn jacobian(&self, x: &[T]) -> Result<Vec<Vec<T>>> {
        self.check_point(x)?;
        self.components
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let g = c.gradient(x);
                if g.len() != self.dim {
                    return Err(Error::DimensionMismatch {
                        expected: self.dim,
                        got: g.len(),
                    });
                }
                if g.iter().all(|v| v.is_finite()) {
                    Ok(g)
                } else {
                    Err(Error::NonFinite { component: i })
                }
            })
            .collect()
    }
}

/// The problem `min g(F(x))`.
#[derive(Clone, Debug)]
pub struct CompositeProblem<T> {
    smooth: SmoothMap<T>,
    kernel: OuterKernel<T>,
}

impl<T: Scalar> CompositeProblem<T> {
    /// Checks the kernel arity against `m` and that every component with
    /// positive (or unknown) curvature enters `g` monotonically.
    pub fn new(smooth: SmoothMap<T>, kernel: OuterKernel<T>) -> Result<Self> {
        if kernel.arity() != smooth.len() {
            return Err(Error::ArityMismatch {
                expected: kernel.arity(),
                got: smooth.len(),
            });
        }
        for (i, c) in smooth.components().iter().enumerate() {
            let curved = c.lipschitz().map_or(true, |l| l > T::zero());
            if curved && !kernel.is_monotone(i) {
                return Err(Error::InvalidProblem(format!(
                    "component {i} has nonzero curvature but enters the kernel non-monotonically"
                )));
            }
        }
        if let Some(block) = kernel.identity_block() {
            if block.len() != smooth.dim() {
                return Err(Error::InvalidProblem(format!(
                    "identity block has {} coordinates for dimension {}",
                    block.len(),
                    smooth.dim()
                )));
            }
        }
        Ok(Self { smooth, kernel })
    }

    pub fn smooth(&self) -> &SmoothMap<T> {
        &self.smooth
    }

    pub fn kernel(&self) -> &OuterKernel<T> {
        &self.kernel
    }

    pub fn dim(&self) -> usize {
        self.smooth.dim()
    }

    /// `F(x)`.
    pub fn eval_smooth(&self, x: &[T]) -> Result<Vec<T>> {
        self.smooth.eval(x)
    }

    /// `g(F(x))`, `+∞` outside the domain.
    pub fn objective(&self, x: &[T]) -> Result<Extended<T>> {
        let z = self.smooth.eval(x)?;
        self.kernel.value(&z)
    }

    pub fn curvature(&self) -> Option<Vec<T>> {
        self.smooth.curvature()
    }

    /// Builds the model `H_α(x, ·)` at `x`.
    pub fn model(&self, x: &[T], alpha: Vec<T>) -> Result<ModelVector<T>> {
        ModelVector::build(&self.smooth, x, alpha)
    }
}

/// First-order data of `F` at a base point together with the curvature
/// parameters `α` of the model
/// `H_α(x, y) = F(x) + ∇F(x)(y − x) + (α/2)‖y − x‖²`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelVector<T> {
    pub base: Vec<T>,
    pub values: Vec<T>,
    pub jacobian: Vec<Vec<T>>,
    pub alpha: Vec<T>,
}

impl<T: Scalar> ModelVector<T> {
    pub fn build(smooth: &SmoothMap<T>, x: &[T], alpha: Vec<T>) -> Result<Self> {
        if alpha.len() != smooth.len() {
            return Err(Error::ArityMismatch {
                expected: smooth.len(),
                got: alpha.len(),
            });
        }
        if alpha.iter().any(|&a| !(a >= T::zero()) || !a.is_finite()) {
            return Err(Error::InvalidConfig(
                "curvature parameters must be finite and nonnegative".into(),
            ));
        }
        Ok(Self {
            base: x.to_vec(),
            values: smooth.eval(x)?,
            jacobian: smooth.jacobian(x)?,
            alpha,
        })
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `H_i(x, y)` for the single component `i`, with `d = y − x` and
    /// `‖d‖²` precomputed by the caller.
    #[inline]
    pub fn component_at_step(&self, i: usize, d: &[T], d_sq: T) -> T {
        self.values[i] + dot(&self.jacobian[i], d) + self.alpha[i] * d_sq / T::lit(2.0)
    }

    /// `H_α(x, y)` componentwise.
    pub fn eval(&self, y: &[T]) -> Vec<T> {
        let d = sub(y, &self.base);
        let d_sq = norm_sq(&d);
        (0..self.len())
            .map(|i| self.component_at_step(i, &d, d_sq))
            .collect()
    }

    /// Entry `i` is true iff `f_i(y) ≤ H_i(x, y) + tol·(1 + |f_i(y)|)`.
    pub fn majorization_holds(&self, smooth: &SmoothMap<T>, y: &[T], tol: T) -> Result<Vec<bool>> {
        let fy = smooth.eval(y)?;
        let hy = self.eval(y);
        Ok(fy
            .iter()
            .zip(&hy)
            .map(|(&f, &h)| f <= h + tol * (T::one() + f.abs()))
            .collect())
    }
}
