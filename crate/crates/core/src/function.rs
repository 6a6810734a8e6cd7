//! Compactly supported test functions with declared metadata.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::window::Window;

/// Which space a test function is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// Positions only, `x ∈ ℝᵈ`.
    Space,
    /// Marked points, `(s, x) ∈ ℝ*₊ × ℝᵈ`.
    Marked,
}

type Evaluator = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;

/// A real function with declared support and (optionally) a Lipschitz
/// constant with respect to the Euclidean metric on its domain.
///
/// Evaluation outside `support` returns 0 regardless of the wrapped
/// closure. For [`Domain::Space`] functions the mark argument is ignored.
#[derive(Clone)]
pub struct TestFunction {
    domain: Domain,
    support: Window,
    lipschitz: Option<f64>,
    eval: Evaluator,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("domain", &self.domain)
            .field("support", &self.support)
            .field("lipschitz", &self.lipschitz)
            .finish_non_exhaustive()
    }
}

impl TestFunction {
    /// Function of position only.
    pub fn on_space<F>(support: Window, lipschitz: Option<f64>, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::build(Domain::Space, support, lipschitz, Arc::new(move |_, x| f(x)))
    }

    /// Function of mark and position.
    pub fn on_marked<F>(support: Window, lipschitz: Option<f64>, f: F) -> Result<Self>
    where
        F: Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::build(Domain::Marked, support, lipschitz, Arc::new(f))
    }

    fn build(
        domain: Domain,
        support: Window,
        lipschitz: Option<f64>,
        eval: Evaluator,
    ) -> Result<Self> {
        if let Some(l) = lipschitz {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "Lipschitz constant must be finite and >= 0, got {l}"
                )));
            }
        }
        if domain == Domain::Space && support.marks().is_some() {
            return Err(Error::InvalidWindow(
                "spatial test functions cannot carry a mark interval".into(),
            ));
        }
        Ok(Self {
            domain,
            support,
            lipschitz,
            eval,
        })
    }

    /// The constant `value` on `support`.
    pub fn constant(domain: Domain, support: Window, value: f64) -> Result<Self> {
        Self::build(domain, support, Some(0.0), Arc::new(move |_, _| value))
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn support(&self) -> &Window {
        &self.support
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    pub fn dim(&self) -> usize {
        self.support.dim()
    }

    /// Evaluates at a marked point. Works for both domains.
    #[inline]
    pub fn eval_marked(&self, mark: f64, x: &[f64]) -> f64 {
        let inside = match self.domain {
            Domain::Marked => self.support.contains(mark, x),
            Domain::Space => self.support.contains_position(x),
        };
        if inside {
            (self.eval)(mark, x)
        } else {
            0.0
        }
    }

    /// Evaluates a spatial function at a position.
    #[inline]
    pub fn eval_space(&self, x: &[f64]) -> f64 {
        if self.support.contains_position(x) {
            (self.eval)(f64::NAN, x)
        } else {
            0.0
        }
    }

    pub(crate) fn require(&self, domain: Domain, dim: usize) -> Result<()> {
        if self.domain != domain {
            return Err(Error::DomainMismatch {
                expected: match domain {
                    Domain::Space => "space",
                    Domain::Marked => "marked space",
                },
            });
        }
        crate::window::check_dim(dim, self.dim())
    }

    /// `a·f + b·g`, supported on the hull of both supports.
    pub fn linear_combination(a: f64, f: &TestFunction, b: f64, g: &TestFunction) -> Result<Self> {
        if f.domain != g.domain {
            return Err(Error::DomainMismatch {
                expected: match f.domain {
                    Domain::Space => "space",
                    Domain::Marked => "marked space",
                },
            });
        }
        let support = f.support.hull(&g.support)?;
        let lipschitz = match (f.lipschitz, g.lipschitz) {
            (Some(lf), Some(lg)) => Some(a.abs() * lf + b.abs() * lg),
            _ => None,
        };
        let (f, g) = (f.clone(), g.clone());
        Self::build(
            f.domain,
            support,
            lipschitz,
            Arc::new(move |s, x| a * f.eval_marked(s, x) + b * g.eval_marked(s, x)),
        )
    }
}

/// Cubic hat `1 − 3t² + 2|t|³` on `|t| < 1`, zero outside.
///
/// C¹, peak 1 at 0, Lipschitz constant 3/2.
#[inline]
pub fn cubic_hat(t: f64) -> f64 {
    let a = t.abs();
    if a >= 1.0 {
        0.0
    } else {
        1.0 - a * a * (3.0 - 2.0 * a)
    }
}

/// Lipschitz constant of [`cubic_hat`].
pub const CUBIC_HAT_LIPSCHITZ: f64 = 1.5;
