//! Numerical probes of the vague topology.
//!
//! A finite [`TestFamily`] yields the pseudometric
//! `d_F(γ₁, γ₂) = max_i wᵢ |⟨fᵢ, γ₁⟩ − ⟨fᵢ, γ₂⟩|`. Vague convergence
//! quantifies over every compactly supported continuous function, so a
//! finite family can refute convergence or be consistent with it, never
//! certify it. On the cone, discrepancies are pulled back through `R⁻¹`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cone::DiscreteMeasure;
use crate::configuration::{check_mark, Configuration, MarkedPoint};
use crate::error::{Error, Result};
use crate::function::{cubic_hat, Domain, TestFunction, CUBIC_HAT_LIPSCHITZ};
use crate::plato::PlatoConfiguration;
use crate::window::{check_dim, Window};

/// Weighted finite family of test functions on the marked space.
#[derive(Debug, Clone)]
pub struct TestFamily {
    members: Vec<(TestFunction, f64)>,
}

impl TestFamily {
    pub fn new(functions: Vec<TestFunction>, weights: Vec<f64>) -> Result<Self> {
        if functions.is_empty() {
            return Err(Error::InvalidArgument("test family must be nonempty".into()));
        }
        if functions.len() != weights.len() {
            return Err(Error::InvalidArgument(format!(
                "{} functions but {} weights",
                functions.len(),
                weights.len()
            )));
        }
        let dim = functions[0].dim();
        for (f, &w) in functions.iter().zip(&weights) {
            f.require(Domain::Marked, dim)?;
            let s = f.support();
            if !s.lower().iter().chain(s.upper()).all(|v| v.is_finite()) {
                return Err(Error::UnboundedWindow);
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidArgument(format!("weight must be positive, got {w}")));
            }
        }
        Ok(Self {
            members: functions.into_iter().zip(weights).collect(),
        })
    }

    /// All weights equal to 1.
    pub fn uniform(functions: Vec<TestFunction>) -> Result<Self> {
        let n = functions.len();
        Self::new(functions, vec![1.0; n])
    }

    pub fn dim(&self) -> usize {
        self.members[0].0.dim()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> impl Iterator<Item = (&TestFunction, f64)> {
        self.members.iter().map(|(f, w)| (f, *w))
    }

    /// Largest `wᵢ·Lᵢ`, or `None` if some member has no declared constant.
    pub fn max_lipschitz(&self) -> Option<f64> {
        self.members
            .iter()
            .map(|(f, w)| f.lipschitz().map(|l| l * w))
            .try_fold(0.0f64, |acc, l| l.map(|l| acc.max(l)))
    }

    /// Tensor cubic-hat bumps centred on a regular grid. See [`BumpGrid`].
    pub fn bump_grid(grid: &BumpGrid) -> Result<Self> {
        grid.build()
    }
}

/// Grid of tensor bumps `a·h((s−c₀)/r₀)·Π h((xᵢ−cᵢ)/rᵢ)` with `h` the
/// cubic hat. Centres sit at cell midpoints; each radius is one cell
/// width, so neighbouring supports overlap. The amplitude `a` is the
/// largest value ≤ 1 keeping the Euclidean Lipschitz constant below
/// `lipschitz_cap`.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpGrid {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub cells: usize,
    pub mark_lower: f64,
    pub mark_upper: f64,
    pub mark_cells: usize,
    pub lipschitz_cap: f64,
}

impl BumpGrid {
    /// Cube `[c − half_width, c + half_width)` around `centre`, marks in
    /// `(0, mark_upper]`, four cells per axis, Lipschitz constant ≤ 1.
    pub fn around(centre: &[f64], half_width: f64, mark_upper: f64) -> Self {
        Self {
            lower: centre.iter().map(|c| c - half_width).collect(),
            upper: centre.iter().map(|c| c + half_width).collect(),
            cells: 4,
            mark_lower: 0.0,
            mark_upper,
            mark_cells: 4,
            lipschitz_cap: 1.0,
        }
    }

    fn build(&self) -> Result<TestFamily> {
        let bounds = Window::new(self.lower.clone(), self.upper.clone())?;
        if !bounds.is_bounded() || !self.mark_upper.is_finite() {
            return Err(Error::UnboundedWindow);
        }
        if self.cells == 0 || self.mark_cells == 0 {
            return Err(Error::InvalidArgument("grid needs at least one cell per axis".into()));
        }
        if !(self.mark_lower >= 0.0 && self.mark_upper > self.mark_lower) {
            return Err(Error::InvalidArgument("mark range must satisfy 0 <= lo < hi".into()));
        }
        if !(self.lipschitz_cap > 0.0 && self.lipschitz_cap.is_finite()) {
            return Err(Error::InvalidArgument("Lipschitz cap must be positive".into()));
        }
        let d = bounds.dim();
        let widths: Vec<f64> = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| (hi - lo) / self.cells as f64)
            .collect();
        let mark_width = (self.mark_upper - self.mark_lower) / self.mark_cells as f64;
        let raw_lipschitz = CUBIC_HAT_LIPSCHITZ
            * (widths.iter().map(|r| r.powi(-2)).sum::<f64>() + mark_width.powi(-2)).sqrt();
        let amplitude = (self.lipschitz_cap / raw_lipschitz).min(1.0);

        let mut functions = Vec::new();
        let total = self.cells.pow(d as u32);
        for mark_cell in 0..self.mark_cells {
            let sc = self.mark_lower + (mark_cell as f64 + 0.5) * mark_width;
            for index in 0..total {
                let mut rest = index;
                let centre: Vec<f64> = (0..d)
                    .map(|axis| {
                        let k = rest % self.cells;
                        rest /= self.cells;
                        self.lower[axis] + (k as f64 + 0.5) * widths[axis]
                    })
                    .collect();
                let support = Window::new(
                    centre.iter().zip(&widths).map(|(c, r)| c - r).collect(),
                    centre.iter().zip(&widths).map(|(c, r)| c + r).collect(),
                )?
                .with_marks((sc - mark_width).max(0.0), sc + mark_width)?;
                let widths = widths.clone();
                functions.push(TestFunction::on_marked(
                    support,
                    Some(amplitude * raw_lipschitz),
                    move |s, x| {
                        let spatial: f64 = x
                            .iter()
                            .zip(centre.iter().zip(&widths))
                            .map(|(v, (c, r))| cubic_hat((v - c) / r))
                            .product();
                        amplitude * cubic_hat((s - sc) / mark_width) * spatial
                    },
                )?);
            }
        }
        TestFamily::uniform(functions)
    }
}

/// `max_i wᵢ |⟨fᵢ, γ₁⟩ − ⟨fᵢ, γ₂⟩|`.
pub fn vague_discrepancy(
    gamma1: &Configuration,
    gamma2: &Configuration,
    family: &TestFamily,
) -> Result<f64> {
    check_dim(gamma1.dim(), gamma2.dim())?;
    check_dim(family.dim(), gamma1.dim())?;
    family
        .members
        .par_iter()
        .map(|(f, w)| Ok(w * (gamma1.pair(f)? - gamma2.pair(f)?).abs()))
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

/// Discrepancy on the cone pulled back through the reflection map.
pub fn cone_discrepancy(
    eta1: &DiscreteMeasure,
    eta2: &DiscreteMeasure,
    family: &TestFamily,
) -> Result<f64> {
    vague_discrepancy(
        PlatoConfiguration::reflect_inverse(eta1).configuration(),
        PlatoConfiguration::reflect_inverse(eta2).configuration(),
        family,
    )
}

fn merging_check(x0: &[f64], s1: f64, s2: f64) -> Result<()> {
    if x0.is_empty() {
        return Err(Error::InvalidArgument("x0 must have dimension >= 1".into()));
    }
    check_mark(s1)?;
    check_mark(s2)?;
    if s1 == s2 {
        return Err(Error::EqualMarks(s1));
    }
    Ok(())
}

/// `γ⁽ⁿ⁾ = {(s₁, x₀ + e₁/n), (s₂, x₀ − e₁/n)}`: two points approaching `x₀`
/// from opposite sides along the first axis. Every term is pinpointing;
/// the limit [`merging_limit`] is not.
pub fn merging_sequence(x0: &[f64], s1: f64, s2: f64, n: usize) -> Result<Configuration> {
    merging_check(x0, s1, s2)?;
    if n == 0 {
        return Err(Error::InvalidArgument("sequence index starts at 1".into()));
    }
    let step = 1.0 / n as f64;
    let mut plus = x0.to_vec();
    let mut minus = x0.to_vec();
    plus[0] += step;
    minus[0] -= step;
    Configuration::new(
        vec![MarkedPoint::new(s1, plus)?, MarkedPoint::new(s2, minus)?],
        x0.len(),
    )
}

/// `{(s₁, x₀), (s₂, x₀)}`, a configuration outside the Plato space.
pub fn merging_limit(x0: &[f64], s1: f64, s2: f64) -> Result<Configuration> {
    merging_check(x0, s1, s2)?;
    Configuration::new(
        vec![MarkedPoint::new(s1, x0.to_vec())?, MarkedPoint::new(s2, x0.to_vec())?],
        x0.len(),
    )
}

/// Outcome of [`check_convergence`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// Evidence consistent with convergence under the family: final
    /// discrepancy below tolerance and non-increasing over the last quartile.
    pub converged: bool,
    /// Discrepancy at `n = 1, …, n_max`.
    pub discrepancies: Vec<f64>,
}

/// Evaluates `d_F(sequence(n), limit)` for `n = 1..=n_max`.
pub fn check_convergence<S>(
    sequence: S,
    limit: &Configuration,
    family: &TestFamily,
    tol: f64,
    n_max: usize,
) -> Result<ConvergenceReport>
where
    S: Fn(usize) -> Result<Configuration>,
{
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be >= 1".into()));
    }
    let discrepancies = (1..=n_max)
        .map(|n| vague_discrepancy(&sequence(n)?, limit, family))
        .collect::<Result<Vec<_>>>()?;
    let tail = &discrepancies[n_max - (n_max / 4).max(1)..];
    let monotone = tail.windows(2).all(|w| w[1] <= w[0]);
    let converged = monotone && discrepancies[n_max - 1] < tol;
    Ok(ConvergenceReport {
        converged,
        discrepancies,
    })
}
