//! Finite configurations over the marked space `Y = ℝ*₊ × ℝᵈ`.
//!
//! A [`Configuration`] is a set of [`MarkedPoint`]s stored in canonical
//! lexicographic order `(x₁, …, x_d, s)`, which picks one representative of
//! each orbit of the permutation action on ordered tuples. Point identity
//! is bitwise: two coordinates are equal iff their bit patterns are.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::function::{Domain, TestFunction};
use crate::window::{check_dim, Window};

/// A point in `ℝᵈ` with finite coordinates, totally ordered
/// lexicographically by `f64::total_cmp`.
#[derive(Debug, Clone)]
pub struct Position(Vec<f64>);

impl Position {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if let Some(&value) = coords.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFiniteCoordinate { value });
        }
        Ok(Self(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Ord for Position {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .unwrap_or_else(|| self.0.len().cmp(&other.0.len()))
    }
}

impl PartialOrd for Position {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Position {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for Position {}

/// Atom `(s, x)` of a configuration over `Y`.
#[derive(Debug, Clone)]
pub struct MarkedPoint {
    mark: f64,
    position: Position,
}

impl MarkedPoint {
    pub fn new(mark: f64, coords: Vec<f64>) -> Result<Self> {
        check_mark(mark)?;
        Ok(Self {
            mark,
            position: Position::new(coords)?,
        })
    }

    pub(crate) fn from_parts(mark: f64, position: Position) -> Self {
        Self { mark, position }
    }

    pub fn mark(&self) -> f64 {
        self.mark
    }

    pub fn position(&self) -> &Position {
        &self.position
    }

    pub fn coords(&self) -> &[f64] {
        self.position.coords()
    }
}

impl Ord for MarkedPoint {
    fn cmp(&self, other: &Self) -> Ordering {
        self.position
            .cmp(&other.position)
            .then_with(|| self.mark.total_cmp(&other.mark))
    }
}

impl PartialOrd for MarkedPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for MarkedPoint {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for MarkedPoint {}

pub(crate) fn check_mark(mark: f64) -> Result<()> {
    if mark > 0.0 && mark.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveMark { mark })
    }
}

/// A finite configuration `γ ∈ Γ₀(Y)`, or a windowed view of an infinite one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    dim: usize,
    points: Vec<MarkedPoint>,
}

impl Configuration {
    /// Builds a configuration, sorting into canonical order and dropping
    /// exact duplicates.
    pub fn new(mut points: Vec<MarkedPoint>, dim: usize) -> Result<Self> {
        check_dimension(dim)?;
        for p in &points {
            check_dim(dim, p.position.dim())?;
        }
        points.sort_unstable();
        points.dedup();
        Ok(Self { dim, points })
    }

    /// Convenience constructor from `(mark, coords)` pairs.
    pub fn from_pairs<I>(pairs: I, dim: usize) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, Vec<f64>)>,
    {
        let points = pairs
            .into_iter()
            .map(|(s, x)| MarkedPoint::new(s, x))
            .collect::<Result<Vec<_>>>()?;
        Self::new(points, dim)
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            points: Vec::new(),
        }
    }

    /// Wraps points already known to be sorted, deduplicated and of the
    /// right dimension.
    pub(crate) fn from_sorted_unchecked(points: Vec<MarkedPoint>, dim: usize) -> Self {
        debug_assert!(points.windows(2).all(|w| w[0] < w[1]));
        Self { dim, points }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points in canonical order, the orbit representative of the
    /// permutation action.
    pub fn canonical_order(&self) -> &[MarkedPoint] {
        &self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MarkedPoint> {
        self.points.iter()
    }

    pub fn into_points(self) -> Vec<MarkedPoint> {
        self.points
    }

    /// `N_Λ(γ) = |γ ∩ Λ|`.
    pub fn count_in_window(&self, window: &Window) -> Result<usize> {
        check_dim(self.dim, window.dim())?;
        Ok(self
            .points
            .iter()
            .filter(|p| window.contains(p.mark, p.coords()))
            .count())
    }

    /// Projection `γ ↦ γ ∩ Λ`.
    pub fn restrict(&self, window: &Window) -> Result<Configuration> {
        check_dim(self.dim, window.dim())?;
        let points = self
            .points
            .iter()
            .filter(|p| window.contains(p.mark, p.coords()))
            .cloned()
            .collect();
        Ok(Self::from_sorted_unchecked(points, self.dim))
    }

    /// The `n` with `γ ∩ Λ ∈ Γ⁽ⁿ⁾(Λ)` in the disjoint decomposition of
    /// `Γ(Λ)` by cardinality.
    pub fn n_point_class(&self, window: &Window) -> Result<usize> {
        Ok(self.restrict(window)?.len())
    }

    /// `⟨f, γ⟩ = Σ_{y∈γ} f(y)`, summed sequentially in canonical order.
    pub fn pair(&self, f: &TestFunction) -> Result<f64> {
        f.require(Domain::Marked, self.dim)?;
        let mut total = 0.0;
        for p in &self.points {
            let v = f.eval_marked(p.mark, p.coords());
            if !v.is_finite() {
                return Err(Error::NonFiniteValue { value: v });
            }
            total += v;
        }
        Ok(total)
    }

    /// Local mass `γ(Λ) = Σ_{(s,x)∈γ} s·1_Λ(x)`. Only the spatial part of
    /// `window` is used.
    pub fn local_mass(&self, window: &Window) -> Result<f64> {
        check_dim(self.dim, window.dim())?;
        Ok(self
            .points
            .iter()
            .filter(|p| window.contains_position(p.coords()))
            .fold(0.0, |acc, p| acc + p.mark))
    }

    /// True iff no two points share a position.
    pub fn is_pinpointing(&self) -> bool {
        self.first_shared_position().is_none()
    }

    /// First position (in canonical order) carried by two or more points.
    pub fn first_shared_position(&self) -> Option<&Position> {
        // canonical order sorts by position first, so collisions are adjacent
        self.points
            .windows(2)
            .find(|w| w[0].position == w[1].position)
            .map(|w| &w[0].position)
    }

    /// Union of two configurations of the same dimension.
    pub fn union(&self, other: &Configuration) -> Result<Configuration> {
        check_dim(self.dim, other.dim)?;
        let mut points = self.points.clone();
        points.extend(other.points.iter().cloned());
        Self::new(points, self.dim)
    }

    /// True iff every point of `self` is a point of `other`.
    pub fn is_subset(&self, other: &Configuration) -> bool {
        self.dim == other.dim
            && self
                .points
                .iter()
                .all(|p| other.points.binary_search(p).is_ok())
    }
}

impl<'a> IntoIterator for &'a Configuration {
    type Item = &'a MarkedPoint;
    type IntoIter = std::slice::Iter<'a, MarkedPoint>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

pub(crate) fn check_dimension(dim: usize) -> Result<()> {
    if dim == 0 {
        Err(Error::InvalidArgument("dimension must be >= 1".into()))
    } else {
        Ok(())
    }
}
