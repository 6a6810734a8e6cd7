//! Half-open boxes standing in for relatively compact Borel sets.

use crate::error::{Error, Result};

/// Mark interval `(lo, hi]` with `0 <= lo < hi <= inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkInterval {
    lo: f64,
    hi: f64,
}

impl MarkInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo < 0.0 || lo.is_infinite() || hi <= lo {
            return Err(Error::InvalidWindow(format!(
                "mark interval ({lo}, {hi}] must satisfy 0 <= lo < hi"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn contains(&self, mark: f64) -> bool {
        mark > self.lo && mark <= self.hi
    }
}

/// Axis-aligned box `Π [lower_i, upper_i)` in `ℝᵈ`, optionally extended
/// by a mark interval to a box in `ℝ*₊ × ℝᵈ`.
///
/// Bounds may be infinite (a window is then unbounded and rejected by the
/// samplers); NaN bounds are never accepted.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    lower: Vec<f64>,
    upper: Vec<f64>,
    marks: Option<MarkInterval>,
}

impl Window {
    /// Box with `lower[i] < upper[i]` on every axis.
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        Self::build(lower, upper, false)
    }

    /// Box allowing `lower[i] == upper[i]` (zero-width faces).
    pub fn degenerate(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        Self::build(lower, upper, true)
    }

    /// Parses the flat `lo1,hi1,lo2,hi2,…` layout used on the command line.
    pub fn from_bounds(bounds: &[f64]) -> Result<Self> {
        if bounds.is_empty() || bounds.len() % 2 != 0 {
            return Err(Error::InvalidWindow(format!(
                "expected an even, nonzero number of bounds, got {}",
                bounds.len()
            )));
        }
        let (lower, upper) = bounds.chunks(2).map(|c| (c[0], c[1])).unzip();
        Self::new(lower, upper)
    }

    /// The whole of `ℝᵈ`.
    pub fn everywhere(dim: usize) -> Self {
        Self {
            lower: vec![f64::NEG_INFINITY; dim],
            upper: vec![f64::INFINITY; dim],
            marks: None,
        }
    }

    fn build(lower: Vec<f64>, upper: Vec<f64>, allow_flat: bool) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidWindow("window must have dimension >= 1".into()));
        }
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        for (i, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            let ordered = if allow_flat { lo <= hi } else { lo < hi };
            if lo.is_nan() || hi.is_nan() || !ordered {
                return Err(Error::InvalidWindow(format!(
                    "axis {i}: bounds [{lo}, {hi}) are not ordered"
                )));
            }
        }
        Ok(Self {
            lower,
            upper,
            marks: None,
        })
    }

    /// Restricts marks to `(lo, hi]`.
    pub fn with_marks(mut self, lo: f64, hi: f64) -> Result<Self> {
        self.marks = Some(MarkInterval::new(lo, hi)?);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn marks(&self) -> Option<MarkInterval> {
        self.marks
    }

    pub fn is_bounded(&self) -> bool {
        self.lower.iter().chain(&self.upper).all(|v| v.is_finite())
    }

    /// Lebesgue volume of the spatial box (ignores the mark interval).
    pub fn volume(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| hi - lo)
            .product()
    }

    #[inline]
    pub fn contains_position(&self, x: &[f64]) -> bool {
        x.len() == self.lower.len()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&lo, &hi))| v >= lo && v < hi)
    }

    /// Membership of a marked point: position in the box and, when a mark
    /// interval is set, mark in it.
    #[inline]
    pub fn contains(&self, mark: f64, x: &[f64]) -> bool {
        self.marks.is_none_or(|m| m.contains(mark)) && self.contains_position(x)
    }

    pub fn contains_window(&self, other: &Window) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        let spatial = self
            .lower
            .iter()
            .zip(&self.upper)
            .zip(other.lower.iter().zip(&other.upper))
            .all(|((lo, hi), (olo, ohi))| olo >= lo && ohi <= hi);
        let marks = match (self.marks, other.marks) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(m), Some(o)) => o.lo >= m.lo && o.hi <= m.hi,
        };
        spatial && marks
    }

    /// Smallest window containing both arguments.
    pub fn hull(&self, other: &Window) -> Result<Window> {
        check_dim(self.dim(), other.dim())?;
        let lower = self.lower.iter().zip(&other.lower).map(|(a, b)| a.min(*b)).collect();
        let upper = self.upper.iter().zip(&other.upper).map(|(a, b)| a.max(*b)).collect();
        let marks = match (self.marks, other.marks) {
            (Some(a), Some(b)) => Some(MarkInterval {
                lo: a.lo.min(b.lo),
                hi: a.hi.max(b.hi),
            }),
            _ => None,
        };
        Ok(Window { lower, upper, marks })
    }

    /// Splits the first axis into `pieces` disjoint half-open slabs that
    /// tile the window exactly (the last slab ends at `upper[0]`).
    pub fn tile_first_axis(&self, pieces: usize) -> Result<Vec<Window>> {
        if pieces == 0 {
            return Err(Error::InvalidArgument("pieces must be >= 1".into()));
        }
        if !self.is_bounded() {
            return Err(Error::UnboundedWindow);
        }
        let (lo, hi) = (self.lower[0], self.upper[0]);
        let cut = |k: usize| {
            if k == pieces {
                hi
            } else {
                lo + (hi - lo) * (k as f64 / pieces as f64)
            }
        };
        (0..pieces)
            .map(|k| {
                let mut lower = self.lower.clone();
                let mut upper = self.upper.clone();
                lower[0] = cut(k);
                upper[0] = cut(k + 1);
                Ok(Window {
                    lower,
                    upper,
                    marks: self.marks,
                })
            })
            .collect()
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
