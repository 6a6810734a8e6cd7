//! The cone `K(ℝᵈ)` of positive discrete Radon measures `η = Σ sᵢ δ_{xᵢ}`.
//!
//! Only finitely supported measures are represented. No distance is defined
//! here; discrepancies between measures are computed by pulling back through
//! the reflection map (see [`crate::topology::cone_discrepancy`]).

use std::collections::BTreeMap;

use crate::configuration::{check_dimension, Configuration, Position};
use crate::error::{Error, Result};
use crate::function::{Domain, TestFunction};
use crate::plato::PlatoConfiguration;
use crate::window::{check_dim, Window};

/// Every represented measure has finite support, so `ξ ⋐ η` (finite
/// subordination) coincides with `ξ ⊂ η`.
pub const SUBORDINATION_IS_FINITE: bool = true;

/// Element of the cone: positions mapped to strictly positive weights.
/// The empty map is the zero measure.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    atoms: BTreeMap<Position, f64>,
}

impl DiscreteMeasure {
    /// Builds `Σ wᵢ δ_{xᵢ}` from `(weight, coords)` pairs. Atoms at
    /// bitwise-identical positions are merged by adding their weights
    /// (in ascending weight order, so the result ignores input order).
    pub fn new<I>(atoms: I, dim: usize) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, Vec<f64>)>,
    {
        check_dimension(dim)?;
        let mut raw = Vec::new();
        for (w, x) in atoms {
            check_weight(w)?;
            check_dim(dim, x.len())?;
            raw.push((Position::new(x)?, w));
        }
        raw.sort_unstable_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut map = BTreeMap::new();
        for (x, w) in raw {
            let merged = map.entry(x).or_insert(0.0);
            *merged += w;
            check_weight(*merged)?;
        }
        Ok(Self { dim, atoms: map })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            atoms: BTreeMap::new(),
        }
    }

    pub(crate) fn from_map_unchecked(atoms: BTreeMap<Position, f64>, dim: usize) -> Self {
        Self { dim, atoms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of support points.
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `τ(η)`, in canonical order.
    pub fn support(&self) -> impl ExactSizeIterator<Item = &Position> + '_ {
        self.atoms.keys()
    }

    /// `(position, weight)` pairs in canonical order.
    pub fn atoms(&self) -> impl ExactSizeIterator<Item = (&Position, f64)> + '_ {
        self.atoms.iter().map(|(x, &w)| (x, w))
    }

    /// `s_x(η)`, or 0 off the support.
    pub fn weight_at(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        let key = Position::new(x.to_vec())?;
        Ok(self.atoms.get(&key).copied().unwrap_or(0.0))
    }

    /// `ξ ⊂ η`: every atom of `self` is an atom of `other` with the same
    /// weight (bitwise).
    pub fn is_sub_measure(&self, other: &DiscreteMeasure) -> Result<bool> {
        check_dim(self.dim, other.dim)?;
        Ok(self.atoms.iter().all(|(x, w)| {
            other
                .atoms
                .get(x)
                .is_some_and(|v| v.to_bits() == w.to_bits())
        }))
    }

    /// `⟨f, η⟩ = Σ_{x∈τ(η)} s_x f(x)` for a spatial test function.
    pub fn pair(&self, f: &TestFunction) -> Result<f64> {
        f.require(Domain::Space, self.dim)?;
        let mut total = 0.0;
        for (x, &w) in &self.atoms {
            let v = f.eval_space(x.coords());
            if !v.is_finite() {
                return Err(Error::NonFiniteValue { value: v });
            }
            total += w * v;
        }
        Ok(total)
    }

    /// `⟨⟨f, η⟩⟩ = ⟨f, R⁻¹η⟩` for a test function on the marked space.
    pub fn double_pair(&self, f: &TestFunction) -> Result<f64> {
        PlatoConfiguration::reflect_inverse(self).configuration().pair(f)
    }

    /// `η(Λ)`: total weight of atoms inside the spatial window.
    pub fn mass_in_window(&self, window: &Window) -> Result<f64> {
        check_dim(self.dim, window.dim())?;
        Ok(self
            .atoms
            .iter()
            .filter(|(x, _)| window.contains_position(x.coords()))
            .fold(0.0, |acc, (_, &w)| acc + w))
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.values().fold(0.0, |acc, &w| acc + w)
    }

    /// `c·η` for `c > 0`.
    pub fn scale(&self, c: f64) -> Result<DiscreteMeasure> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale must be positive, got {c}")));
        }
        let mut atoms = BTreeMap::new();
        for (x, &w) in &self.atoms {
            let scaled = c * w;
            check_weight(scaled)?;
            atoms.insert(x.clone(), scaled);
        }
        Ok(Self { dim: self.dim, atoms })
    }

    /// Restriction `η|_Λ` to a spatial window.
    pub fn restrict(&self, window: &Window) -> Result<DiscreteMeasure> {
        check_dim(self.dim, window.dim())?;
        let atoms = self
            .atoms
            .iter()
            .filter(|(x, _)| window.contains_position(x.coords()))
            .map(|(x, &w)| (x.clone(), w))
            .collect();
        Ok(Self { dim: self.dim, atoms })
    }

    /// Count of atoms with weight strictly above `threshold` in `window`.
    pub fn count_above(&self, window: &Window, threshold: f64) -> Result<usize> {
        check_dim(self.dim, window.dim())?;
        Ok(self
            .atoms
            .iter()
            .filter(|(x, &w)| w > threshold && window.contains_position(x.coords()))
            .count())
    }

    /// Reflection preimage, handy when a configuration view is wanted.
    pub fn to_configuration(&self) -> Configuration {
        PlatoConfiguration::reflect_inverse(self).into_configuration()
    }
}

pub(crate) fn check_weight(weight: f64) -> Result<()> {
    if weight > 0.0 && weight.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveWeight { weight })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eta() -> DiscreteMeasure {
        DiscreteMeasure::new(vec![(2.0, vec![1.0]), (0.5, vec![-1.0])], 1).unwrap()
    }

    #[test]
    fn construction_examples() {
        let zero = DiscreteMeasure::new(Vec::new(), 1).unwrap();
        assert!(zero.is_zero());
        let e = eta();
        assert_eq!(e.weight_at(&[1.0]).unwrap(), 2.0);
        assert_eq!(e.weight_at(&[-1.0]).unwrap(), 0.5);
        let merged = DiscreteMeasure::new(vec![(1.0, vec![0.0]), (2.0, vec![0.0])], 1).unwrap();
        assert_eq!(merged.weight_at(&[0.0]).unwrap(), 3.0);
        assert_eq!(merged.len(), 1);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            DiscreteMeasure::new(vec![(0.0, vec![0.0])], 1),
            Err(Error::NonPositiveWeight { weight: 0.0 })
        );
        assert!(DiscreteMeasure::new(vec![(-1.0, vec![0.0])], 1).is_err());
        assert!(matches!(
            DiscreteMeasure::new(vec![(1.0, vec![0.0, 1.0])], 1),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(DiscreteMeasure::new(vec![(f64::MAX, vec![0.0]), (f64::MAX, vec![0.0])], 1).is_err());
    }

    #[test]
    fn support_examples() {
        assert_eq!(DiscreteMeasure::zero(1).support().count(), 0);
        let keys: Vec<_> = eta().support().map(|x| x.coords()[0]).collect();
        assert_eq!(keys, vec![-1.0, 1.0]);
    }

    #[test]
    fn weight_lookup() {
        assert_eq!(eta().weight_at(&[7.0]).unwrap(), 0.0);
        assert_eq!(DiscreteMeasure::zero(2).weight_at(&[0.0, 0.0]).unwrap(), 0.0);
        assert!(eta().weight_at(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn subordination_examples() {
        let e = eta();
        assert!(DiscreteMeasure::zero(1).is_sub_measure(&e).unwrap());
        let xi = DiscreteMeasure::new(vec![(2.0, vec![1.0])], 1).unwrap();
        assert!(xi.is_sub_measure(&e).unwrap());
        let off = DiscreteMeasure::new(vec![(1.9, vec![1.0])], 1).unwrap();
        assert!(!off.is_sub_measure(&e).unwrap());
        assert!(!e.is_sub_measure(&xi).unwrap());
        assert!(xi.is_sub_measure(&DiscreteMeasure::zero(2)).is_err());
    }

    #[test]
    fn pairing_examples() {
        let everywhere = Window::new(vec![-10.0], vec![10.0]).unwrap();
        let g = TestFunction::on_space(everywhere.clone(), None, |x| {
            if x[0] == 1.0 {
                1.0
            } else if x[0] == -1.0 {
                0.5
            } else {
                0.0
            }
        })
        .unwrap();
        assert_eq!(DiscreteMeasure::zero(1).pair(&g).unwrap(), 0.0);
        assert_eq!(eta().pair(&g).unwrap(), 2.25);

        let one = TestFunction::constant(Domain::Space, everywhere.clone(), 1.0).unwrap();
        assert_eq!(eta().pair(&one).unwrap(), eta().mass_in_window(&everywhere).unwrap());

        let gg = g.clone();
        let f = TestFunction::on_marked(everywhere.clone(), None, move |s, x| s * gg.eval_space(x))
            .unwrap();
        assert_eq!(DiscreteMeasure::zero(1).double_pair(&f).unwrap(), 0.0);
        assert_eq!(eta().double_pair(&f).unwrap(), 2.25);

        let three = DiscreteMeasure::new(
            vec![(2.0, vec![1.0]), (0.5, vec![-1.0]), (9.0, vec![3.0])],
            1,
        )
        .unwrap();
        let ones = TestFunction::constant(Domain::Marked, everywhere, 1.0).unwrap();
        assert_eq!(three.double_pair(&ones).unwrap(), 3.0);
    }

    #[test]
    fn mass_examples() {
        let e = DiscreteMeasure::new(
            vec![(1.5, vec![0.2]), (0.25, vec![0.8]), (3.0, vec![5.0])],
            1,
        )
        .unwrap();
        let unit = Window::new(vec![0.0], vec![1.0]).unwrap();
        let wide = Window::new(vec![0.0], vec![10.0]).unwrap();
        assert_eq!(DiscreteMeasure::zero(1).mass_in_window(&unit).unwrap(), 0.0);
        assert_eq!(e.mass_in_window(&unit).unwrap(), 1.75);
        assert_eq!(e.mass_in_window(&wide).unwrap(), 4.75);
    }

    #[test]
    fn scaling_keeps_support() {
        let e = eta();
        let scaled = e.scale(3.0).unwrap();
        assert!(scaled.support().eq(e.support()));
        assert!(e.scale(0.0).is_err());
    }
}
