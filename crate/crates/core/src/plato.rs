//! Pinpointing configurations with finite local mass, and the reflection
//! map `R: Σ δ_{(s,x)} ↦ Σ s δ_x` onto the cone.
//!
//! Finite local mass is automatic for the finite configurations stored
//! here; samplers account for the part of an infinite configuration they
//! do not materialize through their truncation reports.

use std::collections::BTreeMap;

use crate::cone::DiscreteMeasure;
use crate::configuration::{Configuration, MarkedPoint};
use crate::error::{Error, Result};
use crate::window::Window;

/// A configuration over `ℝ*₊ × ℝᵈ` in which no two points share a position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlatoConfiguration {
    inner: Configuration,
}

impl PlatoConfiguration {
    pub fn empty(dim: usize) -> Self {
        Self {
            inner: Configuration::empty(dim),
        }
    }

    pub fn configuration(&self) -> &Configuration {
        &self.inner
    }

    pub fn into_configuration(self) -> Configuration {
        self.inner
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    pub fn len(&self) -> usize {
        self.inner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.is_empty()
    }

    pub fn local_mass(&self, window: &Window) -> Result<f64> {
        self.inner.local_mass(window)
    }

    /// `R(γ)`: each `(s, x)` becomes an atom of weight `s` at `x`.
    pub fn reflect(&self) -> DiscreteMeasure {
        let atoms: BTreeMap<_, _> = self
            .inner
            .iter()
            .map(|p| (p.position().clone(), p.mark()))
            .collect();
        debug_assert_eq!(atoms.len(), self.inner.len());
        DiscreteMeasure::from_map_unchecked(atoms, self.dim())
    }

    /// `R⁻¹(η) = {(s_x, x) : x ∈ τ(η)}`.
    pub fn reflect_inverse(eta: &DiscreteMeasure) -> PlatoConfiguration {
        // BTreeMap order on positions is the canonical configuration order
        // because positions are unique.
        let points = eta
            .atoms()
            .map(|(x, w)| MarkedPoint::from_parts(w, x.clone()))
            .collect();
        Self {
            inner: Configuration::from_sorted_unchecked(points, eta.dim()),
        }
    }
}

impl TryFrom<Configuration> for PlatoConfiguration {
    type Error = Error;

    /// Fails with the first shared position in canonical order.
    fn try_from(gamma: Configuration) -> Result<Self> {
        if let Some(x) = gamma.first_shared_position() {
            return Err(Error::NotPinpointing {
                position: x.coords().to_vec(),
            });
        }
        Ok(Self { inner: gamma })
    }
}

impl From<&DiscreteMeasure> for PlatoConfiguration {
    fn from(eta: &DiscreteMeasure) -> Self {
        Self::reflect_inverse(eta)
    }
}

impl From<&PlatoConfiguration> for DiscreteMeasure {
    fn from(gamma: &PlatoConfiguration) -> Self {
        gamma.reflect()
    }
}

/// Checks membership in the Plato space and wraps the configuration.
pub fn to_plato(gamma: Configuration) -> Result<PlatoConfiguration> {
    PlatoConfiguration::try_from(gamma)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(pairs: &[(f64, f64)]) -> Configuration {
        Configuration::from_pairs(pairs.iter().map(|&(s, x)| (s, vec![x])), 1).unwrap()
    }

    #[test]
    fn empty_round_trip() {
        let p = to_plato(Configuration::empty(2)).unwrap();
        assert!(p.is_empty());
        let eta = p.reflect();
        assert!(eta.is_zero());
        assert_eq!(PlatoConfiguration::reflect_inverse(&eta), p);
    }

    #[test]
    fn rejects_shared_position() {
        let err = to_plato(cfg(&[(1.0, 0.0), (2.0, 0.0)])).unwrap_err();
        assert_eq!(err, Error::NotPinpointing { position: vec![0.0] });
    }

    #[test]
    fn reports_first_collision_in_canonical_order() {
        let err = to_plato(cfg(&[(1.0, 3.0), (2.0, 3.0), (1.0, -2.0), (5.0, -2.0)])).unwrap_err();
        assert_eq!(err, Error::NotPinpointing { position: vec![-2.0] });
    }

    #[test]
    fn reflect_example() {
        let p = to_plato(cfg(&[(2.0, 1.0), (0.5, -1.0)])).unwrap();
        let eta = p.reflect();
        let expected = DiscreteMeasure::new(vec![(2.0, vec![1.0]), (0.5, vec![-1.0])], 1).unwrap();
        assert_eq!(eta, expected);
        assert_eq!(PlatoConfiguration::reflect_inverse(&expected), p);
    }

    #[test]
    fn reflect_preserves_cardinality() {
        let g = Configuration::from_pairs(
            (0..10_000).map(|i| (1.0 + i as f64, vec![i as f64 * 0.5])),
            1,
        )
        .unwrap();
        let p = to_plato(g).unwrap();
        assert_eq!(p.reflect().len(), 10_000);
    }
}
