//! Seedable samplers for Poisson processes on `ℝ*₊ × ℝᵈ` and for Gamma
//! random measures on the cone.
//!
//! The Gamma measure with shape `θ` is the image under reflection of the
//! Poisson process with Lévy intensity `θ s⁻¹ e⁻ˢ ds ⊗ dx`. That intensity
//! has infinite mass near `s = 0`, so samples are truncated either at a mark
//! threshold `ε` or after a fixed number of largest jumps. Every sample
//! reports the expected mass it leaves out.
//!
//! Randomness comes from ChaCha20 keyed by the seed, with one stream per
//! role so that atom counts do not depend on how marks or positions are
//! drawn.

use std::fmt;
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::cone::DiscreteMeasure;
use crate::configuration::{Configuration, MarkedPoint, Position};
use crate::error::{Error, Result};
use crate::plato::to_plato;
use crate::quadrature;
use crate::stats::e1_unchecked;
use crate::window::Window;

/// RNG stream carrying Poisson counts.
pub const STREAM_COUNT: u64 = 0;
/// RNG stream carrying mark uniforms (arrival times for the Gamma samplers).
pub const STREAM_MARK: u64 = 1;
/// RNG stream carrying position uniforms.
pub const STREAM_POSITION: u64 = 2;

/// Relative tolerance of every numeric inversion.
pub const INVERSION_RTOL: f64 = 1e-12;
/// Iteration cap of every numeric inversion.
pub const INVERSION_MAX_ITER: usize = 200;

const DENSITY_PANELS: usize = 512;
const DENSITY_CONVERGENCE_RTOL: f64 = 1e-8;

fn stream(seed: u64, id: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Uniform on the open interval `(0, 1)`.
#[inline]
fn open_unit(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

fn uniform_position(window: &Window, rng: &mut impl RngCore) -> Position {
    let coords = window
        .lower()
        .iter()
        .zip(window.upper())
        .map(|(&lo, &hi)| {
            let v = lo + open_unit(rng) * (hi - lo);
            if v < hi {
                v
            } else {
                hi.next_down()
            }
        })
        .collect();
    Position::new(coords).expect("bounded window yields finite coordinates")
}

fn check_window(window: &Window) -> Result<f64> {
    if !window.is_bounded() {
        return Err(Error::UnboundedWindow);
    }
    let volume = window.volume();
    if !(volume > 0.0) || !volume.is_finite() {
        return Err(Error::DegenerateWindow);
    }
    Ok(volume)
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidTheta(theta))
    }
}

fn poisson_count(mean: f64, rng: &mut ChaCha20Rng) -> Result<u64> {
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean)
        .map_err(|e| Error::InvalidArgument(format!("Poisson({mean}): {e}")))?;
    Ok(dist.sample(rng) as u64)
}

/// A mark density on `(lo, hi]` (with `hi` possibly infinite) with finite
/// total mass, tabulated for inverse-CDF sampling.
#[derive(Clone)]
pub struct MarkDensity {
    lo: f64,
    hi: f64,
    density: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    cumulative: Vec<f64>,
}

impl fmt::Debug for MarkDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MarkDensity")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("mass", &self.mass())
            .finish_non_exhaustive()
    }
}

impl MarkDensity {
    /// Tabulates `density` on `(lo, hi]`. Fails with
    /// [`Error::NonIntegrableDensity`] when the integral is not finite and
    /// positive, the density is negative somewhere on the quadrature grid,
    /// or refining the grid changes the integral noticeably.
    pub fn new<F>(lo: f64, hi: f64, density: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(lo >= 0.0 && lo.is_finite()) || hi.is_nan() || hi <= lo {
            return Err(Error::InvalidArgument(format!(
                "mark density support ({lo}, {hi}] is invalid"
            )));
        }
        let mut out = Self {
            lo,
            hi,
            density: Arc::new(density),
            cumulative: Vec::new(),
        };
        let integrand = |t: f64| out.unit_integrand(t);
        let fine = quadrature::cumulative(&integrand, 0.0, 1.0, DENSITY_PANELS);
        let coarse = quadrature::cumulative(&integrand, 0.0, 1.0, DENSITY_PANELS / 2);
        let (mass, coarse_mass) = (fine[DENSITY_PANELS], coarse[DENSITY_PANELS / 2]);
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::NonIntegrableDensity(format!("integral evaluates to {mass}")));
        }
        if fine.windows(2).any(|w| !(w[1] >= w[0])) {
            return Err(Error::NonIntegrableDensity("density takes negative values".into()));
        }
        if (mass - coarse_mass).abs() > DENSITY_CONVERGENCE_RTOL * mass {
            return Err(Error::NonIntegrableDensity(format!(
                "quadrature does not converge ({coarse_mass} vs {mass})"
            )));
        }
        out.cumulative = fine;
        Ok(out)
    }

    /// `e⁻ˢ` on `(0, ∞)`, total mass 1.
    pub fn exponential() -> Self {
        Self::new(0.0, f64::INFINITY, |s: f64| (-s).exp()).expect("exponential density is integrable")
    }

    pub fn mass(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(f64::NAN)
    }

    /// Maps the unit interval onto the support.
    #[inline]
    fn to_mark(&self, t: f64) -> f64 {
        if self.hi.is_infinite() {
            self.lo + t / (1.0 - t)
        } else {
            self.lo + (self.hi - self.lo) * t
        }
    }

    #[inline]
    fn unit_integrand(&self, t: f64) -> f64 {
        let s = self.to_mark(t);
        if self.hi.is_infinite() {
            let j = 1.0 - t;
            (self.density)(s) / (j * j)
        } else {
            (self.density)(s) * (self.hi - self.lo)
        }
    }

    /// Inverse of the normalized CDF, `u ∈ (0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let target = u.clamp(0.0, 1.0) * self.mass();
        let panels = self.cumulative.len() - 1;
        let h = 1.0 / panels as f64;
        let k = self
            .cumulative
            .partition_point(|&c| c <= target)
            .saturating_sub(1)
            .min(panels - 1);
        let (mut a, mut b) = (k as f64 * h, (k + 1) as f64 * h);
        let base = self.cumulative[k];
        let t0 = a;
        let integrand = |t: f64| self.unit_integrand(t);
        for _ in 0..INVERSION_MAX_ITER {
            let mid = 0.5 * (a + b);
            if base + quadrature::gauss_legendre(&integrand, t0, mid) < target {
                a = mid;
            } else {
                b = mid;
            }
            if b - a <= INVERSION_RTOL * b {
                break;
            }
        }
        let s = self.to_mark(0.5 * (a + b));
        if s > self.lo {
            s.min(self.hi)
        } else {
            self.lo.next_up()
        }
    }
}

/// Intensity of a Poisson process on `ℝ*₊ × ℝᵈ`.
#[derive(Debug, Clone)]
pub enum LevySpec {
    /// `θ s⁻¹ e⁻ˢ ds ⊗ dx`.
    GammaLevy { theta: f64 },
    /// `spatial_rate · mark_density(s) ds ⊗ dx`.
    FiniteProduct {
        mark_density: MarkDensity,
        spatial_rate: f64,
    },
}

impl LevySpec {
    pub fn gamma(theta: f64) -> Result<Self> {
        check_theta(theta)?;
        Ok(Self::GammaLevy { theta })
    }

    pub fn finite_product(mark_density: MarkDensity, spatial_rate: f64) -> Result<Self> {
        if !(spatial_rate > 0.0 && spatial_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "spatial rate must be positive, got {spatial_rate}"
            )));
        }
        Ok(Self::FiniteProduct {
            mark_density,
            spatial_rate,
        })
    }

    /// Intensity mass per unit volume, `None` when infinite.
    pub fn total_mass(&self) -> Option<f64> {
        match self {
            Self::GammaLevy { .. } => None,
            Self::FiniteProduct {
                mark_density,
                spatial_rate,
            } => Some(spatial_rate * mark_density.mass()),
        }
    }
}

/// Bookkeeping attached to every sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub seed: u64,
    pub epsilon: Option<f64>,
    pub expected_discarded_mass: f64,
    pub atom_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoissonSample {
    pub configuration: Configuration,
    pub report: SampleReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaSample {
    pub measure: DiscreteMeasure,
    pub report: SampleReport,
}

/// Poisson process with a finite product intensity, restricted to `window`.
pub fn sample_poisson(spec: &LevySpec, window: &Window, seed: u64) -> Result<PoissonSample> {
    let LevySpec::FiniteProduct {
        mark_density,
        spatial_rate,
    } = spec
    else {
        return Err(Error::InvalidArgument(
            "sample_poisson needs a finite intensity".into(),
        ));
    };
    let volume = check_window(window)?;
    let mean = spatial_rate * mark_density.mass() * volume;
    let n = poisson_count(mean, &mut stream(seed, STREAM_COUNT))?;
    let mut marks = stream(seed, STREAM_MARK);
    let mut positions = stream(seed, STREAM_POSITION);
    let points = (0..n)
        .map(|_| {
            let s = mark_density.quantile(open_unit(&mut marks));
            MarkedPoint::from_parts(s, uniform_position(window, &mut positions))
        })
        .collect();
    let configuration = Configuration::new(points, window.dim())?;
    Ok(PoissonSample {
        report: SampleReport {
            seed,
            epsilon: None,
            expected_discarded_mass: 0.0,
            atom_count: configuration.len(),
        },
        configuration,
    })
}

/// Solves `E₁(s) = level` for `s` by bisection on `ln s`. Returns `None`
/// when the solution is below the smallest normal double.
pub fn inverse_e1(level: f64) -> Option<f64> {
    const LN_LO: f64 = -690.0;
    const LN_HI: f64 = 6.6;
    if !(level > 0.0) {
        return None;
    }
    if level >= e1_unchecked(LN_LO.exp()) {
        return None;
    }
    let (mut a, mut b) = (LN_LO, LN_HI);
    for _ in 0..INVERSION_MAX_ITER {
        let mid = 0.5 * (a + b);
        // E₁ is decreasing
        if e1_unchecked(mid.exp()) > level {
            a = mid;
        } else {
            b = mid;
        }
        // |Δ ln s| bounds the relative error in s
        if b - a <= INVERSION_RTOL {
            break;
        }
    }
    Some((0.5 * (a + b)).exp())
}

/// `θ·volume·(1 − e⁻ᵉ)`: expected total mark of the atoms with mark ≤ ε.
pub fn expected_truncation_error(theta: f64, volume: f64, epsilon: f64) -> Result<f64> {
    for (name, v) in [("theta", theta), ("volume", volume), ("epsilon", epsilon)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(theta * volume * -(-epsilon).exp_m1())
}

/// Gamma random measure on `window`, truncated to marks above `epsilon`.
///
/// The atoms of mark above `ε` form a Poisson process; the tail map
/// `T(s) = θ·vol·E₁(s)` sends them to a unit-rate Poisson process on
/// `[0, T(ε))`. That process is built one unit block at a time (Poisson(1)
/// arrivals per block, uniform within it), and each arrival `t` becomes
/// the mark `T⁻¹(t)`. Runs with the same seed and a smaller `ε` therefore
/// contain every atom of runs with a larger one.
pub fn sample_gamma(theta: f64, window: &Window, epsilon: f64, seed: u64) -> Result<GammaSample> {
    check_theta(theta)?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    let volume = check_window(window)?;
    let scale = theta * volume;
    let horizon = scale * e1_unchecked(epsilon);
    let blocks = horizon.ceil() as u64;

    let mut counts = stream(seed, STREAM_COUNT);
    let mut arrivals = stream(seed, STREAM_MARK);
    let mut positions = stream(seed, STREAM_POSITION);
    let mut points = Vec::new();
    for block in 0..blocks {
        for _ in 0..poisson_count(1.0, &mut counts)? {
            let t = block as f64 + open_unit(&mut arrivals);
            // positions are drawn for every arrival to keep streams aligned
            let x = uniform_position(window, &mut positions);
            if t < horizon {
                let s = inverse_e1(t / scale)
                    .ok_or_else(|| Error::InvalidArgument(format!("mark underflow at t = {t}")))?
                    .max(epsilon.next_up());
                points.push(MarkedPoint::from_parts(s, x));
            }
        }
    }
    let plato = to_plato(Configuration::new(points, window.dim())?)?;
    let measure = plato.reflect();
    Ok(GammaSample {
        report: SampleReport {
            seed,
            epsilon: Some(epsilon),
            expected_discarded_mass: expected_truncation_error(theta, volume, epsilon)?,
            atom_count: measure.len(),
        },
        measure,
    })
}

/// Gamma random measure from its `n_jumps` largest atoms, generated in
/// decreasing order as `T⁻¹(Γ_k)` for the arrival times `Γ_k` of a
/// unit-rate Poisson process.
///
/// Stops early if a mark would fall below the smallest normal double; the
/// report's `atom_count` then is smaller than `n_jumps`.
pub fn sample_gamma_ordered(
    theta: f64,
    window: &Window,
    n_jumps: usize,
    seed: u64,
) -> Result<GammaSample> {
    check_theta(theta)?;
    let volume = check_window(window)?;
    if n_jumps == 0 {
        return Err(Error::InvalidArgument("n_jumps must be >= 1".into()));
    }
    let scale = theta * volume;
    let mut arrivals = stream(seed, STREAM_MARK);
    let mut positions = stream(seed, STREAM_POSITION);
    let mut points = Vec::with_capacity(n_jumps);
    let mut clock = 0.0;
    let mut last = f64::INFINITY;
    for _ in 0..n_jumps {
        clock += -open_unit(&mut arrivals).ln();
        let Some(mut s) = inverse_e1(clock / scale) else {
            break;
        };
        if s >= last {
            s = last.next_down();
        }
        last = s;
        points.push(MarkedPoint::from_parts(s, uniform_position(window, &mut positions)));
    }
    let plato = to_plato(Configuration::new(points, window.dim())?)?;
    let measure = plato.reflect();
    let smallest = if last.is_finite() { last } else { f64::INFINITY };
    Ok(GammaSample {
        report: SampleReport {
            seed,
            epsilon: None,
            expected_discarded_mass: scale * -(-smallest).exp_m1(),
            atom_count: measure.len(),
        },
        measure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Window {
        Window::new(vec![0.0], vec![1.0]).unwrap()
    }

    #[test]
    fn exponential_density_has_unit_mass() {
        let d = MarkDensity::exponential();
        assert!((d.mass() - 1.0).abs() < 1e-12);
        let median = d.quantile(0.5);
        assert!((median - std::f64::consts::LN_2).abs() < 1e-10, "median {median}");
        let q = d.quantile(0.99);
        assert!((q - 100f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn bounded_density_quantiles() {
        let d = MarkDensity::new(1.0, 3.0, |_| 2.0).unwrap();
        assert!((d.mass() - 4.0).abs() < 1e-12);
        assert!((d.quantile(0.25) - 1.5).abs() < 1e-10);
    }

    #[test]
    fn non_integrable_densities_rejected() {
        assert!(matches!(
            MarkDensity::new(1.0, f64::INFINITY, |s| 1.0 / s),
            Err(Error::NonIntegrableDensity(_))
        ));
        assert!(matches!(
            MarkDensity::new(0.0, 1.0, |_| -1.0),
            Err(Error::NonIntegrableDensity(_))
        ));
        assert!(matches!(
            MarkDensity::new(0.0, 1.0, |_| 0.0),
            Err(Error::NonIntegrableDensity(_))
        ));
    }

    #[test]
    fn poisson_is_deterministic() {
        let spec = LevySpec::finite_product(MarkDensity::exponential(), 1.0).unwrap();
        let a = sample_poisson(&spec, &unit(), 42).unwrap();
        let b = sample_poisson(&spec, &unit(), 42).unwrap();
        assert_eq!(a, b);
        for (p, q) in a.configuration.iter().zip(b.configuration.iter()) {
            assert_eq!(p.mark().to_bits(), q.mark().to_bits());
        }
    }

    #[test]
    fn degenerate_and_unbounded_windows_rejected() {
        let spec = LevySpec::finite_product(MarkDensity::exponential(), 1.0).unwrap();
        let flat = Window::degenerate(vec![0.0], vec![0.0]).unwrap();
        assert_eq!(sample_poisson(&spec, &flat, 1), Err(Error::DegenerateWindow));
        assert_eq!(
            sample_gamma(1.0, &Window::everywhere(1), 0.1, 1),
            Err(Error::UnboundedWindow)
        );
        assert!(sample_poisson(&LevySpec::gamma(1.0).unwrap(), &unit(), 1).is_err());
    }

    #[test]
    fn gamma_argument_validation() {
        assert_eq!(sample_gamma(-1.0, &unit(), 0.1, 1), Err(Error::InvalidTheta(-1.0)));
        assert_eq!(sample_gamma(1.0, &unit(), 0.0, 1), Err(Error::InvalidEpsilon(0.0)));
        assert_eq!(sample_gamma(1.0, &unit(), 1.0, 1), Err(Error::InvalidEpsilon(1.0)));
        assert_eq!(sample_gamma_ordered(0.0, &unit(), 5, 1), Err(Error::InvalidTheta(0.0)));
        assert!(sample_gamma_ordered(1.0, &unit(), 0, 1).is_err());
    }

    #[test]
    fn truncation_error_closed_form() {
        assert!(expected_truncation_error(1.0, 1.0, 1e-12).unwrap() <= 1e-12);
        let e = expected_truncation_error(1.0, 1.0, 0.01).unwrap();
        assert!((e - 0.009_950_166_250_831_946).abs() < 1e-15);
        let f = expected_truncation_error(2.0, 3.0, 0.01).unwrap();
        assert!((f - 6.0 * 0.009_950_166_250_831_946).abs() < 1e-14);
        assert!(expected_truncation_error(0.0, 1.0, 0.1).is_err());
        assert!(expected_truncation_error(1.0, -1.0, 0.1).is_err());
    }

    #[test]
    fn gamma_report_matches_closed_form() {
        let s = sample_gamma(1.0, &unit(), 0.01, 3).unwrap();
        assert!((s.report.expected_discarded_mass - 0.009_950_166_250_831_946).abs() < 1e-15);
        assert_eq!(s.report.atom_count, s.measure.len());
        assert!(s.measure.atoms().all(|(_, w)| w > 0.01));
    }

    #[test]
    fn smaller_epsilon_extends_the_sample() {
        let coarse = sample_gamma(1.5, &unit(), 1e-2, 11).unwrap().measure;
        let fine = sample_gamma(1.5, &unit(), 1e-4, 11).unwrap().measure;
        assert!(coarse.is_sub_measure(&fine).unwrap());
        assert!(fine
            .atoms()
            .filter(|(x, _)| coarse.weight_at(x.coords()).unwrap() == 0.0)
            .all(|(_, w)| w <= 1e-2));
    }

    #[test]
    fn ordered_marks_strictly_decrease() {
        for seed in 0..20 {
            let s = sample_gamma_ordered(1.0, &unit(), 50, seed).unwrap();
            let cfg = s.measure.to_configuration();
            let mut marks: Vec<f64> = cfg.iter().map(|p| p.mark()).collect();
            let n = marks.len();
            marks.sort_by(|a, b| b.total_cmp(a));
            marks.dedup();
            assert_eq!(marks.len(), n);
            assert_eq!(n, 50);
        }
    }

    #[test]
    fn inverse_e1_round_trip() {
        for &s in &[1e-12, 1e-6, 0.01, 0.5, 1.0, 3.0, 20.0] {
            let back = inverse_e1(e1_unchecked(s)).unwrap();
            assert!((back / s - 1.0).abs() < 1e-10, "{s} -> {back}");
        }
        assert_eq!(inverse_e1(1e6), None);
    }
}
