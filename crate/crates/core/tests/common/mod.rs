#![allow(dead_code)]

use plato_cone::{Configuration, DiscreteMeasure, MarkedPoint, PlatoConfiguration, Window};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Coordinates on a coarse dyadic lattice so that collisions and boundary
/// hits actually happen in generated data.
pub fn coord() -> impl Strategy<Value = f64> {
    (-64i32..64).prop_map(|k| k as f64 / 16.0)
}

pub fn mark() -> impl Strategy<Value = f64> {
    (1u32..200).prop_map(|k| k as f64 / 8.0)
}

pub fn point(d: usize) -> impl Strategy<Value = (f64, Vec<f64>)> {
    (mark(), prop::collection::vec(coord(), d))
}

pub fn configuration(d: usize, max: usize) -> impl Strategy<Value = Configuration> {
    prop::collection::vec(point(d), 0..max)
        .prop_map(move |pts| Configuration::from_pairs(pts, d).unwrap())
}

/// Plato configuration: one mark per distinct position.
pub fn plato(d: usize, max: usize) -> impl Strategy<Value = PlatoConfiguration> {
    prop::collection::btree_map(prop::collection::vec(-64i32..64, d), mark(), 0..max).prop_map(
        move |m| {
            let pts = m
                .into_iter()
                .map(|(x, s)| (s, x.into_iter().map(|k| k as f64 / 16.0).collect()));
            plato_cone::to_plato(Configuration::from_pairs(pts, d).unwrap()).unwrap()
        },
    )
}

pub fn measure(d: usize, max: usize) -> impl Strategy<Value = DiscreteMeasure> {
    prop::collection::vec(point(d), 0..max)
        .prop_map(move |pts| DiscreteMeasure::new(pts, d).unwrap())
}

pub fn window(d: usize) -> impl Strategy<Value = Window> {
    prop::collection::vec((coord(), 1i32..64), d).prop_map(|axes| {
        let lower = axes.iter().map(|a| a.0).collect();
        let upper = axes.iter().map(|a| a.0 + a.1 as f64 / 16.0).collect();
        Window::new(lower, upper).unwrap()
    })
}

/// Random Plato configuration with continuous coordinates (positions are
/// distinct with probability one; retried otherwise).
pub fn random_plato(rng: &mut ChaCha8Rng, d: usize, n: usize) -> PlatoConfiguration {
    loop {
        let pts = (0..n).map(|_| {
            let s = rng.random_range(1e-6..10.0);
            let x = (0..d).map(|_| rng.random_range(-5.0..5.0)).collect();
            (s, x)
        });
        let c = Configuration::from_pairs(pts, d).unwrap();
        if let Ok(p) = plato_cone::to_plato(c) {
            return p;
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Points of a configuration as plain tuples, for bitwise comparisons.
pub fn bits(c: &Configuration) -> Vec<(u64, Vec<u64>)> {
    c.iter()
        .map(|p: &MarkedPoint| (p.mark().to_bits(), p.coords().iter().map(|v| v.to_bits()).collect()))
        .collect()
}
