//! Composite Gauss–Legendre quadrature.

use std::sync::OnceLock;

/// Nodes per panel.
pub const ORDER: usize = 16;

/// Nodes and weights on `[-1, 1]`, found by Newton iteration on `P_n`.
fn rule() -> &'static [(f64, f64); ORDER] {
    static RULE: OnceLock<[(f64, f64); ORDER]> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = ORDER;
        let mut out = [(0.0, 0.0); ORDER];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            out[i] = (x, 2.0 / ((1.0 - x * x) * dp * dp));
        }
        out
    })
}

/// `∫_a^b f` with a single Gauss–Legendre panel. Endpoints are never
/// evaluated.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    rule()
        .iter()
        .map(|&(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Cumulative integrals over `panels` equal panels of `[a, b]`. Entry `k`
/// is `∫_a^{a + k·h} f`, so the result has `panels + 1` entries.
pub fn cumulative<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize) -> Vec<f64> {
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels + 1);
    out.push(0.0);
    let mut acc = 0.0;
    for k in 0..panels {
        let lo = a + h * k as f64;
        let hi = if k + 1 == panels { b } else { a + h * (k + 1) as f64 };
        acc += gauss_legendre(f, lo, hi);
        out.push(acc);
    }
    out
}
