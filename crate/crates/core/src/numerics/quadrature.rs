use super::Scalar;
use crate::error::{Error, Result};

/// Default Gauss–Hermite order for the quadrature fallback.
pub const DEFAULT_GH_ORDER: usize = 30;

/// π^{-1/4}
const PI_M4: f64 = 0.751_125_544_464_942_5;

/// Nodes and weights of the `order`-point Gauss–Hermite rule for
/// `∫ g(t) e^{−t²} dt`, nodes ascending.
///
/// Roots of the orthonormal Hermite polynomial are bracketed by a sign scan
/// over the non-negative half-line, then polished with safeguarded Newton
/// steps. The rule is symmetric, so negative nodes are mirrored.
pub fn gauss_hermite_nodes<T: Scalar>(order: usize) -> Result<(Vec<T>, Vec<T>)> {
    if !(1..=200).contains(&order) {
        return Err(Error::OrderOutOfRange(order));
    }
    let n = order;
    let mut positive = Vec::with_capacity(n / 2);
    // Adjacent roots are at least about π/√(2n+1) apart.
    let step = 0.05 / (2.0 * n as f64 + 1.0).sqrt();
    let z_max = (2.0 * n as f64 + 1.0).sqrt() + 1.0;
    let mut lo = 0.5 * step;
    let mut p_lo = orthonormal_hermite(n, lo).0;
    while positive.len() < n / 2 && lo < z_max {
        let hi = lo + step;
        let p_hi = orthonormal_hermite(n, hi).0;
        if p_lo.signum() != p_hi.signum() {
            positive.push(polish_root(n, lo, hi, p_lo));
        }
        lo = hi;
        p_lo = p_hi;
    }
    debug_assert_eq!(positive.len(), n / 2);
    let weight = |z: f64| {
        let pp = orthonormal_hermite(n, z).1;
        2.0 / (pp * pp)
    };
    let mut nodes: Vec<(f64, f64)> = positive.iter().rev().map(|&z| (-z, weight(z))).collect();
    if n % 2 == 1 {
        nodes.push((0.0, weight(0.0)));
    }
    nodes.extend(positive.iter().map(|&z| (z, weight(z))));
    Ok((
        nodes.iter().map(|&(z, _)| T::lit(z)).collect(),
        nodes.iter().map(|&(_, w)| T::lit(w)).collect(),
    ))
}

/// Root of the degree-`n` polynomial inside `[lo, hi]`, where it changes sign.
fn polish_root(n: usize, mut lo: f64, mut hi: f64, p_lo: f64) -> f64 {
    let mut z = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (p, pp) = orthonormal_hermite(n, z);
        if p == 0.0 {
            return z;
        }
        if p.signum() == p_lo.signum() {
            lo = z;
        } else {
            hi = z;
        }
        let newton = z - p / pp;
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - z).abs() <= 1e-15 * z.abs().max(1.0) {
            return next;
        }
        z = next;
    }
    z
}

/// Orthonormal Hermite polynomial of degree `n` at `z` and its derivative.
fn orthonormal_hermite(n: usize, z: f64) -> (f64, f64) {
    let mut p1 = PI_M4;
    let mut p2 = 0.0;
    for j in 1..=n {
        let jf = j as f64;
        let p3 = p2;
        p2 = p1;
        p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
    }
    (p1, (2.0 * n as f64).sqrt() * p2)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT_PI: f64 = 1.772_453_850_905_516;

    /// ∫ t^j e^{−t²} dt: zero for odd j, Γ((j+1)/2) otherwise.
    fn gaussian_moment(j: u32) -> f64 {
        if j % 2 == 1 {
            return 0.0;
        }
        // Γ(k + 1/2) = (2k−1)!! / 2^k · √π
        let k = j / 2;
        (1..=k).fold(SQRT_PI, |acc, i| acc * (2 * i - 1) as f64 / 2.0)
    }

    #[test]
    fn one_and_two_point_rules() {
        let (x, w) = gauss_hermite_nodes::<f64>(1).unwrap();
        assert_eq!(x, vec![0.0]);
        assert!((w[0] - SQRT_PI).abs() < 1e-14);
        let (x, w) = gauss_hermite_nodes::<f64>(2).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((x[0] + r).abs() < 1e-14 && (x[1] - r).abs() < 1e-14);
        assert!(w.iter().all(|wi| (wi - SQRT_PI / 2.0).abs() < 1e-14));
    }

    #[test]
    fn second_moment_order_five() {
        let (x, w) = gauss_hermite_nodes::<f64>(5).unwrap();
        let got: f64 = x.iter().zip(&w).map(|(t, wi)| wi * t * t).sum();
        assert!((got - SQRT_PI / 2.0).abs() < 1e-12);
        assert_eq!(x[2], 0.0);
    }

    #[test]
    fn weights_sum_and_exactness() {
        for order in [3usize, 4, 7, 10, 20, 30, 31, 64, 100, 150, 200] {
            let (x, w) = gauss_hermite_nodes::<f64>(order).unwrap();
            let total: f64 = w.iter().sum();
            assert!((total - SQRT_PI).abs() < 1e-10, "order {order}: {total}");
            if order % 2 == 1 {
                assert_eq!(x[order / 2], 0.0);
            }
            assert!(x.windows(2).all(|p| p[0] < p[1]));
            // High monomials are dominated by the outer nodes; stay where
            // the moments remain representable.
            let max_j = (2 * order - 1).min(60) as u32;
            for j in 0..=max_j {
                let want = gaussian_moment(j);
                let got: f64 = x.iter().zip(&w).map(|(t, wi)| wi * t.powi(j as i32)).sum();
                let scale = want.abs().max(gaussian_moment(j + j % 2));
                assert!(
                    (got - want).abs() <= 1e-9 * scale,
                    "order {order}, t^{j}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn order_bounds() {
        assert_eq!(
            gauss_hermite_nodes::<f64>(0).unwrap_err(),
            Error::OrderOutOfRange(0)
        );
        assert!(gauss_hermite_nodes::<f64>(201).is_err());
    }

    #[test]
    fn single_precision_rule() {
        let (x, w) = gauss_hermite_nodes::<f32>(10).unwrap();
        let m2: f32 = x.iter().zip(&w).map(|(t, wi)| wi * t * t).sum();
        assert!((m2 - (SQRT_PI / 2.0) as f32).abs() < 1e-5);
    }
}
