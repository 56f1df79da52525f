use super::Scalar;

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;
const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
/// Switch point between the power series for erf and the continued fraction
/// for erfc.
const SERIES_LIMIT: f64 = 2.5;

/// erf(x) for 0 ≤ x, from the all-positive series
/// `2/√π · e^{−x²} Σ 2ⁿ x^{2n+1} / (2n+1)!!`.
fn erf_series<T: Scalar>(x: T) -> T {
    let two_x2 = T::lit(2.0) * x * x;
    let mut term = x;
    let mut sum = x;
    let mut k = T::one();
    for _ in 0..500 {
        k = k + T::lit(2.0);
        term = term * two_x2 / k;
        sum = sum + term;
        if term <= sum * T::epsilon() {
            break;
        }
    }
    T::lit(FRAC_2_SQRT_PI) * (-x * x).exp() * sum
}

/// erfc(x) for x ≥ `SERIES_LIMIT`, by modified Lentz evaluation of
/// `e^{−x²}/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + …))))`.
fn erfc_continued_fraction<T: Scalar>(x: T) -> T {
    let tiny = T::min_positive_value().sqrt();
    let mut f = x;
    let mut c = x;
    let mut d = T::zero();
    for n in 1..1000 {
        let a = T::from_usize_lossy(n) * T::lit(0.5);
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = d.recip();
        let delta = c * d;
        f = f * delta;
        if (delta - T::one()).abs() <= T::epsilon() {
            break;
        }
    }
    T::lit(FRAC_2_SQRT_PI * 0.5) * (-x * x).exp() / f
}

/// Standard normal density.
pub fn normal_pdf<T: Scalar>(t: T) -> T {
    T::lit(FRAC_1_SQRT_2PI) * (-(t * t) * T::lit(0.5)).exp()
}

/// Standard normal distribution function Φ.
pub fn normal_cdf<T: Scalar>(t: T) -> T {
    if t.is_nan() {
        return t;
    }
    let x = t.abs() / T::lit(std::f64::consts::SQRT_2);
    let half = T::lit(0.5);
    if x < T::lit(SERIES_LIMIT) {
        let e = erf_series(x);
        if t < T::zero() {
            half * (T::one() - e)
        } else {
            half * (T::one() + e)
        }
    } else {
        let tail = half * erfc_continued_fraction(x);
        if t < T::zero() {
            tail
        } else {
            T::one() - tail
        }
    }
}

/// Inverse of [`normal_cdf`] on (0, 1).
///
/// Newton's method on the lower half, where Φ is increasing and convex, so
/// iterates started at 0 decrease monotonically onto the root.
pub fn normal_quantile<T: Scalar>(p: T) -> T {
    let half = T::lit(0.5);
    if p.is_nan() || p <= T::zero() || p >= T::one() {
        return if p == T::zero() {
            T::neg_infinity()
        } else if p == T::one() {
            T::infinity()
        } else {
            T::nan()
        };
    }
    if p > half {
        return -normal_quantile(T::one() - p);
    }
    let mut z = T::zero();
    for _ in 0..1000 {
        let step = (normal_cdf(z) - p) / normal_pdf(z);
        z = z - step;
        if step.abs() <= T::epsilon() * (T::one() + z.abs()) * T::lit(4.0) {
            break;
        }
    }
    z
}
