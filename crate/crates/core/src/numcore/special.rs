//! Gamma, beta, incomplete beta and Hurwitz zeta.

use super::Real;
use crate::error::{domain, Result};

// Lanczos g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum<T: Real>(z: T) -> T {
    // z is the shifted argument a - 1
    let mut x = T::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += T::lit(c) / (z + T::from_usize_(i));
    }
    x
}

/// Γ(a) for a > 0.
pub fn gamma_fn<T: Real>(a: T) -> Result<T> {
    if !(a > T::zero()) || !a.is_finite() {
        return domain(format!("gamma needs a > 0, got {a}"));
    }
    Ok(gamma_unchecked(a))
}

pub(crate) fn gamma_unchecked<T: Real>(a: T) -> T {
    if a < T::lit(0.5) {
        // reflection
        return T::PI() / ((T::PI() * a).sin() * gamma_unchecked(T::one() - a));
    }
    let z = a - T::one();
    let t = z + T::lit(LANCZOS_G + 0.5);
    T::lit((2.0 * std::f64::consts::PI).sqrt()) * t.powf(z + T::lit(0.5)) * (-t).exp() * lanczos_sum(z)
}

/// ln Γ(a) for a > 0.
pub fn ln_gamma<T: Real>(a: T) -> Result<T> {
    if !(a > T::zero()) {
        return domain(format!("ln_gamma needs a > 0, got {a}"));
    }
    if a < T::lit(0.5) {
        return Ok((T::PI() / (T::PI() * a).sin()).ln() - ln_gamma(T::one() - a)?);
    }
    let z = a - T::one();
    let t = z + T::lit(LANCZOS_G + 0.5);
    Ok(T::lit(0.5 * (2.0 * std::f64::consts::PI).ln()) + (z + T::lit(0.5)) * t.ln() - t + lanczos_sum(z).ln())
}

/// β(a,b) = Γ(a)Γ(b)/Γ(a+b).
pub fn beta_fn<T: Real>(a: T, b: T) -> Result<T> {
    if !(a > T::zero()) || !(b > T::zero()) {
        return domain(format!("beta needs a, b > 0, got ({a}, {b})"));
    }
    if a + b < T::lit(100.0) {
        Ok(gamma_unchecked(a) * gamma_unchecked(b) / gamma_unchecked(a + b))
    } else {
        Ok((ln_gamma(a)? + ln_gamma(b)? - ln_gamma(a + b)?).exp())
    }
}

/// Regularized incomplete beta I_z(a,b), continued fraction (modified Lentz).
pub fn inc_beta<T: Real>(z: T, a: T, b: T) -> Result<T> {
    if !(a > T::zero()) || !(b > T::zero()) {
        return domain("inc_beta needs a, b > 0");
    }
    if z < T::zero() || z > T::one() {
        return domain(format!("inc_beta needs z in [0,1], got {z}"));
    }
    if z == T::zero() || z == T::one() {
        return Ok(z);
    }
    let lnfront = ln_gamma(a + b)? - ln_gamma(a)? - ln_gamma(b)? + a * z.ln() + b * (T::one() - z).ln();
    let front = lnfront.exp();
    if z < (a + T::one()) / (a + b + T::lit(2.0)) {
        Ok(front * betacf(z, a, b) / a)
    } else {
        Ok(T::one() - front * betacf(T::one() - z, b, a) / b)
    }
}

fn betacf<T: Real>(x: T, a: T, b: T) -> T {
    let tiny = T::lit(1e-300).max(T::min_positive_value());
    let eps = T::epsilon();
    let one = T::one();
    let qab = a + b;
    let qap = a + one;
    let qam = a - one;
    let mut c = one;
    let mut d = one - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = one / d;
    let mut h = d;
    for m in 1..400 {
        let m = T::from_usize_(m);
        let m2 = m + m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = one / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = one / d;
        let del = d * c;
        h *= del;
        if (del - one).abs() < eps {
            break;
        }
    }
    h
}

// B_{2j}/(2j)!
const BERN_OVER_FACT: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30_240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
    1.0 / 74_724_249_600.0,
    -3617.0 / 10_670_622_842_880_000.0,
];

/// Hurwitz zeta ζ(s, a) = ∑_{k≥0} (a+k)^{-s}, s > 1, a > 0 (Euler-Maclaurin).
pub fn hurwitz_zeta<T: Real>(s: T, a: T) -> Result<T> {
    if !(s > T::one()) {
        return domain(format!("hurwitz_zeta needs s > 1, got {s}"));
    }
    if !(a > T::zero()) {
        return domain(format!("hurwitz_zeta needs a > 0, got {a}"));
    }
    let n = 12usize;
    let mut sum = T::zero();
    for k in 0..n {
        sum += (a + T::from_usize_(k)).powf(-s);
    }
    let x = a + T::from_usize_(n);
    sum += x.powf(T::one() - s) / (s - T::one()) + T::lit(0.5) * x.powf(-s);
    // rising factorial s(s+1)...(s+2j-2) times x^{-s-2j+1}
    let mut poch = s;
    let mut xp = x.powf(-s - T::one());
    let x2 = x * x;
    for (j, &b) in BERN_OVER_FACT.iter().enumerate() {
        sum += T::lit(b) * poch * xp;
        let j2 = T::from_usize_(2 * j + 1);
        poch = poch * (s + j2) * (s + j2 + T::one());
        xp /= x2;
    }
    Ok(sum)
}
