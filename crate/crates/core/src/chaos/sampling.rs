//! Marginal sampler from the eigen-representation X_t = t^H ∑ λ_n (Z_n² − 1).

use rand_distr::{Distribution, StandardNormal};

use crate::error::{domain, Result};
use crate::numcore::rng::par_blocks;
use crate::numcore::{Real, SeedSpec};
use crate::spectral::Spectrum;

/// Samples of the truncated eigen-sum over `modes` modes (trusted ones, then the asymptotic law)
/// plus an independent Gaussian carrying the missing variance 2R₂t^{2H}, R₂ = ½ − ∑λ_n².
pub fn simulate_marginal<T: Real>(t: T, spec: &Spectrum<T>, n_samples: usize, modes: usize, seed: SeedSpec) -> Result<Vec<T>> {
    if !(t > T::zero()) {
        return domain(format!("t must be positive, got {t}"));
    }
    if modes == 0 {
        return domain("need at least one mode");
    }
    let lam: Vec<f64> = spec.extended_lambdas(modes).iter().map(|l| l.f64()).collect();
    let r2 = (0.5 - lam.iter().map(|l| l * l).sum::<f64>()).max(0.0);
    let sd_tail = (2.0 * r2).sqrt();
    let scale = t.f64().powf(spec.h.h.f64());
    let block = 4096;
    let nb = n_samples.div_ceil(block);
    let parts = par_blocks(seed, nb, |b, rng| {
        let n = block.min(n_samples - b * block);
        (0..n)
            .map(|_| {
                let mut x = 0.0;
                for l in &lam {
                    let z: f64 = StandardNormal.sample(rng);
                    x += l * (z * z - 1.0);
                }
                let g: f64 = StandardNormal.sample(rng);
                T::lit(scale * (x + sd_tail * g))
            })
            .collect::<Vec<T>>()
    });
    Ok(parts.into_iter().flatten().collect())
}

/// Sample mean, variance and third cumulant with standard errors (for the first two).
#[derive(Debug, Clone, Copy)]
pub struct SampleMoments {
    pub n: usize,
    pub mean: f64,
    pub mean_se: f64,
    pub var: f64,
    pub var_se: f64,
    pub k3: f64,
    pub k3_se: f64,
}

pub fn sample_moments<T: Real>(x: &[T]) -> SampleMoments {
    let n = x.len() as f64;
    let mean = x.iter().map(|v| v.f64()).sum::<f64>() / n;
    let (mut m2, mut m3, mut m4, mut m6) = (0.0, 0.0, 0.0, 0.0);
    for v in x {
        let d = v.f64() - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
        m6 += d2 * d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    m6 /= n;
    SampleMoments {
        n: x.len(),
        mean,
        mean_se: (m2 / n).sqrt(),
        var: m2,
        var_se: ((m4 - m2 * m2) / n).sqrt(),
        k3: m3,
        // delta-method size, dominated by the sixth moment
        k3_se: ((m6 - m3 * m3 - 6.0 * m4 * m2 + 9.0 * m2 * m2 * m2) / n).max(0.0).sqrt(),
    }
}

/// Sample skewness and its jackknife standard error over `blocks` contiguous blocks.
pub fn skewness_jackknife<T: Real>(x: &[T], blocks: usize) -> (f64, f64) {
    let skew = |v: &mut dyn Iterator<Item = f64>| {
        let v: Vec<f64> = v.collect();
        let m = sample_moments(&v);
        m.k3 / m.var.powf(1.5)
    };
    let full = skew(&mut x.iter().map(|v| v.f64()));
    let nb = blocks.clamp(2, x.len().max(2));
    let size = x.len() / nb;
    if size == 0 {
        return (full, f64::NAN);
    }
    let reps: Vec<f64> = (0..nb).map(|b| skew(&mut x[..b * size].iter().chain(&x[(b + 1) * size..]).map(|v| v.f64()))).collect();
    let mean = reps.iter().sum::<f64>() / nb as f64;
    let n = nb as f64;
    (full, ((n - 1.0) / n * reps.iter().map(|r| (r - mean).powi(2)).sum::<f64>()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Hurst;
    use crate::spectral::{nystrom_eig, SpectrumConfig};

    #[test]
    fn marginal_has_unit_scaled_variance() {
        let h = Hurst::new(0.7).unwrap();
        let sp = nystrom_eig(&h, SpectrumConfig::default()).unwrap();
        let t = 0.5f64;
        let x = simulate_marginal(t, &sp, 100_000, 200, SeedSpec::new(9, 0)).unwrap();
        let m = sample_moments(&x);
        let want = t.powf(1.4);
        assert!(m.mean.abs() < 4.0 * m.mean_se, "{m:?}");
        assert!((m.var - want).abs() < 4.0 * m.var_se, "{m:?} {want}");
        assert!(m.k3 > 0.0);
    }

    #[test]
    fn marginal_is_reproducible() {
        let h = Hurst::new(0.8).unwrap();
        let sp = nystrom_eig(&h, SpectrumConfig::default()).unwrap();
        let a = simulate_marginal(1.0, &sp, 5000, 50, SeedSpec::new(4, 0)).unwrap();
        let b = simulate_marginal(1.0, &sp, 5000, 50, SeedSpec::new(4, 0)).unwrap();
        assert_eq!(a, b);
        assert!(simulate_marginal(0.0, &sp, 10, 5, SeedSpec::new(4, 0)).is_err());
    }

    #[test]
    fn moments_of_a_known_sample() {
        let m = sample_moments(&[1.0, 2.0, 3.0, 6.0]);
        assert_eq!(m.mean, 3.0);
        assert_eq!(m.var, 3.5);
        assert_eq!(m.k3, 4.5);
    }

    #[test]
    fn skewness_of_a_chi_square() {
        // Z² − 1 has skewness √8
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = SeedSpec::new(3, 0).rng();
        let x: Vec<f64> = (0..200_000).map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            z * z - 1.0
        }).collect();
        let (s, se) = skewness_jackknife(&x, 100);
        assert!(se > 0.0 && se < 0.1);
        assert!((s - 8f64.sqrt()).abs() < 4.0 * se, "{s} {se}");
    }
}
