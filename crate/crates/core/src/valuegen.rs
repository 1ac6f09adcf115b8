//! Seeded NPD and TRAP value-function generators.
//!
//! Entries are drawn in mask-major, alternative-minor order from a single
//! ChaCha stream seeded with the problem seed, so a table is reproducible
//! from `(spec, params)` alone.

use rand_distr::{Distribution, StandardNormal};

use crate::domain::{ProblemSpec, ValueTable};
use crate::error::{Error, Result};
use crate::seeds;

/// `v(C, t) ~ N(mu, sigma²)` for every bundle and alternative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NpdParams {
    pub mu: f64,
    pub sigma: f64,
}

impl Default for NpdParams {
    fn default() -> Self {
        Self { mu: 1.0, sigma: 0.1 }
    }
}

/// `v(C, t) ~ N(trap_mean(|C|), sigma²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrapParams {
    pub sigma: f64,
    pub delta: f64,
    pub tau_threshold: f64,
    pub epsilon: f64,
}

impl TrapParams {
    /// Reference parameters scaled to `n` elements: δ=0.1, τ=n/2, ε=0.1, σ=0.1.
    pub fn for_elements(n: usize) -> Self {
        Self {
            sigma: 0.1,
            delta: 0.1,
            tau_threshold: n as f64 / 2.0,
            epsilon: 0.1,
        }
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma >= 0.0 {
        Ok(())
    } else {
        Err(Error::usage(format!("sigma must be finite and >= 0, got {sigma}")))
    }
}

/// Mean of a TRAP entry for a bundle of `bundle_size` elements.
///
/// `δ·(s − s²)` up to the threshold, `δ·(s − s² + s^(2+ε))` strictly above it.
pub fn trap_mean(bundle_size: usize, p: &TrapParams) -> f64 {
    let s = bundle_size as f64;
    let base = s - s * s;
    if s <= p.tau_threshold {
        p.delta * base
    } else {
        let bump = if bundle_size == 0 {
            0.0
        } else {
            ((2.0 + p.epsilon) * s.ln()).exp()
        };
        p.delta * (base + bump)
    }
}

pub fn generate_npd(spec: &ProblemSpec, p: &NpdParams) -> Result<ValueTable> {
    check_sigma(p.sigma)?;
    let mut rng = seeds::rng(spec.seed());
    ValueTable::from_fn(*spec, |_, _| {
        let z: f64 = StandardNormal.sample(&mut rng);
        p.mu + p.sigma * z
    })
}

pub fn generate_trap(spec: &ProblemSpec, p: &TrapParams) -> Result<ValueTable> {
    check_sigma(p.sigma)?;
    let means: Vec<f64> = (0..=spec.n()).map(|s| trap_mean(s, p)).collect();
    let mut rng = seeds::rng(spec.seed());
    ValueTable::from_fn(*spec, |bundle, _| {
        let z: f64 = StandardNormal.sample(&mut rng);
        means[bundle.len()] + p.sigma * z
    })
}

/// Either distribution, for callers that pick one at runtime.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ValueDistribution {
    Npd(NpdParams),
    Trap(TrapParams),
}

impl ValueDistribution {
    pub fn name(&self) -> &'static str {
        match self {
            ValueDistribution::Npd(_) => "npd",
            ValueDistribution::Trap(_) => "trap",
        }
    }

    pub fn generate(&self, spec: &ProblemSpec) -> Result<ValueTable> {
        match self {
            ValueDistribution::Npd(p) => generate_npd(spec, p),
            ValueDistribution::Trap(p) => generate_trap(spec, p),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Bundle;

    fn reference_trap() -> TrapParams {
        TrapParams::for_elements(20)
    }

    #[test]
    fn trap_mean_values() {
        let p = reference_trap();
        assert_eq!(trap_mean(0, &p), 0.0);
        assert_eq!(trap_mean(1, &p), 0.0);
        let expected20 = 0.1 * (20.0 - 400.0 + 20f64.powf(2.1));
        assert!((trap_mean(20, &p) - expected20).abs() < 1e-9);
        assert!((trap_mean(20, &p) - 15.9713).abs() < 1e-4);
        assert_eq!(trap_mean(10, &p), 0.1 * (10.0 - 100.0));
        let expected11 = 0.1 * (11.0 - 121.0 + 11f64.powf(2.1));
        assert!((trap_mean(11, &p) - expected11).abs() < 1e-12);
        assert!((trap_mean(11, &p) - 4.3789).abs() < 1e-4);
        for s in 2..=10 {
            assert!(trap_mean(s, &p) < 0.0, "s={s}");
        }
    }

    #[test]
    fn trap_jump_just_above_integer_threshold() {
        let p = reference_trap();
        // the lower branch evaluated at s = τ + 1
        let below = p.delta * (11.0 - 121.0);
        let jump = trap_mean(11, &p) - below;
        assert!((jump - p.delta * 11f64.powf(2.1)).abs() < 1e-9);
        assert_eq!(trap_mean(10, &p), p.delta * (10.0 - 100.0));
    }

    #[test]
    fn trap_threshold_compared_as_real() {
        let p = TrapParams {
            tau_threshold: 2.5,
            ..reference_trap()
        };
        assert_eq!(trap_mean(2, &p), p.delta * (2.0 - 4.0));
        assert!(trap_mean(3, &p) > p.delta * (3.0 - 9.0));
    }

    #[test]
    fn degenerate_npd_is_constant() {
        let spec = ProblemSpec::new(6, 3, 11).unwrap();
        let v = generate_npd(&spec, &NpdParams { mu: 1.25, sigma: 0.0 }).unwrap();
        assert!(v.values().iter().all(|&x| x == 1.25));
    }

    #[test]
    fn npd_moments() {
        let spec = ProblemSpec::new(10, 4, 3).unwrap();
        let v = generate_npd(&spec, &NpdParams::default()).unwrap();
        let n = v.values().len() as f64;
        let mean = v.values().iter().sum::<f64>() / n;
        let var = v.values().iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
        assert!((var.sqrt() - 0.1).abs() < 0.01, "std {}", var.sqrt());
    }

    #[test]
    fn determinism_contract() {
        let spec = ProblemSpec::new(8, 3, 99).unwrap();
        let a = generate_npd(&spec, &NpdParams::default()).unwrap();
        let b = generate_npd(&spec, &NpdParams::default()).unwrap();
        assert_eq!(a, b);
        let other = ProblemSpec::new(8, 3, 100).unwrap();
        let c = generate_npd(&other, &NpdParams::default()).unwrap();
        assert_ne!(a, c);

        let t1 = generate_trap(&spec, &reference_trap()).unwrap();
        let t2 = generate_trap(&spec, &reference_trap()).unwrap();
        let (mut f1, mut f2) = (Vec::new(), Vec::new());
        t1.write_to(&mut f1).unwrap();
        t2.write_to(&mut f2).unwrap();
        assert_eq!(f1, f2);
    }

    #[test]
    fn degenerate_trap_equals_mean() {
        let spec = ProblemSpec::new(6, 2, 1).unwrap();
        let p = TrapParams {
            sigma: 0.0,
            ..TrapParams::for_elements(6)
        };
        let v = generate_trap(&spec, &p).unwrap();
        assert_eq!(v.get(Bundle(0b000100), 1), trap_mean(1, &p));
        assert_eq!(v.get(Bundle(0b111111), 0), trap_mean(6, &p));
    }

    #[test]
    fn trap_level_mean_at_full_scale() {
        let spec = ProblemSpec::new(20, 10, 5).unwrap();
        let p = reference_trap();
        let v = generate_trap(&spec, &p).unwrap();
        let (mut sum, mut count) = (0.0, 0usize);
        for mask in 0u32..1 << 20 {
            if mask.count_ones() == 11 {
                for t in 0..10 {
                    sum += v.get(Bundle(mask), t);
                    count += 1;
                }
            }
        }
        let mean = sum / count as f64;
        // 1.68M draws with σ = 0.1: standard error ≈ 8e-5
        assert!((mean - trap_mean(11, &p)).abs() < 1e-3, "mean {mean}");
        assert!((mean - 4.3789).abs() < 0.01);
    }

    #[test]
    fn standardized_residuals_look_normal() {
        let spec = ProblemSpec::new(15, 4, 17).unwrap();
        for dist in [
            ValueDistribution::Npd(NpdParams::default()),
            ValueDistribution::Trap(TrapParams::for_elements(15)),
        ] {
            let v = dist.generate(&spec).unwrap();
            let z: Vec<f64> = match dist {
                ValueDistribution::Npd(p) => v.values().iter().map(|x| (x - p.mu) / p.sigma).collect(),
                ValueDistribution::Trap(p) => v
                    .values()
                    .iter()
                    .enumerate()
                    .map(|(i, x)| (x - trap_mean((i / 4).count_ones() as usize, &p)) / p.sigma)
                    .collect(),
            };
            let n = z.len() as f64;
            assert!(n >= 1e5);
            let mean = z.iter().sum::<f64>() / n;
            let m2 = z.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
            let m3 = z.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
            let m4 = z.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
            let skew = m3 / m2.powf(1.5);
            let kurt = m4 / (m2 * m2) - 3.0;
            assert!(skew.abs() < 0.05, "{} skew {skew}", dist.name());
            assert!(kurt.abs() < 0.1, "{} kurtosis {kurt}", dist.name());
        }
    }

    #[test]
    fn negative_sigma_rejected() {
        let spec = ProblemSpec::new(3, 2, 0).unwrap();
        assert!(generate_npd(&spec, &NpdParams { mu: 0.0, sigma: -1.0 }).is_err());
    }
}
