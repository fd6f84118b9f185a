use rand::Rng as _;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::Norm;
use crate::rng::{rng_for, Rng};

/// Monte Carlo estimate of `Vol(B(x,R) ∩ B(y,R)) / Vol(B(x,R) ∪ B(y,R))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolumeEstimate {
    pub ratio: f64,
    pub stderr: f64,
    /// Estimated `Vol(∩) / Vol(B)`.
    pub fraction: f64,
    pub samples: usize,
}

/// Uniform point in the unit ℓp ball (`p ≥ 1`, or ℓ∞), by normalizing a
/// generalized Gaussian vector with an extra exponential coordinate.
fn unit_ball_sample(rng: &mut Rng, dim: usize, norm: Norm, gamma: Option<&Gamma<f64>>, out: &mut [f64]) {
    match norm {
        Norm::Inf => {
            for x in out.iter_mut() {
                *x = rng.random::<f64>() * 2.0 - 1.0;
            }
        }
        Norm::L(p) => {
            let mut sum = 0.0;
            for x in out.iter_mut().take(dim) {
                let g = if p == 2.0 {
                    let z: f64 = rng.sample(StandardNormal);
                    z * std::f64::consts::FRAC_1_SQRT_2
                } else {
                    let mag: f64 = gamma.expect("gamma for p != 2").sample(rng).powf(1.0 / p);
                    if rng.random::<bool>() {
                        mag
                    } else {
                        -mag
                    }
                };
                *x = g;
                sum += g.abs().powf(p);
            }
            let e: f64 = rng.sample(Exp1);
            let scale = (sum + e).powf(-1.0 / p);
            for x in out.iter_mut() {
                *x *= scale;
            }
        }
    }
}

/// Estimates the intersection-over-union volume ratio of two radius-`r`
/// balls whose centers are `s` apart along the first axis.
///
/// Samples uniformly from one ball and counts hits inside the other; with
/// hit fraction `f = Vol(∩)/Vol(B)` the ratio is `f / (2 - f)`. The standard
/// error is the binomial error of `f` propagated through that map.
pub fn estimate_volume_ratio(
    dim: usize,
    r: f64,
    s: f64,
    norm: Norm,
    samples: usize,
    seed: u64,
) -> Result<VolumeEstimate> {
    let norm = norm.validate()?;
    if dim == 0 || samples == 0 {
        return Err(Error::InvalidParameter(
            "need a positive dimension and sample count".into(),
        ));
    }
    if !(r > 0.0) || !(s >= 0.0) {
        return Err(Error::InvalidParameter(format!("radius {r} and separation {s}")));
    }
    if s > 2.0 * r {
        // disjoint along the axis in every ℓp norm
        return Ok(VolumeEstimate {
            ratio: 0.0,
            stderr: 0.0,
            fraction: 0.0,
            samples: 0,
        });
    }
    let gamma = match norm {
        Norm::L(p) if p != 2.0 => Some(Gamma::new(1.0 / p, 1.0).expect("valid shape")),
        _ => None,
    };
    let mut rng = rng_for(seed, "volume-ratio", 0);
    let mut x = vec![0.0f64; dim];
    let mut hits = 0usize;
    for _ in 0..samples {
        unit_ball_sample(&mut rng, dim, norm, gamma.as_ref(), &mut x);
        // point in B(0, r); test membership in B(s·e1, r)
        x.iter_mut().for_each(|c| *c *= r);
        x[0] -= s;
        if norm.length(&x) <= r {
            hits += 1;
        }
    }
    let m = samples as f64;
    let f = hits as f64 / m;
    let ratio = f / (2.0 - f);
    let sf = (f * (1.0 - f) / m).sqrt();
    let stderr = 2.0 * sf / ((2.0 - f) * (2.0 - f));
    Ok(VolumeEstimate {
        ratio,
        stderr,
        fraction: f,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_separation_gives_one() {
        let e = estimate_volume_ratio(3, 1.0, 0.0, Norm::L(2.0), 1000, 1).unwrap();
        assert_eq!(e.ratio, 1.0);
    }

    #[test]
    fn far_apart_gives_zero() {
        let e = estimate_volume_ratio(3, 1.0, 2.5, Norm::L(1.5), 1000, 1).unwrap();
        assert_eq!((e.ratio, e.samples), (0.0, 0));
    }

    #[test]
    fn samples_stay_in_the_ball() {
        let mut rng = rng_for(1, "t", 0);
        let g = Gamma::new(1.0 / 1.5, 1.0).unwrap();
        let mut x = vec![0.0; 5];
        for _ in 0..1000 {
            unit_ball_sample(&mut rng, 5, Norm::L(1.5), Some(&g), &mut x);
            assert!(Norm::L(1.5).length(&x) <= 1.0);
        }
    }
}
