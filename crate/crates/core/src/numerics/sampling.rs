//! Seeded low-discrepancy sampling.
//!
//! A Halton sequence with a Cranley–Patterson rotation: the seed draws one
//! uniform shift per dimension, and every point is `halton(i) + shift mod 1`.
//! The same seed always reproduces the same point set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn radical_inverse(mut index: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut factor = inv;
    let mut value = 0.0;
    while index > 0 {
        value += (index % b) as f64 * factor;
        index /= b;
        factor *= inv;
    }
    value
}

#[derive(Debug, Clone)]
pub struct HaltonSampler {
    shift: Vec<f64>,
    next: u64,
}

impl HaltonSampler {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(
            (1..=PRIMES.len()).contains(&dim),
            "Halton dimension must be in 1..={}",
            PRIMES.len()
        );
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift = (0..dim).map(|_| rng.gen::<f64>()).collect();
        // Skip the first point (all zeros before rotation).
        Self { shift, next: 1 }
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    /// Next point in `[0, 1)^dim`.
    pub fn next_point(&mut self) -> Vec<f64> {
        let i = self.next;
        self.next += 1;
        self.shift
            .iter()
            .zip(PRIMES)
            .map(|(s, p)| {
                let u = radical_inverse(i, p) + s;
                u - u.floor()
            })
            .collect()
    }

    pub fn take(&mut self, count: usize) -> Vec<Vec<f64>> {
        (0..count).map(|_| self.next_point()).collect()
    }
}

/// Maps a point of `[0,1)^n` uniformly into the ball of radius `radius`
/// centred at `centre`. Uses `n + 1` coordinates of `u`: `n` normal quantiles
/// give an isotropic direction and the last one sets the radius.
pub fn uniform_in_ball(u: &[f64], centre: &[f64], radius: f64) -> Vec<f64> {
    let n = centre.len();
    assert!(u.len() > n, "need n + 1 uniforms for an n-ball sample");
    let mut dir: Vec<f64> = u[..n]
        .iter()
        .map(|&a| normal_quantile(a.clamp(1e-12, 1.0 - 1e-12)))
        .collect();
    let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        dir[0] = 1.0;
    } else {
        dir.iter_mut().for_each(|x| *x /= norm);
    }
    let rad = radius * u[n].powf(1.0 / n as f64);
    centre.iter().zip(&dir).map(|(c, d)| c + rad * d).collect()
}

/// Acklam's rational approximation of the standard normal quantile.
fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    let lo = 0.02425;
    if p < lo {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - lo {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -normal_quantile(1.0 - p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radical_inverse_base_two() {
        let got: Vec<f64> = (1..5).map(|i| radical_inverse(i, 2)).collect();
        assert_eq!(got, vec![0.5, 0.25, 0.75, 0.125]);
    }

    #[test]
    fn same_seed_same_points() {
        let a = HaltonSampler::new(4, 42).take(100);
        let b = HaltonSampler::new(4, 42).take(100);
        let c = HaltonSampler::new(4, 43).take(100);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().flatten().all(|x| (0.0..1.0).contains(x)));
    }

    #[test]
    fn ball_samples_stay_inside() {
        let mut s = HaltonSampler::new(4, 7);
        for _ in 0..2000 {
            let p = uniform_in_ball(&s.next_point(), &[1.0, 0.0, 0.0], 2.0);
            let d2 = (p[0] - 1.0).powi(2) + p[1] * p[1] + p[2] * p[2];
            assert!(d2 <= 4.0 + 1e-12);
        }
    }

    #[test]
    fn halton_mean_is_close_to_half() {
        let pts = HaltonSampler::new(3, 1).take(4096);
        for d in 0..3 {
            let mean = pts.iter().map(|p| p[d]).sum::<f64>() / pts.len() as f64;
            assert!((mean - 0.5).abs() < 2e-3, "dim {d}: {mean}");
        }
    }
}
