//! Seed derivation, quasi-random sphere points and compensated summation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const PRIMES: [u64; 24] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
];

/// Largest dimension the Halton generator supports.
pub const MAX_HALTON_DIM: usize = PRIMES.len();

/// FNV-1a over a byte stream.
#[derive(Debug, Clone, Copy)]
pub struct InstanceHasher(u64);

impl Default for InstanceHasher {
    fn default() -> Self {
        InstanceHasher(0xcbf2_9ce4_8422_2325)
    }
}

impl InstanceHasher {
    pub fn bytes(&mut self, bytes: &[u8]) -> &mut Self {
        for b in bytes {
            self.0 ^= u64::from(*b);
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
        self
    }

    pub fn f64(&mut self, x: f64) -> &mut Self {
        self.bytes(&x.to_bits().to_le_bytes())
    }

    pub fn u64(&mut self, x: u64) -> &mut Self {
        self.bytes(&x.to_le_bytes())
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for a stochastic step, derived from the global seed, the operation
/// name and a hash of the instance being processed.
pub fn derive_seed(global: u64, operation: &str, instance: u64) -> u64 {
    let mut h = InstanceHasher::default();
    h.u64(global).bytes(operation.as_bytes()).u64(instance);
    splitmix(h.finish())
}

pub fn rng_for(global: u64, operation: &str, instance: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(global, operation, instance))
}

fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while index > 0 {
        out += f * (index % base) as f64;
        index /= base;
        f *= inv;
    }
    out
}

/// Point `index` of the Halton sequence in `[0,1)^dim`.
pub fn halton(index: u64, dim: usize) -> Vec<f64> {
    assert!(
        dim <= MAX_HALTON_DIM,
        "Halton sequence limited to {MAX_HALTON_DIM} dimensions"
    );
    PRIMES[..dim].iter().map(|&b| radical_inverse(index, b)).collect()
}

/// A quasi-random direction in `ℝ^dim` (not normalized): Box–Muller applied
/// to Halton coordinates gives Gaussian-like coordinates, so the direction
/// is close to uniform on the sphere.
pub fn quasi_random_direction(index: u64, dim: usize) -> Vec<f64> {
    let pairs = dim.div_ceil(2);
    let u = halton(index + 1, 2 * pairs);
    let mut out = Vec::with_capacity(2 * pairs);
    for k in 0..pairs {
        // index + 1 keeps u strictly positive
        let r = (-2.0 * u[2 * k].max(f64::MIN_POSITIVE).ln()).sqrt();
        let theta = std::f64::consts::TAU * u[2 * k + 1];
        out.push(r * theta.cos());
        out.push(r * theta.sin());
    }
    out.truncate(dim);
    out
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `(Σ|a_k|^q)^{1/q}`, scaled by the largest modulus; valid for every `q > 0`.
pub fn power_mean_norm(values: impl Iterator<Item = f64> + Clone, q: f64) -> f64 {
    let max = values.clone().fold(0.0_f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return 0.0;
    }
    let mut acc = CompensatedSum::default();
    for v in values {
        acc.add((v.abs() / max).powf(q));
    }
    max * acc.value().powf(1.0 / q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halton_first_points() {
        assert_eq!(halton(1, 2), vec![0.5, 1.0 / 3.0]);
        assert_eq!(halton(2, 2), vec![0.25, 2.0 / 3.0]);
    }

    #[test]
    fn seeds_depend_on_every_component() {
        let a = derive_seed(42, "weak_norm", 7);
        assert_eq!(a, derive_seed(42, "weak_norm", 7));
        assert_ne!(a, derive_seed(43, "weak_norm", 7));
        assert_ne!(a, derive_seed(42, "operator_norm", 7));
        assert_ne!(a, derive_seed(42, "weak_norm", 8));
    }

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let mut s = CompensatedSum::default();
        for x in [1e16, 1.0, -1e16] {
            s.add(x);
        }
        assert_eq!(s.value(), 1.0);
    }

    #[test]
    fn power_mean_norm_handles_extremes() {
        assert_eq!(power_mean_norm([3.0, 4.0].into_iter(), 2.0), 5.0);
        assert_eq!(power_mean_norm([0.0, 0.0].into_iter(), 0.5), 0.0);
        let tiny = power_mean_norm([1e-200, 1e-200].into_iter(), 2.0);
        assert!((tiny / (1e-200 * 2f64.sqrt()) - 1.0).abs() < 1e-15);
    }
}
