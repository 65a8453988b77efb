//! Deterministic seeded sampling of rational points.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::poly::{int, Polynomial, Rational};

pub const DEFAULT_SEED: u64 = 0xC0FFEE;
pub const DEFAULT_SAMPLES: usize = 200;
pub const DEFAULT_RADIUS: i64 = 2;
pub const MAX_DENOMINATOR: i64 = 64;

/// Draws rational points in the cube `[-radius, radius]^m` with denominators ≤ 64.
#[derive(Debug, Clone)]
pub struct RationalSampler {
    rng: ChaCha8Rng,
    radius: i64,
    seed: u64,
}

impl RationalSampler {
    pub fn new(seed: u64, radius: i64) -> Self {
        RationalSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            radius: radius.max(1),
            seed,
        }
    }

    /// Independent stream for task `task`; parallel and serial runs see the same points.
    pub fn derived(seed: u64, task: u64, radius: i64) -> Self {
        let mixed = seed ^ task.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let mut s = Self::new(mixed, radius);
        s.seed = seed;
        s
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rational(&mut self) -> Rational {
        let den = self.rng.gen_range(1..=MAX_DENOMINATOR);
        let bound = self.radius * den;
        let num = self.rng.gen_range(-bound..=bound);
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    pub fn point(&mut self, m: usize) -> Vec<Rational> {
        (0..m).map(|_| self.rational()).collect()
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            lo
        } else {
            self.rng.gen_range(lo..hi)
        }
    }

    pub fn point_f64(&mut self, m: usize, radius: f64) -> Vec<f64> {
        (0..m).map(|_| self.uniform(-radius, radius)).collect()
    }
}

/// A point where `p` is nonzero: small integer points first, then seeded samples.
/// `accept` filters candidates (e.g. points where denominators vanish).
pub fn find_nonzero_point<F>(
    p: &Polynomial,
    seed: u64,
    mut accept: F,
) -> Option<(Vec<Rational>, Rational)>
where
    F: FnMut(&[Rational]) -> bool,
{
    if p.is_zero() {
        return None;
    }
    let m = p.ctx().arity();
    let mut candidates: Vec<Vec<Rational>> = vec![vec![int(1); m]];
    for k in 0..m {
        let mut e = vec![int(1); m];
        e[k] = int(2);
        candidates.push(e);
    }
    candidates.push((0..m).map(|i| int(i as i64 + 1)).collect());
    for pt in candidates {
        if accept(&pt) {
            let val = p.evaluate(&pt).expect("arity");
            if val != int(0) {
                return Some((pt, val));
            }
        }
    }
    let mut s = RationalSampler::new(seed, DEFAULT_RADIUS);
    for _ in 0..10_000 {
        let pt = s.point(m);
        if !accept(&pt) {
            continue;
        }
        let val = p.evaluate(&pt).expect("arity");
        if val != int(0) {
            return Some((pt, val));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rat, VarContext};

    #[test]
    fn reproducible_and_in_cube() {
        let mut a = RationalSampler::new(DEFAULT_SEED, 2);
        let mut b = RationalSampler::new(DEFAULT_SEED, 2);
        for _ in 0..100 {
            let x = a.rational();
            assert_eq!(x, b.rational());
            assert!(x <= int(2) && x >= int(-2));
            assert!(x.denom() <= &BigInt::from(MAX_DENOMINATOR));
        }
    }

    #[test]
    fn nonzero_point_prefers_ones() {
        let c = VarContext::new(&["s"]).unwrap();
        let s = Polynomial::var(&c, "s").unwrap();
        let p = -(&s * &s);
        let (pt, val) = find_nonzero_point(&p, 1, |_| true).unwrap();
        assert_eq!(pt, vec![int(1)]);
        assert_eq!(val, int(-1));
        let q = &s - &Polynomial::constant(&c, int(1));
        let (pt, _) = find_nonzero_point(&q, 1, |_| true).unwrap();
        assert_ne!(pt, vec![int(1)]);
        assert_ne!(pt, vec![rat(1, 1)]);
    }
}
