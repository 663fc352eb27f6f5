//! Space-filling designs: Sobol sequences (optionally digitally shifted),
//! Latin hypercube samples, and seed derivation.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BITS: u32 = 52;

// (degree, polynomial coefficients, initial direction numbers) for dimensions 2..
// from the Joe-Kuo "new-joe-kuo-6.21201" table.
const DIRECTIONS: &[(u32, u32, &[u32])] = &[
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
    (5, 4, &[1, 1, 5, 5, 5]),
    (5, 7, &[1, 1, 7, 11, 19]),
    (5, 11, &[1, 1, 5, 1, 1]),
    (5, 13, &[1, 1, 1, 3, 11]),
    (5, 14, &[1, 3, 5, 5, 31]),
    (6, 1, &[1, 3, 3, 9, 7, 49]),
    (6, 13, &[1, 1, 1, 15, 21, 21]),
    (6, 16, &[1, 3, 1, 13, 27, 49]),
];

pub const MAX_SOBOL_DIM: usize = DIRECTIONS.len() + 1;

/// Gray-code Sobol generator over `[0, 1)^d`, skipping the origin.
#[derive(Debug, Clone)]
pub struct Sobol {
    directions: Vec<[u64; BITS as usize]>,
    state: Vec<u64>,
    shift: Vec<u64>,
    index: u64,
}

impl Sobol {
    pub fn new(dim: usize) -> Self {
        assert!(
            (1..=MAX_SOBOL_DIM).contains(&dim),
            "Sobol dimension must be in 1..={MAX_SOBOL_DIM}"
        );
        let mut directions = Vec::with_capacity(dim);
        let mut first = [0u64; BITS as usize];
        for (i, v) in first.iter_mut().enumerate() {
            *v = 1u64 << (BITS - 1 - i as u32);
        }
        directions.push(first);
        for &(s, a, m) in DIRECTIONS.iter().take(dim - 1) {
            let s = s as usize;
            let mut v = [0u64; BITS as usize];
            for i in 0..BITS as usize {
                if i < s {
                    v[i] = (m[i] as u64) << (BITS - 1 - i as u32);
                } else {
                    let mut x = v[i - s] ^ (v[i - s] >> s);
                    for k in 1..s {
                        if (a >> (s - 1 - k)) & 1 == 1 {
                            x ^= v[i - k];
                        }
                    }
                    v[i] = x;
                }
            }
            directions.push(v);
        }
        Self { directions, state: vec![0; dim], shift: vec![0; dim], index: 0 }
    }

    /// Sobol sequence with a random digital shift (XOR scrambling).
    pub fn scrambled(dim: usize, seed: u64) -> Self {
        let mut s = Self::new(dim);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mask = (1u64 << BITS) - 1;
        s.shift = (0..dim).map(|_| rng.random::<u64>() & mask).collect();
        s
    }

    pub fn dim(&self) -> usize {
        self.state.len()
    }

    pub fn next_point(&mut self) -> Vec<f64> {
        let c = (!self.index).trailing_zeros() as usize;
        self.index += 1;
        let scale = (1u64 << BITS) as f64;
        self.state
            .iter_mut()
            .zip(&self.directions)
            .zip(&self.shift)
            .map(|((x, v), sh)| {
                *x ^= v[c.min(BITS as usize - 1)];
                ((*x ^ sh) as f64) / scale
            })
            .collect()
    }

    pub fn take_points(&mut self, n: usize) -> Vec<Vec<f64>> {
        (0..n).map(|_| self.next_point()).collect()
    }
}

/// Latin hypercube sample of `n` points in `[0, 1)^d`.
pub fn latin_hypercube(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = vec![vec![0.0; dim]; n];
    let mut perm: Vec<usize> = (0..n).collect();
    for j in 0..dim {
        perm.shuffle(&mut rng);
        for (i, p) in pts.iter_mut().enumerate() {
            let u: f64 = rng.random();
            p[j] = (perm[i] as f64 + u) / n as f64;
        }
    }
    pts
}

/// SplitMix64 finalizer, used to derive independent child seeds.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed
        .wrapping_add(salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
