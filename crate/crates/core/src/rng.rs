//! SplitMix64 stream, per-replicate seed derivation and Marsaglia polar
//! normals. Everything here is a pure function of the seed, so generated
//! paths are reproducible bit for bit.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for replicate `replicate_id` of an experiment with master seed
/// `master`: the first SplitMix64 output from state
/// `master + replicate_id * GOLDEN_GAMMA`.
///
/// `derive_seed(0, 0)` is therefore the well-known first output of a
/// SplitMix64 generator seeded with zero.
pub fn derive_seed(master: u64, replicate_id: u64) -> u64 {
    SplitMix64::new(master.wrapping_add(replicate_id.wrapping_mul(GOLDEN_GAMMA))).next_u64()
}

/// Vigna's SplitMix64 generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform on [0, 1) with 53 bits of resolution.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        (self.next_u64() >> 11) as f64 * SCALE
    }

    /// +1 or -1 with equal probability (top bit of the next word).
    #[inline]
    pub fn next_sign(&mut self) -> f64 {
        if self.next_u64() >> 63 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Standard normal draws by the Marsaglia polar method. Each accepted pair
/// yields two variates; the second is cached for the next call.
#[derive(Debug, Clone)]
pub struct NormalStream {
    rng: SplitMix64,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: SplitMix64::new(seed),
            spare: None,
        }
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.rng.next_f64() - 1.0;
            let v = 2.0 * self.rng.next_f64() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let factor = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * factor);
                return u * factor;
            }
        }
    }

    pub fn fill(&mut self, out: &mut [f64]) {
        for x in out {
            *x = self.next_normal();
        }
    }
}

/// `count` i.i.d. N(0, 1) draws from the SplitMix64 stream seeded with `seed`.
pub fn sample_standard_normals(seed: u64, count: usize) -> Vec<f64> {
    let mut stream = NormalStream::new(seed);
    let mut out = vec![0.0; count];
    stream.fill(&mut out);
    out
}
