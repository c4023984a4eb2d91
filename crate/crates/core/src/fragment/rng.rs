use rand_core::Rng;
use rand_pcg::Pcg32;

/// Stream constant of the reference PCG32 generator
/// (increment 1442695040888963407).
const PCG_STREAM: u64 = 0x0a02_bdbf_7bb3_c0a7;

/// PCG-XSH-RR 64/32 with reference seeding, plus the bounded draw of the
/// reference implementation. Draw sequences are fixed across platforms and
/// crate versions.
pub struct SeededRng(Pcg32);

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng::with_stream(seed, PCG_STREAM)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        SeededRng(Pcg32::new(seed, stream))
    }

    pub fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    /// Uniform integer in `0..bound` by rejection of the biased low range.
    pub fn below(&mut self, bound: u32) -> u32 {
        assert!(bound > 0, "empty range");
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let r = self.next_u32();
            if r >= threshold {
                return r % bound;
            }
        }
    }

    /// Uniform real in `[0, 1)` with 32 bits of resolution.
    pub fn unit(&mut self) -> f64 {
        self.next_u32() as f64 / 4_294_967_296.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_demo_vector() {
        // pcg32-demo output for initstate 42, initseq 54.
        let mut rng = SeededRng::with_stream(42, 54);
        let got: Vec<u32> = (0..6).map(|_| rng.next_u32()).collect();
        assert_eq!(
            got,
            [0xa15c02b7, 0x7b47f409, 0xba1d3330, 0x83d2f293, 0xbfa4784b, 0xcbed606e]
        );
    }

    #[test]
    fn bounded_draws_stay_in_range() {
        let mut rng = SeededRng::new(1);
        let mut seen = [false; 7];
        for _ in 0..500 {
            let v = rng.below(7);
            seen[v as usize] = true;
        }
        assert!(seen.iter().all(|&s| s));
        assert_eq!(SeededRng::new(3).below(1), 0);
    }
}
