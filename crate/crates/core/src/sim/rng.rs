//! Per-purpose deterministic random streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Context = 1,
    Arm = 2,
    Reward = 3,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of stream `tag` for `(base_seed, epoch)`.
pub fn stream_seed(base_seed: u64, epoch: u64, tag: Stream) -> u64 {
    splitmix(splitmix(splitmix(base_seed) ^ epoch) ^ tag as u64)
}

/// Words reserved per round on the reward stream. Round `t` always starts
/// at the same position, so the rewards of different policies on the same
/// seed are coupled round by round.
const REWARD_WORDS: u128 = 16;

/// The three streams of one episode.
#[derive(Clone, Debug)]
pub struct EpisodeRng {
    context: ChaCha8Rng,
    arm: ChaCha8Rng,
    reward: ChaCha8Rng,
}

impl EpisodeRng {
    pub fn new(base_seed: u64, epoch: u64) -> Self {
        let make = |tag| ChaCha8Rng::seed_from_u64(stream_seed(base_seed, epoch, tag));
        Self {
            context: make(Stream::Context),
            arm: make(Stream::Arm),
            reward: make(Stream::Reward),
        }
    }

    /// Index drawn from the distribution `probs` (inverse CDF).
    fn categorical(rng: &mut ChaCha8Rng, probs: impl Iterator<Item = f64>) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last = 0;
        for (i, p) in probs.enumerate() {
            if p > 0.0 {
                last = i;
                acc += p;
                if u < acc {
                    return i;
                }
            }
        }
        // Round-off left u above the total mass.
        last
    }

    pub fn context(&mut self, probs: &[f64]) -> usize {
        Self::categorical(&mut self.context, probs.iter().copied())
    }

    pub fn arm(&mut self, column: &[f64]) -> usize {
        Self::categorical(&mut self.arm, column.iter().copied())
    }

    /// Standard normal and uniform variates for round `t`.
    pub fn reward_noise(&mut self, t: u64) -> (f64, f64) {
        self.reward.set_word_pos(REWARD_WORDS * t as u128);
        let u: f64 = self.reward.random();
        let z: f64 = self.reward.sample(StandardNormal);
        (z, u)
    }
}
