//! Binary symmetric source and its two noisy observations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bounds::ObservationModel;
use crate::gf2::BitSequence;

/// `x ~ Bern(1/2)^n` and `y_i = x xor Bern(p_i)^n`, all from one seeded stream.
pub fn simulate_source(n: usize, model: &ObservationModel, seed: u64) -> (BitSequence, BitSequence, BitSequence) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = BitSequence::bernoulli(n, 0.5, &mut rng);
    let noisy = |p: f64, rng: &mut ChaCha8Rng| {
        let e = BitSequence::bernoulli(n, p, rng);
        x.xor(&e).expect("equal lengths")
    };
    let y1 = noisy(model.p1(), &mut rng);
    let y2 = noisy(model.p2(), &mut rng);
    (x, y1, y2)
}

/// Seed number `index` of the stream selected by `(base, stream)`.
///
/// ChaCha's 64-bit stream id gives independent, counter-addressable
/// sequences, so a trial's seeds do not depend on how many trials run.
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    use rand::RngCore;
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(stream);
    rng.set_word_pos(2 * index as u128);
    rng.next_u64()
}
