//! Reproducible random streams and Latin hypercube designs.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::pareto::DecisionVector;
use crate::problems::ProblemSpec;

/// A named random stream. Each `(seed, label)` pair yields its own
/// deterministic ChaCha sequence; labels select disjoint ChaCha streams.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    label: String,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, label: impl Into<String>) -> Self {
        let label = label.into();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(label_hash(&label));
        Self { seed, label, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Word position inside the stream; two streams that have produced the
    /// same sequence so far have the same position.
    pub fn word_pos(&self) -> u128 {
        self.rng.get_word_pos()
    }

    pub fn stream_id(&self) -> u64 {
        self.rng.get_stream()
    }
}

// FNV-1a, chosen for stability across platforms and releases.
fn label_hash(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
}

/// Latin hypercube design of `n` points inside the problem's box.
///
/// For every dimension the `n` equal-width strata each receive exactly one
/// point, at a uniform position inside the stratum.
pub fn latin_hypercube(
    n: usize,
    spec: &ProblemSpec,
    rng: &mut RngStream,
) -> Result<Vec<DecisionVector>> {
    latin_hypercube_in(n, spec.lower(), spec.upper(), rng)
}

pub fn latin_hypercube_in(
    n: usize,
    lower: &[f64],
    upper: &[f64],
    rng: &mut RngStream,
) -> Result<Vec<DecisionVector>> {
    if n == 0 {
        return Err(Error::EmptyInput("latin hypercube size"));
    }
    crate::error::check_len(lower.len(), upper.len())?;
    let d = lower.len();
    let mut points = vec![vec![0.0; d]; n];
    let mut strata: Vec<usize> = (0..n).collect();
    for k in 0..d {
        strata.shuffle(rng);
        let width = upper[k] - lower[k];
        for (point, &s) in points.iter_mut().zip(&strata) {
            let u: f64 = rng.random();
            let v = lower[k] + (s as f64 + u) / n as f64 * width;
            point[k] = v.clamp(lower[k], upper[k]);
        }
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_label_same_sequence() {
        let mut a = RngStream::new(42, "init");
        let mut b = RngStream::new(42, "init");
        let xs: Vec<u64> = (0..16).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..16).map(|_| b.next_u64()).collect();
        assert_eq!(xs, ys);
    }

    #[test]
    fn labels_and_seeds_separate_streams() {
        let mut a = RngStream::new(42, "init");
        let mut b = RngStream::new(42, "moea");
        let mut c = RngStream::new(43, "init");
        let xa = a.next_u64();
        assert_ne!(xa, b.next_u64());
        assert_ne!(xa, c.next_u64());
        assert_ne!(a.stream_id(), b.stream_id());
    }

    #[test]
    fn one_dimensional_strata() {
        let mut rng = RngStream::new(7, "init");
        let pts = latin_hypercube_in(4, &[0.0], &[1.0], &mut rng).unwrap();
        let mut hit = [0; 4];
        for p in &pts {
            hit[((p[0] * 4.0) as usize).min(3)] += 1;
        }
        assert_eq!(hit, [1, 1, 1, 1]);
    }

    #[test]
    fn zero_points_is_an_error() {
        let mut rng = RngStream::new(7, "init");
        assert!(matches!(
            latin_hypercube_in(0, &[0.0], &[1.0], &mut rng),
            Err(Error::EmptyInput(_))
        ));
    }
}
