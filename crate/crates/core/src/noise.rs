//! Seeded range-noise models and the noisy distance-measurement simulator.
//!
//! Reproducibility is the contract here: the generator is pinned to ChaCha12
//! (via `rand_chacha`), Gaussian variates come from the Box-Muller transform
//! evaluated with `libm`, and uniform variates from the top 53 bits of the
//! stream. None of that depends on platform math libraries, so a fixed seed
//! yields bit-identical offset streams everywhere.
//!
//! Independent substreams come from ChaCha's 64-bit stream counter:
//! substream `k` of a model is the same key with stream id `k`, so repetition
//! streams never overlap.

use crate::error::Error;
use crate::geometry::{AnchorSet, Point2D};
use crate::Result;
use alloc::format;
use alloc::vec::Vec;
use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

/// Noise distribution family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    /// Zero-mean Gaussian; the level is the standard deviation sigma.
    Gaussian,
    /// Symmetric uniform U(-a, a) with `a = level * sqrt(3)`, so a given
    /// level means the same standard deviation under both families.
    Uniform,
}

/// A reproducible range-noise model: distribution family, level, and seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub level: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(kind: NoiseKind, level: f64, seed: u64) -> Result<Self> {
        if !(level.is_finite() && level >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "noise level must be finite and >= 0, got {level}"
            )));
        }
        Ok(Self { kind, level, seed })
    }

    pub fn gaussian(level: f64, seed: u64) -> Result<Self> {
        Self::new(NoiseKind::Gaussian, level, seed)
    }

    pub fn uniform(level: f64, seed: u64) -> Result<Self> {
        Self::new(NoiseKind::Uniform, level, seed)
    }

    /// Sampler on the default substream (stream id 0).
    pub fn sampler(&self) -> NoiseSampler {
        self.substream(0)
    }

    /// Sampler on substream `k`. Distinct `k` never overlap.
    pub fn substream(&self, k: u64) -> NoiseSampler {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(k);
        NoiseSampler {
            kind: self.kind,
            level: self.level,
            rng,
            spare: None,
        }
    }
}

/// A stateful stream of noise offsets bound to one model substream.
#[derive(Debug, Clone)]
pub struct NoiseSampler {
    kind: NoiseKind,
    level: f64,
    rng: ChaCha12Rng,
    spare: Option<f64>,
}

impl NoiseSampler {
    /// Next offset from the stream.
    pub fn draw(&mut self) -> f64 {
        match self.kind {
            NoiseKind::Gaussian => self.level * self.standard_normal(),
            NoiseKind::Uniform => {
                let a = self.level * libm::sqrt(3.0);
                a * (2.0 * unit_f64(self.rng.next_u64()) - 1.0)
            }
        }
    }

    /// `count` offsets from the stream.
    pub fn draw_many(&mut self, count: usize) -> Vec<f64> {
        (0..count).map(|_| self.draw()).collect()
    }

    /// One epoch of noisy distance measurements from `p` to every anchor:
    /// `d_hat = max(0, d + offset)`, one fresh offset per anchor.
    pub fn measure(
        &mut self,
        anchors: &AnchorSet,
        p: Point2D,
        epoch: u64,
    ) -> Result<RangeSample> {
        let mut distances = Vec::with_capacity(anchors.len());
        for a in anchors.anchors() {
            let d = p.distance_to(a.position);
            if d == 0.0 {
                return Err(Error::Singularity(format!(
                    "measurement point coincides with anchor {}",
                    a.id
                )));
            }
            distances.push((d + self.draw()).max(0.0));
        }
        Ok(RangeSample {
            epoch,
            distances,
            truth: Some(p),
        })
    }

    /// Box-Muller transform; generates variates in pairs and caches the spare.
    fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = open_unit_f64(self.rng.next_u64());
        let u2 = unit_f64(self.rng.next_u64());
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let theta = 2.0 * core::f64::consts::PI * u2;
        self.spare = Some(r * libm::sin(theta));
        r * libm::cos(theta)
    }
}

/// One epoch of measured distances to `m` anchors, in anchor order,
/// optionally carrying the true position for evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeSample {
    pub epoch: u64,
    pub distances: Vec<f64>,
    pub truth: Option<Point2D>,
}

impl RangeSample {
    pub fn new(epoch: u64, distances: Vec<f64>, truth: Option<Point2D>) -> Self {
        Self { epoch, distances, truth }
    }

    /// A noise-free sample: exact distances from `p` to every anchor.
    pub fn exact(anchors: &AnchorSet, p: Point2D, epoch: u64) -> Self {
        Self {
            epoch,
            distances: anchors.true_distances(p),
            truth: Some(p),
        }
    }
}

/// Draws `count` offsets from the model's default substream.
pub fn draw_noise(model: &NoiseModel, count: usize) -> Vec<f64> {
    model.sampler().draw_many(count)
}

/// One measurement epoch using the model's default substream.
pub fn measure(anchors: &AnchorSet, p: Point2D, model: &NoiseModel) -> Result<RangeSample> {
    model.sampler().measure(anchors, p, 0)
}

/// Uniform in [0, 1) from the top 53 bits of a random word. Public so that
/// harness code drawing its own coordinates shares one conversion rule.
pub fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform in (0, 1]; safe as a log argument.
fn open_unit_f64(bits: u64) -> f64 {
    ((bits >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Derives an independent sub-seed from `(seed, k)` (SplitMix64 finalizer).
/// Used by callers that need whole families of unrelated streams, e.g. one
/// noise model per random placement.
pub fn derive_seed(seed: u64, k: u64) -> u64 {
    let mut z = seed ^ k.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
