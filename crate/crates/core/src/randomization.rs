//! Seeded random streams and the samplers used by every randomizer.
//!
//! A stream is keyed by a 256-bit digest of its derivation path, so a child
//! stream depends only on `(parent key, label)` and never on how many draws
//! were taken from the parent or its siblings.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RandomError {
    #[error("invalid range: lo ({lo}) > hi ({hi})")]
    InvalidRange { lo: f64, hi: f64 },
    #[error("choice over an empty item list")]
    EmptyItems,
    #[error("bad choice weights: {0}")]
    BadWeights(String),
    #[error("stream label must be nonempty")]
    EmptyLabel,
}

/// Reproducible random stream.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    key: [u8; 32],
    rng: ChaCha8Rng,
}

impl RngStream {
    /// Root stream for a master seed.
    pub fn new(seed: u64) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(b"groupsim/root");
        hasher.update(seed.to_le_bytes());
        Self::from_key(seed, hasher.finalize().into())
    }

    fn from_key(seed: u64, key: [u8; 32]) -> Self {
        Self {
            seed,
            key,
            rng: ChaCha8Rng::from_seed(key),
        }
    }

    /// Master seed this stream descends from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Child stream for `label`. Independent of the parent's draw position.
    pub fn derive(&self, label: &str) -> Result<RngStream, RandomError> {
        if label.is_empty() {
            return Err(RandomError::EmptyLabel);
        }
        let mut hasher = Sha256::new();
        hasher.update(self.key);
        hasher.update((label.len() as u64).to_le_bytes());
        hasher.update(label.as_bytes());
        Ok(Self::from_key(self.seed, hasher.finalize().into()))
    }

    /// Like [`derive`](Self::derive) for labels built in code, which are never empty.
    pub(crate) fn child(&self, label: &str) -> RngStream {
        self.derive(label)
            .expect("internal stream labels are nonempty")
    }

    pub(crate) fn child_indexed(&self, label: &str, index: usize) -> RngStream {
        self.child(&format!("{label}/{index}"))
    }

    /// Uniform real in `[lo, hi)`; returns `lo` when the range is degenerate.
    pub fn sample_real(&mut self, lo: f64, hi: f64) -> Result<f64, RandomError> {
        if !(lo <= hi) {
            return Err(RandomError::InvalidRange { lo, hi });
        }
        if lo == hi {
            return Ok(lo);
        }
        loop {
            let u: f64 = self.rng.gen();
            let v = lo + (hi - lo) * u;
            // rounding can land exactly on `hi`
            if v < hi {
                return Ok(v);
            }
        }
    }

    /// Uniform integer in `[lo, hi]`, inclusive.
    pub fn sample_int(&mut self, lo: i64, hi: i64) -> Result<i64, RandomError> {
        if lo > hi {
            return Err(RandomError::InvalidRange {
                lo: lo as f64,
                hi: hi as f64,
            });
        }
        Ok(self.rng.gen_range(lo..=hi))
    }

    /// Index in `[0, len)`; panics on zero length.
    pub(crate) fn sample_index(&mut self, len: usize) -> usize {
        self.rng.gen_range(0..len)
    }

    /// Pick one item, uniformly or by nonnegative weights.
    pub fn sample_choice<'a, T>(
        &mut self,
        items: &'a [T],
        weights: Option<&[f64]>,
    ) -> Result<&'a T, RandomError> {
        let index = self.sample_choice_index(items.len(), weights)?;
        Ok(&items[index])
    }

    pub fn sample_choice_index(
        &mut self,
        len: usize,
        weights: Option<&[f64]>,
    ) -> Result<usize, RandomError> {
        if len == 0 {
            return Err(RandomError::EmptyItems);
        }
        match weights {
            None => Ok(self.sample_index(len)),
            Some(w) => {
                check_weights(w, len)?;
                let dist =
                    WeightedIndex::new(w).map_err(|e| RandomError::BadWeights(e.to_string()))?;
                Ok(dist.sample(&mut self.rng))
            }
        }
    }

    /// Partial Fisher-Yates: `k` distinct indices from `[0, len)`.
    pub(crate) fn sample_distinct(&mut self, len: usize, k: usize) -> Vec<usize> {
        let mut pool: Vec<usize> = (0..len).collect();
        let k = k.min(len);
        for i in 0..k {
            let j = self.rng.gen_range(i..len);
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}

fn check_weights(weights: &[f64], len: usize) -> Result<(), RandomError> {
    if weights.len() != len {
        return Err(RandomError::BadWeights(format!(
            "{} weights for {} items",
            weights.len(),
            len
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(RandomError::BadWeights(
            "weights must be finite and nonnegative".into(),
        ));
    }
    if weights.iter().sum::<f64>() <= 0.0 {
        return Err(RandomError::BadWeights("weights sum to zero".into()));
    }
    Ok(())
}

/// Closed real interval used by the distribution specs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    fn check(&self) -> Result<(), RandomError> {
        if self.lo <= self.hi {
            Ok(())
        } else {
            Err(RandomError::InvalidRange {
                lo: self.lo,
                hi: self.hi,
            })
        }
    }

    fn sample(&self, rng: &mut RngStream) -> Result<f64, RandomError> {
        rng.sample_real(self.lo, self.hi)
    }
}

/// Declarative description of one randomizer's distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSpec {
    RealUniform(Range),
    IntUniform {
        lo: i64,
        hi: i64,
    },
    Choice {
        items: Vec<String>,
        weights: Option<Vec<f64>>,
    },
    ColorHsv {
        h: Range,
        s: Range,
        v: Range,
    },
    ColorRgba {
        r: Range,
        g: Range,
        b: Range,
        a: Range,
    },
    Cartesian {
        x: Box<DistributionSpec>,
        y: Box<DistributionSpec>,
        z: Box<DistributionSpec>,
    },
    /// Yaw-only rotation, degrees.
    EulerY(Range),
}

/// One draw from a [`DistributionSpec`].
#[derive(Clone, Debug, PartialEq)]
pub enum Sample {
    Real(f64),
    Int(i64),
    Choice(String),
    Color([f64; 4]),
    Vector([f64; 3]),
}

impl Sample {
    pub fn as_real(&self) -> Option<f64> {
        match self {
            Sample::Real(v) => Some(*v),
            Sample::Int(v) => Some(*v as f64),
            _ => None,
        }
    }
}

impl DistributionSpec {
    /// Constant-valued real, e.g. the fixed 0 in `Cartesian[U, 0, U]`.
    pub fn constant(value: f64) -> Self {
        DistributionSpec::RealUniform(Range::new(value, value))
    }

    pub fn validate(&self) -> Result<(), RandomError> {
        match self {
            DistributionSpec::RealUniform(r) | DistributionSpec::EulerY(r) => r.check(),
            DistributionSpec::IntUniform { lo, hi } => {
                if lo <= hi {
                    Ok(())
                } else {
                    Err(RandomError::InvalidRange {
                        lo: *lo as f64,
                        hi: *hi as f64,
                    })
                }
            }
            DistributionSpec::Choice { items, weights } => {
                if items.is_empty() {
                    return Err(RandomError::EmptyItems);
                }
                match weights {
                    Some(w) => check_weights(w, items.len()),
                    None => Ok(()),
                }
            }
            DistributionSpec::ColorHsv { h, s, v } => {
                for r in [h, s, v] {
                    check_unit(r)?;
                }
                Ok(())
            }
            DistributionSpec::ColorRgba { r, g, b, a } => {
                for c in [r, g, b, a] {
                    check_unit(c)?;
                }
                Ok(())
            }
            DistributionSpec::Cartesian { x, y, z } => {
                for axis in [x, y, z] {
                    axis.validate()?;
                    if axis.is_vector() {
                        return Err(RandomError::BadWeights(
                            "cartesian axes must be scalar distributions".into(),
                        ));
                    }
                }
                Ok(())
            }
        }
    }

    fn is_vector(&self) -> bool {
        !matches!(
            self,
            DistributionSpec::RealUniform(_)
                | DistributionSpec::IntUniform { .. }
                | DistributionSpec::EulerY(_)
        )
    }

    pub fn sample(&self, rng: &mut RngStream) -> Result<Sample, RandomError> {
        self.validate()?;
        self.sample_unchecked(rng)
    }

    fn sample_unchecked(&self, rng: &mut RngStream) -> Result<Sample, RandomError> {
        Ok(match self {
            DistributionSpec::RealUniform(r) => Sample::Real(r.sample(rng)?),
            DistributionSpec::EulerY(r) => Sample::Real(r.sample(rng)?.rem_euclid(360.0)),
            DistributionSpec::IntUniform { lo, hi } => Sample::Int(rng.sample_int(*lo, *hi)?),
            DistributionSpec::Choice { items, weights } => {
                Sample::Choice(rng.sample_choice(items, weights.as_deref())?.clone())
            }
            DistributionSpec::ColorHsv { h, s, v } => {
                let hsv = [h.sample(rng)?, s.sample(rng)?, v.sample(rng)?];
                Sample::Color([hsv[0], hsv[1], hsv[2], 1.0])
            }
            DistributionSpec::ColorRgba { r, g, b, a } => Sample::Color([
                r.sample(rng)?,
                g.sample(rng)?,
                b.sample(rng)?,
                a.sample(rng)?,
            ]),
            DistributionSpec::Cartesian { x, y, z } => {
                let mut out = [0.0; 3];
                for (slot, axis) in out.iter_mut().zip([x, y, z]) {
                    *slot = axis
                        .sample_unchecked(rng)?
                        .as_real()
                        .expect("validated scalar axis");
                }
                Sample::Vector(out)
            }
        })
    }
}

fn check_unit(r: &Range) -> Result<(), RandomError> {
    r.check()?;
    if r.lo < 0.0 || r.hi > 1.0 {
        return Err(RandomError::InvalidRange { lo: r.lo, hi: r.hi });
    }
    Ok(())
}
