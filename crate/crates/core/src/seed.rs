//! Counter-based seeding.
//!
//! A [`SeedPath`] is a master seed plus a path of indices. The stream for a
//! path is a pure function of `(master, path)`, so replicate `i` draws the same
//! numbers no matter which thread runs it or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type Rng = ChaCha8Rng;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn step(key: u64, index: u64) -> u64 {
    mix(key ^ mix(index.wrapping_add(0xD1B5_4A32_D192_ED03)))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(from = "SeedRepr", into = "SeedRepr")]
pub struct SeedPath {
    master: u64,
    path: Vec<u64>,
    key: u64,
}

#[derive(Serialize, Deserialize)]
struct SeedRepr {
    master: u64,
    #[serde(default)]
    path: Vec<u64>,
}

impl From<SeedRepr> for SeedPath {
    fn from(r: SeedRepr) -> Self {
        r.path
            .iter()
            .fold(SeedPath::new(r.master), |s, &i| s.child(i))
    }
}

impl From<SeedPath> for SeedRepr {
    fn from(s: SeedPath) -> Self {
        SeedRepr {
            master: s.master,
            path: s.path,
        }
    }
}

impl PartialEq for SeedPath {
    fn eq(&self, other: &Self) -> bool {
        self.master == other.master && self.path == other.path
    }
}
impl Eq for SeedPath {}

impl SeedPath {
    pub fn new(master: u64) -> Self {
        SeedPath {
            master,
            path: Vec::new(),
            key: mix(master),
        }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    /// The 64-bit digest of `(master, path)`.
    pub fn key(&self) -> u64 {
        self.key
    }

    pub fn child(&self, index: u64) -> SeedPath {
        let mut path = Vec::with_capacity(self.path.len() + 1);
        path.extend_from_slice(&self.path);
        path.push(index);
        SeedPath {
            master: self.master,
            path,
            key: step(self.key, index),
        }
    }

    pub fn rng(&self) -> Rng {
        Rng::seed_from_u64(self.key)
    }

    /// Same stream as `self.child(index).rng()` without building the path.
    pub fn child_rng(&self, index: u64) -> Rng {
        Rng::seed_from_u64(step(self.key, index))
    }
}
