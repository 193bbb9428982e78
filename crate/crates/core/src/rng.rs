//! Counter-based random numbers.
//!
//! Every draw is a pure function of `(seed, stream, row, index)`: the key is
//! derived from `(seed, stream)` and the 128-bit Philox counter holds
//! `(index / 2, row)`. Rows can therefore be generated in any order, on any
//! number of threads, and in any batch split without changing a single bit.

use statrs::distribution::{ContinuousCDF, Normal};

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = a as u64 * b as u64;
    ((p >> 32) as u32, p as u32)
}

/// Philox4x32 with 10 rounds.
pub fn philox4x32(counter: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut c = counter;
    let mut k = key;
    for round in 0..10 {
        if round > 0 {
            k[0] = k[0].wrapping_add(PHILOX_W0);
            k[1] = k[1].wrapping_add(PHILOX_W1);
        }
        let (hi0, lo0) = mulhilo(PHILOX_M0, c[0]);
        let (hi1, lo1) = mulhilo(PHILOX_M1, c[2]);
        c = [hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0];
    }
    c
}

/// Generator for one row of one stream.
#[derive(Debug, Clone)]
pub struct RowRng {
    key: [u32; 2],
    row: u64,
    block: u64,
    buffered: Option<u64>,
}

impl RowRng {
    pub fn new(seed: u64, stream: u64, row: u64) -> Self {
        let k = splitmix64(seed ^ splitmix64(stream));
        Self { key: [k as u32, (k >> 32) as u32], row, block: 0, buffered: None }
    }

    pub fn next_u64(&mut self) -> u64 {
        if let Some(v) = self.buffered.take() {
            return v;
        }
        let out = philox4x32(
            [self.block as u32, (self.block >> 32) as u32, self.row as u32, (self.row >> 32) as u32],
            self.key,
        );
        self.block += 1;
        self.buffered = Some(out[2] as u64 | (out[3] as u64) << 32);
        out[0] as u64 | (out[1] as u64) << 32
    }

    /// Uniform on the open interval (0, 1): the midpoint of one of 2^52
    /// equal cells, so both ends are excluded exactly.
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
    }

    /// Standard normal through the inverse CDF, one uniform per draw.
    pub fn standard_normal(&mut self) -> f64 {
        inverse_normal_cdf(self.uniform())
    }
}

pub fn inverse_normal_cdf(u: f64) -> f64 {
    thread_local! {
        static STD: Normal = Normal::new(0.0, 1.0).expect("unit normal");
    }
    STD.with(|n| n.inverse_cdf(u))
}
