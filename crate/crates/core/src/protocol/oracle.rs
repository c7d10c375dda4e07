use bitvec::prelude::*;
use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Bit strings at bit granularity, most significant bit first in each byte.
pub type Bits = BitVec<u8, Msb0>;

/// Deterministic stand-in for the map functions: `iv(q, n)` is a keyed
/// pseudo-random `beta`-bit string depending only on `(seed, q, n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IvOracle {
    seed: u64,
    beta: usize,
}

impl IvOracle {
    pub fn new(seed: u64, beta: usize) -> Self {
        Self { seed, beta }
    }

    pub fn beta(&self) -> usize {
        self.beta
    }

    /// The intermediate value of function `q` on file `n`.
    pub fn iv(&self, q: usize, n: usize) -> Bits {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&(q as u64).to_le_bytes());
        key[16..24].copy_from_slice(&(n as u64).to_le_bytes());
        let mut rng = ChaCha20Rng::from_seed(key);
        let mut bytes = vec![0u8; self.beta.div_ceil(8)];
        rng.fill_bytes(&mut bytes);
        let mut bits = Bits::from_vec(bytes);
        bits.truncate(self.beta);
        bits
    }
}

/// Bitwise XOR of `src` into `dst`; lengths must agree.
pub fn xor_into(dst: &mut BitSlice<u8, Msb0>, src: &BitSlice<u8, Msb0>) {
    assert_eq!(dst.len(), src.len(), "xor of unequal-length bit strings");
    for (mut d, s) in dst.iter_mut().zip(src.iter().by_vals()) {
        *d ^= s;
    }
}

/// Lowercase hex of the bit string, zero-padded to whole bytes.
pub fn to_hex(bits: &BitSlice<u8, Msb0>) -> String {
    let mut owned = bits.to_bitvec();
    owned.set_uninitialized(false);
    hex::encode(owned.as_raw_slice())
}
