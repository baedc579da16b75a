//! Deterministic MT19937 generator with a documented draw-order contract.
//!
//! Every random decision made by the encoder flows through one `MtState`
//! in a fixed order, so regenerating the stream from a candidate seed
//! reproduces an encoded dataset bit-exactly. The contract:
//!
//! - `next_u32` is the standard tempered 32-bit output.
//! - `next_f64` is `next_u32() as f64 / 2^32`, in `[0, 1)`. One u32 per real.
//! - `shuffle(n)` is a Fisher-Yates pass consuming exactly `n - 1` draws:
//!   for `i` from `n - 1` down to 1, partner `j = next_u32() % (i + 1)`.
//! - `sample_without_replacement(pool, m)` consumes exactly `m` draws via a
//!   partial Fisher-Yates selection: draw `t` picks position
//!   `next_u32() % (pool - t)` among the not-yet-taken indices.
//!
//! Changing any of these breaks seed recovery by design.

const N: usize = 624;
const M: usize = 397;
const MATRIX_A: u32 = 0x9908_b0df;
const UPPER_MASK: u32 = 0x8000_0000;
const LOWER_MASK: u32 = 0x7fff_ffff;

/// Full generator state: 624 words plus the output cursor.
#[derive(Clone)]
pub struct MtState {
    state: [u32; N],
    index: usize,
}

impl std::fmt::Debug for MtState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MtState")
            .field("index", &self.index)
            .field("state0", &self.state[0])
            .finish()
    }
}

impl PartialEq for MtState {
    fn eq(&self, other: &Self) -> bool {
        self.index == other.index && self.state[..] == other.state[..]
    }
}

/// Standard MT19937 initialization from a 32-bit seed.
pub fn mt_seed(seed: u32) -> MtState {
    let mut state = [0u32; N];
    state[0] = seed;
    for i in 1..N {
        state[i] = 1_812_433_253u32
            .wrapping_mul(state[i - 1] ^ (state[i - 1] >> 30))
            .wrapping_add(i as u32);
    }
    MtState { state, index: N }
}

impl MtState {
    fn twist(&mut self) {
        for i in 0..N {
            let y = (self.state[i] & UPPER_MASK) | (self.state[(i + 1) % N] & LOWER_MASK);
            let mut next = y >> 1;
            if y & 1 != 0 {
                next ^= MATRIX_A;
            }
            self.state[i] = self.state[(i + M) % N] ^ next;
        }
        self.index = 0;
    }

    /// Next tempered 32-bit output; twists after every 624 draws.
    pub fn next_u32(&mut self) -> u32 {
        if self.index >= N {
            self.twist();
        }
        let mut y = self.state[self.index];
        self.index += 1;
        y ^= y >> 11;
        y ^= (y << 7) & 0x9d2c_5680;
        y ^= (y << 15) & 0xefc6_0000;
        y ^= y >> 18;
        y
    }

    /// Real draw in `[0, 1)` as `u32 / 2^32`. One u32 consumed.
    pub fn next_f64(&mut self) -> f64 {
        self.next_u32() as f64 / 4_294_967_296.0
    }

    /// Bounded draw in `[0, bound)` by rejection-free modulo. One u32.
    pub fn next_below(&mut self, bound: usize) -> usize {
        debug_assert!(bound >= 1);
        (self.next_u32() as usize) % bound
    }

    /// Fisher-Yates permutation of `[0, n)` consuming exactly `n - 1` draws.
    pub fn shuffle(&mut self, n: usize) -> Vec<usize> {
        assert!(n >= 1, "shuffle needs n >= 1");
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = self.next_below(i + 1);
            perm.swap(i, j);
        }
        perm
    }

    /// `m` distinct indices from `[0, pool)`, consuming exactly `m` draws.
    pub fn sample_without_replacement(&mut self, pool: usize, m: usize) -> Vec<usize> {
        assert!(m <= pool, "cannot draw {m} distinct from pool of {pool}");
        let mut scratch: Vec<usize> = (0..pool).collect();
        let mut out = Vec::with_capacity(m);
        for t in 0..m {
            let r = self.next_below(pool - t);
            out.push(scratch[r]);
            scratch[r] = scratch[pool - 1 - t];
        }
        out
    }

    /// Sign draw: +1 iff the next u32 is below 2^31.
    pub fn next_sign(&mut self) -> i8 {
        if self.next_u32() < 0x8000_0000 {
            1
        } else {
            -1
        }
    }
}
