//! The blockaded sector of a periodic spin-1/2 ring.
//!
//! Sites are numbered `0..L`, site 0 is the lowest-order bit, and site `L-1`
//! neighbours site 0. A configuration belongs to the sector when no two
//! cyclically adjacent spins are up. This is the sector that contains both
//! Néel states; configurations with two or more consecutive up spins are
//! frozen by the dynamics and never appear here.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Result, ScarError};

pub const MIN_LENGTH: usize = 4;
pub const MAX_LENGTH: usize = 24;

/// One spin configuration on a ring of `length` sites (bit `i` set = site `i` up).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisState {
    bits: u32,
    length: u8,
}

impl BasisState {
    /// Returns `None` if `bits` does not fit in `length` sites or violates
    /// the blockade.
    pub fn new(bits: u32, length: usize) -> Option<Self> {
        if length == 0 || length > MAX_LENGTH || u64::from(bits) >= 1u64 << length {
            return None;
        }
        let state = BasisState { bits, length: length as u8 };
        state.is_blockade_free().then_some(state)
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn length(self) -> usize {
        self.length as usize
    }

    /// Number of up spins.
    pub fn n_up(self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_up(self, site: usize) -> bool {
        self.bits >> (site % self.length()) & 1 == 1
    }

    /// Whether both periodic neighbours of `site` are down, i.e. whether the
    /// constrained flip term acts on it.
    pub fn neighbours_down(self, site: usize) -> bool {
        let l = self.length();
        !self.is_up((site + l - 1) % l) && !self.is_up((site + 1) % l)
    }

    /// Configuration with the spin at `site` flipped. The result is only
    /// guaranteed to be in the sector when [`neighbours_down`](Self::neighbours_down) holds.
    pub fn flipped(self, site: usize) -> BasisState {
        BasisState { bits: self.bits ^ (1 << site), length: self.length }
    }

    fn is_blockade_free(self) -> bool {
        let l = self.length();
        let mask = low_mask(l);
        let rotated = ((self.bits >> 1) | (self.bits << (l - 1))) & mask;
        self.bits & rotated == 0
    }
}

/// Renders the configuration with site `L-1` first, so `0101` on four sites
/// has sites 0 and 2 up.
impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:0width$b}", self.bits, width = self.length())
    }
}

pub fn n_up(state: BasisState) -> usize {
    state.n_up()
}

fn low_mask(length: usize) -> u32 {
    if length >= 32 {
        u32::MAX
    } else {
        (1u32 << length) - 1
    }
}

/// Bit pattern `...0101` with sites 0, 2, 4, ... up.
pub fn z2_bits(length: usize) -> u32 {
    0x5555_5555 & low_mask(length)
}

/// Bit pattern `...1010` with sites 1, 3, 5, ... up.
pub fn z2bar_bits(length: usize) -> u32 {
    0xAAAA_AAAA & low_mask(length)
}

/// Ordered enumeration of the blockaded sector with constant-time lookup.
#[derive(Clone, Debug)]
pub struct ConstrainedBasis {
    length: usize,
    states: Vec<BasisState>,
    index: HashMap<u32, usize>,
    nup: Vec<usize>,
}

impl ConstrainedBasis {
    pub fn length(&self) -> usize {
        self.length
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[BasisState] {
        &self.states
    }

    pub fn state(&self, k: usize) -> BasisState {
        self.states[k]
    }

    /// Position of a configuration in the basis, if it belongs to the sector.
    pub fn index_of(&self, bits: u32) -> Option<usize> {
        self.index.get(&bits).copied()
    }

    /// Up-spin count of every basis state, in basis order.
    pub fn nup(&self) -> &[usize] {
        &self.nup
    }

    /// Largest possible up-spin count, `L/2` (reached only by the Néel states).
    pub fn max_nup(&self) -> usize {
        self.length / 2
    }

    /// Indices of `|0101…⟩` (ℤ₂) and `|1010…⟩` (ℤ̄₂).
    pub fn neel_states(&self) -> (usize, usize) {
        let z2 = self.index_of(z2_bits(self.length)).expect("Z2 state is always in the sector");
        let z2bar =
            self.index_of(z2bar_bits(self.length)).expect("Z2bar state is always in the sector");
        (z2, z2bar)
    }

    /// Index of the all-down configuration.
    pub fn vacuum(&self) -> usize {
        0
    }
}

pub fn validate_length(length: usize) -> Result<()> {
    if length % 2 != 0 || !(MIN_LENGTH..=MAX_LENGTH).contains(&length) {
        return Err(ScarError::InvalidLength(length));
    }
    Ok(())
}

/// Enumerates every blockade-free configuration of an even ring of `length`
/// sites, sorted ascending by bit pattern.
pub fn enumerate_basis(length: usize) -> Result<ConstrainedBasis> {
    validate_length(length)?;

    let mut bits = Vec::new();
    extend(length, 0, 0, &mut bits);
    bits.sort_unstable();

    let states: Vec<BasisState> =
        bits.iter().map(|&b| BasisState { bits: b, length: length as u8 }).collect();
    let index = states.iter().enumerate().map(|(k, s)| (s.bits, k)).collect();
    let nup = states.iter().map(|s| s.n_up()).collect();

    Ok(ConstrainedBasis { length, states, index, nup })
}

// Depth-first over sites 0..L. Site L-1 must also respect its neighbour at site 0.
fn extend(length: usize, site: usize, prefix: u32, out: &mut Vec<u32>) {
    if site == length {
        out.push(prefix);
        return;
    }
    extend(length, site + 1, prefix, out);

    let left_up = site > 0 && prefix >> (site - 1) & 1 == 1;
    let wraps_onto_first = site == length - 1 && prefix & 1 == 1;
    if !left_up && !wraps_onto_first {
        extend(length, site + 1, prefix | 1 << site, out);
    }
}

pub fn neel_states(basis: &ConstrainedBasis) -> (usize, usize) {
    basis.neel_states()
}
