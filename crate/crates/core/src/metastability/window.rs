use core::fmt;

/// The inclusive interval `[lo; hi] = {lo, ..., hi}`, empty when `hi < lo`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Window {
    pub lo: u64,
    pub hi: u64,
}

impl Window {
    pub const fn new(lo: u64, hi: u64) -> Self {
        Window { lo, hi }
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }

    /// Number of indices; saturates at `u64::MAX` for the full range.
    pub fn len(&self) -> u64 {
        if self.is_empty() {
            0
        } else {
            (self.hi - self.lo).saturating_add(1)
        }
    }

    pub fn contains(&self, i: u64) -> bool {
        self.lo <= i && i <= self.hi
    }

    /// True when every index of `self` lies in `other`.
    pub fn is_subset_of(&self, other: &Window) -> bool {
        self.is_empty() || (!other.is_empty() && other.lo <= self.lo && self.hi <= other.hi)
    }

    /// Number of ordered pairs `(m, n)` in the window.
    pub fn pair_count(&self) -> u64 {
        self.len().saturating_mul(self.len())
    }

    /// Empty when `hi < lo`.
    pub fn iter(&self) -> core::ops::RangeInclusive<u64> {
        self.lo..=self.hi
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{};{}]", self.lo, self.hi)
    }
}

/// Which window a gap function describes at `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum WindowConvention {
    /// `[n; n + g(n)]`
    Offset,
    /// `[n; g(n)]`
    Absolute,
}
