//! Computational-basis strings and the index convention.

use std::fmt;

/// An ordered list of bits `(x_n, ..., x_1)`, qubit n first. The integer
/// index of the string is `k = sum_j 2^(j-1) * x_j`, so qubit 1 is least
/// significant and qubit n is the leftmost symbol of the ket.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct BasisString {
    bits: Vec<u8>,
}

impl BasisString {
    pub fn new(bits: Vec<u8>) -> Self {
        assert!(bits.iter().all(|&b| b <= 1), "bits must be 0 or 1");
        BasisString { bits }
    }

    pub fn from_index(n: usize, k: usize) -> Self {
        debug_assert!(n == 0 || k < (1usize << n));
        let bits = (0..n).map(|i| ((k >> (n - 1 - i)) & 1) as u8).collect();
        BasisString { bits }
    }

    pub fn index(&self) -> usize {
        self.bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Bit of qubit `q` (1-based; qubit `n` is the first stored bit).
    pub fn bit(&self, q: usize) -> u8 {
        let n = self.bits.len();
        assert!(q >= 1 && q <= n, "qubit {q} out of range 1..={n}");
        self.bits[n - q]
    }

    /// Bits in storage order: qubit n first.
    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }

    pub fn parse(s: &str) -> crate::Result<Self> {
        let bits: Vec<u8> = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(crate::Error::Parse(format!(
                    "invalid bit {other:?} in basis string {s:?}"
                ))),
            })
            .collect::<crate::Result<_>>()?;
        Ok(BasisString { bits })
    }
}

impl fmt::Display for BasisString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        for n in 1..=6 {
            for k in 0..(1usize << n) {
                let x = BasisString::from_index(n, k);
                assert_eq!(x.index(), k);
                assert_eq!(x.len(), n);
            }
        }
    }

    #[test]
    fn qubit_one_is_least_significant() {
        // k = 5 = 101 on three qubits: x3=1, x2=0, x1=1.
        let x = BasisString::from_index(3, 5);
        assert_eq!(x.bit(1), 1);
        assert_eq!(x.bit(2), 0);
        assert_eq!(x.bit(3), 1);
        assert_eq!(x.to_string(), "101");
    }
}
