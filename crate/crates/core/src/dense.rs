//! Dense state-vector backend. This is the ground-truth oracle every other
//! representation is tested against, capped at [`crate::DENSE_CAP`] qubits.

use crate::basis::BasisString;
use crate::complex::{approx_eq, Amplitude, EPS};
use crate::gate::Gate;
use crate::{Error, Result, DENSE_CAP};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    n: usize,
    amps: Vec<Amplitude>,
}

impl DenseState {
    pub fn check_cap(n: usize) -> Result<()> {
        if n == 0 || n > DENSE_CAP {
            return Err(Error::DenseCapExceeded { n, cap: DENSE_CAP });
        }
        Ok(())
    }

    /// Builds a state by tabulating an amplitude function over all basis
    /// strings. The result may be unnormalized.
    pub fn from_fn(n: usize, f: impl Fn(&BasisString) -> Amplitude) -> Result<Self> {
        Self::check_cap(n)?;
        let amps = (0..1usize << n)
            .map(|k| f(&BasisString::from_index(n, k)))
            .collect();
        Ok(DenseState { n, amps })
    }

    pub fn from_amplitudes(n: usize, amps: Vec<Amplitude>) -> Result<Self> {
        Self::check_cap(n)?;
        if amps.len() != 1 << n {
            return Err(Error::Parse(format!(
                "expected {} amplitudes for {n} qubits, got {}",
                1usize << n,
                amps.len()
            )));
        }
        Ok(DenseState { n, amps })
    }

    /// The all-zeros computational basis state |0...0>.
    pub fn zero_state(n: usize) -> Result<Self> {
        let mut s = Self::from_fn(n, |_| Complex64::new(0.0, 0.0))?;
        s.amps[0] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn basis_state(x: &BasisString) -> Result<Self> {
        let mut s = Self::from_fn(x.len(), |_| Complex64::new(0.0, 0.0))?;
        let k = x.index();
        s.amps[k] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amps
    }

    pub fn amplitude(&self, x: &BasisString) -> Result<Amplitude> {
        if x.len() != self.n {
            return Err(Error::BasisLengthMismatch {
                got: x.len(),
                want: self.n,
            });
        }
        Ok(self.amps[x.index()])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= EPS
    }

    pub fn scale(&self, factor: Amplitude) -> Self {
        DenseState {
            n: self.n,
            amps: self.amps.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn normalize(&self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm <= EPS {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scale(Complex64::new(1.0 / norm, 0.0)))
    }

    /// Applies `U (x) I` on the non-target qubits by matrix-vector
    /// multiplication over each target-aligned block.
    pub fn apply_gate(&self, g: &Gate) -> Result<Self> {
        g.check_targets(self.n)?;
        let k = g.arity();
        let dim = 1usize << k;
        // Bit position (from LSB) of each target; first target is the most
        // significant bit of the local index.
        let shifts: Vec<usize> = g.targets().iter().map(|&q| q - 1).collect();
        let target_mask: usize = shifts.iter().map(|&s| 1usize << s).sum();
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        let m = g.matrix();
        let mut scratch = vec![Complex64::new(0.0, 0.0); dim];
        for base in 0..self.amps.len() {
            if base & target_mask != 0 {
                continue;
            }
            for (local, slot) in scratch.iter_mut().enumerate() {
                let mut idx = base;
                for (pos, &sh) in shifts.iter().enumerate() {
                    if (local >> (k - 1 - pos)) & 1 == 1 {
                        idx |= 1 << sh;
                    }
                }
                *slot = self.amps[idx];
            }
            for row in 0..dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for (col, &v) in scratch.iter().enumerate() {
                    acc += m[(row, col)] * v;
                }
                let mut idx = base;
                for (pos, &sh) in shifts.iter().enumerate() {
                    if (row >> (k - 1 - pos)) & 1 == 1 {
                        idx |= 1 << sh;
                    }
                }
                out[idx] = acc;
            }
        }
        Ok(DenseState { n: self.n, amps: out })
    }

    /// `<a|b>` with conjugation on `self`.
    pub fn inner_product(&self, other: &Self) -> Result<Amplitude> {
        if self.n != other.n {
            return Err(Error::QubitCountMismatch(self.n, other.n));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        let na = self.norm_sqr();
        let nb = other.norm_sqr();
        if na <= EPS * EPS || nb <= EPS * EPS {
            return Err(Error::ZeroNorm);
        }
        Ok(self.inner_product(other)?.norm_sqr() / (na * nb))
    }

    /// True when the states are equal up to a complex factor.
    pub fn equivalent(&self, other: &Self) -> Result<bool> {
        Ok((self.fidelity(other)? - 1.0).abs() <= 1e-7)
    }

    pub fn prob(&self, x: &BasisString) -> Result<f64> {
        let norm = self.norm_sqr();
        if norm <= EPS * EPS {
            return Err(Error::ZeroNorm);
        }
        Ok(self.amplitude(x)?.norm_sqr() / norm)
    }

    /// Measures all qubits. Draws qubit n downward, consuming one uniform
    /// variate per qubit, so that every exact backend walks the random
    /// stream identically. Returns the outcome and the collapsed,
    /// renormalized state.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Result<(BasisString, DenseState)> {
        if !self.normalized() {
            return Err(Error::NotNormalized);
        }
        let mut bits = Vec::with_capacity(self.n);
        let mut prefix = 0usize; // bits chosen so far, qubit n first
        let mut chosen = 0usize;
        for _ in 0..self.n {
            let remaining = self.n - chosen;
            let block = 1usize << (remaining - 1);
            let base = prefix << remaining;
            let p0: f64 = (0..block).map(|i| self.amps[base + i].norm_sqr()).sum();
            let total: f64 = (0..2 * block).map(|i| self.amps[base + i].norm_sqr()).sum();
            let u: f64 = rng.gen();
            let bit = if total <= 0.0 || u * total < p0 { 0 } else { 1 };
            bits.push(bit as u8);
            prefix = (prefix << 1) | bit;
            chosen += 1;
        }
        let outcome = BasisString::new(bits);
        let amp = self.amps[outcome.index()];
        let collapsed = DenseState::basis_state(&outcome)?.scale(amp / amp.norm());
        Ok((outcome, collapsed))
    }

    /// Measures a single qubit: returns the outcome, its probability, and
    /// the projected renormalized state.
    pub fn measure_qubit(&self, q: usize, rng: &mut ChaCha8Rng) -> Result<(u8, f64, DenseState)> {
        if q == 0 || q > self.n {
            return Err(Error::QubitOutOfRange { qubit: q, n: self.n });
        }
        let norm = self.norm_sqr();
        if norm <= EPS * EPS {
            return Err(Error::ZeroNorm);
        }
        let bit_mask = 1usize << (q - 1);
        let p1: f64 = self
            .amps
            .iter()
            .enumerate()
            .filter(|(k, _)| k & bit_mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum::<f64>()
            / norm;
        let u: f64 = rng.gen();
        let outcome = if u < 1.0 - p1 { 0u8 } else { 1u8 };
        let p = if outcome == 0 { 1.0 - p1 } else { p1 };
        let keep = |k: usize| (k & bit_mask != 0) == (outcome == 1);
        let scale = 1.0 / (p * norm).sqrt();
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(k, a)| if keep(k) { a * scale } else { Complex64::new(0.0, 0.0) })
            .collect();
        Ok((outcome, p, DenseState { n: self.n, amps }))
    }

    pub fn approx_equal(&self, other: &Self) -> bool {
        self.n == other.n
            && self
                .amps
                .iter()
                .zip(&other.amps)
                .all(|(a, b)| approx_eq(*a, *b))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("vector {}\n", self.n);
        for a in &self.amps {
            out.push_str(&crate::complex::format_amplitude(*a));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty vector file".into()))?;
        let mut parts = header.split_whitespace();
        match parts.next() {
            Some("vector") => {}
            other => return Err(Error::Parse(format!("expected 'vector' header, got {other:?}"))),
        }
        let n: usize = parts
            .next()
            .ok_or_else(|| Error::Parse("missing qubit count".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad qubit count: {e}")))?;
        let amps: Vec<Amplitude> = lines
            .map(|l| crate::complex::parse_amplitude(l.trim()))
            .collect::<Result<_>>()?;
        Self::from_amplitudes(n, amps)
    }
}

/// GHZ amplitude function: 1/sqrt(2) at the all-zeros and all-ones strings.
pub fn ghz_amplitude(x: &BasisString) -> Amplitude {
    let w = x.weight();
    if w == 0 || w == x.len() {
        Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
    } else {
        Complex64::new(0.0, 0.0)
    }
}

/// A seeded pseudo-random state with independent standard-normal components,
/// normalized. Used throughout the test batteries.
pub fn random_state(n: usize, seed: u64) -> Result<DenseState> {
    use rand::SeedableRng;
    use rand_distr::StandardNormal;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps: Vec<Amplitude> = (0..1usize << n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        })
        .collect();
    DenseState::from_amplitudes(n, amps)?.normalize()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn ghz_from_fn() {
        let s = DenseState::from_fn(3, ghz_amplitude).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!(approx_eq(s.amplitudes()[0], Complex64::new(r, 0.0)));
        assert!(approx_eq(s.amplitudes()[7], Complex64::new(r, 0.0)));
        for k in 1..7 {
            assert!(approx_eq(s.amplitudes()[k], Complex64::new(0.0, 0.0)));
        }
        assert!(s.normalized());
    }

    #[test]
    fn zero_function_not_normalized() {
        let s = DenseState::from_fn(1, |_| Complex64::new(0.0, 0.0)).unwrap();
        assert!(!s.normalized());
    }

    #[test]
    fn constant_function_all_ones() {
        let s = DenseState::from_fn(2, |_| Complex64::new(1.0, 0.0)).unwrap();
        assert_eq!(s.amplitudes().len(), 4);
        assert!(s.amplitudes().iter().all(|a| approx_eq(*a, Complex64::new(1.0, 0.0))));
    }

    #[test]
    fn x_flips_basis_state() {
        let s = DenseState::zero_state(1).unwrap();
        let t = s.apply_gate(&Gate::x(1)).unwrap();
        assert!(approx_eq(t.amplitudes()[1], Complex64::new(1.0, 0.0)));
        assert!(approx_eq(t.amplitudes()[0], Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn ghz_circuit_matches_amplitude_function() {
        // H on qubit 3, then CX(3->2), CX(2->1) with CX = (I x H) CZ (I x H).
        let mut s = DenseState::zero_state(3).unwrap();
        s = s.apply_gate(&Gate::h(3)).unwrap();
        for (ctrl, tgt) in [(3, 2), (2, 1)] {
            s = s.apply_gate(&Gate::h(tgt)).unwrap();
            s = s.apply_gate(&Gate::cz(ctrl, tgt)).unwrap();
            s = s.apply_gate(&Gate::h(tgt)).unwrap();
        }
        let ghz = DenseState::from_fn(3, ghz_amplitude).unwrap();
        assert!(s.approx_equal(&ghz));
    }

    #[test]
    fn t_on_plus_state() {
        let s = DenseState::zero_state(1).unwrap().apply_gate(&Gate::h(1)).unwrap();
        let t = s.apply_gate(&Gate::t(1)).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!(approx_eq(t.amplitudes()[0], Complex64::new(r, 0.0)));
        assert!(approx_eq(
            t.amplitudes()[1],
            Complex64::from_polar(r, std::f64::consts::FRAC_PI_4)
        ));
    }

    #[test]
    fn inner_products() {
        let ghz = DenseState::from_fn(3, ghz_amplitude).unwrap();
        let ip = ghz.inner_product(&ghz).unwrap();
        assert!(approx_eq(ip, Complex64::new(1.0, 0.0)));
        let zero = DenseState::zero_state(3).unwrap();
        assert!(approx_eq(
            zero.inner_product(&ghz).unwrap(),
            Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
        ));
        let plus = DenseState::zero_state(1).unwrap().apply_gate(&Gate::h(1)).unwrap();
        let minus = DenseState::basis_state(&BasisString::from_index(1, 1))
            .unwrap()
            .apply_gate(&Gate::h(1))
            .unwrap();
        assert!(approx_eq(plus.inner_product(&minus).unwrap(), Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn inner_product_conjugate_symmetry() {
        let a = random_state(4, 11).unwrap();
        let b = random_state(4, 12).unwrap();
        let ab = a.inner_product(&b).unwrap();
        let ba = b.inner_product(&a).unwrap();
        assert!(approx_eq(ab, ba.conj()));
    }

    #[test]
    fn gate_then_dagger_restores_state() {
        let s = random_state(3, 7).unwrap();
        for g in [Gate::h(2), Gate::t(1), Gate::cz(1, 3), Gate::swap(2, 3), Gate::y(3)] {
            let back = s.apply_gate(&g).unwrap().apply_gate(&g.dagger()).unwrap();
            assert!(back.approx_equal(&s), "failed for {}", g.name);
            let norm = s.apply_gate(&g).unwrap().norm_sqr();
            assert!((norm - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn deterministic_sample_on_basis_state() {
        let s = DenseState::basis_state(&BasisString::parse("101").unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (x, post) = s.sample(&mut rng).unwrap();
        assert_eq!(x.to_string(), "101");
        assert!(post.approx_equal(&s));
    }

    #[test]
    fn sample_reproducible_under_fixed_seed() {
        let plus = DenseState::zero_state(1).unwrap().apply_gate(&Gate::h(1)).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            plus.sample(&mut rng).unwrap().0
        };
        assert_eq!(draw(99), draw(99));
    }

    #[test]
    fn ghz_sampling_frequencies() {
        let ghz = DenseState::from_fn(3, ghz_amplitude).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut count000 = 0usize;
        let trials = 10_000;
        for _ in 0..trials {
            let (x, _) = ghz.sample(&mut rng).unwrap();
            match x.to_string().as_str() {
                "000" => count000 += 1,
                "111" => {}
                other => panic!("impossible outcome {other}"),
            }
        }
        let f = count000 as f64 / trials as f64;
        assert!((f - 0.5).abs() < 0.02, "frequency {f}");
    }

    #[test]
    fn cap_enforced() {
        assert!(matches!(
            DenseState::from_fn(25, |_| Complex64::new(0.0, 0.0)),
            Err(Error::DenseCapExceeded { .. })
        ));
    }

    #[test]
    fn vector_text_round_trip() {
        let s = random_state(3, 3).unwrap();
        let back = DenseState::from_text(&s.to_text()).unwrap();
        assert_eq!(s, back);
    }
}
