//! Complex restricted Boltzmann machines. The amplitude of a bit string is
//!
//! ```text
//! psi(x) = exp(x . alpha) * prod_j (1 + exp(beta_j + x . W_j))
//! ```
//!
//! with visible biases `alpha` (one per qubit), hidden biases `beta`, and
//! weight matrix `W` (n x m). Gate constructions act on the parameters;
//! X and CZ realize their gate up to a global nonzero factor, which the
//! oracle-equivalence tests pin down before any benchmark relies on them.

use crate::basis::BasisString;
use crate::complex::{format_amplitude, parse_amplitude, Amplitude, EPS};
use crate::dense::DenseState;
use crate::{Error, Result};
use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

#[derive(Clone, Debug)]
pub struct Rbm {
    n: usize,
    alpha: Vec<Amplitude>,
    beta: Vec<Amplitude>,
    /// n x m; entry (v, j) is the weight between visible v+1 and hidden j.
    w: Array2<Amplitude>,
}

impl Rbm {
    pub fn new(n: usize, alpha: Vec<Amplitude>, beta: Vec<Amplitude>, w: Array2<Amplitude>) -> Result<Self> {
        if alpha.len() != n || w.nrows() != n || w.ncols() != beta.len() {
            return Err(Error::Parse(format!(
                "inconsistent RBM shapes: n={n}, |alpha|={}, |beta|={}, W={}x{}",
                alpha.len(),
                beta.len(),
                w.nrows(),
                w.ncols()
            )));
        }
        Ok(Rbm { n, alpha, beta, w })
    }

    /// |+>^n up to normalization: no hidden nodes, zero biases.
    pub fn plus_state(n: usize) -> Self {
        Rbm {
            n,
            alpha: vec![Complex64::new(0.0, 0.0); n],
            beta: Vec::new(),
            w: Array2::zeros((n, 0)),
        }
    }

    /// A computational basis state: one hidden node per qubit kills the
    /// opposite branch.
    pub fn basis_state(x: &BasisString) -> Self {
        let n = x.len();
        let mut beta = Vec::with_capacity(n);
        let mut w = Array2::zeros((n, n));
        for q in 1..=n {
            let j = q - 1;
            w[(q - 1, j)] = Complex64::new(0.0, PI);
            beta.push(if x.bit(q) == 1 {
                Complex64::new(0.0, PI)
            } else {
                Complex64::new(0.0, 0.0)
            });
        }
        Rbm {
            n,
            alpha: vec![Complex64::new(0.0, 0.0); n],
            beta,
            w,
        }
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    pub fn hidden_count(&self) -> usize {
        self.beta.len()
    }

    /// `n + m + n*m`.
    pub fn size(&self) -> usize {
        self.n + self.hidden_count() + self.n * self.hidden_count()
    }

    pub fn amplitude(&self, x: &BasisString) -> Result<Amplitude> {
        if x.len() != self.n {
            return Err(Error::BasisLengthMismatch {
                got: x.len(),
                want: self.n,
            });
        }
        let mut exponent = Complex64::new(0.0, 0.0);
        for q in 1..=self.n {
            if x.bit(q) == 1 {
                exponent += self.alpha[q - 1];
            }
        }
        let mut amp = exponent.exp();
        for j in 0..self.hidden_count() {
            let mut e = self.beta[j];
            for q in 1..=self.n {
                if x.bit(q) == 1 {
                    e += self.w[(q - 1, j)];
                }
            }
            amp *= Complex64::new(1.0, 0.0) + e.exp();
        }
        Ok(amp)
    }

    /// diag(1, e^{i theta}) on qubit q: adds i*theta to the visible bias.
    /// Z is theta = pi, S is pi/2, T is pi/4.
    pub fn apply_phase(&self, q: usize, theta: f64) -> Result<Self> {
        if q == 0 || q > self.n {
            return Err(Error::QubitOutOfRange { qubit: q, n: self.n });
        }
        let mut out = self.clone();
        out.alpha[q - 1] += Complex64::new(0.0, theta);
        Ok(out)
    }

    /// Pauli X on qubit q, exact up to the global factor e^{-alpha_q}.
    pub fn apply_x(&self, q: usize) -> Result<Self> {
        if q == 0 || q > self.n {
            return Err(Error::QubitOutOfRange { qubit: q, n: self.n });
        }
        let mut out = self.clone();
        out.alpha[q - 1] = -out.alpha[q - 1];
        for j in 0..out.hidden_count() {
            let wqj = out.w[(q - 1, j)];
            out.beta[j] += wqj;
            out.w[(q - 1, j)] = -wqj;
        }
        Ok(out)
    }

    /// Controlled-Z between q1 and q2: appends one hidden node and shifts
    /// the two visible biases so the new term contributes
    /// `2 * (-1)^(x_q1 * x_q2)`; exact up to the global factor 2.
    pub fn apply_cz(&self, q1: usize, q2: usize) -> Result<Self> {
        if q1 == q2 {
            return Err(Error::DuplicateTarget);
        }
        for q in [q1, q2] {
            if q == 0 || q > self.n {
                return Err(Error::QubitOutOfRange { qubit: q, n: self.n });
            }
        }
        // Weight w with e^w = u, where 3u^2 + 2u + 3 = 0, and bias a with
        // e^a = 2/(1+u) = 1 - sqrt(2) i. Then e^{a(x1+x2)} (1 + u^{x1+x2})
        // equals 2 * (-1)^{x1 x2}.
        let u = Complex64::new(-1.0 / 3.0, 2.0 * std::f64::consts::SQRT_2 / 3.0);
        let wq = u.ln();
        let a = Complex64::new(1.0, -std::f64::consts::SQRT_2).ln();
        let m = self.hidden_count();
        let mut w = Array2::zeros((self.n, m + 1));
        for v in 0..self.n {
            for j in 0..m {
                w[(v, j)] = self.w[(v, j)];
            }
        }
        w[(q1 - 1, m)] = wq;
        w[(q2 - 1, m)] = wq;
        let mut out = Rbm {
            n: self.n,
            alpha: self.alpha.clone(),
            beta: self.beta.clone(),
            w,
        };
        out.beta.push(Complex64::new(0.0, 0.0));
        out.alpha[q1 - 1] += a;
        out.alpha[q2 - 1] += a;
        Ok(out)
    }

    /// Swap: exchanges rows q1 and q2 of W and the two visible biases.
    pub fn apply_swap(&self, q1: usize, q2: usize) -> Result<Self> {
        if q1 == q2 {
            return Err(Error::DuplicateTarget);
        }
        for q in [q1, q2] {
            if q == 0 || q > self.n {
                return Err(Error::QubitOutOfRange { qubit: q, n: self.n });
            }
        }
        let mut out = self.clone();
        out.alpha.swap(q1 - 1, q2 - 1);
        for j in 0..out.hidden_count() {
            let a = out.w[(q1 - 1, j)];
            out.w[(q1 - 1, j)] = out.w[(q2 - 1, j)];
            out.w[(q2 - 1, j)] = a;
        }
        Ok(out)
    }

    /// One Metropolis chain with single-bit-flip proposals and acceptance
    /// min(1, |psi(x')/psi(x)|^2); returns the state after
    /// `burn_in + chain_len` steps.
    pub fn sample(&self, rng: &mut ChaCha8Rng, chain_len: usize, burn_in: usize) -> Result<BasisString> {
        let mut bits: Vec<u8> = (0..self.n).map(|_| rng.gen_range(0..2u8)).collect();
        let mut cur = BasisString::new(bits.clone());
        let mut cur_p = self.amplitude(&cur)?.norm_sqr();
        for _ in 0..(burn_in + chain_len) {
            let flip = rng.gen_range(0..self.n);
            bits[flip] ^= 1;
            let cand = BasisString::new(bits.clone());
            let cand_p = self.amplitude(&cand)?.norm_sqr();
            let accept = if cur_p <= 0.0 {
                true
            } else {
                let ratio = cand_p / cur_p;
                ratio >= 1.0 || rng.gen::<f64>() < ratio
            };
            if accept {
                cur = cand;
                cur_p = cand_p;
            } else {
                bits[flip] ^= 1;
            }
        }
        Ok(cur)
    }

    /// Dicke state |D_n^k| indicator: for each weight j != k, two hidden
    /// nodes with uniform visible weights +-i pi/n and biases
    /// +-i pi (1 - j/n) kill the weight-j sector. Uses 2n hidden nodes.
    pub fn build_dicke(n: usize, k: usize) -> Result<Self> {
        if k > n {
            return Err(Error::KOutOfRange { k, n });
        }
        let m = 2 * n;
        let mut beta = Vec::with_capacity(m);
        let mut w = Array2::zeros((n, m));
        let mut j_col = 0usize;
        for j in 0..=n {
            if j == k {
                continue;
            }
            let bias = PI * (1.0 - j as f64 / n as f64);
            for (sign, col) in [(1.0, j_col), (-1.0, j_col + 1)] {
                beta.push(Complex64::new(0.0, sign * bias));
                for v in 0..n {
                    w[(v, col)] = Complex64::new(0.0, sign * PI / n as f64);
                }
            }
            j_col += 2;
        }
        Rbm::new(n, vec![Complex64::new(0.0, 0.0); n], beta, w)
    }

    /// The Sum state `|+>^n + Rot^n` with a single hidden node: zero
    /// biases and weight i pi 2^{-(j+1)} to visible node j.
    pub fn build_sum(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::BadFamilyParameter {
                family: "sum",
                requirement: "n >= 1",
            });
        }
        let mut w = Array2::zeros((n, 1));
        for j in 1..=n {
            w[(j - 1, 0)] = Complex64::new(0.0, PI * 2f64.powi(-(j as i32) - 1));
        }
        Rbm::new(
            n,
            vec![Complex64::new(0.0, 0.0); n],
            vec![Complex64::new(0.0, 0.0)],
            w,
        )
    }

    /// Exponential-time reference inner product via dense conversion.
    pub fn inner_product_bruteforce(&self, other: &Self) -> Result<Amplitude> {
        if self.n != other.n {
            return Err(Error::QubitCountMismatch(self.n, other.n));
        }
        self.to_dense()?.inner_product(&other.to_dense()?)
    }

    pub fn fidelity_bruteforce(&self, other: &Self) -> Result<f64> {
        self.to_dense()?.fidelity(&other.to_dense()?)
    }

    /// Exponential-time reference outcome probability.
    pub fn prob_bruteforce(&self, x: &BasisString) -> Result<f64> {
        let d = self.to_dense()?;
        let norm = d.norm_sqr();
        if norm <= EPS * EPS {
            return Err(Error::ZeroNorm);
        }
        Ok(self.amplitude(x)?.norm_sqr() / norm)
    }

    pub fn to_dense(&self) -> Result<DenseState> {
        DenseState::from_fn(self.n, |x| self.amplitude(x).unwrap())
    }

    pub fn to_text(&self) -> String {
        let m = self.hidden_count();
        let mut out = format!("rbm {} {}\n", self.n, m);
        let line = |xs: &[Amplitude]| {
            xs.iter()
                .map(|a| format_amplitude(*a))
                .collect::<Vec<_>>()
                .join(" ")
        };
        out.push_str(&line(&self.alpha));
        out.push('\n');
        if m > 0 {
            out.push_str(&line(&self.beta));
            out.push('\n');
            for v in 0..self.n {
                let row: Vec<Amplitude> = (0..m).map(|j| self.w[(v, j)]).collect();
                out.push_str(&line(&row));
                out.push('\n');
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty rbm file".into()))?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("rbm") {
            return Err(Error::Parse("expected 'rbm' header".into()));
        }
        let n: usize = parts
            .next()
            .ok_or_else(|| Error::Parse("missing visible count".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("{e}")))?;
        let m: usize = parts
            .next()
            .ok_or_else(|| Error::Parse("missing hidden count".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("{e}")))?;
        let parse_line = |line: &str, want: usize| -> Result<Vec<Amplitude>> {
            let xs: Vec<Amplitude> = line
                .split_whitespace()
                .map(parse_amplitude)
                .collect::<Result<_>>()?;
            if xs.len() != want {
                return Err(Error::Parse(format!(
                    "expected {want} entries, got {}",
                    xs.len()
                )));
            }
            Ok(xs)
        };
        let alpha = parse_line(
            lines.next().ok_or_else(|| Error::Parse("missing alpha line".into()))?,
            n,
        )?;
        let mut beta = Vec::new();
        let mut w = Array2::zeros((n, m));
        if m > 0 {
            beta = parse_line(
                lines.next().ok_or_else(|| Error::Parse("missing beta line".into()))?,
                m,
            )?;
            for v in 0..n {
                let row = parse_line(
                    lines
                        .next()
                        .ok_or_else(|| Error::Parse(format!("missing weight row {}", v + 1)))?,
                    m,
                )?;
                for (j, x) in row.into_iter().enumerate() {
                    w[(v, j)] = x;
                }
            }
        }
        Rbm::new(n, alpha, beta, w)
    }
}
