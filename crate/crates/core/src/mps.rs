//! Matrix product states. Site k holds two matrices `A_k^x` of shape
//! `D_k x D_{k-1}` with `D_0 = D_n = 1`; the amplitude of a basis string is
//! the chain product `A_n^{x_n} ... A_1^{x_1}`.

use crate::basis::BasisString;
use crate::complex::{format_amplitude, parse_amplitude, Amplitude, EPS};
use crate::dense::DenseState;
use crate::svd::svd;
use crate::{Error, Result};
use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Singular values below `SPLIT_TOL * sigma_max` are dropped when a
/// two-qubit gate re-splits a merged tensor. This removes exact zeros only;
/// approximation is left to [`Mps::compress`] with an explicit tolerance.
pub const SPLIT_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct Mps {
    n: usize,
    /// `tensors[k-1] = [A_k^0, A_k^1]`.
    tensors: Vec<[Array2<Amplitude>; 2]>,
}

impl Mps {
    pub fn new(tensors: Vec<[Array2<Amplitude>; 2]>) -> Result<Self> {
        let n = tensors.len();
        if n == 0 {
            return Err(Error::Parse("an MPS needs at least one site".into()));
        }
        for (i, pair) in tensors.iter().enumerate() {
            if pair[0].dim() != pair[1].dim() {
                return Err(Error::Parse(format!(
                    "site {}: the two matrices must share a shape",
                    i + 1
                )));
            }
            if i > 0 && tensors[i - 1][0].nrows() != pair[0].ncols() {
                return Err(Error::Parse(format!(
                    "bond mismatch between sites {} and {}",
                    i,
                    i + 1
                )));
            }
        }
        if tensors[0][0].ncols() != 1 || tensors[n - 1][0].nrows() != 1 {
            return Err(Error::Parse("boundary bond dimensions must be 1".into()));
        }
        Ok(Mps { n, tensors })
    }

    /// Product state with per-site amplitudes `(a_k^0, a_k^1)`, `k = 1..=n`.
    pub fn product_state(site_amps: &[(Amplitude, Amplitude)]) -> Result<Self> {
        let tensors = site_amps
            .iter()
            .map(|&(a0, a1)| {
                [
                    Array2::from_elem((1, 1), a0),
                    Array2::from_elem((1, 1), a1),
                ]
            })
            .collect();
        Mps::new(tensors)
    }

    pub fn basis_state(x: &BasisString) -> Result<Self> {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let amps: Vec<(Amplitude, Amplitude)> = (1..=x.len())
            .map(|q| if x.bit(q) == 0 { (one, zero) } else { (zero, one) })
            .collect();
        Mps::product_state(&amps)
    }

    /// The zero vector on n qubits (all matrices zero, bonds 1).
    pub fn zero(n: usize) -> Result<Self> {
        let z = Complex64::new(0.0, 0.0);
        Mps::product_state(&vec![(z, z); n])
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    pub fn site(&self, k: usize) -> &[Array2<Amplitude>; 2] {
        &self.tensors[k - 1]
    }

    /// Bond dimensions `[D_0, D_1, ..., D_n]`.
    pub fn bond_dims(&self) -> Vec<usize> {
        let mut dims = Vec::with_capacity(self.n + 1);
        dims.push(self.tensors[0][0].ncols());
        for t in &self.tensors {
            dims.push(t[0].nrows());
        }
        dims
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap()
    }

    /// Total number of matrix elements, `2 * sum_k D_k * D_{k-1}`.
    pub fn size(&self) -> usize {
        self.tensors.iter().map(|t| 2 * t[0].len()).sum()
    }

    pub fn amplitude(&self, x: &BasisString) -> Result<Amplitude> {
        if x.len() != self.n {
            return Err(Error::BasisLengthMismatch {
                got: x.len(),
                want: self.n,
            });
        }
        // Row vector, contracted from site n down to site 1.
        let top = &self.tensors[self.n - 1][x.bit(self.n) as usize];
        let mut row: Vec<Amplitude> = (0..top.ncols()).map(|j| top[(0, j)]).collect();
        for k in (1..self.n).rev() {
            let a = &self.tensors[k - 1][x.bit(k) as usize];
            let mut next = vec![Complex64::new(0.0, 0.0); a.ncols()];
            for (i, &r) in row.iter().enumerate() {
                if r == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..a.ncols() {
                    next[j] += r * a[(i, j)];
                }
            }
            row = next;
        }
        Ok(row[0])
    }

    /// `<a|b>` by ladder contraction, `O(n * D^4)` worst case.
    pub fn inner_product(&self, other: &Self) -> Result<Amplitude> {
        if self.n != other.n {
            return Err(Error::QubitCountMismatch(self.n, other.n));
        }
        // env has shape D^a_{k} x D^b_{k} after absorbing site k.
        let mut env: Array2<Amplitude> = Array2::from_elem((1, 1), Complex64::new(1.0, 0.0));
        for k in 1..=self.n {
            let da = self.tensors[k - 1][0].nrows();
            let db = other.tensors[k - 1][0].nrows();
            let mut next: Array2<Amplitude> = Array2::zeros((da, db));
            for x in 0..2 {
                let a = &self.tensors[k - 1][x];
                let b = &other.tensors[k - 1][x];
                // next += conj(a) * env * b^T
                for i in 0..da {
                    for j in 0..db {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for p in 0..a.ncols() {
                            let ac = a[(i, p)].conj();
                            if ac == Complex64::new(0.0, 0.0) {
                                continue;
                            }
                            for q in 0..b.ncols() {
                                acc += ac * env[(p, q)] * b[(j, q)];
                            }
                        }
                        next[(i, j)] += acc;
                    }
                }
            }
            env = next;
        }
        Ok(env[(0, 0)])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.inner_product(self).map(|v| v.re.max(0.0)).unwrap_or(0.0)
    }

    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        let na = self.norm_sqr();
        let nb = other.norm_sqr();
        if na <= EPS * EPS || nb <= EPS * EPS {
            return Err(Error::ZeroNorm);
        }
        Ok(self.inner_product(other)?.norm_sqr() / (na * nb))
    }

    /// Equivalence up to a complex factor: normalized fidelity 1 within
    /// tolerance.
    pub fn equivalent(&self, other: &Self) -> Result<bool> {
        Ok((self.fidelity(other)? - 1.0).abs() <= 1e-9)
    }

    /// Pointwise sum via the block construction; bond dimensions add.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::QubitCountMismatch(self.n, other.n));
        }
        let n = self.n;
        let mut tensors = Vec::with_capacity(n);
        for k in 1..=n {
            let pair: [Array2<Amplitude>; 2] = [0, 1].map(|x| {
                let a = &self.tensors[k - 1][x];
                let b = &other.tensors[k - 1][x];
                if n == 1 {
                    // Single site: plain sum of 1x1 blocks.
                    let mut m = Array2::zeros((1, 1));
                    m[(0, 0)] = a[(0, 0)] + b[(0, 0)];
                    m
                } else if k == n {
                    // Row concatenation [A B].
                    let mut m = Array2::zeros((1, a.ncols() + b.ncols()));
                    for j in 0..a.ncols() {
                        m[(0, j)] = a[(0, j)];
                    }
                    for j in 0..b.ncols() {
                        m[(0, a.ncols() + j)] = b[(0, j)];
                    }
                    m
                } else if k == 1 {
                    // Column stack [A; B].
                    let mut m = Array2::zeros((a.nrows() + b.nrows(), 1));
                    for i in 0..a.nrows() {
                        m[(i, 0)] = a[(i, 0)];
                    }
                    for i in 0..b.nrows() {
                        m[(a.nrows() + i, 0)] = b[(i, 0)];
                    }
                    m
                } else {
                    // Block diagonal.
                    let mut m = Array2::zeros((a.nrows() + b.nrows(), a.ncols() + b.ncols()));
                    for i in 0..a.nrows() {
                        for j in 0..a.ncols() {
                            m[(i, j)] = a[(i, j)];
                        }
                    }
                    for i in 0..b.nrows() {
                        for j in 0..b.ncols() {
                            m[(a.nrows() + i, a.ncols() + j)] = b[(i, j)];
                        }
                    }
                    m
                }
            });
            tensors.push(pair);
        }
        Mps::new(tensors)
    }

    pub fn scale(&self, factor: Amplitude) -> Self {
        let mut out = self.clone();
        for x in 0..2 {
            out.tensors[0][x].mapv_inplace(|v| v * factor);
        }
        out
    }

    /// One-qubit gate: `A_q^y := sum_x g[y,x] A_q^x`. Bonds unchanged.
    pub fn apply_1q(&self, q: usize, g: &Array2<Amplitude>) -> Result<Self> {
        if q == 0 || q > self.n {
            return Err(Error::QubitOutOfRange { qubit: q, n: self.n });
        }
        let mut out = self.clone();
        let a0 = &self.tensors[q - 1][0];
        let a1 = &self.tensors[q - 1][1];
        out.tensors[q - 1][0] = a0 * g[(0, 0)] + a1 * g[(0, 1)];
        out.tensors[q - 1][1] = a0 * g[(1, 0)] + a1 * g[(1, 1)];
        Ok(out)
    }

    /// Two-qubit gate on arbitrary qubits. Adjacent sites are merged,
    /// transformed and re-split by SVD; non-adjacent targets are brought
    /// together by a chain of adjacent swaps and restored afterwards.
    /// `g` is 4x4 with `q1` the most significant bit of the local index.
    pub fn apply_2q(&self, q1: usize, q2: usize, g: &Array2<Amplitude>) -> Result<Self> {
        if q1 == q2 {
            return Err(Error::DuplicateTarget);
        }
        for q in [q1, q2] {
            if q == 0 || q > self.n {
                return Err(Error::QubitOutOfRange { qubit: q, n: self.n });
            }
        }
        let (hi, lo) = (q1.max(q2), q1.min(q2));
        // Ensure the matrix treats the higher qubit as the most significant
        // local bit.
        let g_ord = if q1 > q2 { g.clone() } else { permute_2q(g) };
        if hi == lo + 1 {
            return self.apply_2q_adjacent(hi, &g_ord, SPLIT_TOL);
        }
        // Swap qubit `lo` upward until adjacent to `hi`, apply, swap back.
        let swap = crate::gate::Gate::swap(1, 2).matrix().clone();
        let mut cur = self.clone();
        for k in lo..hi - 1 {
            cur = cur.apply_2q_adjacent(k + 1, &swap, SPLIT_TOL)?;
        }
        cur = cur.apply_2q_adjacent(hi, &g_ord, SPLIT_TOL)?;
        for k in (lo..hi - 1).rev() {
            cur = cur.apply_2q_adjacent(k + 1, &swap, SPLIT_TOL)?;
        }
        Ok(cur)
    }

    /// Core merge/apply/split on the adjacent pair (hi, hi-1).
    fn apply_2q_adjacent(&self, hi: usize, g: &Array2<Amplitude>, tol: f64) -> Result<Self> {
        let lo = hi - 1;
        let a_hi = &self.tensors[hi - 1];
        let a_lo = &self.tensors[lo - 1];
        let d_top = a_hi[0].nrows();
        let d_bot = a_lo[0].ncols();
        // theta[(x * d_top + r), (y * d_bot + c)] over the merged pair.
        let mut theta: Array2<Amplitude> = Array2::zeros((2 * d_top, 2 * d_bot));
        for x in 0..2 {
            for y in 0..2 {
                for r in 0..d_top {
                    for c in 0..d_bot {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for m in 0..a_hi[0].ncols() {
                            acc += a_hi[x][(r, m)] * a_lo[y][(m, c)];
                        }
                        theta[(x * d_top + r, y * d_bot + c)] = acc;
                    }
                }
            }
        }
        let mut theta_g: Array2<Amplitude> = Array2::zeros((2 * d_top, 2 * d_bot));
        for x in 0..2 {
            for y in 0..2 {
                for xp in 0..2 {
                    for yp in 0..2 {
                        let coeff = g[(2 * x + y, 2 * xp + yp)];
                        if coeff == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        for r in 0..d_top {
                            for c in 0..d_bot {
                                let v = theta[(xp * d_top + r, yp * d_bot + c)];
                                theta_g[(x * d_top + r, y * d_bot + c)] += coeff * v;
                            }
                        }
                    }
                }
            }
        }
        let dec = svd(&theta_g);
        let rank = dec.rank(tol).max(1);
        let mut new_hi = [Array2::zeros((d_top, rank)), Array2::zeros((d_top, rank))];
        let mut new_lo = [Array2::zeros((rank, d_bot)), Array2::zeros((rank, d_bot))];
        for x in 0..2 {
            for r in 0..d_top {
                for j in 0..rank {
                    new_hi[x][(r, j)] = dec.u[(x * d_top + r, j)];
                }
            }
            for j in 0..rank {
                for c in 0..d_bot {
                    new_lo[x][(j, c)] = dec.sigma[j] * dec.vdag[(j, x * d_bot + c)];
                }
            }
        }
        let mut out = self.clone();
        out.tensors[hi - 1] = new_hi;
        out.tensors[lo - 1] = new_lo;
        Ok(out)
    }

    /// Reduces every bond to its numerical rank at threshold
    /// `tol * sigma_max` by an identity-gate sweep down and back up.
    pub fn compress(&self, tol: f64) -> Result<Self> {
        if self.n == 1 {
            return Ok(self.clone());
        }
        let id = Array2::eye(4);
        let mut cur = self.clone();
        for hi in (2..=self.n).rev() {
            cur = cur.apply_2q_adjacent(hi, &id, tol.max(SPLIT_TOL))?;
        }
        for hi in 2..=self.n {
            cur = cur.apply_2q_adjacent(hi, &id, tol.max(SPLIT_TOL))?;
        }
        Ok(cur)
    }

    /// Probability of outcome `x` for a full measurement.
    pub fn prob(&self, x: &BasisString) -> Result<f64> {
        let norm = self.norm_sqr();
        if norm <= EPS * EPS {
            return Err(Error::ZeroNorm);
        }
        Ok(self.amplitude(x)?.norm_sqr() / norm)
    }

    /// Exact chain-rule sampling of all qubits, qubit n downward, one
    /// uniform variate per qubit. Returns the outcome and the collapsed
    /// state (a phase-carrying basis product state).
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Result<(BasisString, Mps)> {
        let norm = self.norm_sqr();
        if norm <= EPS * EPS {
            return Err(Error::ZeroNorm);
        }
        // env[k] = sum over assignments of sites 1..=k of (chain)(chain)^dag,
        // a D_k x D_k PSD matrix.
        let mut envs: Vec<Array2<Amplitude>> = Vec::with_capacity(self.n);
        let mut env: Array2<Amplitude> = Array2::from_elem((1, 1), Complex64::new(1.0, 0.0));
        envs.push(env.clone());
        for k in 1..self.n {
            let d = self.tensors[k - 1][0].nrows();
            let mut next: Array2<Amplitude> = Array2::zeros((d, d));
            for x in 0..2 {
                let a = &self.tensors[k - 1][x];
                for i in 0..d {
                    for j in 0..d {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for p in 0..a.ncols() {
                            for q in 0..a.ncols() {
                                acc += a[(i, p)] * env[(p, q)] * a[(j, q)].conj();
                            }
                        }
                        next[(i, j)] += acc;
                    }
                }
            }
            env = next;
            envs.push(env.clone());
        }
        // Draw top-down, maintaining the row vector of fixed upper sites.
        let mut row: Vec<Amplitude> = vec![Complex64::new(1.0, 0.0)];
        let mut bits = Vec::with_capacity(self.n);
        for k in (1..=self.n).rev() {
            let weight = |bit: usize, row_in: &[Amplitude]| -> (f64, Vec<Amplitude>) {
                let a = &self.tensors[k - 1][bit];
                let mut out = vec![Complex64::new(0.0, 0.0); a.ncols()];
                for (i, &r) in row_in.iter().enumerate() {
                    for j in 0..a.ncols() {
                        out[j] += r * a[(i, j)];
                    }
                }
                let e = &envs[k - 1];
                let mut w = Complex64::new(0.0, 0.0);
                for p in 0..out.len() {
                    for q in 0..out.len() {
                        w += out[p] * e[(p, q)] * out[q].conj();
                    }
                }
                (w.re.max(0.0), out)
            };
            let (w0, row0) = weight(0, &row);
            let (w1, row1) = weight(1, &row);
            let total = w0 + w1;
            let u: f64 = rng.gen();
            let bit = if total <= 0.0 || u * total < w0 { 0 } else { 1 };
            bits.push(bit as u8);
            row = if bit == 0 { row0 } else { row1 };
        }
        let outcome = BasisString::new(bits);
        let amp = self.amplitude(&outcome)?;
        let collapsed = Mps::basis_state(&outcome)?.scale(amp / amp.norm());
        Ok((outcome, collapsed))
    }

    /// Measures one qubit, projecting and renormalizing.
    pub fn measure_qubit(&self, q: usize, rng: &mut ChaCha8Rng) -> Result<(u8, f64, Mps)> {
        if q == 0 || q > self.n {
            return Err(Error::QubitOutOfRange { qubit: q, n: self.n });
        }
        let norm = self.norm_sqr();
        if norm <= EPS * EPS {
            return Err(Error::ZeroNorm);
        }
        let project = |bit: usize| -> Mps {
            let mut out = self.clone();
            out.tensors[q - 1][1 - bit].mapv_inplace(|_| Complex64::new(0.0, 0.0));
            out
        };
        let p0 = project(0).norm_sqr() / norm;
        let u: f64 = rng.gen();
        let outcome = if u < p0 { 0u8 } else { 1u8 };
        let p = if outcome == 0 { p0 } else { 1.0 - p0 };
        let projected = project(outcome as usize);
        let scale = 1.0 / (p * norm).sqrt();
        let renorm = projected.scale(Complex64::new(scale, 0.0));
        Ok((outcome, p, renorm.compress(SPLIT_TOL)?))
    }

    pub fn to_dense(&self) -> Result<DenseState> {
        DenseState::check_cap(self.n)?;
        let n = self.n;
        DenseState::from_fn(n, |x| self.amplitude(x).unwrap())
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("mps {}\n", self.n);
        for k in 1..=self.n {
            let t = &self.tensors[k - 1];
            out.push_str(&format!("site {} {} {}\n", k, t[0].nrows(), t[0].ncols()));
            for x in 0..2 {
                for i in 0..t[x].nrows() {
                    let row: Vec<String> = (0..t[x].ncols())
                        .map(|j| format_amplitude(t[x][(i, j)]))
                        .collect();
                    out.push_str(&row.join(" "));
                    out.push('\n');
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty mps file".into()))?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("mps") {
            return Err(Error::Parse("expected 'mps' header".into()));
        }
        let n: usize = parts
            .next()
            .ok_or_else(|| Error::Parse("missing qubit count".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad qubit count: {e}")))?;
        let mut tensors = Vec::with_capacity(n);
        for k in 1..=n {
            let site = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing site {k}")))?;
            let toks: Vec<&str> = site.split_whitespace().collect();
            if toks.len() != 4 || toks[0] != "site" {
                return Err(Error::Parse(format!("bad site line {site:?}")));
            }
            let rows: usize = toks[2].parse().map_err(|e| Error::Parse(format!("{e}")))?;
            let cols: usize = toks[3].parse().map_err(|e| Error::Parse(format!("{e}")))?;
            let mut pair = Vec::with_capacity(2);
            for _ in 0..2 {
                let mut m = Array2::zeros((rows, cols));
                for i in 0..rows {
                    let line = lines
                        .next()
                        .ok_or_else(|| Error::Parse(format!("missing matrix row at site {k}")))?;
                    let entries: Vec<Amplitude> = line
                        .split_whitespace()
                        .map(parse_amplitude)
                        .collect::<Result<_>>()?;
                    if entries.len() != cols {
                        return Err(Error::Parse(format!(
                            "site {k} row has {} entries, expected {cols}",
                            entries.len()
                        )));
                    }
                    for (j, v) in entries.into_iter().enumerate() {
                        m[(i, j)] = v;
                    }
                }
                pair.push(m);
            }
            let a1 = pair.pop().unwrap();
            let a0 = pair.pop().unwrap();
            tensors.push([a0, a1]);
        }
        Mps::new(tensors)
    }
}

/// Conjugates a 4x4 two-qubit matrix by SWAP (exchanges the roles of the
/// two local bits).
fn permute_2q(g: &Array2<Amplitude>) -> Array2<Amplitude> {
    let perm = [0usize, 2, 1, 3];
    let mut out = Array2::zeros((4, 4));
    for r in 0..4 {
        for c in 0..4 {
            out[(perm[r], perm[c])] = g[(r, c)];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::approx_eq;
    use crate::dense::{ghz_amplitude, random_state};
    use crate::gate::Gate;
    use crate::states;
    use rand::SeedableRng;

    fn ghz_mps(n: usize) -> Mps {
        states::ghz_mps(n).unwrap()
    }

    #[test]
    fn ghz_amplitudes_match_figure() {
        let m = ghz_mps(3);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let amp = |s: &str| m.amplitude(&BasisString::parse(s).unwrap()).unwrap();
        assert!(approx_eq(amp("000"), Complex64::new(r, 0.0)));
        assert!(approx_eq(amp("111"), Complex64::new(r, 0.0)));
        assert!(approx_eq(amp("011"), Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn weighted_binary_amplitude() {
        let m = states::weighted_binary_mps(3).unwrap();
        // (x3,x2,x1) = (1,0,1) encodes 4 + 0 + 1 = 5.
        let amp = m.amplitude(&BasisString::parse("101").unwrap()).unwrap();
        assert!(approx_eq(amp, Complex64::new(5.0, 0.0)));
        let zero = m.amplitude(&BasisString::parse("000").unwrap()).unwrap();
        assert!(approx_eq(zero, Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn inner_product_matches_dense() {
        let a = random_state(8, 21).unwrap();
        let b = random_state(8, 22).unwrap();
        let ma = crate::transform::dense_to_mps(&a).unwrap();
        let mb = crate::transform::dense_to_mps(&b).unwrap();
        let ip = ma.inner_product(&mb).unwrap();
        let want = a.inner_product(&b).unwrap();
        assert!((ip - want).norm() < 1e-8);
        assert!(approx_eq(
            ghz_mps(3).inner_product(&ghz_mps(3)).unwrap(),
            Complex64::new(1.0, 0.0)
        ));
    }

    #[test]
    fn addition_bond_dims_add_exactly() {
        let plus = states::plus_mps(5).unwrap();
        let rot = states::rot_mps(5).unwrap();
        let sum = plus.add(&rot).unwrap();
        let da = plus.bond_dims();
        let db = rot.bond_dims();
        let dc = sum.bond_dims();
        for k in 1..5 {
            assert_eq!(dc[k], da[k] + db[k]);
        }
        assert_eq!(dc[0], 1);
        assert_eq!(dc[5], 1);
        // Amplitudes equal 1 + exp(i pi sum x_j 2^-(j+1)).
        for k in 0..32 {
            let x = BasisString::from_index(5, k);
            let phase: f64 = (1..=5)
                .map(|j| x.bit(j) as f64 * std::f64::consts::PI * 2f64.powi(-(j as i32) - 1))
                .sum();
            let want = Complex64::new(1.0, 0.0) + Complex64::from_polar(1.0, phase);
            assert!(approx_eq(sum.amplitude(&x).unwrap(), want));
        }
    }

    #[test]
    fn add_zero_then_compress_restores_bonds() {
        let g = ghz_mps(4);
        let z = Mps::zero(4).unwrap();
        let s = g.add(&z).unwrap();
        assert!(s.equivalent(&g).unwrap());
        let c = s.compress(1e-12).unwrap();
        assert!(c.max_bond() <= g.max_bond());
        assert!(c.to_dense().unwrap().approx_equal(&g.to_dense().unwrap()));
    }

    #[test]
    fn ghz_plus_ghz_is_doubled() {
        let g = ghz_mps(3);
        let s = g.add(&g).unwrap();
        let d = s.to_dense().unwrap();
        let want = g.to_dense().unwrap().scale(Complex64::new(2.0, 0.0));
        assert!(d.approx_equal(&want));
    }

    #[test]
    fn one_qubit_gates() {
        let zero = Mps::basis_state(&BasisString::parse("0").unwrap()).unwrap();
        let plus = zero.apply_1q(1, Gate::h(1).matrix()).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!(approx_eq(
            plus.amplitude(&BasisString::parse("0").unwrap()).unwrap(),
            Complex64::new(r, 0.0)
        ));
        let t = plus.apply_1q(1, Gate::t(1).matrix()).unwrap();
        assert!(approx_eq(
            t.amplitude(&BasisString::parse("1").unwrap()).unwrap(),
            Complex64::from_polar(r, std::f64::consts::FRAC_PI_4)
        ));
    }

    #[test]
    fn hadamard_on_sum_keeps_bond_two() {
        let sum = states::sum_mps(8).unwrap();
        assert_eq!(sum.max_bond(), 2);
        let h = sum.apply_1q(5, Gate::h(5).matrix()).unwrap();
        assert_eq!(h.max_bond(), 2);
    }

    #[test]
    fn cz_on_plus_plus() {
        let plus2 = states::plus_mps(2).unwrap();
        let out = plus2.apply_2q(2, 1, Gate::cz(2, 1).matrix()).unwrap();
        let d = out.to_dense().unwrap();
        for k in 0..4 {
            let want = if k == 3 { -1.0 } else { 1.0 };
            assert!(approx_eq(d.amplitudes()[k], Complex64::new(want, 0.0)));
        }
    }

    #[test]
    fn swap_on_basis_state() {
        let m = Mps::basis_state(&BasisString::parse("01").unwrap()).unwrap();
        let out = m.apply_2q(2, 1, Gate::swap(2, 1).matrix()).unwrap();
        let amp = out.amplitude(&BasisString::parse("10").unwrap()).unwrap();
        assert!(approx_eq(amp, Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn swap_twice_is_identity_nonadjacent() {
        let s = random_state(5, 31).unwrap();
        let m = crate::transform::dense_to_mps(&s).unwrap();
        let swapped = m.apply_2q(5, 1, Gate::swap(5, 1).matrix()).unwrap();
        let back = swapped.apply_2q(5, 1, Gate::swap(5, 1).matrix()).unwrap();
        assert!(back.to_dense().unwrap().approx_equal(&s));
        let direct = s.apply_gate(&Gate::swap(5, 1)).unwrap();
        assert!(swapped.to_dense().unwrap().approx_equal(&direct));
    }

    #[test]
    fn gates_match_dense_oracle() {
        let s = random_state(4, 44).unwrap();
        let m = crate::transform::dense_to_mps(&s).unwrap();
        for g in [Gate::h(2), Gate::t(4), Gate::y(1)] {
            let got = m.apply_1q(g.targets()[0], g.matrix()).unwrap();
            assert!(got.to_dense().unwrap().approx_equal(&s.apply_gate(&g).unwrap()));
        }
        for g in [Gate::cz(3, 1), Gate::swap(2, 4), Gate::cz(1, 2)] {
            let got = m
                .apply_2q(g.targets()[0], g.targets()[1], g.matrix())
                .unwrap();
            assert!(got.to_dense().unwrap().approx_equal(&s.apply_gate(&g).unwrap()));
            assert!((got.norm_sqr() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn compress_preserves_amplitudes() {
        let s = random_state(8, 77).unwrap();
        let m = crate::transform::dense_to_mps(&s).unwrap();
        let padded = m.add(&Mps::zero(8).unwrap()).unwrap();
        let c = padded.compress(1e-12).unwrap();
        assert!(c.to_dense().unwrap().approx_equal(&s));
    }

    #[test]
    fn product_state_compresses_to_unit_bonds() {
        let p = states::plus_mps(4).unwrap();
        let padded = p.add(&Mps::zero(4).unwrap()).unwrap();
        let c = padded.compress(1e-12).unwrap();
        assert!(c.bond_dims().iter().all(|&d| d == 1));
    }

    #[test]
    fn prob_and_equal() {
        let g = ghz_mps(3);
        assert!((g.prob(&BasisString::parse("111").unwrap()).unwrap() - 0.5).abs() < 1e-9);
        let scaled = g.scale(Complex64::new(0.0, 3.0));
        assert!(g.equivalent(&scaled).unwrap());
        let plus = states::plus_mps(3).unwrap();
        assert!(!g.equivalent(&plus).unwrap());
    }

    #[test]
    fn sampling_matches_oracle_frequencies() {
        let s = random_state(3, 50).unwrap();
        let m = crate::transform::dense_to_mps(&s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut counts = [0usize; 8];
        let trials = 20_000;
        for _ in 0..trials {
            let (x, _) = m.sample(&mut rng).unwrap();
            counts[x.index()] += 1;
        }
        for k in 0..8 {
            let p = s.amplitudes()[k].norm_sqr();
            let f = counts[k] as f64 / trials as f64;
            assert!((f - p).abs() < 0.02, "k={k}: f={f} p={p}");
        }
    }

    #[test]
    fn text_round_trip() {
        let m = states::sum_mps(4).unwrap();
        let back = Mps::from_text(&m.to_text()).unwrap();
        assert_eq!(m.bond_dims(), back.bond_dims());
        assert!(m.to_dense().unwrap().approx_equal(&back.to_dense().unwrap()));
    }
}
