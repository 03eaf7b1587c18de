//! Pauli strings, Pauli local invertible maps (LIMs), exact stabilizer
//! groups, and the coset-minimization machinery behind LIMDD canonicity.
//!
//! A LIM is `lambda * P_1 (x) ... (x) P_k` with `lambda` a nonzero complex
//! scalar. Strings are stored top qubit first, matching the diagram's
//! left-to-right label order, and compare lexicographically with
//! `I < X < Y < Z`.

use crate::complex::{approx_zero, Amplitude, EPS};
use num_complex::Complex64;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// (x, z) symplectic bits: I=(0,0), X=(1,0), Y=(1,1), Z=(0,1).
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// Symbol product `self * other = i^m * result`.
    pub fn mul(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) => (0, p),
            (p, I) => (0, p),
            (X, X) | (Y, Y) | (Z, Z) => (0, I),
            (X, Y) => (1, Z),
            (Y, X) => (3, Z),
            (Y, Z) => (1, X),
            (Z, Y) => (3, X),
            (Z, X) => (1, Y),
            (X, Z) => (3, Y),
        }
    }

    pub fn commutes(self, other: Pauli) -> bool {
        self == Pauli::I || other == Pauli::I || self == other
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct PauliString(pub Vec<Pauli>);

impl PauliString {
    pub fn identity(len: usize) -> Self {
        PauliString(vec![Pauli::I; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&p| p == Pauli::I)
    }

    /// `self * other = i^m * string`, m mod 4.
    pub fn mul(&self, other: &PauliString) -> (u8, PauliString) {
        debug_assert_eq!(self.len(), other.len());
        let mut phase = 0u8;
        let mut out = Vec::with_capacity(self.len());
        for (&a, &b) in self.0.iter().zip(&other.0) {
            let (m, p) = a.mul(b);
            phase = (phase + m) % 4;
            out.push(p);
        }
        (phase, PauliString(out))
    }

    pub fn commutes(&self, other: &PauliString) -> bool {
        let anti = self
            .0
            .iter()
            .zip(&other.0)
            .filter(|(a, b)| !a.commutes(**b))
            .count();
        anti % 2 == 0
    }

    /// Symplectic bit vector of length 2*len: (x_0, z_0, x_1, z_1, ...).
    pub fn to_bits(&self) -> Vec<bool> {
        let mut v = Vec::with_capacity(2 * self.len());
        for &p in &self.0 {
            let (x, z) = p.bits();
            v.push(x);
            v.push(z);
        }
        v
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        debug_assert_eq!(bits.len() % 2, 0);
        PauliString(
            bits.chunks(2)
                .map(|c| Pauli::from_bits(c[0], c[1]))
                .collect(),
        )
    }

    pub fn to_string(&self) -> String {
        self.0.iter().map(|p| p.to_char()).collect()
    }

    pub fn parse(s: &str) -> crate::Result<Self> {
        s.chars()
            .map(|c| {
                Pauli::from_char(c)
                    .ok_or_else(|| crate::Error::Parse(format!("bad Pauli symbol {c:?}")))
            })
            .collect::<crate::Result<Vec<_>>>()
            .map(PauliString)
    }
}

/// A Pauli string with an exact +/- sign; products of exact stabilizers
/// always stay in this form (Hermitian, so i-phases cancel).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SignedPauli {
    pub neg: bool,
    pub string: PauliString,
}

impl SignedPauli {
    pub fn identity(len: usize) -> Self {
        SignedPauli {
            neg: false,
            string: PauliString::identity(len),
        }
    }

    pub fn mul(&self, other: &SignedPauli) -> SignedPauli {
        let (m, string) = self.string.mul(&other.string);
        debug_assert_eq!(m % 2, 0, "stabilizer products never pick up i phases");
        SignedPauli {
            neg: self.neg ^ other.neg ^ (m == 2),
            string,
        }
    }

    pub fn to_lim(&self) -> PauliLim {
        PauliLim {
            scalar: Complex64::new(if self.neg { -1.0 } else { 1.0 }, 0.0),
            string: self.string.clone(),
        }
    }
}

/// `scalar * P_1 (x) ... (x) P_k`, scalar nonzero.
#[derive(Clone, PartialEq, Debug)]
pub struct PauliLim {
    pub scalar: Amplitude,
    pub string: PauliString,
}

impl PauliLim {
    pub fn identity(len: usize) -> Self {
        PauliLim {
            scalar: Complex64::new(1.0, 0.0),
            string: PauliString::identity(len),
        }
    }

    pub fn from_scalar(scalar: Amplitude, len: usize) -> Self {
        PauliLim {
            scalar,
            string: PauliString::identity(len),
        }
    }

    pub fn len(&self) -> usize {
        self.string.len()
    }

    pub fn mul(&self, other: &PauliLim) -> PauliLim {
        let (m, string) = self.string.mul(&other.string);
        PauliLim {
            scalar: self.scalar * other.scalar * i_power(m),
            string,
        }
    }

    /// Pauli strings square to the identity, so the inverse just inverts
    /// the scalar.
    pub fn inverse(&self) -> PauliLim {
        PauliLim {
            scalar: Complex64::new(1.0, 0.0) / self.scalar,
            string: self.string.clone(),
        }
    }

    pub fn scaled(&self, f: Amplitude) -> PauliLim {
        PauliLim {
            scalar: self.scalar * f,
            string: self.string.clone(),
        }
    }

    pub fn prepend(&self, p: Pauli) -> PauliLim {
        let mut s = Vec::with_capacity(self.len() + 1);
        s.push(p);
        s.extend(self.string.0.iter().copied());
        PauliLim {
            scalar: self.scalar,
            string: PauliString(s),
        }
    }

    /// Drops the top symbol, returning it alongside the remainder.
    pub fn split_top(&self) -> (Pauli, PauliLim) {
        let top = self.string.0[0];
        (
            top,
            PauliLim {
                scalar: self.scalar,
                string: PauliString(self.string.0[1..].to_vec()),
            },
        )
    }

    /// Applies the LIM to a dense amplitude vector of length 2^len
    /// (string position 0 acts on the most significant bit).
    pub fn apply_to_amps(&self, amps: &[Amplitude]) -> Vec<Amplitude> {
        let len = self.len();
        debug_assert_eq!(amps.len(), 1 << len);
        let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
        for (k, &a) in amps.iter().enumerate() {
            if approx_zero(a) {
                continue;
            }
            let mut phase = Complex64::new(1.0, 0.0);
            let mut target = k;
            for (i, &p) in self.string.0.iter().enumerate() {
                let bitpos = len - 1 - i;
                let bit = (k >> bitpos) & 1;
                match p {
                    Pauli::I => {}
                    Pauli::X => target ^= 1 << bitpos,
                    Pauli::Y => {
                        target ^= 1 << bitpos;
                        // Y|0> = i|1>, Y|1> = -i|0>.
                        phase *= if bit == 0 {
                            Complex64::new(0.0, 1.0)
                        } else {
                            Complex64::new(0.0, -1.0)
                        };
                    }
                    Pauli::Z => {
                        if bit == 1 {
                            phase = -phase;
                        }
                    }
                }
            }
            out[target] += self.scalar * phase * a;
        }
        out
    }
}

pub fn i_power(m: u8) -> Amplitude {
    match m % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Independent generators of an exact stabilizer group: elements `±P` with
/// `(±P)|v> = |v>`.
#[derive(Clone, Debug, Default)]
pub struct StabGroup {
    pub gens: Vec<SignedPauli>,
}

impl StabGroup {
    pub fn trivial() -> Self {
        StabGroup { gens: Vec::new() }
    }

    /// Row space of the generator strings as symplectic bit vectors.
    pub fn string_rows(&self) -> Vec<Vec<bool>> {
        self.gens.iter().map(|g| g.string.to_bits()).collect()
    }

    /// If `s` lies in the group's string span, returns the exact signed
    /// element with that string.
    pub fn element_for_string(&self, s: &PauliString) -> Option<SignedPauli> {
        let width = 2 * s.len();
        let target = s.to_bits();
        // Gaussian elimination remembering which generators combine.
        let mut rows: Vec<(Vec<bool>, Vec<usize>)> = self
            .gens
            .iter()
            .enumerate()
            .map(|(i, g)| (g.string.to_bits(), vec![i]))
            .collect();
        let mut t = (target, Vec::<usize>::new());
        let mut pivot_row = 0;
        for col in 0..width {
            let Some(r) = (pivot_row..rows.len()).find(|&r| rows[r].0[col]) else {
                continue;
            };
            rows.swap(pivot_row, r);
            let (pivot_bits, pivot_gens) = rows[pivot_row].clone();
            for (bits, gens) in rows.iter_mut().skip(pivot_row + 1) {
                if bits[col] {
                    xor_into(bits, &pivot_bits);
                    gens.extend(&pivot_gens);
                }
            }
            if t.0[col] {
                xor_into(&mut t.0, &pivot_bits);
                t.1.extend(&pivot_gens);
            }
            pivot_row += 1;
        }
        if t.0.iter().any(|&b| b) {
            return None;
        }
        let mut acc = SignedPauli::identity(s.len());
        for &g in &t.1 {
            acc = acc.mul(&self.gens[g]);
        }
        debug_assert_eq!(&acc.string, s);
        Some(acc)
    }
}

fn xor_into(dst: &mut [bool], src: &[bool]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

/// Basis of the intersection of two F2 row spaces (Zassenhaus).
pub fn intersect_rowspaces(a: &[Vec<bool>], b: &[Vec<bool>], width: usize) -> Vec<Vec<bool>> {
    // Rows of the block matrix [A | A; B | 0], eliminated on the left half.
    let mut rows: Vec<Vec<bool>> = Vec::new();
    for r in a {
        let mut row = r.clone();
        row.extend(r.iter().copied());
        rows.push(row);
    }
    for r in b {
        let mut row = r.clone();
        row.extend(std::iter::repeat(false).take(width));
        rows.push(row);
    }
    let mut pivot_row = 0;
    for col in 0..width {
        let Some(r) = (pivot_row..rows.len()).find(|&r| rows[r][col]) else {
            continue;
        };
        rows.swap(pivot_row, r);
        let pivot = rows[pivot_row].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != pivot_row && row[col] {
                xor_into(row, &pivot);
            }
        }
        pivot_row += 1;
    }
    // Rows whose left half vanished: right halves span the intersection.
    let mut basis: Vec<Vec<bool>> = Vec::new();
    for row in rows.iter().skip(pivot_row) {
        let right: Vec<bool> = row[width..].to_vec();
        if right.iter().any(|&x| x) {
            basis.push(right);
        }
    }
    // Reduce the basis itself.
    reduce_basis(&mut basis, width);
    basis
}

fn reduce_basis(rows: &mut Vec<Vec<bool>>, width: usize) {
    let mut pivot_row = 0;
    for col in 0..width {
        let Some(r) = (pivot_row..rows.len()).find(|&r| rows[r][col]) else {
            continue;
        };
        rows.swap(pivot_row, r);
        let pivot = rows[pivot_row].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != pivot_row && row[col] {
                xor_into(row, &pivot);
            }
        }
        pivot_row += 1;
    }
    rows.truncate(pivot_row);
    rows.retain(|r| r.iter().any(|&x| x));
}

/// One element of the abelian move group acting on a label `C` by
/// `C -> a * C * b` with `a` from the left stabilizer and `b` from the
/// right one.
#[derive(Clone, Debug)]
struct Move {
    a: SignedPauli,
    b: SignedPauli,
}

impl Move {
    fn delta_at(&self, pos: usize) -> (bool, bool) {
        let (ax, az) = self.a.string.0[pos].bits();
        let (bx, bz) = self.b.string.0[pos].bits();
        (ax ^ bx, az ^ bz)
    }

    fn compose(&self, other: &Move) -> Move {
        Move {
            a: self.a.mul(&other.a),
            b: self.b.mul(&other.b),
        }
    }

    fn apply(&self, label: &PauliLim) -> PauliLim {
        self.a.to_lim().mul(label).mul(&self.b.to_lim())
    }
}

/// Result of a coset minimization: the canonical label, the accumulated
/// left stabilizer element realizing it, and the final sign flip.
pub struct CosetMin {
    pub label: PauliLim,
    pub left: SignedPauli,
    pub flipped: bool,
}

/// Lexicographically minimizes the Pauli string of `±(a * c * b)` over
/// `a` in `left`, `b` in `right`; ties on the string are broken by taking
/// the scalar with argument in `[0, pi)`.
pub fn lexmin_double_coset(c: &PauliLim, left: &StabGroup, right: &StabGroup) -> CosetMin {
    let len = c.len();
    let id = SignedPauli::identity(len);
    let mut moves: Vec<Move> = Vec::new();
    for g in &left.gens {
        moves.push(Move {
            a: g.clone(),
            b: id.clone(),
        });
    }
    for h in &right.gens {
        moves.push(Move {
            a: id.clone(),
            b: h.clone(),
        });
    }
    let mut label = c.clone();
    let mut acc_left = id;
    for pos in 0..len {
        // Reduce the move set so at most two independent moves touch this
        // position; everything else keeps a zero delta here.
        let mut pivots: Vec<Move> = Vec::new();
        let mut rest: Vec<Move> = Vec::new();
        let combo_for = |pivots: &[Move], d: (bool, bool)| -> Option<Move> {
            match pivots.len() {
                0 => None,
                1 => (pivots[0].delta_at(pos) == d).then(|| pivots[0].clone()),
                _ => {
                    let d1 = pivots[0].delta_at(pos);
                    let d2 = pivots[1].delta_at(pos);
                    if d == d1 {
                        Some(pivots[0].clone())
                    } else if d == d2 {
                        Some(pivots[1].clone())
                    } else if d == (d1.0 ^ d2.0, d1.1 ^ d2.1) {
                        Some(pivots[0].compose(&pivots[1]))
                    } else {
                        None
                    }
                }
            }
        };
        for m in moves.into_iter() {
            let d = m.delta_at(pos);
            if d == (false, false) {
                rest.push(m);
            } else if let Some(combo) = combo_for(&pivots, d) {
                rest.push(m.compose(&combo));
            } else {
                pivots.push(m);
            }
        }
        // Choose the smallest achievable symbol at this position.
        let (curx, curz) = label.string.0[pos].bits();
        let mut best: Option<(Pauli, Option<Move>)> = None;
        let mut consider = |mv: Option<Move>| {
            let (dx, dz) = match &mv {
                None => (false, false),
                Some(m) => m.delta_at(pos),
            };
            let sym = Pauli::from_bits(curx ^ dx, curz ^ dz);
            if best.as_ref().map_or(true, |(b, _)| sym < *b) {
                best = Some((sym, mv));
            }
        };
        consider(None);
        match pivots.len() {
            0 => {}
            1 => consider(Some(pivots[0].clone())),
            _ => {
                consider(Some(pivots[0].clone()));
                consider(Some(pivots[1].clone()));
                consider(Some(pivots[0].compose(&pivots[1])));
            }
        }
        if let Some((_, Some(mv))) = best {
            label = mv.apply(&label);
            acc_left = mv.a.mul(&acc_left);
        }
        moves = rest;
    }
    // Scalar sign canonicalization: argument in [0, pi).
    let s = label.scalar;
    let flipped = s.im < -EPS || (s.im.abs() <= EPS && s.re < 0.0);
    if flipped {
        label.scalar = -label.scalar;
    }
    CosetMin {
        label,
        left: acc_left,
        flipped,
    }
}

/// Minimizes the string of `±(P * b)` over `b` in `stab`, returning the
/// canonical string and the exact factor `mu` with `P = mu_inv ... `;
/// concretely `P|v> = mu * P*|v>` for any state stabilized by `stab`.
pub fn lexmin_right_coset(p: &PauliString, stab: &StabGroup) -> (PauliString, Amplitude) {
    let c = PauliLim {
        scalar: Complex64::new(1.0, 0.0),
        string: p.clone(),
    };
    let min = lexmin_double_coset(&c, &StabGroup::trivial(), stab);
    // min.label = eps * P * b exactly, so P|v> = eps^-1 * scalar^-1 ... ;
    // since eps folds into the scalar already: label = P * b up to the
    // recorded flip, giving P|v> = flip * (1/scalar is wrong) ...
    // Derivation: label = s * P_min with label = eps * (P * b) as an
    // operator. Applying both sides to |v> (b|v> = |v>):
    //   s * P_min |v> = eps * P |v>   =>   P|v> = eps * s * P_min |v>.
    let eps = if min.flipped { -1.0 } else { 1.0 };
    let mu = min.label.scalar * eps;
    (min.label.string, mu)
}
