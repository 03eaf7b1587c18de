//! Gates as explicit unitary matrices over ordered target qubits.

use crate::complex::{Amplitude, EPS};
use crate::{Error, Result};
use ndarray::Array2;
use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

/// A k-local gate: an ordered list of k distinct target qubits (1-based) and
/// a `2^k x 2^k` unitary matrix. The first target is the most significant
/// bit of the gate's local basis index, mirroring the global convention.
#[derive(Clone, Debug)]
pub struct Gate {
    pub name: String,
    targets: Vec<usize>,
    matrix: Array2<Amplitude>,
}

fn c(re: f64, im: f64) -> Amplitude {
    Complex64::new(re, im)
}

impl Gate {
    /// Builds a gate from an explicit matrix, checking unitarity (U†U = I)
    /// within tolerance.
    pub fn new(name: impl Into<String>, targets: Vec<usize>, matrix: Array2<Amplitude>) -> Result<Self> {
        let k = targets.len();
        let dim = 1usize << k;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::Parse(format!(
                "gate on {k} qubits needs a {dim}x{dim} matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        for i in 0..k {
            for j in (i + 1)..k {
                if targets[i] == targets[j] {
                    return Err(Error::DuplicateTarget);
                }
            }
        }
        for r in 0..dim {
            for s in 0..dim {
                let mut dot = Complex64::new(0.0, 0.0);
                for t in 0..dim {
                    dot += matrix[(t, r)].conj() * matrix[(t, s)];
                }
                let expect = if r == s { 1.0 } else { 0.0 };
                if (dot.re - expect).abs() > 1e-8 || dot.im.abs() > 1e-8 {
                    return Err(Error::NotUnitary);
                }
            }
        }
        Ok(Gate {
            name: name.into(),
            targets,
            matrix,
        })
    }

    fn single(name: &str, q: usize, m: [[Amplitude; 2]; 2]) -> Self {
        let matrix = Array2::from_shape_vec((2, 2), vec![m[0][0], m[0][1], m[1][0], m[1][1]]).unwrap();
        Gate {
            name: name.to_string(),
            targets: vec![q],
            matrix,
        }
    }

    pub fn x(q: usize) -> Self {
        Self::single("x", q, [[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]])
    }

    pub fn y(q: usize) -> Self {
        Self::single("y", q, [[c(0., 0.), c(0., -1.)], [c(0., 1.), c(0., 0.)]])
    }

    pub fn z(q: usize) -> Self {
        Self::single("z", q, [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]])
    }

    pub fn h(q: usize) -> Self {
        let s = FRAC_1_SQRT_2;
        Self::single("h", q, [[c(s, 0.), c(s, 0.)], [c(s, 0.), c(-s, 0.)]])
    }

    pub fn s(q: usize) -> Self {
        Self::single("s", q, [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(0., 1.)]])
    }

    pub fn t(q: usize) -> Self {
        let w = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        Self::single("t", q, [[c(1., 0.), c(0., 0.)], [c(0., 0.), w]])
    }

    pub fn cz(a: usize, b: usize) -> Self {
        let mut m = Array2::eye(4);
        m[(3, 3)] = c(-1., 0.);
        Gate {
            name: "cz".to_string(),
            targets: vec![a, b],
            matrix: m,
        }
    }

    pub fn swap(a: usize, b: usize) -> Self {
        let mut m = Array2::zeros((4, 4));
        m[(0, 0)] = c(1., 0.);
        m[(1, 2)] = c(1., 0.);
        m[(2, 1)] = c(1., 0.);
        m[(3, 3)] = c(1., 0.);
        Gate {
            name: "swap".to_string(),
            targets: vec![a, b],
            matrix: m,
        }
    }

    pub fn arity(&self) -> usize {
        self.targets.len()
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn matrix(&self) -> &Array2<Amplitude> {
        &self.matrix
    }

    /// The inverse gate (conjugate transpose).
    pub fn dagger(&self) -> Self {
        let dim = self.matrix.nrows();
        let mut m = Array2::zeros((dim, dim));
        for r in 0..dim {
            for s in 0..dim {
                m[(r, s)] = self.matrix[(s, r)].conj();
            }
        }
        Gate {
            name: format!("{}_dag", self.name),
            targets: self.targets.clone(),
            matrix: m,
        }
    }

    pub fn check_targets(&self, n: usize) -> Result<()> {
        for &q in &self.targets {
            if q == 0 || q > n {
                return Err(Error::QubitOutOfRange { qubit: q, n });
            }
        }
        Ok(())
    }

    /// True when the matrix is diagonal within tolerance.
    pub fn is_diagonal(&self) -> bool {
        let dim = self.matrix.nrows();
        (0..dim).all(|r| {
            (0..dim).all(|s| r == s || self.matrix[(r, s)].norm() <= EPS)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_gates_are_unitary() {
        for g in [
            Gate::x(1),
            Gate::y(1),
            Gate::z(1),
            Gate::h(1),
            Gate::s(1),
            Gate::t(1),
            Gate::cz(1, 2),
            Gate::swap(1, 2),
        ] {
            let rebuilt = Gate::new(g.name.clone(), g.targets.clone(), g.matrix.clone());
            assert!(rebuilt.is_ok(), "{} failed unitarity", g.name);
        }
    }

    #[test]
    fn non_unitary_rejected() {
        let m = Array2::from_shape_vec((2, 2), vec![c(1., 0.), c(0., 0.), c(0., 0.), c(2., 0.)]).unwrap();
        assert!(matches!(Gate::new("bad", vec![1], m), Err(Error::NotUnitary)));
    }

    #[test]
    fn s_equals_t_squared() {
        let t = Gate::t(1);
        let s = Gate::s(1);
        let t2 = t.matrix().dot(t.matrix());
        for r in 0..2 {
            for col in 0..2 {
                assert!(crate::approx_eq(t2[(r, col)], s.matrix()[(r, col)]));
            }
        }
    }
}
