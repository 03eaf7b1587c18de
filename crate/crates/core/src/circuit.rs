//! Circuit intermediate representation and the text format shared by every
//! backend.
//!
//! One instruction per line, whitespace separated, `#` starts a comment:
//!
//! ```text
//! qubits N
//! x q | y q | z q | s q | t q | h q | cz q1 q2 | swap q1 q2
//! local k q1 .. qk <path-to-matrix-file>
//! measure q
//! measure_all
//! ```
//!
//! A matrix file holds `2^k` lines of `2^k` complex entries `re,im`.

use crate::complex::{parse_amplitude, Amplitude};
use crate::gate::Gate;
use crate::{Error, Result};
use ndarray::Array2;
use std::path::Path;

#[derive(Clone, Debug)]
pub enum Step {
    Gate(Gate),
    Measure(usize),
    MeasureAll,
}

#[derive(Clone, Debug)]
pub struct Circuit {
    pub n: usize,
    pub steps: Vec<Step>,
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        Circuit { n, steps: Vec::new() }
    }

    pub fn push_gate(&mut self, g: Gate) -> Result<()> {
        g.check_targets(self.n)?;
        self.steps.push(Step::Gate(g));
        Ok(())
    }

    /// Parses the text format. Matrix paths in `local` lines are resolved
    /// relative to `dir`.
    pub fn parse(text: &str, dir: &Path) -> Result<Self> {
        let mut circuit: Option<Circuit> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let err = |msg: String| Error::Parse(format!("line {}: {msg}", lineno + 1));
            let parse_qubit = |tok: &str| -> Result<usize> {
                tok.parse::<usize>()
                    .map_err(|e| err(format!("bad qubit index {tok:?}: {e}")))
            };
            match toks[0] {
                "qubits" => {
                    if circuit.is_some() {
                        return Err(err("duplicate qubits header".into()));
                    }
                    if toks.len() != 2 {
                        return Err(err("usage: qubits N".into()));
                    }
                    let n = parse_qubit(toks[1])?;
                    if n == 0 {
                        return Err(err("qubit count must be positive".into()));
                    }
                    circuit = Some(Circuit::new(n));
                }
                op => {
                    let c = circuit
                        .as_mut()
                        .ok_or_else(|| err("instruction before qubits header".into()))?;
                    let n = c.n;
                    let check = |q: usize| -> Result<usize> {
                        if q == 0 || q > n {
                            Err(Error::QubitOutOfRange { qubit: q, n })
                        } else {
                            Ok(q)
                        }
                    };
                    match op {
                        "x" | "y" | "z" | "s" | "t" | "h" => {
                            if toks.len() != 2 {
                                return Err(err(format!("usage: {op} q")));
                            }
                            let q = check(parse_qubit(toks[1])?)?;
                            let g = match op {
                                "x" => Gate::x(q),
                                "y" => Gate::y(q),
                                "z" => Gate::z(q),
                                "s" => Gate::s(q),
                                "t" => Gate::t(q),
                                "h" => Gate::h(q),
                                _ => unreachable!(),
                            };
                            c.steps.push(Step::Gate(g));
                        }
                        "cz" | "swap" => {
                            if toks.len() != 3 {
                                return Err(err(format!("usage: {op} q1 q2")));
                            }
                            let a = check(parse_qubit(toks[1])?)?;
                            let b = check(parse_qubit(toks[2])?)?;
                            if a == b {
                                return Err(Error::DuplicateTarget);
                            }
                            let g = if op == "cz" { Gate::cz(a, b) } else { Gate::swap(a, b) };
                            c.steps.push(Step::Gate(g));
                        }
                        "local" => {
                            if toks.len() < 4 {
                                return Err(err("usage: local k q1..qk matrix-file".into()));
                            }
                            let k: usize = toks[1]
                                .parse()
                                .map_err(|e| err(format!("bad arity: {e}")))?;
                            if toks.len() != 3 + k {
                                return Err(err(format!("local {k} expects {k} qubits and a path")));
                            }
                            let mut targets = Vec::with_capacity(k);
                            for tok in &toks[2..2 + k] {
                                targets.push(check(parse_qubit(tok)?)?);
                            }
                            let matrix = read_matrix_file(&dir.join(toks[2 + k]), k)?;
                            let g = Gate::new(format!("local{k}"), targets, matrix)?;
                            c.steps.push(Step::Gate(g));
                        }
                        "measure" => {
                            if toks.len() != 2 {
                                return Err(err("usage: measure q".into()));
                            }
                            let q = check(parse_qubit(toks[1])?)?;
                            c.steps.push(Step::Measure(q));
                        }
                        "measure_all" => {
                            if toks.len() != 1 {
                                return Err(err("measure_all takes no arguments".into()));
                            }
                            c.steps.push(Step::MeasureAll);
                        }
                        other => return Err(err(format!("unknown instruction {other:?}"))),
                    }
                }
            }
        }
        circuit.ok_or_else(|| Error::Parse("missing qubits header".into()))
    }

    pub fn parse_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let dir = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, dir)
    }
}

fn read_matrix_file(path: &Path, k: usize) -> Result<Array2<Amplitude>> {
    let text = std::fs::read_to_string(path)?;
    let dim = 1usize << k;
    let mut rows = Vec::with_capacity(dim);
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row: Vec<Amplitude> = line
            .split_whitespace()
            .map(parse_amplitude)
            .collect::<Result<_>>()?;
        if row.len() != dim {
            return Err(Error::Parse(format!(
                "matrix row has {} entries, expected {dim}",
                row.len()
            )));
        }
        rows.push(row);
    }
    if rows.len() != dim {
        return Err(Error::Parse(format!(
            "matrix has {} rows, expected {dim}",
            rows.len()
        )));
    }
    let flat: Vec<Amplitude> = rows.into_iter().flatten().collect();
    Ok(Array2::from_shape_vec((dim, dim), flat).unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_ghz_circuit() {
        let text = "# GHZ preparation\nqubits 3\nh 3\nh 2\ncz 3 2\nh 2\nh 1\ncz 2 1\nh 1\nmeasure_all\n";
        let c = Circuit::parse(text, Path::new(".")).unwrap();
        assert_eq!(c.n, 3);
        assert_eq!(c.steps.len(), 8);
        assert!(matches!(c.steps.last(), Some(Step::MeasureAll)));
    }

    #[test]
    fn rejects_out_of_range_qubit() {
        let text = "qubits 2\nx 3\n";
        assert!(matches!(
            Circuit::parse(text, Path::new(".")),
            Err(Error::QubitOutOfRange { qubit: 3, n: 2 })
        ));
    }

    #[test]
    fn rejects_missing_header() {
        assert!(Circuit::parse("x 1\n", Path::new(".")).is_err());
    }
}
