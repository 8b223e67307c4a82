//! Versioned plain-text problem format.
//!
//! ```text
//! conic-problem 1
//! n 2 m 3
//! cones 2
//! zero 1
//! box 2
//! 0 -1
//! 1 1
//! P 1
//! 0 0 2
//! q
//! 1 -1
//! A 3
//! 0 0 1
//! ...
//! b
//! 1 0 0
//! optimal -0.5
//! end
//! ```
//!
//! Cone lines are `zero d`, `nonneg d`, `soc d`, `psd d` (vector length),
//! `box d` followed by a lower and an upper bound line, or
//! `custom doubly_stochastic d`. Matrices list `row col value` triplets.
//! Numbers are printed in shortest round-trip form.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use crate::cones::DoublyStochasticSet;
use crate::error::{Result, SolverError};
use crate::linalg::sparse::CscMatrix;
use crate::model::{ConeSpec, ProblemData};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "conic-problem";

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ")
}

fn write_matrix(out: &mut String, name: &str, m: &CscMatrix) {
    let _ = writeln!(out, "{name} {}", m.nnz());
    for (r, c, v) in m.iter() {
        let _ = writeln!(out, "{r} {c} {v:?}");
    }
}

/// Serialises a problem with an optional known optimal objective.
pub fn write_problem(problem: &ProblemData, optimal: Option<f64>) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {FORMAT_VERSION}");
    let _ = writeln!(out, "n {} m {}", problem.n(), problem.m());
    let _ = writeln!(out, "cones {}", problem.cones.len());
    for c in &problem.cones {
        match c {
            ConeSpec::Zero(d) => _ = writeln!(out, "zero {d}"),
            ConeSpec::Nonneg(d) => _ = writeln!(out, "nonneg {d}"),
            ConeSpec::SecondOrder(d) => _ = writeln!(out, "soc {d}"),
            ConeSpec::PsdTriangle(d) => _ = writeln!(out, "psd {d}"),
            ConeSpec::Box { lower, upper } => {
                let _ = writeln!(out, "box {}", lower.len());
                let _ = writeln!(out, "{}", join(lower));
                let _ = writeln!(out, "{}", join(upper));
            }
            ConeSpec::Custom(k) if k.name() == "doubly_stochastic" => {
                let _ = writeln!(out, "custom doubly_stochastic {}", k.dim());
            }
            ConeSpec::Custom(k) => {
                return Err(SolverError::Unsupported(format!("custom set '{}' cannot be serialised", k.name())));
            }
        }
    }
    write_matrix(&mut out, "P", &problem.P);
    let _ = writeln!(out, "q\n{}", join(&problem.q));
    write_matrix(&mut out, "A", &problem.A);
    let _ = writeln!(out, "b\n{}", join(&problem.b));
    if let Some(v) = optimal {
        let _ = writeln!(out, "optimal {v:?}");
    }
    out.push_str("end\n");
    Ok(out)
}

struct Reader<'a> {
    lines: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
    last: usize,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)> + 'a> = Box::new(
            text.lines()
                .enumerate()
                .map(|(k, l)| (k + 1, l.trim()))
                .filter(|(_, l)| !l.starts_with('#')),
        );
        Reader { lines: it.peekable(), last: 0 }
    }

    fn err(&self, msg: impl Into<String>) -> SolverError {
        SolverError::Parse { line: self.last, msg: msg.into() }
    }

    fn line(&mut self) -> Result<&'a str> {
        match self.lines.next() {
            Some((k, l)) => {
                self.last = k;
                Ok(l)
            }
            None => Err(SolverError::Parse { line: self.last + 1, msg: "unexpected end of file".into() }),
        }
    }

    fn keyword_usize(&mut self, key: &str) -> Result<usize> {
        let l = self.line()?;
        let mut t = l.split_whitespace();
        if t.next() != Some(key) {
            return Err(self.err(format!("expected '{key}'")));
        }
        let v = t.next().ok_or_else(|| self.err(format!("missing value after '{key}'")))?;
        v.parse().map_err(|_| self.err(format!("bad count '{v}'")))
    }

    fn floats(&mut self, len: usize) -> Result<Vec<f64>> {
        let l = if len == 0 { self.lines.next_if(|(_, l)| l.is_empty()).map_or("", |(_, l)| l) } else { self.line()? };
        let v: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| self.err(format!("bad number '{t}'"))))
            .collect::<Result<_>>()?;
        if v.len() != len {
            return Err(self.err(format!("expected {len} values, found {}", v.len())));
        }
        Ok(v)
    }

    fn matrix(&mut self, key: &str, nrows: usize, ncols: usize) -> Result<CscMatrix> {
        let nnz = self.keyword_usize(key)?;
        let mut trip = Vec::with_capacity(nnz);
        for _ in 0..nnz {
            let l = self.line()?;
            let t: Vec<&str> = l.split_whitespace().collect();
            if t.len() != 3 {
                return Err(self.err("expected 'row col value'"));
            }
            let r: usize = t[0].parse().map_err(|_| self.err("bad row index"))?;
            let c: usize = t[1].parse().map_err(|_| self.err("bad column index"))?;
            let v: f64 = t[2].parse().map_err(|_| self.err("bad value"))?;
            if r >= nrows || c >= ncols {
                return Err(self.err(format!("entry ({r},{c}) outside {nrows}x{ncols}")));
            }
            trip.push((r, c, v));
        }
        Ok(CscMatrix::from_triplets(nrows, ncols, &trip))
    }
}

/// Parses the native format, returning the problem and the optional known
/// optimal objective.
pub fn read_problem(text: &str) -> Result<(ProblemData, Option<f64>)> {
    let mut rd = Reader::new(text);
    while rd.lines.peek().is_some_and(|(_, l)| l.is_empty()) {
        rd.line()?;
    }
    let head = rd.line()?;
    let mut t = head.split_whitespace();
    if t.next() != Some(MAGIC) {
        return Err(rd.err(format!("missing '{MAGIC}' header")));
    }
    let version: u32 = t.next().and_then(|v| v.parse().ok()).ok_or_else(|| rd.err("missing format version"))?;
    if version != FORMAT_VERSION {
        return Err(rd.err(format!("unsupported format version {version}, expected {FORMAT_VERSION}")));
    }
    let dims = rd.line()?;
    let parts: Vec<&str> = dims.split_whitespace().collect();
    let (n, m) = match parts[..] {
        ["n", n, "m", m] => (
            n.parse::<usize>().map_err(|_| rd.err("bad n"))?,
            m.parse::<usize>().map_err(|_| rd.err("bad m"))?,
        ),
        _ => return Err(rd.err("expected 'n <n> m <m>'")),
    };
    let ncones = rd.keyword_usize("cones")?;
    if ncones == 0 {
        return Err(rd.err("problem has no cones"));
    }
    let mut cones = Vec::with_capacity(ncones);
    for _ in 0..ncones {
        let l = rd.line()?;
        let t: Vec<&str> = l.split_whitespace().collect();
        let dim = |s: &str| s.parse::<usize>().map_err(|_| rd.err(format!("bad cone dimension '{s}'")));
        let cone = match t[..] {
            ["zero", d] => ConeSpec::Zero(dim(d)?),
            ["nonneg", d] => ConeSpec::Nonneg(dim(d)?),
            ["soc", d] => ConeSpec::SecondOrder(dim(d)?),
            ["psd", d] => ConeSpec::PsdTriangle(dim(d)?),
            ["box", d] => {
                let d = dim(d)?;
                let lower = rd.floats(d)?;
                let upper = rd.floats(d)?;
                ConeSpec::Box { lower, upper }
            }
            ["custom", "doubly_stochastic", d] => {
                let d = dim(d)?;
                let side = (d as f64).sqrt().round() as usize;
                if side * side != d {
                    return Err(rd.err(format!("doubly stochastic set needs a square dimension, got {d}")));
                }
                ConeSpec::Custom(Arc::new(DoublyStochasticSet::new(side)))
            }
            _ => return Err(rd.err(format!("unknown cone line '{l}'"))),
        };
        cones.push(cone);
    }
    let p = rd.matrix("P", n, n)?;
    if rd.line()? != "q" {
        return Err(rd.err("expected 'q'"));
    }
    let q = rd.floats(n)?;
    let a = rd.matrix("A", m, n)?;
    if rd.line()? != "b" {
        return Err(rd.err("expected 'b'"));
    }
    let b = rd.floats(m)?;
    let mut optimal = None;
    loop {
        let l = rd.line()?;
        if l == "end" {
            break;
        }
        match l.split_whitespace().collect::<Vec<_>>()[..] {
            ["optimal", v] => optimal = Some(v.parse::<f64>().map_err(|_| rd.err("bad optimal value"))?),
            _ => return Err(rd.err(format!("unexpected line '{l}'"))),
        }
    }
    let problem = ProblemData::new(p, q, a, b, cones)?;
    Ok((problem, optimal))
}

pub fn read_problem_file(path: impl AsRef<Path>) -> Result<(ProblemData, Option<f64>)> {
    read_problem(&std::fs::read_to_string(path)?)
}

pub fn write_problem_file(path: impl AsRef<Path>, problem: &ProblemData, optimal: Option<f64>) -> Result<()> {
    std::fs::write(path, write_problem(problem, optimal)?)?;
    Ok(())
}

/// Reads either format, choosing SDPA for `.dat-s` and `.sdpa` files.
pub fn read_any(path: impl AsRef<Path>) -> Result<(ProblemData, Option<f64>)> {
    let path = path.as_ref();
    let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("");
    if name.ends_with(".dat-s") || name.ends_with(".sdpa") {
        Ok((super::sdpa::read_sdpa(path)?, None))
    } else {
        read_problem_file(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ProblemData {
        ProblemData {
            P: CscMatrix::from_dense(&[vec![2.0, 0.1], vec![0.0, 1.0 / 3.0]]),
            q: vec![1.0, -0.1],
            A: CscMatrix::from_dense(&[vec![1.0, 1.0], vec![0.3, 0.0], vec![0.0, -7e-12]]),
            b: vec![1.0, 0.0, f64::MAX],
            cones: vec![
                ConeSpec::Zero(1),
                ConeSpec::Box { lower: vec![-1.0, f64::NEG_INFINITY], upper: vec![1e20, 2.5] },
            ],
        }
    }

    #[test]
    fn roundtrip_is_exact() {
        let p = sample();
        let text = write_problem(&p, Some(-0.5)).unwrap();
        let (back, opt) = read_problem(&text).unwrap();
        assert_eq!(opt, Some(-0.5));
        assert_eq!(back.P, p.P);
        assert_eq!(back.A, p.A);
        assert_eq!(back.q, p.q);
        assert_eq!(back.b, p.b);
        assert_eq!(back.cones, p.cones);
    }

    #[test]
    fn custom_set_roundtrip() {
        let p = ProblemData {
            P: CscMatrix::identity(4),
            q: vec![0.0; 4],
            A: CscMatrix::identity(4),
            b: vec![0.0; 4],
            cones: vec![ConeSpec::Custom(Arc::new(DoublyStochasticSet::new(2)))],
        };
        let (back, _) = read_problem(&write_problem(&p, None).unwrap()).unwrap();
        assert_eq!(back.cones[0].dim(), 4);
        assert_eq!(back.cones[0].kind(), "custom");
    }

    #[test]
    fn version_mismatch_is_reported() {
        let text = write_problem(&sample(), None).unwrap().replacen("conic-problem 1", "conic-problem 7", 1);
        match read_problem(&text) {
            Err(SolverError::Parse { line: 1, msg }) => assert!(msg.contains("version 7")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_cone_list_rejected() {
        let text = "conic-problem 1\nn 1 m 0\ncones 0\nP 0\nq\n0\nA 0\nb\n\nend\n";
        assert!(read_problem(text).is_err());
    }
}
