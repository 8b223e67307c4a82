//! SDPA sparse format (`.dat-s`).
//!
//! The file describes `min c'x  s.t.  Σ F_i x_i - F_0 ⪰ 0`. It is read as the
//! dual-form SDP `max b'y  s.t.  Σ A_k y_k + S = C` with `A_k = F_k`,
//! `C = -F_0`, `b = c`, then mapped to the standard form with `q = -c`,
//! `A = [svec(A_1) ... svec(A_m)]` and `b = svec(C)`. Diagonal blocks
//! (negative sizes) become nonnegative cones.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Result, SolverError};
use crate::linalg::sparse::CscMatrix;
use crate::linalg::svec::{svec_index, triangular_len, triangular_side};
use crate::model::{ConeSpec, ProblemData};

fn perr(line: usize, msg: impl Into<String>) -> SolverError {
    SolverError::Parse { line, msg: msg.into() }
}

fn tokens(s: &str) -> impl Iterator<Item = &str> {
    s.split(|c: char| c.is_whitespace() || c == ',' || c == '{' || c == '}' || c == '(' || c == ')')
        .filter(|t| !t.is_empty())
}

fn parse_f64(t: &str, line: usize) -> Result<f64> {
    t.parse::<f64>().map_err(|_| perr(line, format!("bad number '{t}'")))
}

fn parse_int(t: &str, line: usize) -> Result<i64> {
    // some files write integers as floats
    if let Ok(v) = t.parse::<i64>() {
        return Ok(v);
    }
    let f = parse_f64(t, line)?;
    if f.fract() == 0.0 && f.abs() < 1e15 {
        Ok(f as i64)
    } else {
        Err(perr(line, format!("expected an integer, got '{t}'")))
    }
}

/// Header read from an SDPA file.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpaHeader {
    pub m: usize,
    pub block_sizes: Vec<i64>,
    pub c: Vec<f64>,
}

enum Block {
    Psd { side: usize, offset: usize },
    Diag { len: usize, offset: usize },
}

pub fn read_sdpa(path: impl AsRef<Path>) -> Result<ProblemData> {
    read_sdpa_str(&std::fs::read_to_string(path)?)
}

/// Parses SDPA sparse content.
pub fn read_sdpa_str(text: &str) -> Result<ProblemData> {
    read_sdpa_with_header(text).map(|(p, _)| p)
}

pub fn read_sdpa_with_header(text: &str) -> Result<(ProblemData, SdpaHeader)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('"') && !l.starts_with('*'));

    // header fields may share lines; collect tokens until each field is complete
    let mut pending: Vec<(usize, String)> = Vec::new();
    let mut next_token = |lines: &mut dyn Iterator<Item = (usize, &str)>| -> Result<(usize, String)> {
        loop {
            if !pending.is_empty() {
                return Ok(pending.remove(0));
            }
            let (ln, l) = lines.next().ok_or_else(|| perr(0, "unexpected end of header"))?;
            pending.extend(tokens(l).map(|t| (ln, t.to_string())));
        }
    };
    let (ln, t) = next_token(&mut lines)?;
    let m = usize::try_from(parse_int(&t, ln)?).map_err(|_| perr(ln, "negative constraint count"))?;
    let (ln, t) = next_token(&mut lines)?;
    let nblocks = usize::try_from(parse_int(&t, ln)?).map_err(|_| perr(ln, "negative block count"))?;
    let mut block_sizes = Vec::with_capacity(nblocks);
    for _ in 0..nblocks {
        let (ln, t) = next_token(&mut lines)?;
        let b = parse_int(&t, ln)?;
        if b == 0 {
            return Err(perr(ln, "block size 0"));
        }
        block_sizes.push(b);
    }
    let mut c = Vec::with_capacity(m);
    for _ in 0..m {
        let (ln, t) = next_token(&mut lines)?;
        c.push(parse_f64(&t, ln)?);
    }
    let leftover = std::mem::take(&mut pending);
    if let Some((ln, _)) = leftover.first() {
        return Err(perr(*ln, "unexpected tokens after objective vector"));
    }

    let mut blocks = Vec::with_capacity(nblocks);
    let mut cones = Vec::with_capacity(nblocks);
    let mut rows = 0;
    for &b in &block_sizes {
        if b > 0 {
            let side = b as usize;
            blocks.push(Block::Psd { side, offset: rows });
            cones.push(ConeSpec::PsdTriangle(triangular_len(side)));
            rows += triangular_len(side);
        } else {
            let len = b.unsigned_abs() as usize;
            blocks.push(Block::Diag { len, offset: rows });
            cones.push(ConeSpec::Nonneg(len));
            rows += len;
        }
    }

    let mut trip = Vec::new();
    let mut bvec = vec![0.0; rows];
    for (ln, l) in lines {
        let t: Vec<&str> = tokens(l).collect();
        if t.len() != 5 {
            return Err(perr(ln, format!("expected 5 fields, found {}", t.len())));
        }
        let mat = parse_int(t[0], ln)?;
        let blk = parse_int(t[1], ln)?;
        let i = parse_int(t[2], ln)?;
        let j = parse_int(t[3], ln)?;
        let v = parse_f64(t[4], ln)?;
        if mat < 0 || mat as usize > m {
            return Err(perr(ln, format!("matrix index {mat} outside 0..={m}")));
        }
        if blk < 1 || blk as usize > nblocks {
            return Err(perr(ln, format!("block index {blk} outside 1..={nblocks}")));
        }
        let (row, val) = match blocks[blk as usize - 1] {
            Block::Psd { side, offset } => {
                if i < 1 || j < 1 || i as usize > side || j as usize > side {
                    return Err(perr(ln, format!("entry ({i},{j}) outside block of side {side}")));
                }
                let (a, b) = ((i.min(j) - 1) as usize, (i.max(j) - 1) as usize);
                let scale = if a == b { 1.0 } else { std::f64::consts::SQRT_2 };
                (offset + svec_index(a, b), v * scale)
            }
            Block::Diag { len, offset } => {
                if i != j {
                    return Err(perr(ln, format!("off-diagonal entry ({i},{j}) in diagonal block")));
                }
                if i < 1 || i as usize > len {
                    return Err(perr(ln, format!("entry {i} outside diagonal block of length {len}")));
                }
                (offset + i as usize - 1, v)
            }
        };
        if mat == 0 {
            // C = -F0
            bvec[row] -= val;
        } else {
            trip.push((row, mat as usize - 1, val));
        }
    }
    let problem = ProblemData {
        P: CscMatrix::zeros(m, m),
        q: c.iter().map(|v| -v).collect(),
        A: CscMatrix::from_triplets(rows, m, &trip),
        b: bvec,
        cones,
    };
    Ok((problem, SdpaHeader { m, block_sizes, c }))
}

/// Writes a problem in SDPA sparse format. Only LP/SDP data without a
/// quadratic term and with nonnegative or PSD cones can be written.
pub fn write_sdpa(problem: &ProblemData) -> Result<String> {
    if problem.P.nnz() > 0 {
        return Err(SolverError::Unsupported("SDPA cannot express a quadratic objective".into()));
    }
    let mut sizes = Vec::new();
    for c in &problem.cones {
        match c {
            ConeSpec::Nonneg(d) => sizes.push(-(*d as i64)),
            ConeSpec::PsdTriangle(d) => {
                let side = triangular_side(*d).ok_or(SolverError::NotTriangular(*d))?;
                sizes.push(side as i64);
            }
            other => return Err(SolverError::Unsupported(format!("SDPA has no '{}' block", other.kind()))),
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "{}", problem.n());
    let _ = writeln!(out, "{}", sizes.len());
    let _ = writeln!(out, "{}", sizes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" "));
    let _ = writeln!(out, "{}", problem.q.iter().map(|v| format!("{:?}", -v)).collect::<Vec<_>>().join(" "));

    // map each row back to (block, i, j) and the value scale
    let mut row_info = Vec::with_capacity(problem.m());
    for (blk, (c, &s)) in problem.cones.iter().zip(&sizes).enumerate() {
        if s > 0 {
            let side = s as usize;
            for col in 0..side {
                for r in 0..=col {
                    let scale = if r == col { 1.0 } else { std::f64::consts::FRAC_1_SQRT_2 };
                    row_info.push((blk + 1, r + 1, col + 1, scale));
                }
            }
        } else {
            for k in 0..c.dim() {
                row_info.push((blk + 1, k + 1, k + 1, 1.0));
            }
        }
    }
    for (row, &b) in problem.b.iter().enumerate() {
        if b != 0.0 {
            let (blk, i, j, sc) = row_info[row];
            let _ = writeln!(out, "0 {blk} {i} {j} {:?}", -b * sc);
        }
    }
    for col in 0..problem.n() {
        let (rows, vals) = problem.A.col(col);
        for (&r, &v) in rows.iter().zip(vals) {
            if v != 0.0 {
                let (blk, i, j, sc) = row_info[r];
                let _ = writeln!(out, "{} {blk} {i} {j} {:?}", col + 1, v * sc);
            }
        }
    }
    Ok(out)
}
