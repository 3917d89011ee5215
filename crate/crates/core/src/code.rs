//! Quantum codes and the line-oriented code-file format.
//!
//! A code file lists the orthonormal logical codewords of a code over the
//! computational basis. The format is diff-friendly structured text:
//!
//! ```text
//! # comment
//! label four-qubit-single-deletion
//! q 2
//! N 4
//! d 2
//! codeword
//! 0000 0.7071067811865476 0
//! 1111 0.7071067811865476 0
//! codeword
//! 0011 0.4082482904638631 0
//! ...
//! ```
//!
//! The header carries `label`, `q`, `N`, and `d`; each `codeword` block lists
//! `basis-string real imag` amplitude lines, one per supported basis state.
//! Basis strings are length-`N` digit strings over `0..q-1`, most significant
//! site first. Codewords must be unit-norm and pairwise orthogonal within
//! `1e-8`.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{c64, ComplexMatrix, Ket};

const CODE_TOL: f64 = 1e-8;

/// Orthonormal logical codewords spanning a subspace of `(C^q)^{(x) N}`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumCode {
    label: String,
    q: usize,
    sites: usize,
    codewords: Vec<Ket>,
}

impl QuantumCode {
    pub fn new(
        label: impl Into<String>,
        q: usize,
        sites: usize,
        codewords: Vec<Ket>,
    ) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidState("qudit dimension must be at least 2".into()));
        }
        if codewords.is_empty() {
            return Err(Error::InvalidState("code must have at least one codeword".into()));
        }
        let dim = q
            .checked_pow(sites as u32)
            .ok_or_else(|| Error::InvalidState("q^N overflows".into()))?;
        for (i, w) in codewords.iter().enumerate() {
            if w.dim() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "codeword {i} has dim {}, expected {dim}",
                    w.dim()
                )));
            }
            let nv = w.unit_norm_violation();
            if nv > CODE_TOL {
                return Err(Error::InvalidState(format!(
                    "codeword {i} has norm deviation {nv:.3e}"
                )));
            }
        }
        for i in 0..codewords.len() {
            for j in (i + 1)..codewords.len() {
                let overlap = codewords[i].inner(&codewords[j])?.norm();
                if overlap > CODE_TOL {
                    return Err(Error::InvalidState(format!(
                        "codewords {i} and {j} have overlap {overlap:.3e}"
                    )));
                }
            }
        }
        Ok(Self {
            label: label.into(),
            q,
            sites,
            codewords,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    /// Code dimension `d`.
    pub fn dimension(&self) -> usize {
        self.codewords.len()
    }

    pub fn codewords(&self) -> &[Ket] {
        &self.codewords
    }

    /// Projector onto the code subspace.
    pub fn projector(&self) -> ComplexMatrix {
        let dim = self.codewords[0].dim();
        let mut p = ComplexMatrix::zeros(dim, dim);
        for w in &self.codewords {
            p = p.add(&w.outer(w)).expect("uniform dimensions");
        }
        p
    }

    /// Worst pairwise orthonormality violation, for diagnostics.
    pub fn orthonormality_violation(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.codewords.iter().enumerate() {
            worst = worst.max(a.unit_norm_violation());
            for b in self.codewords.iter().skip(i + 1) {
                worst = worst.max(a.inner(b).expect("uniform dimensions").norm());
            }
        }
        worst
    }
}

/// Parse a code file.
pub fn parse_code_file(text: &str) -> Result<QuantumCode> {
    let mut label: Option<String> = None;
    let mut q: Option<usize> = None;
    let mut sites: Option<usize> = None;
    let mut d: Option<usize> = None;
    let mut codewords: Vec<Vec<(usize, Complex64, usize)>> = Vec::new();

    let parse_err = |line: usize, message: String| Error::Parse { line, message };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let head = parts.next().expect("non-empty line");
        match head {
            "label" => {
                let rest: Vec<&str> = parts.collect();
                if rest.is_empty() {
                    return Err(parse_err(line_no, "label requires a value".into()));
                }
                label = Some(rest.join(" "));
            }
            "q" => {
                let v = parts
                    .next()
                    .ok_or_else(|| parse_err(line_no, "q requires a value".into()))?;
                q = Some(v.parse().map_err(|_| {
                    parse_err(line_no, format!("invalid qudit dimension '{v}'"))
                })?);
            }
            "N" => {
                let v = parts
                    .next()
                    .ok_or_else(|| parse_err(line_no, "N requires a value".into()))?;
                sites = Some(
                    v.parse()
                        .map_err(|_| parse_err(line_no, format!("invalid site count '{v}'")))?,
                );
            }
            "d" => {
                let v = parts
                    .next()
                    .ok_or_else(|| parse_err(line_no, "d requires a value".into()))?;
                d = Some(
                    v.parse()
                        .map_err(|_| parse_err(line_no, format!("invalid dimension '{v}'")))?,
                );
            }
            "codeword" => {
                codewords.push(Vec::new());
            }
            basis => {
                let block = codewords.last_mut().ok_or_else(|| {
                    parse_err(line_no, "amplitude line before any 'codeword' block".into())
                })?;
                let qv = q.ok_or_else(|| {
                    parse_err(line_no, "amplitude line before the q header".into())
                })?;
                let nv = sites.ok_or_else(|| {
                    parse_err(line_no, "amplitude line before the N header".into())
                })?;
                if basis.len() != nv {
                    return Err(parse_err(
                        line_no,
                        format!(
                            "basis string '{basis}' has length {}, expected {nv}",
                            basis.len()
                        ),
                    ));
                }
                let mut index = 0usize;
                for ch in basis.chars() {
                    let digit = ch.to_digit(10).ok_or_else(|| {
                        parse_err(
                            line_no,
                            format!("basis string '{basis}' has non-digit '{ch}'"),
                        )
                    })? as usize;
                    if digit >= qv {
                        return Err(parse_err(
                            line_no,
                            format!("basis digit {digit} exceeds q-1 = {}", qv - 1),
                        ));
                    }
                    index = index * qv + digit;
                }
                let re_s = parts
                    .next()
                    .ok_or_else(|| parse_err(line_no, "missing real amplitude".into()))?;
                let im_s = parts
                    .next()
                    .ok_or_else(|| parse_err(line_no, "missing imaginary amplitude".into()))?;
                let re: f64 = re_s.parse().map_err(|_| {
                    parse_err(line_no, format!("invalid real amplitude '{re_s}'"))
                })?;
                let im: f64 = im_s.parse().map_err(|_| {
                    parse_err(line_no, format!("invalid imaginary amplitude '{im_s}'"))
                })?;
                if parts.next().is_some() {
                    return Err(parse_err(line_no, "trailing tokens on amplitude line".into()));
                }
                block.push((index, c64(re, im), line_no));
            }
        }
    }

    let label = label.ok_or_else(|| parse_err(0, "missing 'label' header".into()))?;
    let q = q.ok_or_else(|| parse_err(0, "missing 'q' header".into()))?;
    let sites = sites.ok_or_else(|| parse_err(0, "missing 'N' header".into()))?;
    let d = d.ok_or_else(|| parse_err(0, "missing 'd' header".into()))?;
    if q < 2 {
        return Err(parse_err(0, format!("q must be at least 2, got {q}")));
    }
    if codewords.len() != d {
        return Err(parse_err(
            0,
            format!(
                "header declares d = {d} but file has {} codeword blocks",
                codewords.len()
            ),
        ));
    }

    let dim = q
        .checked_pow(sites as u32)
        .ok_or_else(|| parse_err(0, "q^N overflows".into()))?;
    let mut kets = Vec::with_capacity(d);
    for block in &codewords {
        let mut amplitudes = vec![c64(0.0, 0.0); dim];
        for &(index, amp, line_no) in block {
            if amplitudes[index] != c64(0.0, 0.0) {
                return Err(parse_err(line_no, "duplicate basis string in codeword".into()));
            }
            amplitudes[index] = amp;
        }
        kets.push(Ket::new(amplitudes));
    }
    QuantumCode::new(label, q, sites, kets)
}

/// Render a code back into the file format. Only non-zero amplitudes are
/// listed; floats print in shortest round-trip form, so
/// `parse(render(code)) == code` exactly.
pub fn render_code_file(code: &QuantumCode) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "label {}", code.label());
    let _ = writeln!(out, "q {}", code.q());
    let _ = writeln!(out, "N {}", code.sites());
    let _ = writeln!(out, "d {}", code.dimension());
    for w in code.codewords() {
        let _ = writeln!(out, "codeword");
        for (index, amp) in w.amplitudes().iter().enumerate() {
            if *amp == c64(0.0, 0.0) {
                continue;
            }
            let mut digits = String::new();
            let mut rem = index;
            for _ in 0..code.sites() {
                digits.push(char::from_digit((rem % code.q()) as u32, 10).unwrap());
                rem /= code.q();
            }
            let basis: String = digits.chars().rev().collect();
            let _ = writeln!(out, "{basis} {} {}", amp.re, amp.im);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_single_codeword_file_parses() {
        let text = "label trivial\nq 2\nN 1\nd 1\ncodeword\n0 1 0\n";
        let code = parse_code_file(text).unwrap();
        assert_eq!(code.label(), "trivial");
        assert_eq!(code.q(), 2);
        assert_eq!(code.sites(), 1);
        assert_eq!(code.dimension(), 1);
        assert!(code.codewords()[0].max_abs_diff(&Ket::basis(2, 0)) == 0.0);
    }

    #[test]
    fn render_parse_roundtrip_is_exact() {
        let s2 = 1.0 / 2.0f64.sqrt();
        let s6 = 1.0 / 6.0f64.sqrt();
        let mut w0 = vec![c64(0.0, 0.0); 16];
        w0[0b0000] = c64(s2, 0.0);
        w0[0b1111] = c64(s2, 0.0);
        let mut w1 = vec![c64(0.0, 0.0); 16];
        for idx in [0b0011, 0b0101, 0b0110, 0b1001, 0b1010, 0b1100] {
            w1[idx] = c64(s6, 0.0);
        }
        let code = QuantumCode::new("roundtrip", 2, 4, vec![Ket::new(w0), Ket::new(w1)]).unwrap();
        let rendered = render_code_file(&code);
        let reparsed = parse_code_file(&rendered).unwrap();
        assert_eq!(code, reparsed);
    }

    #[test]
    fn non_orthogonal_codewords_are_rejected_with_overlap() {
        let text = "label bad\nq 2\nN 1\nd 2\ncodeword\n0 1 0\ncodeword\n0 0.6 0\n1 0.8 0\n";
        let err = parse_code_file(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("overlap"), "unexpected error: {msg}");
        assert!(msg.contains("6.0"), "overlap magnitude missing: {msg}");
    }

    #[test]
    fn bad_basis_strings_are_rejected_with_line_numbers() {
        let text = "label bad\nq 2\nN 2\nd 1\ncodeword\n012 1 0\n";
        let err = parse_code_file(text).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 6, .. }), "{err}");

        let text = "label bad\nq 2\nN 1\nd 1\ncodeword\n2 1 0\n";
        let err = parse_code_file(text).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 6, .. }), "{err}");
    }

    #[test]
    fn unnormalized_codeword_is_rejected() {
        let text = "label bad\nq 2\nN 1\nd 1\ncodeword\n0 0.5 0\n";
        let err = parse_code_file(text).unwrap_err();
        assert!(err.to_string().contains("norm deviation"), "{err}");
    }

    #[test]
    fn header_mismatch_is_rejected() {
        let text = "label bad\nq 2\nN 1\nd 2\ncodeword\n0 1 0\n";
        assert!(parse_code_file(text).is_err());
    }
}
