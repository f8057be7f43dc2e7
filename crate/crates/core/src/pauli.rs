//! Pauli-string Hamiltonians: parsing, matrix-free expectation values and the
//! exact-diagonalization reference.
//!
//! Bit convention: qubit `q` is bit `q` of the little-endian basis index, and
//! `Z_q` has eigenvalue +1 when that bit is 0.

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result, SourcePos};
use crate::linalg::{CMatrix, HermitianEigen, C64, ONE, ZERO};
use crate::statevec::StateVector;

/// Largest register that may be expanded into a dense matrix by default.
pub const DEFAULT_DENSE_QUBIT_CAP: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn symbol(self) -> char {
        match self {
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }

    fn from_symbol(c: char) -> Option<Self> {
        match c {
            'X' => Some(Axis::X),
            'Y' => Some(Axis::Y),
            'Z' => Some(Axis::Z),
            _ => None,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// One weighted Pauli string. Factors are sorted by qubit index; an empty
/// factor list is a multiple of the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    coefficient: f64,
    factors: Vec<(usize, Axis)>,
}

impl PauliTerm {
    /// Builds a term, sorting factors into canonical order.
    pub fn new(coefficient: f64, mut factors: Vec<(usize, Axis)>) -> Result<Self> {
        factors.sort_by_key(|&(q, _)| q);
        if let Some(w) = factors.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateQubit(w[0].0));
        }
        Ok(Self {
            coefficient,
            factors,
        })
    }

    pub fn identity(coefficient: f64) -> Self {
        Self {
            coefficient,
            factors: Vec::new(),
        }
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn factors(&self) -> &[(usize, Axis)] {
        &self.factors
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    fn masks(&self) -> TermMasks {
        let mut m = TermMasks {
            flip: 0,
            phase: 0,
            y_count: 0,
        };
        for &(q, axis) in &self.factors {
            match axis {
                Axis::X => m.flip |= 1 << q,
                Axis::Y => {
                    m.flip |= 1 << q;
                    m.phase |= 1 << q;
                    m.y_count += 1;
                }
                Axis::Z => m.phase |= 1 << q,
            }
        }
        m
    }
}

/// `P|b⟩ = i^y_count · (−1)^popcount(b & phase) · |b ⊕ flip⟩`, using Y = iXZ.
struct TermMasks {
    flip: usize,
    phase: usize,
    y_count: u32,
}

impl TermMasks {
    fn i_power(&self) -> C64 {
        match self.y_count % 4 {
            0 => ONE,
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    }

    #[inline]
    fn sign(&self, basis: usize) -> f64 {
        if (basis & self.phase).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Weighted sum of Pauli strings on a fixed number of qubits.
///
/// Terms keep first-appearance order; duplicates are merged by adding
/// coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliHamiltonian {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
}

impl PauliHamiltonian {
    pub fn new(n_qubits: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        if n_qubits == 0 || n_qubits >= usize::BITS as usize {
            return Err(Error::InvalidConfig(format!(
                "unsupported qubit count {n_qubits}"
            )));
        }
        let mut merged: Vec<PauliTerm> = Vec::with_capacity(terms.len());
        for term in terms {
            if let Some(&(q, _)) = term.factors.iter().find(|&&(q, _)| q >= n_qubits) {
                return Err(Error::QubitOutOfRange { index: q, n_qubits });
            }
            match merged.iter_mut().find(|t| t.factors == term.factors) {
                Some(existing) => existing.coefficient += term.coefficient,
                None => merged.push(term),
            }
        }
        Ok(Self {
            n_qubits,
            terms: merged,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    /// Coefficient of the identity term (0 when absent).
    pub fn identity_coefficient(&self) -> f64 {
        self.terms
            .iter()
            .find(|t| t.is_identity())
            .map_or(0.0, |t| t.coefficient)
    }

    /// Raw `⟨ψ|H|ψ⟩`; the imaginary part is numerical residue only.
    pub fn expectation_complex(&self, psi: &StateVector) -> Result<C64> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: psi.dim(),
            });
        }
        let amps = psi.amplitudes();
        let mut total = ZERO;
        for term in &self.terms {
            let m = term.masks();
            let mut acc = ZERO;
            if m.flip == 0 {
                let mut re = 0.0;
                for (b, a) in amps.iter().enumerate() {
                    re += m.sign(b) * a.norm_sqr();
                }
                acc.re = re;
            } else {
                for (b, &a) in amps.iter().enumerate() {
                    acc += amps[b ^ m.flip].conj() * a * m.sign(b);
                }
            }
            total += acc * m.i_power() * term.coefficient;
        }
        Ok(total)
    }

    /// `⟨ψ|H|ψ⟩` for a normalized state.
    pub fn expectation(&self, psi: &StateVector) -> Result<f64> {
        Ok(self.expectation_complex(psi)?.re)
    }

    pub fn to_dense_matrix(&self) -> Result<CMatrix> {
        self.to_dense_matrix_capped(DEFAULT_DENSE_QUBIT_CAP)
    }

    pub fn to_dense_matrix_capped(&self, cap: usize) -> Result<CMatrix> {
        if self.n_qubits > cap {
            return Err(Error::QubitCapExceeded {
                n_qubits: self.n_qubits,
                cap,
            });
        }
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        for term in &self.terms {
            let masks = term.masks();
            let w = masks.i_power() * term.coefficient;
            for b in 0..d {
                m[(b ^ masks.flip, b)] += w * masks.sign(b);
            }
        }
        Ok(m)
    }

    pub fn ground_state(&self) -> Result<SpectralResult> {
        self.ground_state_capped(DEFAULT_DENSE_QUBIT_CAP)
    }

    pub fn ground_state_capped(&self, cap: usize) -> Result<SpectralResult> {
        let m = self.to_dense_matrix_capped(cap)?;
        let eig = HermitianEigen::new(&m)?;
        let d = self.dim();
        let mut v: Vec<C64> = (0..d).map(|i| eig.vectors[(i, 0)]).collect();
        // Fix the global phase so the largest component is real and positive.
        let pivot = v
            .iter()
            .copied()
            .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()))
            .unwrap_or(ONE);
        let phase = pivot.conj() / pivot.norm();
        let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut v {
            *a = *a * phase / norm;
        }
        Ok(SpectralResult {
            ground_energy: eig.values[0],
            ground_vector: StateVector::from_amplitudes(v)?,
            full_spectrum: Some(eig.values),
        })
    }

    /// Renders the `.ham` file form: a `qubits:` header and the expression.
    pub fn to_ham_string(&self) -> String {
        format!("qubits: {}\n{}\n", self.n_qubits, self)
    }
}

impl fmt::Display for PauliHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, term) in self.terms.iter().enumerate() {
            let c = term.coefficient;
            match (i, c.is_sign_negative()) {
                (0, false) => write!(f, "{c}")?,
                (0, true) => write!(f, "-{}", -c)?,
                (_, false) => write!(f, " + {c}")?,
                (_, true) => write!(f, " - {}", -c)?,
            }
            for &(q, axis) in &term.factors {
                write!(f, " {axis}{q}")?;
            }
        }
        Ok(())
    }
}

/// Exact ground pair of a Hamiltonian.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub ground_energy: f64,
    pub ground_vector: StateVector,
    pub full_spectrum: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum TokenKind {
    Plus,
    Minus,
    Number(f64),
    Factor(Axis, usize),
}

#[derive(Debug, Clone, Copy)]
struct Token {
    kind: TokenKind,
    pos: SourcePos,
}

fn parse_error(pos: SourcePos, message: impl Into<String>) -> Error {
    Error::Parse {
        pos,
        message: message.into(),
    }
}

fn tokenize(text: &str, first_line: usize) -> Result<(Vec<Token>, SourcePos)> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut line = first_line;
    let mut col = 1;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = SourcePos { line, column: col };
        match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            c if c.is_whitespace() => {}
            '+' => tokens.push(Token {
                kind: TokenKind::Plus,
                pos,
            }),
            '-' | '\u{2212}' => tokens.push(Token {
                kind: TokenKind::Minus,
                pos,
            }),
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let literal: String = chars[start..i].iter().collect();
                let value: f64 = literal
                    .parse()
                    .map_err(|_| parse_error(pos, format!("malformed number '{literal}'")))?;
                tokens.push(Token {
                    kind: TokenKind::Number(value),
                    pos,
                });
                col += i - start;
                continue;
            }
            c if c.is_alphabetic() => {
                let start = i;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let literal: String = chars[start..i].iter().collect();
                let axis = Axis::from_symbol(c);
                let digits = &literal[c.len_utf8()..];
                match (axis, digits.parse::<usize>()) {
                    (Some(axis), Ok(index)) => tokens.push(Token {
                        kind: TokenKind::Factor(axis, index),
                        pos,
                    }),
                    _ => {
                        // include trailing alphanumerics so the message shows the whole token
                        let mut end = i;
                        while end < chars.len() && chars[end].is_alphanumeric() {
                            end += 1;
                        }
                        let shown: String = chars[start..end].iter().collect();
                        return Err(parse_error(
                            pos,
                            format!("malformed factor '{shown}', expected X<k>, Y<k> or Z<k>"),
                        ));
                    }
                }
                col += i - start;
                continue;
            }
            other => return Err(parse_error(pos, format!("unexpected character '{other}'"))),
        }
        i += 1;
        col += 1;
    }
    Ok((tokens, SourcePos { line, column: col }))
}

fn parse_terms(
    text: &str,
    n_qubits: usize,
    first_line: usize,
) -> Result<PauliHamiltonian> {
    let (tokens, end) = tokenize(text, first_line)?;
    let mut terms = Vec::new();
    let mut i = 0;
    if tokens.is_empty() {
        return Err(parse_error(end, "empty Hamiltonian expression"));
    }
    while i < tokens.len() {
        let mut sign = 1.0;
        match tokens[i].kind {
            TokenKind::Plus => i += 1,
            TokenKind::Minus => {
                sign = -1.0;
                i += 1;
            }
            _ if !terms.is_empty() => {
                return Err(parse_error(tokens[i].pos, "expected '+' or '-' between terms"))
            }
            _ => {}
        }
        let Some(tok) = tokens.get(i) else {
            return Err(parse_error(end, "expected a coefficient after the sign"));
        };
        let TokenKind::Number(value) = tok.kind else {
            return Err(parse_error(tok.pos, "expected a numeric coefficient"));
        };
        i += 1;
        let mut factors: Vec<(usize, Axis)> = Vec::new();
        while let Some(&Token {
            kind: TokenKind::Factor(axis, q),
            pos,
        }) = tokens.get(i)
        {
            if q >= n_qubits {
                return Err(parse_error(
                    pos,
                    format!("qubit index {q} out of range for {n_qubits} qubits"),
                ));
            }
            if factors.iter().any(|&(p, _)| p == q) {
                return Err(parse_error(pos, format!("qubit {q} repeated within one term")));
            }
            factors.push((q, axis));
            i += 1;
        }
        terms.push(PauliTerm::new(sign * value, factors)?);
    }
    PauliHamiltonian::new(n_qubits, terms)
}

/// Parses a signed-term expression such as `-0.6569 + 0.1291 Z1 + 0.2295 X0X1`.
pub fn parse_hamiltonian(text: &str, n_qubits: usize) -> Result<PauliHamiltonian> {
    parse_terms(text, n_qubits, 1)
}

/// Parses the `.ham` format: a `qubits: <n>` header line followed by the
/// expression. Blank lines and `#` comments are ignored.
pub fn parse_ham_file(text: &str) -> Result<PauliHamiltonian> {
    let mut offset = 0;
    for (idx, line) in text.split_inclusive('\n').enumerate() {
        let content = line.split('#').next().unwrap_or("").trim();
        offset += line.len();
        if content.is_empty() {
            continue;
        }
        let pos = SourcePos {
            line: idx + 1,
            column: 1,
        };
        let Some(rest) = content.strip_prefix("qubits:") else {
            return Err(parse_error(pos, "expected header 'qubits: <n>'"));
        };
        let n: usize = rest
            .trim()
            .parse()
            .map_err(|_| parse_error(pos, format!("invalid qubit count '{}'", rest.trim())))?;
        if n == 0 {
            return Err(parse_error(pos, "qubit count must be positive"));
        }
        return parse_terms(&text[offset..], n, idx + 2);
    }
    Err(parse_error(
        SourcePos { line: 1, column: 1 },
        "missing 'qubits: <n>' header",
    ))
}

pub fn load_ham_file(path: impl AsRef<Path>) -> Result<PauliHamiltonian> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_ham_file(&text)
}
