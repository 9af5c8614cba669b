//! Arc-diagram model of secondary structures.
//!
//! Vertices are numbered `1..=n`; an arc `(i, j)` with `i < j` has length
//! `j - i`. The brute-force enumerator here is the correctness oracle for
//! the counting recurrences, so it is kept deliberately naive.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::Params;

pub type Arc = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SecondaryStructure {
    n: usize,
    /// Sorted by left endpoint.
    arcs: Vec<Arc>,
}

impl SecondaryStructure {
    /// Arcs must satisfy `1 <= i < j <= n`. Shared endpoints and crossings are
    /// accepted here and reported by [`SecondaryStructure::validate`].
    pub fn new(n: usize, mut arcs: Vec<Arc>) -> Result<Self> {
        for &(i, j) in &arcs {
            if i == 0 || i >= j || j > n {
                return Err(Error::InvalidArgument(format!(
                    "arc ({i}, {j}) is not a pair 1 <= i < j <= {n}"
                )));
            }
        }
        arcs.sort_unstable();
        arcs.dedup();
        Ok(SecondaryStructure { n, arcs })
    }

    pub fn unpaired(n: usize) -> Self {
        SecondaryStructure { n, arcs: vec![] }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn validate(&self, params: &Params) -> ValidationReport {
        validate(self, params)
    }

    pub fn rainbow_spectrum(&self) -> RainbowSpectrum {
        rainbow_spectrum(self)
    }

    pub fn to_dotbracket(&self) -> String {
        to_dotbracket(self)
    }
}

impl fmt::Display for SecondaryStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_dotbracket())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    SharedEndpoint {
        vertex: usize,
        first: Arc,
        second: Arc,
    },
    Crossing {
        first: Arc,
        second: Arc,
    },
    ShortArc {
        arc: Arc,
        length: usize,
        min: usize,
    },
    /// A maximal stack starting at `outer` holds only `length` arcs.
    ShortStack {
        outer: Arc,
        length: usize,
        min: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SharedEndpoint {
                vertex,
                first,
                second,
            } => write!(
                f,
                "vertex {vertex} is shared by arcs {first:?} and {second:?}"
            ),
            Violation::Crossing { first, second } => {
                write!(f, "arcs {first:?} and {second:?} cross")
            }
            Violation::ShortArc { arc, length, min } => {
                write!(f, "arc {arc:?} has length {length} < {min}")
            }
            Violation::ShortStack { outer, length, min } => write!(
                f,
                "maximal stack opened by {outer:?} has length {length} < {min}"
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Maximal runs of parallel arcs `(i, j), (i+1, j-1), ...` as
/// `(outermost arc, run length)`.
pub fn stacks(arcs: &[Arc]) -> Vec<(Arc, usize)> {
    let set: HashSet<Arc> = arcs.iter().copied().collect();
    let mut out = Vec::new();
    for &(i, j) in arcs {
        let opens = i == 1 || !set.contains(&(i - 1, j + 1));
        if !opens {
            continue;
        }
        let mut len = 1;
        while j >= i + 2 * len && set.contains(&(i + len, j - len)) {
            len += 1;
        }
        out.push(((i, j), len));
    }
    out
}

pub fn validate(structure: &SecondaryStructure, params: &Params) -> ValidationReport {
    let arcs = &structure.arcs;
    let mut violations = Vec::new();

    for (a, &first) in arcs.iter().enumerate() {
        for &second in &arcs[a + 1..] {
            for v in [first.0, first.1] {
                if v == second.0 || v == second.1 {
                    violations.push(Violation::SharedEndpoint {
                        vertex: v,
                        first,
                        second,
                    });
                }
            }
            let (x, y) = if first.0 < second.0 {
                (first, second)
            } else {
                (second, first)
            };
            if x.0 < y.0 && y.0 < x.1 && x.1 < y.1 {
                violations.push(Violation::Crossing {
                    first: x,
                    second: y,
                });
            }
        }
    }
    for &arc in arcs {
        let length = arc.1 - arc.0;
        if length < params.lambda {
            violations.push(Violation::ShortArc {
                arc,
                length,
                min: params.lambda,
            });
        }
    }
    for (outer, length) in stacks(arcs) {
        if length < params.r {
            violations.push(Violation::ShortStack {
                outer,
                length,
                min: params.r,
            });
        }
    }
    ValidationReport { violations }
}

/// Rainbow lengths (descending) and the unpaired vertices outside every
/// rainbow.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RainbowSpectrum {
    pub n: usize,
    pub rainbow_lengths: Vec<usize>,
    pub external_unpaired: usize,
}

impl RainbowSpectrum {
    pub fn rainbow_count(&self) -> usize {
        self.rainbow_lengths.len()
    }

    /// Number of rainbows plus number of external unpaired vertices.
    pub fn five_prime_three_prime_distance(&self) -> usize {
        self.rainbow_count() + self.external_unpaired
    }

    /// Length of the `rank`-th longest rainbow (1-based); 0 if absent.
    pub fn nth_longest(&self, rank: usize) -> usize {
        rank.checked_sub(1)
            .and_then(|i| self.rainbow_lengths.get(i))
            .copied()
            .unwrap_or(0)
    }

    pub fn longest(&self) -> usize {
        self.nth_longest(1)
    }

    pub fn count_of_length(&self, k: usize) -> usize {
        self.rainbow_lengths.iter().filter(|&&l| l == k).count()
    }
}

pub fn rainbow_spectrum(structure: &SecondaryStructure) -> RainbowSpectrum {
    // arcs are sorted by left endpoint; on a non-crossing structure an arc is
    // a rainbow exactly when it starts after the previous rainbow ends
    let mut lengths = Vec::new();
    let mut covered = 0;
    let mut end = 0;
    for &(i, j) in &structure.arcs {
        if i > end {
            lengths.push(j - i);
            covered += j - i + 1;
            end = j;
        }
    }
    lengths.sort_unstable_by(|a, b| b.cmp(a));
    RainbowSpectrum {
        n: structure.n,
        rainbow_lengths: lengths,
        external_unpaired: structure.n - covered,
    }
}

pub fn to_dotbracket(structure: &SecondaryStructure) -> String {
    let mut chars = vec!['.'; structure.n];
    for &(i, j) in &structure.arcs {
        chars[i - 1] = '(';
        chars[j - 1] = ')';
    }
    chars.into_iter().collect()
}

fn is_energy_annotation(rest: &str) -> bool {
    let rest = rest.trim();
    let Some(inner) = rest.strip_prefix('(').and_then(|r| r.strip_suffix(')')) else {
        return false;
    };
    let inner = inner.trim();
    !inner.is_empty() && inner.parse::<f64>().is_ok()
}

fn parse_line(line: &str, line_no: usize) -> Result<SecondaryStructure> {
    let trimmed = line.trim_end();
    let (body, rest) = match trimmed.find(char::is_whitespace) {
        Some(pos) => (&trimmed[..pos], &trimmed[pos..]),
        None => (trimmed, ""),
    };
    if !rest.trim().is_empty() && !is_energy_annotation(rest) {
        return Err(Error::Parse {
            line: line_no,
            position: body.chars().count() + 1,
            message: format!("unexpected trailing text {:?}", rest.trim()),
        });
    }
    let mut open: Vec<usize> = Vec::new();
    let mut arcs = Vec::new();
    let mut n = 0;
    for (idx, ch) in body.chars().enumerate() {
        let pos = idx + 1;
        n = pos;
        match ch {
            '(' => open.push(pos),
            ')' => match open.pop() {
                Some(i) => arcs.push((i, pos)),
                None => {
                    return Err(Error::Parse {
                        line: line_no,
                        position: pos,
                        message: "unmatched ')'".into(),
                    })
                }
            },
            '.' => {}
            other => {
                return Err(Error::Parse {
                    line: line_no,
                    position: pos,
                    message: format!("unexpected character {other:?}"),
                })
            }
        }
    }
    if let Some(&first) = open.first() {
        return Err(Error::Parse {
            line: line_no,
            position: first,
            message: "unmatched '('".into(),
        });
    }
    SecondaryStructure::new(n, arcs)
}

fn is_sequence_line(line: &str) -> bool {
    let t = line.trim();
    !t.is_empty() && t.chars().all(|c| "ACGUTNacgutn".contains(c))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DotBracketOptions {
    /// Skip lines made only of nucleotide letters, as interleaved by folding
    /// tools that print the sequence above each structure.
    pub skip_sequence_lines: bool,
}

/// Parse every structure in a dot-bracket document, one per line. Blank
/// lines and lines starting with `>` are skipped. Returns `(line, structure)`
/// pairs with 1-based line numbers.
pub fn parse_dotbracket_document(
    text: &str,
    options: DotBracketOptions,
) -> Result<Vec<(usize, SecondaryStructure)>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('>') {
            continue;
        }
        if options.skip_sequence_lines && is_sequence_line(t) {
            continue;
        }
        out.push((line_no, parse_line(t, line_no)?));
    }
    Ok(out)
}

/// Parse a single structure.
pub fn parse_dotbracket(text: &str) -> Result<SecondaryStructure> {
    let mut all = parse_dotbracket_document(text, DotBracketOptions::default())?;
    match all.len() {
        1 => Ok(all.pop().unwrap().1),
        0 => Ok(SecondaryStructure::unpaired(0)),
        k => Err(Error::Parse {
            line: all[1].0,
            position: 1,
            message: format!("expected one structure, found {k}"),
        }),
    }
}

pub const DEFAULT_ENUMERATION_CAP: usize = 16;

/// Every structure on `n` vertices valid for `params`, each exactly once.
pub fn enumerate_all(params: &Params, n: usize) -> Result<std::vec::IntoIter<SecondaryStructure>> {
    enumerate_all_capped(params, n, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_all_capped(
    params: &Params,
    n: usize,
    cap: usize,
) -> Result<std::vec::IntoIter<SecondaryStructure>> {
    params.validate()?;
    if n > cap {
        return Err(Error::EnumerationCap { n, cap });
    }
    // by_len[L]: non-crossing arc sets on vertices 1..=L with arc length >= lambda
    let mut by_len: Vec<Vec<Vec<Arc>>> = vec![vec![vec![]]];
    for len in 1..=n {
        let mut all = Vec::new();
        // vertex 1 unpaired
        for rest in &by_len[len - 1] {
            all.push(shift(rest, 1));
        }
        // vertex 1 paired with j
        for j in (1 + params.lambda)..=len {
            for inside in &by_len[j - 2] {
                for outside in &by_len[len - j] {
                    let mut arcs = vec![(1, j)];
                    arcs.extend(shift(inside, 1));
                    arcs.extend(shift(outside, j));
                    all.push(arcs);
                }
            }
        }
        by_len.push(all);
    }
    let r = params.r;
    let out: Vec<SecondaryStructure> = by_len
        .pop()
        .unwrap()
        .into_iter()
        .filter(|arcs| stacks(arcs).iter().all(|&(_, l)| l >= r))
        .map(|arcs| SecondaryStructure::new(n, arcs).expect("generated arcs are in range"))
        .collect();
    Ok(out.into_iter())
}

fn shift(arcs: &[Arc], by: usize) -> Vec<Arc> {
    arcs.iter().map(|&(i, j)| (i + by, j + by)).collect()
}
