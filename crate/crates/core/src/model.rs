//! Domain types and the instance file format.
//!
//! A [`SemigroupSpec`] is a finite list of generators together with one
//! eventually-linear map per ordered generator pair `(a, b)`, describing
//! `k ↦ a^k · b`. Generators are referred to by their declaration index
//! ([`Gen`]); names only matter at the text boundary.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Deserialize;
use serde_json::{Map, Number, Value};
use thiserror::Error;

use crate::evlin::{EvLinMap, PartitionError, Piece};

/// Index of a generator in declaration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gen(pub usize);

/// Normal form `gen^exp`, `exp ≥ 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element {
    pub gen: Gen,
    pub exp: BigUint,
}

impl Element {
    pub fn new(gen: Gen, exp: impl Into<BigUint>) -> Self {
        let exp = exp.into();
        assert!(!exp.is_zero(), "element exponent must be at least 1");
        Element { gen, exp }
    }

    pub fn generator(gen: Gen) -> Self {
        Element { gen, exp: BigUint::one() }
    }

    /// The expanded word `gen gen … gen`. Panics on exponents that do not fit
    /// in memory; callers only expand small elements.
    pub fn to_word(&self) -> Word {
        let n = self.exp.to_usize().expect("exponent too large to expand");
        Word(vec![self.gen; n])
    }
}

/// A nonempty sequence of generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Gen>);

impl Word {
    pub fn new(letters: Vec<Gen>) -> Result<Self, ModelError> {
        if letters.is_empty() {
            return Err(ModelError::EmptyWord);
        }
        Ok(Word(letters))
    }

    pub fn letters(&self) -> &[Gen] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Maximal runs of equal letters, as elements.
    pub fn runs(&self) -> Vec<Element> {
        let mut out: Vec<Element> = Vec::new();
        for &g in &self.0 {
            match out.last_mut() {
                Some(last) if last.gen == g => last.exp += 1u32,
                _ => out.push(Element::generator(g)),
            }
        }
        out
    }

    pub(crate) fn from_vec_unchecked(letters: Vec<Gen>) -> Self {
        debug_assert!(!letters.is_empty());
        Word(letters)
    }
}

/// Length-lex order over declaration order: shorter words first.
pub fn length_lex(u: &[Gen], v: &[Gen]) -> std::cmp::Ordering {
    u.len().cmp(&v.len()).then_with(|| u.cmp(v))
}

/// All words of length exactly `len` over `n` generators, in lexicographic order.
pub fn words_of_length(n: usize, len: usize) -> Vec<Word> {
    let mut out = Vec::new();
    if len == 0 || n == 0 {
        return out;
    }
    let mut cur = vec![0usize; len];
    loop {
        out.push(Word(cur.iter().map(|&i| Gen(i)).collect()));
        let mut i = len;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < n {
                break;
            }
            cur[i] = 0;
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("no generators declared")]
    NoGenerators,
    #[error("invalid generator name `{0}`")]
    BadGeneratorName(String),
    #[error("duplicate generator `{0}`")]
    DuplicateGenerator(String),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("missing table for pair {0}|{1}")]
    MissingTable(String, String),
    #[error("unexpected table key `{0}`")]
    UnknownTableKey(String),
    #[error("({0},{0}) must be shift")]
    NotShift(String),
    #[error("table {key}: {source}")]
    Partition {
        key: String,
        #[source]
        source: PartitionError,
    },
    #[error("invalid number `{0}`")]
    BadNumber(String),
    #[error("`{0}` must be at least 1")]
    ZeroValue(&'static str),
    #[error("value `{0}` too large for a source exponent")]
    SourceTooLarge(String),
    #[error("empty word")]
    EmptyWord,
    #[error("malformed element `{0}`")]
    BadElement(String),
    #[error("exponent must be at least 1 in `{0}`")]
    BadExponent(String),
}

/// A finite semigroup presentation by right-multiplication tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemigroupSpec {
    names: Vec<String>,
    // tables[a][b]: k ↦ a^k · b
    tables: Vec<Vec<EvLinMap>>,
}

fn valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some('a'..='z'))
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

impl SemigroupSpec {
    /// Builds a spec, checking every type invariant. Associativity is not checked.
    pub fn new(names: Vec<String>, tables: Vec<Vec<EvLinMap>>) -> Result<Self, ModelError> {
        if names.is_empty() {
            return Err(ModelError::NoGenerators);
        }
        for (i, n) in names.iter().enumerate() {
            if !valid_name(n) {
                return Err(ModelError::BadGeneratorName(n.clone()));
            }
            if names[..i].contains(n) {
                return Err(ModelError::DuplicateGenerator(n.clone()));
            }
        }
        assert_eq!(tables.len(), names.len());
        for (a, row) in tables.iter().enumerate() {
            assert_eq!(row.len(), names.len());
            let shift = EvLinMap::shift(Gen(a), 1u32);
            if row[a] != shift {
                return Err(ModelError::NotShift(names[a].clone()));
            }
        }
        Ok(SemigroupSpec { names, tables })
    }

    /// The free monogenic semigroup on one generator.
    pub fn monogenic(name: &str) -> Self {
        SemigroupSpec::new(vec![name.to_string()], vec![vec![EvLinMap::shift(Gen(0), 1u32)]])
            .expect("valid generator name")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn gens(&self) -> impl Iterator<Item = Gen> + Clone {
        (0..self.names.len()).map(Gen)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, g: Gen) -> &str {
        &self.names[g.0]
    }

    pub fn gen_by_name(&self, name: &str) -> Option<Gen> {
        self.names.iter().position(|n| n == name).map(Gen)
    }

    /// The map `k ↦ a^k · b`.
    pub fn table(&self, a: Gen, b: Gen) -> &EvLinMap {
        &self.tables[a.0][b.0]
    }

    /// Right multiplication by `b` on every block, indexed by source block.
    pub fn column(&self, b: Gen) -> Vec<EvLinMap> {
        self.tables.iter().map(|row| row[b.0].clone()).collect()
    }

    fn single_char_names(&self) -> bool {
        self.names.iter().all(|n| n.chars().count() == 1)
    }

    pub fn parse_element(&self, text: &str) -> Result<Element, ModelError> {
        let text = text.trim();
        let (name, exp) = match text.split_once('^') {
            Some((n, e)) => (n.trim(), Some(e.trim())),
            None => (text, None),
        };
        if name.is_empty() {
            return Err(ModelError::BadElement(text.to_string()));
        }
        let gen = self
            .gen_by_name(name)
            .ok_or_else(|| ModelError::UnknownGenerator(name.to_string()))?;
        let exp = match exp {
            None => BigUint::one(),
            Some(e) => {
                if e.is_empty() || !e.chars().all(|c| c.is_ascii_digit()) {
                    return Err(ModelError::BadExponent(text.to_string()));
                }
                let v = BigUint::from_str(e).map_err(|_| ModelError::BadExponent(text.to_string()))?;
                if v.is_zero() {
                    return Err(ModelError::BadExponent(text.to_string()));
                }
                v
            }
        };
        Ok(Element { gen, exp })
    }

    pub fn render_element(&self, e: &Element) -> String {
        format!("{}^{}", self.name(e.gen), e.exp)
    }

    pub fn parse_word(&self, text: &str) -> Result<Word, ModelError> {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        let mut letters = Vec::new();
        if tokens.len() == 1 && self.gen_by_name(tokens[0]).is_none() && self.single_char_names() {
            for c in tokens[0].chars() {
                let s = c.to_string();
                letters.push(self.gen_by_name(&s).ok_or(ModelError::UnknownGenerator(s))?);
            }
        } else {
            for t in tokens {
                letters.push(
                    self.gen_by_name(t)
                        .ok_or_else(|| ModelError::UnknownGenerator(t.to_string()))?,
                );
            }
        }
        Word::new(letters)
    }

    /// Bare string when every generator is a single character, else space separated.
    pub fn render_word(&self, w: &Word) -> String {
        self.render_letters(w.letters())
    }

    pub fn render_letters(&self, letters: &[Gen]) -> String {
        let sep = if self.single_char_names() { "" } else { " " };
        letters
            .iter()
            .map(|&g| self.name(g))
            .collect::<Vec<_>>()
            .join(sep)
    }

    fn key(&self, a: Gen, b: Gen) -> String {
        format!("{}|{}", self.name(a), self.name(b))
    }

    /// Renders the instance file; pairs appear in lexicographic declaration order.
    pub fn to_json_value(&self) -> Value {
        let mut tables = Map::new();
        for a in self.gens() {
            for b in self.gens() {
                tables.insert(self.key(a, b), self.table_json(self.table(a, b)));
            }
        }
        let mut root = Map::new();
        root.insert(
            "generators".into(),
            Value::Array(self.names.iter().map(|n| Value::String(n.clone())).collect()),
        );
        root.insert("tables".into(), Value::Object(tables));
        Value::Object(root)
    }

    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json_value()).expect("serializable");
        s.push('\n');
        s
    }

    fn table_json(&self, m: &EvLinMap) -> Value {
        let exceptions = m
            .exceptions()
            .iter()
            .map(|(k, e)| {
                let mut o = Map::new();
                o.insert("k".into(), Value::Number(Number::from(*k)));
                o.insert(
                    "to".into(),
                    Value::Array(vec![Value::String(self.name(e.gen).into()), big_number(&e.exp)]),
                );
                Value::Object(o)
            })
            .collect();
        let pieces = m
            .pieces()
            .iter()
            .map(|pc| {
                let mut o = Map::new();
                o.insert("p".into(), Value::Number(Number::from(pc.p)));
                o.insert("q".into(), Value::Number(Number::from(pc.q)));
                o.insert("to".into(), Value::String(self.name(pc.to).into()));
                o.insert("r".into(), big_number(&pc.r));
                o.insert("s".into(), big_number(&pc.s));
                Value::Object(o)
            })
            .collect();
        let mut o = Map::new();
        o.insert("exceptions".into(), Value::Array(exceptions));
        o.insert("pieces".into(), Value::Array(pieces));
        Value::Object(o)
    }
}

impl fmt::Display for SemigroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// A JSON number carrying an arbitrary-precision integer.
pub fn big_number(n: &BigUint) -> Value {
    Value::Number(Number::from_str(&n.to_string()).expect("decimal digits form a JSON number"))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    generators: Vec<String>,
    tables: BTreeMap<String, RawTable>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTable {
    exceptions: Vec<RawException>,
    pieces: Vec<RawPiece>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawException {
    k: Number,
    to: (String, Number),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPiece {
    p: Number,
    q: Number,
    to: String,
    r: Number,
    s: Number,
}

fn nat(n: &Number) -> Result<BigUint, ModelError> {
    let s = n.to_string();
    if s.is_empty() || !s.chars().all(|c| c.is_ascii_digit()) {
        return Err(ModelError::BadNumber(s));
    }
    BigUint::from_str(&s).map_err(|_| ModelError::BadNumber(s))
}

fn positive(n: &Number, what: &'static str) -> Result<BigUint, ModelError> {
    let v = nat(n)?;
    if v.is_zero() {
        return Err(ModelError::ZeroValue(what));
    }
    Ok(v)
}

fn source(n: &Number, what: &'static str) -> Result<u64, ModelError> {
    let v = positive(n, what)?;
    v.to_u64().ok_or_else(|| ModelError::SourceTooLarge(v.to_string()))
}

/// Parses an instance file. Checks type invariants only, not associativity.
pub fn parse_spec(text: &str) -> Result<SemigroupSpec, ModelError> {
    let raw: RawSpec = serde_json::from_str(text).map_err(|e| ModelError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let names = raw.generators;
    if names.is_empty() {
        return Err(ModelError::NoGenerators);
    }
    for (i, n) in names.iter().enumerate() {
        if !valid_name(n) {
            return Err(ModelError::BadGeneratorName(n.clone()));
        }
        if names[..i].contains(n) {
            return Err(ModelError::DuplicateGenerator(n.clone()));
        }
    }
    let lookup = |n: &str| {
        names
            .iter()
            .position(|x| x == n)
            .map(Gen)
            .ok_or_else(|| ModelError::UnknownGenerator(n.to_string()))
    };
    for key in raw.tables.keys() {
        let ok = key
            .split_once('|')
            .map(|(x, y)| lookup(x).is_ok() && lookup(y).is_ok())
            .unwrap_or(false);
        if !ok {
            return Err(ModelError::UnknownTableKey(key.clone()));
        }
    }
    let mut tables = Vec::with_capacity(names.len());
    for a in &names {
        let mut row = Vec::with_capacity(names.len());
        for b in &names {
            let key = format!("{a}|{b}");
            let t = raw
                .tables
                .get(&key)
                .ok_or_else(|| ModelError::MissingTable(a.clone(), b.clone()))?;
            let mut exceptions = Vec::new();
            for e in &t.exceptions {
                let k = source(&e.k, "k")?;
                let to = Element { gen: lookup(&e.to.0)?, exp: positive(&e.to.1, "j")? };
                exceptions.push((k, to));
            }
            let mut pieces = Vec::new();
            for p in &t.pieces {
                pieces.push(Piece {
                    p: source(&p.p, "p")?,
                    q: source(&p.q, "q")?,
                    to: lookup(&p.to)?,
                    r: positive(&p.r, "r")?,
                    s: nat(&p.s)?,
                });
            }
            let map = EvLinMap::new(exceptions, pieces)
                .map_err(|source| ModelError::Partition { key: key.clone(), source })?;
            row.push(map);
        }
        tables.push(row);
    }
    SemigroupSpec::new(names, tables)
}
