//! Explicit randomness tables `f`, `p` and the partial table `h`.

use std::collections::HashMap;
use std::rc::Rc;

use indexmap::IndexMap;
use serde_json::{Map, Value};

use crate::error::{ConfigError, Fault};
use crate::seed::keyed;
use crate::word::{Pair, Width, Word};

/// Direction of a permutation-table entry.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Dir {
    /// Forward: `(x0, x1) -> (x14, x15)`.
    Down,
    /// Backward: `(x14, x15) -> (x0, x1)`.
    Up,
}

impl Dir {
    pub fn name(self) -> &'static str {
        match self {
            Dir::Down => "down",
            Dir::Up => "up",
        }
    }

    pub fn parse(s: &str) -> Option<Dir> {
        match s {
            "down" => Some(Dir::Down),
            "up" => Some(Dir::Up),
            _ => None,
        }
    }

    pub fn flip(self) -> Dir {
        match self {
            Dir::Down => Dir::Up,
            Dir::Up => Dir::Down,
        }
    }
}

/// Anything that hands out round-function values `(i, x) -> y`.
pub trait RoundSource {
    fn round_value(&mut self, round: u8, x: Word) -> Result<Word, Fault>;
}

#[derive(Clone, Debug)]
enum Fallback {
    Seeded(u64),
    Constant(Word),
    Missing,
}

/// Canonical value of `f(round, x)` under `seed`.
pub fn f_canonical(width: Width, seed: u64, round: u8, x: Word) -> Word {
    width.word(keyed(seed, &[0xf0, round as u64, x.0]))
}

/// Canonical value of `p(dir, a, b)` under `seed`.
pub fn p_canonical(width: Width, seed: u64, dir: Dir, input: Pair) -> Pair {
    let raw = keyed(seed, &[0xb0 + dir as u64, width.join(input)]);
    let two_n = 2 * width.bits();
    let packed = if two_n == 64 {
        raw
    } else {
        raw & ((1u64 << two_n) - 1)
    };
    width.split(packed)
}

/// The table `f`: round index and word to word.
///
/// Entries come from, in order: explicit overrides, the seed, a constant.
/// Every first read is appended to the draw log; a value never changes once
/// read because it is a pure function of the key.
#[derive(Clone, Debug)]
pub struct RandTableF {
    width: Width,
    fallback: Fallback,
    fixed: HashMap<(u8, Word), Word>,
    drawn: IndexMap<(u8, Word), Word>,
}

impl RandTableF {
    pub fn seeded(width: Width, seed: u64) -> Self {
        Self::with_fallback(width, Fallback::Seeded(seed))
    }

    pub fn constant(width: Width, value: Word) -> Self {
        Self::with_fallback(width, Fallback::Constant(value))
    }

    pub fn zero(width: Width) -> Self {
        Self::constant(width, Word::ZERO)
    }

    /// A table holding exactly `entries`; reads elsewhere fault.
    pub fn explicit(width: Width, entries: impl IntoIterator<Item = ((u8, Word), Word)>) -> Self {
        let mut t = Self::with_fallback(width, Fallback::Missing);
        t.fixed.extend(entries);
        t
    }

    fn with_fallback(width: Width, fallback: Fallback) -> Self {
        RandTableF {
            width,
            fallback,
            fixed: HashMap::new(),
            drawn: IndexMap::new(),
        }
    }

    /// Pins `f(round, x) = y`, overriding the fallback.
    pub fn with_entry(mut self, round: u8, x: Word, y: Word) -> Self {
        self.fixed.insert((round, x), y);
        self
    }

    pub fn width(&self) -> Width {
        self.width
    }

    /// Value of `f(round, x)` without recording a read.
    pub fn peek(&self, round: u8, x: Word) -> Result<Word, Fault> {
        if let Some(&y) = self.fixed.get(&(round, x)) {
            return Ok(y);
        }
        match self.fallback {
            Fallback::Seeded(seed) => Ok(f_canonical(self.width, seed, round, x)),
            Fallback::Constant(c) => Ok(c),
            Fallback::Missing => Err(Fault::MissingF { round, x }),
        }
    }

    /// Reads `f(round, x)` and records it in the draw log.
    pub fn draw(&mut self, round: u8, x: Word) -> Result<Word, Fault> {
        if let Some(&y) = self.drawn.get(&(round, x)) {
            return Ok(y);
        }
        let y = self.peek(round, x)?;
        self.drawn.insert((round, x), y);
        Ok(y)
    }

    /// Entries read so far, in first-read order.
    pub fn drawn(&self) -> &IndexMap<(u8, Word), Word> {
        &self.drawn
    }
}

impl RoundSource for RandTableF {
    fn round_value(&mut self, round: u8, x: Word) -> Result<Word, Fault> {
        self.draw(round, x)
    }
}

/// The table `p`: direction and pair to pair.
#[derive(Clone, Debug)]
pub struct RandTableP {
    width: Width,
    seed: Option<u64>,
    fixed: HashMap<(Dir, Pair), Pair>,
    drawn: IndexMap<(Dir, Pair), Pair>,
}

impl RandTableP {
    pub fn seeded(width: Width, seed: u64) -> Self {
        RandTableP {
            width,
            seed: Some(seed),
            fixed: HashMap::new(),
            drawn: IndexMap::new(),
        }
    }

    pub fn explicit(width: Width, entries: impl IntoIterator<Item = ((Dir, Pair), Pair)>) -> Self {
        RandTableP {
            width,
            seed: None,
            fixed: entries.into_iter().collect(),
            drawn: IndexMap::new(),
        }
    }

    pub fn with_entry(mut self, dir: Dir, input: Pair, output: Pair) -> Self {
        self.fixed.insert((dir, input), output);
        self
    }

    pub fn width(&self) -> Width {
        self.width
    }

    pub fn peek(&self, dir: Dir, input: Pair) -> Result<Pair, Fault> {
        if let Some(&y) = self.fixed.get(&(dir, input)) {
            return Ok(y);
        }
        match self.seed {
            Some(seed) => Ok(p_canonical(self.width, seed, dir, input)),
            None => Err(Fault::MissingP),
        }
    }

    pub fn draw(&mut self, dir: Dir, input: Pair) -> Result<Pair, Fault> {
        if let Some(&y) = self.drawn.get(&(dir, input)) {
            return Ok(y);
        }
        let y = self.peek(dir, input)?;
        self.drawn.insert((dir, input), y);
        Ok(y)
    }

    pub fn drawn(&self) -> &IndexMap<(Dir, Pair), Pair> {
        &self.drawn
    }
}

/// A partial round table: present entries are values, absent ones are the
/// unused marker. Reading an unused entry is a hard fault.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartialH {
    entries: IndexMap<(u8, Word), Word>,
}

impl PartialH {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets an entry unless one is already present; returns whether it was new.
    pub fn define(&mut self, round: u8, x: Word, y: Word) -> bool {
        if self.entries.contains_key(&(round, x)) {
            return false;
        }
        self.entries.insert((round, x), y);
        true
    }

    pub fn get(&self, round: u8, x: Word) -> Option<Word> {
        self.entries.get(&(round, x)).copied()
    }

    /// Number of non-marker entries.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &IndexMap<(u8, Word), Word> {
        &self.entries
    }
}

/// Read handle on a shared partial table, so a Feistel construction and a
/// simulator can draw from the same `h`.
#[derive(Clone, Debug)]
pub struct SharedH(pub Rc<PartialH>);

impl RoundSource for SharedH {
    fn round_value(&mut self, round: u8, x: Word) -> Result<Word, Fault> {
        self.0.get(round, x).ok_or(Fault::Bottom { round, x })
    }
}

/// Renders read entries of `f` and `p` as `{"f": {"i:x": y}, "p": {"dir:x0:x1": "y0:y1"}}`.
pub fn randomness_to_json(
    width: Width,
    f: &IndexMap<(u8, Word), Word>,
    p: &IndexMap<(Dir, Pair), Pair>,
) -> Value {
    let mut fm = Map::new();
    for (&(i, x), &y) in f {
        fm.insert(
            format!("{:x}:{}", i, width.hex(x)),
            Value::String(width.hex(y)),
        );
    }
    let mut pm = Map::new();
    for (&(d, (a, b)), &(c, e)) in p {
        pm.insert(
            format!("{}:{}:{}", d.name(), width.hex(a), width.hex(b)),
            Value::String(format!("{}:{}", width.hex(c), width.hex(e))),
        );
    }
    let mut root = Map::new();
    root.insert("f".into(), Value::Object(fm));
    root.insert("p".into(), Value::Object(pm));
    Value::Object(root)
}

/// Parses the format written by [`randomness_to_json`] into explicit tables.
pub fn randomness_from_json(
    width: Width,
    v: &Value,
) -> Result<(RandTableF, RandTableP), ConfigError> {
    let obj = v
        .as_object()
        .ok_or_else(|| ConfigError::Other("randomness must be an object".into()))?;
    let mut f_entries = Vec::new();
    if let Some(fm) = obj.get("f").and_then(Value::as_object) {
        for (k, y) in fm {
            let (i, x) = k
                .split_once(':')
                .ok_or_else(|| ConfigError::Key(k.clone()))?;
            let i = u8::from_str_radix(i, 16).map_err(|_| ConfigError::Key(k.clone()))?;
            let y = y.as_str().ok_or_else(|| ConfigError::Key(k.clone()))?;
            f_entries.push(((i, width.parse_hex(x)?), width.parse_hex(y)?));
        }
    }
    let mut p_entries = Vec::new();
    if let Some(pm) = obj.get("p").and_then(Value::as_object) {
        for (k, y) in pm {
            let parts: Vec<&str> = k.split(':').collect();
            if parts.len() != 3 {
                return Err(ConfigError::Key(k.clone()));
            }
            let d = Dir::parse(parts[0]).ok_or_else(|| ConfigError::Key(k.clone()))?;
            let ys = y.as_str().ok_or_else(|| ConfigError::Key(k.clone()))?;
            let (c, e) = ys
                .split_once(':')
                .ok_or_else(|| ConfigError::Key(ys.to_string()))?;
            p_entries.push((
                (d, (width.parse_hex(parts[1])?, width.parse_hex(parts[2])?)),
                (width.parse_hex(c)?, width.parse_hex(e)?),
            ));
        }
    }
    Ok((
        RandTableF::explicit(width, f_entries),
        RandTableP::explicit(width, p_entries),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w16() -> Width {
        Width::new(16).unwrap()
    }

    #[test]
    fn entries_are_order_independent() {
        let mut a = RandTableF::seeded(w16(), 9);
        let mut b = RandTableF::seeded(w16(), 9);
        let x = a.draw(3, Word(5)).unwrap();
        let _ = a.draw(4, Word(6)).unwrap();
        let _ = b.draw(4, Word(6)).unwrap();
        assert_eq!(b.draw(3, Word(5)).unwrap(), x);
        assert_eq!(a.draw(3, Word(5)).unwrap(), x);
        assert_eq!(a.drawn().len(), 2);
    }

    #[test]
    fn overrides_and_constants() {
        let mut t = RandTableF::zero(w16()).with_entry(2, Word(1), Word(7));
        assert_eq!(t.draw(2, Word(1)).unwrap(), Word(7));
        assert_eq!(t.draw(2, Word(2)).unwrap(), Word(0));
        let mut e = RandTableF::explicit(w16(), [((1, Word(1)), Word(2))]);
        assert!(matches!(e.draw(1, Word(3)), Err(Fault::MissingF { .. })));
    }

    #[test]
    fn json_roundtrip() {
        let w = w16();
        let mut f = RandTableF::seeded(w, 1);
        let mut p = RandTableP::seeded(w, 2);
        f.draw(1, Word(0xabc)).unwrap();
        f.draw(14, Word(3)).unwrap();
        p.draw(Dir::Down, (Word(1), Word(2))).unwrap();
        p.draw(Dir::Up, (Word(3), Word(4))).unwrap();
        let v = randomness_to_json(w, f.drawn(), p.drawn());
        assert!(v["f"].get("e:0003").is_some());
        assert!(v["p"].get("down:0001:0002").is_some());
        let (mut f2, mut p2) = randomness_from_json(w, &v).unwrap();
        for (&(i, x), &y) in f.drawn() {
            assert_eq!(f2.draw(i, x).unwrap(), y);
        }
        for (&(d, a), &y) in p.drawn() {
            assert_eq!(p2.draw(d, a).unwrap(), y);
        }
    }

    #[test]
    fn partial_h_faults_on_marker() {
        let mut h = PartialH::new();
        assert!(h.define(1, Word(1), Word(9)));
        assert!(!h.define(1, Word(1), Word(8)));
        let mut s = SharedH(Rc::new(h));
        assert_eq!(s.round_value(1, Word(1)).unwrap(), Word(9));
        assert_eq!(
            s.round_value(2, Word(1)),
            Err(Fault::Bottom {
                round: 2,
                x: Word(1)
            })
        );
    }
}
