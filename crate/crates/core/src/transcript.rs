//! Ordered event log of a run, rendered as JSON lines with hex words.

use serde_json::{json, Value};

use crate::error::{AbortLocation, Fault};
use crate::ideal::Dir;
use crate::word::{Pair, Width, Word};

/// Who issued a permutation query.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Party {
    Dist,
    Sim,
}

/// Orientation of a chain or a value lookup: `+` follows the Feistel forward.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }
}

/// Result of a six-round chain completion request.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Completion {
    /// The triple already lies in a completed tuple.
    Skipped,
    /// Completed; the tuple `(R, X, Y, Z, A, S)`.
    Done([Word; 6]),
    /// Stopped at an occupied adapt slot.
    Aborted,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Event {
    /// Distinguisher round-function query and its answer.
    FQuery {
        round: u8,
        x: Word,
        y: Word,
    },
    /// Permutation query (`Down` = forward, `Up` = inverse).
    PQuery {
        by: Party,
        dir: Dir,
        input: Pair,
        output: Pair,
    },
    Check {
        input: Pair,
        output: Pair,
        result: bool,
    },
    /// Round-table entry drawn from the randomness source.
    Sample {
        round: u8,
        x: Word,
        y: Word,
    },
    Enqueue {
        a: Word,
        b: Word,
        k: u8,
        l: u8,
    },
    Dequeue {
        a: Word,
        b: Word,
        k: u8,
        l: u8,
        skipped: bool,
    },
    ForceVal {
        round: u8,
        x: Word,
        y: Word,
    },
    Overwrite {
        round: u8,
        x: Word,
        old: Word,
        new: Word,
    },
    /// Backend read of the table `p`, with the entry it displaced if any.
    PRead {
        dir: Dir,
        input: Pair,
        output: Pair,
        displaced: Option<Pair>,
    },
    ChainQuery {
        x: Word,
        k: u8,
    },
    Chains {
        sign: Sign,
        k: u8,
        x: Word,
        members: Vec<(Word, Word, bool)>,
    },
    XorQuery {
        which: u8,
        x: Word,
        k: u8,
        hits: Vec<Word>,
    },
    CompleteChain {
        sign: Sign,
        k: u8,
        x: Word,
        y: Word,
        z: Word,
        outcome: Completion,
    },
    Abort {
        location: AbortLocation,
    },
    Fault {
        fault: Fault,
    },
}

impl Event {
    /// Events that describe a backend's private bookkeeping rather than the
    /// interaction between distinguisher, simulator and permutation.
    pub fn is_backend_internal(&self) -> bool {
        matches!(self, Event::PRead { .. })
    }

    pub fn to_json(&self, w: Width) -> Value {
        let h = |x: Word| w.hex(x);
        let hp = |p: Pair| vec![w.hex(p.0), w.hex(p.1)];
        match self {
            Event::FQuery { round, x, y } => {
                json!({"ev": "fquery", "i": round, "x": h(*x), "y": h(*y)})
            }
            Event::PQuery {
                by,
                dir,
                input,
                output,
            } => json!({
                "ev": "pquery",
                "by": match by { Party::Dist => "dist", Party::Sim => "sim" },
                "dir": dir.name(),
                "in": hp(*input),
                "out": hp(*output),
            }),
            Event::Check {
                input,
                output,
                result,
            } => json!({
                "ev": "check", "in": hp(*input), "out": hp(*output), "result": result,
            }),
            Event::Sample { round, x, y } => {
                json!({"ev": "sample", "i": round, "x": h(*x), "y": h(*y)})
            }
            Event::Enqueue { a, b, k, l } => {
                json!({"ev": "enqueue", "xk": h(*a), "xk1": h(*b), "k": k, "l": l})
            }
            Event::Dequeue {
                a,
                b,
                k,
                l,
                skipped,
            } => json!({
                "ev": "dequeue", "xk": h(*a), "xk1": h(*b), "k": k, "l": l, "skipped": skipped,
            }),
            Event::ForceVal { round, x, y } => {
                json!({"ev": "forceval", "i": round, "x": h(*x), "y": h(*y)})
            }
            Event::Overwrite { round, x, old, new } => json!({
                "ev": "overwrite", "i": round, "x": h(*x), "old": h(*old), "new": h(*new),
            }),
            Event::PRead {
                dir,
                input,
                output,
                displaced,
            } => json!({
                "ev": "pread",
                "dir": dir.name(),
                "in": hp(*input),
                "out": hp(*output),
                "displaced": displaced.map(hp),
            }),
            Event::ChainQuery { x, k } => json!({"ev": "chainquery", "x": h(*x), "k": k}),
            Event::Chains {
                sign,
                k,
                x,
                members,
            } => json!({
                "ev": "chains",
                "dir": sign.symbol(),
                "k": k,
                "x": h(*x),
                "members": members.iter().map(|&(y, z, v)| json!([h(y), h(z), v])).collect::<Vec<_>>(),
            }),
            Event::XorQuery { which, x, k, hits } => json!({
                "ev": "xorquery", "which": which, "x": h(*x), "k": k,
                "hits": hits.iter().map(|&a| h(a)).collect::<Vec<_>>(),
            }),
            Event::CompleteChain {
                sign,
                k,
                x,
                y,
                z,
                outcome,
            } => {
                let (status, tuple) = match outcome {
                    Completion::Skipped => ("skipped", Value::Null),
                    Completion::Done(t) => {
                        ("done", json!(t.iter().map(|&v| h(v)).collect::<Vec<_>>()))
                    }
                    Completion::Aborted => ("aborted", Value::Null),
                };
                json!({
                    "ev": "completechain", "dir": sign.symbol(), "k": k,
                    "x": h(*x), "y": h(*y), "z": h(*z), "status": status, "tuple": tuple,
                })
            }
            Event::Abort { location } => {
                json!({"ev": "abort", "location": abort_json(w, location)})
            }
            Event::Fault { fault } => json!({"ev": "fault", "message": fault.to_string()}),
        }
    }
}

pub fn abort_json(w: Width, a: &AbortLocation) -> Value {
    match a {
        AbortLocation::AdaptCollision { round, x } => {
            json!({"kind": "adapt_collision", "round": round, "x": w.hex(*x)})
        }
        AbortLocation::HistoryCap { round } => json!({"kind": "history_cap", "round": round}),
        AbortLocation::Budget => json!({"kind": "budget"}),
    }
}

/// An append-only event log. A disabled transcript drops events, which keeps
/// large Monte-Carlo batches cheap; counters live elsewhere.
#[derive(Clone, Debug)]
pub struct Transcript {
    width: Width,
    enabled: bool,
    events: Vec<Event>,
}

impl Transcript {
    pub fn new(width: Width, enabled: bool) -> Self {
        Transcript {
            width,
            enabled,
            events: Vec::new(),
        }
    }

    pub fn width(&self) -> Width {
        self.width
    }

    pub fn is_enabled(&self) -> bool {
        self.enabled
    }

    #[inline]
    pub fn push(&mut self, e: Event) {
        if self.enabled {
            self.events.push(e);
        }
    }

    /// Like [`push`](Self::push) but builds the event only when recording.
    #[inline]
    pub fn push_with(&mut self, f: impl FnOnce() -> Event) {
        if self.enabled {
            self.events.push(f());
        }
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// All events as JSON lines.
    pub fn to_jsonl(&self) -> String {
        self.render(|_| true)
    }

    /// JSON lines without backend-internal events; two systems that behave
    /// identically towards the distinguisher and simulator produce the same
    /// string.
    pub fn behaviour_jsonl(&self) -> String {
        self.render(|e| !e.is_backend_internal())
    }

    fn render(&self, keep: impl Fn(&Event) -> bool) -> String {
        let mut out = String::new();
        for e in self.events.iter().filter(|e| keep(e)) {
            out.push_str(&e.to_json(self.width).to_string());
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disabled_transcript_records_nothing() {
        let mut t = Transcript::new(Width::new(8).unwrap(), false);
        t.push(Event::Sample {
            round: 1,
            x: Word(1),
            y: Word(2),
        });
        assert!(t.is_empty());
    }

    #[test]
    fn rendering_is_padded_hex() {
        let mut t = Transcript::new(Width::new(16).unwrap(), true);
        t.push(Event::Sample {
            round: 3,
            x: Word(0xa),
            y: Word(0xbeef),
        });
        t.push(Event::PRead {
            dir: Dir::Down,
            input: (Word(1), Word(2)),
            output: (Word(3), Word(4)),
            displaced: None,
        });
        assert_eq!(
            t.to_jsonl().lines().next().unwrap(),
            r#"{"ev":"sample","i":3,"x":"000a","y":"beef"}"#
        );
        assert_eq!(t.behaviour_jsonl().lines().count(), 1);
    }
}
