//! The acceptance checks, one function per criterion.

pub mod ck;
pub mod cutoff;
pub mod dbar;
pub mod determinism;
pub mod measure;
pub mod sobolev;
pub mod surface;

use l2gauss::numerics::SampleStream;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{RunConfig, Suite};
use crate::report::{sha256_hex, Record, Value};

/// The numbers a check reports and its verdict.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub values: Vec<Value>,
    pub tolerance: f64,
    pub pass: bool,
    pub note: String,
}

impl Outcome {
    pub fn new(tolerance: f64) -> Self {
        Outcome { values: Vec::new(), tolerance, pass: true, note: String::new() }
    }

    pub fn value(mut self, name: &str, v: f64) -> Self {
        self.values.push(Value { name: name.into(), value: v });
        self
    }

    pub fn count(self, name: &str, n: usize) -> Self {
        self.value(name, n as f64)
    }

    /// Folds a sub-check into the verdict; failing sub-checks are named in
    /// the note.
    pub fn require(mut self, ok: bool, what: &str) -> Self {
        if !ok {
            self.pass = false;
            if !self.note.is_empty() {
                self.note.push_str("; ");
            }
            self.note.push_str(what);
        }
        self
    }
}

pub type CheckFn = fn(&RunConfig) -> l2gauss::Result<Outcome>;

pub struct Check {
    pub id: &'static str,
    pub suite: Suite,
    pub anchor: &'static str,
    pub run: CheckFn,
}

#[derive(Serialize)]
struct DigestInputs<'a> {
    check: &'a str,
    cfg: &'a RunConfig,
}

/// SHA-256 of the check id and the configuration that affects results.
pub fn inputs_digest(check: &str, cfg: &RunConfig) -> String {
    let cfg = RunConfig { suites: Vec::new(), output: None, ..cfg.clone() };
    let bytes = serde_json::to_vec(&DigestInputs { check, cfg: &cfg }).expect("config serializes");
    sha256_hex(&bytes)
}

impl Check {
    pub fn inputs_digest(&self, cfg: &RunConfig) -> String {
        inputs_digest(self.id, cfg)
    }

    pub fn execute(&self, cfg: &RunConfig) -> Record {
        let (values, tolerance, pass, note) = match (self.run)(cfg) {
            Ok(o) => (o.values, o.tolerance, o.pass, o.note),
            Err(e) => (Vec::new(), f64::NAN, false, format!("error: {e}")),
        };
        Record {
            suite: self.suite.name().into(),
            check: self.id.into(),
            anchor: self.anchor.into(),
            inputs_digest: self.inputs_digest(cfg),
            values,
            tolerance,
            pass,
            note,
        }
    }
}

pub const CHECKS: [Check; 12] = [
    Check { id: "C01", suite: Suite::Measure, anchor: "hellinger-closed-form", run: measure::hellinger },
    Check { id: "C02", suite: Suite::Measure, anchor: "kakutani-dichotomy", run: measure::dichotomy },
    Check { id: "C03", suite: Suite::Measure, anchor: "translation-density", run: measure::translation },
    Check { id: "C04", suite: Suite::Measure, anchor: "fernique-integral", run: measure::fernique },
    Check { id: "C05", suite: Suite::Cutoff, anchor: "smooth-cutoffs", run: cutoff::cutoffs },
    Check { id: "C06", suite: Suite::Surface, anchor: "index-determinant", run: surface::determinant },
    Check { id: "C07", suite: Suite::Surface, anchor: "chart-independence", run: surface::charts },
    Check { id: "C08", suite: Suite::Surface, anchor: "gauss-green", run: surface::gauss_green },
    Check { id: "C09", suite: Suite::Dbar, anchor: "dbar-calculus", run: dbar::calculus },
    Check { id: "C10", suite: Suite::Dbar, anchor: "dbar-solve", run: dbar::solve },
    Check { id: "C11", suite: Suite::Ck, anchor: "cauchy-kowalevski", run: ck::solver },
    Check { id: "C12", suite: Suite::Sobolev, anchor: "sobolev-spaces", run: sobolev::sobolev },
];

pub const DETERMINISM_ID: &str = "C13";

/// Case generator for a check, keyed by the run seed.
pub(crate) fn rng(cfg: &RunConfig, tag: u64) -> ChaCha8Rng {
    let stream = SampleStream::new(cfg.seed, 1).fork(tag);
    ChaCha8Rng::seed_from_u64(stream.seed)
}

/// Sampling stream for a check, keyed by the run seed.
pub(crate) fn stream(cfg: &RunConfig, tag: u64) -> SampleStream {
    SampleStream::new(cfg.seed, cfg.dims).fork(tag)
}

/// Largest relative discrepancy over a family of cases, with the two sides
/// of the worst case kept for the record.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Worst {
    pub err: f64,
    pub lhs: f64,
    pub rhs: f64,
}

impl Worst {
    /// `|lhs − rhs| / max(|lhs|, |rhs|, floor)`.
    pub fn push(&mut self, lhs: f64, rhs: f64, floor: f64) {
        let err = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(floor);
        if err > self.err || err.is_nan() {
            *self = Worst { err, lhs, rhs };
        }
    }

    pub fn within(&self, tol: f64) -> bool {
        self.err <= tol
    }

    pub fn into_outcome(self, o: Outcome, prefix: &str) -> Outcome {
        o.value(&format!("{prefix}_err"), self.err)
            .value(&format!("{prefix}_lhs"), self.lhs)
            .value(&format!("{prefix}_rhs"), self.rhs)
    }
}
