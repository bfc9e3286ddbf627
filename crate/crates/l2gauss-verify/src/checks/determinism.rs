//! Reruns the checks already in the report on a single worker thread and
//! compares the encodings byte for byte.

use rayon::ThreadPoolBuilder;

use super::{inputs_digest, Outcome, DETERMINISM_ID};
use crate::config::{RunConfig, Suite};
use crate::report::{sha256_hex, Record, Report};
use crate::run_checks;

fn subjects(prior: &Report) -> Vec<Suite> {
    let mut out: Vec<Suite> = prior.records.iter().filter_map(|r| Suite::parse(&r.suite)).collect();
    out.dedup();
    out
}

fn compare(cfg: &RunConfig, prior: &Report) -> Result<Outcome, String> {
    let (suites, baseline) = if prior.records.is_empty() {
        (vec![Suite::Measure], Report { records: run_checks(cfg, Suite::Measure) })
    } else {
        (subjects(prior), prior.clone())
    };
    let pool = ThreadPoolBuilder::new().num_threads(1).build().map_err(|e| e.to_string())?;
    let rerun = pool.install(|| Report { records: suites.iter().flat_map(|&s| run_checks(cfg, s)).collect() });
    let a = baseline.to_csv().map_err(|e| e.to_string())?;
    let b = rerun.to_csv().map_err(|e| e.to_string())?;
    let identical = a == b;
    let differing = baseline.records.iter().zip(&rerun.records).filter(|(x, y)| x != y).count()
        + baseline.records.len().abs_diff(rerun.records.len());
    let mut o = Outcome::new(0.0)
        .count("records_compared", baseline.records.len())
        .count("records_differing", differing)
        .value("identical", f64::from(u8::from(identical)))
        .require(identical, "reports differ between runs");
    if identical {
        o.note = format!("sha256 {}", sha256_hex(&a));
    } else {
        o.note = format!("{}; sha256 {} vs {}", o.note, sha256_hex(&a), sha256_hex(&b));
    }
    Ok(o)
}

pub fn record(cfg: &RunConfig, prior: &Report) -> Record {
    let (values, tolerance, pass, note) = match compare(cfg, prior) {
        Ok(o) => (o.values, o.tolerance, o.pass, o.note),
        Err(e) => (Vec::new(), f64::NAN, false, format!("error: {e}")),
    };
    Record {
        suite: Suite::Determinism.name().into(),
        check: DETERMINISM_ID.into(),
        anchor: "reproducible-reports".into(),
        inputs_digest: inputs_digest(DETERMINISM_ID, cfg),
        values,
        tolerance,
        pass,
        note,
    }
}
