//! Answer-selection metrics: exact-match accuracy over all examples and over
//! answerable ones, and trigger accuracy (answer vs. no answer).

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::datapipe::QAExample;
use crate::nncore::argmax;
use crate::ranker::Model;
use crate::{Error, Result};

fn check(probs: &[f64], k: usize) -> Result<usize> {
    if probs.is_empty() {
        return Err(Error::Contract("empty probability vector".into()));
    }
    if k >= probs.len() {
        return Err(Error::Contract(format!("label {k} out of range for {} entries", probs.len())));
    }
    Ok(argmax(probs))
}

/// 1 when the most probable entry (lowest index on ties) is `k`.
pub fn example_accuracy(probs: &[f64], k: usize) -> Result<u8> {
    Ok(u8::from(check(probs, k)? == k))
}

/// 1 when the prediction and the label agree on whether an answer exists.
pub fn trigger_accuracy(probs: &[f64], k: usize) -> Result<u8> {
    Ok(u8::from((check(probs, k)? == 0) == (k == 0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub label: usize,
    pub predicted: usize,
}

impl EvalRecord {
    pub fn correct(&self) -> bool {
        self.label == self.predicted
    }

    pub fn trigger_correct(&self) -> bool {
        (self.label == 0) == (self.predicted == 0)
    }
}

/// Aggregate metrics. Rates are `None` when their subset is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_total: usize,
    pub n_positive: usize,
    pub overall_acc: Option<f64>,
    pub positive_acc: Option<f64>,
    pub trigger_acc: Option<f64>,
    pub records: Vec<EvalRecord>,
}

fn rate(hits: usize, n: usize) -> Option<f64> {
    (n > 0).then(|| hits as f64 / n as f64)
}

pub fn report_from_records(records: Vec<EvalRecord>) -> EvalReport {
    let n_total = records.len();
    let n_positive = records.iter().filter(|r| r.label > 0).count();
    let correct = records.iter().filter(|r| r.correct()).count();
    let positive_correct = records.iter().filter(|r| r.label > 0 && r.correct()).count();
    let trigger = records.iter().filter(|r| r.trigger_correct()).count();
    EvalReport {
        n_total,
        n_positive,
        overall_acc: rate(correct, n_total),
        positive_acc: rate(positive_correct, n_positive),
        trigger_acc: rate(trigger, n_total),
        records,
    }
}

/// Score every example with `model` and aggregate.
///
/// Labels pointing past the candidates the model keeps are scored as misses.
pub fn evaluate(model: &Model, examples: &[QAExample]) -> Result<EvalReport> {
    let mut records = Vec::with_capacity(examples.len());
    for (i, ex) in examples.iter().enumerate() {
        ex.validate().map_err(|e| Error::Contract(format!("example {i}: {e}")))?;
        let predicted = model.predict(&ex.to_input(&model.config))?;
        records.push(EvalRecord { label: ex.label, predicted });
    }
    Ok(report_from_records(records))
}

impl EvalReport {
    /// Plain-text table of the three rates.
    pub fn table(&self) -> String {
        let fmt = |r: Option<f64>| match r {
            Some(v) => format!("{v:.4}"),
            None => String::from("n/a"),
        };
        format!(
            "metric             value\n\
             overall_accuracy   {}\n\
             positive_accuracy  {}\n\
             trigger_accuracy   {}\n\
             examples           {} ({} with answer)\n",
            fmt(self.overall_acc),
            fmt(self.positive_acc),
            fmt(self.trigger_acc),
            self.n_total,
            self.n_positive
        )
    }
}
