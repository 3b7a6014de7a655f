//! Evaluation sets (`question TAB answer` lines) and prediction CSVs.

use std::io::{BufRead, Write};

use crate::corpus::{Op, Problem};
use crate::metrics::Prediction;
use crate::vocab::Vocabulary;
use crate::SeqgenError;

pub fn write_eval_set<W: Write>(mut out: W, problems: &[Problem]) -> Result<(), SeqgenError> {
    for p in problems {
        writeln!(out, "{}\t{}", p.question_text(), p.answer())?;
    }
    Ok(())
}

/// Reads lines written by [`write_eval_set`]. Blank lines are skipped; the
/// stated answer must agree with the arithmetic.
pub fn read_eval_set<R: BufRead>(input: R) -> Result<Vec<Problem>, SeqgenError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| SeqgenError::Parse {
            line: i + 1,
            message,
        };
        let (q, a) = line
            .split_once('\t')
            .ok_or_else(|| err("expected question TAB answer".into()))?;
        let parts: Vec<&str> = q.split_whitespace().collect();
        let [a_s, op_s, b_s, "="] = parts.as_slice() else {
            return Err(err(format!("malformed question {q:?}")));
        };
        let num = |s: &str| s.parse::<u64>().map_err(|e| err(format!("{s:?}: {e}")));
        let op = Op::from_symbol(op_s).ok_or_else(|| err(format!("unknown operator {op_s:?}")))?;
        let p = Problem::new(num(a_s)?, op, num(b_s)?).map_err(|e| err(e.to_string()))?;
        if num(a.trim())? != p.answer() {
            return Err(err(format!("answer {a:?} does not match {q}")));
        }
        out.push(p);
    }
    Ok(out)
}

/// Columns: `question,prediction,correct,beams` with beams joined by `|`.
pub fn write_predictions_csv<W: Write>(
    out: W,
    problems: &[Problem],
    predictions: &[Prediction],
) -> Result<(), SeqgenError> {
    if problems.len() != predictions.len() {
        return Err(SeqgenError::LengthMismatch {
            answers: predictions.len(),
            truths: problems.len(),
        });
    }
    let v = Vocabulary::standard();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["question", "prediction", "correct", "beams"])?;
    for (p, pred) in problems.iter().zip(predictions) {
        let beams: Vec<String> = pred.beams.iter().map(|b| v.render(b)).collect();
        w.write_record([
            p.question_text(),
            v.render(&pred.best),
            (pred.best == p.answer_tokens()).to_string(),
            beams.join("|"),
        ])?;
    }
    w.flush()?;
    Ok(())
}
