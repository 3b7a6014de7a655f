//! Synthetic arithmetic corpora and held-out problem sets.

use std::collections::HashSet;

use rand::Rng;

use consensus_core::numeric::stream_rng;

use crate::vocab::{number_tokens, Token, DIVIDE, EOS, EQUALS, MINUS, PLUS, TIMES};
use crate::SeqgenError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
}

impl Op {
    pub fn token(self) -> Token {
        match self {
            Op::Add => PLUS,
            Op::Sub => MINUS,
            Op::Mul => TIMES,
            Op::Div => DIVIDE,
        }
    }

    pub fn from_token(t: Token) -> Option<Self> {
        match t {
            PLUS => Some(Op::Add),
            MINUS => Some(Op::Sub),
            TIMES => Some(Op::Mul),
            DIVIDE => Some(Op::Div),
            _ => None,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Op::Add => '+',
            Op::Sub => '-',
            Op::Mul => '*',
            Op::Div => '/',
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        match s {
            "+" => Some(Op::Add),
            "-" | "−" => Some(Op::Sub),
            "*" | "×" => Some(Op::Mul),
            "/" | "÷" => Some(Op::Div),
            _ => None,
        }
    }
}

/// `a op b`. Subtraction keeps `a >= b` and division is exact, so every
/// answer is a non-negative integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Problem {
    pub a: u64,
    pub op: Op,
    pub b: u64,
}

impl Problem {
    pub fn new(a: u64, op: Op, b: u64) -> Result<Self, SeqgenError> {
        let bad = match op {
            Op::Sub => a < b,
            Op::Div => b == 0 || a % b != 0,
            _ => false,
        };
        if bad {
            return Err(SeqgenError::MalformedQuestion(format!(
                "{a} {} {b} has no non-negative integer answer",
                op.symbol()
            )));
        }
        Ok(Self { a, op, b })
    }

    pub fn answer(&self) -> u64 {
        match self.op {
            Op::Add => self.a + self.b,
            Op::Sub => self.a - self.b,
            Op::Mul => self.a * self.b,
            Op::Div => self.a / self.b,
        }
    }

    /// `a op b =`
    pub fn question_tokens(&self) -> Vec<Token> {
        let mut t = number_tokens(self.a);
        t.push(self.op.token());
        t.extend(number_tokens(self.b));
        t.push(EQUALS);
        t
    }

    pub fn answer_tokens(&self) -> Vec<Token> {
        number_tokens(self.answer())
    }

    /// Parses the question tokens `a op b =`.
    pub fn from_question(tokens: &[Token]) -> Result<Self, SeqgenError> {
        let malformed = |m: &str| SeqgenError::MalformedQuestion(m.to_string());
        let eq = tokens
            .iter()
            .position(|&t| t == EQUALS)
            .ok_or_else(|| malformed("no '=' token"))?;
        let lhs = &tokens[..eq];
        let op_pos = lhs
            .iter()
            .position(|&t| Op::from_token(t).is_some())
            .ok_or_else(|| malformed("no operator"))?;
        let number = |ds: &[Token]| -> Result<u64, SeqgenError> {
            if ds.is_empty() || ds.len() > 18 || ds.iter().any(|&d| d > 9) {
                return Err(malformed("operand is not a number"));
            }
            Ok(ds.iter().fold(0, |acc, &d| acc * 10 + d as u64))
        };
        let op = Op::from_token(lhs[op_pos]).expect("checked");
        Self::new(number(&lhs[..op_pos])?, op, number(&lhs[op_pos + 1..])?)
    }

    pub fn question_text(&self) -> String {
        format!("{} {} {} =", self.a, self.op.symbol(), self.b)
    }
}

/// Describes a synthetic corpus of `a op b = c <eos>` lines.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSpec {
    pub min_digits: u32,
    pub max_digits: u32,
    pub operators: Vec<Op>,
    pub size: usize,
    /// Fraction of lines whose answer is off by 1 to 3.
    pub wrong_answer_fraction: f64,
    /// Draw lines from this list instead of random operands.
    pub problems: Option<Vec<Problem>>,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            min_digits: 1,
            max_digits: 2,
            operators: vec![Op::Add, Op::Sub],
            size: 2000,
            wrong_answer_fraction: 0.3,
            problems: None,
        }
    }
}

impl CorpusSpec {
    fn validate(&self) -> Result<(), SeqgenError> {
        if self.operators.is_empty() {
            return Err(SeqgenError::EmptyOperators);
        }
        if self.min_digits == 0 || self.min_digits > self.max_digits || self.max_digits > 9 {
            return Err(SeqgenError::InvalidConfig(format!(
                "operand digits {}..={}",
                self.min_digits, self.max_digits
            )));
        }
        if !(0.0..=1.0).contains(&self.wrong_answer_fraction) {
            return Err(SeqgenError::InvalidConfig(format!(
                "wrong answer fraction {}",
                self.wrong_answer_fraction
            )));
        }
        if self.problems.as_ref().is_some_and(Vec::is_empty) {
            return Err(SeqgenError::EmptyCorpus);
        }
        Ok(())
    }

    fn operand<R: Rng>(&self, rng: &mut R) -> u64 {
        let digits = rng.random_range(self.min_digits..=self.max_digits);
        let lo = if digits == 1 {
            0
        } else {
            10u64.pow(digits - 1)
        };
        rng.random_range(lo..10u64.pow(digits))
    }

    /// A random problem from the operand distribution.
    pub fn draw<R: Rng>(&self, rng: &mut R) -> Problem {
        if let Some(list) = &self.problems {
            return list[rng.random_range(0..list.len())];
        }
        let op = self.operators[rng.random_range(0..self.operators.len())];
        let (mut a, mut b) = (self.operand(rng), self.operand(rng));
        match op {
            Op::Sub if a < b => std::mem::swap(&mut a, &mut b),
            Op::Div => {
                b = b.max(1);
                a -= a % b;
            }
            _ => {}
        }
        Problem { a, op, b }
    }
}

/// Training lines plus the set of problems they mention.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub lines: Vec<Vec<Token>>,
    pub problems: HashSet<Problem>,
}

fn corrupt<R: Rng>(c: u64, rng: &mut R) -> u64 {
    let delta = rng.random_range(1..=3u64);
    if rng.random_bool(0.5) && c >= delta {
        c - delta
    } else {
        c + delta
    }
}

/// Lines `a op b = c <eos>`; a `wrong_answer_fraction` share of them carries
/// a corrupted `c`. Deterministic per seed.
pub fn build_corpus(spec: &CorpusSpec, seed: u64) -> Result<Corpus, SeqgenError> {
    spec.validate()?;
    let mut rng = stream_rng(seed, 0);
    let mut lines = Vec::with_capacity(spec.size);
    let mut problems = HashSet::new();
    for _ in 0..spec.size {
        let p = spec.draw(&mut rng);
        let wrong = rng.random_bool(spec.wrong_answer_fraction);
        let c = if wrong {
            corrupt(p.answer(), &mut rng)
        } else {
            p.answer()
        };
        let mut line = p.question_tokens();
        line.extend(number_tokens(c));
        line.push(EOS);
        lines.push(line);
        problems.insert(p);
    }
    Ok(Corpus { lines, problems })
}

/// `n` distinct problems from `spec` that never occur in `corpus`.
pub fn held_out_problems(
    spec: &CorpusSpec,
    corpus: &Corpus,
    n: usize,
    seed: u64,
) -> Result<Vec<Problem>, SeqgenError> {
    spec.validate()?;
    let mut rng = stream_rng(seed, 1);
    let mut seen = corpus.problems.clone();
    let mut out = Vec::with_capacity(n);
    let budget = 1000 * n.max(1);
    for _ in 0..budget {
        if out.len() == n {
            break;
        }
        let p = spec.draw(&mut rng);
        if seen.insert(p) {
            out.push(p);
        }
    }
    if out.len() < n {
        return Err(SeqgenError::InvalidConfig(format!(
            "only {} unseen problems found, {n} requested",
            out.len()
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Vocabulary;

    #[test]
    fn clean_corpus_is_arithmetically_correct() {
        let spec = CorpusSpec {
            operators: vec![Op::Add, Op::Sub, Op::Mul, Op::Div],
            wrong_answer_fraction: 0.0,
            ..CorpusSpec::default()
        };
        let corpus = build_corpus(&spec, 3).unwrap();
        for line in &corpus.lines {
            let p = Problem::from_question(line).unwrap();
            let eq = line.iter().position(|&t| t == EQUALS).unwrap();
            assert_eq!(&line[eq + 1..line.len() - 1], p.answer_tokens().as_slice());
        }
    }

    #[test]
    fn single_problem_spec_is_forced() {
        let spec = CorpusSpec {
            size: 1,
            wrong_answer_fraction: 0.0,
            problems: Some(vec![Problem::new(2, Op::Add, 2).unwrap()]),
            ..CorpusSpec::default()
        };
        let corpus = build_corpus(&spec, 0).unwrap();
        assert_eq!(
            Vocabulary::standard().render(&corpus.lines[0]),
            "2 + 2 = 4 <eos>"
        );
    }

    #[test]
    fn no_operators_is_an_error() {
        let spec = CorpusSpec {
            operators: vec![],
            ..CorpusSpec::default()
        };
        assert!(matches!(
            build_corpus(&spec, 0),
            Err(SeqgenError::EmptyOperators)
        ));
    }

    #[test]
    fn held_out_problems_are_unseen() {
        let spec = CorpusSpec::default();
        let corpus = build_corpus(&spec, 1).unwrap();
        let held = held_out_problems(&spec, &corpus, 200, 1).unwrap();
        assert_eq!(held.len(), 200);
        assert!(held.iter().all(|p| !corpus.problems.contains(p)));
        let distinct: HashSet<_> = held.iter().collect();
        assert_eq!(distinct.len(), 200);
    }

    #[test]
    fn malformed_questions_are_rejected() {
        assert!(Problem::from_question(&[2, PLUS, 2]).is_err());
        assert!(Problem::from_question(&[2, 2, EQUALS]).is_err());
        assert!(Problem::from_question(&[2, MINUS, 3, EQUALS]).is_err());
        assert_eq!(
            Problem::from_question(&[1, 2, TIMES, 3, EQUALS]).unwrap(),
            Problem::new(12, Op::Mul, 3).unwrap()
        );
    }
}
