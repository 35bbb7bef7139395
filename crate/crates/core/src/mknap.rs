//! OR-Library multi-knapsack files.
//!
//! Layout (whitespace-separated, line breaks insignificant): the problem
//! count, then per problem a header `n m optimum`, `n` profits, the `m × n`
//! weight matrix row by row, and `m` capacities. An optimum of 0 means the
//! optimum is unknown.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::instance::Instance;

#[derive(Debug, Clone, PartialEq)]
pub struct MknapProblem {
    pub instance: Instance,
    pub known_optimum: Option<f64>,
}

struct Tokens<'a> {
    path: PathBuf,
    inner: Box<dyn Iterator<Item = (usize, &'a str)> + 'a>,
    last_line: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str, path: &Path) -> Self {
        let inner = text
            .lines()
            .enumerate()
            .flat_map(|(i, line)| line.split_whitespace().map(move |tok| (i + 1, tok)));
        Tokens {
            path: path.to_path_buf(),
            inner: Box::new(inner),
            last_line: 1,
        }
    }

    fn error(&self, line: usize, message: String) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line,
            message,
        }
    }

    fn number(&mut self, what: &str) -> Result<f64> {
        let Some((line, tok)) = self.inner.next() else {
            return Err(self.error(
                self.last_line,
                format!("unexpected end of file while reading {what}"),
            ));
        };
        self.last_line = line;
        tok.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.error(line, format!("non-numeric token {tok:?} in {what}")))
    }

    fn count(&mut self, what: &str) -> Result<usize> {
        let v = self.number(what)?;
        if v < 0.0 || v.fract() != 0.0 {
            return Err(self.error(self.last_line, format!("{what} must be a non-negative integer, got {v}")));
        }
        Ok(v as usize)
    }

    fn vec(&mut self, len: usize, what: &str) -> Result<Vec<f64>> {
        (0..len).map(|_| self.number(what)).collect()
    }
}

pub fn read_mknap(path: impl AsRef<Path>) -> Result<Vec<MknapProblem>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_mknap(&text, path)
}

pub fn parse_mknap(text: &str, path: &Path) -> Result<Vec<MknapProblem>> {
    let mut tok = Tokens::new(text, path);
    let problems = tok.count("problem count")?;
    let mut out = Vec::with_capacity(problems);
    for p in 0..problems {
        let header_line = tok.last_line;
        let n = tok.count("item count")?;
        let m = tok.count("constraint count")?;
        if n == 0 || m == 0 {
            return Err(tok.error(tok.last_line, format!("problem {} has n = {n}, m = {m}", p + 1)));
        }
        let optimum = tok.number("optimum")?;
        let profits = tok.vec(n, "profits")?;
        let mut columns = vec![0.0; n * m];
        for i in 0..m {
            for j in 0..n {
                columns[j * m + i] = tok.number("weights")?;
            }
        }
        let capacity = tok.vec(m, "capacities")?;
        if columns.iter().chain(&capacity).any(|v| *v < 0.0) {
            log::warn!(
                "{}: problem {} contains negative weights or capacities",
                path.display(),
                p + 1
            );
        }
        let mut instance = Instance::new(profits, columns, capacity).map_err(|e| {
            tok.error(header_line, format!("problem {}: {e}", p + 1))
        })?;
        instance.set_metadata("source", format!("{}#{}", path.display(), p + 1));
        out.push(MknapProblem {
            instance,
            known_optimum: (optimum != 0.0).then_some(optimum),
        });
    }
    Ok(out)
}

/// Serializes problems in the same layout [`read_mknap`] accepts.
pub fn to_mknap_text(problems: &[MknapProblem]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", problems.len());
    for p in problems {
        let inst = &p.instance;
        let _ = writeln!(
            out,
            "{} {} {:?}",
            inst.n(),
            inst.m(),
            p.known_optimum.unwrap_or(0.0)
        );
        let join = |vals: &mut dyn Iterator<Item = f64>| {
            vals.map(|v| format!("{v:?}")).collect::<Vec<_>>().join(" ")
        };
        let _ = writeln!(out, "{}", join(&mut inst.rewards().iter().copied()));
        for i in 0..inst.m() {
            let _ = writeln!(out, "{}", join(&mut (0..inst.n()).map(|j| inst.entry(i, j))));
        }
        let _ = writeln!(out, "{}", join(&mut inst.capacity().iter().copied()));
    }
    out
}
