//! Report aggregation and rendering. Everything is keyed by name in sorted
//! maps so output order never depends on evaluation order.

use std::collections::BTreeMap;
use std::fmt::Write;

use superfield::disk::CoordinateChange;
use superfield::supermatrix::SuperMatrix;
use superfield::{Scalar, SuperSeries};

#[derive(Clone, Debug)]
pub struct Check {
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub command: String,
    /// Values as (exact grammar text, human text).
    pub values: BTreeMap<String, (String, String)>,
    pub matrices: BTreeMap<String, Vec<Vec<String>>>,
    pub checks: BTreeMap<String, Check>,
}

/// Series in the input grammar with its truncation marker, so the printed
/// text parses back to the same series.
pub fn series_text(s: &SuperSeries) -> String {
    let tail = format!("O({})", s.trunc() + 1);
    if s.is_zero() {
        tail
    } else {
        format!("{} + {}", s, tail)
    }
}

pub fn change_text(c: &CoordinateChange) -> String {
    let mut out = format!("change {{ F = {}", series_text(&c.f));
    for (i, p) in c.psi.iter().enumerate() {
        let key = if c.psi.len() == 1 { "Psi".to_string() } else { format!("Psi{}", i + 1) };
        write!(out, ", {} = {}", key, series_text(p)).unwrap();
    }
    write!(out, ", variant = {} }}", c.variant.to_string().to_ascii_lowercase()).unwrap();
    out
}

/// Lowest-degree term of a nonzero series, for failure reports.
pub fn first_term(s: &SuperSeries) -> Option<String> {
    let (m, c) = s.terms().iter().min_by_key(|(m, _)| (m.degree(), **m))?;
    Some(SuperSeries::monomial(s.chart(), s.trunc(), c.clone(), *m).to_string())
}

impl Report {
    pub fn new(command: &str) -> Report {
        Report { command: command.into(), ..Default::default() }
    }

    pub fn value(&mut self, name: &str, v: impl ToString) {
        let v = v.to_string();
        self.values.insert(name.into(), (v.clone(), v));
    }

    /// Human output drops the truncation marker; machine output keeps it.
    pub fn series(&mut self, name: &str, s: &SuperSeries) {
        self.values.insert(name.into(), (series_text(s), s.to_string()));
    }

    pub fn check(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.checks.insert(name.into(), Check { pass, detail: detail.into() });
    }

    /// Check that a residual series vanishes; on failure the detail names
    /// the first surviving term.
    pub fn vanishes(&mut self, name: &str, s: &SuperSeries) {
        match first_term(s) {
            None => self.check(name, true, ""),
            Some(t) => self.check(name, false, format!("first nonzero term {}", t)),
        }
    }

    pub fn series_matrix(&mut self, name: &str, m: &SuperMatrix<SuperSeries>) {
        let rows = m.e.iter().map(|r| r.iter().map(series_text).collect()).collect();
        self.matrices.insert(name.into(), rows);
    }

    pub fn scalar_matrix(&mut self, name: &str, m: &SuperMatrix<Scalar>) {
        let rows = m.e.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect();
        self.matrices.insert(name.into(), rows);
    }

    pub fn failed(&self) -> usize {
        self.checks.values().filter(|c| !c.pass).count()
    }

    pub fn exit_code(&self) -> i32 {
        if self.failed() > 0 {
            1
        } else {
            0
        }
    }

    pub fn human(&self) -> String {
        let mut out = String::new();
        // a lone value prints bare, e.g. `0` for a vanishing Schwarzian
        if self.values.len() == 1 && self.matrices.is_empty() && self.checks.is_empty() {
            return format!("{}\n", self.values.values().next().unwrap().1);
        }
        for (k, (_, v)) in &self.values {
            writeln!(out, "{} = {}", k, v).unwrap();
        }
        for (k, rows) in &self.matrices {
            writeln!(out, "{} =", k).unwrap();
            for (i, r) in rows.iter().enumerate() {
                writeln!(out, "  row {}: [ {} ]", i + 1, r.join(" ; ")).unwrap();
            }
        }
        for (k, c) in &self.checks {
            let tag = if c.pass { "PASS" } else { "FAIL" };
            if c.detail.is_empty() {
                writeln!(out, "{} {}", tag, k).unwrap();
            } else {
                writeln!(out, "{} {}: {}", tag, k, c.detail).unwrap();
            }
        }
        if !self.checks.is_empty() {
            writeln!(out, "{} checks, {} failed", self.checks.len(), self.failed()).unwrap();
        }
        out
    }

    /// `key = value` lines; keys are stable and values are single-line.
    /// Spaces inside names become `_` so the first ` = ` always separates.
    pub fn machine(&self) -> String {
        let key = |k: &str| k.replace(' ', "_");
        let mut out = String::new();
        writeln!(out, "command = {}", self.command).unwrap();
        for (k, (v, _)) in &self.values {
            writeln!(out, "value.{} = {}", key(k), v).unwrap();
        }
        for (k, rows) in &self.matrices {
            let k = key(k);
            writeln!(out, "matrix.{}.rows = {}", k, rows.len()).unwrap();
            writeln!(out, "matrix.{}.cols = {}", k, rows.first().map_or(0, |r| r.len())).unwrap();
            for (i, r) in rows.iter().enumerate() {
                for (j, e) in r.iter().enumerate() {
                    writeln!(out, "matrix.{}.{}.{} = {}", k, i + 1, j + 1, e).unwrap();
                }
            }
        }
        for (k, c) in &self.checks {
            let k = key(k);
            writeln!(out, "check.{}.status = {}", k, if c.pass { "pass" } else { "fail" }).unwrap();
            if !c.detail.is_empty() {
                writeln!(out, "check.{}.detail = {}", k, c.detail).unwrap();
            }
        }
        writeln!(out, "status = {}", if self.failed() == 0 { "ok" } else { "fail" }).unwrap();
        writeln!(out, "exit = {}", self.exit_code()).unwrap();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use superfield::Chart;

    #[test]
    fn first_term_is_lowest_degree() {
        let ch = Chart::new(1);
        let s = SuperSeries::z(ch, 4).pow(3).add(&SuperSeries::theta(ch, 4, 1).scale_int(2));
        assert_eq!(first_term(&s).unwrap(), "2*th1");
        assert_eq!(first_term(&SuperSeries::zero(ch, 4)), None);
    }

    #[test]
    fn machine_keys_sorted() {
        let mut r = Report::new("x");
        r.check("b", true, "");
        r.check("a", false, "bad");
        r.value("v", "1/2");
        let m = r.machine();
        assert_eq!(
            m,
            "command = x\nvalue.v = 1/2\ncheck.a.status = fail\ncheck.a.detail = bad\ncheck.b.status = pass\nstatus = fail\nexit = 1\n"
        );
    }
}
