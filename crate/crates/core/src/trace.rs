//! Step records shared by both interpreters and their JSON Lines export.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Object and future references live in one integer namespace.
pub type Ref = i64;
pub type Value = i64;

/// Which semantic rule a step applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rule {
    Assign,
    New,
    Get,
    AwaitI,
    AwaitII,
    Async,
    Sync,
    ReturnA,
    ReturnS,
    IfT,
    IfF,
    WhileT,
    WhileF,
    Skip,
}

impl Rule {
    pub const ALL: [Rule; 14] = [
        Rule::Assign,
        Rule::New,
        Rule::Get,
        Rule::AwaitI,
        Rule::AwaitII,
        Rule::Async,
        Rule::Sync,
        Rule::ReturnA,
        Rule::ReturnS,
        Rule::IfT,
        Rule::IfF,
        Rule::WhileT,
        Rule::WhileF,
        Rule::Skip,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Assign => "Assign",
            Rule::New => "New",
            Rule::Get => "Get",
            Rule::AwaitI => "AwaitI",
            Rule::AwaitII => "AwaitII",
            Rule::Async => "Async",
            Rule::Sync => "Sync",
            Rule::ReturnA => "ReturnA",
            Rule::ReturnS => "ReturnS",
            Rule::IfT => "IfT",
            Rule::IfF => "IfF",
            Rule::WhileT => "WhileT",
            Rule::WhileF => "WhileF",
            Rule::Skip => "Skip",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Rule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Rule::ALL.iter().copied().find(|r| r.name() == s).ok_or_else(|| format!("unknown rule kind `{s}`"))
    }
}

/// Decoration of an asynchronous call step: `callee.method(destiny, args)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Spawn {
    pub callee: Ref,
    pub method: String,
    pub destiny: Ref,
    pub args: Vec<Value>,
}

/// One executed statement.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StepLabel {
    pub object: Ref,
    pub rule: Rule,
    pub stmt: String,
    pub spawn: Option<Spawn>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Termination {
    /// Every process queue is empty.
    Finished,
    /// Some queue is non-empty but no object can move.
    Deadlock,
    FuelExhausted,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::Finished => "Finished",
            Termination::Deadlock => "Deadlock",
            Termination::FuelExhausted => "FuelExhausted",
        })
    }
}

#[derive(Serialize, Deserialize)]
struct JsonlRecord<'a> {
    i: usize,
    obj: Ref,
    rule: &'a str,
    stmt: &'a str,
    spawn: Option<Spawn>,
}

/// Writes one JSON object per step, LF-terminated.
pub fn write_jsonl<'a, W: Write>(out: &mut W, steps: impl IntoIterator<Item = &'a StepLabel>) -> io::Result<()> {
    for (i, s) in steps.into_iter().enumerate() {
        let rec = JsonlRecord { i, obj: s.object, rule: s.rule.name(), stmt: &s.stmt, spawn: s.spawn.clone() };
        serde_json::to_writer(&mut *out, &rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads back a trace written by [`write_jsonl`].
pub fn read_jsonl(text: &str) -> Result<Vec<StepLabel>, String> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        #[derive(Deserialize)]
        struct Owned {
            i: usize,
            obj: Ref,
            rule: String,
            stmt: String,
            spawn: Option<Spawn>,
        }
        let rec: Owned = serde_json::from_str(line).map_err(|e| format!("line {}: {e}", n + 1))?;
        if rec.i != out.len() {
            return Err(format!("line {}: step index {} out of sequence", n + 1, rec.i));
        }
        let rule: Rule = rec.rule.parse()?;
        if rec.spawn.is_some() != (rule == Rule::Async) {
            return Err(format!("line {}: spawn must be present exactly for Async steps", n + 1));
        }
        out.push(StepLabel { object: rec.obj, rule, stmt: rec.stmt, spawn: rec.spawn });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_schema() {
        let steps = vec![
            StepLabel { object: 0, rule: Rule::New, stmt: "x := new;".into(), spawn: None },
            StepLabel {
                object: 0,
                rule: Rule::Async,
                stmt: "f := x!m(a);".into(),
                spawn: Some(Spawn { callee: 2, method: "m".into(), destiny: 3, args: vec![7] }),
            },
        ];
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &steps).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "{\"i\":0,\"obj\":0,\"rule\":\"New\",\"stmt\":\"x := new;\",\"spawn\":null}\n\
             {\"i\":1,\"obj\":0,\"rule\":\"Async\",\"stmt\":\"f := x!m(a);\",\"spawn\":{\"callee\":2,\"method\":\"m\",\"destiny\":3,\"args\":[7]}}\n"
        );
        assert_eq!(read_jsonl(&text).unwrap(), steps);
    }

    #[test]
    fn rule_names_round_trip() {
        for r in Rule::ALL {
            assert_eq!(r.name().parse::<Rule>().unwrap(), r);
        }
        assert!("Bogus".parse::<Rule>().is_err());
    }
}
