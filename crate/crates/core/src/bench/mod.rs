//! Parameterised benchmark programs and step/time sweeps over them.
//!
//! The programs are reconstructions: only their shapes and growth rates are
//! fixed, not their exact text.

pub mod random;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use crate::compiler::compile_program;
use crate::cost::{cost_of_trace, CostModel};
use crate::parser::{parse_program, SourceText};
use crate::runtime::{run_rt, RtConfig};
use crate::source_lang::SourceProgram;
use crate::{Cost, ExactCostModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Divisor checks of `n`, one object each, awaited one at a time.
    PrimalityLow,
    /// The same checks, all spawned before any result is needed.
    PrimalityHigh,
    /// Integer base-2 logarithms of `1..=n`.
    Logs,
    /// Primality of every number in `1..=n` by trial division.
    PrimesRange,
    /// Two mappers and a reduction; `n` is ignored.
    MapReduce,
}

impl Family {
    pub const ALL: [Family; 5] =
        [Family::PrimalityLow, Family::PrimalityHigh, Family::Logs, Family::PrimesRange, Family::MapReduce];

    pub fn name(self) -> &'static str {
        match self {
            Family::PrimalityLow => "primality_low",
            Family::PrimalityHigh => "primality_high",
            Family::Logs => "logs",
            Family::PrimesRange => "primes_range",
            Family::MapReduce => "mapreduce",
        }
    }

    pub fn source(self, n: u64) -> String {
        let lim = n.max(2);
        match self {
            Family::PrimalityLow => format!(
                "check(a, b) {{
    r := 0;
    m := a % b;
    if (m == 0) {{ r := 1; }} else {{ skip; }}
    return r;
}}

main() {{
    x := {n};
    lim := {lim};
    cnt := 0;
    d := 2;
    while (!(d == lim)) {{
        w := new;
        f := w!check(x, d);
        await f;
        r := f.get;
        cnt := cnt + r;
        d := d + 1;
    }}
    {verdict}
}}
",
                verdict = VERDICT
            ),
            Family::PrimalityHigh => format!(
                "check(a, b, p) {{
    fl := 0;
    m := a % b;
    if (m == 0) {{ fl := 1; }} else {{ skip; }}
    pf := p;
    if (pf == 0) {{ acc := fl; }} else {{ pv := pf.get; acc := pv + fl; }}
    return acc;
}}

main() {{
    x := {n};
    lim := {lim};
    f := 0;
    d := 2;
    while (!(d == lim)) {{
        w := new;
        f := w!check(x, d, f);
        d := d + 1;
    }}
    cnt := 0;
    if (f == 0) {{ skip; }} else {{ cnt := f.get; }}
    {verdict}
}}
",
                verdict = VERDICT
            ),
            Family::Logs => format!(
                "ilog(v) {{
    c := 0;
    y := v;
    while (!(y == 1)) {{
        y := y / 2;
        c := c + 1;
    }}
    return c;
}}

main() {{
    i := 1;
    lim := {end};
    total := 0;
    while (!(i == lim)) {{
        w := new;
        f := w!ilog(i);
        await f;
        r := f.get;
        total := total + r;
        i := i + 1;
    }}
}}
",
                end = n + 1
            ),
            Family::PrimesRange => format!(
                "isprime(v) {{
    p := 1;
    d := 2;
    if (v == 1) {{ p := 0; d := 1; }} else {{ skip; }}
    while (!(d == v)) {{
        m := v % d;
        if (m == 0) {{ p := 0; }} else {{ skip; }}
        d := d + 1;
    }}
    return p;
}}

main() {{
    i := 1;
    lim := {end};
    count := 0;
    while (!(i == lim)) {{
        w := new;
        f := w!isprime(i);
        await f;
        r := f.get;
        count := count + r;
        i := i + 1;
    }}
}}
",
                end = n + 1
            ),
            Family::MapReduce => MAPREDUCE.to_string(),
        }
    }

    pub fn gen(self, n: u64) -> SourceProgram {
        parse_program(&SourceText { text: self.source(n), origin: format!("{}({n})", self.name()) })
            .expect("generated programs are valid")
    }

    /// The attribute of object 0 holding the program's answer.
    pub fn result_attr(self) -> &'static str {
        match self {
            Family::PrimalityLow | Family::PrimalityHigh => "isprime",
            Family::Logs => "total",
            Family::PrimesRange => "count",
            Family::MapReduce => "r",
        }
    }
}

const VERDICT: &str = "if (x == 1) { isprime := 0; } else { if (cnt == 0) { isprime := 1; } else { isprime := 0; } }";

/// Two mappers fed 4 and 38, reduced by addition.
pub const MAPREDUCE: &str = "map(v) {
    r := v;
    return r;
}

reduce(a, b) {
    r := a + b;
    return r;
}

main() {
    node1 := new;
    node2 := new;
    v1 := 4;
    v2 := 38;
    f1 := node1!map(v1);
    f2 := node2!map(v2);
    await f1;
    await f2;
    r1 := f1.get;
    r2 := f2.get;
    r := reduce(r1, r2);
}
";

/// `a` blocks in a `get` on `b`, whose callback to `a` is queued behind the
/// blocked process.
pub const DEADLOCK: &str = "setup(p) {
    peer := p;
    return peer;
}

go() {
    g := peer!ping();
    r := g.get;
    return r;
}

ping() {
    h := peer!pong();
    s := h.get;
    return s;
}

pong() {
    t := 1;
    return t;
}

main() {
    a := new;
    b := new;
    s1 := a!setup(b);
    s2 := b!setup(a);
    await s1;
    await s2;
    f := a!go();
}
";

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL.iter().copied().find(|f| f.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Family::ALL.iter().map(|f| f.name()).collect();
            format!("unknown benchmark family `{s}` (expected one of {})", names.join(", "))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepRow {
    pub family: Family,
    pub n: u64,
    /// Total cost of the runtime trace under the sweep's model.
    pub steps: Cost,
    /// Best of three runs.
    pub wall_nanos: u128,
}

/// Runs the compiled program for each `n` and records its cost and time.
pub fn sweep(family: Family, ns: &[u64], model: &ExactCostModel, fuel: usize) -> Result<Vec<SweepRow>, String> {
    ns.iter()
        .map(|&n| {
            let table = Arc::new(compile_program(&family.gen(n)).map_err(|e| e.to_string())?);
            let mut best = u128::MAX;
            let mut steps = None;
            for _ in 0..3 {
                let cfg = RtConfig::load(table.clone()).map_err(|e| e.to_string())?;
                let start = Instant::now();
                let trace = run_rt(cfg, fuel).map_err(|e| e.to_string())?;
                best = best.min(start.elapsed().as_nanos());
                steps = Some(cost_of_trace(trace.steps.iter().map(|s| (s.object, s.rule)), model).total);
            }
            Ok(SweepRow { family, n, steps: steps.expect("three runs"), wall_nanos: best })
        })
        .collect()
}

/// Writes rows as CSV with header `family,n,steps,wall_nanos`.
pub fn write_csv<W: std::io::Write>(out: W, rows: &[SweepRow]) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["family", "n", "steps", "wall_nanos"])?;
    for r in rows {
        w.write_record([r.family.name().to_string(), r.n.to_string(), r.steps.to_string(), r.wall_nanos.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Step count of the runtime trace, under the all-ones model.
pub fn rt_steps(p: &SourceProgram, fuel: usize) -> Result<usize, String> {
    let table = Arc::new(compile_program(p).map_err(|e| e.to_string())?);
    let t = run_rt(RtConfig::load(table).map_err(|e| e.to_string())?, fuel).map_err(|e| e.to_string())?;
    Ok(t.steps.len())
}

pub fn steps_model() -> ExactCostModel {
    CostModel::steps()
}
