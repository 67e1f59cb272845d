//! Translation between source and runtime configurations, and the checker
//! that replays a runtime trace step by step against the source semantics.

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use thiserror::Error;

use crate::compiler::{compile_program, compile_stmt, CompileError};
use crate::runtime::{next_object, Cell, FutureCell, ObjectCell, Proc, RtConfig, RtError, RtHeap};
use crate::source_lang::{BoolExpr, Expr, ReturnMark, SourceProgram, SourceStmt, ValueExpr};
use crate::source_sem::{AttrStore, Closure, Heap, SourceConfig};
use crate::target_ir::{AttrIdx, MethodTable, TargetB, TargetRhs, TargetStmt, TargetV, WriteBack, K};
use crate::trace::{Ref, Rule, StepLabel};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BridgeError {
    #[error("ill-formed IR: {0}")]
    IllFormedIR(String),
    #[error(transparent)]
    Compile(#[from] CompileError),
}

fn ill(msg: impl Into<String>) -> BridgeError {
    BridgeError::IllFormedIR(msg.into())
}

struct Decompiler<'a> {
    table: &'a MethodTable,
}

impl Decompiler<'_> {
    fn name(&self, i: AttrIdx) -> Result<String, BridgeError> {
        self.table.attr_name(i).map(str::to_string).ok_or_else(|| ill(format!("attribute slot {i} out of range")))
    }

    fn names(&self, xs: &[AttrIdx]) -> Result<Vec<String>, BridgeError> {
        xs.iter().map(|&x| self.name(x)).collect()
    }

    fn value(&self, v: &TargetV) -> Result<ValueExpr, BridgeError> {
        let bin = |a: &TargetV, b: &TargetV| -> Result<(ValueExpr, ValueExpr), BridgeError> {
            Ok((self.value(a)?, self.value(b)?))
        };
        Ok(match v {
            TargetV::A(i) => ValueExpr::Attr(self.name(*i)?),
            TargetV::P(i) => return Err(ill(format!("dangling parameter slot {i}"))),
            TargetV::I(n) => ValueExpr::IntLit(*n),
            TargetV::Add(a, b) => {
                let (a, b) = bin(a, b)?;
                ValueExpr::add(a, b)
            }
            TargetV::Sub(a, b) => {
                let (a, b) = bin(a, b)?;
                ValueExpr::sub(a, b)
            }
            TargetV::Mul(a, b) => {
                let (a, b) = bin(a, b)?;
                ValueExpr::mul(a, b)
            }
            TargetV::Div(a, b) => {
                let (a, b) = bin(a, b)?;
                ValueExpr::div(a, b)
            }
            TargetV::Mod(a, b) => {
                let (a, b) = bin(a, b)?;
                ValueExpr::rem(a, b)
            }
        })
    }

    fn boolean(&self, b: &TargetB) -> Result<BoolExpr, BridgeError> {
        Ok(match b {
            TargetB::And(x, y) => BoolExpr::and(self.boolean(x)?, self.boolean(y)?),
            TargetB::Or(x, y) => BoolExpr::or(self.boolean(x)?, self.boolean(y)?),
            TargetB::Not(x) => BoolExpr::not(self.boolean(x)?),
            TargetB::Eq(x, y) => BoolExpr::eq(self.value(x)?, self.value(y)?),
        })
    }

    fn atom(&self, s: &TargetStmt) -> Result<SourceStmt, BridgeError> {
        Ok(match s {
            TargetStmt::Skip(_) => SourceStmt::Skip,
            TargetStmt::Await(f, _) => SourceStmt::Await(self.name(*f)?),
            TargetStmt::Assign(x, rhs, _) => {
                let x = self.name(*x)?;
                match rhs {
                    TargetRhs::Val(v) => SourceStmt::Assign(x, Expr::Val(self.value(v)?)),
                    TargetRhs::New => SourceStmt::Assign(x, Expr::New),
                    TargetRhs::Get(f) => SourceStmt::Assign(x, Expr::Get(self.name(*f)?)),
                    TargetRhs::Sync(m, args) => SourceStmt::Assign(x, Expr::SyncCall(m.clone(), self.names(args)?)),
                    TargetRhs::Async(y, m, args) => SourceStmt::AsyncCall {
                        fut: x,
                        callee: self.name(*y)?,
                        method: m.clone(),
                        args: self.names(args)?,
                    },
                }
            }
            TargetStmt::If(b, t, e, _) => SourceStmt::if_else(self.boolean(b)?, self.builder(t)?, self.builder(e)?),
            TargetStmt::While(b, body, _) => SourceStmt::while_loop(self.boolean(b)?, self.builder(body)?),
            TargetStmt::Return(x, wb, _) => {
                let mark = match wb {
                    WriteBack::Absent => ReturnMark::Star,
                    WriteBack::To(z) => ReturnMark::WriteBack(self.name(*z)?),
                    WriteBack::Formal => return Err(ill("uninstantiated write-back")),
                };
                SourceStmt::Return(self.name(*x)?, mark)
            }
            TargetStmt::Exit => return Err(ill("exit marker at the head of a process")),
            TargetStmt::Hole => return Err(ill("raw hole")),
        })
    }

    /// Decompiles the spine of `s`. `in_builder` selects which terminal is
    /// legal: a hole inside builders, the exit marker at top level.
    fn spine(&self, s: &TargetStmt, in_builder: bool) -> Result<SourceStmt, BridgeError> {
        let mut atoms = Vec::new();
        let mut cur = s;
        loop {
            match cur {
                TargetStmt::Hole if in_builder => break,
                TargetStmt::Exit if !in_builder => break,
                TargetStmt::Hole => return Err(ill("raw hole")),
                TargetStmt::Exit => return Err(ill("exit marker inside a branch")),
                other => {
                    atoms.push(self.atom(other)?);
                    cur = other.cont().expect("non-terminal");
                }
            }
        }
        SourceStmt::seq(atoms).ok_or_else(|| ill("empty statement"))
    }

    fn builder(&self, s: &TargetStmt) -> Result<SourceStmt, BridgeError> {
        self.spine(s, true)
    }
}

/// Left inverse of compilation on process statements ending in the exit
/// marker.
pub fn stm_to_source(table: &MethodTable, s: &TargetStmt) -> Result<SourceStmt, BridgeError> {
    Decompiler { table }.spine(s, false)
}

/// The source form of the first statement only.
pub fn head_to_source(table: &MethodTable, s: &TargetStmt) -> Result<SourceStmt, BridgeError> {
    Decompiler { table }.atom(s)
}

/// Source view of a runtime configuration. The scheduler order is dropped.
pub fn from_target(rt: &RtConfig) -> Result<SourceConfig, BridgeError> {
    let table = rt.heap.table();
    let mut queues = BTreeMap::new();
    let mut objects = BTreeMap::new();
    let mut futures = BTreeMap::new();
    for (r, cell) in rt.heap.allocated().iter().enumerate() {
        let r = r as Ref;
        match cell {
            Cell::Vacant => {}
            Cell::Object(obj) => {
                let store: AttrStore = obj
                    .attrs
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| (table.attr_name(i).expect("attrs sized by layout").to_string(), v))
                    .collect();
                let q = obj
                    .procq
                    .iter()
                    .map(|p| Ok(Closure { stmt: stm_to_source(table, &p.stmt)?, destiny: p.destiny }))
                    .collect::<Result<VecDeque<_>, BridgeError>>()?;
                objects.insert(r, store);
                queues.insert(r, q);
            }
            Cell::Future(FutureCell::Unresolved(_)) => {
                futures.insert(r, None);
            }
            Cell::Future(FutureCell::Resolved(v)) => {
                futures.insert(r, Some(*v));
            }
        }
    }
    Ok(SourceConfig { queues, heap: Heap { count: rt.heap.counter(), objects, futures } })
}

/// Runtime view of a source configuration; objects with pending processes
/// are scheduled in ascending reference order.
pub fn to_target(c: &SourceConfig, table: Arc<MethodTable>) -> Result<RtConfig, BridgeError> {
    let mut heap = RtHeap::new(table.clone(), (c.heap.count.max(1) as usize).next_power_of_two().max(8));
    let exit: K = Arc::new(TargetStmt::Exit);
    for (&r, store) in &c.heap.objects {
        let mut attrs = vec![0; table.attr_count()];
        for (name, &v) in store.iter() {
            let i = table.attr_index(name).ok_or_else(|| CompileError::UnknownAttribute(name.clone()))?;
            attrs[i] = v;
        }
        let procq = c
            .queues
            .get(&r)
            .map(|q| {
                q.iter()
                    .map(|cl| {
                        Ok(Proc {
                            stmt: compile_stmt(&table.layout, &cl.stmt, exit.clone(), &WriteBack::Absent)?,
                            destiny: cl.destiny,
                        })
                    })
                    .collect::<Result<VecDeque<_>, BridgeError>>()
            })
            .transpose()?
            .unwrap_or_default();
        heap.put(r, Cell::Object(ObjectCell { attrs, procq }));
    }
    for (&r, v) in &c.heap.futures {
        let cell = match v {
            None => FutureCell::Unresolved(Vec::new()),
            Some(v) => FutureCell::Resolved(*v),
        };
        heap.put(r, Cell::Future(cell));
    }
    heap.reserve_to(c.heap.count);
    let sched = c.queues.iter().filter(|(_, q)| !q.is_empty()).map(|(&r, _)| r).collect();
    Ok(RtConfig { heap, sched })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub index: usize,
    pub expected: Rule,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub ok: bool,
    pub failures: Vec<Failure>,
    /// Labels produced by the source semantics for the validated prefix.
    pub source_steps: Vec<StepLabel>,
}

impl Verdict {
    pub fn first_failure(&self) -> Option<&Failure> {
        self.failures.first()
    }
}

/// Replays `trace` (as produced by running the compiled program) and checks
/// that each step, translated back, is a legal source step reaching the
/// translated-back successor. Stops at the first failure.
pub fn check_trace(trace: &[StepLabel], program: &SourceProgram) -> Verdict {
    let mut failures = Vec::new();
    let mut source_steps = Vec::new();
    let fail = |failures: &mut Vec<Failure>, index: usize, expected: Rule, reason: String| {
        failures.push(Failure { index, expected, reason });
    };
    let start = compile_program(program)
        .map_err(|e| e.to_string())
        .and_then(|t| RtConfig::load(Arc::new(t)).map_err(|e| e.to_string()));
    let mut rt = match start {
        Ok(rt) => rt,
        Err(e) => {
            if let Some(first) = trace.first() {
                fail(&mut failures, 0, first.rule, format!("cannot load program: {e}"));
            }
            return Verdict { ok: failures.is_empty(), failures, source_steps };
        }
    };
    let mut src = match from_target(&rt) {
        Ok(s) => s,
        Err(e) => {
            if let Some(first) = trace.first() {
                fail(&mut failures, 0, first.rule, e.to_string());
            }
            return Verdict { ok: failures.is_empty(), failures, source_steps };
        }
    };
    for (i, rec) in trace.iter().enumerate() {
        match check_step(i, rec, program, &mut rt, &src) {
            Ok((next_src, label)) => {
                source_steps.push(label);
                src = next_src;
            }
            Err(reason) => {
                fail(&mut failures, i, rec.rule, reason);
                break;
            }
        }
    }
    Verdict { ok: failures.is_empty(), failures, source_steps }
}

fn check_step(
    i: usize,
    rec: &StepLabel,
    program: &SourceProgram,
    rt: &mut RtConfig,
    src: &SourceConfig,
) -> Result<(SourceConfig, StepLabel), String> {
    let o = rec.object;
    match next_object(&rt.heap, &rt.sched) {
        Some(chosen) if chosen == o => {}
        Some(chosen) => return Err(format!("runtime schedules object {chosen}, trace has {o}")),
        None => return Err("no object can move".into()),
    }
    match src.enabled(o) {
        Ok(true) => {}
        Ok(false) => return Err(format!("object {o} is not enabled in the source configuration")),
        Err(e) => return Err(e.to_string()),
    }
    let rt_step = rt.step().map_err(|e: RtError| e.to_string())?.expect("an object is ready");
    if rt_step.rule != rec.rule || rt_step.stmt != rec.stmt || rt_step.spawn != rec.spawn {
        return Err(format!(
            "runtime executes {} `{}`, trace has {} `{}`",
            rt_step.rule, rt_step.stmt, rec.rule, rec.stmt
        ));
    }
    let (next_src, label) = src.step(program, o).map_err(|e| e.to_string())?;
    if label.rule != rec.rule {
        return Err(format!("source applies {} at step {i}", label.rule));
    }
    if label.stmt != rec.stmt {
        return Err(format!("source executes `{}`", label.stmt));
    }
    if label.spawn != rec.spawn {
        return Err("source spawns a different call".into());
    }
    let back = from_target(rt).map_err(|e| e.to_string())?;
    if back != next_src {
        return Err(describe_mismatch(&back, &next_src));
    }
    Ok((next_src, label))
}

fn describe_mismatch(rt: &SourceConfig, src: &SourceConfig) -> String {
    if rt.heap.count != src.heap.count {
        return format!("reference counter {} vs {}", rt.heap.count, src.heap.count);
    }
    for (r, s) in &src.heap.objects {
        if rt.heap.objects.get(r) != Some(s) {
            return format!("attributes of object {r} differ");
        }
    }
    if rt.heap.futures != src.heap.futures {
        return "futures differ".into();
    }
    for (r, q) in &src.queues {
        if rt.queues.get(r) != Some(q) {
            return format!("process queue of object {r} differs");
        }
    }
    "configurations differ".into()
}
