//! Deterministic execution of compiled programs.
//!
//! Objects and futures share one growable array of heap cells indexed by
//! reference. A scheduler list holds the objects with pending processes; each
//! turn the first object that is not blocked on a `get` executes exactly one
//! statement of its head process, and the list is rotated behind it.

use std::collections::VecDeque;
use std::sync::Arc;

use thiserror::Error;

use crate::bridge::{head_to_source, BridgeError};
use crate::parser::render_stmt;
use crate::source_sem::{arith, ArithOp, EvalError};
use crate::target_ir::{splice, InstantiateError, MethodTable, TargetB, TargetRhs, TargetStmt, TargetV, WriteBack, K};
use crate::trace::{Ref, Rule, Spawn, StepLabel, Termination, Value};

const INITIAL_CAPACITY: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FutureCell {
    /// Listener objects. No rule ever registers one; blocked objects stay
    /// scheduled and are skipped instead.
    Unresolved(Vec<Ref>),
    Resolved(Value),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proc {
    pub stmt: K,
    pub destiny: Ref,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectCell {
    pub attrs: Vec<Value>,
    pub procq: VecDeque<Proc>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cell {
    Vacant,
    Object(ObjectCell),
    Future(FutureCell),
}

#[derive(Debug, Clone)]
pub struct RtHeap {
    cells: Vec<Cell>,
    counter: Ref,
    table: Arc<MethodTable>,
}

/// Heaps are equal when their tables and allocated cells agree; spare
/// capacity is ignored.
impl PartialEq for RtHeap {
    fn eq(&self, other: &Self) -> bool {
        self.counter == other.counter && self.table == other.table && self.allocated() == other.allocated()
    }
}

impl Eq for RtHeap {}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RtError {
    #[error("object {0} is blocked on an unresolved future")]
    Blocked(Ref),
    #[error("unknown object {0}")]
    UnknownObject(Ref),
    #[error("object {0} has no process")]
    Idle(Ref),
    #[error("object {object}: attribute `{attr}` holds {value}, which is not a {expected} reference")]
    DanglingRef { object: Ref, attr: String, value: Value, expected: &'static str },
    #[error("object {object}: {source}")]
    Eval { object: Ref, source: EvalError },
    #[error(transparent)]
    Instantiate(#[from] InstantiateError),
    #[error("future {0} resolved twice")]
    FutureRewrite(Ref),
    #[error("object {object}: ill-formed process: {reason}")]
    IllFormed { object: Ref, reason: String },
}

impl RtHeap {
    pub fn new(table: Arc<MethodTable>, capacity: usize) -> Self {
        RtHeap { cells: vec![Cell::Vacant; capacity.max(1)], counter: 0, table }
    }

    pub fn table(&self) -> &Arc<MethodTable> {
        &self.table
    }

    pub fn counter(&self) -> Ref {
        self.counter
    }

    pub fn capacity(&self) -> usize {
        self.cells.len()
    }

    /// The cells of every reference handed out so far.
    pub fn allocated(&self) -> &[Cell] {
        &self.cells[..self.counter as usize]
    }

    /// Stores `cell` at the next fresh reference, doubling the array when
    /// it is full.
    pub fn alloc(&mut self, cell: Cell) -> Ref {
        let r = self.counter;
        if r as usize == self.cells.len() {
            let cap = self.cells.len() * 2;
            self.cells.resize(cap, Cell::Vacant);
        }
        self.cells[r as usize] = cell;
        self.counter += 1;
        r
    }

    /// Places `cell` at `r`, growing as needed; used when rebuilding a heap.
    pub(crate) fn put(&mut self, r: Ref, cell: Cell) {
        while r as usize >= self.cells.len() {
            let cap = self.cells.len() * 2;
            self.cells.resize(cap, Cell::Vacant);
        }
        self.cells[r as usize] = cell;
        self.counter = self.counter.max(r + 1);
    }

    /// Marks every reference below `count` as handed out.
    pub(crate) fn reserve_to(&mut self, count: Ref) {
        while count as usize > self.cells.len() {
            let cap = self.cells.len() * 2;
            self.cells.resize(cap, Cell::Vacant);
        }
        self.counter = self.counter.max(count);
    }

    pub fn cell(&self, r: Ref) -> Option<&Cell> {
        if r < 0 || r >= self.counter {
            return None;
        }
        self.cells.get(r as usize)
    }

    pub fn object(&self, o: Ref) -> Option<&ObjectCell> {
        match self.cell(o) {
            Some(Cell::Object(c)) => Some(c),
            _ => None,
        }
    }

    fn object_mut(&mut self, o: Ref) -> Option<&mut ObjectCell> {
        if o < 0 || o >= self.counter {
            return None;
        }
        match self.cells.get_mut(o as usize) {
            Some(Cell::Object(c)) => Some(c),
            _ => None,
        }
    }

    pub fn future(&self, f: Ref) -> Option<&FutureCell> {
        match self.cell(f) {
            Some(Cell::Future(c)) => Some(c),
            _ => None,
        }
    }

    /// Whether the head process of `o` is a `get` on an unresolved future.
    pub fn blocked(&self, o: Ref) -> bool {
        let Some(obj) = self.object(o) else { return false };
        let Some(head) = obj.procq.front() else { return true };
        if let TargetStmt::Assign(_, TargetRhs::Get(f), _) = &*head.stmt {
            return matches!(self.future(obj.attrs[*f]), Some(FutureCell::Unresolved(_)));
        }
        false
    }

    /// Executes one statement of the head process of `o`. On error the heap
    /// is unchanged.
    pub fn eval(&mut self, o: Ref) -> Result<RtStep, RtError> {
        let obj = self.object(o).ok_or(RtError::UnknownObject(o))?;
        let proc = obj.procq.front().ok_or(RtError::Idle(o))?.clone();
        let ill = |e: BridgeError| RtError::IllFormed { object: o, reason: e.to_string() };
        let stmt = render_stmt(&head_to_source(&self.table, &proc.stmt).map_err(ill)?);
        let ev = |e: EvalError| RtError::Eval { object: o, source: e };
        let step =
            |rule: Rule, activated: Vec<Ref>| RtStep { object: o, rule, stmt: stmt.clone(), activated, spawn: None };

        match &*proc.stmt {
            TargetStmt::Skip(k) => {
                self.set_head(o, k.clone());
                Ok(step(Rule::Skip, vec![o]))
            }
            TargetStmt::Assign(x, TargetRhs::Val(v), k) => {
                let val = eval_v(&obj.attrs, v).map_err(ev)?;
                self.set_attr(o, *x, val);
                self.set_head(o, k.clone());
                Ok(step(Rule::Assign, vec![o]))
            }
            TargetStmt::Assign(x, TargetRhs::New, k) => {
                let attrs = vec![0; self.table.attr_count()];
                let fresh = self.alloc(Cell::Object(ObjectCell { attrs, procq: VecDeque::new() }));
                self.set_attr(o, *x, fresh);
                self.set_head(o, k.clone());
                Ok(step(Rule::New, vec![o]))
            }
            TargetStmt::Assign(x, TargetRhs::Get(f), k) => {
                let fr = obj.attrs[*f];
                match self.future(fr) {
                    Some(FutureCell::Resolved(v)) => {
                        let v = *v;
                        self.set_attr(o, *x, v);
                        self.set_head(o, k.clone());
                        Ok(step(Rule::Get, vec![o]))
                    }
                    Some(FutureCell::Unresolved(_)) => Err(RtError::Blocked(o)),
                    None => Err(self.dangling(o, *f, fr, "future")),
                }
            }
            TargetStmt::Assign(x, TargetRhs::Async(y, m, zs), k) => {
                let callee = obj.attrs[*y];
                let Some(callee_obj) = self.object(callee) else {
                    return Err(self.dangling(o, *y, callee, "object"));
                };
                let was_idle = callee_obj.procq.is_empty();
                let args: Vec<Value> = zs.iter().map(|z| obj.attrs[*z]).collect();
                let body = self.table.instantiate(m, &args, callee, WriteBack::Absent, &Arc::new(TargetStmt::Exit))?;
                let l = self.alloc(Cell::Future(FutureCell::Unresolved(Vec::new())));
                self.set_attr(o, *x, l);
                self.set_head(o, k.clone());
                self.object_mut(callee).expect("checked above").procq.push_back(Proc { stmt: body, destiny: l });
                let activated = if callee != o && was_idle { vec![o, callee] } else { vec![o] };
                Ok(RtStep {
                    spawn: Some(Spawn { callee, method: m.clone(), destiny: l, args }),
                    ..step(Rule::Async, activated)
                })
            }
            TargetStmt::Assign(x, TargetRhs::Sync(m, zs), k) => {
                let args: Vec<Value> = zs.iter().map(|z| obj.attrs[*z]).collect();
                let body = self.table.instantiate(m, &args, o, WriteBack::To(*x), k)?;
                self.set_head(o, body);
                Ok(step(Rule::Sync, vec![o]))
            }
            TargetStmt::Await(f, k) => {
                let fr = obj.attrs[*f];
                match self.future(fr) {
                    Some(FutureCell::Resolved(_)) => {
                        self.set_head(o, k.clone());
                        Ok(step(Rule::AwaitI, vec![o]))
                    }
                    Some(FutureCell::Unresolved(_)) => {
                        let q = &mut self.object_mut(o).unwrap().procq;
                        let p = q.pop_front().unwrap();
                        q.push_back(p);
                        Ok(step(Rule::AwaitII, vec![o]))
                    }
                    None => Err(self.dangling(o, *f, fr, "future")),
                }
            }
            TargetStmt::If(b, t, e, k) => {
                let c = eval_b(&obj.attrs, b).map_err(ev)?;
                self.set_head(o, splice(if c { t } else { e }, k));
                Ok(step(if c { Rule::IfT } else { Rule::IfF }, vec![o]))
            }
            TargetStmt::While(b, body, k) => {
                let c = eval_b(&obj.attrs, b).map_err(ev)?;
                if c {
                    self.set_head(o, splice(body, &proc.stmt));
                    Ok(step(Rule::WhileT, vec![o]))
                } else {
                    self.set_head(o, k.clone());
                    Ok(step(Rule::WhileF, vec![o]))
                }
            }
            TargetStmt::Return(x, WriteBack::Absent, _) => {
                let v = obj.attrs[*x];
                match self.future(proc.destiny) {
                    Some(FutureCell::Unresolved(_)) => {}
                    Some(FutureCell::Resolved(_)) => return Err(RtError::FutureRewrite(proc.destiny)),
                    None => {
                        return Err(RtError::IllFormed { object: o, reason: "destiny is not a future".into() });
                    }
                }
                self.cells[proc.destiny as usize] = Cell::Future(FutureCell::Resolved(v));
                let q = &mut self.object_mut(o).unwrap().procq;
                q.pop_front();
                let activated = if q.is_empty() { vec![] } else { vec![o] };
                Ok(step(Rule::ReturnA, activated))
            }
            TargetStmt::Return(x, WriteBack::To(z), k) => {
                let v = obj.attrs[*x];
                self.set_attr(o, *z, v);
                self.set_head(o, k.clone());
                Ok(step(Rule::ReturnS, vec![o]))
            }
            TargetStmt::Return(_, WriteBack::Formal, _) | TargetStmt::Exit | TargetStmt::Hole => {
                unreachable!("rejected by head_to_source")
            }
        }
    }

    fn dangling(&self, o: Ref, attr: usize, value: Value, expected: &'static str) -> RtError {
        let attr = self.table.attr_name(attr).unwrap_or("?").to_string();
        RtError::DanglingRef { object: o, attr, value, expected }
    }

    fn set_attr(&mut self, o: Ref, x: usize, v: Value) {
        self.object_mut(o).expect("live object").attrs[x] = v;
    }

    fn set_head(&mut self, o: Ref, k: K) {
        self.object_mut(o).expect("live object").procq.front_mut().expect("running process").stmt = k;
    }
}

pub fn eval_v(attrs: &[Value], v: &TargetV) -> Result<Value, EvalError> {
    let bin = |op, a: &TargetV, b: &TargetV| arith(op, eval_v(attrs, a)?, eval_v(attrs, b)?);
    match v {
        TargetV::A(i) => Ok(attrs[*i]),
        TargetV::P(i) => Err(EvalError::UnboundParam(format!("#{i}"))),
        TargetV::I(n) => Ok(*n),
        TargetV::Add(a, b) => bin(ArithOp::Add, a, b),
        TargetV::Sub(a, b) => bin(ArithOp::Sub, a, b),
        TargetV::Mul(a, b) => bin(ArithOp::Mul, a, b),
        TargetV::Div(a, b) => bin(ArithOp::Div, a, b),
        TargetV::Mod(a, b) => bin(ArithOp::Mod, a, b),
    }
}

pub fn eval_b(attrs: &[Value], b: &TargetB) -> Result<bool, EvalError> {
    Ok(match b {
        TargetB::And(x, y) => {
            let (l, r) = (eval_b(attrs, x)?, eval_b(attrs, y)?);
            l && r
        }
        TargetB::Or(x, y) => {
            let (l, r) = (eval_b(attrs, x)?, eval_b(attrs, y)?);
            l || r
        }
        TargetB::Not(x) => !eval_b(attrs, x)?,
        TargetB::Eq(x, y) => eval_v(attrs, x)? == eval_v(attrs, y)?,
    })
}

/// One executed statement together with the objects it (re)activated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RtStep {
    pub object: Ref,
    pub rule: Rule,
    pub stmt: String,
    pub activated: Vec<Ref>,
    pub spawn: Option<Spawn>,
}

impl RtStep {
    pub fn label(&self) -> StepLabel {
        StepLabel { object: self.object, rule: self.rule, stmt: self.stmt.clone(), spawn: self.spawn.clone() }
    }
}

/// `[o_{n+1}..o_m] ++ [o_1..o_{n-1}] ++ l` where `o_n` is `o`.
pub fn updl(sched: &[Ref], o: Ref, l: &[Ref]) -> Vec<Ref> {
    let n = sched.iter().position(|&x| x == o).expect("object is scheduled");
    let mut out = Vec::with_capacity(sched.len() + l.len());
    out.extend_from_slice(&sched[n + 1..]);
    out.extend_from_slice(&sched[..n]);
    out.extend_from_slice(l);
    out
}

/// Rotation after `o` activates `y`: `y` is appended only if not already
/// scheduled.
pub fn newq_add(sched: &[Ref], o: Ref, y: Ref) -> Vec<Ref> {
    if sched.contains(&y) {
        updl(sched, o, &[o])
    } else {
        updl(sched, o, &[o, y])
    }
}

/// Rotation after a step on `o`; `o` is dropped if its queue is now empty.
pub fn newq_del<T>(sched: &[Ref], o: Ref, q: &VecDeque<T>) -> Vec<Ref> {
    if q.is_empty() {
        updl(sched, o, &[])
    } else {
        updl(sched, o, &[o])
    }
}

/// First scheduled object whose head process is not blocked.
pub fn next_object(heap: &RtHeap, sched: &[Ref]) -> Option<Ref> {
    sched.iter().copied().find(|&o| !heap.blocked(o))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RtConfig {
    pub heap: RtHeap,
    pub sched: Vec<Ref>,
}

impl RtConfig {
    /// Object 0 runs `main` towards future 1.
    pub fn load(table: Arc<MethodTable>) -> Result<RtConfig, RtError> {
        let main = table.methods.get_index(0).map(|(n, _)| n.clone()).unwrap_or_default();
        let body = table.instantiate(&main, &[], 0, WriteBack::Absent, &Arc::new(TargetStmt::Exit))?;
        let mut heap = RtHeap::new(table.clone(), INITIAL_CAPACITY);
        let attrs = vec![0; table.attr_count()];
        let o =
            heap.alloc(Cell::Object(ObjectCell { attrs, procq: VecDeque::from([Proc { stmt: body, destiny: 1 }]) }));
        heap.alloc(Cell::Future(FutureCell::Unresolved(Vec::new())));
        Ok(RtConfig { heap, sched: vec![o] })
    }

    /// Runs one scheduler turn. `None` when no scheduled object can move.
    pub fn step(&mut self) -> Result<Option<RtStep>, RtError> {
        let Some(o) = next_object(&self.heap, &self.sched) else { return Ok(None) };
        let s = self.heap.eval(o)?;
        self.sched = updl(&self.sched, o, &s.activated);
        Ok(Some(s))
    }
}

#[derive(Debug, Clone)]
pub struct RtTrace {
    pub steps: Vec<RtStep>,
    pub status: Termination,
    pub final_config: RtConfig,
}

impl RtTrace {
    pub fn labels(&self) -> Vec<StepLabel> {
        self.steps.iter().map(RtStep::label).collect()
    }
}

pub fn run_rt(mut config: RtConfig, fuel: usize) -> Result<RtTrace, RtError> {
    let mut steps = Vec::new();
    let status = loop {
        if next_object(&config.heap, &config.sched).is_none() {
            break if config.sched.is_empty() { Termination::Finished } else { Termination::Deadlock };
        }
        if steps.len() >= fuel {
            break Termination::FuelExhausted;
        }
        steps.push(config.step()?.expect("an object is ready"));
    };
    Ok(RtTrace { steps, status, final_config: config })
}
