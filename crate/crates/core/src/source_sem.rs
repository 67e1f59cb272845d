//! Nondeterministic small-step semantics of source programs.
//!
//! A configuration is a set of per-object closure queues plus one global
//! heap. Any object whose head statement can move may be chosen; the choice
//! is delegated to a [`SchedulerPolicy`].

use std::collections::{BTreeMap, HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::parser::render_stmt;
use crate::source_lang::{mark_writeback, BoolExpr, Expr, MarkError, ReturnMark, SourceProgram, SourceStmt, ValueExpr};
use crate::trace::{Ref, Rule, Spawn, StepLabel, Termination, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("integer overflow")]
    Overflow,
    #[error("division by zero")]
    DivisionByZero,
    #[error("unbound parameter `{0}`")]
    UnboundParam(String),
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
}

pub(crate) fn arith(op: ArithOp, a: Value, b: Value) -> Result<Value, EvalError> {
    match op {
        ArithOp::Add => a.checked_add(b).ok_or(EvalError::Overflow),
        ArithOp::Sub => a.checked_sub(b).ok_or(EvalError::Overflow),
        ArithOp::Mul => a.checked_mul(b).ok_or(EvalError::Overflow),
        ArithOp::Div | ArithOp::Mod if b == 0 => Err(EvalError::DivisionByZero),
        ArithOp::Div => a.checked_div(b).ok_or(EvalError::Overflow),
        ArithOp::Mod => a.checked_rem(b).ok_or(EvalError::Overflow),
    }
}

/// Attribute values of one object. Absent attributes read as 0 and zero is
/// never stored, so two stores are equal iff they agree on every read.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct AttrStore(BTreeMap<String, Value>);

impl AttrStore {
    pub fn new() -> Self {
        AttrStore::default()
    }

    pub fn get(&self, attr: &str) -> Value {
        self.0.get(attr).copied().unwrap_or(0)
    }

    pub fn set(&mut self, attr: &str, v: Value) {
        if v == 0 {
            self.0.remove(attr);
        } else {
            self.0.insert(attr.to_string(), v);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Value)> {
        self.0.iter()
    }
}

impl FromIterator<(String, Value)> for AttrStore {
    fn from_iter<I: IntoIterator<Item = (String, Value)>>(iter: I) -> Self {
        let mut s = AttrStore::new();
        for (k, v) in iter {
            s.set(&k, v);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Heap {
    pub count: Ref,
    pub objects: BTreeMap<Ref, AttrStore>,
    /// `None` is an unresolved future.
    pub futures: BTreeMap<Ref, Option<Value>>,
}

impl Heap {
    pub fn store(&self, o: Ref) -> Option<&AttrStore> {
        self.objects.get(&o)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Closure {
    pub stmt: SourceStmt,
    pub destiny: Ref,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SourceConfig {
    /// Process queue of every object; the head is the active process.
    pub queues: BTreeMap<Ref, VecDeque<Closure>>,
    pub heap: Heap,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemError {
    #[error("unknown object {0}")]
    UnknownObject(Ref),
    #[error("object {0} cannot move")]
    NotEnabled(Ref),
    #[error("object {object}: attribute `{attr}` holds {value}, which is not a {expected} reference")]
    DanglingRef { object: Ref, attr: String, value: Value, expected: &'static str },
    #[error("object {object}: {source}")]
    Eval { object: Ref, source: EvalError },
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
    #[error("method `{method}` takes {expected} argument(s), {found} given")]
    ArityMismatch { method: String, expected: usize, found: usize },
    #[error("object {object}: malformed process: {reason}")]
    MalformedClosure { object: Ref, reason: String },
    #[error("future {0} resolved twice")]
    FutureRewrite(Ref),
}

impl From<MarkError> for SemError {
    fn from(e: MarkError) -> Self {
        SemError::MalformedClosure { object: -1, reason: e.to_string() }
    }
}

/// Evaluates a parameter-free value expression against a store.
pub fn eval_value(store: &AttrStore, v: &ValueExpr) -> Result<Value, EvalError> {
    Ok(match v {
        ValueExpr::Attr(x) => store.get(x),
        ValueExpr::Param(p) => return Err(EvalError::UnboundParam(p.clone())),
        ValueExpr::IntLit(i) => *i,
        ValueExpr::Add(a, b) => arith(ArithOp::Add, eval_value(store, a)?, eval_value(store, b)?)?,
        ValueExpr::Sub(a, b) => arith(ArithOp::Sub, eval_value(store, a)?, eval_value(store, b)?)?,
        ValueExpr::Mul(a, b) => arith(ArithOp::Mul, eval_value(store, a)?, eval_value(store, b)?)?,
        ValueExpr::Div(a, b) => arith(ArithOp::Div, eval_value(store, a)?, eval_value(store, b)?)?,
        ValueExpr::Mod(a, b) => arith(ArithOp::Mod, eval_value(store, a)?, eval_value(store, b)?)?,
    })
}

/// Strict evaluation: both operands of `&&`/`||` are always evaluated.
pub fn eval_bool(store: &AttrStore, b: &BoolExpr) -> Result<bool, EvalError> {
    Ok(match b {
        BoolExpr::And(x, y) => {
            let (l, r) = (eval_bool(store, x)?, eval_bool(store, y)?);
            l && r
        }
        BoolExpr::Or(x, y) => {
            let (l, r) = (eval_bool(store, x)?, eval_bool(store, y)?);
            l || r
        }
        BoolExpr::Not(x) => !eval_bool(store, x)?,
        BoolExpr::Eq(x, y) => eval_value(store, x)? == eval_value(store, y)?,
    })
}

/// Instantiates a method body with argument values and marks its return.
pub fn spawn_body(
    program: &SourceProgram,
    method: &str,
    args: &[Value],
    mark: ReturnMark,
) -> Result<SourceStmt, SemError> {
    let decl = program.method(method).ok_or_else(|| SemError::UnknownMethod(method.to_string()))?;
    if decl.params.len() != args.len() {
        return Err(SemError::ArityMismatch {
            method: method.to_string(),
            expected: decl.params.len(),
            found: args.len(),
        });
    }
    let env = |p: &str| decl.params.iter().position(|q| q == p).map(|i| args[i]);
    let body = decl.body.subst(&env).normalized();
    Ok(mark_writeback(&body, mark)?)
}

impl SourceConfig {
    /// Object 0 runs `main` towards future 1; the counter starts at 2.
    pub fn initial(program: &SourceProgram) -> Result<SourceConfig, SemError> {
        let main = mark_writeback(&program.main.normalized(), ReturnMark::Star)?;
        let mut queues = BTreeMap::new();
        queues.insert(0, VecDeque::from([Closure { stmt: main, destiny: 1 }]));
        let mut objects = BTreeMap::new();
        objects.insert(0, AttrStore::new());
        let mut futures = BTreeMap::new();
        futures.insert(1, None);
        Ok(SourceConfig { queues, heap: Heap { count: 2, objects, futures } })
    }

    fn store(&self, o: Ref) -> Result<&AttrStore, SemError> {
        self.heap.objects.get(&o).ok_or(SemError::UnknownObject(o))
    }

    fn future_of(&self, o: Ref, attr: &str) -> Result<(Ref, Option<Value>), SemError> {
        let f = self.store(o)?.get(attr);
        match self.heap.futures.get(&f) {
            Some(v) => Ok((f, *v)),
            None => Err(SemError::DanglingRef { object: o, attr: attr.to_string(), value: f, expected: "future" }),
        }
    }

    /// Whether some rule applies to the head statement of `o`.
    pub fn enabled(&self, o: Ref) -> Result<bool, SemError> {
        let q = self.queues.get(&o).ok_or(SemError::UnknownObject(o))?;
        let Some(head) = q.front() else { return Ok(false) };
        let first = match &head.stmt {
            SourceStmt::Seq(a, _) => first_atom(a),
            s => s,
        };
        if let SourceStmt::Assign(_, Expr::Get(f)) = first {
            // A dangling future is reported by `step`, so it counts as
            // enabled here.
            return Ok(match self.future_of(o, f) {
                Ok((_, v)) => v.is_some(),
                Err(_) => true,
            });
        }
        Ok(true)
    }

    pub fn enabled_objects(&self) -> Vec<Ref> {
        self.queues.keys().copied().filter(|&o| self.enabled(o).unwrap_or(false)).collect()
    }

    pub fn all_queues_empty(&self) -> bool {
        self.queues.values().all(|q| q.is_empty())
    }

    /// Applies one rule to the head of `o` and returns the successor.
    pub fn step(&self, program: &SourceProgram, o: Ref) -> Result<(SourceConfig, StepLabel), SemError> {
        let mut next = self.clone();
        let label = next.step_mut(program, o)?;
        Ok((next, label))
    }

    /// In-place variant of [`SourceConfig::step`]. On error the
    /// configuration is left unchanged.
    pub fn step_mut(&mut self, program: &SourceProgram, o: Ref) -> Result<StepLabel, SemError> {
        if !self.enabled(o)? {
            return Err(SemError::NotEnabled(o));
        }
        let closure = self.queues.get_mut(&o).and_then(|q| q.pop_front()).expect("enabled implies non-empty");
        match self.apply(program, o, closure.clone()) {
            Ok(label) => Ok(label),
            Err(e) => {
                self.queues.get_mut(&o).unwrap().push_front(closure);
                Err(e)
            }
        }
    }

    // `closure` has already been popped from the queue of `o`.
    fn apply(&mut self, program: &SourceProgram, o: Ref, closure: Closure) -> Result<StepLabel, SemError> {
        let Closure { stmt, destiny } = closure;
        let (head, rest) = stmt.split_head();
        let rendered = render_stmt(&head);
        let ev = |e: EvalError| SemError::Eval { object: o, source: e };
        let malformed = |reason: &str| SemError::MalformedClosure { object: o, reason: reason.to_string() };
        let label = |rule: Rule| StepLabel { object: o, rule, stmt: rendered.clone(), spawn: None };

        // Continue the same process with `next` as its statement.
        let continue_with = |cfg: &mut SourceConfig, next: Option<SourceStmt>| -> Result<(), SemError> {
            let stmt = next.ok_or_else(|| malformed("process ends without a return"))?;
            cfg.queues.get_mut(&o).unwrap().push_front(Closure { stmt, destiny });
            Ok(())
        };

        match head {
            SourceStmt::Assign(x, Expr::Val(v)) => {
                let val = eval_value(self.store(o)?, &v).map_err(ev)?;
                continue_with(self, rest)?;
                self.heap.objects.get_mut(&o).unwrap().set(&x, val);
                Ok(label(Rule::Assign))
            }
            SourceStmt::Assign(x, Expr::New) => {
                continue_with(self, rest)?;
                let fresh = self.heap.count;
                self.heap.objects.insert(fresh, AttrStore::new());
                self.queues.insert(fresh, VecDeque::new());
                self.heap.count += 1;
                self.heap.objects.get_mut(&o).unwrap().set(&x, fresh);
                Ok(label(Rule::New))
            }
            SourceStmt::Assign(x, Expr::Get(f)) => {
                let (_, v) = self.future_of(o, &f)?;
                let v = v.ok_or(SemError::NotEnabled(o))?;
                continue_with(self, rest)?;
                self.heap.objects.get_mut(&o).unwrap().set(&x, v);
                Ok(label(Rule::Get))
            }
            SourceStmt::Assign(x, Expr::SyncCall(m, args)) => {
                let store = self.store(o)?;
                let vals: Vec<Value> = args.iter().map(|a| store.get(a)).collect();
                let body = spawn_body(program, &m, &vals, ReturnMark::WriteBack(x))?;
                continue_with(self, Some(body.then(rest)))?;
                Ok(label(Rule::Sync))
            }
            SourceStmt::AsyncCall { fut, callee, method, args } => {
                let store = self.store(o)?;
                let d = store.get(&callee);
                if !self.heap.objects.contains_key(&d) {
                    return Err(SemError::DanglingRef { object: o, attr: callee, value: d, expected: "object" });
                }
                let vals: Vec<Value> = args.iter().map(|a| store.get(a)).collect();
                let body = spawn_body(program, &method, &vals, ReturnMark::Star)?;
                continue_with(self, rest)?;
                let l = self.heap.count;
                self.heap.count += 1;
                self.heap.futures.insert(l, None);
                self.heap.objects.get_mut(&o).unwrap().set(&fut, l);
                self.queues
                    .get_mut(&d)
                    .expect("every object has a queue")
                    .push_back(Closure { stmt: body, destiny: l });
                Ok(StepLabel {
                    object: o,
                    rule: Rule::Async,
                    stmt: rendered,
                    spawn: Some(Spawn { callee: d, method, destiny: l, args: vals }),
                })
            }
            SourceStmt::Await(f) => {
                let (_, v) = self.future_of(o, &f)?;
                if v.is_some() {
                    continue_with(self, rest)?;
                    Ok(label(Rule::AwaitI))
                } else {
                    let whole = SourceStmt::Await(f).then(rest);
                    self.queues.get_mut(&o).unwrap().push_back(Closure { stmt: whole, destiny });
                    Ok(label(Rule::AwaitII))
                }
            }
            SourceStmt::Skip => {
                continue_with(self, rest)?;
                Ok(label(Rule::Skip))
            }
            SourceStmt::Return(x, ReturnMark::Star) => {
                let v = self.store(o)?.get(&x);
                match self.heap.futures.get_mut(&destiny) {
                    Some(slot @ None) => *slot = Some(v),
                    Some(Some(_)) => return Err(SemError::FutureRewrite(destiny)),
                    None => return Err(malformed("destiny is not a future")),
                }
                Ok(label(Rule::ReturnA))
            }
            SourceStmt::Return(x, ReturnMark::WriteBack(z)) => {
                let v = self.store(o)?.get(&x);
                continue_with(self, rest)?;
                self.heap.objects.get_mut(&o).unwrap().set(&z, v);
                Ok(label(Rule::ReturnS))
            }
            SourceStmt::Return(_, ReturnMark::Unmarked) => Err(malformed("unmarked return at run time")),
            SourceStmt::If(b, t, e) => {
                let c = eval_bool(self.store(o)?, &b).map_err(ev)?;
                let branch = if c { *t } else { *e };
                continue_with(self, Some(branch.then(rest)))?;
                Ok(label(if c { Rule::IfT } else { Rule::IfF }))
            }
            SourceStmt::While(b, body) => {
                let c = eval_bool(self.store(o)?, &b).map_err(ev)?;
                if c {
                    let again = SourceStmt::While(b, body.clone());
                    continue_with(self, Some(body.then(Some(again.then(rest)))))?;
                    Ok(label(Rule::WhileT))
                } else {
                    continue_with(self, rest)?;
                    Ok(label(Rule::WhileF))
                }
            }
            SourceStmt::Seq(..) => unreachable!("split_head returns an atom"),
        }
    }
}

fn first_atom(s: &SourceStmt) -> &SourceStmt {
    match s {
        SourceStmt::Seq(a, _) => first_atom(a),
        other => other,
    }
}

/// Picks the next object among the enabled ones.
pub trait SchedulerPolicy {
    fn choose(&mut self, config: &SourceConfig, enabled: &[Ref], step: usize) -> Option<Ref>;
}

/// Uniform choice from a seeded generator.
pub struct RandomPolicy {
    rng: ChaCha8Rng,
}

impl RandomPolicy {
    pub fn new(seed: u64) -> Self {
        RandomPolicy { rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl SchedulerPolicy for RandomPolicy {
    fn choose(&mut self, _config: &SourceConfig, enabled: &[Ref], _step: usize) -> Option<Ref> {
        if enabled.is_empty() {
            None
        } else {
            Some(enabled[self.rng.gen_range(0..enabled.len())])
        }
    }
}

/// Cycles through objects by ascending reference.
#[derive(Default)]
pub struct RoundRobinPolicy {
    last: Option<Ref>,
}

impl SchedulerPolicy for RoundRobinPolicy {
    fn choose(&mut self, _config: &SourceConfig, enabled: &[Ref], _step: usize) -> Option<Ref> {
        let pick = match self.last {
            Some(l) => enabled.iter().copied().find(|&o| o > l).or_else(|| enabled.first().copied()),
            None => enabled.first().copied(),
        };
        self.last = pick.or(self.last);
        pick
    }
}

/// Replays a fixed object sequence; stops when the script runs out.
pub struct ScriptedPolicy {
    script: Vec<Ref>,
}

impl ScriptedPolicy {
    pub fn new(script: Vec<Ref>) -> Self {
        ScriptedPolicy { script }
    }
}

impl SchedulerPolicy for ScriptedPolicy {
    fn choose(&mut self, _config: &SourceConfig, _enabled: &[Ref], step: usize) -> Option<Ref> {
        self.script.get(step).copied()
    }
}

#[derive(Debug, Clone)]
pub struct SourceTrace {
    pub steps: Vec<StepLabel>,
    pub status: Termination,
    pub final_config: SourceConfig,
}

/// Runs `program` from its initial configuration until no object is
/// enabled, the policy declines to choose, or `fuel` steps were taken.
pub fn run(program: &SourceProgram, policy: &mut dyn SchedulerPolicy, fuel: usize) -> Result<SourceTrace, SemError> {
    run_from(SourceConfig::initial(program)?, program, policy, fuel)
}

pub fn run_from(
    mut config: SourceConfig,
    program: &SourceProgram,
    policy: &mut dyn SchedulerPolicy,
    fuel: usize,
) -> Result<SourceTrace, SemError> {
    let mut steps = Vec::new();
    let status = loop {
        let enabled = config.enabled_objects();
        if enabled.is_empty() {
            break if config.all_queues_empty() { Termination::Finished } else { Termination::Deadlock };
        }
        if steps.len() >= fuel {
            break Termination::FuelExhausted;
        }
        let Some(o) = policy.choose(&config, &enabled, steps.len()) else {
            break Termination::FuelExhausted;
        };
        steps.push(config.step_mut(program, o)?);
    };
    Ok(SourceTrace { steps, status, final_config: config })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerateError {
    #[error("more than {0} traces")]
    Explosion(usize),
    #[error(transparent)]
    Sem(#[from] SemError),
}

/// A maximal (or fuel-truncated) trace from exhaustive exploration.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EnumeratedTrace {
    pub steps: Vec<StepLabel>,
    pub status: Termination,
}

impl EnumeratedTrace {
    pub fn objects_and_rules(&self) -> Vec<(Ref, Rule)> {
        self.steps.iter().map(|s| (s.object, s.rule)).collect()
    }
}

/// Every trace obtainable by branching over all enabled objects at each
/// step, up to `fuel` steps, deduplicated by label sequence.
pub fn enumerate_traces(
    program: &SourceProgram,
    fuel: usize,
    max_traces: usize,
) -> Result<Vec<EnumeratedTrace>, EnumerateError> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut prefix = Vec::new();
    explore(program, SourceConfig::initial(program)?, fuel, max_traces, &mut prefix, &mut seen, &mut out)?;
    Ok(out)
}

fn explore(
    program: &SourceProgram,
    config: SourceConfig,
    fuel: usize,
    max: usize,
    prefix: &mut Vec<StepLabel>,
    seen: &mut HashSet<Vec<StepLabel>>,
    out: &mut Vec<EnumeratedTrace>,
) -> Result<(), EnumerateError> {
    let enabled = config.enabled_objects();
    let status = if enabled.is_empty() {
        Some(if config.all_queues_empty() { Termination::Finished } else { Termination::Deadlock })
    } else if prefix.len() >= fuel {
        Some(Termination::FuelExhausted)
    } else {
        None
    };
    if let Some(status) = status {
        if seen.insert(prefix.clone()) {
            if out.len() >= max {
                return Err(EnumerateError::Explosion(max));
            }
            out.push(EnumeratedTrace { steps: prefix.clone(), status });
        }
        return Ok(());
    }
    for o in enabled {
        let (next, label) = config.step(program, o)?;
        prefix.push(label);
        explore(program, next, fuel, max, prefix, seen, out)?;
        prefix.pop();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_program, SourceText};

    fn prog(s: &str) -> SourceProgram {
        parse_program(&SourceText::inline(s)).unwrap()
    }

    fn store(pairs: &[(&str, Value)]) -> AttrStore {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn eval_value_examples() {
        assert_eq!(eval_value(&store(&[]), &ValueExpr::add(ValueExpr::IntLit(2), ValueExpr::IntLit(3))), Ok(5));
        assert_eq!(eval_value(&store(&[("x", 7)]), &ValueExpr::sub(ValueExpr::attr("x"), ValueExpr::IntLit(7))), Ok(0));
        assert_eq!(eval_value(&store(&[]), &ValueExpr::attr("y")), Ok(0));
        assert_eq!(
            eval_value(&store(&[("x", i64::MAX)]), &ValueExpr::add(ValueExpr::attr("x"), ValueExpr::IntLit(1))),
            Err(EvalError::Overflow)
        );
        assert_eq!(
            eval_value(&store(&[]), &ValueExpr::rem(ValueExpr::IntLit(1), ValueExpr::attr("z"))),
            Err(EvalError::DivisionByZero)
        );
    }

    #[test]
    fn eval_bool_examples() {
        let s = store(&[("x", 3)]);
        assert_eq!(eval_bool(&s, &BoolExpr::eq(ValueExpr::IntLit(1), ValueExpr::IntLit(1))), Ok(true));
        assert_eq!(eval_bool(&s, &BoolExpr::not(BoolExpr::eq(ValueExpr::attr("x"), ValueExpr::attr("x")))), Ok(false));
        let t = BoolExpr::eq(ValueExpr::IntLit(0), ValueExpr::IntLit(0));
        let f = BoolExpr::eq(ValueExpr::IntLit(0), ValueExpr::IntLit(1));
        assert_eq!(eval_bool(&s, &BoolExpr::and(t, f)), Ok(false));
    }

    #[test]
    fn store_is_canonical() {
        let mut a = AttrStore::new();
        a.set("x", 0);
        assert_eq!(a, AttrStore::new());
        a.set("x", 5);
        a.set("x", 0);
        assert_eq!(a, AttrStore::new());
    }

    #[test]
    fn get_on_unresolved_future_is_disabled_but_await_is_enabled() {
        let p = prog("m() { r := 1; return r; } main() { o := new; f := o!m(); x := f.get; }");
        let mut c = SourceConfig::initial(&p).unwrap();
        c.step_mut(&p, 0).unwrap();
        c.step_mut(&p, 0).unwrap();
        assert_eq!(c.enabled(0), Ok(false));

        let q = prog("m() { r := 1; return r; } main() { o := new; f := o!m(); await f; }");
        let mut d = SourceConfig::initial(&q).unwrap();
        d.step_mut(&q, 0).unwrap();
        d.step_mut(&q, 0).unwrap();
        assert_eq!(d.enabled(0), Ok(true));
        let label = d.step_mut(&q, 0).unwrap();
        assert_eq!(label.rule, Rule::AwaitII);
        // the awaiting process went to the back of the (single-element) queue
        assert_eq!(d.queues[&0].len(), 1);
    }

    #[test]
    fn empty_queue_is_disabled() {
        let p = prog("main() { o := new; }");
        let mut c = SourceConfig::initial(&p).unwrap();
        c.step_mut(&p, 0).unwrap();
        assert_eq!(c.enabled(2), Ok(false));
        assert_eq!(c.enabled(99), Err(SemError::UnknownObject(99)));
    }

    #[test]
    fn await_two_rotates_behind_other_processes() {
        let p = prog(
            "slow() { r := 1; return r; } wait(o) { x := o; f := x!slow(); await f; return x; } \
             poke() { y := 2; return y; } \
             main() { a := new; b := new; f := a!wait(b); g := a!poke(); }",
        );
        // main: new, new, async, async
        let mut c = SourceConfig::initial(&p).unwrap();
        for _ in 0..4 {
            c.step_mut(&p, 0).unwrap();
        }
        let a = 2;
        // wait: x := o; f := x!slow(); await f (unresolved)
        c.step_mut(&p, a).unwrap();
        c.step_mut(&p, a).unwrap();
        let l = c.step_mut(&p, a).unwrap();
        assert_eq!(l.rule, Rule::AwaitII);
        let q = &c.queues[&a];
        assert_eq!(q.len(), 2);
        assert!(render_stmt(&q[0].stmt).starts_with("y := 2;"));
        assert!(render_stmt(&q[1].stmt).starts_with("await f;"));
    }

    #[test]
    fn new_allocates_fresh_reference() {
        let p = prog("main() { x := new; }");
        let c = SourceConfig::initial(&p).unwrap();
        let (d, l) = c.step(&p, 0).unwrap();
        assert_eq!(l.rule, Rule::New);
        assert_eq!(d.heap.objects[&0].get("x"), 2);
        assert_eq!(d.heap.objects[&2], AttrStore::new());
        assert_eq!(d.heap.count, 3);
    }

    #[test]
    fn async_creates_future_and_appends_closure() {
        let p = prog("m(a) { r := a; return r; } main() { x := new; v := 5; f := x!m(v); }");
        let mut c = SourceConfig::initial(&p).unwrap();
        c.step_mut(&p, 0).unwrap();
        c.step_mut(&p, 0).unwrap();
        let l = c.step_mut(&p, 0).unwrap();
        assert_eq!(l.spawn, Some(Spawn { callee: 2, method: "m".into(), destiny: 3, args: vec![5] }));
        assert_eq!(c.heap.futures[&3], None);
        assert_eq!(c.heap.objects[&0].get("f"), 3);
        assert_eq!(c.heap.count, 4);
        let q = &c.queues[&2];
        assert_eq!(q.len(), 1);
        assert_eq!(render_stmt(&q[0].stmt), "r := 5; return* r;");
        assert_eq!(q[0].destiny, 3);
    }

    #[test]
    fn dangling_references_are_errors() {
        let p = prog("m() { r := 1; return r; } main() { x := 7; f := x!m(); }");
        let mut c = SourceConfig::initial(&p).unwrap();
        c.step_mut(&p, 0).unwrap();
        let before = c.clone();
        assert!(matches!(c.step_mut(&p, 0), Err(SemError::DanglingRef { .. })));
        assert_eq!(c, before);
        let q = prog("main() { await g; }");
        let mut d = SourceConfig::initial(&q).unwrap();
        assert!(matches!(d.step_mut(&q, 0), Err(SemError::DanglingRef { .. })));
    }

    #[test]
    fn trivial_main_finishes_in_one_step() {
        let p = prog("main() { return __unit; }");
        let t = run(&p, &mut RandomPolicy::new(0), 100).unwrap();
        assert_eq!(t.status, Termination::Finished);
        assert_eq!(t.steps.len(), 1);
        assert_eq!(t.steps[0].rule, Rule::ReturnA);
        assert_eq!(t.final_config.heap.futures[&1], Some(0));
    }

    #[test]
    fn sync_call_writes_back() {
        let p = prog("inc(a) { s := a + 1; return s; } main() { x := 41; y := inc(x); }");
        let t = run(&p, &mut RoundRobinPolicy::default(), 100).unwrap();
        let rules: Vec<Rule> = t.steps.iter().map(|s| s.rule).collect();
        assert_eq!(rules, vec![Rule::Assign, Rule::Sync, Rule::Assign, Rule::ReturnS, Rule::ReturnA]);
        assert_eq!(t.final_config.heap.objects[&0].get("y"), 42);
    }

    #[test]
    fn enumerate_single_object_has_one_trace() {
        let p = prog("main() { x := 1; while (!(x == 3)) { x := x + 1; } }");
        let ts = enumerate_traces(&p, 100, 10).unwrap();
        assert_eq!(ts.len(), 1);
        assert_eq!(ts[0].status, Termination::Finished);
    }

    #[test]
    fn enumerate_with_zero_fuel_yields_empty_trace() {
        let p = prog("main() { skip; }");
        let ts = enumerate_traces(&p, 0, 10).unwrap();
        assert_eq!(ts, vec![EnumeratedTrace { steps: vec![], status: Termination::FuelExhausted }]);
    }

    #[test]
    fn enumerate_interleavings_of_two_objects() {
        // After the spawn, main has 2 statements left (skip, return*) and the
        // callee 3 (two assignments, return*): C(5,2) = 10 interleavings.
        let p = prog("m() { a := 1; b := 2; return b; } main() { o := new; f := o!m(); skip; }");
        let ts = enumerate_traces(&p, 100, 100).unwrap();
        assert_eq!(ts.len(), 10);
        assert!(ts.iter().all(|t| t.status == Termination::Finished && t.steps.len() == 7));
    }

    #[test]
    fn enumerate_explosion() {
        let p = prog("m() { a := 1; b := 2; return b; } main() { o := new; f := o!m(); skip; }");
        assert_eq!(enumerate_traces(&p, 100, 3), Err(EnumerateError::Explosion(3)));
    }
}
