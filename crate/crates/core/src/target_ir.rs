//! Continuation-passing statement trees executed by the runtime.
//!
//! Every statement carries its continuation `k`. The branch and body fields
//! of `If`/`While` are builders: trees whose spine ends in [`TargetStmt::Hole`]
//! instead of a continuation, completed by [`splice`].

use std::fmt;
use std::sync::Arc;

use indexmap::{IndexMap, IndexSet};
use thiserror::Error;

use crate::trace::{Ref, Value};

pub type AttrIdx = usize;

/// Shared pointer to a statement; continuations are shared, never copied.
pub type K = Arc<TargetStmt>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TargetV {
    A(AttrIdx),
    /// Formal parameter slot of the enclosing method.
    P(usize),
    I(Value),
    Add(Box<TargetV>, Box<TargetV>),
    Sub(Box<TargetV>, Box<TargetV>),
    Mul(Box<TargetV>, Box<TargetV>),
    Div(Box<TargetV>, Box<TargetV>),
    Mod(Box<TargetV>, Box<TargetV>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TargetB {
    And(Box<TargetB>, Box<TargetB>),
    Or(Box<TargetB>, Box<TargetB>),
    Not(Box<TargetB>),
    Eq(TargetV, TargetV),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TargetRhs {
    Val(TargetV),
    New,
    Get(AttrIdx),
    Async(AttrIdx, String, Vec<AttrIdx>),
    Sync(String, Vec<AttrIdx>),
}

/// Where a return delivers its value besides (or instead of) a future.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum WriteBack {
    /// Resolve the destiny future and end the process.
    Absent,
    /// Copy into an attribute of the running object and continue.
    To(AttrIdx),
    /// Placeholder in a method template, fixed at instantiation.
    Formal,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TargetStmt {
    Skip(K),
    Await(AttrIdx, K),
    Assign(AttrIdx, TargetRhs, K),
    If(TargetB, K, K, K),
    While(TargetB, K, K),
    Return(AttrIdx, WriteBack, K),
    /// End of an asynchronously spawned process; never executed.
    Exit,
    /// The open end of a builder or method template.
    Hole,
}

/// Constructor tag of a statement together with its non-continuation payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeadForm<'a> {
    Skip,
    Await(AttrIdx),
    Assign(AttrIdx, &'a TargetRhs),
    If(&'a TargetB),
    While(&'a TargetB),
    Return(AttrIdx, &'a WriteBack),
    Exit,
    Hole,
}

impl TargetStmt {
    pub fn head_form(&self) -> HeadForm<'_> {
        match self {
            TargetStmt::Skip(_) => HeadForm::Skip,
            TargetStmt::Await(f, _) => HeadForm::Await(*f),
            TargetStmt::Assign(x, rhs, _) => HeadForm::Assign(*x, rhs),
            TargetStmt::If(b, ..) => HeadForm::If(b),
            TargetStmt::While(b, ..) => HeadForm::While(b),
            TargetStmt::Return(x, wb, _) => HeadForm::Return(*x, wb),
            TargetStmt::Exit => HeadForm::Exit,
            TargetStmt::Hole => HeadForm::Hole,
        }
    }

    /// The continuation, for every constructor that has one.
    pub fn cont(&self) -> Option<&K> {
        match self {
            TargetStmt::Skip(k)
            | TargetStmt::Await(_, k)
            | TargetStmt::Assign(_, _, k)
            | TargetStmt::If(_, _, _, k)
            | TargetStmt::While(_, _, k)
            | TargetStmt::Return(_, _, k) => Some(k),
            TargetStmt::Exit | TargetStmt::Hole => None,
        }
    }

    fn with_cont(&self, k: K) -> TargetStmt {
        match self {
            TargetStmt::Skip(_) => TargetStmt::Skip(k),
            TargetStmt::Await(f, _) => TargetStmt::Await(*f, k),
            TargetStmt::Assign(x, rhs, _) => TargetStmt::Assign(*x, rhs.clone(), k),
            TargetStmt::If(b, t, e, _) => TargetStmt::If(b.clone(), t.clone(), e.clone(), k),
            TargetStmt::While(b, body, _) => TargetStmt::While(b.clone(), body.clone(), k),
            TargetStmt::Return(x, wb, _) => TargetStmt::Return(*x, wb.clone(), k),
            TargetStmt::Exit | TargetStmt::Hole => self.clone(),
        }
    }

    /// Statements along the spine, excluding the terminal `Exit`/`Hole`.
    pub fn spine_len(&self) -> usize {
        let mut n = 0;
        let mut cur = self;
        while let Some(k) = cur.cont() {
            n += 1;
            cur = k;
        }
        n
    }
}

/// Forces a builder: replaces the hole at the end of its spine with `k`.
/// Holes inside nested builders are left alone.
pub fn splice(builder: &K, k: &K) -> K {
    let mut spine = Vec::new();
    let mut cur = builder;
    loop {
        match &**cur {
            TargetStmt::Hole => break,
            TargetStmt::Exit => return builder.clone(),
            s => {
                spine.push(s);
                cur = s.cont().expect("non-terminal");
            }
        }
    }
    spine.into_iter().rev().fold(k.clone(), |acc, s| Arc::new(s.with_cont(acc)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledMethod {
    pub name: String,
    pub arity: usize,
    /// Compiled with parameter slots, `WriteBack::Formal` and a hole as the
    /// final continuation.
    pub body: K,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodTable {
    /// `main` first, then the remaining methods in declaration order.
    pub methods: IndexMap<String, CompiledMethod>,
    /// Attribute identifiers; the index of an identifier is its slot.
    pub layout: IndexSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstantiateError {
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
    #[error("method `{method}` takes {expected} argument(s), {found} given")]
    ArityMismatch { method: String, expected: usize, found: usize },
    #[error("method `{method}` refers to parameter slot {slot}")]
    DanglingParam { method: String, slot: usize },
}

impl MethodTable {
    pub fn attr_count(&self) -> usize {
        self.layout.len()
    }

    pub fn attr_index(&self, name: &str) -> Option<AttrIdx> {
        self.layout.get_index_of(name)
    }

    pub fn attr_name(&self, idx: AttrIdx) -> Option<&str> {
        self.layout.get_index(idx).map(|s| s.as_str())
    }

    /// Body of `m` with parameters bound to `args`, its return delivering to
    /// `wb` and continuing with `k`. `this` is accepted for parity with the
    /// method type but compiled bodies never mention it.
    pub fn instantiate(
        &self,
        m: &str,
        args: &[Value],
        _this: Ref,
        wb: WriteBack,
        k: &K,
    ) -> Result<K, InstantiateError> {
        let method = self.methods.get(m).ok_or_else(|| InstantiateError::UnknownMethod(m.to_string()))?;
        if method.arity != args.len() {
            return Err(InstantiateError::ArityMismatch {
                method: m.to_string(),
                expected: method.arity,
                found: args.len(),
            });
        }
        let inst = Instantiation { method: m, args, wb: &wb };
        inst.stmt(&method.body, Some(k))
    }
}

struct Instantiation<'a> {
    method: &'a str,
    args: &'a [Value],
    wb: &'a WriteBack,
}

impl Instantiation<'_> {
    /// `k` is `Some` on the spine of the method body and `None` inside
    /// builders, whose holes must survive.
    fn stmt(&self, s: &K, k: Option<&K>) -> Result<K, InstantiateError> {
        let mut spine = Vec::new();
        let mut cur = s;
        let tail = loop {
            match &**cur {
                TargetStmt::Hole => break k.cloned().unwrap_or_else(|| cur.clone()),
                TargetStmt::Exit => break cur.clone(),
                st => {
                    spine.push(st);
                    cur = st.cont().expect("non-terminal");
                }
            }
        };
        let mut acc = tail;
        for st in spine.into_iter().rev() {
            acc = Arc::new(match st {
                TargetStmt::Skip(_) => TargetStmt::Skip(acc),
                TargetStmt::Await(f, _) => TargetStmt::Await(*f, acc),
                TargetStmt::Assign(x, rhs, _) => TargetStmt::Assign(*x, self.rhs(rhs)?, acc),
                TargetStmt::If(b, t, e, _) => TargetStmt::If(self.b(b)?, self.stmt(t, None)?, self.stmt(e, None)?, acc),
                TargetStmt::While(b, body, _) => TargetStmt::While(self.b(b)?, self.stmt(body, None)?, acc),
                TargetStmt::Return(x, wb, _) => {
                    let wb = if *wb == WriteBack::Formal { self.wb.clone() } else { wb.clone() };
                    TargetStmt::Return(*x, wb, acc)
                }
                TargetStmt::Exit | TargetStmt::Hole => unreachable!(),
            });
        }
        Ok(acc)
    }

    fn rhs(&self, r: &TargetRhs) -> Result<TargetRhs, InstantiateError> {
        Ok(match r {
            TargetRhs::Val(v) => TargetRhs::Val(self.v(v)?),
            other => other.clone(),
        })
    }

    fn v(&self, v: &TargetV) -> Result<TargetV, InstantiateError> {
        let bin = |a: &TargetV, b: &TargetV| -> Result<(Box<TargetV>, Box<TargetV>), InstantiateError> {
            Ok((Box::new(self.v(a)?), Box::new(self.v(b)?)))
        };
        Ok(match v {
            TargetV::P(i) => match self.args.get(*i) {
                Some(val) => TargetV::I(*val),
                None => return Err(InstantiateError::DanglingParam { method: self.method.to_string(), slot: *i }),
            },
            TargetV::A(_) | TargetV::I(_) => v.clone(),
            TargetV::Add(a, b) => {
                let (a, b) = bin(a, b)?;
                TargetV::Add(a, b)
            }
            TargetV::Sub(a, b) => {
                let (a, b) = bin(a, b)?;
                TargetV::Sub(a, b)
            }
            TargetV::Mul(a, b) => {
                let (a, b) = bin(a, b)?;
                TargetV::Mul(a, b)
            }
            TargetV::Div(a, b) => {
                let (a, b) = bin(a, b)?;
                TargetV::Div(a, b)
            }
            TargetV::Mod(a, b) => {
                let (a, b) = bin(a, b)?;
                TargetV::Mod(a, b)
            }
        })
    }

    fn b(&self, b: &TargetB) -> Result<TargetB, InstantiateError> {
        Ok(match b {
            TargetB::And(x, y) => TargetB::And(Box::new(self.b(x)?), Box::new(self.b(y)?)),
            TargetB::Or(x, y) => TargetB::Or(Box::new(self.b(x)?), Box::new(self.b(y)?)),
            TargetB::Not(x) => TargetB::Not(Box::new(self.b(x)?)),
            TargetB::Eq(x, y) => TargetB::Eq(self.v(x)?, self.v(y)?),
        })
    }
}

impl fmt::Display for TargetV {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetV::A(i) => write!(f, "(A {i})"),
            TargetV::P(i) => write!(f, "(P {i})"),
            TargetV::I(v) => write!(f, "(I {v})"),
            TargetV::Add(a, b) => write!(f, "(Add {a} {b})"),
            TargetV::Sub(a, b) => write!(f, "(Sub {a} {b})"),
            TargetV::Mul(a, b) => write!(f, "(Mul {a} {b})"),
            TargetV::Div(a, b) => write!(f, "(Div {a} {b})"),
            TargetV::Mod(a, b) => write!(f, "(Mod {a} {b})"),
        }
    }
}

impl fmt::Display for TargetB {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetB::And(a, b) => write!(f, "(And {a} {b})"),
            TargetB::Or(a, b) => write!(f, "(Or {a} {b})"),
            TargetB::Not(a) => write!(f, "(Not {a})"),
            TargetB::Eq(a, b) => write!(f, "(Eq {a} {b})"),
        }
    }
}

fn idx_list(xs: &[AttrIdx]) -> String {
    let items: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
    format!("[{}]", items.join(" "))
}

impl fmt::Display for TargetRhs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetRhs::Val(v) => write!(f, "(Val {v})"),
            TargetRhs::New => f.write_str("New"),
            TargetRhs::Get(x) => write!(f, "(Get {x})"),
            TargetRhs::Async(o, m, args) => write!(f, "(Async {o} {m} {})", idx_list(args)),
            TargetRhs::Sync(m, args) => write!(f, "(Sync {m} {})", idx_list(args)),
        }
    }
}

impl fmt::Display for WriteBack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WriteBack::Absent => f.write_str("Nothing"),
            WriteBack::To(z) => write!(f, "(Just {z})"),
            WriteBack::Formal => f.write_str("wb"),
        }
    }
}

/// S-expression rendering. The spine is written iteratively, so deep
/// continuations do not grow the call stack.
impl fmt::Display for TargetStmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut open = 0;
        let mut cur = self;
        loop {
            match cur {
                TargetStmt::Exit => {
                    f.write_str("Exit")?;
                    break;
                }
                TargetStmt::Hole => {
                    f.write_str("_")?;
                    break;
                }
                TargetStmt::Skip(_) => f.write_str("(Skip ")?,
                TargetStmt::Await(x, _) => write!(f, "(Await {x} ")?,
                TargetStmt::Assign(x, rhs, _) => write!(f, "(Assign {x} {rhs} ")?,
                TargetStmt::If(b, t, e, _) => write!(f, "(If {b} {t} {e} ")?,
                TargetStmt::While(b, body, _) => write!(f, "(While {b} {body} ")?,
                TargetStmt::Return(x, wb, _) => write!(f, "(Return {x} {wb} ")?,
            }
            open += 1;
            cur = cur.cont().expect("non-terminal");
        }
        for _ in 0..open {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for MethodTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(layout")?;
        for (i, name) in self.layout.iter().enumerate() {
            write!(f, " ({name} {i})")?;
        }
        f.write_str(")\n")?;
        for m in self.methods.values() {
            writeln!(f, "(method {} {} {})", m.name, m.arity, m.body)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(s: TargetStmt) -> K {
        Arc::new(s)
    }

    fn hole() -> K {
        k(TargetStmt::Hole)
    }

    fn exit() -> K {
        k(TargetStmt::Exit)
    }

    #[test]
    fn head_forms() {
        let a = TargetStmt::Assign(3, TargetRhs::New, exit());
        assert_eq!(a.head_form(), HeadForm::Assign(3, &TargetRhs::New));
        assert_eq!(TargetStmt::Exit.head_form(), HeadForm::Exit);
        let b = TargetB::Eq(TargetV::I(0), TargetV::A(1));
        let w = TargetStmt::While(b.clone(), hole(), exit());
        assert_eq!(w.head_form(), HeadForm::While(&b));
    }

    #[test]
    fn splice_replaces_only_the_spine_hole() {
        let inner =
            TargetStmt::If(TargetB::Eq(TargetV::I(0), TargetV::I(0)), k(TargetStmt::Skip(hole())), hole(), hole());
        let builder = k(TargetStmt::Skip(k(inner)));
        let done = splice(&builder, &exit());
        let TargetStmt::Skip(next) = &*done else { panic!() };
        let TargetStmt::If(_, t, e, kk) = &**next else { panic!() };
        assert_eq!(**t, TargetStmt::Skip(hole()));
        assert_eq!(**e, TargetStmt::Hole);
        assert_eq!(**kk, TargetStmt::Exit);
    }

    #[test]
    fn dump_is_stable() {
        let s = TargetStmt::Assign(
            0,
            TargetRhs::Async(1, "m".into(), vec![2, 3]),
            k(TargetStmt::Return(4, WriteBack::To(5), exit())),
        );
        assert_eq!(s.to_string(), "(Assign 0 (Async 1 m [2 3]) (Return 4 (Just 5) Exit))");
    }

    fn table_with(name: &str, arity: usize, body: K) -> MethodTable {
        let mut methods = IndexMap::new();
        methods.insert(name.to_string(), CompiledMethod { name: name.to_string(), arity, body });
        MethodTable { methods, layout: IndexSet::from(["r".to_string()]) }
    }

    #[test]
    fn instantiate_binds_slots_writeback_and_continuation() {
        let body = k(TargetStmt::While(
            TargetB::Eq(TargetV::P(0), TargetV::A(0)),
            k(TargetStmt::Assign(
                0,
                TargetRhs::Val(TargetV::Add(Box::new(TargetV::P(0)), Box::new(TargetV::I(1)))),
                hole(),
            )),
            k(TargetStmt::Return(0, WriteBack::Formal, hole())),
        ));
        let t = table_with("m", 1, body);
        let out = t.instantiate("m", &[7], 2, WriteBack::Absent, &exit()).unwrap();
        let expected = TargetStmt::While(
            TargetB::Eq(TargetV::I(7), TargetV::A(0)),
            k(TargetStmt::Assign(
                0,
                TargetRhs::Val(TargetV::Add(Box::new(TargetV::I(7)), Box::new(TargetV::I(1)))),
                hole(),
            )),
            k(TargetStmt::Return(0, WriteBack::Absent, exit())),
        );
        assert_eq!(*out, expected);
        let again = t.instantiate("m", &[7], 2, WriteBack::Absent, &exit()).unwrap();
        assert_eq!(out, again);
    }

    #[test]
    fn instantiate_errors() {
        let t = table_with("m", 1, k(TargetStmt::Return(0, WriteBack::Formal, hole())));
        assert_eq!(
            t.instantiate("m", &[], 0, WriteBack::Absent, &exit()),
            Err(InstantiateError::ArityMismatch { method: "m".into(), expected: 1, found: 0 })
        );
        assert_eq!(
            t.instantiate("zz", &[], 0, WriteBack::Absent, &exit()),
            Err(InstantiateError::UnknownMethod("zz".into()))
        );
    }
}
