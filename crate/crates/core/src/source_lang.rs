//! Abstract syntax of the source actor language, structural validation and
//! the write-back marking of method returns.

use std::collections::BTreeSet;
use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

/// Attribute implicitly returned by `main`.
pub const UNIT_ATTR: &str = "__unit";

/// Name of the entry method.
pub const MAIN: &str = "main";

/// Integer-valued expressions. References are integers too.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ValueExpr {
    Attr(String),
    Param(String),
    IntLit(i64),
    Add(Box<ValueExpr>, Box<ValueExpr>),
    Sub(Box<ValueExpr>, Box<ValueExpr>),
    Mul(Box<ValueExpr>, Box<ValueExpr>),
    Div(Box<ValueExpr>, Box<ValueExpr>),
    Mod(Box<ValueExpr>, Box<ValueExpr>),
}

#[allow(clippy::should_implement_trait)]
impl ValueExpr {
    pub fn attr(name: &str) -> Self {
        ValueExpr::Attr(name.to_string())
    }

    pub fn param(name: &str) -> Self {
        ValueExpr::Param(name.to_string())
    }

    pub fn add(a: ValueExpr, b: ValueExpr) -> Self {
        ValueExpr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: ValueExpr, b: ValueExpr) -> Self {
        ValueExpr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: ValueExpr, b: ValueExpr) -> Self {
        ValueExpr::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: ValueExpr, b: ValueExpr) -> Self {
        ValueExpr::Div(Box::new(a), Box::new(b))
    }

    pub fn rem(a: ValueExpr, b: ValueExpr) -> Self {
        ValueExpr::Mod(Box::new(a), Box::new(b))
    }

    /// Replaces every parameter by the literal it is bound to.
    pub fn subst(&self, env: &dyn Fn(&str) -> Option<i64>) -> ValueExpr {
        use ValueExpr::*;
        match self {
            Param(p) => match env(p) {
                Some(v) => IntLit(v),
                None => self.clone(),
            },
            Attr(_) | IntLit(_) => self.clone(),
            Add(a, b) => Add(Box::new(a.subst(env)), Box::new(b.subst(env))),
            Sub(a, b) => Sub(Box::new(a.subst(env)), Box::new(b.subst(env))),
            Mul(a, b) => Mul(Box::new(a.subst(env)), Box::new(b.subst(env))),
            Div(a, b) => Div(Box::new(a.subst(env)), Box::new(b.subst(env))),
            Mod(a, b) => Mod(Box::new(a.subst(env)), Box::new(b.subst(env))),
        }
    }

    fn visit(&self, f: &mut dyn FnMut(&ValueExpr)) {
        f(self);
        match self {
            ValueExpr::Add(a, b)
            | ValueExpr::Sub(a, b)
            | ValueExpr::Mul(a, b)
            | ValueExpr::Div(a, b)
            | ValueExpr::Mod(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BoolExpr {
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
    Not(Box<BoolExpr>),
    Eq(ValueExpr, ValueExpr),
}

impl BoolExpr {
    pub fn and(a: BoolExpr, b: BoolExpr) -> Self {
        BoolExpr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: BoolExpr, b: BoolExpr) -> Self {
        BoolExpr::Or(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: BoolExpr) -> Self {
        BoolExpr::Not(Box::new(a))
    }

    pub fn eq(a: ValueExpr, b: ValueExpr) -> Self {
        BoolExpr::Eq(a, b)
    }

    pub fn subst(&self, env: &dyn Fn(&str) -> Option<i64>) -> BoolExpr {
        match self {
            BoolExpr::And(a, b) => BoolExpr::and(a.subst(env), b.subst(env)),
            BoolExpr::Or(a, b) => BoolExpr::or(a.subst(env), b.subst(env)),
            BoolExpr::Not(a) => BoolExpr::not(a.subst(env)),
            BoolExpr::Eq(a, b) => BoolExpr::Eq(a.subst(env), b.subst(env)),
        }
    }

    fn visit_values(&self, f: &mut dyn FnMut(&ValueExpr)) {
        match self {
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) => {
                a.visit_values(f);
                b.visit_values(f);
            }
            BoolExpr::Not(a) => a.visit_values(f),
            BoolExpr::Eq(a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }
}

/// Right-hand sides of `x := E`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Val(ValueExpr),
    New,
    Get(String),
    SyncCall(String, Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ReturnMark {
    Unmarked,
    /// `return* x`: ends an asynchronous invocation.
    Star,
    /// `return[z] x`: ends a synchronous invocation writing into `z`.
    WriteBack(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SourceStmt {
    Assign(String, Expr),
    AsyncCall { fut: String, callee: String, method: String, args: Vec<String> },
    Await(String),
    Skip,
    Return(String, ReturnMark),
    Seq(Box<SourceStmt>, Box<SourceStmt>),
    If(BoolExpr, Box<SourceStmt>, Box<SourceStmt>),
    While(BoolExpr, Box<SourceStmt>),
}

impl SourceStmt {
    pub fn assign(x: &str, e: Expr) -> Self {
        SourceStmt::Assign(x.to_string(), e)
    }

    pub fn async_call(fut: &str, callee: &str, method: &str, args: &[&str]) -> Self {
        SourceStmt::AsyncCall {
            fut: fut.to_string(),
            callee: callee.to_string(),
            method: method.to_string(),
            args: args.iter().map(|a| a.to_string()).collect(),
        }
    }

    pub fn ret(x: &str) -> Self {
        SourceStmt::Return(x.to_string(), ReturnMark::Unmarked)
    }

    pub fn if_else(b: BoolExpr, t: SourceStmt, e: SourceStmt) -> Self {
        SourceStmt::If(b, Box::new(t), Box::new(e))
    }

    pub fn while_loop(b: BoolExpr, body: SourceStmt) -> Self {
        SourceStmt::While(b, Box::new(body))
    }

    /// Builds the right-nested sequence of `stmts`. Nested sequences in the
    /// input are flattened first. Returns `None` for an empty list.
    pub fn seq(stmts: Vec<SourceStmt>) -> Option<SourceStmt> {
        let mut atoms = Vec::with_capacity(stmts.len());
        for s in stmts {
            s.flatten_into(&mut atoms);
        }
        let mut iter = atoms.into_iter().rev();
        let last = iter.next()?;
        Some(iter.fold(last, |acc, s| SourceStmt::Seq(Box::new(s), Box::new(acc))))
    }

    /// Appends `rest` after `self`, keeping the sequence right-nested.
    pub fn then(self, rest: Option<SourceStmt>) -> SourceStmt {
        match rest {
            None => self,
            Some(r) => SourceStmt::seq(vec![self, r]).expect("non-empty"),
        }
    }

    pub fn flatten_into(self, out: &mut Vec<SourceStmt>) {
        match self {
            SourceStmt::Seq(a, b) => {
                a.flatten_into(out);
                b.flatten_into(out);
            }
            other => out.push(other),
        }
    }

    /// The top-level statements of a sequence, in order.
    pub fn atoms(&self) -> Vec<&SourceStmt> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                SourceStmt::Seq(a, b) => {
                    out.extend(a.atoms());
                    cur = b;
                }
                other => {
                    out.push(other);
                    return out;
                }
            }
        }
    }

    /// Splits a sequence into its first atomic statement and the remainder.
    pub fn split_head(self) -> (SourceStmt, Option<SourceStmt>) {
        match self {
            SourceStmt::Seq(a, b) => {
                let (h, r) = a.split_head();
                match r {
                    None => (h, Some(*b)),
                    Some(r) => (h, Some(r.then(Some(*b)))),
                }
            }
            other => (other, None),
        }
    }

    /// Re-nests every sequence (including those inside branches and loop
    /// bodies) to the right.
    pub fn normalized(&self) -> SourceStmt {
        let atoms: Vec<SourceStmt> = self
            .atoms()
            .into_iter()
            .map(|a| match a {
                SourceStmt::If(b, t, e) => SourceStmt::if_else(b.clone(), t.normalized(), e.normalized()),
                SourceStmt::While(b, body) => SourceStmt::while_loop(b.clone(), body.normalized()),
                other => other.clone(),
            })
            .collect();
        SourceStmt::seq(atoms).expect("non-empty")
    }

    /// Applies a parameter substitution everywhere in the statement.
    pub fn subst(&self, env: &dyn Fn(&str) -> Option<i64>) -> SourceStmt {
        use SourceStmt::*;
        match self {
            Assign(x, Expr::Val(v)) => Assign(x.clone(), Expr::Val(v.subst(env))),
            Assign(..) | AsyncCall { .. } | Await(_) | Skip | Return(..) => self.clone(),
            Seq(a, b) => Seq(Box::new(a.subst(env)), Box::new(b.subst(env))),
            If(c, t, e) => If(c.subst(env), Box::new(t.subst(env)), Box::new(e.subst(env))),
            While(c, body) => While(c.subst(env), Box::new(body.subst(env))),
        }
    }

    /// Number of atomic statements, counting nested bodies.
    pub fn size(&self) -> usize {
        match self {
            SourceStmt::Seq(a, b) => a.size() + b.size(),
            SourceStmt::If(_, t, e) => 1 + t.size() + e.size(),
            SourceStmt::While(_, body) => 1 + body.size(),
            _ => 1,
        }
    }

    fn visit(&self, f: &mut dyn FnMut(&SourceStmt)) {
        f(self);
        match self {
            SourceStmt::Seq(a, b) | SourceStmt::If(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            SourceStmt::While(_, body) => body.visit(f),
            _ => {}
        }
    }

    /// Attribute identifiers in order of first textual occurrence.
    pub fn attributes_in_order(&self, out: &mut Vec<String>) {
        fn push(out: &mut Vec<String>, name: &str) {
            if !out.iter().any(|n| n == name) {
                out.push(name.to_string());
            }
        }
        fn push_value(out: &mut Vec<String>, v: &ValueExpr) {
            v.visit(&mut |e| {
                if let ValueExpr::Attr(a) = e {
                    push(out, a);
                }
            });
        }
        fn push_bool(out: &mut Vec<String>, b: &BoolExpr) {
            match b {
                BoolExpr::And(x, y) | BoolExpr::Or(x, y) => {
                    push_bool(out, x);
                    push_bool(out, y);
                }
                BoolExpr::Not(x) => push_bool(out, x),
                BoolExpr::Eq(x, y) => {
                    push_value(out, x);
                    push_value(out, y);
                }
            }
        }
        match self {
            SourceStmt::Assign(x, e) => {
                push(out, x);
                match e {
                    Expr::Val(v) => push_value(out, v),
                    Expr::New => {}
                    Expr::Get(f) => push(out, f),
                    Expr::SyncCall(_, args) => args.iter().for_each(|a| push(out, a)),
                }
            }
            SourceStmt::AsyncCall { fut, callee, args, .. } => {
                push(out, fut);
                push(out, callee);
                args.iter().for_each(|a| push(out, a));
            }
            SourceStmt::Await(f) => push(out, f),
            SourceStmt::Skip => {}
            SourceStmt::Return(x, mark) => {
                push(out, x);
                if let ReturnMark::WriteBack(z) = mark {
                    push(out, z);
                }
            }
            SourceStmt::Seq(a, b) => {
                a.attributes_in_order(out);
                b.attributes_in_order(out);
            }
            SourceStmt::If(c, t, e) => {
                push_bool(out, c);
                t.attributes_in_order(out);
                e.attributes_in_order(out);
            }
            SourceStmt::While(c, body) => {
                push_bool(out, c);
                body.attributes_in_order(out);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodDecl {
    pub name: String,
    pub params: Vec<String>,
    pub body: SourceStmt,
}

impl MethodDecl {
    pub fn new(name: &str, params: &[&str], body: SourceStmt) -> Self {
        MethodDecl { name: name.to_string(), params: params.iter().map(|p| p.to_string()).collect(), body }
    }
}

/// A whole program. `methods` keeps declaration order; `main` already ends
/// in a return (the parser appends `return __unit` when the text omits it).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceProgram {
    pub methods: IndexMap<String, MethodDecl>,
    pub main: SourceStmt,
}

impl SourceProgram {
    pub fn new(methods: Vec<MethodDecl>, main: SourceStmt) -> Self {
        SourceProgram { methods: methods.into_iter().map(|m| (m.name.clone(), m)).collect(), main }
    }

    /// Builds a program, appending `return __unit` to `main` if it lacks a
    /// final return.
    pub fn with_implicit_return(methods: Vec<MethodDecl>, main: Vec<SourceStmt>) -> Self {
        let mut main = main;
        let ends_in_return =
            matches!(main.last().map(|s| s.atoms().last().copied().cloned()), Some(Some(SourceStmt::Return(..))));
        if !ends_in_return {
            main.push(SourceStmt::ret(UNIT_ATTR));
        }
        SourceProgram::new(methods, SourceStmt::seq(main).expect("main is non-empty"))
    }

    pub fn method(&self, name: &str) -> Option<&MethodDecl> {
        self.methods.get(name)
    }

    /// `main` viewed as a parameterless method.
    pub fn main_decl(&self) -> MethodDecl {
        MethodDecl { name: MAIN.to_string(), params: Vec::new(), body: self.main.clone() }
    }

    /// Attribute identifiers of the whole program: `main` first, then the
    /// methods in declaration order; first occurrence wins.
    pub fn attribute_order(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.main.attributes_in_order(&mut out);
        for m in self.methods.values() {
            m.body.attributes_in_order(&mut out);
        }
        out
    }

    pub fn size(&self) -> usize {
        self.main.size() + self.methods.values().map(|m| m.body.size()).sum::<usize>()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MarkError {
    #[error("method body has no return")]
    MissingReturn,
    #[error("return is not the final statement")]
    ReturnNotFinal,
    #[error("final return is already marked")]
    AlreadyMarked,
}

/// Replaces the mark of the final (unmarked) return of `body` with `mark`.
pub fn mark_writeback(body: &SourceStmt, mark: ReturnMark) -> Result<SourceStmt, MarkError> {
    match mark_final(body, mark) {
        Err(MarkError::MissingReturn) => {
            let mut has_return = false;
            body.visit(&mut |s| has_return |= matches!(s, SourceStmt::Return(..)));
            Err(if has_return { MarkError::ReturnNotFinal } else { MarkError::MissingReturn })
        }
        r => r,
    }
}

fn mark_final(body: &SourceStmt, mark: ReturnMark) -> Result<SourceStmt, MarkError> {
    match body {
        SourceStmt::Seq(first, rest) => Ok(SourceStmt::Seq(first.clone(), Box::new(mark_final(rest, mark)?))),
        SourceStmt::Return(x, ReturnMark::Unmarked) => Ok(SourceStmt::Return(x.clone(), mark)),
        SourceStmt::Return(..) => Err(MarkError::AlreadyMarked),
        other => {
            let mut has_return = false;
            other.visit(&mut |s| has_return |= matches!(s, SourceStmt::Return(..)));
            Err(if has_return { MarkError::ReturnNotFinal } else { MarkError::MissingReturn })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Diagnostic {
    UnknownMethod { method: String, name: String },
    ArityMismatch { method: String, callee: String, expected: usize, found: usize },
    AssignToParam { method: String, param: String },
    ParamAsAttribute { method: String, param: String },
    UnknownParam { method: String, param: String },
    DuplicateParam { method: String, param: String },
    MissingReturn { method: String },
    MultipleReturns { method: String },
    ReturnNotFinal { method: String },
    MarkedReturnInSource { method: String },
    ReservedMethodName { name: String },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Diagnostic::*;
        match self {
            UnknownMethod { method, name } => write!(f, "{method}: call to unknown method `{name}`"),
            ArityMismatch { method, callee, expected, found } => {
                write!(f, "{method}: `{callee}` takes {expected} argument(s), {found} given")
            }
            AssignToParam { method, param } => write!(f, "{method}: assignment to parameter `{param}`"),
            ParamAsAttribute { method, param } => {
                write!(f, "{method}: parameter `{param}` used where an attribute is required")
            }
            UnknownParam { method, param } => write!(f, "{method}: unknown parameter `{param}`"),
            DuplicateParam { method, param } => write!(f, "{method}: duplicate parameter `{param}`"),
            MissingReturn { method } => write!(f, "{method}: missing return"),
            MultipleReturns { method } => write!(f, "{method}: more than one return"),
            ReturnNotFinal { method } => write!(f, "{method}: return is not the final statement"),
            MarkedReturnInSource { method } => write!(f, "{method}: marked return in program text"),
            ReservedMethodName { name } => write!(f, "method name `{name}` is reserved"),
        }
    }
}

/// Checks the structural invariants of a program. An empty result means the
/// program is valid.
pub fn validate(program: &SourceProgram) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    if program.methods.contains_key(MAIN) {
        diags.push(Diagnostic::ReservedMethodName { name: MAIN.to_string() });
    }
    validate_method(program, &program.main_decl(), &mut diags);
    for m in program.methods.values() {
        validate_method(program, m, &mut diags);
    }
    diags
}

fn validate_method(program: &SourceProgram, m: &MethodDecl, diags: &mut Vec<Diagnostic>) {
    let name = m.name.clone();
    let mut seen = BTreeSet::new();
    for p in &m.params {
        if !seen.insert(p.as_str()) {
            diags.push(Diagnostic::DuplicateParam { method: name.clone(), param: p.clone() });
        }
    }
    let is_param = |id: &str| m.params.iter().any(|p| p == id);

    let mut returns = 0usize;
    m.body.visit(&mut |s| {
        let attr_slot = |id: &String, d: &mut Vec<Diagnostic>| {
            if is_param(id) {
                d.push(Diagnostic::ParamAsAttribute { method: name.clone(), param: id.clone() });
            }
        };
        let check_call = |callee: &String, args: &Vec<String>, d: &mut Vec<Diagnostic>| match program.method(callee) {
            None => d.push(Diagnostic::UnknownMethod { method: name.clone(), name: callee.clone() }),
            Some(decl) if decl.params.len() != args.len() => d.push(Diagnostic::ArityMismatch {
                method: name.clone(),
                callee: callee.clone(),
                expected: decl.params.len(),
                found: args.len(),
            }),
            Some(_) => {}
        };
        let check_value = |v: &ValueExpr, d: &mut Vec<Diagnostic>| {
            v.visit(&mut |e| match e {
                ValueExpr::Param(p) if !is_param(p) => {
                    d.push(Diagnostic::UnknownParam { method: name.clone(), param: p.clone() })
                }
                ValueExpr::Attr(a) if is_param(a) => {
                    d.push(Diagnostic::ParamAsAttribute { method: name.clone(), param: a.clone() })
                }
                _ => {}
            })
        };
        match s {
            SourceStmt::Assign(x, e) => {
                if is_param(x) {
                    diags.push(Diagnostic::AssignToParam { method: name.clone(), param: x.clone() });
                }
                match e {
                    Expr::Val(v) => check_value(v, diags),
                    Expr::New => {}
                    Expr::Get(f) => attr_slot(f, diags),
                    Expr::SyncCall(callee, args) => {
                        check_call(callee, args, diags);
                        args.iter().for_each(|a| attr_slot(a, diags));
                    }
                }
            }
            SourceStmt::AsyncCall { fut, callee, method, args } => {
                if is_param(fut) {
                    diags.push(Diagnostic::AssignToParam { method: name.clone(), param: fut.clone() });
                }
                attr_slot(callee, diags);
                check_call(method, args, diags);
                args.iter().for_each(|a| attr_slot(a, diags));
            }
            SourceStmt::Await(f) => attr_slot(f, diags),
            SourceStmt::Return(x, mark) => {
                returns += 1;
                attr_slot(x, diags);
                if *mark != ReturnMark::Unmarked {
                    diags.push(Diagnostic::MarkedReturnInSource { method: name.clone() });
                }
            }
            SourceStmt::If(c, ..) | SourceStmt::While(c, _) => {
                c.visit_values(&mut |v| check_value(v, diags));
            }
            SourceStmt::Skip | SourceStmt::Seq(..) => {}
        }
    });

    let final_is_return = matches!(m.body.atoms().last(), Some(SourceStmt::Return(..)));
    match returns {
        0 => diags.push(Diagnostic::MissingReturn { method: name }),
        1 if final_is_return => {}
        1 => diags.push(Diagnostic::ReturnNotFinal { method: name }),
        _ => {
            diags.push(Diagnostic::MultipleReturns { method: name.clone() });
            if !final_is_return {
                diags.push(Diagnostic::ReturnNotFinal { method: name });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(v: Vec<SourceStmt>) -> SourceStmt {
        SourceStmt::seq(v).unwrap()
    }

    #[test]
    fn mark_single_return() {
        let marked = mark_writeback(&SourceStmt::ret("z"), ReturnMark::WriteBack("x".into())).unwrap();
        assert_eq!(marked, SourceStmt::Return("z".into(), ReturnMark::WriteBack("x".into())));
    }

    #[test]
    fn mark_recurses_on_second_component() {
        let body = seq(vec![SourceStmt::Skip, SourceStmt::ret("z")]);
        let marked = mark_writeback(&body, ReturnMark::Star).unwrap();
        assert_eq!(marked, seq(vec![SourceStmt::Skip, SourceStmt::Return("z".into(), ReturnMark::Star)]));
    }

    #[test]
    fn mark_leaves_loops_untouched() {
        let lp = SourceStmt::while_loop(BoolExpr::eq(ValueExpr::attr("b"), ValueExpr::IntLit(1)), SourceStmt::Skip);
        let body = seq(vec![lp.clone(), SourceStmt::ret("z")]);
        let marked = mark_writeback(&body, ReturnMark::WriteBack("x".into())).unwrap();
        assert_eq!(marked, seq(vec![lp, SourceStmt::Return("z".into(), ReturnMark::WriteBack("x".into()))]));
    }

    #[test]
    fn mark_errors() {
        assert_eq!(mark_writeback(&SourceStmt::Skip, ReturnMark::Star), Err(MarkError::MissingReturn));
        let body = seq(vec![SourceStmt::ret("z"), SourceStmt::Skip]);
        assert_eq!(mark_writeback(&body, ReturnMark::Star), Err(MarkError::ReturnNotFinal));
        let once = mark_writeback(&SourceStmt::ret("z"), ReturnMark::Star).unwrap();
        assert_eq!(mark_writeback(&once, ReturnMark::Star), Err(MarkError::AlreadyMarked));
    }

    #[test]
    fn validate_missing_return() {
        let p = SourceProgram::with_implicit_return(vec![MethodDecl::new("m", &[], SourceStmt::Skip)], vec![]);
        assert_eq!(validate(&p), vec![Diagnostic::MissingReturn { method: "m".into() }]);
    }

    #[test]
    fn validate_unknown_method() {
        let p = SourceProgram::with_implicit_return(
            vec![],
            vec![SourceStmt::assign("x", Expr::SyncCall("foo".into(), vec![]))],
        );
        assert_eq!(validate(&p), vec![Diagnostic::UnknownMethod { method: "main".into(), name: "foo".into() }]);
    }

    #[test]
    fn validate_arity_and_params() {
        let m = MethodDecl::new(
            "m",
            &["a", "a"],
            seq(vec![SourceStmt::assign("a", Expr::Val(ValueExpr::IntLit(1))), SourceStmt::ret("r")]),
        );
        let p = SourceProgram::with_implicit_return(
            vec![m],
            vec![SourceStmt::assign("x", Expr::SyncCall("m".into(), vec!["y".into()]))],
        );
        let d = validate(&p);
        assert!(d.contains(&Diagnostic::ArityMismatch {
            method: "main".into(),
            callee: "m".into(),
            expected: 2,
            found: 1
        }));
        assert!(d.contains(&Diagnostic::DuplicateParam { method: "m".into(), param: "a".into() }));
        assert!(d.contains(&Diagnostic::AssignToParam { method: "m".into(), param: "a".into() }));
    }

    #[test]
    fn validate_return_placement() {
        let two = MethodDecl::new("two", &[], seq(vec![SourceStmt::ret("a"), SourceStmt::ret("b")]));
        let early = MethodDecl::new("early", &[], seq(vec![SourceStmt::ret("a"), SourceStmt::Skip]));
        let p = SourceProgram::with_implicit_return(vec![two, early], vec![]);
        let d = validate(&p);
        assert!(d.contains(&Diagnostic::MultipleReturns { method: "two".into() }));
        assert!(d.contains(&Diagnostic::ReturnNotFinal { method: "early".into() }));
    }

    #[test]
    fn implicit_main_return() {
        let p = SourceProgram::with_implicit_return(vec![], vec![SourceStmt::Skip]);
        assert_eq!(p.main, seq(vec![SourceStmt::Skip, SourceStmt::ret(UNIT_ATTR)]));
        let q = SourceProgram::with_implicit_return(vec![], vec![SourceStmt::ret("x")]);
        assert_eq!(q.main, SourceStmt::ret("x"));
    }

    #[test]
    fn split_head_reassociates() {
        let left = SourceStmt::Seq(
            Box::new(seq(vec![SourceStmt::Skip, SourceStmt::Await("f".into())])),
            Box::new(SourceStmt::ret("x")),
        );
        let (h, rest) = left.split_head();
        assert_eq!(h, SourceStmt::Skip);
        assert_eq!(rest, Some(seq(vec![SourceStmt::Await("f".into()), SourceStmt::ret("x")])));
    }
}
