//! Translation of source statements and programs into target trees.

use std::sync::Arc;

use indexmap::{IndexMap, IndexSet};
use thiserror::Error;

use crate::source_lang::{
    validate, BoolExpr, Diagnostic, Expr, ReturnMark, SourceProgram, SourceStmt, ValueExpr, MAIN,
};
use crate::target_ir::{AttrIdx, CompiledMethod, MethodTable, TargetB, TargetRhs, TargetStmt, TargetV, WriteBack, K};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("unknown parameter `{0}`")]
    UnknownParam(String),
    #[error("invalid program: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
}

/// Compilation context: the attribute layout and, inside a method body, its
/// formal parameters.
pub struct Scope<'a> {
    pub layout: &'a IndexSet<String>,
    pub params: &'a [String],
}

impl<'a> Scope<'a> {
    pub fn new(layout: &'a IndexSet<String>) -> Self {
        Scope { layout, params: &[] }
    }

    fn attr(&self, x: &str) -> Result<AttrIdx, CompileError> {
        self.layout.get_index_of(x).ok_or_else(|| CompileError::UnknownAttribute(x.to_string()))
    }

    fn attrs(&self, xs: &[String]) -> Result<Vec<AttrIdx>, CompileError> {
        xs.iter().map(|x| self.attr(x)).collect()
    }

    pub fn value(&self, v: &ValueExpr) -> Result<TargetV, CompileError> {
        let bin = |a: &ValueExpr, b: &ValueExpr| -> Result<(Box<TargetV>, Box<TargetV>), CompileError> {
            Ok((Box::new(self.value(a)?), Box::new(self.value(b)?)))
        };
        Ok(match v {
            ValueExpr::Attr(x) => TargetV::A(self.attr(x)?),
            ValueExpr::Param(p) => TargetV::P(
                self.params.iter().position(|q| q == p).ok_or_else(|| CompileError::UnknownParam(p.clone()))?,
            ),
            ValueExpr::IntLit(i) => TargetV::I(*i),
            ValueExpr::Add(a, b) => {
                let (a, b) = bin(a, b)?;
                TargetV::Add(a, b)
            }
            ValueExpr::Sub(a, b) => {
                let (a, b) = bin(a, b)?;
                TargetV::Sub(a, b)
            }
            ValueExpr::Mul(a, b) => {
                let (a, b) = bin(a, b)?;
                TargetV::Mul(a, b)
            }
            ValueExpr::Div(a, b) => {
                let (a, b) = bin(a, b)?;
                TargetV::Div(a, b)
            }
            ValueExpr::Mod(a, b) => {
                let (a, b) = bin(a, b)?;
                TargetV::Mod(a, b)
            }
        })
    }

    pub fn boolean(&self, b: &BoolExpr) -> Result<TargetB, CompileError> {
        Ok(match b {
            BoolExpr::And(x, y) => TargetB::And(Box::new(self.boolean(x)?), Box::new(self.boolean(y)?)),
            BoolExpr::Or(x, y) => TargetB::Or(Box::new(self.boolean(x)?), Box::new(self.boolean(y)?)),
            BoolExpr::Not(x) => TargetB::Not(Box::new(self.boolean(x)?)),
            BoolExpr::Eq(x, y) => TargetB::Eq(self.value(x)?, self.value(y)?),
        })
    }

    /// Compiles `s` in front of continuation `k`; unmarked returns deliver
    /// to `wb`.
    pub fn stmt(&self, s: &SourceStmt, k: K, wb: &WriteBack) -> Result<K, CompileError> {
        let mut acc = k;
        for atom in s.atoms().into_iter().rev() {
            acc = Arc::new(self.atom(atom, acc, wb)?);
        }
        Ok(acc)
    }

    fn atom(&self, s: &SourceStmt, k: K, wb: &WriteBack) -> Result<TargetStmt, CompileError> {
        let hole = || Arc::new(TargetStmt::Hole);
        Ok(match s {
            SourceStmt::Assign(x, e) => {
                let rhs = match e {
                    Expr::Val(v) => TargetRhs::Val(self.value(v)?),
                    Expr::New => TargetRhs::New,
                    Expr::Get(f) => TargetRhs::Get(self.attr(f)?),
                    Expr::SyncCall(m, args) => TargetRhs::Sync(m.clone(), self.attrs(args)?),
                };
                TargetStmt::Assign(self.attr(x)?, rhs, k)
            }
            SourceStmt::AsyncCall { fut, callee, method, args } => TargetStmt::Assign(
                self.attr(fut)?,
                TargetRhs::Async(self.attr(callee)?, method.clone(), self.attrs(args)?),
                k,
            ),
            SourceStmt::Await(f) => TargetStmt::Await(self.attr(f)?, k),
            SourceStmt::Skip => TargetStmt::Skip(k),
            SourceStmt::Return(x, mark) => {
                let wb = match mark {
                    ReturnMark::Unmarked => wb.clone(),
                    ReturnMark::Star => WriteBack::Absent,
                    ReturnMark::WriteBack(z) => WriteBack::To(self.attr(z)?),
                };
                TargetStmt::Return(self.attr(x)?, wb, k)
            }
            SourceStmt::If(b, t, e) => {
                TargetStmt::If(self.boolean(b)?, self.stmt(t, hole(), wb)?, self.stmt(e, hole(), wb)?, k)
            }
            SourceStmt::While(b, body) => TargetStmt::While(self.boolean(b)?, self.stmt(body, hole(), wb)?, k),
            SourceStmt::Seq(..) => unreachable!("atoms are never sequences"),
        })
    }
}

/// Compiles a statement that mentions no parameters.
pub fn compile_stmt(layout: &IndexSet<String>, s: &SourceStmt, k: K, wb: &WriteBack) -> Result<K, CompileError> {
    Scope::new(layout).stmt(s, k, wb)
}

/// Compiles every method, `main` included, against one shared layout.
pub fn compile_program(p: &SourceProgram) -> Result<MethodTable, CompileError> {
    let diags = validate(p);
    if !diags.is_empty() {
        return Err(CompileError::Invalid(diags));
    }
    let layout: IndexSet<String> = p.attribute_order().into_iter().collect();
    let mut methods = IndexMap::new();
    let main = p.main_decl();
    for decl in std::iter::once(&main).chain(p.methods.values()) {
        let scope = Scope { layout: &layout, params: &decl.params };
        let body = scope.stmt(&decl.body, Arc::new(TargetStmt::Hole), &WriteBack::Formal)?;
        methods.insert(decl.name.clone(), CompiledMethod { name: decl.name.clone(), arity: decl.params.len(), body });
    }
    debug_assert_eq!(methods.get_index(0).map(|(n, _)| n.as_str()), Some(MAIN));
    Ok(MethodTable { methods, layout })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_program, parse_stmt, SourceText};
    use crate::target_ir::HeadForm;

    fn layout(names: &[&str]) -> IndexSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn exit() -> K {
        Arc::new(TargetStmt::Exit)
    }

    #[test]
    fn get_compiles_to_assign_get() {
        let l = layout(&["f1", "r1"]);
        let s = parse_stmt("r1 := f1.get;").unwrap();
        let out = compile_stmt(&l, &s, exit(), &WriteBack::Absent).unwrap();
        assert_eq!(*out, TargetStmt::Assign(1, TargetRhs::Get(0), exit()));
    }

    #[test]
    fn sequence_is_compositional() {
        let l = layout(&["x", "y"]);
        let s1 = parse_stmt("x := 1;").unwrap();
        let s2 = parse_stmt("y := x + 2; skip;").unwrap();
        let whole = SourceStmt::seq(vec![s1.clone(), s2.clone()]).unwrap();
        let wb = WriteBack::Formal;
        let direct = compile_stmt(&l, &whole, exit(), &wb).unwrap();
        let k2 = compile_stmt(&l, &s2, exit(), &wb).unwrap();
        let nested = compile_stmt(&l, &s1, k2, &wb).unwrap();
        assert_eq!(direct, nested);
    }

    #[test]
    fn returns_by_mark() {
        let l = layout(&["x", "z"]);
        let plain = compile_stmt(&l, &SourceStmt::ret("x"), exit(), &WriteBack::Absent).unwrap();
        assert_eq!(*plain, TargetStmt::Return(0, WriteBack::Absent, exit()));
        let formal = compile_stmt(&l, &SourceStmt::ret("x"), exit(), &WriteBack::Formal).unwrap();
        assert_eq!(*formal, TargetStmt::Return(0, WriteBack::Formal, exit()));
        let marked = SourceStmt::Return("x".into(), ReturnMark::WriteBack("z".into()));
        let wbz = compile_stmt(&l, &marked, exit(), &WriteBack::Formal).unwrap();
        assert_eq!(*wbz, TargetStmt::Return(0, WriteBack::To(1), exit()));
    }

    #[test]
    fn unknown_attribute() {
        let l = layout(&[]);
        assert_eq!(
            compile_stmt(&l, &parse_stmt("skip; x := 1;").unwrap(), exit(), &WriteBack::Absent),
            Err(CompileError::UnknownAttribute("x".into()))
        );
    }

    #[test]
    fn branches_are_hole_builders() {
        let l = layout(&["x"]);
        let s = parse_stmt("if (x == 0) { x := 1; } else { skip; }").unwrap();
        let out = compile_stmt(&l, &s, exit(), &WriteBack::Absent).unwrap();
        let TargetStmt::If(_, t, e, k) = &*out else { panic!("{out}") };
        assert_eq!(t.to_string(), "(Assign 0 (Val (I 1)) _)");
        assert_eq!(e.to_string(), "(Skip _)");
        assert_eq!(**k, TargetStmt::Exit);
    }

    #[test]
    fn params_become_slots() {
        let p = parse_program(&SourceText::inline("m(a, b) { r := b - a; return r; } main() { skip; }")).unwrap();
        let t = compile_program(&p).unwrap();
        assert_eq!(t.methods["m"].body.to_string(), "(Assign 1 (Val (Sub (P 1) (P 0))) (Return 1 wb _))");
        assert_eq!(t.methods.get_index(0).unwrap().0, "main");
    }

    #[test]
    fn return_only_method() {
        let p = parse_program(&SourceText::inline("m() { return x; } main() { skip; }")).unwrap();
        let t = compile_program(&p).unwrap();
        let x = t.attr_index("x").unwrap();
        assert_eq!(*t.methods["m"].body, TargetStmt::Return(x, WriteBack::Formal, Arc::new(TargetStmt::Hole)));
    }

    #[test]
    fn compile_is_deterministic() {
        let src = "m(a) { r := a; return r; } main() { o := new; f := o!m(v); await f; x := f.get; }";
        let p = parse_program(&SourceText::inline(src)).unwrap();
        assert_eq!(compile_program(&p).unwrap().to_string(), compile_program(&p).unwrap().to_string());
    }

    #[test]
    fn spine_of_main_follows_statement_order() {
        let src = "m(a) { r := a; return r; } main() { o := new; f := o!m(v); await f; x := f.get; }";
        let t = compile_program(&parse_program(&SourceText::inline(src)).unwrap()).unwrap();
        let mut forms = Vec::new();
        let mut cur = &t.methods["main"].body;
        while let Some(k) = cur.cont() {
            forms.push(match cur.head_form() {
                HeadForm::Assign(_, TargetRhs::New) => "New",
                HeadForm::Assign(_, TargetRhs::Async(..)) => "Async",
                HeadForm::Assign(_, TargetRhs::Get(_)) => "Get",
                HeadForm::Await(_) => "Await",
                HeadForm::Return(..) => "Return",
                _ => "other",
            });
            cur = k;
        }
        assert_eq!(forms, vec!["New", "Async", "Await", "Get", "Return"]);
    }
}
