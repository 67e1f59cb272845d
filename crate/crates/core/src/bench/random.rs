//! Seeded generator of valid, terminating, deadlock-free programs.
//!
//! Method `mi` only calls methods `mj` with `j > i`, every asynchronous call
//! targets a freshly created object, and every loop runs a private counter
//! down to zero, so each generated program finishes under any schedule.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::source_lang::{BoolExpr, Expr, MethodDecl, SourceProgram, SourceStmt, ValueExpr};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenConfig {
    /// Including `main`.
    pub max_methods: usize,
    /// Upper bound on [`SourceProgram::size`].
    pub max_stmts: usize,
    pub max_loop_iters: i64,
    pub max_depth: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { max_methods: 6, max_stmts: 30, max_loop_iters: 3, max_depth: 2 }
    }
}

impl GenConfig {
    /// Tiny programs, suitable for exhaustive exploration.
    pub fn small() -> Self {
        GenConfig { max_methods: 2, max_stmts: 5, max_loop_iters: 1, max_depth: 1 }
    }
}

const INTS: [&str; 3] = ["a", "b", "c"];
const OBJS: [&str; 2] = ["o1", "o2"];
const FUTS: [&str; 2] = ["g1", "g2"];
const PARAMS: [&str; 2] = ["p1", "p2"];

struct Gen {
    rng: ChaCha8Rng,
    cfg: GenConfig,
    budget: usize,
    arities: Vec<usize>,
}

struct Ctx<'a> {
    index: usize,
    name: &'a str,
    params: &'a [String],
    loops: usize,
}

pub fn random_program(seed: u64, cfg: GenConfig) -> SourceProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_methods = rng.gen_range(0..cfg.max_methods.max(1));
    let arities = (0..n_methods).map(|_| rng.gen_range(0..=PARAMS.len())).collect();
    // reserve each method's return, plus main's return and a possible `skip`
    let budget = cfg.max_stmts.saturating_sub(n_methods + 2);
    let mut g = Gen { rng, cfg, budget, arities };

    let mut methods = Vec::new();
    // Generate callees first so that callers never wait on budget they need.
    let mut bodies = Vec::new();
    for i in (1..=n_methods).rev() {
        let name = format!("m{i}");
        let params: Vec<String> = PARAMS[..g.arities[i - 1]].iter().map(|p| p.to_string()).collect();
        let mut ctx = Ctx { index: i, name: &name, params: &params, loops: 0 };
        let mut body = g.block(&mut ctx, 0, 4);
        body.push(SourceStmt::ret(INTS.choose(&mut g.rng).unwrap()));
        bodies.push((name.clone(), params.clone(), body));
    }
    for (name, params, body) in bodies.into_iter().rev() {
        let ps: Vec<&str> = params.iter().map(String::as_str).collect();
        methods.push(MethodDecl::new(&name, &ps, SourceStmt::seq(body).expect("non-empty")));
    }
    let mut ctx = Ctx { index: 0, name: "main", params: &[], loops: 0 };
    g.budget += 1;
    let mut main = g.block(&mut ctx, 0, 8);
    if main.is_empty() {
        main.push(SourceStmt::Skip);
    }
    SourceProgram::with_implicit_return(methods, main)
}

impl Gen {
    fn block(&mut self, ctx: &mut Ctx, depth: usize, max_len: usize) -> Vec<SourceStmt> {
        let mut out = Vec::new();
        let len = self.rng.gen_range(1..=max_len);
        for _ in 0..len {
            if self.budget == 0 {
                break;
            }
            out.extend(self.stmt(ctx, depth));
        }
        out
    }

    fn take(&mut self, n: usize) -> bool {
        if self.budget >= n {
            self.budget -= n;
            true
        } else {
            false
        }
    }

    fn callees(&self, ctx: &Ctx) -> Vec<usize> {
        (ctx.index + 1..=self.arities.len()).collect()
    }

    fn int(&mut self) -> String {
        INTS.choose(&mut self.rng).unwrap().to_string()
    }

    fn lit(&mut self) -> ValueExpr {
        ValueExpr::IntLit(self.rng.gen_range(-3..=9))
    }

    fn operand(&mut self, ctx: &Ctx) -> ValueExpr {
        match self.rng.gen_range(0..3) {
            0 if !ctx.params.is_empty() => ValueExpr::Param(ctx.params.choose(&mut self.rng).unwrap().clone()),
            0 | 1 => ValueExpr::Attr(self.int()),
            _ => self.lit(),
        }
    }

    fn value(&mut self, ctx: &Ctx) -> ValueExpr {
        let a = self.operand(ctx);
        let k = ValueExpr::IntLit(self.rng.gen_range(1..=7));
        match self.rng.gen_range(0..6) {
            0 => a,
            1 => ValueExpr::add(a, self.operand(ctx)),
            2 => ValueExpr::sub(a, self.operand(ctx)),
            3 => ValueExpr::rem(ValueExpr::mul(a, k), ValueExpr::IntLit(1000)),
            4 => ValueExpr::div(a, k),
            _ => ValueExpr::rem(a, k),
        }
    }

    fn cond(&mut self, ctx: &Ctx) -> BoolExpr {
        let eq = |g: &mut Gen, ctx: &Ctx| BoolExpr::eq(g.operand(ctx), g.operand(ctx));
        match self.rng.gen_range(0..4) {
            0 => BoolExpr::not(eq(self, ctx)),
            1 => BoolExpr::and(eq(self, ctx), BoolExpr::not(eq(self, ctx))),
            2 => BoolExpr::or(eq(self, ctx), eq(self, ctx)),
            _ => eq(self, ctx),
        }
    }

    fn args(&mut self, callee: usize) -> Vec<String> {
        (0..self.arities[callee - 1]).map(|_| self.int()).collect()
    }

    fn stmt(&mut self, ctx: &mut Ctx, depth: usize) -> Vec<SourceStmt> {
        let callees = self.callees(ctx);
        let nested = depth < self.cfg.max_depth;
        let choice = self.rng.gen_range(0..10);
        match choice {
            0..=2 => {
                self.take(1);
                vec![SourceStmt::assign(&self.int(), Expr::Val(self.value(ctx)))]
            }
            3 | 4 if !callees.is_empty() && self.take(2) => {
                let m = *callees.choose(&mut self.rng).unwrap();
                let o = *OBJS.choose(&mut self.rng).unwrap();
                let f = *FUTS.choose(&mut self.rng).unwrap();
                let args = self.args(m);
                let args: Vec<&str> = args.iter().map(String::as_str).collect();
                let mut out =
                    vec![SourceStmt::assign(o, Expr::New), SourceStmt::async_call(f, o, &format!("m{m}"), &args)];
                if self.rng.gen_bool(0.6) && self.take(1) {
                    out.push(SourceStmt::Await(f.to_string()));
                }
                if self.rng.gen_bool(0.7) && self.take(1) {
                    out.push(SourceStmt::assign(&self.int(), Expr::Get(f.to_string())));
                }
                out
            }
            5 if !callees.is_empty() && self.take(1) => {
                let m = *callees.choose(&mut self.rng).unwrap();
                let args = self.args(m);
                vec![SourceStmt::assign(&self.int(), Expr::SyncCall(format!("m{m}"), args))]
            }
            // two extra units stand for the `skip`s that fill empty branches
            6 if nested && self.take(3) => {
                let c = self.cond(ctx);
                let t = self.block(ctx, depth + 1, 3);
                let e = if self.rng.gen_bool(0.5) { self.block(ctx, depth + 1, 2) } else { Vec::new() };
                self.budget += usize::from(!t.is_empty()) + usize::from(!e.is_empty());
                let t = SourceStmt::seq(t).unwrap_or(SourceStmt::Skip);
                let e = SourceStmt::seq(e).unwrap_or(SourceStmt::Skip);
                vec![SourceStmt::if_else(c, t, e)]
            }
            7 if nested && self.take(3) => {
                let counter = format!("k_{}_{}", ctx.name, ctx.loops);
                ctx.loops += 1;
                let iters = self.rng.gen_range(0..=self.cfg.max_loop_iters);
                let mut body = self.block(ctx, depth + 1, 3);
                body.push(SourceStmt::assign(
                    &counter,
                    Expr::Val(ValueExpr::sub(ValueExpr::attr(&counter), ValueExpr::IntLit(1))),
                ));
                vec![
                    SourceStmt::assign(&counter, Expr::Val(ValueExpr::IntLit(iters))),
                    SourceStmt::while_loop(
                        BoolExpr::not(BoolExpr::eq(ValueExpr::attr(&counter), ValueExpr::IntLit(0))),
                        SourceStmt::seq(body).expect("non-empty"),
                    ),
                ]
            }
            _ => {
                self.take(1);
                vec![SourceStmt::Skip]
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source_lang::validate;
    use crate::source_sem::{run, RandomPolicy};
    use crate::trace::Termination;

    #[test]
    fn generated_programs_are_valid_and_bounded() {
        for seed in 0..300 {
            let p = random_program(seed, GenConfig::default());
            assert!(validate(&p).is_empty(), "seed {seed}: {:?}", validate(&p));
            assert!(p.size() <= 30, "seed {seed}: size {}", p.size());
            assert!(p.methods.len() < 6);
        }
    }

    #[test]
    fn generated_programs_finish() {
        for seed in 0..100 {
            let p = random_program(seed, GenConfig::default());
            let t = run(&p, &mut RandomPolicy::new(seed), 10_000).unwrap();
            assert_eq!(t.status, Termination::Finished, "seed {seed}");
        }
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(random_program(7, GenConfig::default()), random_program(7, GenConfig::default()));
    }
}
