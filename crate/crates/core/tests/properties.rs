use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;

use actorcps::bench::random::{random_program, GenConfig};
use actorcps::bridge::{check_trace, from_target, to_target};
use actorcps::compiler::compile_program;
use actorcps::cost::{check_preservation, cost_of_trace, label_costs};
use actorcps::parser::{parse_program, parse_stmt, pretty, SourceText};
use actorcps::runtime::{run_rt, RtConfig};
use actorcps::source_sem::{run, RandomPolicy, SchedulerPolicy, SourceConfig};
use actorcps::trace::{Ref, Rule, StepLabel, Termination};
use actorcps::{Cost, ExactCostModel, FloatCostModel};

fn rule() -> impl Strategy<Value = Rule> {
    prop::sample::select(Rule::ALL.to_vec())
}

fn label_seq() -> impl Strategy<Value = Vec<StepLabel>> {
    prop::collection::vec((0i64..4, rule()), 0..40).prop_map(|v| {
        v.into_iter().map(|(object, rule)| StepLabel { object, rule, stmt: String::new(), spawn: None }).collect()
    })
}

fn weighted_model() -> impl Strategy<Value = ExactCostModel> {
    prop::collection::vec((0i64..20, 1i64..5), Rule::ALL.len()).prop_map(|ws| {
        let table: BTreeMap<Rule, Cost> = Rule::ALL.iter().zip(ws).map(|(&r, (n, d))| (r, Cost::new(n, d))).collect();
        ExactCostModel::from_fn("w", |r| table[&r])
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn pretty_then_parse_is_identity(seed in any::<u64>()) {
        let p = random_program(seed, GenConfig::default());
        let text = pretty(&p);
        let back = parse_program(&text).unwrap();
        prop_assert_eq!(&back, &p);
        prop_assert_eq!(pretty(&back).text, text.text);
    }

    #[test]
    fn parser_never_panics(text in "[a-z(){};:=!.,+*/%&| 0-9\n-]{0,80}") {
        let _ = parse_program(&SourceText::inline(text.clone()));
        let _ = parse_stmt(&text);
    }

    #[test]
    fn futures_written_once_and_count_grows(seed in any::<u64>(), sched in any::<u64>()) {
        let p = random_program(seed, GenConfig::default());
        let mut c = SourceConfig::initial(&p).unwrap();
        let mut pol = RandomPolicy::new(sched);
        for i in 0..2000 {
            let enabled = c.enabled_objects();
            let Some(o) = pol.choose(&c, &enabled, i) else { break };
            let before = c.clone();
            c.step_mut(&p, o).unwrap();
            prop_assert!(c.heap.count >= before.heap.count);
            for (f, v) in &before.heap.futures {
                if let Some(v) = v {
                    prop_assert_eq!(c.heap.futures[f], Some(*v));
                }
            }
            for r in before.heap.objects.keys().chain(before.heap.futures.keys()) {
                prop_assert!(*r < c.heap.count);
            }
        }
    }

    #[test]
    fn compiled_runs_replay_in_the_source(seed in any::<u64>()) {
        let p = random_program(seed, GenConfig::default());
        let table = Arc::new(compile_program(&p).unwrap());
        let t = run_rt(RtConfig::load(table).unwrap(), 10_000).unwrap();
        prop_assert_eq!(t.status, Termination::Finished);
        let labels = t.labels();
        let v = check_trace(&labels, &p);
        prop_assert!(v.ok, "{:?}", v.failures);
        prop_assert!(check_preservation(&labels, &v.source_steps, &ExactCostModel::steps()).equal);
    }

    #[test]
    fn source_and_runtime_agree_on_the_final_state(seed in any::<u64>()) {
        let p = random_program(seed, GenConfig::default());
        let table = Arc::new(compile_program(&p).unwrap());
        let t = run_rt(RtConfig::load(table).unwrap(), 10_000).unwrap();
        let script: Vec<Ref> = t.steps.iter().map(|s| s.object).collect();
        let s = run(&p, &mut actorcps::source_sem::ScriptedPolicy::new(script), 10_000).unwrap();
        prop_assert_eq!(from_target(&t.final_config).unwrap(), s.final_config);
    }

    #[test]
    fn translation_round_trips(seed in any::<u64>(), sched in any::<u64>(), steps in 0usize..60) {
        let p = random_program(seed, GenConfig::default());
        let table = Arc::new(compile_program(&p).unwrap());
        let mut c = SourceConfig::initial(&p).unwrap();
        let mut pol = RandomPolicy::new(sched);
        for i in 0..steps {
            let enabled = c.enabled_objects();
            let Some(o) = pol.choose(&c, &enabled, i) else { break };
            c.step_mut(&p, o).unwrap();
        }
        let back = from_target(&to_target(&c, table).unwrap()).unwrap();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn cost_is_additive(a in label_seq(), b in label_seq(), m in weighted_model()) {
        let joined: Vec<StepLabel> = a.iter().chain(&b).cloned().collect();
        let ca = cost_of_trace(label_costs(&a), &m);
        let cb = cost_of_trace(label_costs(&b), &m);
        let cj = cost_of_trace(label_costs(&joined), &m);
        for o in 0..4 {
            prop_assert_eq!(cj.of(o), ca.of(o) + cb.of(o));
            prop_assert!(cj.of(o) >= ca.of(o));
        }
        prop_assert_eq!(cj.total, ca.total + cb.total);
    }

    #[test]
    fn steps_model_total_is_length(a in label_seq()) {
        let r = cost_of_trace(label_costs(&a), &ExactCostModel::steps());
        prop_assert_eq!(r.total, Cost::from_integer(a.len() as i64));
        let f = cost_of_trace(label_costs(&a), &FloatCostModel::steps());
        prop_assert_eq!(f.total, a.len() as f64);
    }
}
