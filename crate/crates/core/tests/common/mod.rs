#![allow(dead_code)]

use actorcps::bench::random::{random_program, GenConfig};
use actorcps::bench::Family;
use actorcps::source_lang::SourceProgram;

pub const RANDOM_PROGRAMS: u64 = 200;
pub const RANDOM_FUEL: usize = 10_000;
pub const BENCH_FUEL: usize = 10_000_000;
pub const BENCH_SIZES: [u64; 6] = [1, 2, 7, 10, 50, 100];

pub struct Entry {
    pub name: String,
    pub program: SourceProgram,
    pub fuel: usize,
}

/// Random programs followed by every benchmark family at small sizes.
pub fn corpus() -> Vec<Entry> {
    let mut out: Vec<Entry> = (0..RANDOM_PROGRAMS)
        .map(|seed| Entry {
            name: format!("random#{seed}"),
            program: random_program(seed, GenConfig::default()),
            fuel: RANDOM_FUEL,
        })
        .collect();
    for f in Family::ALL {
        let sizes: &[u64] = if f == Family::MapReduce { &[1] } else { &BENCH_SIZES };
        for &n in sizes {
            out.push(Entry { name: format!("{f}({n})"), program: f.gen(n), fuel: BENCH_FUEL });
        }
    }
    out
}
