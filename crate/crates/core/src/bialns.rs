//! The three-step biobjective driver.
//!
//! 1. One ALNS run per lexicographic direction from random greedy starts.
//! 2. Short ALNS runs in both directions from random members of the archive
//!    and the route-distinct set, to diversify route structures.
//! 3. Delay/advance moves on random archive members to fill the front in.

use std::io::Write;
use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alns::{
    alns_run, initial_solution, AcceptanceRule, AlnsConfig, DestroyProportion, LexObjective, RouteSet, SearchContext,
};
use crate::archive::{ParetoArchive, Provenance};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::moves::{improve_cost_move, improve_welfare_move, MoveKind};
use crate::solution::Solution;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BialnsConfig {
    /// Step 1 ALNS iterations per direction.
    pub n: usize,
    pub p: DestroyProportion,
    pub nroutes: usize,
    pub nalns: usize,
    pub pr: DestroyProportion,
    pub nsols: usize,
    /// Wall-clock cap on each step 1 run.
    pub step1_time_limit: Option<Duration>,
    /// Wall-clock cap on the whole run; steps 2 and 3 stop early when reached.
    pub time_limit: Option<Duration>,
    pub cooling: f64,
    pub acceptance: AcceptanceRule,
    pub seed: u64,
}

impl Default for BialnsConfig {
    fn default() -> Self {
        Self::solomon_10()
    }
}

impl BialnsConfig {
    pub fn solomon_10() -> Self {
        Self {
            n: 1000,
            p: DestroyProportion::Auto(1.0),
            nroutes: 6000,
            nalns: 5,
            pr: DestroyProportion::Auto(0.05),
            nsols: 200_000,
            step1_time_limit: None,
            time_limit: None,
            cooling: AlnsConfig::default().cooling,
            acceptance: AcceptanceRule::AsPrinted,
            seed: 0,
        }
    }

    pub fn solomon_15() -> Self {
        Self { nroutes: 8000, nalns: 10, pr: DestroyProportion::Auto(0.10), nsols: 300_000, ..Self::solomon_10() }
    }

    /// Week-long instances: step 1 is bounded by time rather than iterations.
    pub fn real_week() -> Self {
        Self {
            n: usize::MAX,
            p: DestroyProportion::Auto(0.01),
            nroutes: 10_000,
            nalns: 1,
            pr: DestroyProportion::Fixed(0.01),
            nsols: 300_000,
            step1_time_limit: Some(Duration::from_secs(90 * 60)),
            ..Self::solomon_10()
        }
    }

    /// Small budgets for smoke runs and tests.
    pub fn quick() -> Self {
        Self { n: 200, nroutes: 200, nalns: 5, nsols: 5000, ..Self::solomon_10() }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "solomon-10" | "default" => Some(Self::solomon_10()),
            "solomon-15" => Some(Self::solomon_15()),
            "real-week" => Some(Self::real_week()),
            "quick" => Some(Self::quick()),
            _ => None,
        }
    }

    fn alns(&self, iterations: usize, proportion: DestroyProportion, limit: Option<Duration>) -> AlnsConfig {
        AlnsConfig {
            iterations,
            proportion,
            cooling: self.cooling,
            acceptance: self.acceptance,
            time_limit: limit,
            ..AlnsConfig::default()
        }
    }
}

/// One line of the run log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepLog {
    pub step: u8,
    pub event: String,
    pub iterations: usize,
    pub archive_size: usize,
    pub route_set_size: usize,
    pub elapsed_ms: u128,
}

pub struct BialnsResult {
    pub archive: ParetoArchive<Solution>,
    pub route_set: RouteSet,
    pub log: Vec<StepLog>,
}

impl BialnsResult {
    pub fn write_log(&self, mut out: impl Write) -> Result<()> {
        for line in &self.log {
            serde_json::to_writer(&mut out, line)?;
            writeln!(out).map_err(|e| Error::io(std::path::Path::new("<run log>"), e))?;
        }
        Ok(())
    }
}

fn provenance(objective: LexObjective) -> Provenance {
    match objective {
        LexObjective::WelfareCost => Provenance::WelfareCostAlns,
        LexObjective::CostWelfare => Provenance::CostWelfareAlns,
    }
}

/// Uniform draw from the route-distinct set and the archive taken together.
fn choose_random_solution(route_set: &RouteSet, archive: &ParetoArchive<Solution>, rng: &mut impl Rng) -> Solution {
    let k = rng.gen_range(0..route_set.len() + archive.len());
    match route_set.get(k) {
        Some(s) => s.clone(),
        None => archive.get(k - route_set.len()).expect("index in range").payload.clone(),
    }
}

pub fn bialns(instance: &Instance, config: &BialnsConfig) -> Result<BialnsResult> {
    let clock = Instant::now();
    let out_of_time = || config.time_limit.is_some_and(|l| clock.elapsed() >= l);
    let ctx = SearchContext::new(instance);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut archive: ParetoArchive<Solution> = ParetoArchive::new();
    let mut route_set = RouteSet::new();
    let mut log = Vec::new();
    let mut record = |step, event: &str, iterations, archive: &ParetoArchive<Solution>, set: &RouteSet| {
        log.push(StepLog {
            step,
            event: event.into(),
            iterations,
            archive_size: archive.len(),
            route_set_size: set.len(),
            elapsed_ms: clock.elapsed().as_millis(),
        });
    };

    // Step 1.
    let directions = [LexObjective::WelfareCost, LexObjective::CostWelfare];
    let step1 = config.alns(config.n, config.p, config.step1_time_limit);
    for objective in directions {
        let start = initial_solution(&ctx, objective, &mut rng)?;
        let out = alns_run(&ctx, objective, &start, &mut route_set, &step1, &mut rng);
        archive.update(out.best_objectives, out.best, provenance(objective));
        record(1, &format!("{objective:?}"), out.iterations, &archive, &route_set);
    }

    // Step 2.
    let step2 = config.alns(config.nalns, config.pr, None);
    let mut done = 0;
    for _ in 0..config.nroutes {
        if out_of_time() {
            break;
        }
        done += 1;
        let start = choose_random_solution(&route_set, &archive, &mut rng);
        for objective in directions {
            let out = alns_run(&ctx, objective, &start, &mut route_set, &step2, &mut rng);
            archive.update(out.best_objectives, out.best, provenance(objective));
        }
    }
    record(2, "diversify", done, &archive, &route_set);

    // Step 3.
    let mut done = 0;
    for _ in 0..config.nsols {
        if out_of_time() {
            break;
        }
        done += 1;
        let base = choose_random_solution(&route_set, &archive, &mut rng);
        let base_eval = ctx.evaluate(&base);
        let mut candidates = improve_welfare_move(instance, &base, &mut rng);
        candidates.extend(improve_cost_move(instance, &base, &mut rng));
        for c in candidates {
            let mut eval = base_eval.clone();
            eval.update_route(instance, &ctx.weights, &c.solution, c.route_index);
            let prov = match c.kind {
                MoveKind::WelfareDelay | MoveKind::WelfareAdvance => Provenance::WelfareMove,
                _ => Provenance::CostMove,
            };
            archive.update(eval.objectives, c.solution, prov);
        }
    }
    record(3, "densify", done, &archive, &route_set);

    let (hits, misses) = ctx.schedule_memo_stats();
    log::info!("schedule memo: {hits} hits, {misses} misses");
    Ok(BialnsResult { archive, route_set, log })
}
