//! Seeded instance generation from Solomon-style routing data.
//!
//! Hard windows, durations and coordinates come from a Solomon-format source,
//! either a parsed benchmark file or a synthetic R2-like one. Days, soft windows,
//! compatibilities and affinities are sampled on top; the sampling laws are
//! written into `meta.notes` of every generated instance.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{
    Caregiver, Day, Instance, InstanceMeta, Minutes, Service, TravelMatrix, Window, DAYS, DEFAULT_PI_MIN, MAX_AFFINITY,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolomonCustomer {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub demand: f64,
    pub ready: Minutes,
    pub due: Minutes,
    pub service: Minutes,
}

/// A VRPTW benchmark in Solomon's layout; the depot is customer 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolomonInstance {
    pub name: String,
    pub depot: SolomonCustomer,
    pub customers: Vec<SolomonCustomer>,
}

impl SolomonInstance {
    pub fn horizon(&self) -> Minutes {
        self.depot.due
    }
}

/// Parses the classic text layout: a name line, a vehicle block and one row of
/// seven numbers per customer.
pub fn parse_solomon(text: &str) -> Result<SolomonInstance> {
    let name = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty())
        .ok_or_else(|| Error::Parse("empty Solomon file".into()))?
        .to_string();
    let mut rows = Vec::new();
    for line in text.lines() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 7 {
            continue;
        }
        let nums: Option<Vec<f64>> = fields.iter().map(|f| f.parse().ok()).collect();
        if let Some(n) = nums {
            rows.push(SolomonCustomer {
                id: n[0] as u32,
                x: n[1],
                y: n[2],
                demand: n[3],
                ready: n[4].round() as Minutes,
                due: n[5].round() as Minutes,
                service: n[6].round() as Minutes,
            });
        }
    }
    if rows.is_empty() {
        return Err(Error::Parse("no customer rows in Solomon file".into()));
    }
    let depot = rows.remove(0);
    if depot.id != 0 {
        return Err(Error::Parse(format!("first customer row must be the depot (id 0), got {}", depot.id)));
    }
    Ok(SolomonInstance { name, depot, customers: rows })
}

/// R2-like source: uniform coordinates on a 100x100 square, long horizon and
/// wide windows centered uniformly.
pub fn synthetic_solomon(n_customers: usize, seed: u64, profile: &GeneratorProfile) -> SolomonInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5010_0000);
    let horizon = profile.source_horizon;
    let depot = SolomonCustomer { id: 0, x: 50.0, y: 50.0, demand: 0.0, ready: 0, due: horizon, service: 0 };
    let customers = (1..=n_customers as u32)
        .map(|id| {
            let service = *profile.service_times.choose(&mut rng).expect("service_times is non-empty");
            let half = rng.gen_range(profile.half_width.0..=profile.half_width.1);
            let center = rng.gen_range(0..=horizon);
            let ready = (center - half).max(0);
            let due = (center + half).min(horizon - service).max(ready);
            SolomonCustomer {
                id,
                x: rng.gen_range(0.0..100.0),
                y: rng.gen_range(0.0..100.0),
                demand: 10.0,
                ready,
                due,
                service,
            }
        })
        .collect();
    SolomonInstance { name: format!("synthetic-r2-{seed}"), depot, customers }
}

/// Knobs of the instance generator. All times in minutes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorProfile {
    pub name: String,
    /// Services are spread uniformly over the first `days` days of the week.
    pub days: usize,
    /// Source time 0 maps to this minute of the day.
    pub day_start: Minutes,
    /// Length of the synthetic source horizon.
    pub source_horizon: Minutes,
    /// Synthetic window half-widths are drawn from this inclusive range.
    pub half_width: (Minutes, Minutes),
    pub service_times: Vec<Minutes>,
    /// Travel minutes per unit of Euclidean distance.
    pub travel_per_unit: f64,
    /// Every time value is rounded to a multiple of this.
    pub time_quantum: Minutes,
    pub daily_max: Minutes,
    pub weekly_agreed: Vec<Minutes>,
    pub compat_probability: f64,
    pub pi_min: Minutes,
}

impl Default for GeneratorProfile {
    fn default() -> Self {
        Self {
            name: "default".into(),
            days: 5,
            day_start: 420,
            source_horizon: 1000,
            half_width: (60, 240),
            service_times: vec![30, 45, 60, 90],
            travel_per_unit: 0.5,
            time_quantum: 1,
            daily_max: 480,
            weekly_agreed: vec![1200, 1800, 2400],
            compat_probability: 0.8,
            pi_min: DEFAULT_PI_MIN,
        }
    }
}

impl GeneratorProfile {
    /// Single-day Solomon derivatives with 10 services and a short contract so
    /// that overtime matters.
    pub fn solomon_10() -> Self {
        Self { name: "solomon-10".into(), days: 1, weekly_agreed: vec![300, 360, 420], ..Self::default() }
    }

    pub fn solomon_15() -> Self {
        Self { name: "solomon-15".into(), ..Self::solomon_10() }
    }

    /// Small, narrow-windowed instances on a 15-minute lattice, sized for
    /// exhaustive enumeration.
    pub fn tiny() -> Self {
        Self {
            name: "tiny".into(),
            days: 2,
            day_start: 480,
            source_horizon: 480,
            half_width: (45, 120),
            service_times: vec![30, 45, 60],
            travel_per_unit: 0.3,
            time_quantum: 15,
            daily_max: 360,
            weekly_agreed: vec![240, 360, 480],
            compat_probability: 0.8,
            pi_min: DEFAULT_PI_MIN,
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "default" => Some(Self::default()),
            "solomon-10" => Some(Self::solomon_10()),
            "solomon-15" => Some(Self::solomon_15()),
            "tiny" => Some(Self::tiny()),
            _ => None,
        }
    }

    fn sanitized(&self) -> Self {
        let mut p = self.clone();
        let clamp = |what: &str, v: &mut Minutes, lo: Minutes, hi: Minutes| {
            let c = (*v).clamp(lo, hi);
            if c != *v {
                log::warn!("profile {what} {v} clamped to {c}");
                *v = c;
            }
        };
        if !(1..=DAYS).contains(&p.days) {
            log::warn!("profile days {} clamped to [1, {DAYS}]", p.days);
            p.days = p.days.clamp(1, DAYS);
        }
        clamp("time_quantum", &mut p.time_quantum, 1, 60);
        clamp("day_start", &mut p.day_start, 0, 1380);
        clamp("source_horizon", &mut p.source_horizon, 60, 1440 - p.day_start);
        clamp("pi_min", &mut p.pi_min, 1, 1440);
        clamp("daily_max", &mut p.daily_max, 1, p.source_horizon);
        if p.half_width.0 > p.half_width.1 {
            p.half_width = (p.half_width.1, p.half_width.0);
        }
        p.service_times.retain(|&s| s > 0 && s < p.source_horizon);
        if p.service_times.is_empty() {
            log::warn!("profile service_times empty after clamping; using 60");
            p.service_times = vec![60];
        }
        if p.weekly_agreed.is_empty() {
            p.weekly_agreed = vec![p.daily_max * p.days as Minutes];
        }
        if !(0.0..=1.0).contains(&p.compat_probability) {
            log::warn!("profile compat_probability {} clamped to [0, 1]", p.compat_probability);
            p.compat_probability = p.compat_probability.clamp(0.0, 1.0);
        }
        p
    }
}

fn round_up(v: Minutes, q: Minutes) -> Minutes {
    (v + q - 1).div_euclid(q) * q
}

fn round_down(v: Minutes, q: Minutes) -> Minutes {
    v.div_euclid(q) * q
}

/// Adapts the first `n_services` customers of `source` into a home care instance.
pub fn adapt_solomon(
    source: &SolomonInstance,
    n_services: usize,
    n_caregivers: usize,
    seed: u64,
    profile: &GeneratorProfile,
) -> Instance {
    let p = profile.sanitized();
    let q = p.time_quantum;
    let n_services = n_services.clamp(1, source.customers.len().max(1));
    let n_caregivers = n_caregivers.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let day_end = p.day_start + p.source_horizon;

    let customers = &source.customers[..n_services];
    let services: Vec<Service> = customers
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let duration = round_up(c.service.max(1), q);
            let mut start = round_up(p.day_start + c.ready, q).min(day_end - duration);
            start = start.max(p.day_start);
            let mut end = round_down((p.day_start + c.due + c.service).min(day_end), q);
            if end - start < duration {
                end = start + duration;
            }
            // Soft window: start uniform in [hard start, hard end - duration],
            // end uniform in [soft start + duration, hard end].
            let soft_start = start + q * rng.gen_range(0..=(end - duration - start) / q);
            let soft_end = soft_start + duration + q * rng.gen_range(0..=(end - soft_start - duration) / q);
            Service {
                id: k as u32 + 1,
                user_id: k as u32 + 1,
                day: Day::from_index(rng.gen_range(0..p.days)),
                duration,
                hard: Window::new(start, end),
                soft: Window::new(soft_start, soft_end),
            }
        })
        .collect();

    let mut travel = TravelMatrix::zeros(n_services);
    for (a, ca) in customers.iter().enumerate() {
        for (b, cb) in customers.iter().enumerate() {
            if a != b {
                let dist = ((ca.x - cb.x).powi(2) + (ca.y - cb.y).powi(2)).sqrt();
                let minutes = round_up((dist * p.travel_per_unit).ceil() as Minutes, q);
                travel.set(crate::ServiceIdx(a), crate::ServiceIdx(b), minutes);
            }
        }
    }

    let mut caregivers: Vec<Caregiver> = (0..n_caregivers)
        .map(|k| {
            let mut availability = [None; DAYS];
            let mut daily_max = [0; DAYS];
            for d in 0..p.days {
                availability[d] = Some(Window::new(p.day_start, day_end));
                daily_max[d] = p.daily_max;
            }
            Caregiver {
                id: k as u32 + 1,
                availability,
                weekly_agreed: *p.weekly_agreed.choose(&mut rng).expect("non-empty"),
                daily_max,
                can_serve: vec![false; n_services],
                affinity: vec![0; n_services],
            }
        })
        .collect();

    for j in 0..n_services {
        let mut any = false;
        for c in caregivers.iter_mut() {
            if rng.gen_bool(p.compat_probability) {
                c.can_serve[j] = true;
                any = true;
            }
        }
        if !any {
            let k = rng.gen_range(0..n_caregivers);
            caregivers[k].can_serve[j] = true;
        }
        for c in caregivers.iter_mut() {
            if c.can_serve[j] {
                c.affinity[j] = rng.gen_range(0..=MAX_AFFINITY);
            }
        }
    }

    let mut notes = BTreeMap::new();
    notes.insert("source".into(), source.name.clone());
    notes.insert("day_law".into(), format!("uniform over days 1..={}", p.days));
    notes.insert(
        "soft_window_law".into(),
        "start uniform in [hard start, hard end - duration], end uniform in [start + duration, hard end]".into(),
    );
    notes.insert("affinity_law".into(), format!("uniform over 0..={MAX_AFFINITY} for compatible pairs"));
    notes.insert(
        "compatibility_law".into(),
        format!("Bernoulli({}) per pair, at least one caregiver per service", p.compat_probability),
    );
    notes.insert("travel_law".into(), format!("ceil({} * euclidean distance)", p.travel_per_unit));
    notes.insert("time_quantum".into(), q.to_string());

    Instance {
        meta: InstanceMeta {
            name: format!("{}-s{}-n{}-seed{}", p.name, n_services, n_caregivers, seed),
            seed: Some(seed),
            profile: Some(p.name.clone()),
            notes,
        },
        pi_min: p.pi_min,
        services,
        caregivers,
        travel,
    }
}

/// Generates an instance from a synthetic Solomon source. Pure in
/// `(n_services, n_caregivers, seed, profile)`.
pub fn generate_instance(n_services: usize, n_caregivers: usize, seed: u64, profile: &GeneratorProfile) -> Instance {
    let n_services = if n_services == 0 {
        log::warn!("n_services 0 clamped to 1");
        1
    } else {
        n_services
    };
    let n_caregivers = if n_caregivers == 0 {
        log::warn!("n_caregivers 0 clamped to 1");
        1
    } else {
        n_caregivers
    };
    let p = profile.sanitized();
    let source = synthetic_solomon(n_services, seed, &p);
    adapt_solomon(&source, n_services, n_caregivers, seed, &p)
}

/// `count` instances with seeds `seed, seed + 1, ...`.
pub fn generate_suite(
    n_services: usize,
    n_caregivers: usize,
    count: usize,
    seed: u64,
    profile: &GeneratorProfile,
) -> Vec<Instance> {
    (0..count as u64).map(|k| generate_instance(n_services, n_caregivers, seed.wrapping_add(k), profile)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const R201_HEAD: &str = "R201

VEHICLE
NUMBER     CAPACITY
  25         1000

CUSTOMER
CUST NO.  XCOORD.   YCOORD.    DEMAND   READY TIME  DUE DATE   SERVICE   TIME

    0      35         35          0          0       1000          0
    1      41         49         10        707        848         10
    2      35         17          7        143        282         10
    3      55         45         13        527        584         10
";

    #[test]
    fn parses_solomon_layout() {
        let s = parse_solomon(R201_HEAD).unwrap();
        assert_eq!(s.name, "R201");
        assert_eq!(s.horizon(), 1000);
        assert_eq!(s.customers.len(), 3);
        assert_eq!(s.customers[1].ready, 143);
        assert_eq!(s.customers[2].due, 584);
    }

    #[test]
    fn adapted_solomon_keeps_hard_windows() {
        let s = parse_solomon(R201_HEAD).unwrap();
        let inst = adapt_solomon(&s, 3, 2, 1, &GeneratorProfile::default());
        inst.validate().unwrap();
        assert_eq!(inst.services[1].hard, Window::new(420 + 143, 420 + 292));
        assert_eq!(inst.services[1].duration, 10);
    }

    #[test]
    fn rejects_files_without_rows() {
        assert!(parse_solomon("R201\nnothing here\n").is_err());
        assert!(parse_solomon("").is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        let p = GeneratorProfile::default();
        let a = generate_instance(10, 3, 42, &p).to_canonical_json();
        let b = generate_instance(10, 3, 42, &p).to_canonical_json();
        assert_eq!(a, b);
    }

    #[test]
    fn different_seeds_differ_in_soft_windows() {
        let p = GeneratorProfile::default();
        let a = generate_instance(10, 3, 42, &p);
        let b = generate_instance(10, 3, 43, &p);
        let soft = |i: &Instance| i.services.iter().map(|s| s.soft).collect::<Vec<_>>();
        assert_ne!(soft(&a), soft(&b));
    }

    #[test]
    fn zero_sizes_are_clamped() {
        let inst = generate_instance(0, 0, 1, &GeneratorProfile::default());
        assert_eq!(inst.n_services(), 1);
        assert_eq!(inst.n_caregivers(), 1);
    }

    #[test]
    fn suites_have_ten_instances_per_size() {
        for (n, p) in [(10, GeneratorProfile::solomon_10()), (15, GeneratorProfile::solomon_15())] {
            let suite = generate_suite(n, 3, 10, 7, &p);
            assert_eq!(suite.len(), 10);
            assert!(suite.iter().all(|i| i.n_services() == n && i.validate().is_ok()));
        }
    }

    #[test]
    fn tiny_profile_is_on_the_lattice() {
        for seed in 0..20 {
            let inst = generate_instance(5, 2, seed, &GeneratorProfile::tiny());
            inst.validate().unwrap();
            for s in &inst.services {
                for v in [s.duration, s.hard.start, s.hard.end, s.soft.start, s.soft.end] {
                    assert_eq!(v % 15, 0, "{s:?}");
                }
            }
            assert!(inst.travel.rows().iter().flatten().all(|v| v % 15 == 0));
        }
    }
}
