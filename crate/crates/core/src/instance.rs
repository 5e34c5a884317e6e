//! Problem data: services, caregivers, travel times and the canonical JSON file format.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer minutes. Start times are measured from the start of the day.
pub type Minutes = i64;

/// Days in a planning week.
pub const DAYS: usize = 7;

/// Length of one day; every time value lies in `[0, DAY_LENGTH]`.
pub const DAY_LENGTH: Minutes = 1440;

/// Default minimum length for the largest break of a day to be unpaid.
pub const DEFAULT_PI_MIN: Minutes = 120;

/// Highest affinity level between a caregiver and a service.
pub const MAX_AFFINITY: u8 = 5;

/// A closed interval of minutes, serialized as `[start, end]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[Minutes; 2]", into = "[Minutes; 2]")]
pub struct Window {
    pub start: Minutes,
    pub end: Minutes,
}

impl Window {
    pub const fn new(start: Minutes, end: Minutes) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> Minutes {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, t: Minutes) -> bool {
        self.start <= t && t <= self.end
    }
}

impl From<[Minutes; 2]> for Window {
    fn from([start, end]: [Minutes; 2]) -> Self {
        Self { start, end }
    }
}

impl From<Window> for [Minutes; 2] {
    fn from(w: Window) -> Self {
        [w.start, w.end]
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.start, self.end)
    }
}

/// Day of the week, stored 1-based in files and 0-based in memory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Day(u8);

impl Day {
    /// `index` is 0-based and must be below [`DAYS`].
    pub fn from_index(index: usize) -> Self {
        assert!(index < DAYS, "day index {index} out of range");
        Self(index as u8)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn number(self) -> u8 {
        self.0 + 1
    }

    pub fn all() -> impl Iterator<Item = Day> {
        (0..DAYS).map(Day::from_index)
    }
}

impl Serialize for Day {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u8(self.number())
    }
}

impl<'de> Deserialize<'de> for Day {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let n = u8::deserialize(d)?;
        if (1..=DAYS as u8).contains(&n) {
            Ok(Day(n - 1))
        } else {
            Err(serde::de::Error::custom(format!("day must be in 1..=7, got {n}")))
        }
    }
}

impl fmt::Display for Day {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "day {}", self.number())
    }
}

/// 0-based service index into [`Instance::services`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ServiceIdx(pub usize);

/// 0-based caregiver index into [`Instance::caregivers`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CaregiverIdx(pub usize);

impl fmt::Display for ServiceIdx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "service {}", self.0 + 1)
    }
}

impl fmt::Display for CaregiverIdx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "caregiver {}", self.0 + 1)
    }
}

/// A visit to be performed at a user's home on one day.
///
/// Windows are those of the owning day; on every other day the hard window is
/// collapsed and the service cannot be performed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Service {
    pub id: u32,
    pub user_id: u32,
    pub day: Day,
    pub duration: Minutes,
    /// Must start and finish inside this window.
    pub hard: Window,
    /// Preferred window; deviations are penalized minute by minute.
    pub soft: Window,
}

impl Service {
    /// Latest start that still finishes inside the hard window.
    pub fn latest_start(&self) -> Minutes {
        self.hard.end - self.duration
    }

    /// Minutes started before the soft window plus minutes finished after it.
    pub fn penalization_at(&self, start: Minutes) -> Minutes {
        (self.soft.start - start).max(0) + (start + self.duration - self.soft.end).max(0)
    }

    /// Largest penalization any start inside the hard window can incur.
    pub fn penalization_bound(&self) -> Minutes {
        (self.soft.start - self.hard.start) + (self.hard.end - self.soft.end)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caregiver {
    pub id: u32,
    /// Working window per day, `None` when the caregiver is off.
    pub availability: [Option<Window>; DAYS],
    /// Agreed weekly working time; paid time beyond it is overtime.
    pub weekly_agreed: Minutes,
    /// Maximum paid time per day.
    pub daily_max: [Minutes; DAYS],
    /// Compatibility with every service, indexed like `Instance::services`.
    pub can_serve: Vec<bool>,
    /// Affinity level in `0..=5` per service; 0 for incompatible pairs.
    pub affinity: Vec<u8>,
}

impl Caregiver {
    pub fn window(&self, day: Day) -> Option<Window> {
        self.availability[day.index()]
    }

    pub fn daily_max(&self, day: Day) -> Minutes {
        self.daily_max[day.index()]
    }

    pub fn serves(&self, service: ServiceIdx) -> bool {
        self.can_serve[service.0]
    }

    pub fn affinity(&self, service: ServiceIdx) -> u8 {
        self.affinity[service.0]
    }
}

/// Square travel-time matrix over services. Travel to the end-of-day dummy is 0
/// and is not stored.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TravelMatrix(Vec<Vec<Minutes>>);

impl TravelMatrix {
    pub fn new(rows: Vec<Vec<Minutes>>) -> Self {
        Self(rows)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![vec![0; n]; n])
    }

    pub fn get(&self, from: ServiceIdx, to: ServiceIdx) -> Minutes {
        self.0[from.0][to.0]
    }

    pub fn set(&mut self, from: ServiceIdx, to: ServiceIdx, minutes: Minutes) {
        self.0[from.0][to.0] = minutes;
    }

    pub fn rows(&self) -> &[Vec<Minutes>] {
        &self.0
    }

    pub fn max(&self) -> Minutes {
        self.0.iter().flatten().copied().max().unwrap_or(0)
    }
}

/// Provenance of an instance. `notes` records generator choices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub name: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub profile: Option<String>,
    #[serde(default)]
    pub notes: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub meta: InstanceMeta,
    pub pi_min: Minutes,
    pub services: Vec<Service>,
    pub caregivers: Vec<Caregiver>,
    pub travel: TravelMatrix,
}

/// One broken invariant, located by a JSON-style field path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldViolation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for FieldViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl Instance {
    pub fn service(&self, j: ServiceIdx) -> &Service {
        &self.services[j.0]
    }

    pub fn caregiver(&self, i: CaregiverIdx) -> &Caregiver {
        &self.caregivers[i.0]
    }

    pub fn travel(&self, from: ServiceIdx, to: ServiceIdx) -> Minutes {
        self.travel.get(from, to)
    }

    pub fn n_services(&self) -> usize {
        self.services.len()
    }

    pub fn n_caregivers(&self) -> usize {
        self.caregivers.len()
    }

    pub fn service_indices(&self) -> impl Iterator<Item = ServiceIdx> {
        (0..self.services.len()).map(ServiceIdx)
    }

    pub fn caregiver_indices(&self) -> impl Iterator<Item = CaregiverIdx> {
        (0..self.caregivers.len()).map(CaregiverIdx)
    }

    /// Caregivers that are compatible with `j` and work on its day.
    pub fn candidates(&self, j: ServiceIdx) -> impl Iterator<Item = CaregiverIdx> + '_ {
        let day = self.service(j).day;
        self.caregiver_indices().filter(move |&i| {
            let c = self.caregiver(i);
            c.serves(j) && c.window(day).is_some()
        })
    }

    /// Checks every invariant and reports all violations at once.
    pub fn violations(&self) -> Vec<FieldViolation> {
        let mut out = Vec::new();
        let mut push = |path: String, message: String| out.push(FieldViolation { path, message });
        let n = self.services.len();

        if self.pi_min <= 0 {
            push("pi_min".into(), format!("must be positive, got {}", self.pi_min));
        }
        for (k, s) in self.services.iter().enumerate() {
            let p = format!("services[{k}]");
            if s.id as usize != k + 1 {
                push(format!("{p}.id"), format!("ids must be dense 1..={n}, got {}", s.id));
            }
            if s.duration < 0 {
                push(format!("{p}.duration"), format!("must be non-negative, got {}", s.duration));
            }
            if s.hard.start < 0 || s.hard.end > DAY_LENGTH || s.hard.start > s.hard.end {
                push(format!("{p}.hard"), format!("{} is not a window inside [0, {DAY_LENGTH}]", s.hard));
            }
            if s.soft.start < s.hard.start {
                push(format!("{p}.soft"), format!("soft start {} precedes hard start {}", s.soft.start, s.hard.start));
            }
            if s.soft.end < s.soft.start {
                push(format!("{p}.soft"), format!("soft window {} is reversed", s.soft));
            }
            if s.soft.end > s.hard.end {
                push(format!("{p}.soft"), format!("soft end {} exceeds hard end {}", s.soft.end, s.hard.end));
            }
            if s.duration > s.hard.len() {
                push(format!("{p}.duration"), format!("{} does not fit hard window {}", s.duration, s.hard));
            }
        }

        let m = self.caregivers.len();
        for (k, c) in self.caregivers.iter().enumerate() {
            let p = format!("caregivers[{k}]");
            if c.id as usize != k + 1 {
                push(format!("{p}.id"), format!("ids must be dense 1..={m}, got {}", c.id));
            }
            if c.weekly_agreed < 0 {
                push(format!("{p}.weekly_agreed"), "must be non-negative".into());
            }
            for d in Day::all() {
                let max = c.daily_max(d);
                if max < 0 {
                    push(format!("{p}.daily_max[{}]", d.index()), "must be non-negative".into());
                }
                if let Some(w) = c.window(d) {
                    if w.start < 0 || w.end > DAY_LENGTH || w.start > w.end {
                        push(
                            format!("{p}.availability[{}]", d.index()),
                            format!("{w} is not a window inside [0, {DAY_LENGTH}]"),
                        );
                    } else if max > w.len() {
                        push(
                            format!("{p}.daily_max[{}]", d.index()),
                            format!("{max} exceeds availability length {}", w.len()),
                        );
                    }
                }
            }
            if c.can_serve.len() != n {
                push(format!("{p}.can_serve"), format!("expected {n} entries, got {}", c.can_serve.len()));
            }
            if c.affinity.len() != n {
                push(format!("{p}.affinity"), format!("expected {n} entries, got {}", c.affinity.len()));
            }
            for (j, &a) in c.affinity.iter().enumerate() {
                if a > MAX_AFFINITY {
                    push(format!("{p}.affinity[{j}]"), format!("level {a} exceeds {MAX_AFFINITY}"));
                } else if a != 0 && !c.can_serve.get(j).copied().unwrap_or(true) {
                    push(format!("{p}.affinity[{j}]"), "must be 0 for an incompatible service".into());
                }
            }
        }

        if self.travel.rows().len() != n {
            push("travel".into(), format!("expected {n} rows, got {}", self.travel.rows().len()));
        }
        for (j, row) in self.travel.rows().iter().enumerate() {
            if row.len() != n {
                push(format!("travel[{j}]"), format!("expected {n} columns, got {}", row.len()));
            }
            for (k, &v) in row.iter().enumerate() {
                if v < 0 {
                    push(format!("travel[{j}][{k}]"), format!("must be non-negative, got {v}"));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidInstance(v))
        }
    }

    /// Canonical JSON text: object keys sorted, two-space indentation, trailing newline.
    pub fn to_canonical_json(&self) -> String {
        // serde_json::Value keeps keys in a BTreeMap, which sorts them.
        let value = serde_json::to_value(self).expect("instance serializes");
        let mut text = serde_json::to_string_pretty(&value).expect("value serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let inst: Instance = serde_json::from_str(text)?;
        inst.validate()?;
        Ok(inst)
    }
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Instance::from_json(&text)
}

pub fn save_instance(instance: &Instance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, instance.to_canonical_json()).map_err(|e| Error::io(path, e))
}
