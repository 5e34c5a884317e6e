//! Small hand-built instances for examples and tests.
//!
//! Both route samples share one caregiver and six one-hour visits with the
//! same hard windows, so earliest and latest starts are
//! `(0, 120, 180, 240, 450, 540)` and `(180, 270, 450, 600, 720, 780)`. They
//! differ in soft windows and in the starting schedule.

use crate::instance::{
    Caregiver, CaregiverIdx, Day, Instance, InstanceMeta, Minutes, Service, ServiceIdx, TravelMatrix, Window, DAYS,
    DEFAULT_PI_MIN,
};
use crate::solution::{Route, Solution, Visit};

const HARD: [(Minutes, Minutes); 6] = [(0, 240), (120, 330), (180, 510), (240, 660), (450, 780), (540, 840)];

fn six_visit_route(soft: [(Minutes, Minutes); 6], starts: [Minutes; 6], name: &str) -> (Instance, Solution) {
    let mut availability = [None; DAYS];
    availability[0] = Some(Window::new(0, 1000));
    let mut daily_max = [0; DAYS];
    daily_max[0] = 720;
    let instance = Instance {
        meta: InstanceMeta { name: name.into(), ..Default::default() },
        pi_min: DEFAULT_PI_MIN,
        services: (0..6)
            .map(|k| Service {
                id: k as u32 + 1,
                user_id: k as u32 + 1,
                day: Day::from_index(0),
                duration: 60,
                hard: Window::new(HARD[k].0, HARD[k].1),
                soft: Window::new(soft[k].0, soft[k].1),
            })
            .collect(),
        caregivers: vec![Caregiver {
            id: 1,
            availability,
            weekly_agreed: 2400,
            daily_max,
            can_serve: vec![true; 6],
            affinity: vec![0; 6],
        }],
        travel: TravelMatrix::zeros(6),
    };
    let route = Route {
        caregiver: CaregiverIdx(0),
        day: Day::from_index(0),
        visits: (0..6).map(|k| Visit { service: ServiceIdx(k), start: starts[k] }).collect(),
    };
    let solution = Solution::from_routes(&instance, [route]).expect("valid sample");
    (instance, solution)
}

/// Route whose fourth visit has room to move without leaving its soft window.
/// Starting objectives: cost 570, penalization 30.
pub fn welfare_example() -> (Instance, Solution) {
    six_visit_route(
        [(150, 240), (210, 330), (300, 420), (240, 600), (480, 630), (600, 750)],
        [150, 210, 270, 390, 510, 660],
        "welfare-move-sample",
    )
}

/// Route with small gaps on both sides of the fourth visit, so that moving it
/// can either close gaps or open a deductible break.
/// Starting objectives: cost 570, penalization 30.
pub fn cost_example() -> (Instance, Solution) {
    six_visit_route(
        [(120, 240), (210, 330), (300, 420), (240, 600), (480, 630), (570, 720)],
        [90, 210, 300, 390, 510, 600],
        "cost-move-sample",
    )
}
