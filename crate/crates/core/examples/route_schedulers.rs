//! Times one fixed visit order twice: welfare first, then cost first.

use hcsp::generator::{generate_instance, GeneratorProfile};
use hcsp::instance::{CaregiverIdx, Day, ServiceIdx};
use hcsp::scheduler::{schedule, Priority};
use hcsp::solution::{compute_day_metrics, summarize_route};

fn main() {
    let inst = generate_instance(10, 3, 7, &GeneratorProfile::solomon_10());
    let order: Vec<ServiceIdx> = [0, 6, 8, 4, 7].into_iter().map(ServiceIdx).collect();
    println!("caregiver 1, day 0, visits {:?}", order.iter().map(|s| s.0).collect::<Vec<_>>());
    for priority in [Priority::WelfareFirst, Priority::CostFirst] {
        let r = schedule(&inst, CaregiverIdx(1), Day::from_index(0), &order, priority).expect("order is schedulable");
        let m = compute_day_metrics(&r, &inst);
        let s = summarize_route(&r, &inst);
        println!(
            "{:<13} starts {:?}  paid {}  largest gap {} ({})  penalization {}",
            format!("{priority:?}"),
            r.starts(),
            m.paid,
            m.breaks.largest,
            if m.breaks.unpaid { "unpaid" } else { "paid" },
            s.penalization
        );
    }
}
