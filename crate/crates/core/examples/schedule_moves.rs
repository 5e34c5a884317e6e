//! The delay/advance moves of the third search step on the two six-visit
//! sample routes.

use hcsp::archive::{ParetoArchive, Provenance};
use hcsp::moves::{cost_move_options, shift_service, welfare_move_window};
use hcsp::samples::{cost_example, welfare_example};
use hcsp::{evaluate, Instance, ObjectiveWeights, Objectives, Solution};

fn after(inst: &Instance, sol: &Solution, shift: i64) -> Objectives {
    let mut s = sol.clone();
    *s.route_at_mut(0) = shift_service(inst, sol.route_at(0), 3, shift);
    evaluate(&s, inst, &ObjectiveWeights::for_instance(inst)).expect("complete").objectives
}

fn main() {
    let (inst, sol) = welfare_example();
    let w = welfare_move_window(&inst, sol.route_at(0), 3).expect("schedulable");
    println!("welfare move on visit 4: max delay {}, max advance {}", w.max_delay, w.max_advance);
    println!("  delay breakpoints {:?}, delay range {:?}", w.delay_breakpoints, w.delay_range);
    println!("  advance breakpoints {:?}, advance range {:?}", w.advance_breakpoints, w.advance_range);
    for shift in [0, 90, -90] {
        println!("  shift {shift:>4}: {}", after(&inst, &sol, shift));
    }

    let (inst, sol) = cost_example();
    let o = cost_move_options(&inst, sol.route_at(0), 3).expect("schedulable");
    println!("cost move on visit 4: max delay {}, max advance {}", o.max_delay, o.max_advance);
    let mut archive = ParetoArchive::from_points([Objectives::new(450, 30), Objectives::new(420, 120)]);
    for (name, shift) in [("shrink later", 60), ("grow before", 180), ("shrink earlier", -30), ("grow after", -120)] {
        let p = after(&inst, &sol, shift);
        let kept = archive.update(p, (), Provenance::CostMove);
        println!("  {name:<15} shift {shift:>4}: {p} {}", if kept { "kept" } else { "dominated" });
    }
    println!("archive: {:?}", archive.front().iter().map(ToString::to_string).collect::<Vec<_>>());
}
