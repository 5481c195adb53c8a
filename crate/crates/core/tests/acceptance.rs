//! Runs every acceptance criterion and prints one PASS/FAIL line per
//! criterion. The process exits 0 either way; the lines are the result.

mod common;

use std::time::{Duration, Instant};

use valid_ode::cases::{run_case, CaseConfig, CaseKind};

struct Outcome {
    pass: bool,
    detail: String,
}

fn case(kind: CaseKind, limit: Duration) -> Outcome {
    let start = Instant::now();
    let result = run_case(&CaseConfig::new(kind));
    let elapsed = start.elapsed();
    let timing = format!("{:.2} s of {} s", elapsed.as_secs_f64(), limit.as_secs());
    match result {
        Err(e) => Outcome { pass: false, detail: format!("runtime error: {e} ({timing})") },
        Ok(out) => {
            let cert = &out.certificate;
            let failures: Vec<String> = cert
                .failures()
                .take(3)
                .map(|c| format!("{} {:?} {:?} {:e}", c.description, c.bound, c.op, c.threshold))
                .collect();
            let mut pass = cert.overall && cert.recheck() && !cert.checks.is_empty();
            let mut detail = format!("{} checks, {timing}", cert.checks.len());
            if elapsed > limit {
                pass = false;
                detail.push_str(", over the time limit");
            }
            if !failures.is_empty() {
                detail.push_str(&format!("; failing: {}", failures.join("; ")));
            }
            for line in &out.report {
                println!("    {line}");
            }
            Outcome { pass, detail }
        }
    }
}

fn properties() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    let mut record = |name: &str, t: &common::Tally, extra: bool| {
        pass &= t.violations == 0 && extra;
        parts.push(format!("{name} {}/{}", t.trials - t.violations, t.trials));
        if let Some(first) = &t.first {
            println!("    {name}: first violation {first:?}");
        }
    };
    let t = common::interval_fuzz(1_000_000, 1);
    record("interval ops", &t, t.trials == 1_000_000);
    let t = common::solver_containment(50, 2);
    record("solver containment", &t, t.trials >= 50 * 4);
    let t = common::c1_against_differences(20, 3);
    record("C1 vs differences", &t, t.trials == 20 * 4);
    let (t, decisive) = common::newton_soundness(100, 20, 4);
    record("newton soundness", &t, decisive > 0);
    let (t, accepted) = common::posdef_agreement(10_000, 5);
    record("posdef agreement", &t, t.trials == 10_000 && accepted > 0);
    Outcome { pass, detail: format!("{}, {:.2} s", parts.join(", "), start.elapsed().as_secs_f64()) }
}

type Criterion = (&'static str, Box<dyn Fn() -> Outcome>);

fn main() {
    let secs = Duration::from_secs;
    let criteria: [Criterion; 8] = [
        ("1 rossler trapping region", Box::new(move || case(CaseKind::RosslerTrap, secs(60)))),
        ("2 michelson symmetric orbits", Box::new(move || case(CaseKind::MichelsonSymmetric, secs(120)))),
        ("3 rossler periodic orbits", Box::new(move || case(CaseKind::RosslerPeriodic, secs(120)))),
        ("4 rossler horseshoe", Box::new(move || case(CaseKind::RosslerHorseshoe, secs(300)))),
        ("5 nakao boundary value problem", Box::new(move || case(CaseKind::BvpNakao, secs(60)))),
        ("6 lorenz coordinate change", Box::new(move || case(CaseKind::LorenzCoords, secs(120)))),
        ("7 pendulum representation", Box::new(move || case(CaseKind::PendulumRepr, secs(60)))),
        ("8 property suites", Box::new(properties)),
    ];
    let mut passed = 0;
    for (name, run) in &criteria {
        println!("criterion {name}");
        let o = run();
        passed += o.pass as usize;
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("{passed}/{} criteria passed", criteria.len());
}
