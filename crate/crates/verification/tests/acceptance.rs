//! Acceptance suite. Prints one PASS/FAIL line per criterion, followed by the
//! measured checks behind it, and exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use ionqed::verify::{self, Check, Invariants, Profile};

struct Criterion {
    name: &'static str,
    checks: Vec<Check>,
}

impl Criterion {
    fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }
}

fn main() -> ExitCode {
    let profile = Profile::default();
    let start = Instant::now();
    let mut inv = Invariants::default();
    let mut criteria = Vec::new();

    let (c, i) = verify::oracle_equivalence(&profile).expect("oracle equivalence");
    inv.absorb(i);
    criteria.push(Criterion { name: "oracle equivalence, single subsystem", checks: vec![c] });

    let c = verify::unshifted_d_norm_defect(&profile).expect("unshifted D");
    criteria.push(Criterion { name: "uncorrected D coefficient breaks the norm", checks: vec![c] });

    let (c, i) = verify::map_consistency(&profile).expect("map consistency");
    inv.absorb(i);
    criteria.push(Criterion { name: "process matrix matches direct evolution", checks: vec![c] });

    let (c, i) = verify::two_qubit_oracle(&profile).expect("two-qubit oracle");
    inv.absorb(i);
    criteria.push(Criterion { name: "two-qubit map matches four-mode oracle", checks: vec![c] });

    let (c, i) = verify::exact_anchors(&profile).expect("anchors");
    inv.absorb(i);
    criteria.push(Criterion { name: "exact anchors", checks: c });

    let (c, i) = verify::qualitative_trends(&profile).expect("trends");
    inv.absorb(i);
    let labels = [
        "trend (a): coherence half-time non-decreasing in |beta|^2",
        "trend (b): concurrence extinction non-increasing in |beta|^2",
        "trend (c): TQC half-time non-decreasing in |beta|^2",
        "trend (d): balanced qubit keeps C(t) > 0, excited qubit reaches C(t) <= 0",
    ];
    let mut trend_checks = c.into_iter();
    for (k, name) in labels.into_iter().enumerate() {
        // (d) is reported as two checks
        let n = if k == 3 { 2 } else { 1 };
        criteria.push(Criterion { name, checks: trend_checks.by_ref().take(n).collect() });
    }
    assert!(trend_checks.next().is_none(), "unexpected extra trend checks");

    let (c, i) = verify::stationary_revival(&profile).expect("revival");
    inv.absorb(i);
    criteria.push(Criterion { name: "stationary baseline revival time", checks: vec![c] });

    criteria.push(Criterion { name: "density-matrix invariants across all suites", checks: verify::density_invariants(&inv, &profile) });

    let c = verify::propagator_agreement(&profile).expect("propagators");
    criteria.push(Criterion { name: "oracle self-check: block vs Taylor propagator", checks: vec![c] });

    let mut failed = 0;
    for crit in &criteria {
        let ok = crit.passed();
        failed += usize::from(!ok);
        println!("{} {}", if ok { "PASS" } else { "FAIL" }, crit.name);
        for c in &crit.checks {
            println!("    {c}");
        }
    }
    println!(
        "acceptance: {} criteria, {} passed, {} failed ({:.1} s)",
        criteria.len(),
        criteria.len() - failed,
        failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
