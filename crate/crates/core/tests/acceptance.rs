mod common;

use std::time::{Duration, Instant};

use lysa::cfa::{check, AnalysisOptions, SolverOptions};
use lysa::exec::{capture_round, replay_round, Event};
use lysa::model::CryptoPoint;
use lysa::scenario::{corpus, run_scenario, run_scenario_full, Scenario, CASE1_BASE, CASE1_FIXED, EXAMPLE2};
use lysa::{analyze, confidential, parse_process, AbstractValue, AttackerConfig, Ident};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let x = f();
    (x, t.elapsed())
}

fn scenario(name: &str) -> Scenario {
    corpus().into_iter().find(|s| s.name == name).expect(name)
}

fn golden_without_attacker() -> Outcome {
    let p = parse_process(EXAMPLE2).map_err(|e| e.to_string())?;
    let (r, t) = timed(|| analyze(&p, &AnalysisOptions::default()));
    let r = r.map_err(|e| e.to_string())?;
    let kappa = r.render_kappa();
    let rho: usize = r.rho_summary().iter().map(|(_, vs)| vs.len()).sum();
    let facts = kappa.len() + rho + r.psi.len();
    let expected = kappa.len() == 1
        && r.rho_contains(&Ident::new("xKA"), &AbstractValue::name("KA"))
        && r.rho_contains(&Ident::new("xK"), &AbstractValue::name("K"))
        && r.rho_of(&Ident::new("x")).len() == 1;
    if facts == 4 && expected && r.psi.is_empty() && t < Duration::from_secs(1) {
        Ok(format!("{facts} facts in {t:?}"))
    } else {
        Err(format!("{facts} facts, κ {kappa:?}, ψ {:?}, {t:?}", r.psi))
    }
}

fn golden_with_attacker() -> Outcome {
    let p = parse_process(EXAMPLE2).map_err(|e| e.to_string())?;
    let opts = AnalysisOptions {
        attacker: Some(AttackerConfig::for_process(&p)),
        ..Default::default()
    };
    let (r, t) = timed(|| analyze(&p, &opts));
    let r = r.map_err(|e| e.to_string())?;
    let known = r.render_set(r.attacker.as_ref().unwrap());
    let mut missing: Vec<&str> = ["KA", "K", "{K}:KA[at lA dest {lB}]"]
        .into_iter()
        .filter(|k| !known.iter().any(|x| x == k))
        .collect();
    if !r.psi.contains(&(CryptoPoint::label("lA"), CryptoPoint::Attacker)) {
        missing.push("(lA, l•) in ψ");
    }
    if confidential(&r, &Ident::new("K")) {
        missing.push("K leaked");
    }
    if missing.is_empty() && t < Duration::from_secs(1) {
        Ok(format!("ρ(z•) has {} values, ψ {:?}, {t:?}", known.len(), r.psi.len()))
    } else {
        Err(format!("missing {missing:?}, {t:?}"))
    }
}

fn flaws() -> Outcome {
    let mut lines = Vec::new();
    let mut bad = Vec::new();
    for base in ["case1-base-2r", "case2-base-2r", "case1-fixed-2r", "case2-fixed-2r"] {
        for suffix in ["", "-legit"] {
            let name = format!("{base}{suffix}");
            let (r, t) = timed(|| run_scenario(&scenario(&name)));
            let r = r.map_err(|e| e.to_string())?;
            let leaked = r.verdicts.confidential.values().any(|&c| !c);
            let ok = if base.contains("base") {
                leaked && !r.psi.is_empty()
            } else {
                !leaked && r.psi.is_empty()
            };
            if !(ok && r.verdicts.expectations_met && t < Duration::from_secs(10)) {
                bad.push(format!("{name}: ψ {} leaked {leaked} {:?} {t:?}", r.psi.len(), r.verdicts.mismatches));
            }
            lines.push(format!("{name} {}ms", t.as_millis()));
        }
    }
    if bad.is_empty() {
        Ok(lines.join(", "))
    } else {
        Err(bad.join("; "))
    }
}

fn soundness() -> Outcome {
    let mut bad = Vec::new();
    let models = common::corpus_models();
    for s in &models {
        let s = common::reduced(s);
        let (p, _) = s.process().map_err(|e| e.to_string())?;
        let missing = common::uncovered_events(&p, 6);
        if !missing.is_empty() {
            bad.push(format!("{}: {missing:?}", s.name));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..200 {
        let p = common::random_process(&mut rng, 12);
        let missing = common::uncovered_events(&p, 6);
        if !missing.is_empty() {
            bad.push(format!("random #{i} {}: {missing:?}", lysa::pretty(&p)));
        }
    }
    if bad.is_empty() {
        Ok(format!("{} corpus models and 200 random processes covered at depth 6", models.len()))
    } else {
        Err(bad.join("; "))
    }
}

fn single_instance(src: &str) -> Result<lysa::Process, String> {
    let mut s = Scenario::new("t", "t.lysa", src);
    s.index_sets = [("X".to_string(), [1].into())].into();
    s.process().map(|(p, _)| p).map_err(|e| e.to_string())
}

fn replay_witness() -> Outcome {
    let base = single_instance(CASE1_BASE)?;
    let round = capture_round(&base, 12, "xLK");
    let ex = replay_round(&base, &round, 12, "xLK");
    let found = ex.witness.as_ref().is_some_and(|w| {
        matches!(w.events.last(), Some(Event::Bound { var, value, .. })
            if var.base == "xLK" && round.bound.contains(value))
    });
    let fixed = single_instance(CASE1_FIXED)?;
    let round = capture_round(&fixed, 12, "xLK");
    let fx = replay_round(&fixed, &round, 12, "xLK");
    if found && fx.witness.is_none() && !fx.truncated {
        Ok(format!(
            "base witness of {} events; fixed explored {} states without one",
            ex.witness.unwrap().events.len(),
            fx.states
        ))
    } else {
        Err(format!("base found {found}, fixed witness {}", fx.witness.is_some()))
    }
}

fn solver_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut bad = Vec::new();
    let mut deletions = 0;
    for s in common::corpus_models() {
        let (p, r, report) = run_scenario_full(&s).map_err(|e| e.to_string())?;
        if !check(&p, &r) {
            bad.push(format!("{}: solution rejected", s.name));
        }
        let all = common::elements(&r);
        for e in all.choose_multiple(&mut rng, 20) {
            deletions += 1;
            if check(&p, &common::without(&r, e)) {
                bad.push(format!("{}: deleting {e:?} kept a solution", s.name));
            }
        }
        for seed in [11, 12] {
            let mut t = s.clone();
            t.solver = SolverOptions {
                shuffle_seed: Some(seed),
                ..s.solver.clone()
            };
            let other = run_scenario(&t).map_err(|e| e.to_string())?;
            if other.fingerprint() != report.fingerprint() {
                bad.push(format!("{}: seed {seed} changed the report", s.name));
            }
        }
    }
    if bad.is_empty() {
        Ok(format!("{deletions} deletions all rejected; shuffled orders agree"))
    } else {
        Err(bad.join("; "))
    }
}

fn scaling() -> Outcome {
    let at = |n: u32| -> Result<Duration, String> {
        let mut s = scenario("case1-base");
        s.index_sets = [("X".to_string(), (1..=n).collect())].into();
        let mut best = Duration::MAX;
        for _ in 0..3 {
            let (r, t) = timed(|| run_scenario(&s));
            r.map_err(|e| e.to_string())?;
            best = best.min(t);
        }
        Ok(best)
    };
    let small = at(3)?;
    let large = at(6)?;
    let ratio = large.as_secs_f64() / small.as_secs_f64().max(1e-6);
    let line = format!("|X|=3 {small:?}, |X|=6 {large:?}, ratio {ratio:.1}");
    if ratio < 50.0 {
        Ok(line)
    } else {
        Err(line)
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("key transport without attacker", golden_without_attacker),
        ("key transport with attacker", golden_with_attacker),
        ("flaws and fixes", flaws),
        ("soundness against execution", soundness),
        ("replay witness", replay_witness),
        ("solver minimality and determinism", solver_properties),
        ("scaling", scaling),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
