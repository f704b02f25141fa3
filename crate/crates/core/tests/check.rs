mod common;

use std::time::{Duration, Instant};

use apml::check::{check_proof_with, key_value_report, text_report, CheckOptions, RefTimeError};
use apml::{
    check_proof, explain_step, parse_model, time_of_reference, Condition, Model, Overall, Proof,
    Reference, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn proof(m: &Model) -> &Proof {
    m.contracts[0].proof.as_ref().unwrap()
}

#[test]
fn radder_proof_checks_quickly() {
    let m = common::corpus("radder.apml");
    let start = Instant::now();
    let r = check_proof(&m, &m.contracts[0], proof(&m));
    assert!(start.elapsed() < Duration::from_secs(1));
    assert!(r.is_ok(), "{}", text_report(&r));
    assert_eq!(r.records().count(), 4 * 9 + 3);
    for s in &r.steps {
        assert!(s.warnings.is_empty());
        assert_eq!(s.results.len(), 9);
    }
    assert_eq!(text_report(&r), "proof sum: 4/4 steps ok, ok\n");
}

#[test]
fn merge1_breaks_only_time_consistency_at_the_last_step() {
    let m = common::corpus("radder_merge1.apml");
    let r = check_proof(&m, &m.contracts[0], proof(&m));
    let failures: Vec<_> = r.failures().into_iter().map(|(s, c, _)| (s, c)).collect();
    assert_eq!(failures, [(Some(3), Condition::C2)]);
    assert_eq!(r.overall(), Overall::Violated);
    assert!(text_report(&r).contains("step 3: C2 violated: reference set 0 mixes times 5 and 4"));
}

#[test]
fn merge2_breaks_the_last_step() {
    let m = common::corpus("radder_merge2.apml");
    let r = check_proof(&m, &m.contracts[0], proof(&m));
    let failures: Vec<_> = r.failures().into_iter().collect();
    assert!(!failures.is_empty());
    assert!(failures.iter().all(|(s, _, _)| *s == Some(3)));
    assert!(failures
        .iter()
        .any(|(_, c, v)| *c == Condition::C5 && v.detail().contains("x#3")));
}

#[test]
fn shortened_contract_fails_the_final_time() {
    let m = common::corpus("radder_duration6.apml");
    let r = check_proof(&m, &m.contracts[0], proof(&m));
    assert!(r
        .failures()
        .into_iter()
        .any(|(s, c, _)| s.is_none() && c == Condition::Eq7));
}

#[test]
fn empty_proof_violates_c0() {
    let m = common::corpus("radder.apml");
    let r = check_proof(&m, &m.contracts[0], &Proof::default());
    assert_eq!(
        r.failures()
            .into_iter()
            .map(|(_, c, _)| c)
            .collect::<Vec<_>>(),
        [Condition::C0]
    );
}

#[test]
fn reference_times() {
    let m = common::corpus("radder.apml");
    let arch = &m.contracts[0].contract;
    let p = proof(&m);
    assert_eq!(time_of_reference(arch, p, 0, 0), Ok(0));
    assert_eq!(time_of_reference(arch, p, 3, 0), Ok(4));
    assert_eq!(time_of_reference(arch, p, 3, 1), Ok(5));
    assert_eq!(
        time_of_reference(arch, p, 9, 0),
        Err(RefTimeError::NoStep(9))
    );
    assert_eq!(
        time_of_reference(arch, p, 3, 2),
        Err(RefTimeError::NoRefSet(2))
    );
    let m1 = common::corpus("radder_merge1.apml");
    assert!(matches!(
        time_of_reference(arch, proof(&m1), 3, 0),
        Err(RefTimeError::Disagree { set: 0, .. })
    ));
}

#[test]
fn explanations_and_reports() {
    let m = common::corpus("radder.apml");
    let r = check_proof(&m, &m.contracts[0], proof(&m));
    let e = explain_step(&r, 3);
    let lines: Vec<&str> = e.lines().collect();
    assert_eq!(lines[0], "step 3 (s3 at 7) using Merger.merge3");
    assert_eq!(lines[1], "  substitution {x ↦ Basic.add[x, y]}");
    assert_eq!(
        lines[2],
        "  base time 4, rationale duration 3, result time 7"
    );
    assert!(lines[3..].iter().all(|l| l.ends_with(" ok")));
    assert!(explain_step(&r, 7).contains("no step 7"));

    let kv = key_value_report(&r);
    assert_eq!(kv.lines().count(), 39);
    assert_eq!(
        kv.lines().next().unwrap(),
        "proof=sum step=- condition=C0 verdict=ok detail=\"\""
    );
    assert!(kv.contains("proof=sum step=0 condition=RATIONALE verdict=ok"));
    assert!(kv.contains("proof=sum step=- condition=EQ7 verdict=ok detail=\"\""));
}

const AMBIGUOUS: &str = "Pattern A ShortName amb {
  DTSpec { DT B ( Sort N Predicate R: N, N ) }
  CTypes {
    CType W {
      InputPorts { InputPort i (Type: B.N) }
      OutputPorts { OutputPort o (Type: B.N) }
      Contracts {
        Contract pick { var v: B.N triggers { t: B.R[i, v] } guarantees { [o = v] } duration 1 }
      }
    }
  }
  Contracts {
    Contract k {
      var x: B.N, var y: B.N
      triggers { t1: B.R[W.i, x] /\\ B.R[W.i, y] }
      guarantees { [W.o = x] \\/ [W.o = y] }
      duration 1
      proof { s0: at 1 have [W.o = x] \\/ [W.o = y] from [t1] using W.pick }
    }
  }
}
";

#[test]
fn ambiguous_matches_are_reported() {
    let p = parse_model(AMBIGUOUS);
    assert!(!p.has_errors(), "{:?}", p.diagnostics);
    let m = p.model;
    let r = check_proof(&m, &m.contracts[0], proof(&m));
    assert!(r.is_ok(), "{}", text_report(&r));
    assert_eq!(r.steps[0].warnings.len(), 1);
    assert!(text_report(&r).contains("step 0: warning"));
    assert!(key_value_report(&r).contains("condition=AMBIGUOUS verdict=warning"));
}

#[test]
fn tiny_budgets_are_inconclusive() {
    let m = parse_model(AMBIGUOUS).model;
    let r = check_proof_with(
        &m,
        &m.contracts[0],
        proof(&m),
        CheckOptions { dnf_budget: 1 },
    );
    assert_eq!(r.overall(), Overall::Inconclusive);
    let (_, _, v) = r.failures().into_iter().next().unwrap();
    assert!(matches!(v, Verdict::Inconclusive(_)));
    assert!(explain_step(&r, 0).contains("let Isabelle decide"));
}

/// Time of a reference, computed directly from the proof.
fn naive_time(arch: &apml::Contract, p: &Proof, r: &Reference) -> u32 {
    match r {
        Reference::Trigger(k) => arch.triggers[*k].time,
        Reference::Step { step, .. } => p.steps[*step].time,
    }
}

/// Timing verdicts (C2, C4, EQ7) recomputed from their definitions.
fn naive_timing(m: &Model, p: &Proof) -> (Vec<(bool, bool)>, bool) {
    let arch = &m.contracts[0].contract;
    let steps = p
        .steps
        .iter()
        .map(|s| {
            let c = m.contract(&s.rationale).unwrap();
            let times: Vec<Vec<u32>> = s
                .refs
                .iter()
                .map(|set| set.iter().map(|r| naive_time(arch, p, r)).collect())
                .collect();
            let base = times
                .first()
                .and_then(|t| t.first())
                .map_or(s.time as i64 - c.duration as i64, |&t| t as i64);
            let c2 = times
                .iter()
                .zip(&c.triggers)
                .all(|(ts, tr)| ts.iter().all(|&t| t as i64 == base + tr.time as i64));
            let c4 = base >= 0 && s.time as i64 == base + c.duration as i64;
            (c2, c4)
        })
        .collect();
    (
        steps,
        p.steps.last().is_some_and(|s| s.time == arch.duration),
    )
}

#[test]
fn timing_conditions_match_their_definitions() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut models = vec![common::corpus("radder.apml")];
    while models.len() < 40 {
        if let Some(m) = common::random_proved_model(&mut rng) {
            models.push(m);
        }
    }
    let mut broken = 0;
    for m in &models {
        for _ in 0..25 {
            let mut p = proof(m).clone();
            for s in &mut p.steps {
                if rng.gen_bool(0.3) {
                    s.time = (s.time as i64 + rng.gen_range(-2..=2)).max(0) as u32;
                }
            }
            let r = check_proof(m, &m.contracts[0], &p);
            let (steps, eq7) = naive_timing(m, &p);
            for (i, (c2, c4)) in steps.iter().enumerate() {
                let verdict = |c: Condition| {
                    r.steps[i]
                        .results
                        .iter()
                        .find(|(k, _)| *k == c)
                        .map(|(_, v)| v.is_ok())
                };
                if let Some(ok) = verdict(Condition::C2) {
                    assert_eq!(ok, *c2, "C2 at step {i}");
                    if ok {
                        assert_eq!(verdict(Condition::C4), Some(*c4), "C4 at step {i}");
                    }
                }
                broken += usize::from(!c2 || !c4);
            }
            let g = r.global.iter().find(|(c, _)| *c == Condition::Eq7).unwrap();
            assert_eq!(g.1.is_ok(), eq7);
        }
    }
    assert!(broken > 100);
}

#[test]
fn tgmt_verdicts_are_stable() {
    let m = parse_model(&common::corpus_text("tgmt.apml")).model;
    let actual: String = m
        .contracts
        .iter()
        .filter_map(|a| {
            a.proof
                .as_ref()
                .map(|p| key_value_report(&check_proof(&m, a, p)))
        })
        .collect();
    assert_eq!(actual, common::corpus_text("tgmt.verdicts"));
}
