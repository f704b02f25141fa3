mod common;

use std::collections::{BTreeMap, HashMap};

use apml::oracle::{
    compose_behaviors, parse_universe, trace_satisfies, verify_satisfaction, BehaviorSpec,
    FiniteUniverse, OracleError, Satisfies, Trace, Verification,
};
use apml::{Contract, Model, PortRef, Predicate, Term};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------
// Naive reference semantics

fn value(
    u: &FiniteUniverse,
    tr: &Trace,
    t: usize,
    env: &HashMap<String, usize>,
    term: &Term,
) -> usize {
    match term {
        Term::Var(v) => env[&v.name],
        Term::Port(p) => {
            let i = tr.ports.iter().position(|q| q == p).unwrap();
            tr.valuations[t][i]
        }
        Term::App(f, args) => {
            let a: Vec<usize> = args.iter().map(|x| value(u, tr, t, env, x)).collect();
            u.apply(f, &a).unwrap()
        }
    }
}

fn truth(
    u: &FiniteUniverse,
    tr: &Trace,
    t: usize,
    env: &HashMap<String, usize>,
    p: &Predicate,
) -> bool {
    match p {
        Predicate::Eq(a, b) => value(u, tr, t, env, a) == value(u, tr, t, env, b),
        Predicate::Atom(s, args) => {
            let a: Vec<usize> = args.iter().map(|x| value(u, tr, t, env, x)).collect();
            u.holds(s, &a)
        }
        Predicate::And(ps) => ps.iter().all(|q| truth(u, tr, t, env, q)),
        Predicate::Or(ps) => ps.iter().any(|q| truth(u, tr, t, env, q)),
    }
}

/// Least violating window, trying variable values recursively.
fn naive_violation(u: &FiniteUniverse, tr: &Trace, c: &Contract) -> Option<usize> {
    fn search(
        u: &FiniteUniverse,
        tr: &Trace,
        c: &Contract,
        n: usize,
        k: usize,
        env: &mut HashMap<String, usize>,
    ) -> bool {
        if k == c.variables.len() {
            let fired = c
                .triggers
                .iter()
                .all(|g| truth(u, tr, n + g.time as usize, env, &g.predicate));
            return fired && !truth(u, tr, n + c.duration as usize, env, &c.guarantee);
        }
        let v = &c.variables[k];
        for x in 0..u.size(&v.sort) {
            env.insert(v.name.clone(), x);
            if search(u, tr, c, n, k + 1, env) {
                return true;
            }
        }
        false
    }
    (0..tr.valuations.len())
        .take_while(|n| n + (c.duration as usize) < tr.valuations.len())
        .find(|&n| search(u, tr, c, n, 0, &mut HashMap::new()))
}

/// Every trace of length `h` in which connected ports agree, by counting
/// through all values of one cell per connected port group.
fn all_connected_traces(model: &Model, u: &FiniteUniverse, h: usize) -> Vec<Trace> {
    let ports = model.all_ports();
    let source = |p: &PortRef| -> PortRef {
        let mut p = p.clone();
        while let Some(c) = model.connections.iter().find(|c| c.input == p) {
            p = c.output.clone();
        }
        p
    };
    let reps: Vec<PortRef> = ports.iter().map(source).collect();
    let mut groups: Vec<PortRef> = reps.clone();
    groups.sort();
    groups.dedup();
    let sizes: Vec<usize> = groups
        .iter()
        .map(|g| u.size(model.port_sort(g).unwrap()))
        .collect();
    let cells = groups.len() * h;
    let mut digits = vec![0usize; cells];
    let mut out = Vec::new();
    loop {
        let valuations = (0..h)
            .map(|t| {
                reps.iter()
                    .map(|r| digits[t * groups.len() + groups.iter().position(|g| g == r).unwrap()])
                    .collect()
            })
            .collect();
        out.push(Trace {
            ports: ports.clone(),
            valuations,
        });
        let mut i = 0;
        loop {
            if i == cells {
                return out;
            }
            digits[i] += 1;
            if digits[i] < sizes[i % groups.len()] {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

fn brute_compose(model: &Model, u: &FiniteUniverse, h: usize) -> Vec<Trace> {
    let mut out: Vec<Trace> = all_connected_traces(model, u, h)
        .into_iter()
        .filter(|t| {
            model.components.iter().all(|c| {
                c.contracts
                    .iter()
                    .all(|k| k.duration as usize >= h || naive_violation(u, t, k).is_none())
            })
        })
        .collect();
    out.sort();
    out
}

fn cells(model: &Model, h: usize) -> usize {
    let mut groups: Vec<PortRef> = model.all_ports();
    groups.retain(|p| !model.connections.iter().any(|c| c.input == *p));
    groups.len() * h
}

/// Small random proved models paired with horizons that keep exhaustive
/// enumeration cheap.
fn small_cases(seed: u64, count: usize, max_cells: usize) -> Vec<(Model, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let Some(m) = common::random_proved_model(&mut rng) else {
            continue;
        };
        let h = m.contracts[0].contract.duration as usize + 1;
        if cells(&m, h) <= max_cells {
            out.push((m, h));
        }
    }
    out
}

// ---------------------------------------------------------------------
// Satisfaction

#[test]
fn trace_satisfies_agrees_with_naive_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    let mut violated = 0;
    while checked < 500 {
        let Some(m) = common::random_proved_model(&mut rng) else {
            continue;
        };
        let size = rng.gen_range(1..=3);
        let u = common::random_universe(&m, &mut rng, size);
        let h = rng.gen_range(1..=8);
        let ports = m.all_ports();
        let tr = Trace {
            ports: ports.clone(),
            valuations: (0..h)
                .map(|_| ports.iter().map(|_| rng.gen_range(0..size)).collect())
                .collect(),
        };
        let contracts: Vec<&Contract> = m
            .components
            .iter()
            .flat_map(|c| &c.contracts)
            .chain(std::iter::once(&m.contracts[0].contract))
            .collect();
        for c in contracts {
            checked += 1;
            match trace_satisfies(&u, &tr, c) {
                Err(OracleError::HorizonTooSmall { .. }) => assert!(h <= c.duration as usize),
                Ok(Satisfies::Yes) => assert_eq!(naive_violation(&u, &tr, c), None),
                Ok(Satisfies::No { window, .. }) => {
                    violated += 1;
                    assert_eq!(naive_violation(&u, &tr, c), Some(window))
                }
                Err(e) => panic!("{e}"),
            }
        }
    }
    assert!(
        violated > 50,
        "only {violated} violations among {checked} checks"
    );
}

fn radder() -> (Model, FiniteUniverse) {
    let m = common::corpus("radder.apml");
    let u = FiniteUniverse::numeric(&m, 8);
    (m, u)
}

/// Trace over all ports of `m`, zero except for the listed cells.
fn sparse(m: &Model, h: usize, cells: &[(&str, &str, usize, usize)]) -> Trace {
    let ports = m.all_ports();
    let mut valuations = vec![vec![0; ports.len()]; h];
    for &(c, p, t, v) in cells {
        let i = ports.iter().position(|q| *q == PortRef::new(c, p)).unwrap();
        valuations[t][i] = v;
    }
    Trace { ports, valuations }
}

#[test]
fn dispatch_holds_on_constant_trace() {
    let (m, u) = radder();
    let tr = sparse(&m, 4, &[]);
    let dispatch = m
        .component("Dispatcher")
        .unwrap()
        .contract("dispatch")
        .unwrap();
    assert_eq!(trace_satisfies(&u, &tr, dispatch).unwrap(), Satisfies::Yes);
}

#[test]
fn dispatch_fails_when_an_output_is_wrong() {
    let (m, u) = radder();
    let tr = sparse(
        &m,
        3,
        &[
            ("Dispatcher", "i1", 0, 2),
            ("Dispatcher", "i2", 0, 3),
            ("Dispatcher", "o1", 1, 7),
            ("Dispatcher", "o2", 1, 3),
            ("Dispatcher", "o3", 1, 2),
            ("Dispatcher", "o4", 1, 3),
        ],
    );
    let dispatch = m
        .component("Dispatcher")
        .unwrap()
        .contract("dispatch")
        .unwrap();
    match trace_satisfies(&u, &tr, dispatch).unwrap() {
        Satisfies::No { window, sigma } => {
            assert_eq!(window, 0);
            assert_eq!((sigma["x"], sigma["y"]), (2, 3));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn witness_run_satisfies_sum() {
    let (m, u) = radder();
    let mut cells = vec![("Dispatcher", "i1", 0, 2), ("Dispatcher", "i2", 0, 3)];
    for (p, v) in [("o1", 2), ("o2", 3), ("o3", 2), ("o4", 3)] {
        cells.push(("Dispatcher", p, 1, v));
    }
    cells.extend([
        ("Adder1", "i1", 1, 2),
        ("Adder1", "i2", 1, 3),
        ("Adder2", "i1", 1, 2),
        ("Adder2", "i2", 1, 3),
    ]);
    cells.extend([
        ("Adder2", "o", 4, 5),
        ("Merger", "i2", 4, 5),
        ("Adder1", "o", 5, 5),
        ("Merger", "i1", 5, 5),
        ("Merger", "o", 7, 5),
    ]);
    let tr = sparse(&m, 8, &cells);
    assert_eq!(
        trace_satisfies(&u, &tr, &m.contracts[0].contract).unwrap(),
        Satisfies::Yes
    );
    let mut wrong = tr.clone();
    let mo = wrong.port_index(&PortRef::new("Merger", "o")).unwrap();
    wrong.valuations[7][mo] = 4;
    assert!(matches!(
        trace_satisfies(&u, &wrong, &m.contracts[0].contract).unwrap(),
        Satisfies::No { window: 0, .. }
    ));
}

#[test]
fn short_traces_are_rejected() {
    let (m, u) = radder();
    let tr = sparse(&m, 7, &[]);
    assert_eq!(
        trace_satisfies(&u, &tr, &m.contracts[0].contract),
        Err(OracleError::HorizonTooSmall {
            horizon: 7,
            needed: 8
        })
    );
    assert!(matches!(
        verify_satisfaction(&m, &m.contracts[0].contract, &u, 7),
        Err(OracleError::HorizonTooSmall { .. })
    ));
}

// ---------------------------------------------------------------------
// Composition

#[test]
fn composition_matches_exhaustive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut nonempty = 0;
    for (m, h) in small_cases(21, 40, 12) {
        let size = rng.gen_range(1..=2);
        let u = common::random_universe(&m, &mut rng, size);
        let expected = brute_compose(&m, &u, h);
        let got = compose_behaviors(&m, &u, &BTreeMap::new(), h, 1 << 13).unwrap();
        assert_eq!(got, expected, "{}", apml::print_model(&m));
        if !got.is_empty() {
            nonempty += 1;
        }
        let arch = &m.contracts[0].contract;
        let all_ok = expected
            .iter()
            .all(|t| naive_violation(&u, t, arch).is_none());
        match verify_satisfaction(&m, arch, &u, h).unwrap() {
            Verification::Holds => assert!(all_ok),
            Verification::Counterexample { trace, .. } => {
                assert!(!all_ok);
                assert!(expected.contains(&trace));
            }
        }
    }
    assert!(nonempty > 20);
}

#[test]
fn verification_matches_exhaustive_enumeration_on_shifted_contracts() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut refuted = 0;
    for (mut m, h) in small_cases(22, 40, 12) {
        m.contracts[0].contract.duration = (h as u32).saturating_sub(1).max(1);
        if rng.gen_bool(0.5) {
            m.contracts[0].contract.duration -= 1;
            m.contracts[0].contract.duration = m.contracts[0].contract.duration.max(1);
        }
        let u = common::full_universe(&m, 2);
        let arch = &m.contracts[0].contract;
        let expected = brute_compose(&m, &u, h);
        let all_ok = expected
            .iter()
            .all(|t| naive_violation(&u, t, arch).is_none());
        match verify_satisfaction(&m, arch, &u, h).unwrap() {
            Verification::Holds => assert!(all_ok, "{}", apml::print_model(&m)),
            Verification::Counterexample { trace, window, .. } => {
                refuted += 1;
                assert!(!all_ok);
                assert!(expected.contains(&trace));
                assert!(
                    matches!(trace_satisfies(&u, &trace, arch).unwrap(), Satisfies::No { window: w, .. } if w <= window)
                );
            }
        }
    }
    assert!(refuted > 0);
}

#[test]
fn composed_traces_obey_projection_and_connection_laws() {
    for (m, h) in small_cases(23, 10, 14) {
        let u = common::full_universe(&m, 2);
        for t in compose_behaviors(&m, &u, &BTreeMap::new(), h, 4096).unwrap() {
            for c in &m.connections {
                for v in &t.valuations {
                    assert_eq!(
                        v[t.port_index(&c.input).unwrap()],
                        v[t.port_index(&c.output).unwrap()]
                    );
                }
            }
            for comp in &m.components {
                let local = t.project(&comp.port_refs().collect::<Vec<_>>());
                for k in &comp.contracts {
                    if (k.duration as usize) < h {
                        assert_eq!(trace_satisfies(&u, &local, k).unwrap(), Satisfies::Yes);
                    }
                }
            }
        }
    }
}

fn two_stage(extra: &str) -> Model {
    let text = format!(
        "Pattern T ShortName t {{\nDTSpec {{\nDT B (\nSort N\nPredicate P: N\nPredicate Q: N\n)\n}}\nCTypes {{\n\
         CType A {{\nInputPorts {{\nInputPort i (Type: B.N)\n}}\nOutputPorts {{\nOutputPort o (Type: B.N)\n}}\nContracts {{\n\
         Contract always {{\ntriggers {{\n}}\nguarantees {{\nB.P[o]\n}}\nduration 1\n}}\n}}\n}},\n\
         CType C {{\nInputPorts {{\nInputPort i (Type: B.N)\n}}\nOutputPorts {{\nOutputPort o (Type: B.N)\n}}\nContracts {{\n\
         Contract react {{\ntriggers {{\nt: B.P[i]\n}}\nguarantees {{\nB.Q[o]\n}}\nduration 1\n}}\n}}\n}}\n}}\n{extra}}}\n"
    );
    let p = apml::parse_model(&text);
    assert!(!p.has_errors(), "{text}\n{:?}", p.diagnostics);
    p.model
}

#[test]
fn contradictory_components_compose_to_nothing() {
    let m = two_stage("Connections {\n(C.i, A.o)\n}\n");
    let u = parse_universe(&m, "carrier B.N = [a, b]\npred B.P a\n").unwrap();
    for comp in ["A", "C"] {
        let mut alone = m.clone();
        alone.components.retain(|c| c.name == comp);
        alone.connections.clear();
        assert!(!compose_behaviors(&alone, &u, &BTreeMap::new(), 3, 1 << 12)
            .unwrap()
            .is_empty());
    }
    assert!(compose_behaviors(&m, &u, &BTreeMap::new(), 3, 1 << 12)
        .unwrap()
        .is_empty());
    let unwired = two_stage("");
    assert!(
        !compose_behaviors(&unwired, &u, &BTreeMap::new(), 3, 1 << 12)
            .unwrap()
            .is_empty()
    );
}

#[test]
fn explicit_behaviors_restrict_their_component() {
    let m = two_stage("Connections {\n(C.i, A.o)\n}\n");
    let u = parse_universe(
        &m,
        "carrier B.N = [a, b]\npred B.P a\npred B.Q a\npred B.Q b\n",
    )
    .unwrap();
    let a_ports: Vec<PortRef> = m.component("A").unwrap().port_refs().collect();
    let only = Trace {
        ports: a_ports,
        valuations: vec![vec![1, 0], vec![1, 0]],
    };
    let behaviors = BTreeMap::from([("A".to_string(), BehaviorSpec::Explicit(vec![only]))]);
    let traces = compose_behaviors(&m, &u, &behaviors, 2, 1 << 12).unwrap();
    // C.i copies A.o = a; C.o is free at both instants.
    assert_eq!(traces.len(), 4);
    for t in &traces {
        assert_eq!(t.value(&PortRef::new("A", "i"), 0), Some(1));
        assert_eq!(t.value(&PortRef::new("C", "i"), 1), Some(0));
    }
}

#[test]
fn enumeration_limit_reports_explosion() {
    let m = two_stage("");
    let u = parse_universe(&m, "carrier B.N = [a, b]\npred B.P a\npred B.Q a\n").unwrap();
    assert!(matches!(
        compose_behaviors(&m, &u, &BTreeMap::new(), 3, 5),
        Err(OracleError::Explosion(_))
    ));
}

// ---------------------------------------------------------------------
// Verification on the corpus

#[test]
fn radder_holds_on_tiny_universe() {
    let m = common::corpus("radder.apml");
    let u = parse_universe(&m, &common::corpus_text("tiny.uni")).unwrap();
    assert_eq!(
        verify_satisfaction(&m, &m.contracts[0].contract, &u, 8).unwrap(),
        Verification::Holds
    );
    assert_eq!(
        verify_satisfaction(
            &m,
            &m.contracts[0].contract,
            &FiniteUniverse::numeric(&m, 4),
            9
        )
        .unwrap(),
        Verification::Holds
    );
}

#[test]
fn shortened_merge_yields_a_counterexample() {
    let mut m = common::corpus("radder.apml");
    let merger = m
        .components
        .iter_mut()
        .find(|c| c.name == "Merger")
        .unwrap();
    merger
        .contracts
        .iter_mut()
        .find(|c| c.name == "merge3")
        .unwrap()
        .duration = 2;
    let u = FiniteUniverse::numeric(&m, 2);
    match verify_satisfaction(&m, &m.contracts[0].contract, &u, 8).unwrap() {
        Verification::Counterexample {
            trace,
            window,
            sigma,
        } => {
            assert_eq!(window, 0);
            let mo = trace.value(&PortRef::new("Merger", "o"), 7).unwrap();
            assert_ne!(mo, (sigma["x"] + sigma["y"]) % 2);
            assert!(matches!(
                trace_satisfies(&u, &trace, &m.contracts[0].contract).unwrap(),
                Satisfies::No { .. }
            ));
            for comp in &m.components {
                let local = trace.project(&comp.port_refs().collect::<Vec<_>>());
                for k in &comp.contracts {
                    assert_eq!(trace_satisfies(&u, &local, k).unwrap(), Satisfies::Yes);
                }
            }
        }
        Verification::Holds => panic!("expected a counterexample"),
    }
}

#[test]
fn pass_through_component_satisfies_its_own_guarantee() {
    let text = "Pattern F ShortName f {\nDTSpec {\nDT B (\nSort N\n)\n}\nCTypes {\nCType W {\nInputPorts {\nInputPort i (Type: B.N)\n}\nOutputPorts {\nOutputPort o (Type: B.N)\n}\nContracts {\nContract fwd {\nvar x: B.N\ntriggers {\nt: [i = x]\n}\nguarantees {\n[o = x]\n}\nduration 2\n}\n}\n}\n}\nContracts {\nContract k {\nvar x: B.N\ntriggers {\nt: [W.i = x]\n}\nguarantees {\n[W.o = x]\n}\nduration 2\n}\n}\n}\n";
    let m = apml::parse_model(text).model;
    let u = FiniteUniverse::numeric(&m, 3);
    assert_eq!(
        verify_satisfaction(&m, &m.contracts[0].contract, &u, 6).unwrap(),
        Verification::Holds
    );
}

// ---------------------------------------------------------------------
// Universe files

#[test]
fn universe_files_parse_and_validate() {
    let m = common::corpus("radder.apml");
    let u = parse_universe(&m, &common::corpus_text("tiny.uni")).unwrap();
    let nat = apml::SortRef::new("Basic", "NAT");
    assert_eq!(u.size(&nat), 2);
    assert_eq!(
        u.apply(&apml::SymbolRef::new("Basic", "add"), &[1, 1]),
        Some(0)
    );

    let wild = parse_universe(
        &m,
        "carrier Basic.NAT = [z, s]\nop Basic.add z * -> z\nop Basic.add * * -> s\n",
    )
    .unwrap();
    assert_eq!(
        wild.apply(&apml::SymbolRef::new("Basic", "add"), &[0, 1]),
        Some(0)
    );
    assert_eq!(
        wild.apply(&apml::SymbolRef::new("Basic", "add"), &[1, 0]),
        Some(1)
    );

    let missing =
        parse_universe(&m, "carrier Basic.NAT = [0, 1]\nop Basic.add 0 0 -> 0\n").unwrap_err();
    assert!(missing.to_string().contains("add"), "{missing}");
    let unknown =
        parse_universe(&m, "carrier Basic.NAT = [0]\n\ncarrier Other.S = [0]\n").unwrap_err();
    assert_eq!(unknown.line, 3);
    let junk = parse_universe(
        &m,
        "carrier Basic.NAT = [0]\nop Basic.add 0 0 -> 0\nfrobnicate\n",
    )
    .unwrap_err();
    assert_eq!(junk.line, 3);
}
