use super::*;
use crate::expr::Expr;
use crate::fixtures;

fn ws(src: &str) -> Workspace {
    let sys = fixtures::load(src);
    let ctx = AnalysisOptions::default().context(&sys);
    Workspace::new(Arc::new(sys), ctx)
}

fn mi(v: &[u32]) -> MultiIndex {
    MultiIndex(v.to_vec())
}

fn fin(v: &[u32]) -> SigmaValue {
    SigmaValue(v.iter().map(|&c| Some(c)).collect())
}

fn run(src: &str) -> AnalysisReport {
    analyze(&fixtures::load(src), &AnalysisOptions::default())
}

#[test]
fn static_linearizability() {
    let di = static_linearizable(&ws(fixtures::DOUBLE_INTEGRATOR)).unwrap();
    assert!(di.linearizable);
    assert_eq!(di.kappa, Some(vec![3]));
    let chained = static_linearizable(&ws(fixtures::CHAINED)).unwrap();
    assert!(!chained.linearizable);
    assert_eq!(chained.profile.first_non_involutive, Some(1));
    let pendulum = static_linearizable(&ws(fixtures::PENDULUM)).unwrap();
    assert!(!pendulum.linearizable);
    assert_eq!(pendulum.profile.first_non_involutive, Some(2));
}

#[test]
fn brunovsky_at_known_prolongations() {
    for (src, j, kappa) in [
        (fixtures::CHAINED, vec![4, 0], vec![8, 4]),
        (fixtures::DRIFTLESS, vec![2, 0], vec![4, 4]),
        (fixtures::CLM, vec![0, 3], vec![5, 4]),
    ] {
        let w = ws(src);
        let ps = w.get(&MultiIndex(j));
        assert_eq!(brunovsky_indices(&ps).unwrap(), kappa);
    }
    let w = ws(fixtures::CHAINED);
    assert_eq!(
        brunovsky_indices(&w.get(&mi(&[3, 0]))),
        Err(FlatnessError::NotLinearizable)
    );
}

#[test]
fn driftless_full_at_level_three() {
    let w = ws(fixtures::DRIFTLESS);
    let ps = w.get(&mi(&[2, 0]));
    assert_eq!(ps.g_level(3).rank().unwrap(), 8);
}

#[test]
fn condition_check_examples() {
    let w = ws(fixtures::CHAINED);
    let ok = cns_check(&w.get(&mi(&[4, 0]))).unwrap();
    assert!(ok.holds && ok.linearizable);
    assert_eq!(ok.k_star, 7);
    let bad = cns_check(&w.get(&mi(&[3, 0]))).unwrap();
    let v = bad.violation.clone().unwrap();
    assert_eq!((v.condition, v.k), (2, 2));
    assert!(bad.consistent());

    let w = ws(fixtures::DRIFTLESS);
    let bad = cns_check(&w.get(&mi(&[1, 0]))).unwrap();
    let v = bad.violation.clone().unwrap();
    assert_eq!((v.condition, v.k), (1, 2));
    assert!(cns_check(&w.get(&mi(&[2, 0]))).unwrap().holds);
}

#[test]
fn chained_sigma_values() {
    let w = ws(fixtures::CHAINED);
    let cache = ConditionCache::new();
    let s1 = sigma(&w, &cache, &[0], 1, 10).unwrap();
    assert_eq!(s1.delta, fin(&[2, 0]));
    assert_eq!(s1.gamma_delta, fin(&[0, 0]));
    let s2 = sigma(&w, &cache, &[0], 2, 10).unwrap();
    assert_eq!(s2.delta, fin(&[3, 0]));
    assert_eq!(s2.gamma_delta, fin(&[4, 0]));
    assert_eq!(s2.witness, Some(mi(&[4, 0])));
    assert!(s2.delta_min_holds && s2.gamma_delta_min_holds);
}

#[test]
fn pendulum_sigma_is_infinite() {
    let w = ws(fixtures::PENDULUM);
    for prolonged in [[0], [1]] {
        let cache = ConditionCache::new();
        let s = sigma(&w, &cache, &prolonged, 2, 12).unwrap();
        assert!(s.delta.is_infinite());
        assert!(s.delta_counterexample.is_some());
        assert!(s.witness.is_none());
    }
}

#[test]
fn sigma_box_limit() {
    assert_eq!(box_limit(1, 0), 3);
    assert_eq!(box_limit(3, 4), 7);
    assert_eq!(box_limit(2, 12), 12);
}

#[test]
fn fixture_verdicts() {
    let r = run(fixtures::CHAINED);
    assert_eq!(r.verdict, Verdict::P2Flat);
    assert_eq!(r.j_min, Some(mi(&[4, 0])));
    assert_eq!(r.k_star, Some(7));
    assert_eq!(r.kappa, Some(vec![8, 4]));
    assert!(r.singular_locus.contains(&"u1''".to_string()));

    let r = run(fixtures::DRIFTLESS);
    assert_eq!(r.verdict, Verdict::P2Flat);
    assert_eq!(r.j_min, Some(mi(&[2, 0])));
    assert_eq!(r.kappa, Some(vec![4, 4]));
    assert_eq!(r.flat_outputs, Some(vec!["x1".to_string(), "x2".to_string()]));

    let r = run(fixtures::CLM);
    assert_eq!(r.verdict, Verdict::P2Flat);
    assert_eq!(r.j_min, Some(mi(&[0, 3])));
    assert_eq!(r.k_star, Some(4));
    assert_eq!(r.kappa, Some(vec![5, 4]));
    assert_eq!(r.input_permutation, Some(vec![0, 1]));

    let r = run(fixtures::PENDULUM);
    assert_eq!(r.verdict, Verdict::NotP2Flat);
    assert_eq!(r.initializations.len(), 4);
    assert!(r.initializations.iter().all(|i| i.outcome == "certificate"));

    let r = run(fixtures::THREE_INPUT);
    assert_eq!(r.verdict, Verdict::P2Flat);
    assert_eq!(r.j_min, Some(mi(&[1, 0, 0])));

    let r = run(fixtures::DOUBLE_INTEGRATOR);
    assert_eq!(r.verdict, Verdict::P2Flat);
    assert_eq!(r.j_min, Some(mi(&[0])));
    assert!(r.initializations.is_empty());

    let r = run(fixtures::UNCONTROLLABLE);
    assert_eq!(r.verdict, Verdict::NotP2Flat);
    assert!(r.witness.unwrap().contains("involutive"));
}

#[test]
fn single_input_not_linearizable() {
    let sys = crate::sysdsl::parse_system("system s\nstate x1 x2 x3\ninput u\ndot x1 = x2 + x3^2\ndot x2 = x3\ndot x3 = u\n")
        .unwrap();
    let stat = static_linearizable(&Workspace::new(
        Arc::new(sys.clone()),
        AnalysisOptions::default().context(&sys),
    ))
    .unwrap();
    let r = analyze(&sys, &AnalysisOptions::default());
    assert_eq!(
        r.verdict,
        if stat.linearizable { Verdict::P2Flat } else { Verdict::NotP2Flat }
    );
    assert!(r.initializations.is_empty());
}

#[test]
fn verify_declared_outputs() {
    let w = ws(fixtures::CHAINED);
    let sys = w.system().clone();
    let ps = w.get(&mi(&[4, 0]));
    let ys = sys.declared_flat_outputs.clone().unwrap();
    let check = verify_flat_output(&ps, &ys).unwrap();
    assert!(check.valid, "{check:?}");
    assert_eq!(check.assignment, Some(vec![8, 4]));
    assert_eq!(check.jacobian_rank, Some(12));

    let wrong = [Expr::input(1, 4), sys.parse_expr("x21").unwrap()];
    let check = verify_flat_output(&ps, &wrong).unwrap();
    assert!(!check.valid);
    assert!(check.failure.unwrap().contains("G_0"));

    assert_eq!(
        verify_flat_output(&ps, &ys[..1]),
        Err(FlatnessError::CandidateCount { expected: 2, found: 1 })
    );
    assert_eq!(
        verify_flat_output(&w.get(&mi(&[0, 0])), &ys),
        Err(FlatnessError::NotLinearizable)
    );

    let w = ws(fixtures::DRIFTLESS);
    let ys = w.system().declared_flat_outputs.clone().unwrap();
    assert!(verify_flat_output(&w.get(&mi(&[2, 0])), &ys).unwrap().valid);
}

#[test]
fn outputs_outside_the_space_are_rejected() {
    let w = ws(fixtures::DRIFTLESS);
    let ps = w.get(&mi(&[2, 0]));
    let ys = [Expr::state(1), Expr::input(2, 1)];
    let check = verify_flat_output(&ps, &ys).unwrap();
    assert!(!check.valid);
}

#[test]
fn ansatz_search_finds_outputs() {
    let w = ws(fixtures::CLM);
    let sys = w.system().clone();
    let ys = search_flat_outputs(&w.get(&mi(&[0, 3])), 2).unwrap().unwrap();
    let expect = vec![sys.parse_expr("x4").unwrap(), sys.parse_expr("x1 - u2*x2").unwrap()];
    assert_eq!(ys, expect);

    let w = ws(fixtures::THREE_INPUT);
    let sys = w.system().clone();
    let ys = search_flat_outputs(&w.get(&mi(&[1, 0, 0])), 2).unwrap().unwrap();
    let mut got: Vec<String> = ys.iter().map(|y| y.render(sys.as_ref())).collect();
    got.sort();
    assert_eq!(got, ["x1", "x2", "x4"]);

    let w = ws(fixtures::DOUBLE_INTEGRATOR);
    let ys = search_flat_outputs(&w.get(&mi(&[0])), 1).unwrap().unwrap();
    assert_eq!(ys, vec![Expr::state(1)]);
}

#[test]
fn gradient_rank_counts_independent_functions() {
    let w = ws(fixtures::DRIFTLESS);
    let ps = w.get(&mi(&[0, 0]));
    let x1 = Expr::state(1);
    let x2 = Expr::state(2);
    let r = gradient_rank(&ps, &[x1.clone(), x2.clone(), x1.mul(&x2)]).unwrap();
    assert_eq!(r, 2);
}

/// No componentwise-smaller prolongation passes the final check.
#[test]
fn minimality_audit() {
    for src in [fixtures::CHAINED, fixtures::DRIFTLESS, fixtures::CLM, fixtures::THREE_INPUT] {
        let r = run(src);
        let j = r.j_min.unwrap();
        let w = ws(src);
        let mut below = vec![MultiIndex::zeros(j.len())];
        for i in 0..j.len() {
            below = below
                .into_iter()
                .flat_map(|b| {
                    (0..=j.0[i]).map(move |v| {
                        let mut b = b.clone();
                        b.0[i] = v;
                        b
                    })
                })
                .collect();
        }
        for b in below.into_iter().filter(|b| *b != j) {
            assert!(!cns_check(&w.get(&b)).unwrap().holds, "{} passes at {b}", r.system);
        }
    }
}

#[test]
fn bookkeeping_identities() {
    for src in [fixtures::CHAINED, fixtures::DRIFTLESS, fixtures::CLM, fixtures::THREE_INPUT] {
        let r = run(src);
        let sys = fixtures::load(src);
        let j = r.j_min.clone().unwrap();
        let kappa = r.kappa.clone().unwrap();
        let k_star = r.k_star.unwrap();
        assert_eq!(kappa.iter().sum::<usize>(), sys.n() + sys.m() + j.abs() as usize);
        assert_eq!(kappa[0], k_star + 1);
        assert!(kappa.windows(2).all(|w| w[0] >= w[1]));
        assert!(r.warnings.iter().all(|w| !w.contains("bound violated")), "{:?}", r.warnings);
        // The candidate dominates every recorded σ.
        for t in &r.sigma_trace {
            assert!(t.sigma_delta.finite().le(&j) || t.sigma_delta.0.iter().any(|c| c.is_none()));
            assert!(t.sigma_gamma_delta.finite().le(&j));
        }
    }
}

/// Pre-integrating every input once leaves the normalized prolongation
/// unchanged.
#[test]
fn uniform_pre_prolongation() {
    let src = "system driftless_pre\nstate x1 x2 x3 x4 w1 w2\ninput v1 v2\n\
               dot x1 = w1\ndot x2 = x3*w1\ndot x3 = x4*w1\ndot x4 = w2\n\
               dot w1 = v1\ndot w2 = v2\nflatoutput x1, x2\n";
    let sys = crate::sysdsl::parse_system(src).unwrap();
    let r = analyze(&sys, &AnalysisOptions::default());
    assert_eq!(r.verdict, Verdict::P2Flat);
    assert_eq!(r.j_min, Some(mi(&[2, 0])));
    assert_eq!(r.kappa, Some(vec![5, 5]));
    assert_eq!(r.flat_outputs, Some(vec!["x1".to_string(), "x2".to_string()]));
}

#[test]
fn input_permutation_invariance() {
    let swapped = fixtures::CHAINED.replace("input u1 u2", "input u2 u1");
    let a = run(fixtures::CHAINED);
    let b = analyze(&fixtures::load(&swapped), &AnalysisOptions::default());
    assert_eq!(b.verdict, Verdict::P2Flat);
    assert_eq!(b.j_min, Some(mi(&[0, 4])));
    assert_eq!(b.input_permutation, Some(vec![0, 1]));
    assert_eq!(a.input_permutation, Some(vec![1, 0]));
    assert_eq!(a.kappa, b.kappa);
    assert_eq!(a.k_star, b.k_star);
}

#[test]
fn parallel_and_sequential_agree() {
    let sys = fixtures::load(fixtures::THREE_INPUT);
    let par = analyze(&sys, &AnalysisOptions::default());
    let seq = analyze(
        &sys,
        &AnalysisOptions {
            parallel: false,
            ..AnalysisOptions::default()
        },
    );
    assert_eq!(par.to_json(), seq.to_json());
}

#[test]
fn budget_exhaustion_is_inconclusive() {
    let sys = fixtures::load(fixtures::CHAINED);
    let r = analyze(
        &sys,
        &AnalysisOptions {
            max_k: Some(2),
            ..AnalysisOptions::default()
        },
    );
    assert_eq!(r.verdict, Verdict::Inconclusive);
    assert_eq!(r.reason.as_deref(), Some("max_k"));
}

#[test]
fn report_json_key_order() {
    let json = run(fixtures::DRIFTLESS).to_json();
    let keys = [
        "\"system\"",
        "\"verdict\"",
        "\"j_min\"",
        "\"input_permutation\"",
        "\"k_star\"",
        "\"kappa\"",
        "\"flat_outputs\"",
        "\"sigma_trace\"",
        "\"singular_locus\"",
        "\"seed\"",
        "\"timings_ms\"",
    ];
    let pos: Vec<usize> = keys.iter().map(|k| json.find(k).unwrap()).collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]));
    assert!(json.contains("\"verdict\":\"p2_flat\",\"j_min\":[2,0]"));
    assert!(json.contains("\"timings_ms\":null"));
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["j_min"], serde_json::json!([2, 0]));
    assert_eq!(v["sigma_trace"][1]["sigma_delta"], serde_json::json!([2, 0]));
}
