use fjpd::generators::*;
use fjpd::{pd_alternative, pd_index, PdDefinition, SolverConfig, StubbornnessVector};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generators_are_deterministic(seed: u64, n in 2usize..80) {
        prop_assert_eq!(gen_er(n, 0.2, seed).unwrap(), gen_er(n, 0.2, seed).unwrap());
        prop_assert_eq!(gen_ba(n, 1, seed).unwrap(), gen_ba(n, 1, seed).unwrap());
        let spec = SbmSpec::new(2 * (n / 2).max(1), 0.4, 0.1).unwrap();
        prop_assert_eq!(gen_sbm(&spec, seed).unwrap(), gen_sbm(&spec, seed).unwrap());
    }

    #[test]
    fn ba_counts(seed: u64, n in 3usize..120, m in 1usize..3) {
        prop_assume!(m < n);
        let g = gen_ba(n, m, seed).unwrap();
        prop_assert_eq!(g.edge_count(), m + (n - m - 1) * m);
        prop_assert!(g.is_connected());
    }

    #[test]
    fn expected_graph_matches_closed_form(ni in 0usize..2, qi in 0usize..3, ai in 0usize..4, pi in 0usize..3) {
        let n = [10, 100][ni];
        let p = [0.3, 0.6, 0.9][pi];
        let q = [0.05, 0.1, 0.5 * p][qi];
        let alpha = [0.5, 1.0, 2.0, 10.0][ai];
        let spec = SbmSpec::new(n, p, q).unwrap();
        let g = sbm_expected_graph(&spec).unwrap();
        let k = StubbornnessVector::uniform(n, alpha).unwrap();
        let cfg = SolverConfig::with_tolerance(1e-13);
        let rep = pd_alternative(&g, &spec.opinions(), &k, &cfg).unwrap();
        let std = sbm_pd_closed_form(&spec, alpha, PdDefinition::Standard).unwrap();
        let alt = sbm_pd_closed_form(&spec, alpha, PdDefinition::Alternative).unwrap();
        prop_assert!(rel(rep.pd, std) <= 1e-8);
        prop_assert!(rel(rep.pd_alt.unwrap(), alt) <= 1e-8);
    }
}

#[test]
fn sampled_sbm_concentrates() {
    // Soft check: report, but only fail on a gross miss.
    let spec = SbmSpec::new(1000, 0.3, 0.1).unwrap();
    let theory = sbm_pd_closed_form(&spec, 1.0, PdDefinition::Standard).unwrap();
    let mut errs: Vec<f64> = (0..20)
        .map(|seed| {
            let (g, s) = gen_sbm(&spec, seed).unwrap();
            let pd = pd_index(&g, &s, &StubbornnessVector::uniform(1000, 1.0).unwrap(), &SolverConfig::default())
                .unwrap()
                .pd;
            rel(pd, theory)
        })
        .collect();
    errs.sort_by(f64::total_cmp);
    let median = 0.5 * (errs[9] + errs[10]);
    if median > 0.10 {
        eprintln!("sampled SBM median relative gap {median:.3} exceeds 10%");
    }
    assert!(median < 0.5, "{median}");
}
