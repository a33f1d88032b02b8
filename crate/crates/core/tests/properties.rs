use entsearch::copies::{copies_required, delta_analytic, delta_simulated, DistinguishabilityPoint};
use entsearch::entdetect::{spa_test_estimated, CopyEstimatorConfig, Detector};
use entsearch::formula::{parse_dimacs, parse_expr, Formula};
use entsearch::linalg::{max_abs_diff, partial_trace};
use entsearch::*;
use proptest::prelude::*;

type Clauses = Vec<Vec<i64>>;

fn clauses(max_vars: usize) -> impl Strategy<Value = (usize, Clauses)> {
    (1..=max_vars).prop_flat_map(|n| {
        let literal = (1..=n as i64, any::<bool>()).prop_map(|(v, neg)| if neg { -v } else { v });
        (Just(n), prop::collection::vec(prop::collection::vec(literal, 1..=3), 1..=6))
    })
}

fn dimacs_text(n: usize, cs: &Clauses) -> String {
    let mut s = format!("c generated\np cnf {n} {}\n", cs.len());
    for c in cs {
        for l in c {
            s.push_str(&format!("{l} "));
        }
        s.push_str("0\n");
    }
    s
}

fn expr_text(cs: &Clauses) -> String {
    cs.iter()
        .map(|c| {
            let lits: Vec<String> =
                c.iter().map(|&l| if l < 0 { format!("!x{}", -l) } else { format!("x{l}") }).collect();
            format!("({})", lits.join(" | "))
        })
        .collect::<Vec<_>>()
        .join(" & ")
}

/// Independent truth table: evaluates the clause list directly, `x1` being
/// the most significant bit of the index.
fn truth_table(n: usize, cs: &Clauses) -> Vec<bool> {
    (0..1u64 << n)
        .map(|x| {
            cs.iter().all(|c| {
                c.iter().any(|&l| {
                    let bit = (x >> (n - l.unsigned_abs() as usize)) & 1 == 1;
                    bit == (l > 0)
                })
            })
        })
        .collect()
}

fn formula(n: usize, cs: &Clauses) -> Formula {
    parse_dimacs(&dimacs_text(n, cs)).unwrap()
}

fn range(n: usize) -> impl Strategy<Value = (u64, u64)> {
    let size = 1u64 << n;
    (0..size, 0..size).prop_map(|(a, b)| (a.min(b), a.max(b)))
}

fn brute(cs: &Clauses, n: usize, lo: u64, hi: u64) -> u64 {
    truth_table(n, cs)[lo as usize..=hi as usize].iter().filter(|&&b| b).count() as u64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn dimacs_and_expression_agree((n, cs) in clauses(8)) {
        let table = truth_table(n, &cs);
        let from_dimacs = formula(n, &cs);
        let from_expr = parse_expr(&expr_text(&cs)).unwrap();
        for x in 0..1u64 << n {
            prop_assert_eq!(from_dimacs.eval_index(x), table[x as usize]);
            // The expression spans x1 up to its largest variable only.
            let shift = n - from_expr.num_vars();
            prop_assert_eq!(from_expr.eval_index(x >> shift), table[x as usize]);
        }
    }

    #[test]
    fn count_matches_paths_and_brute_force((n, cs) in clauses(8)) {
        let f = formula(n, &cs);
        let k = f.count_solutions(0, f.space_size() - 1).unwrap().solutions;
        let paths = f.enumerate_paths().unwrap();
        prop_assert_eq!(k, paths.len() as u64);
        prop_assert_eq!(k, brute(&cs, n, 0, f.space_size() - 1));
        let indices = f.solution_indices_capped(24).unwrap();
        prop_assert!(paths.iter().zip(&indices).all(|(p, i)| *p == i + 1));
    }

    #[test]
    fn count_is_additive((n, cs, (lo, hi), c) in clauses(8).prop_flat_map(|(n, cs)| {
        (Just(n), Just(cs), range(n), 0..1u64 << n)
    })) {
        let f = formula(n, &cs);
        let mid = c.clamp(lo, hi);
        let whole = f.count_solutions(lo, hi).unwrap().solutions;
        let left = f.count_solutions(lo, mid).unwrap().solutions;
        let right = if mid < hi { f.count_solutions(mid + 1, hi).unwrap().solutions } else { 0 };
        prop_assert_eq!(whole, left + right);
        prop_assert_eq!(whole, brute(&cs, n, lo, hi));
    }

    #[test]
    fn oracle_is_an_involution(((n, cs), (lo, hi)) in clauses(6).prop_flat_map(|(n, cs)| ((Just(n), Just(cs)), range(n)))) {
        let f = formula(n, &cs);
        for layout in [RegisterLayout::minimal(n).unwrap(), RegisterLayout::dxd(n).unwrap()] {
            let o = RangeOracle::new(&f, lo, hi, layout).unwrap();
            prop_assert!(o.unitary_check().unwrap());
        }
    }

    #[test]
    fn answer_marginal_closed_form(((n, cs), (lo, hi)) in clauses(7).prop_flat_map(|(n, cs)| ((Just(n), Just(cs)), range(n)))) {
        let f = formula(n, &cs);
        let k = brute(&cs, n, lo, hi);
        let psi = post_oracle_state(&f, lo, hi, RegisterLayout::minimal(n).unwrap()).unwrap();
        let expected = DensityOp::answer_closed_form(n, k).unwrap();
        prop_assert!(max_abs_diff(psi.marginal(Subsystem::B).matrix(), expected.matrix()) < 1e-12);
    }

    #[test]
    fn separability_law(((n, cs), (lo, hi)) in clauses(5).prop_flat_map(|(n, cs)| ((Just(n), Just(cs)), range(n)))) {
        let f = formula(n, &cs);
        let k = brute(&cs, n, lo, hi);
        let full = lo == 0 && hi == (1 << n) - 1;
        let expected = if k == 0 || (full && k == 1 << n) { Verdict::Separable } else { Verdict::Entangled };
        prop_assert_eq!(analytic_test(&f, lo, hi).unwrap().verdict, expected);
        for route in [Route::Purity, Route::Ppt] {
            let d = Detector::for_formula(route, Mode::Minimal, n, None).unwrap();
            prop_assert_eq!(d.test_range(&f, lo, hi, 0).unwrap().verdict, expected);
        }
    }

    #[test]
    fn search_is_sound_and_complete((n, cs) in clauses(8), infer in any::<bool>()) {
        let f = formula(n, &cs);
        let table = truth_table(n, &cs);
        let cfg = SearchConfig::new(Route::Analytic).with_multi_solution(true).with_inference(infer);
        let out = search(&f, &cfg).unwrap();
        let got: Vec<u64> = out.solutions.iter().map(Assignment::index).collect();
        let truth: Vec<u64> = (0..1u64 << n).filter(|&x| table[x as usize]).collect();
        match out.status {
            SearchStatus::AllSolutions => prop_assert_eq!(truth.len(), 1 << n),
            SearchStatus::NoneExist => prop_assert!(truth.is_empty()),
            SearchStatus::Found => prop_assert_eq!(&got, &truth),
            SearchStatus::BudgetExhausted => prop_assert!(false, "no budget was set"),
        }
        // Soundness: every range judged separable below the root is empty.
        for e in out.trace.events.iter().filter(|e| e.verdict == Verdict::Separable && e.depth > 0) {
            prop_assert_eq!(brute(&cs, n, e.lo, e.hi), 0);
        }
        if out.status == SearchStatus::Found {
            prop_assert_eq!(out.trace.pruned_mass + got.len() as u64, 1 << n);
        }
    }

    #[test]
    fn partial_trace_of_product(a in prop::collection::vec(0.0f64..1.0, 2), b in prop::collection::vec(0.0f64..1.0, 3)) {
        let diag = |v: &[f64]| {
            let total: f64 = v.iter().sum::<f64>() + 1e-3;
            let m = linalg::CMatrix::from_fn(v.len(), v.len(), |i, j| {
                if i == j { linalg::c64((v[i] + 1e-3 / v.len() as f64) / total, 0.0) } else { linalg::c64(0.0, 0.0) }
            });
            DensityOp::new((1, v.len()), m).unwrap()
        };
        let (ra, rb) = (diag(&a), diag(&b));
        let prod = DensityOp::product(&ra, &rb).unwrap();
        let ta = partial_trace(prod.matrix(), &[2, 3], &[true, false]);
        let tb = partial_trace(prod.matrix(), &[2, 3], &[false, true]);
        prop_assert!(max_abs_diff(&ta, ra.matrix()) < 1e-12);
        prop_assert!(max_abs_diff(&tb, rb.matrix()) < 1e-12);
    }

    #[test]
    fn overlap_matches_closed_form(n in 1usize..=8, s_frac in 0.0f64..1.0) {
        let s = ((1u64 << n) as f64 * s_frac) as u64;
        let analytic = delta_analytic(1 << n).unwrap();
        prop_assert!((delta_simulated(n, s).unwrap() - analytic).abs() < 1e-12);
    }

    #[test]
    fn delta_n_is_monotone(l in 2u64..1 << 20, n in 1u64..1 << 20) {
        let here = DistinguishabilityPoint::new(l, n).unwrap();
        let more_copies = DistinguishabilityPoint::new(l, n + 1).unwrap();
        let bigger_space = DistinguishabilityPoint::new(l + 1, n).unwrap();
        prop_assert!(more_copies.delta_n <= here.delta_n);
        prop_assert!(bigger_space.delta_n >= here.delta_n);
        prop_assert!((0.5..=1.0).contains(&here.bound));
    }

    #[test]
    fn copies_required_is_minimal(l in 2u64..5000, c in 0.01f64..0.99) {
        let n = copies_required(l, c).unwrap();
        let ln_delta = (-1.0 / l as f64).ln_1p();
        prop_assert!(n as f64 * ln_delta <= c.ln());
        prop_assert!(n == 1 || (n - 1) as f64 * ln_delta > c.ln());
    }

    #[test]
    fn estimated_route_is_reproducible(seed in any::<u64>(), p in 0.0f64..1.0) {
        let spa = SpaMap::transpose(2).unwrap();
        let rho = DensityOp::bell().depolarize(p).unwrap();
        let cfg = CopyEstimatorConfig::new(256, seed, 3).unwrap();
        prop_assert_eq!(
            spa_test_estimated(&rho, &spa, &cfg).unwrap(),
            spa_test_estimated(&rho, &spa, &cfg).unwrap()
        );
    }
}
