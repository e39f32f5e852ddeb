use crate::*;
use bintab::asymptotics::{delta, x_value};
use bintab::experiments::{csv_string, figure1, run_sweep, Figure1Config, SweepConfig};
use bintab::independence::log_heuristic_exact;
use bintab::typical::has_interior;
use bintab::*;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Feasible margins with `m·n ≤ cells`, as the margins of a random matrix.
fn feasible(cells: usize) -> impl Strategy<Value = MarginPair> {
    (1..=cells, any::<u64>(), 0.0f64..=1.0).prop_map(move |(m, seed, p)| {
        let n = 1 + seed as usize % (cells / m);
        random_margins(&mut StdRng::seed_from_u64(seed), m, n, p)
    })
}

/// Well-formed margins with `m·n ≤ cells`, feasible or not.
fn any_margins(cells: usize) -> impl Strategy<Value = MarginPair> {
    (1..=cells, any::<u64>()).prop_map(move |(m, seed)| {
        let n = 1 + seed as usize % (cells / m);
        random_vectors(&mut StdRng::seed_from_u64(seed), m, n)
    })
}

fn permuted(margins: &MarginPair, seed: u64) -> MarginPair {
    use rand::seq::SliceRandom;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut rows = margins.rows().to_vec();
    let mut cols = margins.cols().to_vec();
    rows.shuffle(&mut rng);
    cols.shuffle(&mut rng);
    MarginPair::new(rows, cols).unwrap()
}

fn solve(margins: &MarginPair, collapse: bool) -> TypicalTable {
    let opts = SolverOptions {
        collapse,
        ..SolverOptions::default()
    };
    solve_typical_table(margins, &opts).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn dp_matches_brute_force(mp in any_margins(20)) {
        let dp = count_dp(&mp, &DpOptions::default()).unwrap();
        prop_assert_eq!(&dp.count, &count_brute_force(&mp).unwrap().count);
        prop_assert_eq!(&dp.count, &count_by_rows(&mp, &DpOptions::default()).unwrap().count);
    }

    #[test]
    fn dp_is_zero_exactly_when_infeasible(mp in any_margins(48)) {
        let dp = count_dp(&mp, &DpOptions::default()).unwrap();
        prop_assert_eq!(dp.is_zero(), !is_feasible(&mp));
    }

    #[test]
    fn count_symmetries(mp in feasible(42), seed in any::<u64>()) {
        let opts = DpOptions::default();
        let base = count_dp(&mp, &opts).unwrap().count;
        prop_assert_eq!(&count_dp(&permuted(&mp, seed), &opts).unwrap().count, &base);
        prop_assert_eq!(&count_dp(&mp.transpose(), &opts).unwrap().count, &base);
        prop_assert_eq!(&count_dp(&mp.complement(), &opts).unwrap().count, &base);
    }

    #[test]
    fn log_count_matches_count(mp in feasible(42)) {
        let r = count_dp(&mp, &DpOptions::default()).unwrap();
        let direct: f64 = r.count.to_string().parse::<f64>().unwrap().ln();
        prop_assert!((r.log_count - direct).abs() <= 1e-12 * direct.abs().max(1.0));
    }

    #[test]
    fn interior_iff_every_unforced_cell_is_free(mp in feasible(16)) {
        let tables = enumerate_tables(&mp);
        let (rows, cols) = unforced_lines(&mp);
        let n = mp.n();
        let free = rows.iter().all(|&i| {
            cols.iter().all(|&j| {
                tables.iter().any(|t| t[i * n + j] == 0) && tables.iter().any(|t| t[i * n + j] == 1)
            })
        });
        prop_assert_eq!(has_interior(&mp), free);
    }

    #[test]
    fn entropy_bounds_the_count(mp in feasible(20)) {
        prop_assume!(has_interior(&mp));
        let t = solve(&mp, true);
        let lc = count_dp(&mp, &DpOptions::default()).unwrap().log_count;
        prop_assert!(lc <= t.entropy_value + 1e-9);
    }

    #[test]
    fn typical_table_invariants(mp in feasible(400), seed in any::<u64>()) {
        prop_assume!(has_interior(&mp));
        let t = solve(&mp, true);
        prop_assert!(t.residual <= 1e-10);
        prop_assert!(t.kkt_residual() <= 1e-8);
        prop_assert!(t.dual_mismatch() <= 1e-12);
        let g = entropy_of(t.entries());
        prop_assert!((t.entropy_value - g).abs() <= 1e-10 * g.abs().max(1.0));

        // equal margins give equal lines
        for i in 0..mp.m() {
            for k in 0..i {
                if mp.rows()[i] == mp.rows()[k] {
                    for j in 0..mp.n() {
                        prop_assert!((t.entry(i, j) - t.entry(k, j)).abs() <= 1e-9);
                    }
                }
            }
        }

        let generic = solve(&mp, false);
        for (a, b) in t.entries().iter().zip(generic.entries()) {
            prop_assert!((a - b).abs() <= 1e-8);
        }

        let tt = solve(&mp.transpose(), true);
        for i in 0..mp.m() {
            for j in 0..mp.n() {
                prop_assert!((t.entry(i, j) - tt.entry(j, i)).abs() <= 1e-9);
            }
        }

        // permuting margins permutes the table
        let p = permuted(&mp, seed);
        let tp = solve(&p, true);
        prop_assert!((tp.entropy_value - t.entropy_value).abs() <= 1e-9 * t.entropy_value.max(1.0));
    }

    #[test]
    fn heuristic_paths_agree(mp in any_margins(60)) {
        let fast = log_heuristic(&mp).log_estimate;
        let exact = log_heuristic_exact(&mp);
        prop_assert!((fast - exact).abs() <= 1e-10 * exact.abs().max(1.0));
    }

    #[test]
    fn delta_is_unimodal_with_zero_at_one(c in 0.01f64..0.74, u in 0.001f64..0.999, v in 0.001f64..0.999) {
        let top = bmax(c).unwrap();
        let (lo, hi) = if u < v { (u * top, v * top) } else { (v * top, u * top) };
        let (dl, dh) = (delta(lo, c).unwrap(), delta(hi, c).unwrap());
        prop_assert!(dl <= 0.0 && dh <= 0.0);
        // increasing below B = 1, decreasing above it
        if hi <= 1.0 {
            prop_assert!(dl <= dh + 1e-15);
        }
        if lo >= 1.0 {
            prop_assert!(dl + 1e-15 >= dh);
        }
        prop_assert_eq!(x_value(lo, c) == 1.0, lo == 1.0);
        prop_assert_eq!(delta(1.0, c).unwrap(), 0.0);
    }
}

#[test]
fn typical_matches_primal_oracle_on_family() {
    let mp = build_family_margins(&FamilyParams::new(4, 0.5, 0.5, 0.5).unwrap()).unwrap();
    assert_eq!(mp.rows(), &[1, 1, 2, 2, 2, 2]);
    let t = solve(&mp, true);
    let oracle = projected_gradient(&mp, 1e-12, 200_000);
    for (a, b) in t.entries().iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }
    let mut values: Vec<f64> = t.blocks().iter().map(|b| b.value).collect();
    values.sort_by(f64::total_cmp);
    values.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    assert_eq!(values.len(), 3);

    let generic = solve(&mp, false);
    for (a, b) in t.entries().iter().zip(generic.entries()) {
        assert!((a - b).abs() < 1e-8);
    }
}

#[test]
fn typical_beats_random_mixtures_of_tables() {
    let mp = build_family_margins(&FamilyParams::new(4, 0.5, 0.5, 0.5).unwrap()).unwrap();
    let tables = enumerate_tables(&mp);
    assert_eq!(tables.len(), 9876);
    let g = solve(&mp, true).entropy_value;
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..100 {
        let k = rng.gen_range(1..=8);
        let weights: Vec<f64> = (0..k).map(|_| rng.gen::<f64>() + 1e-3).collect();
        let total: f64 = weights.iter().sum();
        let mut x = vec![0.0; 36];
        for w in &weights {
            let t = &tables[rng.gen_range(0..tables.len())];
            for (xi, &ti) in x.iter_mut().zip(t) {
                *xi += w / total * f64::from(ti);
            }
        }
        assert!(entropy_of(&x) <= g + 1e-12);
    }
}

#[test]
fn uniform_margins_give_constant_table() {
    for (k, n) in [(1u32, 2usize), (2, 3), (3, 7)] {
        let mp = MarginPair::new(vec![k; n], vec![k; n]).unwrap();
        let t = solve(&mp, false);
        assert!(t
            .entries()
            .iter()
            .all(|&z| (z - f64::from(k) / n as f64).abs() < 1e-12));
    }
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn csv_output_is_deterministic() {
    let sweep = SweepConfig::uniform(15, 15);
    let a = with_threads(1, || csv_string(&run_sweep(&sweep).unwrap()));
    let b = with_threads(6, || csv_string(&run_sweep(&sweep).unwrap()));
    assert_eq!(a, b);
    assert!(a.starts_with("B,C,delta,"));
    assert!(!a.contains('\r'));

    let fig = Figure1Config::default();
    let a = with_threads(1, || csv_string(&figure1(&fig).unwrap()));
    let b = with_threads(6, || csv_string(&figure1(&fig).unwrap()));
    assert_eq!(a, b);
}
