use lpstat_core::compdensity::{gof_by_quadrature, DensityFlavor};
use lpstat_core::twosample::{
    bayes_normal_update, combine, correlation_stats, recursive_update, student_t,
    two_sample_report, wilcoxon, BayesNormalState, GroupSummary, ZScaling,
};
use lpstat_core::*;
use proptest::prelude::*;

/// Values with deliberate ties: small integers scaled.
fn tied_values(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0i32..12, 2..max_len)
        .prop_map(|v| v.into_iter().map(|x| x as f64 * 0.5).collect())
}

fn continuous_values(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3f64..1e3, 2..max_len)
}

fn any_values() -> impl Strategy<Value = Vec<f64>> {
    prop_oneof![tied_values(60), continuous_values(60)]
}

fn nondegenerate(v: &[f64]) -> bool {
    v.iter().any(|&x| x != v[0])
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn quantile_recovers_atoms(v in any_values()) {
        let s = Sample::new(&v).unwrap();
        for (&x, &f) in s.values().iter().zip(s.cdf_at_atoms()) {
            if f < 1.0 {
                prop_assert_eq!(s.quantile(f).unwrap(), x);
            }
        }
    }

    #[test]
    fn mid_quantile_monotone_and_hits_order_statistics(mut v in continuous_values(60)) {
        v.sort_by(f64::total_cmp);
        v.dedup();
        prop_assume!(v.len() >= 2);
        let s = Sample::new(&v).unwrap();
        let n = v.len() as f64;
        for (i, &x) in v.iter().enumerate() {
            prop_assert!(close(s.mid_quantile((i as f64 + 0.5) / n).unwrap(), x, 1e-12));
        }
        let mut last = f64::NEG_INFINITY;
        for k in 1..200 {
            let q = s.mid_quantile(k as f64 / 200.0).unwrap();
            prop_assert!(q >= last);
            last = q;
        }
    }

    #[test]
    fn mid_rank_moments(v in any_values()) {
        let s = Sample::new(&v).unwrap();
        let r = s.mid_ranks();
        let n = r.len() as f64;
        let m = r.iter().sum::<f64>() / n;
        let var = r.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
        let want = (1.0 - s.masses().iter().map(|p| p.powi(3)).sum::<f64>()) / 12.0;
        prop_assert!((m - 0.5).abs() < 1e-12);
        prop_assert!((var - want).abs() < 1e-12);
    }

    #[test]
    fn mid_distribution_is_rank_invariant(v in any_values()) {
        let h: Vec<f64> = v.iter().map(|x| (x / 100.0).exp() + 3.0 * x).collect();
        let (a, b) = (Sample::new(&v).unwrap(), Sample::new(&h).unwrap());
        prop_assert_eq!(a.mid_ranks(), b.mid_ranks());
    }

    #[test]
    fn mean_and_variance_from_quantile_integral(v in any_values()) {
        let s = Sample::new(&v).unwrap();
        // Q is constant on each atom interval of length p_j
        let m: f64 = s.values().iter().zip(s.masses()).map(|(x, p)| x * p).sum();
        let var: f64 = s.values().iter().zip(s.masses()).map(|(x, p)| (x - m).powi(2) * p).sum();
        prop_assert!(close(m, s.mean(), 1e-12));
        prop_assert!(close(var, s.variance(), 1e-10));
    }

    #[test]
    fn score_basis_is_orthonormal(v in any_values(), m in 1usize..7) {
        prop_assume!(nondegenerate(&v));
        let s = Sample::new(&v).unwrap();
        let b = ScoreBasis::new(&s, m).unwrap();
        let p = s.masses();
        for j in 1..=b.max_order() {
            let tj = b.scores(j).unwrap();
            let mean: f64 = tj.iter().zip(p).map(|(t, p)| t * p).sum();
            prop_assert!(mean.abs() < 1e-10);
            for k in 1..=b.max_order() {
                let tk = b.scores(k).unwrap();
                let ip: f64 = tj.iter().zip(tk).zip(p).map(|((a, b), p)| a * b * p).sum();
                let want = if j == k { 1.0 } else { 0.0 };
                prop_assert!((ip - want).abs() < 1e-10, "j={} k={} ip={}", j, k, ip);
                prop_assert_eq!(b.step_inner_product(j, k).unwrap(), b.gram()[j - 1][k - 1]);
            }
        }
        let t1 = b.scores(1).unwrap();
        prop_assert!(t1.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn score_basis_is_rank_invariant(v in any_values()) {
        prop_assume!(nondegenerate(&v));
        let h: Vec<f64> = v.iter().map(|x| x.powi(3) + x).collect();
        let a = ScoreBasis::new(&Sample::new(&v).unwrap(), 4).unwrap();
        let b = ScoreBasis::new(&Sample::new(&h).unwrap(), 4).unwrap();
        prop_assert_eq!(a.max_order(), b.max_order());
        for j in 1..=a.max_order() {
            prop_assert_eq!(a.scores(j).unwrap(), b.scores(j).unwrap());
        }
    }

    #[test]
    fn lp_moments_obey_bessel(v in any_values()) {
        prop_assume!(nondegenerate(&v));
        let b = ScoreBasis::new(&Sample::new(&v).unwrap(), 6).unwrap();
        let lm = lp_moments(&b, b.max_order()).unwrap();
        let total: f64 = lm.moments.iter().map(|c| c * c).sum();
        prop_assert!(total <= 1.0 + 1e-10);
    }

    #[test]
    fn comoment_symmetries(
        pairs in prop::collection::vec((0i32..8, -50.0f64..50.0), 6..50)
    ) {
        let x: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        prop_assume!(nondegenerate(&x) && nondegenerate(&y));
        let bx = ScoreBasis::new(&Sample::new(&x).unwrap(), 3).unwrap();
        let by = ScoreBasis::new(&Sample::new(&y).unwrap(), 3).unwrap();
        let m = bx.max_order().min(by.max_order());
        let xy = lp_comoments(&bx, &by, m, SelectionRule::None).unwrap();
        let yx = lp_comoments(&by, &bx, m, SelectionRule::None).unwrap();
        for j in 1..=m {
            for k in 1..=m {
                prop_assert_eq!(xy.entry(j, k), yx.entry(k, j));
            }
        }
        let xx = lp_comoments(&bx, &bx, bx.max_order(), SelectionRule::None).unwrap();
        for j in 1..=bx.max_order() {
            for k in 1..=bx.max_order() {
                let want = if j == k { 1.0 } else { 0.0 };
                prop_assert!((xx.entry(j, k) - want).abs() < 1e-10);
            }
        }
        // strictly increasing transforms leave comoments untouched
        let hx: Vec<f64> = x.iter().map(|v| 2.0 * v - 7.0).collect();
        let hy: Vec<f64> = y.iter().map(|v| v.powi(3)).collect();
        let bhx = ScoreBasis::new(&Sample::new(&hx).unwrap(), 3).unwrap();
        let bhy = ScoreBasis::new(&Sample::new(&hy).unwrap(), 3).unwrap();
        let h = lp_comoments(&bhx, &bhy, m, SelectionRule::None).unwrap();
        prop_assert_eq!(h.entries(), xy.entries());
    }

    #[test]
    fn spearman_mid_is_pearson_of_mid_ranks(
        pairs in prop::collection::vec((0i32..6, -5i32..5), 4..60)
    ) {
        let x: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
        prop_assume!(nondegenerate(&x) && nondegenerate(&y));
        let c = correlations(&x, &y).unwrap();
        let rx = Sample::new(&x).unwrap().mid_ranks();
        let ry = Sample::new(&y).unwrap().mid_ranks();
        let pearson = correlations(&rx, &ry).unwrap().pearson;
        prop_assert!((c.spearman_mid - pearson).abs() < 1e-12);
    }

    #[test]
    fn parseval_for_any_coefficients(c in prop::collection::vec(-0.5f64..0.5, 1..8), mask in prop::collection::vec(any::<bool>(), 8)) {
        let sel = mask[..c.len()].to_vec();
        let g = ReferenceDistribution::Uniform { low: 0.0, high: 1.0 };
        let m = CompDensityModel::from_coefficients(g, c, sel, 100);
        prop_assert!((m.gof_distance() - gof_by_quadrature(&m)).abs() < 1e-8);
    }

    #[test]
    fn maxent_normalizes_and_round_trips(c1 in -0.3f64..0.3, c2 in -0.3f64..0.3) {
        let q = lpstat_core::quadrature::GaussLegendre::unit();
        let targets = [(1, c1), (2, c2)];
        let p = maxent_solve(&targets).unwrap();
        let total = q.integrate(|u| p.density(u));
        prop_assert!((total - 1.0).abs() < 1e-8);
        for &(j, c) in &targets {
            let got = q.integrate(|u| p.density(u) * legendre_eval(j, u).unwrap());
            prop_assert!((got - c).abs() < 1e-6);
        }
    }

    #[test]
    fn copula_swap_symmetry(
        pairs in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 20..80),
        u in 0.01f64..0.99, v in 0.01f64..0.99,
    ) {
        let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.0 * 0.7 + p.1).collect();
        let mxy = fit_copula(&x, &y, 3, SelectionRule::None).unwrap();
        let myx = mxy.swapped();
        prop_assert_eq!(mxy.eval_copula(u, v).unwrap(), myx.eval_copula(v, u).unwrap());
        let direct = fit_copula(&y, &x, 3, SelectionRule::None).unwrap();
        prop_assert_eq!(mxy.eval_copula(u, v).unwrap(), direct.eval_copula(v, u).unwrap());
        prop_assert!((mxy.integrate_copula() - 1.0).abs() < 1e-10);
        let s = mxy.slice(u).unwrap();
        prop_assert!((s.integral() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn regression_is_rank_invariant(
        pairs in prop::collection::vec((0.0f64..10.0, -3.0f64..3.0), 10..60)
    ) {
        let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let hx: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        let a = ScoreBasis::new(&Sample::new(&x).unwrap(), 3).unwrap();
        let b = ScoreBasis::new(&Sample::new(&hx).unwrap(), 3).unwrap();
        let ra = series_regression(&a, &y, a.max_order(), SelectionRule::Aic).unwrap();
        let rb = series_regression(&b, &y, b.max_order(), SelectionRule::Aic).unwrap();
        prop_assert_eq!(ra.fitted(), rb.fitted());
        prop_assert_eq!(&ra.coefficients, &rb.coefficients);
    }

    #[test]
    fn combine_identities(
        n1 in 1usize..500, m1 in -1e3f64..1e3, v1 in 0.0f64..1e3,
        n2 in 1usize..500, m2 in -1e3f64..1e3, v2 in 0.0f64..1e3,
    ) {
        let g1 = GroupSummary::new(n1, m1, v1).unwrap();
        let g2 = GroupSummary::new(n2, m2, v2).unwrap();
        let a = combine(&g1, &g2);
        let b = combine(&g2, &g1);
        prop_assert!(close(a.mean, b.mean, 1e-12) && close(a.var, b.var, 1e-12) && close(a.vpool, b.vpool, 1e-12));
        prop_assert!((a.tau1 + a.tau2 - 1.0).abs() < 1e-15);
        // variance of the difference of group means
        let lhs = v1 / n1 as f64 + v2 / n2 as f64;
        let rhs = (n2 as f64 * v1 + n1 as f64 * v2) / (n1 as f64 * n2 as f64);
        prop_assert!(close(lhs, rhs, 1e-13));
    }

    #[test]
    fn combine_matches_concatenation(a in prop::collection::vec(-1e2f64..1e2, 1..40), b in prop::collection::vec(-1e2f64..1e2, 1..40)) {
        let ga = GroupSummary::from_values(&a).unwrap();
        let gb = GroupSummary::from_values(&b).unwrap();
        let all: Vec<f64> = a.iter().chain(&b).copied().collect();
        let direct = GroupSummary::from_values(&all).unwrap();
        let c = combine(&ga, &gb);
        prop_assert!(close(c.mean, direct.mean, 1e-10));
        prop_assert!(close(c.var, direct.var, 1e-10));
        let mut s = GroupSummary::from_values(&a[..1]).unwrap();
        for &y in &a[1..] {
            s = recursive_update(&s, y);
        }
        prop_assert!(close(s.var, ga.var, 1e-10) && close(s.mean, ga.mean, 1e-10));
    }

    #[test]
    fn two_sample_identity_chain(
        rows in prop::collection::vec((any::<bool>(), -10.0f64..10.0), 6..80)
    ) {
        let x: Vec<f64> = rows.iter().map(|r| if r.0 { 1.0 } else { 0.0 }).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.1 + if r.0 { 1.5 } else { 0.0 }).collect();
        let n1 = x.iter().filter(|&&v| v == 1.0).count();
        prop_assume!(n1 >= 2 && n1 + 2 <= x.len());
        let rep = two_sample_report(&x, &y, 3, SelectionRule::Bic, ZScaling::SqrtN).unwrap();
        let c = rep.combine;
        let dm = rep.groups[1].mean - rep.groups[0].mean;
        prop_assert!((rep.r2 - c.tau1 * c.tau2 * dm * dm / c.var).abs() < 1e-12);
        prop_assert!((1.0 - rep.r2 - c.vpool / c.var).abs() < 1e-12);
        prop_assert!((rep.t * rep.t - rep.r2 / (1.0 - rep.r2)).abs() < 1e-12 * (1.0 + rep.t * rep.t));
        let cs = correlation_stats(&x, &y).unwrap();
        prop_assert!((cs.r - cs.r_odds).abs() < 1e-12 && cs.vpool_identity_ok);
        let st = student_t(&rep.groups[0], &rep.groups[1]).unwrap();
        prop_assert!((st.t_core - cs.t).abs() < 1e-10 * (1.0 + cs.t.abs()));
        let w = wilcoxon(&x, &y, ZScaling::SqrtN).unwrap();
        let spearman = correlations(&x, &y).unwrap().spearman_mid;
        prop_assert!((w.w - spearman).abs() < 1e-12);
        prop_assert!((w.w - w.w_rank).abs() < 1e-12);
        prop_assert!((rep.high_order_w[0] - w.w).abs() < 1e-12);
    }

    #[test]
    fn bayes_batch_equals_sequential(
        n0 in 0.5f64..20.0, m0 in -5.0f64..5.0, v0 in 0.0f64..4.0,
        data in prop::collection::vec(-10.0f64..10.0, 1..30), split in 0usize..30,
    ) {
        let prior = BayesNormalState::new(n0, m0, v0).unwrap();
        let k = split.min(data.len() - 1).max(1).min(data.len());
        let batch = bayes_normal_update(&prior, &GroupSummary::from_values(&data).unwrap());
        let mut seq = prior;
        for chunk in [&data[..k], &data[k..]] {
            if !chunk.is_empty() {
                seq = bayes_normal_update(&seq, &GroupSummary::from_values(chunk).unwrap());
            }
        }
        prop_assert!(close(batch.mean, seq.mean, 1e-12));
        prop_assert!(close(batch.var, seq.var, 1e-12));
        prop_assert!(close(batch.n_eff, seq.n_eff, 1e-15));
        let ybar = data.iter().sum::<f64>() / data.len() as f64;
        let textbook = (n0 * m0 + data.len() as f64 * ybar) / (n0 + data.len() as f64);
        prop_assert!(close(batch.mean, textbook, 1e-12));
    }

    #[test]
    fn clipped_density_integrates_to_one(c in prop::collection::vec(-1.5f64..1.5, 1..6)) {
        let sel = vec![true; c.len()];
        let g = ReferenceDistribution::Normal { mean: 0.0, sd: 1.0 };
        let m = CompDensityModel::from_coefficients(g, c, sel, 100);
        let q = lpstat_core::quadrature::GaussLegendre::unit();
        let total = q.integrate(|u| m.eval_density(u, DensityFlavor::L2Clipped).unwrap());
        prop_assert!((total - 1.0).abs() < 1e-12);
    }
}
