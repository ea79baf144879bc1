//! Structural properties of the coefficient map and the sequence norm, each
//! over at least 1000 random instances.

use besov_empirica::besov::level_statistics;
use besov_empirica::besov::{besov_norm, level_statistic, p_monotonicity_check, BesovParams, LevelProfile};
use besov_empirica::dyadic::{dyadic_grid, extract_coefficients, reconstruct_path, scale_triangle};
use besov_empirica::empirical::{ecdf_eval, HalfCellCounts};
use besov_empirica::{CoefficientTriangle, DyadicPathValues, EmpiricalSample};
use proptest::prelude::*;

const CASES: u32 = 1000;

fn path_strategy(max_level: u32) -> impl Strategy<Value = DyadicPathValues> {
    (1..=max_level).prop_flat_map(|level| {
        prop::collection::vec(-1e3f64..1e3, (1usize << level) + 1)
            .prop_map(move |v| DyadicPathValues::new(level, v).unwrap())
    })
}

fn path_pair(max_level: u32) -> impl Strategy<Value = (DyadicPathValues, DyadicPathValues)> {
    (1..=max_level).prop_flat_map(|level| {
        let len = (1usize << level) + 1;
        (prop::collection::vec(-1e3f64..1e3, len), prop::collection::vec(-1e3f64..1e3, len)).prop_map(move |(a, b)| {
            (DyadicPathValues::new(level, a).unwrap(), DyadicPathValues::new(level, b).unwrap())
        })
    })
}

fn triangle_strategy(max_level: u32) -> impl Strategy<Value = CoefficientTriangle> {
    (0..=max_level).prop_flat_map(|top| {
        let levels: Vec<_> = (0..=top).map(|j| prop::collection::vec(-10f64..10.0, 1usize << j)).collect();
        (-10f64..10.0, -10f64..10.0, levels)
            .prop_map(|(mu0, mu1, levels)| CoefficientTriangle::new(mu0, mu1, levels).unwrap())
    })
}

fn triangle_pair(max_level: u32) -> impl Strategy<Value = (CoefficientTriangle, CoefficientTriangle)> {
    triangle_strategy(max_level).prop_flat_map(|a| {
        let top = a.max_level();
        let levels: Vec<_> = (0..=top).map(|j| prop::collection::vec(-10f64..10.0, 1usize << j)).collect();
        (Just(a), -10f64..10.0, -10f64..10.0, levels)
            .prop_map(|(a, mu0, mu1, levels)| (a, CoefficientTriangle::new(mu0, mu1, levels).unwrap()))
    })
}

fn sample_strategy() -> impl Strategy<Value = EmpiricalSample> {
    prop::collection::btree_set(1u64..(1 << 52), 2..200).prop_map(|set| {
        let values = set.into_iter().map(|m| (2 * m + 1) as f64 * (-53f64).exp2()).collect();
        EmpiricalSample::from_sorted(values).unwrap()
    })
}

fn flat(t: &CoefficientTriangle) -> Vec<f64> {
    let mut v = vec![t.mu0(), t.mu1()];
    v.extend(t.levels().iter().flatten());
    v
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    #[test]
    fn coefficient_map_is_linear((f, g) in path_pair(8), a in -5f64..5.0, b in -5f64..5.0) {
        let combo: Vec<f64> = f.values().iter().zip(g.values()).map(|(x, y)| a * x + b * y).collect();
        let lhs = flat(&extract_coefficients(&DyadicPathValues::new(f.level(), combo).unwrap()).unwrap());
        let ef = extract_coefficients(&f).unwrap();
        let eg = extract_coefficients(&g).unwrap();
        let rhs = flat(&ef.linear_combination(a, &eg, b).unwrap());
        let scale = 1.0 + max_abs(&lhs).max(max_abs(&rhs));
        for (x, y) in lhs.iter().zip(&rhs) {
            prop_assert!((x - y).abs() <= 1e-12 * scale, "{x} vs {y}");
        }
    }

    #[test]
    fn affine_paths_with_exact_grid_values_have_zero_levels(
        level in 1u32..=12,
        a in -(1i64 << 20)..(1i64 << 20),
        b in -(1i64 << 20)..(1i64 << 20),
        shift in 0i32..30,
    ) {
        // a + b k / 2^J is exactly representable here, so the zeros are exact.
        let (a, b) = (a as f64 * (-shift as f64).exp2(), b as f64 * (-shift as f64).exp2());
        let grid = dyadic_grid(level).unwrap();
        let values = (0..grid.len()).map(|k| a + b * grid.point(k)).collect();
        let t = extract_coefficients(&DyadicPathValues::new(level, values).unwrap()).unwrap();
        prop_assert!(t.levels().iter().flatten().all(|&c| c == 0.0));
    }

    #[test]
    fn affine_paths_have_negligible_levels(level in 1u32..=12, a in -1e6f64..1e6, b in -1e6f64..1e6) {
        let grid = dyadic_grid(level).unwrap();
        let values = (0..grid.len()).map(|k| a + b * grid.point(k)).collect();
        let t = extract_coefficients(&DyadicPathValues::new(level, values).unwrap()).unwrap();
        let scale = (a.abs() + b.abs()) * (1u64 << (level / 2 + 1)) as f64;
        prop_assert!(t.levels().iter().flatten().all(|&c| c.abs() <= 1e-14 * scale));
    }

    #[test]
    fn reconstruct_then_extract_is_identity(t in triangle_strategy(9)) {
        let back = extract_coefficients(&reconstruct_path(&t).unwrap()).unwrap();
        prop_assert_eq!(back.max_level(), t.max_level());
        let (x, y) = (flat(&back), flat(&t));
        let scale = 1.0 + max_abs(&y);
        for (a, b) in x.iter().zip(&y) {
            prop_assert!((a - b).abs() <= 1e-12 * scale * (1u64 << (t.max_level() / 2)) as f64);
        }
    }

    #[test]
    fn extract_then_reconstruct_is_identity(f in path_strategy(10)) {
        let back = reconstruct_path(&extract_coefficients(&f).unwrap()).unwrap();
        prop_assert_eq!(back.level(), f.level());
        let scale = 1.0 + max_abs(f.values());
        for (a, b) in back.values().iter().zip(f.values()) {
            prop_assert!((a - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn coefficients_are_local(f in path_strategy(7), pick in any::<prop::sample::Index>(), bump in -10f64..10.0) {
        let level = f.level();
        let mut values = f.values().to_vec();
        let idx = pick.index(values.len());
        values[idx] += bump;
        let base = extract_coefficients(&f).unwrap();
        let moved = extract_coefficients(&DyadicPathValues::new(level, values).unwrap()).unwrap();
        for j in 0..level {
            let stride = 1usize << (level - j);
            for k in 0..1usize << j {
                let touched = [k * stride, k * stride + stride / 2, (k + 1) * stride].contains(&idx);
                if !touched {
                    prop_assert_eq!(base.levels()[j as usize][k], moved.levels()[j as usize][k]);
                }
            }
        }
    }

    #[test]
    fn step_coefficients_match_second_differences(sample in sample_strategy(), top in 1u32..=10) {
        let counts = HalfCellCounts::new(&sample, top).unwrap();
        let step = counts.coefficients();
        let n = sample.n() as f64;
        let grid = dyadic_grid(top + 1).unwrap();
        let path = DyadicPathValues::from_fn(top + 1, |s| n.sqrt() * (ecdf_eval(&sample, s).unwrap() - s)).unwrap();
        prop_assert_eq!(grid.len(), path.values().len());
        let direct = extract_coefficients(&path).unwrap();
        for j in 0..=top {
            let contrasts: Vec<i64> = counts.contrasts(j).collect();
            let unit = besov_empirica::dyadic::level_scale(j) / n.sqrt();
            for (k, (&a, &b)) in step.levels()[j as usize].iter().zip(&direct.levels()[j as usize]).enumerate() {
                // Integer cell contrasts agree exactly; the float scaling to 1e-12.
                prop_assert_eq!((b / unit).round() as i64, contrasts[k]);
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()) * (1u64 << (j / 2 + 1)) as f64);
            }
        }
    }

    #[test]
    fn norm_is_absolutely_homogeneous(t in triangle_strategy(8), c in -50f64..50.0, p in 1f64..6.0, alpha in 0.01f64..=1.0) {
        let params = BesovParams::new(p, alpha).unwrap();
        let lhs = besov_norm(&scale_triangle(&t, c).unwrap(), params);
        let rhs = c.abs() * besov_norm(&t, params);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
    }

    #[test]
    fn norm_satisfies_triangle_inequality((a, b) in triangle_pair(8), p in 1f64..6.0, alpha in 0.01f64..=1.0) {
        let params = BesovParams::new(p, alpha).unwrap();
        let sum = besov_norm(&a.linear_combination(1.0, &b, 1.0).unwrap(), params);
        let bound = besov_norm(&a, params) + besov_norm(&b, params);
        prop_assert!(sum <= bound * (1.0 + 1e-12), "{sum} > {bound}");
    }

    #[test]
    fn level_statistic_is_monotone_in_p(t in triangle_strategy(8), p1 in 1f64..8.0, dp in 0f64..8.0, alpha in 0.01f64..=1.0) {
        prop_assert!(p_monotonicity_check(&t, p1, p1 + dp, alpha).unwrap());
    }

    #[test]
    fn half_alpha_statistic_is_normalized_power_mean(t in triangle_strategy(8), p in 1f64..6.0) {
        let params = BesovParams::new(p, 0.5).unwrap();
        for j in 0..=t.max_level() {
            let level = &t.levels()[j as usize];
            let mean = level.iter().map(|x| x.abs().powf(p)).sum::<f64>() / level.len() as f64;
            let direct = mean.powf(1.0 / p);
            let got = level_statistic(&t, j, params).unwrap();
            prop_assert!((got - direct).abs() <= 1e-12 * (1.0 + direct));
        }
    }

    #[test]
    fn truncated_sup_is_nondecreasing(t in triangle_strategy(10), p in 1f64..4.0) {
        let profile = LevelProfile::from_statistics(level_statistics(&t, BesovParams::new(p, 0.5).unwrap()));
        prop_assert!(profile.running_sup.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(profile.tail_min.windows(2).all(|w| w[0] <= w[1]));
    }
}
