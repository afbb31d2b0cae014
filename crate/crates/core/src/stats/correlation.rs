use super::{check_paired, StatsError};

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn is_constant(xs: &[f64]) -> bool {
    xs.iter().all(|&v| v == xs[0])
}

/// Product-moment correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, StatsError> {
    check_paired(xs, ys, 2)?;
    if is_constant(xs) || is_constant(ys) {
        return Err(StatsError::DegenerateVariance);
    }
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::DegenerateVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// 1-based fractional ranks; tied values share the mean of their ranks.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman's rho: Pearson on average ranks.
pub fn rank_correlation(xs: &[f64], ys: &[f64]) -> Result<f64, StatsError> {
    check_paired(xs, ys, 2)?;
    pearson(&average_ranks(xs), &average_ranks(ys))
}

fn indicator(v: &[bool]) -> Vec<f64> {
    v.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
}

/// Phi coefficient: Pearson on {0,1} encodings of two binary decision lists.
pub fn phi(a: &[bool], b: &[bool]) -> Result<f64, StatsError> {
    pearson(&indicator(a), &indicator(b))
}

/// Fraction of positions where the two decision lists agree.
pub fn agreement_rate(a: &[bool], b: &[bool]) -> Result<f64, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(StatsError::TooFewObservations { needed: 1, got: 0 });
    }
    let same = a.iter().zip(b).filter(|(x, y)| x == y).count();
    Ok(same as f64 / a.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn pearson_examples() {
        assert!(close(pearson(&[1., 2., 3.], &[2., 4., 6.]).unwrap(), 1.0));
        assert!(close(pearson(&[1., 2., 3.], &[3., 2., 1.]).unwrap(), -1.0));
        // cov = (−1.5·−1.5 + −0.5·0.5 + 0.5·−0.5 + 1.5·1.5)/n = 4/n, var = 5/n each
        assert!(close(pearson(&[1., 2., 3., 4.], &[1., 3., 2., 4.]).unwrap(), 0.8));
    }

    #[test]
    fn pearson_errors() {
        assert_eq!(pearson(&[1., 1., 1.], &[1., 2., 3.]), Err(StatsError::DegenerateVariance));
        assert_eq!(pearson(&[1.], &[1.]), Err(StatsError::TooFewObservations { needed: 2, got: 1 }));
        assert_eq!(pearson(&[1., 2.], &[1.]), Err(StatsError::LengthMismatch { left: 2, right: 1 }));
        assert_eq!(pearson(&[1., f64::NAN], &[1., 2.]), Err(StatsError::NonFinite));
        assert_eq!(StatsError::DegenerateVariance.code(), "DEGENERATE_VARIANCE");
    }

    #[test]
    fn rank_examples() {
        assert!(close(rank_correlation(&[1., 2., 3.], &[1., 2., 3.]).unwrap(), 1.0));
        assert!(close(rank_correlation(&[1., 2., 3.], &[3., 2., 1.]).unwrap(), -1.0));
        // ranks (1,2,3) vs (2,1,3): d² sum 2, rho = 1 − 6·2/(3·8)
        assert!(close(rank_correlation(&[1., 2., 3.], &[2., 1., 3.]).unwrap(), 0.5));
        assert_eq!(average_ranks(&[10., 20., 10., 5.]), vec![2.5, 4.0, 2.5, 1.0]);
    }

    #[test]
    fn phi_and_agreement() {
        let a = [true, true, false, false];
        let b = [true, false, false, false];
        // 2x2 table a=1,b=1,c=0,d=2 → (ad−bc)/√((a+b)(c+d)(a+c)(b+d)) = 2/√12
        assert!(close(phi(&a, &b).unwrap(), 2.0 / 12f64.sqrt()));
        assert!(close(agreement_rate(&a, &b).unwrap(), 0.75));
    }

    fn distinct_pairs() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (2usize..20).prop_flat_map(|n| {
            (
                prop::collection::vec(-1e3f64..1e3, n),
                prop::collection::vec(-1e3f64..1e3, n),
            )
        })
    }

    proptest! {
        #[test]
        fn pearson_bounded_and_affine_invariant(
            (xs, ys) in distinct_pairs(),
            a in 0.1f64..10.0,
            b in -100f64..100.0,
        ) {
            prop_assume!(!is_constant(&xs) && !is_constant(&ys));
            let r = pearson(&xs, &ys).unwrap();
            prop_assert!((-1.0..=1.0).contains(&r));
            let scaled: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
            let r2 = pearson(&scaled, &ys).unwrap();
            prop_assert!((r - r2).abs() < 1e-9, "{} vs {}", r, r2);
        }

        #[test]
        fn rank_correlation_monotone_invariant((xs, ys) in distinct_pairs()) {
            prop_assume!(!is_constant(&xs) && !is_constant(&ys));
            let rho = rank_correlation(&xs, &ys).unwrap();
            prop_assert!((-1.0..=1.0).contains(&rho));
            let warped: Vec<f64> = xs.iter().map(|x| x * x * x + 5.0 * x).collect();
            let rho2 = rank_correlation(&warped, &ys).unwrap();
            prop_assert!((rho - rho2).abs() < 1e-12);
        }
    }
}
