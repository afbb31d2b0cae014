use itertools::Itertools;
use statrs::distribution::{Binomial, DiscreteCDF};
use statrs::function::{beta::beta_reg, erf::erfc};

use super::correlation::average_ranks;
use super::{check_paired, StatsError, TestResult};

/// Pooled sample sizes up to this use the exact permutation distribution.
pub const EXACT_RANK_SUM_LIMIT: usize = 12;

/// Sign tests up to this many trials are summed in exact integer arithmetic.
const EXACT_SIGN_LIMIT: u64 = 120;

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// P(|Z| >= |z|).
pub fn normal_two_sided(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0)
}

/// P(|T| >= |t|) with `df` degrees of freedom.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    beta_reg(df / 2.0, 0.5, df / (df + t * t)).clamp(0.0, 1.0)
}

pub fn student_t_cdf(t: f64, df: f64) -> f64 {
    let tail = 0.5 * student_t_two_sided(t, df);
    if t >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Wilcoxon rank-sum (Mann–Whitney) test. The statistic is U for `xs`.
pub fn wilcoxon_rank_sum(xs: &[f64], ys: &[f64]) -> Result<TestResult, StatsError> {
    let (n1, n2) = (xs.len(), ys.len());
    if n1 == 0 || n2 == 0 {
        return Err(StatsError::TooFewObservations {
            needed: 1,
            got: n1.min(n2),
        });
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let pooled: Vec<f64> = xs.iter().chain(ys).copied().collect();
    let ranks = average_ranks(&pooled);
    let n = n1 + n2;
    let offset = (n1 * (n1 + 1)) as f64 / 2.0;
    let u = ranks[..n1].iter().sum::<f64>() - offset;
    let mu = (n1 * n2) as f64 / 2.0;
    let observed = (u - mu).abs();
    let label = format!("n1={n1},n2={n2}");

    if n <= EXACT_RANK_SUM_LIMIT {
        // permutation distribution over all assignments of ranks to xs
        let mut extreme = 0u64;
        let mut total = 0u64;
        for combo in (0..n).combinations(n1) {
            let uc = combo.iter().map(|&i| ranks[i]).sum::<f64>() - offset;
            total += 1;
            if (uc - mu).abs() >= observed - 1e-9 {
                extreme += 1;
            }
        }
        return Ok(TestResult {
            statistic: u,
            p_value: (extreme as f64 / total as f64).min(1.0),
            method: "wilcoxon rank-sum (exact)".into(),
            n: label,
        });
    }

    let ties: f64 = pooled
        .iter()
        .copied()
        .sorted_by(f64::total_cmp)
        .chunk_by(|v| *v)
        .into_iter()
        .map(|(_, g)| {
            let t = g.count() as f64;
            t * t * t - t
        })
        .sum();
    let nf = n as f64;
    let var = (n1 * n2) as f64 / 12.0 * ((nf + 1.0) - ties / (nf * (nf - 1.0)));
    let p_value = if var <= 0.0 {
        1.0
    } else {
        let z = (observed - 0.5) / var.sqrt();
        erfc(z / std::f64::consts::SQRT_2).min(1.0)
    };
    Ok(TestResult {
        statistic: u,
        p_value: p_value.clamp(0.0, 1.0),
        method: "wilcoxon rank-sum (normal approximation, tie and continuity corrected)".into(),
        n: label,
    })
}

/// Exact two-sided sign test: 2·P(X >= max(n_pos, n_neg)), X ~ Bin(n, 1/2).
pub fn sign_test(n_pos: u64, n_neg: u64) -> Result<TestResult, StatsError> {
    let n = n_pos + n_neg;
    if n == 0 {
        return Err(StatsError::TooFewObservations { needed: 1, got: 0 });
    }
    let k = n_pos.max(n_neg);
    let p = if n <= EXACT_SIGN_LIMIT {
        let mut c: u128 = 1; // C(n, j), built up from j = 0
        let mut tail: u128 = 0;
        for j in 0..=n {
            if j >= k {
                tail += c;
            }
            c = c * (n - j) as u128 / (j + 1) as u128;
        }
        2.0 * tail as f64 / 2f64.powi(n as i32)
    } else {
        let bin = Binomial::new(0.5, n).expect("valid binomial");
        2.0 * bin.sf(k - 1)
    };
    Ok(TestResult {
        statistic: n_pos as f64,
        p_value: p.min(1.0),
        method: "exact two-sided sign test".into(),
        n: format!("n={n}"),
    })
}

/// Paired t-test on d = xs − ys with n − 1 degrees of freedom.
pub fn paired_t_test(xs: &[f64], ys: &[f64]) -> Result<TestResult, StatsError> {
    check_paired(xs, ys, 2)?;
    let d: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| x - y).collect();
    if d.iter().all(|&v| v == d[0]) {
        return Err(StatsError::DegenerateVariance);
    }
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if var == 0.0 {
        return Err(StatsError::DegenerateVariance);
    }
    let t = mean / (var.sqrt() / n.sqrt());
    let df = n - 1.0;
    Ok(TestResult {
        statistic: t,
        p_value: student_t_two_sided(t, df),
        method: "paired t-test".into(),
        n: format!("n={},df={}", d.len(), d.len() - 1),
    })
}

/// Pooled two-proportion z-test of k1/n1 against k2/n2.
pub fn two_proportion_z_test(k1: u64, n1: u64, k2: u64, n2: u64) -> Result<TestResult, StatsError> {
    if n1 == 0 || n2 == 0 {
        return Err(StatsError::InvalidCounts("group sizes must be positive".into()));
    }
    if k1 > n1 || k2 > n2 {
        return Err(StatsError::InvalidCounts("successes exceed group size".into()));
    }
    if k1 + k2 == 0 || k1 + k2 == n1 + n2 {
        return Err(StatsError::DegenerateVariance);
    }
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let pooled = (k1 + k2) as f64 / (n1f + n2f);
    let se = (pooled * (1.0 - pooled) * (1.0 / n1f + 1.0 / n2f)).sqrt();
    let z = (k1 as f64 / n1f - k2 as f64 / n2f) / se;
    Ok(TestResult {
        statistic: z,
        p_value: normal_two_sided(z),
        method: "pooled two-proportion z-test".into(),
        n: format!("n1={n1},n2={n2}"),
    })
}
