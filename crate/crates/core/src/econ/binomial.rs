use serde::Serialize;
use statrs::distribution::{Binomial, Discrete};

use super::{Decision, EconError, Reference, TestOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BinomialGroup {
    Higher,
    Similar,
    Lower,
}

/// Exact two-sided binomial test of `successes` out of `n` against `p0`.
/// When the test rejects, the side of `p0` the observed share falls on sets
/// the group.
pub fn binomial_group_test(
    successes: u64,
    n: u64,
    p0: f64,
    alpha: f64,
) -> Result<(TestOutcome, BinomialGroup), EconError> {
    if n == 0 || successes > n {
        return Err(EconError::InvalidArgument(format!("{successes} successes of {n} trials")));
    }
    let dist = Binomial::new(p0, n).map_err(|e| EconError::InvalidArgument(e.to_string()))?;
    let observed = dist.pmf(successes);
    // outcomes no more likely than the observed one, with a relative slack
    let cutoff = observed * (1.0 + 1e-7);
    let p_value = (0..=n)
        .map(|k| dist.pmf(k))
        .filter(|&pk| pk <= cutoff)
        .sum::<f64>()
        .min(1.0);
    let share = successes as f64 / n as f64;
    let reject = p_value < alpha;
    let group = match (reject, share > p0) {
        (false, _) => BinomialGroup::Similar,
        (true, true) => BinomialGroup::Higher,
        (true, false) => BinomialGroup::Lower,
    };
    let outcome = TestOutcome {
        name: "binomial".into(),
        statistic: share,
        reference: Reference::ExactPValue { p_value },
        decision: if reject { Decision::Reject } else { Decision::Accept },
        alpha,
        detail: format!("{successes}/{n} against p0={p0}"),
    };
    Ok((outcome, group))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p_value(o: &TestOutcome) -> f64 {
        match o.reference {
            Reference::ExactPValue { p_value } => p_value,
            _ => unreachable!(),
        }
    }

    #[test]
    fn eleven_of_thirteen_is_higher() {
        let (o, g) = binomial_group_test(11, 13, 0.5, 0.05).unwrap();
        assert_eq!(g, BinomialGroup::Higher);
        assert!((p_value(&o) - 2.0 * 92.0 / 8192.0).abs() < 1e-12);
    }

    #[test]
    fn near_half_is_similar() {
        for k in [6, 7] {
            assert_eq!(binomial_group_test(k, 13, 0.5, 0.05).unwrap().1, BinomialGroup::Similar);
        }
    }

    #[test]
    fn none_above_is_lower() {
        let (o, g) = binomial_group_test(0, 13, 0.5, 0.05).unwrap();
        assert_eq!(g, BinomialGroup::Lower);
        assert_eq!(o.decision, Decision::Reject);
    }

    #[test]
    fn invalid_counts() {
        assert!(binomial_group_test(5, 4, 0.5, 0.05).is_err());
        assert!(binomial_group_test(0, 0, 0.5, 0.05).is_err());
    }

    #[test]
    fn p_value_is_one_at_center() {
        let (o, _) = binomial_group_test(5, 10, 0.5, 0.05).unwrap();
        assert!((p_value(&o) - 1.0).abs() < 1e-12);
    }
}
