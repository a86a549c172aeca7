//! Shrinking an uncertainty set without losing detection quality.
//!
//! If `σ ≤ λ` componentwise then every test built for the smaller intensity
//! misses the larger one less often, so only the componentwise-minimal
//! points of a set matter. A weaker sufficient condition groups coordinates
//! and compares σ against geometric means of λ within each group.

use serde::{Deserialize, Serialize};

use crate::error::{DetectError, Result};
use crate::model::{one_hot_family, CandidateSet, IntensityVector};

/// Componentwise-minimal subset of a finite candidate set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionResult {
    pub reduced: CandidateSet,
    /// Input indices of the kept points, in input order.
    pub kept: Vec<usize>,
    pub removed_count: usize,
    /// `(removed input index, kept input index)` with the kept point `≤` the removed one.
    pub witness_map: Vec<(usize, usize)>,
}

fn finite_points(candidates: &CandidateSet) -> Result<&[IntensityVector]> {
    match candidates {
        CandidateSet::FinitePoints(points) => {
            candidates.validate()?;
            Ok(points)
        }
        _ => Err(DetectError::invalid("expected a finite candidate set")),
    }
}

pub fn reduce_to_minimal(candidates: &CandidateSet) -> Result<ReductionResult> {
    let points = finite_points(candidates)?;
    // i is dropped when another point lies below it; of several equal points
    // the first one is kept.
    let dominated = |i: usize| {
        points.iter().enumerate().any(|(j, p)| j != i && p.is_dominated_by(&points[i]) && (j < i || p != &points[i]))
    };
    let kept: Vec<usize> = (0..points.len()).filter(|&i| !dominated(i)).collect();
    let mut witness_map = Vec::new();
    for i in 0..points.len() {
        if kept.binary_search(&i).is_err() {
            let w = kept
                .iter()
                .copied()
                .find(|&k| points[k].is_dominated_by(&points[i]))
                .expect("a finite partial order has a minimal element below every point");
            witness_map.push((i, w));
        }
    }
    Ok(ReductionResult {
        reduced: CandidateSet::FinitePoints(kept.iter().map(|&k| points[k].clone()).collect()),
        removed_count: points.len() - kept.len(),
        kept,
        witness_map,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dominance {
    /// `σ ≤ λ` componentwise.
    Dominates,
    Incomparable,
}

pub fn dominance_check(sigma: &IntensityVector, lambda: &IntensityVector) -> Result<Dominance> {
    DetectError::check_len(sigma.len(), lambda.len())?;
    Ok(if sigma.is_dominated_by(lambda) { Dominance::Dominates } else { Dominance::Incomparable })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionCertificate {
    pub groups: Vec<Vec<usize>>,
    /// `(Π_{i∈I_j} λ_i)^{1/|I_j|}` per group.
    pub geo_means: Vec<f64>,
    /// `σ_i ≤ geo_means[j]` for every `i ∈ I_j`.
    pub valid: bool,
}

fn check_partition(groups: &[Vec<usize>], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for group in groups {
        if group.is_empty() {
            return Err(DetectError::invalid("partition contains an empty group"));
        }
        for &i in group {
            if i >= n {
                return Err(DetectError::invalid(format!("index {i} out of range for n = {n}")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(DetectError::invalid(format!("index {i} appears in two groups")));
            }
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(DetectError::invalid(format!("index {i} is not covered by the partition")));
    }
    Ok(())
}

fn geometric_mean(values: impl Iterator<Item = f64>) -> f64 {
    let mut count = 0usize;
    let mut log_sum = 0.0;
    for v in values {
        if v == 0.0 {
            return 0.0;
        }
        log_sum += v.ln();
        count += 1;
    }
    (log_sum / count as f64).exp()
}

/// Group-wise comparison of σ against geometric means of λ.
pub fn lemma2_certificate(
    sigma: &IntensityVector,
    lambda: &IntensityVector,
    groups: &[Vec<usize>],
) -> Result<PartitionCertificate> {
    DetectError::check_len(sigma.len(), lambda.len())?;
    check_partition(groups, sigma.len())?;
    let (s, l) = (sigma.values(), lambda.values());
    let geo_means: Vec<f64> = groups.iter().map(|g| geometric_mean(g.iter().map(|&i| l[i]))).collect();
    let valid = groups.iter().zip(&geo_means).all(|(g, &m)| g.iter().all(|&i| s[i] <= m));
    Ok(PartitionCertificate { groups: groups.to_vec(), geo_means, valid })
}

pub const MAX_ENUMERATION_DIM: usize = 8;

/// All set partitions of `{0, …, n−1}` (Bell(n) of them), for `n ≤ 8`.
pub fn enumerate_partitions(n: usize) -> Result<Vec<Vec<Vec<usize>>>> {
    if n == 0 || n > MAX_ENUMERATION_DIM {
        return Err(DetectError::invalid(format!(
            "partition enumeration supports 1 ≤ n ≤ {MAX_ENUMERATION_DIM}, got {n}"
        )));
    }
    // restricted growth strings: label[0] = 0, label[i] ≤ 1 + max(label[..i])
    let mut out = Vec::new();
    let mut labels = vec![0usize; n];
    loop {
        let blocks = labels.iter().max().unwrap() + 1;
        let mut partition = vec![Vec::new(); blocks];
        for (i, &b) in labels.iter().enumerate() {
            partition[b].push(i);
        }
        out.push(partition);

        let mut i = n - 1;
        loop {
            if i == 0 {
                return Ok(out);
            }
            let prefix_max = *labels[..i].iter().max().unwrap();
            if labels[i] <= prefix_max {
                labels[i] += 1;
                labels[i + 1..].iter_mut().for_each(|l| *l = 0);
                break;
            }
            i -= 1;
        }
    }
}

/// First valid certificate over all partitions, fewest groups first.
pub fn find_lemma2_certificate(
    sigma: &IntensityVector,
    lambda: &IntensityVector,
) -> Result<Option<PartitionCertificate>> {
    let mut partitions = enumerate_partitions(sigma.len())?;
    partitions.sort_by_key(Vec::len);
    for groups in partitions {
        let cert = lemma2_certificate(sigma, lambda, &groups)?;
        if cert.valid {
            return Ok(Some(cert));
        }
    }
    Ok(None)
}

/// How strongly a reduction preserves detection quality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EqualityNotion {
    /// The minimax miss probability is unchanged for every n.
    Exact,
    /// Only the logarithmic asymptotics of the minimax miss probability agree.
    Asymptotic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalReduction {
    pub points: CandidateSet,
    pub notion: EqualityNotion,
}

pub fn canonical_reduction(candidates: &CandidateSet) -> Result<CanonicalReduction> {
    candidates.validate()?;
    match candidates {
        CandidateSet::FinitePoints(_) => {
            Ok(CanonicalReduction { points: reduce_to_minimal(candidates)?.reduced, notion: EqualityNotion::Exact })
        }
        CandidateSet::ProductFloor { n, d } => Ok(CanonicalReduction {
            points: CandidateSet::FinitePoints(vec![IntensityVector::constant(*n, *d)?]),
            notion: EqualityNotion::Exact,
        }),
        CandidateSet::SumFloor { n, r } => Ok(CanonicalReduction {
            points: CandidateSet::FinitePoints(one_hot_family(*n, r * (*n as f64).sqrt())?),
            notion: EqualityNotion::Asymptotic,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn iv(v: &[f64]) -> IntensityVector {
        IntensityVector::new(v.to_vec()).unwrap()
    }

    fn finite(points: &[&[f64]]) -> CandidateSet {
        CandidateSet::finite(points.iter().map(|p| iv(p)).collect()).unwrap()
    }

    #[test]
    fn pareto_examples() {
        let r = reduce_to_minimal(&finite(&[&[1.0, 2.0], &[2.0, 1.0], &[2.0, 2.0]])).unwrap();
        assert_eq!(r.kept, vec![0, 1]);
        assert_eq!(r.removed_count, 1);
        assert_eq!(r.witness_map.len(), 1);
        assert_eq!(r.witness_map[0].0, 2);

        let r = reduce_to_minimal(&finite(&[&[0.5, 0.7]])).unwrap();
        assert_eq!(r.removed_count, 0);

        let r = reduce_to_minimal(&finite(&[&[3.0, 3.0], &[1.0, 2.0], &[1.0, 1.0]])).unwrap();
        assert_eq!(r.reduced, finite(&[&[1.0, 1.0]]));
        assert_eq!(r.witness_map, vec![(0, 2), (1, 2)]);

        let r = reduce_to_minimal(&finite(&[&[1.0, 1.0], &[1.0, 1.0]])).unwrap();
        assert_eq!(r.kept, vec![0]);
        assert_eq!(r.witness_map, vec![(1, 0)]);

        assert!(reduce_to_minimal(&CandidateSet::SumFloor { n: 2, r: 1.0 }).is_err());
    }

    #[test]
    fn dominance_examples() {
        let s = iv(&[1.0, 2.0]);
        assert_eq!(dominance_check(&s, &s).unwrap(), Dominance::Dominates);
        assert_eq!(dominance_check(&s, &iv(&[2.0, 1.0])).unwrap(), Dominance::Incomparable);
        assert_eq!(dominance_check(&iv(&[1.0, 1.0]), &iv(&[2.0, 3.0])).unwrap(), Dominance::Dominates);
        assert!(dominance_check(&s, &iv(&[1.0])).is_err());
    }

    #[test]
    fn certificate_examples() {
        let s = iv(&[1.0, 1.0]);
        let c = lemma2_certificate(&s, &iv(&[2.0, 0.6]), &[vec![0, 1]]).unwrap();
        assert!(c.valid);
        assert_relative_eq!(c.geo_means[0], 1.2f64.sqrt(), max_relative = 1e-15);

        let singletons = vec![vec![0], vec![1]];
        assert!(!lemma2_certificate(&s, &iv(&[2.0, 0.6]), &singletons).unwrap().valid);
        assert!(lemma2_certificate(&s, &iv(&[2.0, 1.0]), &singletons).unwrap().valid);

        assert!(lemma2_certificate(&s, &s, &[vec![0]]).is_err());
        assert!(lemma2_certificate(&s, &s, &[vec![0, 1], vec![1]]).is_err());
        assert!(lemma2_certificate(&s, &s, &[vec![0, 2]]).is_err());
        assert!(lemma2_certificate(&s, &s, &[vec![0, 1], vec![]]).is_err());
    }

    #[test]
    fn partitions_are_counted_by_bell_numbers() {
        let bell = [1, 2, 5, 15, 52, 203, 877, 4140];
        for (n, &b) in (1..=8).zip(&bell) {
            let parts = enumerate_partitions(n).unwrap();
            assert_eq!(parts.len(), b);
            for p in &parts {
                check_partition(p, n).unwrap();
            }
        }
        assert!(enumerate_partitions(9).is_err());
        assert!(enumerate_partitions(0).is_err());
    }

    #[test]
    fn finds_grouped_certificate() {
        let s = iv(&[1.0, 1.0, 0.5]);
        let l = iv(&[2.0, 0.6, 0.7]);
        let cert = find_lemma2_certificate(&s, &l).unwrap().unwrap();
        assert_eq!(cert.groups, vec![vec![0, 1], vec![2]]);
        assert!(find_lemma2_certificate(&iv(&[1.0, 1.0]), &iv(&[0.5, 0.5])).unwrap().is_none());
    }

    #[test]
    fn canonical_examples() {
        let r = canonical_reduction(&CandidateSet::ProductFloor { n: 3, d: 1.0 }).unwrap();
        assert_eq!(r.points, finite(&[&[1.0, 1.0, 1.0]]));
        assert_eq!(r.notion, EqualityNotion::Exact);

        let r = canonical_reduction(&CandidateSet::SumFloor { n: 4, r: 1.0 }).unwrap();
        assert_eq!(
            r.points,
            finite(&[&[2.0, 0.0, 0.0, 0.0], &[0.0, 2.0, 0.0, 0.0], &[0.0, 0.0, 2.0, 0.0], &[0.0, 0.0, 0.0, 2.0]])
        );
        assert_eq!(r.notion, EqualityNotion::Asymptotic);

        let r = canonical_reduction(&CandidateSet::SumFloor { n: 1, r: 0.7 }).unwrap();
        assert_eq!(r.points, finite(&[&[0.7]]));

        let r = canonical_reduction(&finite(&[&[1.0, 2.0], &[2.0, 2.0]])).unwrap();
        assert_eq!(r.points, finite(&[&[1.0, 2.0]]));
    }

    fn point_set() -> impl Strategy<Value = Vec<IntensityVector>> {
        (1usize..5).prop_flat_map(|n| {
            proptest::collection::vec(
                proptest::collection::vec(0u8..4, n)
                    .prop_map(|v| IntensityVector::new(v.into_iter().map(f64::from).collect()).unwrap()),
                1..30,
            )
        })
    }

    proptest! {
        #[test]
        fn reduction_is_idempotent_and_antichain(points in point_set()) {
            let set = CandidateSet::finite(points.clone()).unwrap();
            let once = reduce_to_minimal(&set).unwrap();
            let twice = reduce_to_minimal(&once.reduced).unwrap();
            prop_assert_eq!(&twice.reduced, &once.reduced);
            prop_assert_eq!(twice.removed_count, 0);
            for &(removed, kept) in &once.witness_map {
                prop_assert!(points[kept].is_dominated_by(&points[removed]));
                prop_assert!(once.kept.contains(&kept));
            }
            prop_assert_eq!(once.kept.len() + once.witness_map.len(), points.len());
        }

        #[test]
        fn singleton_groups_match_dominance(s in proptest::collection::vec(0.0f64..3.0, 4), l in proptest::collection::vec(0.0f64..3.0, 4)) {
            let (s, l) = (IntensityVector::new(s).unwrap(), IntensityVector::new(l).unwrap());
            let groups: Vec<Vec<usize>> = (0..4).map(|i| vec![i]).collect();
            let cert = lemma2_certificate(&s, &l, &groups).unwrap();
            prop_assert_eq!(cert.valid, dominance_check(&s, &l).unwrap() == Dominance::Dominates);
        }
    }
}
