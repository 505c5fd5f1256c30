use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::AugmentError;
use crate::corpus::{CategoryPath, LanguageTag, QCRecord, QIRecord, Record, Task};
use crate::seed;

/// Default per-language quota for QC translation.
pub const QC_DEFAULT_QUOTA: usize = 42_000;
/// Default per-language quota for QI translation.
pub const QI_DEFAULT_QUOTA: usize = 50_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguagePlan {
    pub target: LanguageTag,
    /// Eligible sources for this target (the pool minus records already in
    /// the target language).
    pub eligible: usize,
    /// Indices into the source corpus, ascending.
    pub sources: Vec<usize>,
}

/// Which records get translated into which languages.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationPlan {
    pub task: Task,
    pub seed: u64,
    pub quota: usize,
    /// Size of the corpus the indices refer to.
    pub source_count: usize,
    pub languages: Vec<LanguagePlan>,
}

impl TranslationPlan {
    pub fn total(&self) -> usize {
        self.languages.iter().map(|l| l.sources.len()).sum()
    }

    pub fn to_json(&self) -> String {
        crate::report::to_stable_json(self)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, AugmentError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| AugmentError::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| AugmentError::BadPlan(e.to_string()))
    }
}

/// Splits `n` across strata proportionally to their sizes, handing leftover
/// units to the largest remainders (earlier strata win ties).
fn proportional_allocation(n: usize, sizes: &[usize]) -> Vec<usize> {
    let total: usize = sizes.iter().sum();
    if total == 0 {
        return vec![0; sizes.len()];
    }
    let n = n.min(total);
    let mut alloc: Vec<usize> = sizes.iter().map(|&s| n * s / total).collect();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse((n * sizes[i]) % total));
    let mut left = n - alloc.iter().sum::<usize>();
    for i in order {
        if left == 0 {
            break;
        }
        if alloc[i] < sizes[i] {
            alloc[i] += 1;
            left -= 1;
        }
    }
    alloc
}

fn sample_without_replacement<R: Rng>(pool: &[usize], k: usize, rng: &mut R) -> Vec<usize> {
    let mut pool = pool.to_vec();
    for i in 0..k {
        let j = rng.gen_range(i..pool.len());
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool
}

fn language_ordinal(language: LanguageTag) -> u64 {
    LanguageTag::ALL
        .iter()
        .position(|&l| l == language)
        .expect("listed") as u64
}

fn plan_from_pool<R: Record>(
    records: &[R],
    pool: &[usize],
    targets: &[LanguageTag],
    quota: usize,
    seed: u64,
) -> Result<TranslationPlan, AugmentError> {
    if pool.is_empty() {
        return Err(AugmentError::EmptyEligiblePool);
    }
    let mut seen = HashSet::new();
    let mut languages = Vec::with_capacity(targets.len());
    for &target in targets {
        if !seen.insert(target) {
            return Err(AugmentError::DuplicateTarget(target));
        }
        let (positives, negatives): (Vec<usize>, Vec<usize>) = pool
            .iter()
            .copied()
            .filter(|&i| records[i].language() != target)
            .partition(|&i| records[i].label().is_positive());
        let eligible = positives.len() + negatives.len();
        let alloc = proportional_allocation(quota, &[positives.len(), negatives.len()]);
        // One stream per target language, independent of the other targets.
        let mut rng = seed::rng_for(seed, language_ordinal(target));
        let mut sources = sample_without_replacement(&positives, alloc[0], &mut rng);
        sources.extend(sample_without_replacement(&negatives, alloc[1], &mut rng));
        sources.sort_unstable();
        languages.push(LanguagePlan {
            target,
            eligible,
            sources,
        });
    }
    Ok(TranslationPlan {
        task: R::TASK,
        seed,
        quota,
        source_count: records.len(),
        languages,
    })
}

/// Samples QC records whose category path also occurs in the dev set.
///
/// Sources may be in any language; the label mix of each sample follows the
/// eligible pool.
pub fn plan_qc_augmentation(
    train: &[QCRecord],
    dev_paths: &HashSet<CategoryPath>,
    targets: &[LanguageTag],
    quota: usize,
    seed: u64,
) -> Result<TranslationPlan, AugmentError> {
    let pool: Vec<usize> = train
        .iter()
        .enumerate()
        .filter(|(_, r)| dev_paths.contains(&r.path))
        .map(|(i, _)| i)
        .collect();
    plan_from_pool(train, &pool, targets, quota, seed)
}

/// Samples English QI records for translation.
pub fn plan_qi_augmentation(
    train: &[QIRecord],
    targets: &[LanguageTag],
    quota: usize,
    seed: u64,
) -> Result<TranslationPlan, AugmentError> {
    let pool: Vec<usize> = train
        .iter()
        .enumerate()
        .filter(|(_, r)| r.language == LanguageTag::En)
        .map(|(i, _)| i)
        .collect();
    plan_from_pool(train, &pool, targets, quota, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Label, PathSeparator};
    use proptest::prelude::*;

    fn path(s: &str) -> CategoryPath {
        CategoryPath::parse(s, PathSeparator::Angle).unwrap()
    }

    fn qc_pool(n: usize, positives: usize, p: &str) -> Vec<QCRecord> {
        (0..n)
            .map(|i| {
                let label = if i < positives {
                    Label::Positive
                } else {
                    Label::Negative
                };
                QCRecord::new(format!("q{i}"), LanguageTag::ALL[i % 3 + 2], path(p), label).unwrap()
            })
            .collect()
    }

    fn qi(n: usize, lang: LanguageTag) -> Vec<QIRecord> {
        (0..n)
            .map(|i| {
                QIRecord::new(format!("q{i}"), lang, format!("i{i}"), "t", Label::Positive).unwrap()
            })
            .collect()
    }

    #[test]
    fn pool_smaller_than_quota() {
        let train = qc_pool(100, 60, "A > B");
        let dev: HashSet<_> = [path("A > B")].into();
        let plan = plan_qc_augmentation(
            &train,
            &dev,
            &LanguageTag::QC_AUGMENT_TARGETS,
            QC_DEFAULT_QUOTA,
            1,
        )
        .unwrap();
        assert_eq!(plan.languages.len(), 4);
        for l in &plan.languages {
            assert_eq!(l.sources.len(), 100);
        }
    }

    #[test]
    fn disjoint_dev_paths() {
        let train = qc_pool(10, 5, "A > B");
        let dev: HashSet<_> = [path("X > Y")].into();
        assert!(matches!(
            plan_qc_augmentation(&train, &dev, &[LanguageTag::De], 10, 1),
            Err(AugmentError::EmptyEligiblePool)
        ));
    }

    #[test]
    fn only_dev_paths_are_eligible() {
        let mut train = qc_pool(10, 5, "A > B");
        train.extend(qc_pool(10, 5, "C > D"));
        let dev: HashSet<_> = [path("C > D")].into();
        let plan = plan_qc_augmentation(&train, &dev, &[LanguageTag::Pl], 100, 1).unwrap();
        assert_eq!(plan.languages[0].sources, (10..20).collect::<Vec<_>>());
    }

    #[test]
    fn label_mix_is_proportional() {
        let train = qc_pool(100, 70, "A > B");
        let dev: HashSet<_> = [path("A > B")].into();
        let plan =
            plan_qc_augmentation(&train, &dev, &LanguageTag::QC_AUGMENT_TARGETS, 10, 9).unwrap();
        for l in &plan.languages {
            let pos = l
                .sources
                .iter()
                .filter(|&&i| train[i].label.is_positive())
                .count();
            assert_eq!(pos, 7);
            assert_eq!(l.sources.len(), 10);
        }
    }

    #[test]
    fn qi_requires_english() {
        assert!(matches!(
            plan_qi_augmentation(
                &qi(5, LanguageTag::Ja),
                &LanguageTag::QI_AUGMENT_TARGETS,
                10,
                1
            ),
            Err(AugmentError::EmptyEligiblePool)
        ));
    }

    #[test]
    fn qi_quota_caps_plan() {
        let plan = plan_qi_augmentation(
            &qi(60_000, LanguageTag::En),
            &LanguageTag::QI_AUGMENT_TARGETS,
            QI_DEFAULT_QUOTA,
            4,
        )
        .unwrap();
        assert!(plan.languages.iter().all(|l| l.sources.len() == 50_000));
    }

    #[test]
    fn qi_small_pool_all_targets() {
        let mut train = qi(10, LanguageTag::En);
        train.extend(qi(7, LanguageTag::Th));
        let plan =
            plan_qi_augmentation(&train, &LanguageTag::QI_AUGMENT_TARGETS, 50_000, 4).unwrap();
        assert_eq!(plan.total(), 60);
        assert!(plan
            .languages
            .iter()
            .flat_map(|l| &l.sources)
            .all(|&i| train[i].language == LanguageTag::En));
    }

    #[test]
    fn plan_is_seed_deterministic() {
        let train = qc_pool(500, 200, "A > B");
        let dev: HashSet<_> = [path("A > B")].into();
        let a =
            plan_qc_augmentation(&train, &dev, &[LanguageTag::De, LanguageTag::It], 50, 3).unwrap();
        let b =
            plan_qc_augmentation(&train, &dev, &[LanguageTag::De, LanguageTag::It], 50, 3).unwrap();
        let c =
            plan_qc_augmentation(&train, &dev, &[LanguageTag::De, LanguageTag::It], 50, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        // A target's sample does not depend on which other targets are planned.
        let solo = plan_qc_augmentation(&train, &dev, &[LanguageTag::It], 50, 3).unwrap();
        assert_eq!(solo.languages[0], a.languages[1]);
    }

    #[test]
    fn duplicate_target_rejected() {
        let train = qc_pool(5, 2, "A");
        let dev: HashSet<_> = [path("A")].into();
        assert!(
            plan_qc_augmentation(&train, &dev, &[LanguageTag::De, LanguageTag::De], 5, 1).is_err()
        );
    }

    proptest! {
        #[test]
        fn allocation_within_one_per_stratum(n in 0usize..500, a in 0usize..300, b in 0usize..300) {
            let alloc = proportional_allocation(n, &[a, b]);
            let total = a + b;
            prop_assert_eq!(alloc.iter().sum::<usize>(), n.min(total));
            if total > 0 {
                let take = n.min(total) as f64;
                for (k, s) in alloc.iter().zip([a, b]) {
                    let ideal = take * s as f64 / total as f64;
                    prop_assert!((*k as f64 - ideal).abs() <= 1.0);
                    prop_assert!(*k <= s);
                }
            }
        }

        #[test]
        fn no_source_planned_twice(n in 1usize..200, quota in 0usize..250, seed in any::<u64>()) {
            let train = qc_pool(n, n / 3, "A");
            let dev: HashSet<_> = [path("A")].into();
            let plan = plan_qc_augmentation(&train, &dev, &[LanguageTag::Ar], quota, seed).unwrap();
            let l = &plan.languages[0];
            prop_assert_eq!(l.sources.len(), quota.min(l.eligible));
            let unique: HashSet<_> = l.sources.iter().collect();
            prop_assert_eq!(unique.len(), l.sources.len());
        }
    }
}
