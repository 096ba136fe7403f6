use std::collections::BTreeMap;

use proptest::prelude::*;

use safeplan_core::curriculum::*;
use safeplan_core::DomainTag;

fn bw(id: &str, n: u32) -> ProblemMeta {
    ProblemMeta::new(id, SizeParams::Blocksworld { n }).unwrap()
}

#[test]
fn difficulty_formulas() {
    assert_eq!(
        difficulty_score(DomainTag::Blocksworld, &SizeParams::Blocksworld { n: 4 }).unwrap(),
        16
    );
    assert_eq!(
        difficulty_score(DomainTag::Ferry, &SizeParams::Ferry { l: 3, c: 2 }).unwrap(),
        6
    );
    assert_eq!(
        difficulty_score(
            DomainTag::Grippers,
            &SizeParams::Grippers { n: 1, r: 3, o: 3 }
        )
        .unwrap(),
        9
    );
    assert_eq!(
        difficulty_score(
            DomainTag::Spanner,
            &SizeParams::Spanner { s: 3, n: 2, l: 4 }
        )
        .unwrap(),
        24
    );
}

#[test]
fn difficulty_errors() {
    assert!(matches!(
        difficulty_score(DomainTag::Ferry, &SizeParams::Blocksworld { n: 3 }),
        Err(CurriculumError::DomainMismatch { .. })
    ));
    assert!(matches!(
        difficulty_score(DomainTag::Ferry, &SizeParams::Ferry { l: 0, c: 2 }),
        Err(CurriculumError::NonPositive { name: 'l' })
    ));
    let named: BTreeMap<char, u32> = [('l', 3)].into_iter().collect();
    assert!(matches!(
        SizeParams::from_named(DomainTag::Ferry, &named),
        Err(CurriculumError::MissingParameter { name: 'c', .. })
    ));
}

fn counts(pool: &[ProblemMeta]) -> [usize; 3] {
    let mut c = [0; 3];
    for p in pool {
        c[p.bucket.unwrap().index()] += 1;
    }
    c
}

#[test]
fn ten_distinct_values_split_4_4_2() {
    // Sorted d = 1,4,...,100. P40 has rank ceil(4.0) = 4 -> 16; P80 rank 8 -> 64.
    let mut pool: Vec<ProblemMeta> = (1..=10).map(|n| bw(&format!("p{n}"), n)).collect();
    bucketize(&mut pool);
    assert_eq!(counts(&pool), [4, 4, 2]);
    assert_eq!(pool[3].bucket, Some(Bucket::Easy));
    assert_eq!(pool[4].bucket, Some(Bucket::Medium));
    assert_eq!(pool[8].bucket, Some(Bucket::Hard));
}

#[test]
fn ties_fall_low_and_singletons_are_easy() {
    let mut pool: Vec<ProblemMeta> = (0..7).map(|i| bw(&format!("p{i}"), 4)).collect();
    bucketize(&mut pool);
    assert_eq!(counts(&pool), [7, 0, 0]);
    let mut one = vec![bw("only", 5)];
    bucketize(&mut one);
    assert_eq!(one[0].bucket, Some(Bucket::Easy));
}

#[test]
fn bucketing_is_per_domain() {
    let mut pool: Vec<ProblemMeta> = (3..=7).map(|n| bw(&format!("b{n}"), n)).collect();
    pool.push(ProblemMeta::new("f", SizeParams::Ferry { l: 4, c: 3 }).unwrap());
    bucketize(&mut pool);
    assert_eq!(pool.last().unwrap().bucket, Some(Bucket::Easy));
    assert_eq!(counts(&pool[..5]), [2, 2, 1]);
}

#[test]
fn phases() {
    let c = CurriculumConfig::default();
    assert_eq!(phase_of(0, 1000, &c).unwrap(), Phase::Early);
    assert_eq!(phase_of(299, 1000, &c).unwrap(), Phase::Early);
    assert_eq!(phase_of(300, 1000, &c).unwrap(), Phase::Mid);
    assert_eq!(phase_of(699, 1000, &c).unwrap(), Phase::Mid);
    assert_eq!(phase_of(700, 1000, &c).unwrap(), Phase::Late);
    assert_eq!(phase_of(999, 1000, &c).unwrap(), Phase::Late);
    assert!(phase_of(1000, 1000, &c).is_err());
    let mut prev = Phase::Early;
    for step in 0..1000 {
        let p = phase_of(step, 1000, &c).unwrap();
        assert!(
            Phase::ALL.iter().position(|x| *x == p) >= Phase::ALL.iter().position(|x| *x == prev)
        );
        prev = p;
    }
}

fn mixed_pool() -> Vec<ProblemMeta> {
    let mut pool = Vec::new();
    for i in 0..10u32 {
        pool.push(bw(&format!("bw{i}"), 3 + i % 4));
        pool.push(
            ProblemMeta::new(
                format!("fe{i}"),
                SizeParams::Ferry {
                    l: 3 + i % 2,
                    c: 2 + i % 3,
                },
            )
            .unwrap(),
        );
        pool.push(
            ProblemMeta::new(
                format!("gr{i}"),
                SizeParams::Grippers {
                    n: 1,
                    r: 3 + i % 2,
                    o: 3,
                },
            )
            .unwrap(),
        );
        pool.push(
            ProblemMeta::new(
                format!("sp{i}"),
                SizeParams::Spanner {
                    s: 2 + i % 2,
                    n: 2,
                    l: 3 + i % 3,
                },
            )
            .unwrap(),
        );
    }
    bucketize(&mut pool);
    pool
}

#[test]
fn batches_are_balanced_and_deterministic() {
    let c = CurriculumConfig::default();
    let pool = mixed_pool();
    let a = sample_batch(&pool, 10, 1000, &c, 7).unwrap();
    assert_eq!(a.items.len(), 8);
    for d in DomainTag::ALL {
        assert_eq!(a.items.iter().filter(|i| i.domain == d).count(), 2);
    }
    assert_eq!(a, sample_batch(&pool, 10, 1000, &c, 7).unwrap());
    assert_eq!(a.seed, 7);
    assert_eq!(a.phase, Phase::Early);
    let mut sampler = CurriculumSampler::new(c, 11).unwrap();
    for step in 0..200 {
        let b = sampler.sample(&pool, step, 200).unwrap();
        for d in DomainTag::ALL {
            assert_eq!(b.items.iter().filter(|i| i.domain == d).count(), 2);
        }
    }
}

#[test]
fn empty_bucket_falls_back() {
    // All-equal difficulties leave only the easy bucket populated.
    let mut pool: Vec<ProblemMeta> = (0..4).map(|i| bw(&format!("p{i}"), 3)).collect();
    bucketize(&mut pool);
    let c = CurriculumConfig {
        domains: vec![DomainTag::Blocksworld],
        batch_size: 64,
        ..Default::default()
    };
    let b = sample_batch(&pool, 900, 1000, &c, 3).unwrap();
    assert!(b.items.iter().all(|i| i.bucket == Bucket::Easy));
}

#[test]
fn sampling_errors() {
    let c = CurriculumConfig::default();
    let mut pool = mixed_pool();
    pool.retain(|p| p.domain != DomainTag::Spanner);
    assert_eq!(
        sample_batch(&pool, 0, 10, &c, 1),
        Err(CurriculumError::EmptyDomain(DomainTag::Spanner))
    );
    let raw = vec![bw("x", 3)];
    let one = CurriculumConfig {
        domains: vec![DomainTag::Blocksworld],
        batch_size: 1,
        ..Default::default()
    };
    assert!(matches!(
        sample_batch(&raw, 0, 10, &one, 1),
        Err(CurriculumError::NotBucketized(_))
    ));
}

#[test]
fn early_phase_frequencies() {
    let c = CurriculumConfig::default();
    let mut sampler = CurriculumSampler::new(c, 2024).unwrap();
    let mut hits = [0usize; 3];
    let n = 10_000;
    for _ in 0..n {
        hits[sampler.draw_bucket(Phase::Early).index()] += 1;
    }
    for (h, p) in hits.iter().zip([0.70, 0.25, 0.05]) {
        assert!((*h as f64 / n as f64 - p).abs() <= 0.02, "{hits:?}");
    }
}

#[test]
fn config_file() {
    let text =
        "batch_size = 4\ndomains = [\"ferry\", \"spanner\"]\n[phases]\nboundaries = [0.25, 0.75]\n\
                early = [1.0, 0.0, 0.0]\nmid = [0.5, 0.5, 0.0]\nlate = [0.0, 0.0, 1.0]\n";
    let c = load_curriculum_config(text).unwrap();
    assert_eq!(c.per_domain(), 2);
    assert_eq!(phase_of(25, 100, &c).unwrap(), Phase::Mid);
    assert_eq!(
        load_curriculum_config("").unwrap(),
        CurriculumConfig::default()
    );
    assert!(load_curriculum_config("batch_size = 6\n").is_err());
    assert!(load_curriculum_config("[phases]\nearly = [0.5, 0.4, 0.0]\n").is_err());
    assert!(load_curriculum_config("domains = []\n").is_err());
}

proptest! {
    #[test]
    fn every_problem_gets_one_bucket(ds in proptest::collection::vec(1u32..12, 1..60)) {
        let mut pool: Vec<ProblemMeta> = ds.iter().enumerate().map(|(i, n)| bw(&i.to_string(), *n)).collect();
        bucketize(&mut pool);
        let values: Vec<u64> = pool.iter().map(|p| p.difficulty).collect();
        let (p40, p80) = thresholds(&values);
        for p in &pool {
            let b = p.bucket.unwrap();
            prop_assert_eq!(b, bucket_for(p.difficulty, (p40, p80)));
        }
        // Bucket membership is monotone in difficulty.
        for a in &pool {
            for b in &pool {
                if a.difficulty < b.difficulty {
                    prop_assert!(a.bucket <= b.bucket);
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn distinct_values_split_by_rank(n in 1usize..80) {
        let mut pool: Vec<ProblemMeta> = (1..=n as u32).map(|k| bw(&k.to_string(), k)).collect();
        bucketize(&mut pool);
        // Independent rank arithmetic: ceil(0.4 n) easy and ceil(0.8 n) easy or medium.
        let easy = (2 * n + 4) / 5;
        let upto_medium = (4 * n + 4) / 5;
        prop_assert_eq!(counts(&pool), [easy, upto_medium - easy, n - upto_medium]);
    }
}
