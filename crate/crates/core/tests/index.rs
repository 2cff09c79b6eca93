use std::path::PathBuf;

use climber::bench::{run_bench, BenchSpec, RandomWalk};
use climber::build::BuildConfig;
use climber::query::{QueryMode, QuerySpec};
use climber::storage::{list_dataset_files, read_dataset_file, PARTITION_EXTENSION};
use climber::ClimberIndex;

fn small_config() -> BuildConfig {
    BuildConfig {
        segments: 8,
        pivots: 30,
        prefix_len: 4,
        capacity: 150,
        alpha: 0.5,
        ..BuildConfig::default()
    }
}

fn dataset(dir: &std::path::Path, count: u64) -> Vec<PathBuf> {
    RandomWalk::new(count, 32, 11).write(&dir.join("data"), 250).unwrap()
}

fn partition_files(dir: &std::path::Path) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == PARTITION_EXTENSION))
        .collect();
    files.sort();
    files
}

#[test]
fn reopened_index_answers_identically() {
    let dir = tempfile::tempdir().unwrap();
    let files = dataset(dir.path(), 2000);
    let (built, _) = ClimberIndex::build(&files, &dir.path().join("index"), &small_config()).unwrap();
    let reopened = ClimberIndex::open(built.dir()).unwrap();
    assert_eq!(built.skeleton(), reopened.skeleton());
    assert_eq!(built.pivots(), reopened.pivots());

    let queries = read_dataset_file(&files[3]).unwrap();
    for q in queries.iter().take(20) {
        for mode in QueryMode::chain() {
            let spec = QuerySpec::new(q.clone(), 15, mode).unwrap();
            let a = built.query(&spec).unwrap();
            let b = reopened.query(&spec).unwrap();
            assert_eq!(a.neighbors, b.neighbors);
            assert_eq!(a.partitions_accessed, b.partitions_accessed);
        }
    }
}

#[test]
fn rebuild_replaces_old_partitions() {
    let dir = tempfile::tempdir().unwrap();
    let index_dir = dir.path().join("index");
    let files = dataset(dir.path(), 3000);
    let (first, _) = ClimberIndex::build(&files, &index_dir, &small_config()).unwrap();
    let before = partition_files(&index_dir).len();
    assert_eq!(before, first.skeleton().partition_count());

    let coarse = BuildConfig { capacity: 3000, ..small_config() };
    let (second, summary) = ClimberIndex::build(&files, &index_dir, &coarse).unwrap();
    assert!(second.skeleton().partition_count() < before);
    assert_eq!(partition_files(&index_dir).len(), second.skeleton().partition_count());
    assert_eq!(second.inspect().unwrap().records, 3000);
    assert_eq!(summary.stats.records, 3000);
}

#[test]
fn adaptive_never_loses_to_knn_in_candidates() {
    let dir = tempfile::tempdir().unwrap();
    let files = dataset(dir.path(), 4000);
    let (index, _) = ClimberIndex::build(&files, &dir.path().join("index"), &small_config()).unwrap();
    let probes = read_dataset_file(&files[0]).unwrap();
    for q in probes.iter().take(40) {
        let run = |mode| index.query(&QuerySpec::new(q.clone(), 200, mode).unwrap()).unwrap();
        let (knn, a2, a4, od) = (
            run(QueryMode::Knn),
            run(QueryMode::ADAPTIVE_2X),
            run(QueryMode::ADAPTIVE_4X),
            run(QueryMode::OdSmallest),
        );
        assert!(knn.records_examined <= a2.records_examined);
        assert!(a2.records_examined <= a4.records_examined);
        assert!(a4.records_examined <= od.records_examined);
        assert!(a4.partitions_accessed <= 4 * knn.partitions_accessed.max(1));
    }
}

#[test]
fn noisy_bench_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let files = dataset(dir.path(), 1500);
    let (index, _) = ClimberIndex::build(&files, &dir.path().join("index"), &small_config()).unwrap();
    let spec = BenchSpec {
        queries: 8,
        ks: vec![5, 25],
        noise: Some(0.3),
        ..BenchSpec::default()
    };
    let a = run_bench(&spec, &index, &files, None).unwrap();
    let b = run_bench(&spec, &index.cached(), &files, None).unwrap();
    assert_eq!(a.without_timings(), b.without_timings());
    assert!(a.chain_violations().is_empty());
    assert!(a.rows.iter().filter(|r| r.mode == QueryMode::Scan).all(|r| r.recall == 1.0));
    assert_eq!(list_dataset_files(&dir.path().join("data")).unwrap(), files);
}
