use super::*;
use crate::build::fixtures::trie_group_skeleton;
use crate::build::{build_skeleton, BuildConfig, Centroid, FALLBACK_GROUP};
use crate::series::{euclidean_distance, Dataset};
use crate::signature::P4Signature;
use crate::storage::{read_dataset_file, redistribute, write_dataset};

fn sig(ids: &[PivotId]) -> P4Signature {
    P4Signature::from_rank_sensitive(ids.to_vec()).unwrap()
}

#[test]
fn knn_stops_at_internal_node() {
    let sk = trie_group_skeleton();
    let plan = route_knn(&sig(&[6, 2, 7]), &sk).unwrap();
    assert_eq!(plan.groups, vec![3]);
    assert_eq!(plan.nodes.len(), 1);
    let node = &plan.nodes[0];
    assert_eq!((node.path.clone(), node.size, node.is_leaf), (vec![6], 3700, false));
    let g3: BTreeSet<PartitionId> = sk.partitions_of(3).map(|p| p.id).collect();
    assert_eq!(plan.partitions(), g3);
    assert!(plan.base.iter().all(|t| t.path == vec![6]));
}

#[test]
fn od_smallest_covers_the_group() {
    let sk = trie_group_skeleton();
    let s = sig(&[6, 2, 7]);
    let od = route_od_smallest(&s, &sk).unwrap();
    let knn = route_knn(&s, &sk).unwrap();
    assert_eq!(od.groups, vec![3]);
    assert!(od.partitions().is_superset(&knn.partitions()));
    assert_eq!(od.full.len(), 2);
}

#[test]
fn adaptive_matches_knn_when_node_is_large_enough() {
    let sk = trie_group_skeleton();
    let s = sig(&[6, 2, 7]);
    let knn = route_knn(&s, &sk).unwrap();
    assert_eq!(route_adaptive(&s, &sk, 3700, 4).unwrap(), knn);
    assert_eq!(route_adaptive(&s, &sk, 500, 2).unwrap(), knn);
}

#[test]
fn adaptive_climbs_when_node_is_small() {
    let sk = trie_group_skeleton();
    // walk ends at leaf 4 (size 900)
    let s = sig(&[4, 6, 7]);
    let knn = route_knn(&s, &sk).unwrap();
    assert_eq!(knn.nodes[0].size, 900);
    let plan = route_adaptive(&s, &sk, 2000, 4).unwrap();
    assert_eq!(plan.nodes.len(), 2);
    assert_eq!(plan.nodes[1].path, Vec::<PivotId>::new());
    assert_eq!(plan.nodes[1].size, 5250);
    assert!(plan.partitions().len() <= 4 * knn.partitions().len());
    // a cap of one base partition forbids the root, which spans two
    let capped = route_adaptive(&s, &sk, 2000, 1).unwrap();
    assert_eq!(capped, knn);
}

#[test]
fn zero_overlap_lands_in_fallback() {
    let sk = trie_group_skeleton();
    let plan = route_knn(&sig(&[1, 2, 3]), &sk).unwrap();
    assert_eq!(plan.groups, vec![FALLBACK_GROUP]);
    let fallback: BTreeSet<PartitionId> = sk.partitions_of(FALLBACK_GROUP).map(|p| p.id).collect();
    assert_eq!(plan.partitions(), fallback);
}

#[test]
fn empty_skeleton_is_an_error() {
    let mut sk = trie_group_skeleton();
    sk.partitions.clear();
    assert!(matches!(route_knn(&sig(&[6, 2, 7]), &sk), Err(Error::Query(_))));
    sk = trie_group_skeleton();
    sk.tries.clear();
    assert!(matches!(route_od_smallest(&sig(&[6, 2, 7]), &sk), Err(Error::Query(_))));
}

#[test]
fn tied_groups_are_unioned() {
    let mut sk = trie_group_skeleton();
    // a second group with the same centroid ties on both distances
    sk.centroids.push(Centroid { group_id: 4, signature: vec![4, 6, 7] });
    sk.tries.insert(4, crate::build::TrieNode::leaf(None, 10));
    sk.tries.get_mut(&4).unwrap().partitions.insert(3);
    sk.default_partitions.insert(4, 3);
    sk.partitions.push(crate::build::PartitionInfo { id: 3, group: 4, estimated_size: 10 });
    let plan = route_od_smallest(&sig(&[6, 2, 7]), &sk).unwrap();
    assert_eq!(plan.groups, vec![3, 4]);
    assert_eq!(plan.partitions().len(), 3);
    let knn = route_knn(&sig(&[6, 2, 7]), &sk).unwrap();
    assert_eq!(route_knn(&sig(&[6, 2, 7]), &sk).unwrap(), knn);
    assert!(plan.partitions().is_superset(&knn.partitions()));
}

#[test]
fn mode_names_round_trip() {
    for mode in QueryMode::chain() {
        assert_eq!(mode.to_string().parse::<QueryMode>().unwrap(), mode);
    }
    assert_eq!("adaptive4x".parse::<QueryMode>().unwrap(), QueryMode::ADAPTIVE_4X);
    assert_eq!("od_smallest".parse::<QueryMode>().unwrap(), QueryMode::OdSmallest);
    assert_eq!(QueryMode::default(), QueryMode::ADAPTIVE_4X);
    for bad in ["", "adaptive", "adaptive0x", "exact"] {
        assert!(bad.parse::<QueryMode>().is_err(), "{bad}");
    }
}

#[test]
fn top_k_breaks_ties_by_id() {
    let got = top_k(vec![(4.0, 9), (1.0, 5), (4.0, 2), (0.0, 7), (4.0, 3)], 3);
    let ids: Vec<RecordId> = got.iter().map(|n| n.id).collect();
    assert_eq!(ids, vec![7, 5, 2]);
    assert_eq!(got[2].distance, 2.0);
    assert_eq!(top_k(vec![(1.0, 1)], 5).len(), 1);
}

struct Toy {
    _dir: tempfile::TempDir,
    data: Vec<DataSeries>,
    pivots: PivotSet,
    skeleton: IndexSkeleton,
    store: PartitionStore,
}

fn toy(count: u64, len: usize, capacity: u64) -> Toy {
    let data: Vec<DataSeries> = (0..count)
        .map(|i| {
            let values = (0..len)
                .map(|j| ((i * 31 + j as u64 * 17) % 23) as f64 - 11.0 + (i % 3) as f64 * 0.25 + i as f64 * 1e-3)
                .collect();
            DataSeries::new(i, values).unwrap()
        })
        .collect();
    let cfg = BuildConfig {
        segments: 4,
        pivots: 8,
        prefix_len: 3,
        capacity,
        alpha: 1.0,
        ..BuildConfig::default()
    };
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("data.clbd");
    write_dataset(&input, &data).unwrap();
    // queries and answers use the stored 32-bit values
    let data = read_dataset_file(&input).unwrap();
    let (pivots, skeleton) = build_skeleton(&Dataset::new(data.clone()).unwrap(), &cfg).unwrap();
    let out = dir.path().join("index");
    redistribute(&[input], &pivots, &skeleton, &out).unwrap();
    let store = PartitionStore::new(&out, &skeleton);
    Toy { _dir: dir, data, pivots, skeleton, store }
}

fn brute_force(data: &[DataSeries], q: &[f64], k: usize) -> Vec<RecordId> {
    let mut all: Vec<(f64, RecordId)> = data
        .iter()
        .map(|r| (euclidean_distance(q, r.values()).unwrap(), r.id))
        .collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    all.into_iter().take(k).map(|p| p.1).collect()
}

#[test]
fn toy_index_matches_brute_force() {
    let t = toy(20, 8, 6);
    for q in &t.data {
        let spec = QuerySpec::new(q.clone(), 5, QueryMode::Scan).unwrap();
        let exact = scan_exact(&spec, &t.store).unwrap();
        assert_eq!(exact.ids(), brute_force(&t.data, q.values(), 5));
        let all = execute(&RoutingPlan::all_partitions(&t.skeleton), &spec, &t.store).unwrap();
        assert_eq!(all, QueryResult { elapsed_secs: all.elapsed_secs, ..exact.clone() });
        assert_eq!(exact.records_examined, 20);

        let knn_spec = QuerySpec { mode: QueryMode::Knn, ..spec.clone() };
        let plan = plan(&knn_spec, &t.skeleton, &t.pivots).unwrap();
        let got = execute(&plan, &knn_spec, &t.store).unwrap();
        let truth = brute_force(&t.data, q.values(), 5);
        if got.records_examined == 20 {
            assert_eq!(got.ids(), truth);
        }
        // an approximate answer is never closer than the exact one, rank by rank
        for (a, e) in got.neighbors.iter().zip(&exact.neighbors) {
            assert!(a.distance >= e.distance);
        }
        assert_eq!(got.neighbors.len() as u64, got.records_examined.min(5));
    }
}

#[test]
fn every_mode_finds_the_query_itself() {
    let t = toy(120, 16, 10);
    for q in t.data.iter().step_by(7) {
        for mode in QueryMode::chain() {
            let spec = QuerySpec::new(q.clone(), 3, mode).unwrap();
            let plan = plan(&spec, &t.skeleton, &t.pivots).unwrap();
            let res = execute(&plan, &spec, &t.store).unwrap();
            assert_eq!(res.neighbors[0].id, q.id, "{mode}");
            assert_eq!(res.neighbors[0].distance, 0.0);
        }
    }
}

#[test]
fn candidate_counts_grow_along_the_chain() {
    let t = toy(120, 16, 10);
    for q in t.data.iter().step_by(5) {
        let mut last = 0;
        for mode in QueryMode::chain() {
            let spec = QuerySpec::new(q.clone(), 20, mode).unwrap();
            let res = execute(&plan(&spec, &t.skeleton, &t.pivots).unwrap(), &spec, &t.store).unwrap();
            assert!(res.records_examined >= last, "{mode}");
            last = res.records_examined;
        }
        assert_eq!(last, 120);
    }
}

#[test]
fn cached_store_agrees_with_disk() {
    let t = toy(60, 8, 8);
    let cached = PartitionStore::new(t.store.dir(), &t.skeleton).cached();
    for q in t.data.iter().take(10) {
        for mode in QueryMode::chain() {
            let spec = QuerySpec::new(q.clone(), 7, mode).unwrap();
            let p = plan(&spec, &t.skeleton, &t.pivots).unwrap();
            let a = execute(&p, &spec, &t.store).unwrap();
            let b = execute(&p, &spec, &cached).unwrap();
            assert_eq!(a.neighbors, b.neighbors);
            assert_eq!(a.records_examined, b.records_examined);
        }
    }
}

#[test]
fn bad_queries_are_rejected() {
    let t = toy(20, 8, 6);
    let short = DataSeries::new(0, vec![1.0; 4]).unwrap();
    let spec = QuerySpec { series: short, k: 3, mode: QueryMode::Knn };
    assert!(matches!(plan(&spec, &t.skeleton, &t.pivots), Err(Error::Query(_))));
    assert!(QuerySpec::new(t.data[0].clone(), 0, QueryMode::Knn).is_err());
    std::fs::remove_dir_all(t.store.dir()).unwrap();
    let spec = QuerySpec::new(t.data[0].clone(), 3, QueryMode::Scan).unwrap();
    assert!(matches!(scan_exact(&spec, &t.store), Err(Error::Io { .. })));
}
