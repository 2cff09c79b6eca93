//! Builds the trie of one group from signature frequencies, packs its leaves
//! into partitions and routes a query down to the node it stops at.
//!
//! ```text
//! cargo run --example trie_partitioning
//! ```

use std::collections::BTreeMap;

use climber::build::{pack_leaves, BuildConfig, Centroid, IndexSkeleton, TrieNode};
use climber::query::route_knn;
use climber::signature::{P4Signature, PivotId};

fn print_node(path: &[PivotId], node: &TrieNode) {
    let indent = "  ".repeat(path.len());
    let parts: Vec<_> = node.partitions.iter().collect();
    println!("{indent}{path:?} size {} partitions {parts:?}", node.size);
    for (pivot, child) in &node.children {
        let mut next = path.to_vec();
        next.push(*pivot);
        print_node(&next, child);
    }
}

fn main() -> climber::Result<()> {
    let members = vec![
        (vec![6, 4, 7], 2800),
        (vec![6, 7, 4], 500),
        (vec![6, 1, 4], 400),
        (vec![4, 6, 7], 900),
        (vec![5, 6, 4], 400),
        (vec![1, 6, 7], 250),
    ];
    let cfg = BuildConfig {
        segments: 1,
        pivots: 8,
        prefix_len: 3,
        capacity: 3000,
        alpha: 1.0,
        ..BuildConfig::default()
    };
    let centroids = vec![Centroid { group_id: 3, signature: vec![4, 6, 7] }, Centroid::fallback()];
    let sk = IndexSkeleton::assemble(cfg, 4, centroids, BTreeMap::from([(3, members)]))?;
    print_node(&[], &sk.tries[&3]);
    for p in sk.partitions_of(3) {
        println!("partition {} holds about {} records", p.id, p.estimated_size);
    }

    let query = P4Signature::from_rank_sensitive(vec![6, 2, 7])?;
    let plan = route_knn(&query, &sk)?;
    let node = &plan.nodes[0];
    println!(
        "query {:?} stops at {:?} (size {}), reads partitions {:?}",
        query.rank_sensitive,
        node.path,
        node.size,
        plan.partitions()
    );

    let leaves: Vec<(Vec<PivotId>, u64)> = [7, 5, 5, 4, 3, 2].iter().enumerate().map(|(i, s)| (vec![i as PivotId], *s)).collect();
    let packing = pack_leaves(&leaves, 10);
    println!("first-fit decreasing of {:?} into bins of 10: loads {:?}", leaves.iter().map(|l| l.1).collect::<Vec<_>>(), packing.loads);
    Ok(())
}
