//! Routing: from a query signature to the partitions and clusters to read.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::build::{match_groups, GroupId, IndexSkeleton, PartitionId, TrieNode};
use crate::error::{Error, Result};
use crate::signature::{P4Signature, PivotId};

/// A trie node selected for a query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchedNode {
    pub group: GroupId,
    pub path: Vec<PivotId>,
    pub size: u64,
    pub is_leaf: bool,
}

impl MatchedNode {
    pub fn path_len(&self) -> usize {
        self.path.len()
    }
}

/// Records stored under `path` (or below it) inside one partition.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClusterTarget {
    pub partition: PartitionId,
    pub path: Vec<PivotId>,
}

/// What a query reads.
///
/// `base` holds the clusters of the best matching node; when they hold fewer
/// than `k` records the whole base partitions are scanned instead. `extra`
/// holds clusters added by the adaptive strategy and `full` lists
/// partitions read entirely.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutingPlan {
    pub groups: Vec<GroupId>,
    pub nodes: Vec<MatchedNode>,
    pub base: Vec<ClusterTarget>,
    pub extra: Vec<ClusterTarget>,
    pub full: Vec<PartitionId>,
}

impl RoutingPlan {
    /// Distinct partitions touched by the plan.
    pub fn partitions(&self) -> BTreeSet<PartitionId> {
        self.base
            .iter()
            .chain(&self.extra)
            .map(|t| t.partition)
            .chain(self.full.iter().copied())
            .collect()
    }

    pub fn base_partitions(&self) -> BTreeSet<PartitionId> {
        self.base.iter().map(|t| t.partition).collect()
    }

    /// Plan reading every partition of `skeleton` in full.
    pub fn all_partitions(skeleton: &IndexSkeleton) -> Self {
        Self {
            groups: skeleton.centroids.iter().map(|c| c.group_id).collect(),
            full: skeleton.partitions.iter().map(|p| p.id).collect(),
            ..Self::default()
        }
    }
}

fn ensure_routable(skeleton: &IndexSkeleton) -> Result<()> {
    if skeleton.partitions.is_empty() || skeleton.tries.is_empty() {
        return Err(Error::Query("index skeleton is empty".into()));
    }
    Ok(())
}

/// Clusters holding the records of `node`. An internal node also covers the
/// group's default partition, which receives records whose walk stops there.
fn node_targets(skeleton: &IndexSkeleton, group: GroupId, path: &[PivotId], node: &TrieNode) -> Vec<ClusterTarget> {
    let mut parts = node.partitions.clone();
    if !node.is_leaf() {
        parts.insert(skeleton.default_partitions[&group]);
    }
    parts
        .into_iter()
        .map(|partition| ClusterTarget {
            partition,
            path: path.to_vec(),
        })
        .collect()
}

/// Best matching group and trie node for `sig`.
///
/// Groups are narrowed by overlap distance, then weight distance; a
/// remaining tie resolves with the same signature-keyed choice used when
/// records were stored. The group's trie is then followed as deep as the
/// rank-sensitive signature allows.
pub fn route_knn(sig: &P4Signature, skeleton: &IndexSkeleton) -> Result<RoutingPlan> {
    ensure_routable(skeleton)?;
    let weights = skeleton.weights();
    let matched = match_groups(sig, &skeleton.centroids, &weights);
    let group = match matched.best_weight.as_slice() {
        [only] => *only,
        tied => skeleton.tie_breaker().pick(&sig.rank_sensitive, tied),
    };
    let root = skeleton
        .tries
        .get(&group)
        .ok_or_else(|| Error::Query(format!("group {group} has no trie")))?;
    let (path, node) = root.walk(&sig.rank_sensitive);
    Ok(RoutingPlan {
        groups: vec![group],
        base: node_targets(skeleton, group, &path, node),
        nodes: vec![MatchedNode {
            group,
            size: node.size,
            is_leaf: node.is_leaf(),
            path,
        }],
        extra: Vec::new(),
        full: Vec::new(),
    })
}

/// Starts from [`route_knn`]; when the matched node is smaller than `k`,
/// adds further nodes along the query's walk in every smallest-overlap
/// group, deepest first then largest, until their combined size reaches `k`
/// or the next node would push the distinct partition count above
/// `multiplier` times the base count.
pub fn route_adaptive(
    sig: &P4Signature,
    skeleton: &IndexSkeleton,
    k: usize,
    multiplier: usize,
) -> Result<RoutingPlan> {
    let mut plan = route_knn(sig, skeleton)?;
    let base = plan.nodes[0].clone();
    if base.size >= k as u64 {
        return Ok(plan);
    }
    let cap = multiplier.max(1) * plan.base_partitions().len();
    let weights = skeleton.weights();
    let matched = match_groups(sig, &skeleton.centroids, &weights);

    let mut candidates: Vec<(usize, u64, GroupId, Vec<PivotId>, &TrieNode)> = Vec::new();
    for group in &matched.nearest {
        for (path, node) in skeleton.tries[group].walk_chain(&sig.rank_sensitive) {
            if *group == base.group && path == base.path {
                continue;
            }
            candidates.push((path.len(), node.size, *group, path, node));
        }
    }
    candidates.sort_by(|a, b| {
        b.0.cmp(&a.0)
            .then(b.1.cmp(&a.1))
            .then(a.2.cmp(&b.2))
    });

    // nodes of one group lie on one chain, so coverage is the largest chosen
    let mut covered: BTreeMap<GroupId, u64> = [(base.group, base.size)].into_iter().collect();
    let mut selected = plan.base_partitions();
    for (_, size, group, path, node) in candidates {
        if covered.values().sum::<u64>() >= k as u64 {
            break;
        }
        let targets = node_targets(skeleton, group, &path, node);
        let mut union = selected.clone();
        union.extend(targets.iter().map(|t| t.partition));
        if union.len() > cap {
            break;
        }
        selected = union;
        let entry = covered.entry(group).or_default();
        *entry = (*entry).max(size);
        if !plan.groups.contains(&group) {
            plan.groups.push(group);
        }
        plan.extra.extend(targets);
        plan.nodes.push(MatchedNode {
            group,
            size,
            is_leaf: node.is_leaf(),
            path,
        });
    }
    Ok(plan)
}

/// Every partition of every group at the smallest overlap distance.
pub fn route_od_smallest(sig: &P4Signature, skeleton: &IndexSkeleton) -> Result<RoutingPlan> {
    ensure_routable(skeleton)?;
    let weights = skeleton.weights();
    let matched = match_groups(sig, &skeleton.centroids, &weights);
    let full = skeleton
        .partitions
        .iter()
        .filter(|p| matched.nearest.contains(&p.group))
        .map(|p| p.id)
        .collect();
    Ok(RoutingPlan {
        groups: matched.nearest,
        full,
        ..RoutingPlan::default()
    })
}
