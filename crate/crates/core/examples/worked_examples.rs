//! Dual signatures, overlap and weight distance, and group assignment on a
//! handful of hand-sized signatures.
//!
//! ```text
//! cargo run --example worked_examples
//! ```

use climber::build::{assign_group, Centroid, TieBreaker};
use climber::signature::{overlap_distance, pivot_weights, total_weight, weight_distance, Decay, P4Signature};

fn main() -> climber::Result<()> {
    let decay = Decay::Exponential { lambda: 0.5 };
    let weights = pivot_weights(3, &decay)?;
    println!("weights {weights:?}, total {}", total_weight(3, &decay)?);

    let centroids = vec![
        Centroid { group_id: 1, signature: vec![1, 2, 3] },
        Centroid { group_id: 2, signature: vec![2, 4, 5] },
        Centroid::fallback(),
    ];
    let ties = TieBreaker::new(42);
    for ids in [[3, 4, 1], [4, 2, 1], [6, 2, 7], [8, 9, 10]] {
        let sig = P4Signature::from_rank_sensitive(ids.to_vec())?;
        print!("{:?} (sorted {:?}):", sig.rank_sensitive, sig.rank_insensitive);
        for c in &centroids[..2] {
            let od = overlap_distance(&sig.rank_insensitive, &c.signature)?;
            let wd = weight_distance(&sig.rank_sensitive, &c.signature, &decay)?;
            print!("  G{} OD {od} WD {wd:.2}", c.group_id);
        }
        println!("  -> group {}", assign_group(&sig, &centroids, &weights, &ties));
    }

    let sig = P4Signature::from_rank_sensitive(vec![6, 2, 7])?;
    let picks: Vec<u32> = (0..10)
        .map(|seed| assign_group(&sig, &centroids, &weights, &TieBreaker::new(seed)))
        .collect();
    println!("full tie resolved per build seed: {picks:?}");
    Ok(())
}
