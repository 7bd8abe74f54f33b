//! Bitcoin-style Merkle tree over transaction ids. An odd level duplicates its
//! last node.

use serde::{Deserialize, Serialize};

use super::hash::Hash256;

pub fn txid(tx: &[u8]) -> Hash256 {
    Hash256::digest(tx)
}

fn parent(left: &Hash256, right: &Hash256) -> Hash256 {
    let mut buf = [0u8; 64];
    buf[..32].copy_from_slice(&left.0);
    buf[32..].copy_from_slice(&right.0);
    Hash256::digest(&buf)
}

/// Root over `leaves`. The root of an empty list is the all-zero digest.
pub fn merkle_root(leaves: &[Hash256]) -> Hash256 {
    if leaves.is_empty() {
        return Hash256::ZERO;
    }
    let mut level = leaves.to_vec();
    while level.len() > 1 {
        level = next_level(&level);
    }
    level[0]
}

fn next_level(level: &[Hash256]) -> Vec<Hash256> {
    level
        .chunks(2)
        .map(|pair| match pair {
            [l, r] => parent(l, r),
            [l] => parent(l, l),
            _ => unreachable!(),
        })
        .collect()
}

pub fn merkle_root_of_transactions(txs: &[Vec<u8>]) -> Hash256 {
    let ids: Vec<Hash256> = txs.iter().map(|tx| txid(tx)).collect();
    merkle_root(&ids)
}

/// Inclusion proof: the sibling at each level from the leaf upwards.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MerkleProof {
    pub leaf_index: u32,
    pub siblings: Vec<Hash256>,
}

impl MerkleProof {
    pub fn build(leaves: &[Hash256], index: usize) -> Option<MerkleProof> {
        if index >= leaves.len() {
            return None;
        }
        let mut siblings = Vec::new();
        let mut level = leaves.to_vec();
        let mut i = index;
        while level.len() > 1 {
            let sib = if i.is_multiple_of(2) {
                *level.get(i + 1).unwrap_or(&level[i])
            } else {
                level[i - 1]
            };
            siblings.push(sib);
            level = next_level(&level);
            i /= 2;
        }
        Some(MerkleProof {
            leaf_index: index as u32,
            siblings,
        })
    }

    /// Root implied by `leaf` and this path.
    pub fn root_for(&self, leaf: &Hash256) -> Hash256 {
        let mut acc = *leaf;
        let mut i = self.leaf_index;
        for sib in &self.siblings {
            acc = if i.is_multiple_of(2) {
                parent(&acc, sib)
            } else {
                parent(sib, &acc)
            };
            i /= 2;
        }
        acc
    }

    pub fn verify(&self, leaf: &Hash256, root: &Hash256) -> bool {
        self.root_for(leaf) == *root
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaves(n: u32) -> Vec<Hash256> {
        (0..n).map(|i| Hash256::digest(&i.to_le_bytes())).collect()
    }

    #[test]
    fn single_leaf_root_is_leaf() {
        let l = leaves(1);
        assert_eq!(merkle_root(&l), l[0]);
        let proof = MerkleProof::build(&l, 0).unwrap();
        assert!(proof.siblings.is_empty());
        assert!(proof.verify(&l[0], &l[0]));
    }

    #[test]
    fn odd_level_duplicates_last() {
        let l = leaves(3);
        let expected = parent(&parent(&l[0], &l[1]), &parent(&l[2], &l[2]));
        assert_eq!(merkle_root(&l), expected);
    }

    #[test]
    fn every_proof_verifies() {
        for n in 1..=9 {
            let l = leaves(n);
            let root = merkle_root(&l);
            for i in 0..n as usize {
                let p = MerkleProof::build(&l, i).unwrap();
                assert!(p.verify(&l[i], &root), "n={n} i={i}");
                let other = Hash256::digest(b"not a leaf");
                assert!(!p.verify(&other, &root));
            }
        }
        assert!(MerkleProof::build(&leaves(2), 2).is_none());
    }
}
