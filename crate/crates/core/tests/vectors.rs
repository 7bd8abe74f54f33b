//! Fixed vectors in `testdata/vectors.json`, produced by a separate
//! implementation of the serialization, hashing and reward arithmetic.

use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::BigRational;
use serde_json::Value;

use strongchain::analytics::weak_count_tail;
use strongchain::consensus::merkle::merkle_root_of_transactions;
use strongchain::consensus::reward::exact_minted;
use strongchain::consensus::{
    binding_transaction, commitment_digest, Address, BlockHeader, CompressedWeakHeader, Hash256,
    ProtocolParams, RewardSchedule, Target,
};

fn vectors() -> Value {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../testdata/vectors.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn hash(v: &Value) -> Hash256 {
    Hash256::from_hex(v.as_str().unwrap()).unwrap()
}

fn addr(v: &Value) -> Address {
    Address(
        hex::decode(v.as_str().unwrap())
            .unwrap()
            .try_into()
            .unwrap(),
    )
}

fn u32_of(v: &Value) -> u32 {
    v.as_u64().unwrap() as u32
}

fn header(v: &Value) -> BlockHeader {
    BlockHeader {
        version: u32_of(&v["version"]),
        prev_hash: hash(&v["prev_hash"]),
        tx_root: hash(&v["tx_root"]),
        timestamp: u32_of(&v["timestamp"]),
        target_bits: u32_of(&v["target_bits"]),
        nonce: u32_of(&v["nonce"]),
        coinbase: addr(&v["coinbase"]),
    }
}

fn rational(v: &Value) -> BigRational {
    BigRational::from_str(v.as_str().unwrap()).unwrap()
}

#[test]
fn header_bytes_and_hashes() {
    for v in vectors()["headers"].as_array().unwrap() {
        let h = header(v);
        assert_eq!(
            hex::encode(h.serialize()),
            v["serialized"].as_str().unwrap()
        );
        assert_eq!(
            hex::encode(h.compress().serialize()),
            v["compressed"].as_str().unwrap()
        );
        assert_eq!(h.hash(), hash(&v["hash"]));
    }
}

#[test]
fn binding_commitment_and_tx_root() {
    let all = vectors();
    let v = &all["binding"];
    let strong = header(&v["strong"]);
    let weak: Vec<CompressedWeakHeader> = v["weak"]
        .as_array()
        .unwrap()
        .iter()
        .map(|w| CompressedWeakHeader {
            tx_root: hash(&w["tx_root"]),
            timestamp: u32_of(&w["timestamp"]),
            nonce: u32_of(&w["nonce"]),
            coinbase: addr(&w["coinbase"]),
        })
        .collect();
    let c = commitment_digest(&weak, &strong);
    assert_eq!(c, hash(&v["commitment"]));
    assert_eq!(
        hex::encode(binding_transaction(&c)),
        v["binding_tx"].as_str().unwrap()
    );
    let txs: Vec<Vec<u8>> = v["transactions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| hex::decode(t.as_str().unwrap()).unwrap())
        .collect();
    assert_eq!(merkle_root_of_transactions(&txs), hash(&v["tx_root"]));
    assert_eq!(
        commitment_digest(&[], &strong),
        hash(&all["empty_weak_commitment"])
    );
}

#[test]
fn work_rewards_and_scaling_constant() {
    for v in vectors()["params"].as_array().unwrap() {
        let ratio = v["ratio"].as_u64().unwrap();
        let gamma = v["gamma"].as_u64().unwrap();
        let p = match v["kind"].as_str().unwrap() {
            "toy" => ProtocolParams::toy(u32_of(&v["strong_bits"]), ratio, gamma),
            _ => ProtocolParams::with_ratio(
                Target::pow2(224),
                Target::new(BigUint::from(0xffffu32) << 192u32),
                ratio,
                BigRational::from_integer(gamma.into()),
            ),
        };
        assert_eq!(p.strong_pow(), rational(&v["strong_pow"]));
        assert_eq!(p.weak_pow(), rational(&v["weak_pow"]));
        assert_eq!(p.scaling_constant(), rational(&v["scaling_constant"]));
        let s = RewardSchedule::new(&p);
        assert_eq!(s.strong, v["strong_reward"].as_u64().unwrap());
        assert_eq!(s.weak, v["weak_reward"].as_u64().unwrap());
        for (n, m) in v["minted"].as_object().unwrap() {
            let n: u64 = n.parse().unwrap();
            assert_eq!(s.minted(n), m.as_u64().unwrap());
            assert_eq!(
                exact_minted(n, &p),
                rational(&v["exact_minted"][n.to_string()])
            );
        }
    }
}

#[test]
fn compact_targets() {
    for v in vectors()["compact"].as_array().unwrap() {
        let t = BigUint::parse_bytes(&v["target"].as_str().unwrap().as_bytes()[2..], 16).unwrap();
        assert_eq!(Target::new(t).to_compact(), u32_of(&v["compact"]));
    }
}

#[test]
fn weak_count_tails() {
    for v in vectors()["weak_count_tail"].as_array().unwrap() {
        let got = weak_count_tail(v["ratio"].as_f64().unwrap(), v["n"].as_u64().unwrap());
        let want = v["tail"].as_f64().unwrap();
        assert!((got - want).abs() <= 1e-12 * want, "{got} vs {want}");
    }
}
