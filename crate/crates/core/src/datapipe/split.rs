use alloc::format;
use alloc::vec::Vec;

use super::types::QAExample;
use crate::{Error, Result};

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn check_frac(train_frac: f64) -> Result<()> {
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(Error::Config(format!("train fraction must be in (0, 1), got {train_frac}")));
    }
    Ok(())
}

/// Whether every example of `listing_id` belongs to the training side.
pub fn listing_in_train(listing_id: &str, train_frac: f64, seed: u64) -> Result<bool> {
    check_frac(train_frac)?;
    let h = splitmix(fnv1a(listing_id.as_bytes()) ^ splitmix(seed));
    let u = (h >> 11) as f64 / (1u64 << 53) as f64;
    Ok(u < train_frac)
}

/// Split examples into (train, test) by listing, keeping input order.
pub fn split(examples: Vec<QAExample>, train_frac: f64, seed: u64) -> Result<(Vec<QAExample>, Vec<QAExample>)> {
    check_frac(train_frac)?;
    let mut train = Vec::new();
    let mut test = Vec::new();
    for ex in examples {
        if listing_in_train(&ex.listing_id, train_frac, seed)? {
            train.push(ex);
        } else {
            test.push(ex);
        }
    }
    Ok((train, test))
}
