#![allow(dead_code)]

use num_bigint::BigUint;
use zkqr::GroupParams;

/// 256-bit safe prime found with an independent search (sympy), generator 2.
pub const P256: &str =
    "93145182505855788001869801280516486772103946289849851251601653900116435411219";

pub fn params_256() -> GroupParams {
    GroupParams::new(P256.parse().unwrap(), BigUint::from(2u32)).unwrap()
}

pub fn toy() -> GroupParams {
    GroupParams::new(BigUint::from(23u32), BigUint::from(5u32)).unwrap()
}

pub fn big(v: u64) -> BigUint {
    BigUint::from(v)
}
