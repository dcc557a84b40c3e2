//! Non-interactive Schnorr identification over a safe-prime group, with
//! proofs serialized to canonical JSON and carried in QR codes.
//!
//! Verification enforces a timestamp window and single-use nonces on top of
//! the Schnorr equation, so a copied QR code cannot be replayed.

pub mod error;
pub mod group;
pub mod identity;
pub mod attacksim;
pub mod bench;
pub mod cli;
pub mod codec;
pub mod protocol;

pub use codec::{decode_proof_json, encode_proof_json, qr_decode, qr_encode, EcLevel, QrPayload};
pub use error::{Error, Result};
pub use group::{generate_params, mod_exp, validate_params, GroupParams, ParamsDigest};
pub use identity::{keygen, KeyPair, KeyRegistry, PublicKey};
pub use protocol::{
    prove, verify, Clock, FreshnessPolicy, ManualClock, Nonce, NonceStore, Proof, RejectReason,
    SystemClock, VerifyDecision,
};
