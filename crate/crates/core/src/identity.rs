//! Prover key pairs and the verifier-side registry of public keys.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::RwLock;

use num_bigint::BigUint;
use num_traits::One;
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{parse_decimal, random_in_range, GroupParams, ParamsDigest};

pub const MAX_KEY_ID_LEN: usize = 64;

/// Private key `x` with its public value `y = g^x mod p`.
#[derive(Clone)]
pub struct KeyPair {
    x: BigUint,
    y: BigUint,
    params_digest: ParamsDigest,
}

impl fmt::Debug for KeyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyPair")
            .field("x", &"<redacted>")
            .field("y", &self.y.to_str_radix(10))
            .field("params_digest", &self.params_digest)
            .finish()
    }
}

/// Draws `x` uniformly from `[1, p - 2]`.
pub fn keygen<R: RngCore + CryptoRng>(params: &GroupParams, rng: &mut R) -> Result<KeyPair> {
    let x = random_in_range(rng, &BigUint::one(), &(params.p() - 2u32))?;
    KeyPair::from_secret(params, x)
}

impl KeyPair {
    /// Rebuilds a key pair from a known secret. Accepts any `x < p - 1`,
    /// including 0, so fixtures can pin degenerate values.
    pub fn from_secret(params: &GroupParams, x: BigUint) -> Result<Self> {
        if x >= params.order() {
            return Err(Error::Parameter("private key must be below p - 1".into()));
        }
        let y = params.pow_g(&x);
        Ok(KeyPair {
            x,
            y,
            params_digest: params.digest(),
        })
    }

    pub fn secret(&self) -> &BigUint {
        &self.x
    }

    pub fn public(&self) -> &BigUint {
        &self.y
    }

    pub fn params_digest(&self) -> ParamsDigest {
        self.params_digest
    }

    pub fn public_key(&self) -> PublicKey {
        PublicKey {
            y: self.y.clone(),
            params_digest: self.params_digest,
        }
    }

    /// `{"x":"<decimal>","params_digest":"<hex>"}`.
    pub fn to_private_json(&self) -> Vec<u8> {
        let file = PrivateKeyFile {
            x: self.x.to_str_radix(10),
            params_digest: self.params_digest,
        };
        serde_json::to_vec(&file).expect("key serialize")
    }

    /// Loads a private key file and checks it belongs to `params`.
    pub fn from_private_json(bytes: &[u8], params: &GroupParams) -> Result<Self> {
        let file: PrivateKeyFile = serde_json::from_slice(bytes).map_err(Error::from_json)?;
        if file.params_digest != params.digest() {
            return Err(Error::ParamsMismatch(
                "private key was generated for different group parameters".into(),
            ));
        }
        let x = parse_decimal(&file.x, "x")?;
        Self::from_secret(params, x)
    }

    /// Writes the private key file, owner-readable only on unix.
    pub fn save_private(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_private_json(), true)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PrivateKeyFile {
    x: String,
    params_digest: ParamsDigest,
}

/// The registered half of a key pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey {
    pub y: BigUint,
    pub params_digest: ParamsDigest,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PublicKeyFile {
    y: String,
    params_digest: ParamsDigest,
}

impl PublicKey {
    /// `{"y":"<decimal>","params_digest":"<hex>"}`, the same shape as a registry entry.
    pub fn to_json(&self) -> Vec<u8> {
        serde_json::to_vec(&PublicKeyFile::from(self)).expect("public key serialize")
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let file: PublicKeyFile = serde_json::from_slice(bytes).map_err(Error::from_json)?;
        file.try_into()
    }
}

impl From<&PublicKey> for PublicKeyFile {
    fn from(key: &PublicKey) -> Self {
        PublicKeyFile {
            y: key.y.to_str_radix(10),
            params_digest: key.params_digest,
        }
    }
}

impl TryFrom<PublicKeyFile> for PublicKey {
    type Error = Error;

    fn try_from(file: PublicKeyFile) -> Result<Self> {
        Ok(PublicKey {
            y: parse_decimal(&file.y, "y")?,
            params_digest: file.params_digest,
        })
    }
}

pub fn validate_key_id(key_id: &str) -> Result<()> {
    if key_id.is_empty() {
        return Err(Error::InvalidKeyId("key id must not be empty".into()));
    }
    if key_id.chars().count() > MAX_KEY_ID_LEN {
        return Err(Error::InvalidKeyId(format!(
            "key id longer than {MAX_KEY_ID_LEN} characters"
        )));
    }
    Ok(())
}

/// Verifier-side map from key id to registered public key.
///
/// Registration is an atomic check-and-insert (and persist, when backed by a
/// file); lookups take a shared lock and may run concurrently.
#[derive(Debug, Default)]
pub struct KeyRegistry {
    entries: RwLock<BTreeMap<String, PublicKey>>,
    backing_path: Option<PathBuf>,
}

impl KeyRegistry {
    /// In-memory registry.
    pub fn new() -> Self {
        Self::default()
    }

    /// Opens a file-backed registry; a missing file starts empty.
    pub fn open(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let entries = match fs::read(&path) {
            Ok(bytes) => decode_registry(&bytes)?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => BTreeMap::new(),
            Err(e) => return Err(Error::storage(&path, e)),
        };
        Ok(KeyRegistry {
            entries: RwLock::new(entries),
            backing_path: Some(path),
        })
    }

    pub fn backing_path(&self) -> Option<&Path> {
        self.backing_path.as_deref()
    }

    pub fn register(&self, key_id: &str, y: BigUint, params_digest: ParamsDigest) -> Result<()> {
        validate_key_id(key_id)?;
        let mut entries = self.entries.write().expect("registry lock poisoned");
        if entries.contains_key(key_id) {
            return Err(Error::Conflict(key_id.to_string()));
        }
        entries.insert(key_id.to_string(), PublicKey { y, params_digest });
        if let Some(path) = &self.backing_path {
            if let Err(e) = write_atomic(path, &encode_registry(&entries), false) {
                entries.remove(key_id);
                return Err(e);
            }
        }
        Ok(())
    }

    pub fn lookup(&self, key_id: &str) -> Result<PublicKey> {
        self.entries
            .read()
            .expect("registry lock poisoned")
            .get(key_id)
            .cloned()
            .ok_or_else(|| Error::NotFound(key_id.to_string()))
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("registry lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Canonical file bytes (sorted keys, pretty-printed, trailing newline).
    pub fn to_json(&self) -> Vec<u8> {
        encode_registry(&self.entries.read().expect("registry lock poisoned"))
    }

    pub fn save(&self) -> Result<()> {
        match &self.backing_path {
            Some(path) => write_atomic(path, &self.to_json(), false),
            None => Ok(()),
        }
    }
}

/// Free-function form of [`KeyRegistry::register`].
pub fn register_key(
    registry: &KeyRegistry,
    key_id: &str,
    y: BigUint,
    params_digest: ParamsDigest,
) -> Result<()> {
    registry.register(key_id, y, params_digest)
}

/// Free-function form of [`KeyRegistry::lookup`].
pub fn lookup_key(registry: &KeyRegistry, key_id: &str) -> Result<PublicKey> {
    registry.lookup(key_id)
}

fn encode_registry(entries: &BTreeMap<String, PublicKey>) -> Vec<u8> {
    let files: BTreeMap<&str, PublicKeyFile> = entries
        .iter()
        .map(|(k, v)| (k.as_str(), PublicKeyFile::from(v)))
        .collect();
    let mut out = serde_json::to_vec_pretty(&files).expect("registry serialize");
    out.push(b'\n');
    out
}

fn decode_registry(bytes: &[u8]) -> Result<BTreeMap<String, PublicKey>> {
    let files: BTreeMap<String, PublicKeyFile> =
        serde_json::from_slice(bytes).map_err(Error::from_json)?;
    files
        .into_iter()
        .map(|(k, v)| {
            validate_key_id(&k)?;
            Ok((k, v.try_into()?))
        })
        .collect()
}

/// Writes to a sibling temp file, syncs, then renames over `path`.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8], private: bool) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let file_name = path
        .file_name()
        .ok_or_else(|| {
            Error::storage(
                path,
                std::io::Error::new(std::io::ErrorKind::InvalidInput, "path has no file name"),
            )
        })?
        .to_string_lossy()
        .into_owned();
    let tmp = dir.join(format!(".{file_name}.tmp{}", std::process::id()));

    let result = (|| -> std::io::Result<()> {
        let mut options = fs::OpenOptions::new();
        options.write(true).create(true).truncate(true);
        #[cfg(unix)]
        if private {
            use std::os::unix::fs::OpenOptionsExt;
            options.mode(0o600);
        }
        #[cfg(not(unix))]
        let _ = private;
        let mut file = options.open(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
        fs::rename(&tmp, path)
    })();

    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::storage(path, e)
    })
}
