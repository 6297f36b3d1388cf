//! On-disk store of computed estimates under `LFPP_CACHE`.
//!
//! Entries are keyed by the SHA-256 of a canonical JSON object (sorted keys, floats written as
//! their bit patterns), so a one-ulp change in any parameter is a different key. Each artifact
//! starts with magic `LFPC`, a `u16` version, a kind tag and the payload length; anything that
//! fails to verify is evicted and treated as a miss.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliResult;
use crate::output::{write_atomic, write_json};

const MAGIC: &[u8; 4] = b"LFPC";
const VERSION: u16 = 1;
const KIND_LEN: usize = 16;
const HEADER_LEN: usize = 4 + 2 + KIND_LEN + 8;
const INDEX: &str = "index.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: String,
    pub kind: String,
    pub path: PathBuf,
    pub created: String,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct CacheIndex {
    pub root: PathBuf,
    pub entries: Vec<CacheEntry>,
}

pub struct DiskCache {
    root: PathBuf,
}

/// Canonical key material: floats by bits, everything else as JSON.
#[derive(Default)]
pub struct KeyMaterial(BTreeMap<String, Value>);

impl KeyMaterial {
    pub fn new(op: &str) -> Self {
        let mut m = Self::default();
        m.0.insert("op".into(), Value::from(op));
        m
    }

    pub fn float(mut self, name: &str, v: f64) -> Self {
        self.0.insert(name.into(), Value::from(format!("{:016x}", v.to_bits())));
        self
    }

    pub fn value(mut self, name: &str, v: impl Into<Value>) -> Self {
        self.0.insert(name.into(), v.into());
        self
    }

    pub fn digest(&self) -> String {
        let canon = serde_json::to_string(&self.0).expect("serializable");
        hex::encode(Sha256::digest(canon.as_bytes()))
    }
}

impl DiskCache {
    pub fn from_env() -> CliResult<Self> {
        let root = match std::env::var_os("LFPP_CACHE") {
            Some(p) => PathBuf::from(p),
            None => std::env::var_os("HOME")
                .map(|h| PathBuf::from(h).join(".cache").join("lfpp"))
                .unwrap_or_else(|| std::env::temp_dir().join("lfpp-cache")),
        };
        Self::open(root)
    }

    pub fn open(root: PathBuf) -> CliResult<Self> {
        std::fs::create_dir_all(&root)?;
        Ok(Self { root })
    }

    pub fn index(&self) -> CacheIndex {
        let entries = std::fs::read(self.root.join(INDEX))
            .ok()
            .and_then(|b| serde_json::from_slice::<CacheIndex>(&b).ok())
            .map(|i| i.entries)
            .unwrap_or_default();
        CacheIndex { root: self.root.clone(), entries }
    }

    fn save_index(&self, index: &CacheIndex) -> CliResult<()> {
        write_json(&self.root.join(INDEX), index)
    }

    fn artifact(&self, key: &str) -> PathBuf {
        self.root.join(format!("{key}.lfpc"))
    }

    pub fn lookup<T: DeserializeOwned>(&self, key: &str, kind: &str) -> Option<T> {
        let index = self.index();
        let entry = index.entries.iter().find(|e| e.key == key && e.kind == kind)?;
        let path = self.root.join(&entry.path);
        match std::fs::read(&path).map_err(|e| e.to_string()).and_then(|b| decode(&b, kind)) {
            Ok(v) => Some(v),
            Err(why) => {
                log::warn!("evicting cache entry {key}: {why}");
                self.evict(key);
                None
            }
        }
    }

    pub fn store<T: Serialize>(&self, key: &str, kind: &str, value: &T) -> CliResult<()> {
        let path = self.artifact(key);
        write_atomic(&path, &encode(kind, value))?;
        let mut index = self.index();
        index.entries.retain(|e| e.key != key);
        index.entries.push(CacheEntry {
            key: key.to_string(),
            kind: kind.to_string(),
            path: PathBuf::from(path.file_name().expect("file name")),
            created: chrono::Utc::now().to_rfc3339(),
        });
        self.save_index(&index)
    }

    fn evict(&self, key: &str) {
        let _ = std::fs::remove_file(self.artifact(key));
        let mut index = self.index();
        index.entries.retain(|e| e.key != key);
        if let Err(e) = self.save_index(&index) {
            log::warn!("could not rewrite cache index: {e}");
        }
    }
}

fn kind_tag(kind: &str) -> [u8; KIND_LEN] {
    let mut tag = [0u8; KIND_LEN];
    let b = kind.as_bytes();
    tag[..b.len().min(KIND_LEN)].copy_from_slice(&b[..b.len().min(KIND_LEN)]);
    tag
}

fn encode<T: Serialize>(kind: &str, value: &T) -> Vec<u8> {
    let payload = serde_json::to_vec(value).expect("serializable");
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&kind_tag(kind));
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(&payload);
    out
}

fn decode<T: DeserializeOwned>(bytes: &[u8], kind: &str) -> Result<T, String> {
    if bytes.len() < HEADER_LEN {
        return Err("truncated header".into());
    }
    if &bytes[..4] != MAGIC {
        return Err("bad magic".into());
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(format!("unsupported version {version}"));
    }
    if bytes[6..6 + KIND_LEN] != kind_tag(kind) {
        return Err("artifact kind mismatch".into());
    }
    let len = u64::from_le_bytes(bytes[6 + KIND_LEN..HEADER_LEN].try_into().expect("8 bytes")) as usize;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != len {
        return Err(format!("payload is {} bytes, header says {len}", payload.len()));
    }
    serde_json::from_slice(payload).map_err(|e| e.to_string())
}
