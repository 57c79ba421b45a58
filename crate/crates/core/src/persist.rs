//! On-disk cache of graphs, complexes, verdicts and tessellation instances.
//!
//! Each file is a JSON `CacheEntry` whose payload is hashed (SHA-256 over its
//! compact JSON text, object keys sorted). Writes go to a temporary file in
//! the target directory and are renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::complex::VoronoiComplex;
use crate::error::{Error, Result};
use crate::perfect::{GroupKind, VoronoiGraph};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PayloadKind {
    Graph,
    Complex,
    Verdict,
    TessInstance,
}

impl PayloadKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PayloadKind::Graph => "graph",
            PayloadKind::Complex => "complex",
            PayloadKind::Verdict => "verdict",
            PayloadKind::TessInstance => "tess-instance",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub schema_version: u32,
    pub n: Option<usize>,
    pub group: Option<GroupKind>,
    pub kind: PayloadKind,
    /// Lowercase hex SHA-256 of the compact payload text.
    pub hash: String,
    pub payload: serde_json::Value,
}

fn digest(payload: &serde_json::Value) -> String {
    let text = serde_json::to_string(payload).expect("JSON values serialize");
    hex::encode(Sha256::digest(text.as_bytes()))
}

impl CacheEntry {
    pub fn new<T: Serialize>(kind: PayloadKind, n: Option<usize>, group: Option<GroupKind>, value: &T) -> Result<Self> {
        let payload = serde_json::to_value(value).map_err(|e| Error::Inconsistent(format!("cannot serialize: {e}")))?;
        Ok(CacheEntry { schema_version: SCHEMA_VERSION, n, group, kind, hash: digest(&payload), payload })
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_text(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("JSON values serialize");
        s.push('\n');
        s
    }

    /// Parse and check schema version and hash; `origin` names the source in errors.
    pub fn from_text(text: &str, origin: &str) -> Result<Self> {
        let corrupt = |reason: String| Error::CacheCorrupt { path: origin.to_string(), reason };
        let e: CacheEntry = serde_json::from_str(text).map_err(|e| corrupt(e.to_string()))?;
        if e.schema_version != SCHEMA_VERSION {
            return Err(corrupt(format!("schema version {} (expected {SCHEMA_VERSION})", e.schema_version)));
        }
        if digest(&e.payload) != e.hash {
            return Err(corrupt("payload hash mismatch".into()));
        }
        Ok(e)
    }

    pub fn decode<T: DeserializeOwned>(&self, origin: &str) -> Result<T> {
        serde_json::from_value(self.payload.clone())
            .map_err(|e| Error::CacheCorrupt { path: origin.to_string(), reason: format!("payload: {e}") })
    }
}

/// Write `text` to `path` atomically.
pub fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn save(path: &Path, entry: &CacheEntry) -> Result<()> {
    write_atomic(path, &entry.to_text())
}

pub fn load(path: &Path) -> Result<CacheEntry> {
    let text = fs::read_to_string(path)?;
    CacheEntry::from_text(&text, &path.display().to_string())
}

/// A cache directory holding one file per `(kind, group, n)`.
#[derive(Clone, Debug)]
pub struct Cache {
    pub dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Cache { dir: dir.into() }
    }

    pub fn path(&self, kind: PayloadKind, n: usize, group: GroupKind) -> PathBuf {
        self.dir.join(format!("{}-{group}-n{n}.json", kind.as_str()))
    }

    pub fn store<T: Serialize>(&self, kind: PayloadKind, n: usize, group: GroupKind, value: &T) -> Result<PathBuf> {
        let path = self.path(kind, n, group);
        save(&path, &CacheEntry::new(kind, Some(n), Some(group), value)?)?;
        Ok(path)
    }

    /// `None` when no file exists; `CacheCorrupt` when one exists but is unusable.
    pub fn fetch<T: DeserializeOwned>(&self, kind: PayloadKind, n: usize, group: GroupKind) -> Result<Option<T>> {
        let path = self.path(kind, n, group);
        if !path.exists() {
            return Ok(None);
        }
        let origin = path.display().to_string();
        let e = load(&path)?;
        if e.kind != kind || e.n != Some(n) || e.group != Some(group) {
            return Err(Error::CacheCorrupt {
                path: origin,
                reason: format!("header says {:?} n={:?} {:?}", e.kind, e.n, e.group),
            });
        }
        e.decode(&origin).map(Some)
    }

    pub fn fetch_graph(&self, n: usize, group: GroupKind) -> Result<Option<VoronoiGraph>> {
        let Some(g) = self.fetch::<VoronoiGraph>(PayloadKind::Graph, n, group)? else {
            return Ok(None);
        };
        check_graph(&g).map_err(|reason| Error::CacheCorrupt {
            path: self.path(PayloadKind::Graph, n, group).display().to_string(),
            reason,
        })?;
        Ok(Some(g))
    }

    pub fn fetch_complex(&self, n: usize, group: GroupKind) -> Result<Option<VoronoiComplex>> {
        let Some(c) = self.fetch::<VoronoiComplex>(PayloadKind::Complex, n, group)? else {
            return Ok(None);
        };
        check_graph(&c.graph).map_err(|reason| Error::CacheCorrupt {
            path: self.path(PayloadKind::Complex, n, group).display().to_string(),
            reason,
        })?;
        Ok(Some(c))
    }
}

/// Structural consistency of a loaded graph: one edge per facet, in order,
/// with witnesses mapping the neighbour's domain onto the facet.
pub fn check_graph(g: &VoronoiGraph) -> std::result::Result<(), String> {
    let mut k = 0;
    for (i, node) in g.nodes.iter().enumerate() {
        if node.n() != g.n {
            return Err(format!("class {} has rank {}", node.name, node.n()));
        }
        for f in 0..node.facets().len() {
            let e = g.edges.get(k).ok_or("missing edges")?;
            if (e.from, e.facet) != (i, f) || e.to >= g.nodes.len() {
                return Err(format!("edge {k} is out of order"));
            }
            let face = node.facets()[f].incident;
            let back = g.nodes[e.to].map_rays(&e.witness.inverse(), node, face);
            if back.and_then(|r| g.nodes[e.to].facet_index(r)).is_none() {
                return Err(format!("edge {k} witness does not glue facet {f} of {}", node.name));
            }
            k += 1;
        }
    }
    if k != g.edges.len() {
        return Err("extra edges".into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{build_complex, ComplexOptions};
    use crate::perfect::enumerate_perfect_forms;

    #[test]
    fn graph_and_complex_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        let g = enumerate_perfect_forms(4, GroupKind::Sl).unwrap();
        assert!(cache.fetch_graph(4, GroupKind::Sl).unwrap().is_none());
        cache.store(PayloadKind::Graph, 4, GroupKind::Sl, &g).unwrap();
        let back = cache.fetch_graph(4, GroupKind::Sl).unwrap().unwrap();
        assert_eq!(serde_json::to_value(&back).unwrap(), serde_json::to_value(&g).unwrap());
        assert_eq!(back.nodes[1].stab_order(), g.nodes[1].stab_order());

        let c = build_complex(&g, ComplexOptions::default()).unwrap();
        cache.store(PayloadKind::Complex, 4, GroupKind::Sl, &c).unwrap();
        let c2 = cache.fetch_complex(4, GroupKind::Sl).unwrap().unwrap();
        assert_eq!(c2.differential, c.differential);
        assert_eq!(serde_json::to_value(&c2).unwrap(), serde_json::to_value(&c).unwrap());
    }

    #[test]
    fn deterministic_bytes() {
        let g = enumerate_perfect_forms(3, GroupKind::Gl).unwrap();
        let a = CacheEntry::new(PayloadKind::Graph, Some(3), Some(GroupKind::Gl), &g).unwrap().to_text();
        let b = CacheEntry::new(PayloadKind::Graph, Some(3), Some(GroupKind::Gl), &g).unwrap().to_text();
        assert_eq!(a, b);
    }

    #[test]
    fn corruption_detected() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        let g = enumerate_perfect_forms(2, GroupKind::Gl).unwrap();
        let path = cache.store(PayloadKind::Graph, 2, GroupKind::Gl, &g).unwrap();
        let text = fs::read_to_string(&path).unwrap();

        fs::write(&path, text.replacen("\"A2\"", "\"B2\"", 1)).unwrap();
        assert!(matches!(cache.fetch_graph(2, GroupKind::Gl), Err(Error::CacheCorrupt { .. })));

        fs::write(&path, text.replacen("\"schema_version\": 1", "\"schema_version\": 9", 1)).unwrap();
        assert!(matches!(cache.fetch_graph(2, GroupKind::Gl), Err(Error::CacheCorrupt { .. })));

        fs::write(&path, &text[..text.len() / 2]).unwrap();
        assert!(matches!(cache.fetch_graph(2, GroupKind::Gl), Err(Error::CacheCorrupt { .. })));

        // Header for a different rank.
        fs::write(&path, text.replacen("\"n\": 2", "\"n\": 3", 1)).unwrap();
        assert!(matches!(cache.fetch_graph(2, GroupKind::Gl), Err(Error::CacheCorrupt { .. })));

        fs::write(&path, &text).unwrap();
        assert!(cache.fetch_graph(2, GroupKind::Gl).unwrap().is_some());
    }

    #[test]
    fn hash_valid_but_inconsistent_payload() {
        let g = enumerate_perfect_forms(2, GroupKind::Gl).unwrap();
        let mut v = serde_json::to_value(&g).unwrap();
        v["nodes"][0]["stabilizer"]["order"] = serde_json::json!(5);
        let entry = CacheEntry::new(PayloadKind::Graph, Some(2), Some(GroupKind::Gl), &v).unwrap();
        assert!(matches!(entry.decode::<VoronoiGraph>("mem"), Err(Error::CacheCorrupt { .. })));
    }
}
