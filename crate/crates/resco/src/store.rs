//! Pre-trained word and entity vector stores.
//!
//! Two on-disk layouts are supported: the classic binary distribution format
//! (ASCII `"<vocab> <dim>\n"` header followed by records of a space-terminated
//! token and `dim` little-endian f32 values, each optionally tailed by `'\n'`)
//! and the whitespace-delimited text format with an optional `"count dim"`
//! header line. Entity files mark entity keys with the `ENTITY/` prefix and
//! use underscores for spaces.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Whether a store serves word vectors or entity vectors.
///
/// Files mixing words and entities (the usual entity-embedding distribution)
/// are filtered on load: an entity store keeps only `ENTITY/`-prefixed keys,
/// a word store keeps only unprefixed ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoreKind {
    Word,
    Entity,
}

const ENTITY_PREFIX: &str = "ENTITY/";

/// Read-only map from case-folded keys to fixed-dimension vectors.
#[derive(Debug, Clone)]
pub struct VectorStore {
    dimension: usize,
    entries: HashMap<String, Vec<f32>>,
    kind: StoreKind,
}

impl VectorStore {
    /// Builds a store from already-normalized `(key, vector)` pairs.
    ///
    /// Keys are case-folded here as well, so programmatic construction and
    /// file loading agree on lookup semantics.
    pub fn from_entries(
        kind: StoreKind,
        dimension: usize,
        pairs: impl IntoIterator<Item = (String, Vec<f32>)>,
    ) -> Result<Self> {
        let mut entries = HashMap::new();
        for (record, (key, vector)) in pairs.into_iter().enumerate() {
            assert_eq!(vector.len(), dimension, "vector length != store dimension");
            let key = fold_key(&key);
            if entries.insert(key.clone(), vector).is_some() {
                return Err(Error::DuplicateKey {
                    path: "<memory>".into(),
                    key,
                    record,
                });
            }
        }
        Ok(VectorStore {
            dimension,
            entries,
            kind,
        })
    }

    /// Empty store of the given kind. Lookups always miss.
    pub fn empty(kind: StoreKind) -> Self {
        VectorStore {
            dimension: 0,
            entries: HashMap::new(),
            kind,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn kind(&self) -> StoreKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Case-folded exact-match lookup. Absence is a value, not an error.
    pub fn lookup(&self, key: &str) -> Option<&[f32]> {
        self.entries.get(&fold_key(key)).map(Vec::as_slice)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(&fold_key(key))
    }

    /// Iterates entries in unspecified order; callers needing determinism
    /// must sort.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f32])> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// Parses the binary distribution format.
    ///
    /// The whole payload must be consumed: missing bytes are a truncation
    /// error and leftover bytes after the declared records are rejected.
    pub fn load_binary(path: impl AsRef<Path>, kind: StoreKind) -> Result<Self> {
        let path = path.as_ref();
        let mut bytes = Vec::new();
        File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io(path, e))?;

        let mut pos = 0usize;
        let vocab = read_ascii_number(&bytes, &mut pos, b' ', path)?;
        let dimension = read_ascii_number(&bytes, &mut pos, b'\n', path)?;
        if dimension == 0 {
            return Err(Error::MalformedHeader {
                path: path.into(),
                reason: "dimension must be positive".into(),
            });
        }

        let mut raw = Vec::with_capacity(vocab);
        for record in 0..vocab {
            let token_start = pos;
            while pos < bytes.len() && bytes[pos] != b' ' {
                pos += 1;
            }
            if pos >= bytes.len() {
                return Err(Error::TruncatedPayload {
                    path: path.into(),
                    record,
                });
            }
            let token = String::from_utf8_lossy(&bytes[token_start..pos]).into_owned();
            pos += 1; // the 0x20 terminator

            let payload = dimension * 4;
            if bytes.len() < pos + payload {
                return Err(Error::TruncatedPayload {
                    path: path.into(),
                    record,
                });
            }
            let vector: Vec<f32> = bytes[pos..pos + payload]
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect();
            pos += payload;
            // Tolerate one record-separating newline.
            if pos < bytes.len() && bytes[pos] == b'\n' {
                pos += 1;
            }
            raw.push((token, vector));
        }
        if pos != bytes.len() {
            return Err(Error::TrailingBytes {
                path: path.into(),
                extra: bytes.len() - pos,
                count: vocab,
            });
        }

        build_store(raw, dimension, kind, path)
    }

    /// Parses the text format: one `key v1 .. vd` line per entry, optionally
    /// preceded by a `count dim` header line.
    ///
    /// An empty file yields an empty store; problems then surface as missed
    /// lookups, not load failures.
    pub fn load_text(path: impl AsRef<Path>, kind: StoreKind) -> Result<Self> {
        let path = path.as_ref();
        let reader = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);

        let mut dimension: Option<usize> = None;
        let mut declared: Option<usize> = None;
        let mut raw = Vec::new();

        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let lineno = idx + 1;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            // A first line of exactly two integers is the header.
            if lineno == 1 && fields.len() == 2 {
                if let (Ok(count), Ok(dim)) =
                    (fields[0].parse::<usize>(), fields[1].parse::<usize>())
                {
                    declared = Some(count);
                    dimension = Some(dim);
                    continue;
                }
            }
            let dim = *dimension.get_or_insert(fields.len() - 1);
            if fields.len() != dim + 1 {
                return Err(Error::RaggedLine {
                    path: path.into(),
                    line: lineno,
                    expected: dim + 1,
                    found: fields.len(),
                });
            }
            let mut vector = Vec::with_capacity(dim);
            for field in &fields[1..] {
                let v: f32 = field.parse().map_err(|_| Error::NonNumeric {
                    path: path.into(),
                    line: lineno,
                    field: (*field).to_string(),
                })?;
                vector.push(v);
            }
            raw.push((fields[0].to_string(), vector));
        }

        if let Some(count) = declared {
            if raw.len() != count {
                return Err(Error::MalformedHeader {
                    path: path.into(),
                    reason: format!("header declares {count} entries, file has {}", raw.len()),
                });
            }
        }
        build_store(raw, dimension.unwrap_or(0), kind, path)
    }

    /// Writes the text format with a header line, keys sorted for stable
    /// output. Entity keys are re-prefixed so the file round-trips through
    /// [`VectorStore::load_text`].
    pub fn write_text(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut keys: Vec<&str> = self.entries.keys().map(String::as_str).collect();
        keys.sort_unstable();

        let mut out = String::new();
        out.push_str(&format!("{} {}\n", self.entries.len(), self.dimension));
        for key in keys {
            let disk_key = match self.kind {
                StoreKind::Word => key.to_string(),
                StoreKind::Entity => format!("{ENTITY_PREFIX}{}", key.replace(' ', "_")),
            };
            out.push_str(&disk_key);
            for v in &self.entries[key] {
                out.push(' ');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        File::create(path)
            .and_then(|mut f| f.write_all(out.as_bytes()))
            .map_err(|e| Error::io(path, e))
    }
}

/// Case folding applied to every key at load and at lookup.
pub(crate) fn fold_key(key: &str) -> String {
    key.to_lowercase()
}

fn build_store(
    raw: Vec<(String, Vec<f32>)>,
    dimension: usize,
    kind: StoreKind,
    path: &Path,
) -> Result<VectorStore> {
    let mut entries = HashMap::with_capacity(raw.len());
    for (record, (token, vector)) in raw.into_iter().enumerate() {
        let key = match (kind, token.strip_prefix(ENTITY_PREFIX)) {
            (StoreKind::Entity, Some(rest)) => fold_key(&rest.replace('_', " ")),
            (StoreKind::Word, None) => fold_key(&token),
            // Key does not belong to the requested kind.
            _ => continue,
        };
        if entries.insert(key.clone(), vector).is_some() {
            return Err(Error::DuplicateKey {
                path: path.into(),
                key,
                record,
            });
        }
    }
    Ok(VectorStore {
        dimension,
        entries,
        kind,
    })
}

fn read_ascii_number(bytes: &[u8], pos: &mut usize, delim: u8, path: &Path) -> Result<usize> {
    let start = *pos;
    while *pos < bytes.len() && bytes[*pos] != delim {
        *pos += 1;
    }
    if *pos >= bytes.len() {
        return Err(Error::MalformedHeader {
            path: path.into(),
            reason: "unterminated header field".into(),
        });
    }
    let field = std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .ok_or_else(|| Error::MalformedHeader {
            path: path.into(),
            reason: format!(
                "non-numeric header field {:?}",
                String::from_utf8_lossy(&bytes[start..*pos])
            ),
        })?;
    *pos += 1;
    Ok(field)
}
