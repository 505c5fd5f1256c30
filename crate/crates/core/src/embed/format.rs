//! EMBV1 binary vector files (little-endian).
//!
//! ```text
//! magic   "EMBV1\n"
//! u32     record count
//! u32     dimension d
//! record* u8 language-code length, code bytes,
//!         u16 item_id length, item_id bytes,
//!         d x f32
//! ```

use std::fs;
use std::path::Path;

use super::EmbedError;

pub const MAGIC: &[u8; 6] = b"EMBV1\n";

#[derive(Debug, Clone, PartialEq)]
pub struct Embv1Entry {
    pub language: String,
    pub item_id: String,
    pub vector: Vec<f32>,
}

/// Raw file contents, before validation or normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct Embv1File {
    pub dimension: u32,
    pub entries: Vec<Embv1Entry>,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    offset: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8], EmbedError> {
        let end = self
            .offset
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or(EmbedError::Truncated {
                offset: self.offset,
                what,
            })?;
        let slice = &self.bytes[self.offset..end];
        self.offset = end;
        Ok(slice)
    }

    fn u8(&mut self, what: &'static str) -> Result<u8, EmbedError> {
        Ok(self.take(1, what)?[0])
    }

    fn u16(&mut self, what: &'static str) -> Result<u16, EmbedError> {
        let b = self.take(2, what)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self, what: &'static str) -> Result<u32, EmbedError> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn string(&mut self, n: usize, what: &'static str) -> Result<String, EmbedError> {
        let offset = self.offset;
        let b = self.take(n, what)?;
        String::from_utf8(b.to_vec()).map_err(|_| EmbedError::InvalidUtf8 { offset, what })
    }
}

impl Embv1File {
    pub fn parse(bytes: &[u8]) -> Result<Self, EmbedError> {
        if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
            return Err(EmbedError::BadMagic);
        }
        let mut cur = Cursor {
            bytes,
            offset: MAGIC.len(),
        };
        let count = cur.u32("record count")?;
        let dimension = cur.u32("dimension")?;
        if dimension == 0 {
            return Err(EmbedError::ZeroDimension);
        }
        let d = dimension as usize;
        // Every record needs at least 3 length bytes plus the vector.
        let min_record = 3 + 4 * d;
        let mut entries = Vec::with_capacity((count as usize).min(bytes.len() / min_record + 1));
        for _ in 0..count {
            let lang_len = cur.u8("language length")? as usize;
            let language = cur.string(lang_len, "language code")?;
            let id_len = cur.u16("item_id length")? as usize;
            let item_id = cur.string(id_len, "item_id")?;
            let raw = cur.take(4 * d, "vector")?;
            let vector = raw
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                .collect();
            entries.push(Embv1Entry {
                language,
                item_id,
                vector,
            });
        }
        if cur.offset != bytes.len() {
            return Err(EmbedError::TrailingBytes(bytes.len() - cur.offset));
        }
        Ok(Embv1File { dimension, entries })
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, EmbedError> {
        let d = self.dimension as usize;
        let mut out = Vec::with_capacity(14 + self.entries.len() * (8 + 4 * d));
        out.extend_from_slice(MAGIC);
        let count =
            u32::try_from(self.entries.len()).map_err(|_| EmbedError::TooLarge("record count"))?;
        out.extend_from_slice(&count.to_le_bytes());
        out.extend_from_slice(&self.dimension.to_le_bytes());
        for e in &self.entries {
            if e.vector.len() != d {
                return Err(EmbedError::DimensionMismatch {
                    expected: d,
                    found: e.vector.len(),
                });
            }
            let lang_len = u8::try_from(e.language.len())
                .map_err(|_| EmbedError::TooLarge("language code"))?;
            out.push(lang_len);
            out.extend_from_slice(e.language.as_bytes());
            let id_len =
                u16::try_from(e.item_id.len()).map_err(|_| EmbedError::TooLarge("item_id"))?;
            out.extend_from_slice(&id_len.to_le_bytes());
            out.extend_from_slice(e.item_id.as_bytes());
            for x in &e.vector {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, EmbedError> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|source| EmbedError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Embv1File::parse(&bytes)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), EmbedError> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()?).map_err(|source| EmbedError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Embv1File {
        Embv1File {
            dimension: 2,
            entries: vec![
                Embv1Entry {
                    language: "en".into(),
                    item_id: "a".into(),
                    vector: vec![3.0, 4.0],
                },
                Embv1Entry {
                    language: "fr".into(),
                    item_id: "b".into(),
                    vector: vec![1.0, -0.5],
                },
            ],
        }
    }

    #[test]
    fn layout_is_bit_exact() {
        let bytes = sample().to_bytes().unwrap();
        let mut expected = b"EMBV1\n".to_vec();
        expected.extend_from_slice(&2u32.to_le_bytes());
        expected.extend_from_slice(&2u32.to_le_bytes());
        expected.extend_from_slice(&[2, b'e', b'n', 1, 0, b'a']);
        expected.extend_from_slice(&3.0f32.to_le_bytes());
        expected.extend_from_slice(&4.0f32.to_le_bytes());
        expected.extend_from_slice(&[2, b'f', b'r', 1, 0, b'b']);
        expected.extend_from_slice(&1.0f32.to_le_bytes());
        expected.extend_from_slice(&(-0.5f32).to_le_bytes());
        assert_eq!(bytes, expected);
        assert_eq!(Embv1File::parse(&bytes).unwrap(), sample());
    }

    #[test]
    fn rejects_bad_magic() {
        assert!(matches!(
            Embv1File::parse(b"EMBV2\n\0\0\0\0"),
            Err(EmbedError::BadMagic)
        ));
        assert!(matches!(Embv1File::parse(b""), Err(EmbedError::BadMagic)));
    }

    #[test]
    fn rejects_truncation_anywhere() {
        let bytes = sample().to_bytes().unwrap();
        for cut in MAGIC.len()..bytes.len() {
            assert!(
                matches!(
                    Embv1File::parse(&bytes[..cut]),
                    Err(EmbedError::Truncated { .. })
                ),
                "cut at {cut}"
            );
        }
    }

    #[test]
    fn rejects_trailing_bytes() {
        let mut bytes = sample().to_bytes().unwrap();
        bytes.push(0);
        assert!(matches!(
            Embv1File::parse(&bytes),
            Err(EmbedError::TrailingBytes(1))
        ));
    }

    #[test]
    fn huge_count_does_not_preallocate() {
        let mut bytes = MAGIC.to_vec();
        bytes.extend_from_slice(&u32::MAX.to_le_bytes());
        bytes.extend_from_slice(&4u32.to_le_bytes());
        assert!(matches!(
            Embv1File::parse(&bytes),
            Err(EmbedError::Truncated { .. })
        ));
    }
}
