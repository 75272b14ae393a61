//! Vector files.
//!
//! Text: a header line `<vocab_size> <dim>`, then one line per word: the word
//! followed by `dim` decimal numbers, space separated. Values are written in
//! shortest round-trip form, so `load_text(save_text(s))` is exact.
//!
//! Binary: magic `TAVB`, `u32` version (1), `u64` vocab size, `u64` dim, then
//! per word a `u32` byte length, the UTF-8 bytes and `dim` `f32` values. All
//! integers and floats little-endian.
//!
//! Subword spaces are written as their composed word vectors.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{EmbeddingSpace, Vocabulary};
use crate::linalg::Matrix;
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"TAVB";
const VERSION: u32 = 1;

pub fn save_text(space: &EmbeddingSpace, path: &Path) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    let m = space.composed_vectors();
    writeln!(w, "{} {}", space.len(), space.dim()).map_err(io)?;
    for (i, word) in space.vocab().words().iter().enumerate() {
        w.write_all(word.as_bytes()).map_err(io)?;
        for x in m.column(i).iter() {
            write!(w, " {x}").map_err(io)?;
        }
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn load_text(path: &Path) -> Result<EmbeddingSpace> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path.display();
    let mut lines = BufReader::new(file).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::parse(&name, 1, "missing header"))?
        .map_err(|e| Error::io(path, e))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let parse_usize = |s: &str| s.parse::<usize>().ok();
    let (n, d) = match fields.as_slice() {
        [a, b] => match (parse_usize(a), parse_usize(b)) {
            (Some(n), Some(d)) if d > 0 => (n, d),
            _ => return Err(Error::parse(&name, 1, "header must be \"<vocab_size> <dim>\"")),
        },
        _ => return Err(Error::parse(&name, 1, "header must be \"<vocab_size> <dim>\"")),
    };
    let mut words = Vec::with_capacity(n);
    let mut data = Vec::with_capacity(n * d);
    let mut seen = HashSet::with_capacity(n);
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line.map_err(|e| match e.kind() {
            std::io::ErrorKind::InvalidData => Error::parse(&name, lineno, "invalid UTF-8"),
            _ => Error::io(path, e),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let word = parts.next().expect("non-empty line").to_string();
        let before = data.len();
        for p in parts {
            let x: f64 = p
                .parse()
                .map_err(|_| Error::parse(&name, lineno, format!("bad number {p:?}")))?;
            if !x.is_finite() {
                return Err(Error::parse(&name, lineno, "non-finite value"));
            }
            data.push(x);
        }
        if data.len() - before != d {
            return Err(Error::parse(
                &name,
                lineno,
                format!("expected {d} values, found {}", data.len() - before),
            ));
        }
        if !seen.insert(word.clone()) {
            return Err(Error::parse(&name, lineno, format!("duplicate word {word:?}")));
        }
        words.push(word);
    }
    if words.len() != n {
        return Err(Error::parse(
            &name,
            1,
            format!("header announces {n} words, file has {}", words.len()),
        ));
    }
    let vocab = Vocabulary::from_words(words)?;
    EmbeddingSpace::new(vocab, Matrix::from_vec(d, n, data))
}

pub fn save_binary(space: &EmbeddingSpace, path: &Path) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    let m = space.composed_vectors();
    w.write_all(MAGIC).map_err(io)?;
    w.write_all(&VERSION.to_le_bytes()).map_err(io)?;
    w.write_all(&(space.len() as u64).to_le_bytes()).map_err(io)?;
    w.write_all(&(space.dim() as u64).to_le_bytes()).map_err(io)?;
    for (i, word) in space.vocab().words().iter().enumerate() {
        w.write_all(&(word.len() as u32).to_le_bytes()).map_err(io)?;
        w.write_all(word.as_bytes()).map_err(io)?;
        for &x in m.column(i).iter() {
            w.write_all(&(x as f32).to_le_bytes()).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

pub fn load_binary(path: &Path) -> Result<EmbeddingSpace> {
    let io = |e| Error::io(path, e);
    let name = path.display();
    let mut r = BufReader::new(File::open(path).map_err(io)?);
    let mut buf4 = [0u8; 4];
    let mut buf8 = [0u8; 8];
    r.read_exact(&mut buf4).map_err(io)?;
    if &buf4 != MAGIC {
        return Err(Error::parse(&name, 0, "not a binary vector file"));
    }
    r.read_exact(&mut buf4).map_err(io)?;
    if u32::from_le_bytes(buf4) != VERSION {
        return Err(Error::parse(&name, 0, "unsupported version"));
    }
    r.read_exact(&mut buf8).map_err(io)?;
    let n = u64::from_le_bytes(buf8) as usize;
    r.read_exact(&mut buf8).map_err(io)?;
    let d = u64::from_le_bytes(buf8) as usize;
    if d == 0 {
        return Err(Error::parse(&name, 0, "dimension must be positive"));
    }
    let mut words = Vec::with_capacity(n);
    let mut data = Vec::with_capacity(n * d);
    for i in 0..n {
        r.read_exact(&mut buf4).map_err(io)?;
        let mut bytes = vec![0u8; u32::from_le_bytes(buf4) as usize];
        r.read_exact(&mut bytes).map_err(io)?;
        let word = String::from_utf8(bytes)
            .map_err(|_| Error::parse(&name, i + 1, "word is not UTF-8"))?;
        words.push(word);
        for _ in 0..d {
            r.read_exact(&mut buf4).map_err(io)?;
            let x = f32::from_le_bytes(buf4);
            if !x.is_finite() {
                return Err(Error::parse(&name, i + 1, "non-finite value"));
            }
            data.push(f64::from(x));
        }
    }
    let vocab = Vocabulary::from_words(words).map_err(|e| Error::parse(&name, 0, e.to_string()))?;
    EmbeddingSpace::new(vocab, Matrix::from_vec(d, n, data))
}

/// Load by extension: `.bin` is binary, anything else text.
pub fn load_vectors(path: &Path) -> Result<EmbeddingSpace> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("bin") => load_binary(path),
        _ => load_text(path),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space() -> EmbeddingSpace {
        let vocab = Vocabulary::from_words(vec!["b".into(), "a".into(), "c".into()]).unwrap();
        let m = Matrix::from_column_slice(2, 3, &[0.1, -2.5e-7, 1.0 / 3.0, 4.0, 1e300, -0.0]);
        EmbeddingSpace::new(vocab, m).unwrap()
    }

    #[test]
    fn text_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.txt");
        let s = space();
        save_text(&s, &p).unwrap();
        let back = load_text(&p).unwrap();
        assert_eq!(back.vocab().words(), s.vocab().words());
        assert_eq!(back.word_rows(), s.word_rows());
    }

    #[test]
    fn binary_round_trip_at_f32() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.bin");
        let vocab = Vocabulary::from_words(vec!["x".into(), "é".into()]).unwrap();
        let s = EmbeddingSpace::new(vocab, Matrix::from_column_slice(1, 2, &[0.5, -0.25])).unwrap();
        save_binary(&s, &p).unwrap();
        let back = load_vectors(&p).unwrap();
        assert_eq!(back, s);
    }

    fn load_str(content: &str) -> Result<EmbeddingSpace> {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.txt");
        std::fs::write(&p, content).unwrap();
        load_text(&p)
    }

    #[test]
    fn malformed_inputs() {
        let err = load_str("2 3\na 1 2 3 4\nb 1 2 3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(load_str("2 2\na 1 2\na 3 4\n").is_err());
        assert!(load_str("1 2\na 1 NaN\n").is_err());
        assert!(load_str("1 2\na 1 inf\n").is_err());
        assert!(load_str("3 2\na 1 2\n").is_err());
        assert!(load_str("a 1 2\n").is_err());
    }
}
