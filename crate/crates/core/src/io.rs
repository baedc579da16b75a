//! Binary dataset container ("IHED"), ground-truth sidecar, and PPM/PGM
//! image export.
//!
//! Container layout: magic `IHED`, version u32, length-prefixed textual
//! header of `key=value` lines, then raw little-endian tensors per item.
//! Pixels are 32-bit floats; labels are 64-bit floats so mix weights
//! survive a round trip at full precision. The ground truth lives in a
//! separate `.truth` file (magic `IHTR`) so attacks can be run blind.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::{
    DatasetParams, EncodedDataset, EncodedImage, Image, LabelVector, MixRecord, Shape,
};

const MAGIC_DATASET: &[u8; 4] = b"IHED";
const MAGIC_TRUTH: &[u8; 4] = b"IHTR";
const VERSION: u32 = 1;

fn parse_err(field: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        field: field.to_string(),
        message: message.into(),
    }
}

fn read_exact(r: &mut impl Read, buf: &mut [u8], field: &str) -> Result<()> {
    r.read_exact(buf)
        .map_err(|e| parse_err(field, format!("truncated: {e}")))
}

fn read_u32(r: &mut impl Read, field: &str) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b, field)?;
    Ok(u32::from_le_bytes(b))
}

fn write_f32s(w: &mut impl Write, values: &[f32]) -> Result<()> {
    let mut buf = Vec::with_capacity(values.len() * 4);
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_f32s(r: &mut impl Read, n: usize, field: &str) -> Result<Vec<f32>> {
    let mut buf = vec![0u8; n * 4];
    read_exact(r, &mut buf, field)?;
    Ok(buf
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

fn write_f64s(w: &mut impl Write, values: &[f64]) -> Result<()> {
    let mut buf = Vec::with_capacity(values.len() * 8);
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_f64s(r: &mut impl Read, n: usize, field: &str) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; n * 8];
    read_exact(r, &mut buf, field)?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

struct Header(BTreeMap<String, String>);

impl Header {
    fn new() -> Self {
        Header(BTreeMap::new())
    }

    fn set(&mut self, key: &str, value: impl ToString) {
        self.0.insert(key.to_string(), value.to_string());
    }

    fn encode(&self) -> Vec<u8> {
        let mut text = String::new();
        for (k, v) in &self.0 {
            text.push_str(k);
            text.push('=');
            text.push_str(v);
            text.push('\n');
        }
        text.into_bytes()
    }

    fn decode(bytes: &[u8]) -> Result<Self> {
        let text = std::str::from_utf8(bytes)
            .map_err(|_| parse_err("header", "header is not valid UTF-8"))?;
        let mut map = BTreeMap::new();
        for line in text.lines() {
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| parse_err("header", format!("malformed line {line:?}")))?;
            map.insert(k.to_string(), v.to_string());
        }
        Ok(Header(map))
    }

    fn get_usize(&self, key: &str) -> Result<usize> {
        self.0
            .get(key)
            .ok_or_else(|| parse_err(key, "missing header field"))?
            .parse()
            .map_err(|_| parse_err(key, "not an unsigned integer"))
    }

    fn get_bool(&self, key: &str) -> Result<bool> {
        match self.0.get(key).map(String::as_str) {
            Some("0") => Ok(false),
            Some("1") => Ok(true),
            Some(other) => Err(parse_err(key, format!("expected 0 or 1, got {other:?}"))),
            None => Err(parse_err(key, "missing header field")),
        }
    }

    fn get_str(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }
}

fn write_magic_and_header(w: &mut impl Write, magic: &[u8; 4], header: &Header) -> Result<()> {
    w.write_all(magic)?;
    w.write_all(&VERSION.to_le_bytes())?;
    let encoded = header.encode();
    w.write_all(&(encoded.len() as u32).to_le_bytes())?;
    w.write_all(&encoded)?;
    Ok(())
}

fn read_magic_and_header(r: &mut impl Read, magic: &[u8; 4]) -> Result<Header> {
    let mut got = [0u8; 4];
    read_exact(r, &mut got, "magic")?;
    if &got != magic {
        return Err(parse_err(
            "magic",
            format!(
                "expected {:?}, got {:?}",
                String::from_utf8_lossy(magic),
                String::from_utf8_lossy(&got)
            ),
        ));
    }
    let version = read_u32(r, "version")?;
    if version != VERSION {
        return Err(parse_err("version", format!("unsupported version {version}")));
    }
    let header_len = read_u32(r, "header_len")? as usize;
    if header_len > 1 << 20 {
        return Err(parse_err("header_len", "implausibly large header"));
    }
    let mut bytes = vec![0u8; header_len];
    read_exact(r, &mut bytes, "header")?;
    Header::decode(&bytes)
}

/// Writes the encoded dataset (pixels plus mixed labels, no ground truth).
pub fn write_dataset(ds: &EncodedDataset, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let p = ds.params;
    let mut header = Header::new();
    header.set("kind", "encoded");
    header.set("height", p.shape.height);
    header.set("width", p.shape.width);
    header.set("channels", p.shape.channels);
    header.set("k", p.k);
    header.set("epochs", p.epochs);
    header.set("num_private", p.num_private);
    header.set("num_classes", p.num_classes);
    header.set("sign_flip", p.sign_flip as u8);
    header.set("public_pool_size", p.public_pool_size);
    header.set("count", ds.encodings.len());
    write_magic_and_header(&mut w, MAGIC_DATASET, &header)?;
    for enc in &ds.encodings {
        write_f32s(&mut w, enc.pixels())?;
        write_f64s(&mut w, enc.label().probs())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an encoded dataset. The result never carries ground truth; use
/// [`read_truth`] for the sidecar.
pub fn read_dataset(path: impl AsRef<Path>) -> Result<EncodedDataset> {
    let mut r = BufReader::new(File::open(path)?);
    let header = read_magic_and_header(&mut r, MAGIC_DATASET)?;
    if header.get_str("kind") != Some("encoded") {
        return Err(parse_err("kind", "expected an encoded-image container"));
    }
    let shape = Shape::new(
        header.get_usize("height")?,
        header.get_usize("width")?,
        header.get_usize("channels")?,
    );
    if shape.is_empty() {
        return Err(parse_err("shape", "zero-sized shape"));
    }
    let params = DatasetParams {
        k: header.get_usize("k")?,
        epochs: header.get_usize("epochs")?,
        num_private: header.get_usize("num_private")?,
        num_classes: header.get_usize("num_classes")?,
        shape,
        sign_flip: header.get_bool("sign_flip")?,
        public_pool_size: header.get_usize("public_pool_size")?,
    };
    let count = header.get_usize("count")?;
    let d = shape.len();
    let mut encodings = Vec::with_capacity(count);
    for i in 0..count {
        let pixels = read_f32s(&mut r, d, &format!("encoding {i} pixels"))?;
        let label = read_f64s(&mut r, params.num_classes, &format!("encoding {i} label"))?;
        encodings.push(
            EncodedImage::new(shape, pixels, LabelVector::new(label)?)
                .map_err(|e| parse_err(&format!("encoding {i}"), e.to_string()))?,
        );
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(parse_err(
            "trailing",
            "file longer than declared tensor byte length",
        ));
    }
    Ok(EncodedDataset {
        encodings,
        params,
        ground_truth: None,
    })
}

/// Writes plain images (a public pool or original privates) in the same
/// container with `kind=plain`.
pub fn write_images(images: &[Image], path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let shape = images
        .first()
        .map(Image::shape)
        .ok_or_else(|| Error::Invalid("cannot write an empty image container".into()))?;
    let mut header = Header::new();
    header.set("kind", "plain");
    header.set("height", shape.height);
    header.set("width", shape.width);
    header.set("channels", shape.channels);
    header.set("count", images.len());
    write_magic_and_header(&mut w, MAGIC_DATASET, &header)?;
    for img in images {
        if img.shape() != shape {
            return Err(Error::ShapeMismatch {
                expected: shape.to_string(),
                got: img.shape().to_string(),
            });
        }
        write_f32s(&mut w, img.pixels())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a `kind=plain` image container.
pub fn read_images(path: impl AsRef<Path>) -> Result<Vec<Image>> {
    let mut r = BufReader::new(File::open(path)?);
    let header = read_magic_and_header(&mut r, MAGIC_DATASET)?;
    if header.get_str("kind") != Some("plain") {
        return Err(parse_err("kind", "expected a plain-image container"));
    }
    let shape = Shape::new(
        header.get_usize("height")?,
        header.get_usize("width")?,
        header.get_usize("channels")?,
    );
    let count = header.get_usize("count")?;
    let mut images = Vec::with_capacity(count);
    for i in 0..count {
        let pixels = read_f32s(&mut r, shape.len(), &format!("image {i}"))?;
        images.push(
            Image::new(shape, pixels).map_err(|e| parse_err(&format!("image {i}"), e.to_string()))?,
        );
    }
    Ok(images)
}

/// Writes the ground-truth sidecar. `seed` is recorded when known (the
/// generator always knows it; recovered secrets carry it too).
pub fn write_truth(
    records: &[MixRecord],
    k: usize,
    d: usize,
    seed: Option<u32>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let mut header = Header::new();
    header.set("count", records.len());
    header.set("k", k);
    header.set("d", d);
    if let Some(s) = seed {
        header.set("seed", s);
    }
    write_magic_and_header(&mut w, MAGIC_TRUTH, &header)?;
    for rec in records {
        if rec.public_indices.len() != k - 2 || rec.lambdas.len() != k || rec.sigma.len() != d {
            return Err(Error::Invalid("record does not match declared k/d".into()));
        }
        w.write_all(&(rec.epoch as u32).to_le_bytes())?;
        w.write_all(&(rec.private_indices.0 as u32).to_le_bytes())?;
        w.write_all(&(rec.private_indices.1 as u32).to_le_bytes())?;
        for &p in &rec.public_indices {
            w.write_all(&(p as u32).to_le_bytes())?;
        }
        write_f64s(&mut w, &rec.lambdas)?;
        let bytes: Vec<u8> = rec.sigma.iter().map(|&s| (s == 1) as u8).collect();
        w.write_all(&bytes)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a ground-truth sidecar; returns the records and the recorded seed.
pub fn read_truth(path: impl AsRef<Path>) -> Result<(Vec<MixRecord>, Option<u32>)> {
    let mut r = BufReader::new(File::open(path)?);
    let header = read_magic_and_header(&mut r, MAGIC_TRUTH)?;
    let count = header.get_usize("count")?;
    let k = header.get_usize("k")?;
    let d = header.get_usize("d")?;
    if k < 2 {
        return Err(parse_err("k", "mix size below 2"));
    }
    let seed = match header.get_str("seed") {
        Some(s) => Some(
            s.parse::<u32>()
                .map_err(|_| parse_err("seed", "not a 32-bit unsigned integer"))?,
        ),
        None => None,
    };
    let mut records = Vec::with_capacity(count);
    for i in 0..count {
        let field = format!("record {i}");
        let epoch = read_u32(&mut r, &field)? as usize;
        let a = read_u32(&mut r, &field)? as usize;
        let b = read_u32(&mut r, &field)? as usize;
        let mut public_indices = Vec::with_capacity(k - 2);
        for _ in 0..k - 2 {
            public_indices.push(read_u32(&mut r, &field)? as usize);
        }
        let lambdas = read_f64s(&mut r, k, &field)?;
        let mut sigma_bytes = vec![0u8; d];
        read_exact(&mut r, &mut sigma_bytes, &field)?;
        let sigma = sigma_bytes
            .iter()
            .map(|&b| if b == 1 { 1i8 } else { -1i8 })
            .collect();
        records.push(MixRecord {
            private_indices: (a, b),
            public_indices,
            lambdas,
            sigma,
            epoch,
        });
    }
    Ok((records, seed))
}

/// Exports an image as binary PPM (P6, 3 channels) or PGM (P5, 1 channel),
/// mapping pixel `p` to `round(255 * clamp(p, 0, 1))`.
pub fn write_pnm(image: &Image, path: impl AsRef<Path>) -> Result<()> {
    let shape = image.shape();
    let (magic, _) = match shape.channels {
        1 => ("P5", 1),
        3 => ("P6", 3),
        c => {
            return Err(Error::Invalid(format!(
                "PNM export supports 1 or 3 channels, got {c}"
            )))
        }
    };
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "{magic}\n{} {}\n255\n", shape.width, shape.height)?;
    let bytes: Vec<u8> = image
        .pixels()
        .iter()
        .map(|&p| (255.0 * p.clamp(0.0, 1.0)).round() as u8)
        .collect();
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(())
}

/// Reads a binary PPM/PGM written by [`write_pnm`] (or any P5/P6 file with
/// maxval 255) back into an image with pixels `v / 255`.
pub fn read_pnm(path: impl AsRef<Path>) -> Result<Image> {
    let mut r = BufReader::new(File::open(path)?);
    let mut contents = Vec::new();
    r.read_to_end(&mut contents)?;
    let mut pos = 0usize;
    let mut token = |field: &str| -> Result<String> {
        while pos < contents.len() && contents[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < contents.len() && contents[pos] == b'#' {
            while pos < contents.len() && contents[pos] != b'\n' {
                pos += 1;
            }
            while pos < contents.len() && contents[pos].is_ascii_whitespace() {
                pos += 1;
            }
        }
        let start = pos;
        while pos < contents.len() && !contents[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(parse_err(field, "truncated header"));
        }
        Ok(String::from_utf8_lossy(&contents[start..pos]).into_owned())
    };
    let magic = token("magic")?;
    let channels = match magic.as_str() {
        "P5" => 1,
        "P6" => 3,
        other => return Err(parse_err("magic", format!("unsupported PNM type {other}"))),
    };
    let width: usize = token("width")?
        .parse()
        .map_err(|_| parse_err("width", "not an integer"))?;
    let height: usize = token("height")?
        .parse()
        .map_err(|_| parse_err("height", "not an integer"))?;
    let maxval: usize = token("maxval")?
        .parse()
        .map_err(|_| parse_err("maxval", "not an integer"))?;
    if maxval != 255 {
        return Err(parse_err("maxval", format!("expected 255, got {maxval}")));
    }
    pos += 1; // single whitespace byte after maxval
    let shape = Shape::new(height, width, channels);
    let data = contents
        .get(pos..pos + shape.len())
        .ok_or_else(|| parse_err("pixels", "truncated pixel data"))?;
    let pixels: Vec<f32> = data.iter().map(|&b| b as f32 / 255.0).collect();
    Image::new(shape, pixels)
}
