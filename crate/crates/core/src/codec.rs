//! Canonical proof documents and the QR carrier.
//!
//! A proof document is compact JSON with a fixed field order and fixed-width
//! lowercase hex, so every proof under one modulus size serializes to the
//! same number of bytes:
//!
//! ```text
//! {"t":"<hex>","s":"<hex>","nonce":"<32 hex>","timestamp":<uint>,"key_id":"<string>"}
//! ```
//!
//! The QR layer is a plain byte carrier. It detects transmission damage but
//! authenticates nothing; a re-encoded forgery decodes fine and is left for
//! the verifier to reject.

use std::fmt;
use std::io::Cursor;
use std::str::FromStr;

use image::{GrayImage, ImageFormat, Luma};
use num_bigint::BigUint;
use qrcode::bits::Bits;
use qrcode::{QrCode, Version};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::identity::validate_key_id;
use crate::protocol::{Nonce, Proof};

/// Modules of light border around a rendered code.
pub const QUIET_ZONE: usize = 4;
pub const DEFAULT_MODULE_PX: u32 = 8;

/// Hex characters used for `t` and `s` under a modulus of `bit_length` bits.
pub fn hex_width(bit_length: u32) -> usize {
    2 * (bit_length as usize).div_ceil(8)
}

fn fixed_hex(value: &BigUint, width: usize, field: &str) -> Result<String> {
    let digits = value.to_str_radix(16);
    if digits.len() > width {
        return Err(Error::Encoding(format!(
            "field `{field}` needs {} hex digits, width is {width}",
            digits.len()
        )));
    }
    Ok(format!("{digits:0>width$}"))
}

/// Serializes `proof` to its canonical document.
pub fn encode_proof_json(proof: &Proof, bit_length: u32) -> Result<Vec<u8>> {
    let width = hex_width(bit_length);
    let t = fixed_hex(&proof.t, width, "t")?;
    let s = fixed_hex(&proof.s, width, "s")?;
    let key_id = serde_json::to_string(proof.key_id.as_deref().unwrap_or(""))
        .expect("string serialize");
    Ok(format!(
        r#"{{"t":"{t}","s":"{s}","nonce":"{}","timestamp":{},"key_id":{key_id}}}"#,
        proof.nonce.to_hex(),
        proof.timestamp,
    )
    .into_bytes())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProofDocument {
    t: String,
    s: String,
    nonce: String,
    timestamp: u64,
    key_id: String,
}

fn parse_fixed_hex(s: &str, width: usize, field: &str) -> Result<BigUint> {
    if s.len() != width {
        return Err(Error::Encoding(format!(
            "field `{field}` must be {width} hex characters, got {}",
            s.len()
        )));
    }
    if !s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f')) {
        return Err(Error::Encoding(format!(
            "field `{field}` is not lowercase hex"
        )));
    }
    BigUint::parse_bytes(s.as_bytes(), 16)
        .ok_or_else(|| Error::Encoding(format!("field `{field}` is not hex")))
}

/// Parses a canonical document. Anything that would not re-encode to the
/// same bytes is rejected, so decode never yields a partial or alternative
/// reading. Range checks against `p` are left to verification.
pub fn decode_proof_json(bytes: &[u8], bit_length: u32) -> Result<Proof> {
    let doc: ProofDocument = serde_json::from_slice(bytes).map_err(Error::from_json)?;
    let width = hex_width(bit_length);
    let t = parse_fixed_hex(&doc.t, width, "t")?;
    let s = parse_fixed_hex(&doc.s, width, "s")?;
    let nonce = Nonce::from_hex(&doc.nonce)?;
    if doc.nonce.bytes().any(|b| b.is_ascii_uppercase()) {
        return Err(Error::Encoding("field `nonce` is not lowercase hex".into()));
    }
    let key_id = if doc.key_id.is_empty() {
        None
    } else {
        validate_key_id(&doc.key_id).map_err(|e| Error::Schema(e.to_string()))?;
        Some(doc.key_id)
    };
    let proof = Proof {
        t,
        s,
        nonce,
        timestamp: doc.timestamp,
        key_id,
    };
    if encode_proof_json(&proof, bit_length)? != bytes {
        return Err(Error::Encoding(
            "document is not in canonical form (field order or whitespace)".into(),
        ));
    }
    Ok(proof)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum EcLevel {
    L,
    #[default]
    M,
    Q,
    H,
}

impl EcLevel {
    fn to_qrcode(self) -> qrcode::EcLevel {
        match self {
            EcLevel::L => qrcode::EcLevel::L,
            EcLevel::M => qrcode::EcLevel::M,
            EcLevel::Q => qrcode::EcLevel::Q,
            EcLevel::H => qrcode::EcLevel::H,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            EcLevel::L => 'L',
            EcLevel::M => 'M',
            EcLevel::Q => 'Q',
            EcLevel::H => 'H',
        }
    }
}

impl fmt::Display for EcLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl FromStr for EcLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "L" | "l" => Ok(EcLevel::L),
            "M" | "m" => Ok(EcLevel::M),
            "Q" | "q" => Ok(EcLevel::Q),
            "H" | "h" => Ok(EcLevel::H),
            other => Err(Error::Parameter(format!(
                "unknown error-correction level `{other}`"
            ))),
        }
    }
}

/// An encoded QR symbol: a square module grid, `true` = dark.
#[derive(Clone, PartialEq, Eq)]
pub struct QrPayload {
    modules: Vec<bool>,
    width: usize,
    version: u8,
    ec: EcLevel,
}

impl fmt::Debug for QrPayload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QrPayload")
            .field("version", &self.version)
            .field("ec", &self.ec)
            .field("width", &self.width)
            .finish()
    }
}

impl QrPayload {
    pub fn version(&self) -> u8 {
        self.version
    }

    pub fn error_correction(&self) -> EcLevel {
        self.ec
    }

    /// Modules per side, without quiet zone.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn is_dark(&self, x: usize, y: usize) -> bool {
        self.modules[y * self.width + x]
    }

    /// Greyscale raster with a 4-module quiet zone.
    pub fn to_image(&self, module_px: u32) -> GrayImage {
        let px = module_px.max(1);
        let side = ((self.width + 2 * QUIET_ZONE) as u32) * px;
        GrayImage::from_fn(side, side, |x, y| {
            let mx = (x / px) as usize;
            let my = (y / px) as usize;
            let dark = mx >= QUIET_ZONE
                && my >= QUIET_ZONE
                && mx < QUIET_ZONE + self.width
                && my < QUIET_ZONE + self.width
                && self.is_dark(mx - QUIET_ZONE, my - QUIET_ZONE);
            Luma([if dark { 0 } else { 255 }])
        })
    }

    pub fn to_png(&self, module_px: u32) -> Result<Vec<u8>> {
        let mut out = Cursor::new(Vec::new());
        self.to_image(module_px)
            .write_to(&mut out, ImageFormat::Png)
            .map_err(|e| Error::Encoding(format!("PNG encode: {e}")))?;
        Ok(out.into_inner())
    }

    /// Terminal block art, two characters per module, quiet zone included.
    pub fn to_text(&self) -> String {
        let side = self.width + 2 * QUIET_ZONE;
        let mut out = String::with_capacity(side * (side * 2 * 3 + 1));
        for y in 0..side {
            for x in 0..side {
                let dark = x >= QUIET_ZONE
                    && y >= QUIET_ZONE
                    && x < QUIET_ZONE + self.width
                    && y < QUIET_ZONE + self.width
                    && self.is_dark(x - QUIET_ZONE, y - QUIET_ZONE);
                out.push_str(if dark { "██" } else { "  " });
            }
            out.push('\n');
        }
        out
    }
}

/// Encodes `payload` in byte mode using the smallest version that fits.
pub fn qr_encode(payload: &[u8], ec: EcLevel) -> Result<QrPayload> {
    for v in 1..=40i16 {
        let mut bits = Bits::new(Version::Normal(v));
        if bits.push_byte_data(payload).is_err() || bits.push_terminator(ec.to_qrcode()).is_err() {
            continue;
        }
        let code = QrCode::with_bits(bits, ec.to_qrcode())
            .map_err(|e| Error::Encoding(format!("QR build: {e}")))?;
        let width = code.width();
        let modules = code
            .to_colors()
            .into_iter()
            .map(|c| c == qrcode::Color::Dark)
            .collect();
        return Ok(QrPayload {
            modules,
            width,
            version: v as u8,
            ec,
        });
    }
    Err(Error::Capacity {
        len: payload.len(),
        level: ec.as_char(),
    })
}

/// Reads the payload bytes back out of a module grid.
pub fn qr_decode(qr: &QrPayload) -> Result<Vec<u8>> {
    let grid = rqrr::SimpleGrid::from_func(qr.width, |x, y| qr.is_dark(x, y));
    let mut out = Vec::new();
    rqrr::Grid::new(grid)
        .decode_to(&mut out)
        .map_err(|e| Error::QrDecode(e.to_string()))?;
    Ok(out)
}

/// Locates and decodes the first QR code in a greyscale image.
pub fn qr_decode_image(img: &GrayImage) -> Result<Vec<u8>> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let mut prepared =
        rqrr::PreparedImage::prepare_from_greyscale(w, h, |x, y| img.get_pixel(x as u32, y as u32)[0]);
    let grids = prepared.detect_grids();
    let mut last_err = None;
    for grid in grids {
        let mut out = Vec::new();
        match grid.decode_to(&mut out) {
            Ok(_) => return Ok(out),
            Err(e) => last_err = Some(e.to_string()),
        }
    }
    Err(Error::QrDecode(
        last_err.unwrap_or_else(|| "no QR code found in image".into()),
    ))
}

pub fn qr_decode_png(bytes: &[u8]) -> Result<Vec<u8>> {
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)
        .map_err(|e| Error::QrDecode(format!("not a readable PNG: {e}")))?;
    qr_decode_image(&img.to_luma8())
}
