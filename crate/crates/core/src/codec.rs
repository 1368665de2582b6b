//! Image file codecs: PFM (linear float), 8-bit PNG and binary PPM (sRGB, gamma 2.2).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use crate::error::{io_err, Error, Result};
use crate::raster::{Grid, Rgb, RgbImage, Rgba, RgbaImage};

const GAMMA: f64 = 2.2;

/// Linear value in `[0, 1]` to an 8-bit gamma-2.2 code value.
pub fn encode_srgb(linear: f32) -> u8 {
    let x = f64::from(linear);
    if !(x > 0.0) {
        return 0;
    }
    (255.0 * x.min(1.0).powf(1.0 / GAMMA)).round() as u8
}

pub fn decode_srgb(code: u8) -> f32 {
    static TABLE: OnceLock<[f32; 256]> = OnceLock::new();
    TABLE.get_or_init(|| std::array::from_fn(|i| (i as f64 / 255.0).powf(GAMMA) as f32))[code as usize]
}

pub fn encode_alpha(a: f32) -> u8 {
    (255.0 * f64::from(a).clamp(0.0, 1.0)).round() as u8
}

pub fn decode_alpha(code: u8) -> f32 {
    f32::from(code) / 255.0
}

/// Decoded PFM payload: 3 (`PF`) or 1 (`Pf`) channels, rows top to bottom.
#[derive(Clone, Debug, PartialEq)]
pub struct Pfm {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<f32>,
}

pub fn encode_pfm(pfm: &Pfm) -> Vec<u8> {
    let tag = if pfm.channels == 3 { "PF" } else { "Pf" };
    let mut out = format!("{tag}\n{} {}\n-1.0\n", pfm.width, pfm.height).into_bytes();
    let row_len = pfm.width * pfm.channels;
    out.reserve(pfm.data.len() * 4);
    // PFM stores the bottom row first.
    for row in pfm.data.chunks_exact(row_len).rev() {
        for v in row {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode_pfm(bytes: &[u8], path: &Path) -> Result<Pfm> {
    let parse_err = |message: &str| Error::Parse {
        path: path.to_path_buf(),
        message: message.to_string(),
    };
    let mut pos = 0;
    let mut token = || -> Option<&[u8]> {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        (pos > start).then(|| &bytes[start..pos])
    };
    let channels = match token() {
        Some(b"PF") => 3,
        Some(b"Pf") => 1,
        _ => return Err(parse_err("missing PF/Pf magic")),
    };
    let mut number = |what: &str| -> Result<String> {
        token()
            .and_then(|t| std::str::from_utf8(t).ok())
            .map(str::to_string)
            .ok_or_else(|| parse_err(&format!("missing {what}")))
    };
    let width: usize = number("width")?.parse().map_err(|_| parse_err("bad width"))?;
    let height: usize = number("height")?.parse().map_err(|_| parse_err("bad height"))?;
    let scale: f64 = number("scale")?.parse().map_err(|_| parse_err("bad scale"))?;
    if width == 0 || height == 0 || scale == 0.0 || !scale.is_finite() {
        return Err(parse_err("invalid dimensions or scale"));
    }
    // exactly one whitespace byte separates the header from the raster
    let body = bytes.get(pos + 1..).ok_or_else(|| parse_err("truncated header"))?;
    let count = width * height * channels;
    if body.len() < count * 4 {
        return Err(parse_err("truncated raster"));
    }
    let little = scale < 0.0;
    let values: Vec<f32> = body[..count * 4]
        .chunks_exact(4)
        .map(|b| {
            let b = [b[0], b[1], b[2], b[3]];
            if little {
                f32::from_le_bytes(b)
            } else {
                f32::from_be_bytes(b)
            }
        })
        .collect();
    let row_len = width * channels;
    let data = values.chunks_exact(row_len).rev().flatten().copied().collect();
    Ok(Pfm {
        width,
        height,
        channels,
        data,
    })
}

/// `foo.pfm` -> `foo.alpha.pfm`
pub fn alpha_sibling(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.alpha.pfm"))
}

fn extension(path: &Path) -> String {
    path.extension()
        .map(|e| e.to_string_lossy().to_ascii_lowercase())
        .unwrap_or_default()
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(bytes).map_err(io_err(path))
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(io_err(path))
}

/// Writes RGBA: PFM (`PF` color plus `.alpha.pfm` sibling), PNG (RGBA) or PPM (alpha dropped).
pub fn write_rgba(path: &Path, img: &RgbaImage) -> Result<()> {
    let (w, h) = img.dims();
    match extension(path).as_str() {
        "pfm" => {
            let rgb = img.iter().flat_map(|p| [p.r, p.g, p.b]).collect();
            let alpha = img.iter().map(|p| p.a).collect();
            write_file(path, &encode_pfm(&Pfm { width: w, height: h, channels: 3, data: rgb }))?;
            write_file(
                &alpha_sibling(path),
                &encode_pfm(&Pfm { width: w, height: h, channels: 1, data: alpha }),
            )
        }
        "png" => {
            let raw: Vec<u8> = img
                .iter()
                .flat_map(|p| [encode_srgb(p.r), encode_srgb(p.g), encode_srgb(p.b), encode_alpha(p.a)])
                .collect();
            write_png(path, w, h, image::ColorType::Rgba8, &raw)
        }
        "ppm" => write_file(path, &encode_ppm(w, h, img.iter().map(|p| p.rgb()))),
        other => Err(unsupported(path, other)),
    }
}

/// Writes RGB: PFM (linear), PNG or PPM (8-bit sRGB).
pub fn write_rgb(path: &Path, img: &RgbImage) -> Result<()> {
    let (w, h) = img.dims();
    match extension(path).as_str() {
        "pfm" => {
            let data = img.iter().flat_map(|p| p.to_array()).collect();
            write_file(path, &encode_pfm(&Pfm { width: w, height: h, channels: 3, data }))
        }
        "png" => {
            let raw: Vec<u8> = img.iter().flat_map(|p| p.to_array().map(encode_srgb)).collect();
            write_png(path, w, h, image::ColorType::Rgb8, &raw)
        }
        "ppm" => write_file(path, &encode_ppm(w, h, img.iter().copied())),
        other => Err(unsupported(path, other)),
    }
}

/// Reads an RGBA image. PFM alpha comes from the `.alpha.pfm` sibling when
/// present and defaults to 1.
pub fn read_rgba(path: &Path) -> Result<RgbaImage> {
    match extension(path).as_str() {
        "pfm" => {
            let color = decode_pfm(&read_file(path)?, path)?;
            let (w, h) = (color.width, color.height);
            let alpha_path = alpha_sibling(path);
            let alpha = if alpha_path.exists() {
                let a = decode_pfm(&read_file(&alpha_path)?, &alpha_path)?;
                if (a.width, a.height, a.channels) != (w, h, 1) {
                    return Err(Error::Parse {
                        path: alpha_path,
                        message: "alpha map does not match the color map".into(),
                    });
                }
                Some(a.data)
            } else {
                None
            };
            let px = (0..w * h)
                .map(|i| {
                    let [r, g, b] = match color.channels {
                        3 => [color.data[3 * i], color.data[3 * i + 1], color.data[3 * i + 2]],
                        _ => [color.data[i]; 3],
                    };
                    Rgba::new(r, g, b, alpha.as_ref().map_or(1.0, |a| a[i]))
                })
                .collect();
            Grid::from_vec(w, h, px)
        }
        "png" | "ppm" | "pnm" => {
            let decoded = if extension(path) == "png" {
                image::load_from_memory_with_format(&read_file(path)?, image::ImageFormat::Png)
                    .map_err(|source| Error::Image { path: path.to_path_buf(), source })?
                    .to_rgba8()
            } else {
                decode_ppm(&read_file(path)?, path)?
            };
            let (w, h) = (decoded.width() as usize, decoded.height() as usize);
            let px = decoded
                .pixels()
                .map(|p| {
                    Rgba::new(decode_srgb(p[0]), decode_srgb(p[1]), decode_srgb(p[2]), decode_alpha(p[3]))
                })
                .collect();
            Grid::from_vec(w, h, px)
        }
        other => Err(unsupported(path, other)),
    }
}

fn write_png(path: &Path, w: usize, h: usize, color: image::ColorType, raw: &[u8]) -> Result<()> {
    let mut buf = std::io::Cursor::new(Vec::new());
    image::write_buffer_with_format(
        &mut buf,
        raw,
        w as u32,
        h as u32,
        color,
        image::ImageFormat::Png,
    )
    .map_err(|source| Error::Image { path: path.to_path_buf(), source })?;
    write_file(path, &buf.into_inner())
}

fn encode_ppm(w: usize, h: usize, px: impl Iterator<Item = Rgb>) -> Vec<u8> {
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    for p in px {
        out.extend(p.to_array().map(encode_srgb));
    }
    out
}

fn decode_ppm(bytes: &[u8], path: &Path) -> Result<image::RgbaImage> {
    let err = |m: &str| Error::Parse { path: path.to_path_buf(), message: m.into() };
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if bytes.get(pos) == Some(&b'#') {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(err("truncated header"));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    if fields[0] != "P6" || fields[3] != "255" {
        return Err(err("only binary 8-bit P6 is supported"));
    }
    let w: u32 = fields[1].parse().map_err(|_| err("bad width"))?;
    let h: u32 = fields[2].parse().map_err(|_| err("bad height"))?;
    let body = bytes.get(pos + 1..).ok_or_else(|| err("truncated raster"))?;
    let n = (w * h) as usize;
    if body.len() < n * 3 {
        return Err(err("truncated raster"));
    }
    let raw = body[..n * 3].chunks_exact(3).flat_map(|c| [c[0], c[1], c[2], 255]).collect();
    image::RgbaImage::from_raw(w, h, raw).ok_or_else(|| err("bad raster"))
}

fn unsupported(path: &Path, ext: &str) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: format!("unsupported image extension {ext:?} (expected pfm, png or ppm)"),
    }
}
