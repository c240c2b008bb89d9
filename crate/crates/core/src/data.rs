//! Domain types and the on-disk dataset format.
//!
//! A dataset is a line-delimited JSON manifest plus 8-bit RGB PNG files. Each
//! manifest line describes one image: its path (relative to the manifest),
//! a caption, and the annotated text regions. An optional leading
//! `{"manifest_meta": ...}` line carries free-form dataset metadata (e.g. mix
//! ratios) and survives a load/save round trip.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use image::RgbImage;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned pixel box, origin top-left, guaranteed non-empty and inside
/// its parent image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BBox {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl BBox {
    pub fn right(&self) -> u32 {
        self.x + self.w
    }

    pub fn bottom(&self) -> u32 {
        self.y + self.h
    }

    pub fn area(&self) -> u64 {
        self.w as u64 * self.h as u64
    }

    pub fn intersects(&self, other: &BBox) -> bool {
        self.x < other.right() && other.x < self.right() && self.y < other.bottom() && other.y < self.bottom()
    }
}

/// One line of text: content, placement, and the font it is set in.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextRegion {
    pub text: String,
    pub bbox: BBox,
    pub font_id: String,
    /// Glyph height in pixels.
    pub font_px: u32,
}

/// An image with its caption and text-region annotations; the unit of
/// training data.
#[derive(Debug, Clone)]
pub struct AnnotatedImage {
    /// Identifier derived from the image file stem; used to name derived
    /// artifacts such as hint files.
    pub id: String,
    pub image: RgbImage,
    pub caption: String,
    pub regions: Vec<TextRegion>,
}

impl AnnotatedImage {
    pub fn width(&self) -> u32 {
        self.image.width()
    }

    pub fn height(&self) -> u32 {
        self.image.height()
    }
}

/// The three conditioning-image kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HintKind {
    /// Target text rendered in a single generic font.
    Glyph,
    /// Edge maps of the text-box crops pasted onto a black canvas.
    Canny,
    /// Per-pixel text segmentation masks of the text-box crops.
    Font,
}

impl HintKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            HintKind::Glyph => "glyph",
            HintKind::Canny => "canny",
            HintKind::Font => "font",
        }
    }
}

impl std::str::FromStr for HintKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "glyph" => Ok(HintKind::Glyph),
            "canny" => Ok(HintKind::Canny),
            "font" => Ok(HintKind::Font),
            other => Err(Error::InvalidArgument(format!(
                "unknown hint kind {other:?} (expected glyph, canny or font)"
            ))),
        }
    }
}

/// Single-channel conditioning image in `[0,1]`, spatially aligned with its
/// source image and exactly zero outside all region boxes.
#[derive(Debug, Clone)]
pub struct HintImage {
    pub kind: HintKind,
    /// Row-major `h x w` values in `[0,1]`.
    pub pixels: ndarray::Array2<f64>,
    pub source_id: String,
}

impl HintImage {
    pub fn zeros(kind: HintKind, height: u32, width: u32, source_id: &str) -> Self {
        HintImage {
            kind,
            pixels: ndarray::Array2::zeros((height as usize, width as usize)),
            source_id: source_id.to_string(),
        }
    }

    /// 8-bit grayscale view for PNG export (values rounded).
    pub fn to_gray_image(&self) -> image::GrayImage {
        let (h, w) = self.pixels.dim();
        image::GrayImage::from_fn(w as u32, h as u32, |x, y| {
            let v = self.pixels[(y as usize, x as usize)].clamp(0.0, 1.0);
            image::Luma([(v * 255.0).round() as u8])
        })
    }
}

/// Raw manifest record as serialized; bboxes may overflow image bounds here.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RegionRecord {
    pub text: String,
    /// `[x, y, w, h]`, signed so that noisy annotations survive parsing.
    pub bbox: [i64; 4],
    pub font_id: String,
    pub font_px: u32,
}

/// One manifest line.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ManifestRecord {
    pub image_path: String,
    pub caption: String,
    pub regions: Vec<RegionRecord>,
}

/// Free-form manifest metadata (first line, optional).
pub type ManifestMeta = BTreeMap<String, serde_json::Value>;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MetaLine {
    manifest_meta: ManifestMeta,
}

/// Counters describing what loading had to fix up or drop.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    /// Regions whose text was empty after stripping whitespace.
    pub dropped_empty_text: usize,
    /// Regions whose bbox had zero area after clamping.
    pub dropped_zero_area: usize,
    /// Regions whose bbox had to be clamped to the image bounds.
    pub clamped: usize,
}

impl LoadReport {
    pub fn warnings(&self) -> usize {
        self.dropped_empty_text + self.dropped_zero_area
    }
}

/// A fully loaded dataset.
#[derive(Debug)]
pub struct Dataset {
    pub images: Vec<AnnotatedImage>,
    pub report: LoadReport,
    pub meta: Option<ManifestMeta>,
}

/// Clamp a raw `[x, y, w, h]` box to `w x h` image bounds. Returns `None` when
/// nothing remains.
pub fn clamp_bbox(raw: [i64; 4], img_w: u32, img_h: u32) -> Option<BBox> {
    let [x, y, w, h] = raw;
    let x0 = x.max(0);
    let y0 = y.max(0);
    let x1 = (x + w).min(img_w as i64);
    let y1 = (y + h).min(img_h as i64);
    if x1 <= x0 || y1 <= y0 {
        return None;
    }
    Some(BBox { x: x0 as u32, y: y0 as u32, w: (x1 - x0) as u32, h: (y1 - y0) as u32 })
}

/// Parse a manifest into its optional metadata line and records. Purely
/// textual: no image files are touched.
pub fn read_manifest(path: &Path) -> Result<(Option<ManifestMeta>, Vec<ManifestRecord>)> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut meta = None;
    let mut records = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if records.is_empty() && meta.is_none() && trimmed.contains("manifest_meta") {
            if let Ok(m) = serde_json::from_str::<MetaLine>(trimmed) {
                meta = Some(m.manifest_meta);
                continue;
            }
        }
        let record: ManifestRecord = serde_json::from_str(trimmed).map_err(|e| Error::ManifestParse {
            path: path.to_path_buf(),
            line: lineno + 1,
            msg: e.to_string(),
        })?;
        records.push(record);
    }
    Ok((meta, records))
}

/// Write a manifest (meta line first when present).
pub fn write_manifest(path: &Path, meta: Option<&ManifestMeta>, records: &[ManifestRecord]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut out = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    if let Some(meta) = meta {
        let line = serde_json::to_string(&MetaLine { manifest_meta: meta.clone() })?;
        writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
    }
    for record in records {
        writeln!(out, "{}", serde_json::to_string(record)?).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

/// Load a dataset: parse the manifest, read every image, clamp bboxes and drop
/// unusable regions (counted in the report).
pub fn load_dataset(manifest_path: &Path) -> Result<Dataset> {
    let (meta, records) = read_manifest(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let mut report = LoadReport::default();
    let mut images = Vec::with_capacity(records.len());
    for (index, record) in records.iter().enumerate() {
        let image_path = base.join(&record.image_path);
        if !image_path.is_file() {
            return Err(Error::MissingImage { index, path: image_path });
        }
        let image = image::open(&image_path)?.to_rgb8();
        if image.width() != image.height() {
            return Err(Error::InvalidArgument(format!(
                "image {} is {}x{}, expected a square image",
                image_path.display(),
                image.width(),
                image.height()
            )));
        }
        let id = Path::new(&record.image_path)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| format!("record{index}"));
        let mut regions = Vec::new();
        for raw in &record.regions {
            if raw.text.trim().is_empty() {
                report.dropped_empty_text += 1;
                continue;
            }
            match clamp_bbox(raw.bbox, image.width(), image.height()) {
                Some(bbox) => {
                    if raw.bbox != [bbox.x as i64, bbox.y as i64, bbox.w as i64, bbox.h as i64] {
                        report.clamped += 1;
                    }
                    regions.push(TextRegion {
                        text: raw.text.clone(),
                        bbox,
                        font_id: raw.font_id.clone(),
                        font_px: raw.font_px,
                    });
                }
                None => report.dropped_zero_area += 1,
            }
        }
        images.push(AnnotatedImage { id, image, caption: record.caption.clone(), regions });
    }
    if report.warnings() > 0 {
        log::warn!(
            "dataset {}: dropped {} empty-text and {} zero-area regions, clamped {} bboxes",
            manifest_path.display(),
            report.dropped_empty_text,
            report.dropped_zero_area,
            report.clamped
        );
    }
    Ok(Dataset { images, report, meta })
}

/// Serialize a loaded dataset back into manifest records (paths relative to
/// the manifest directory are preserved by callers).
pub fn to_records(images: &[AnnotatedImage], image_dir: &str) -> Vec<ManifestRecord> {
    images
        .iter()
        .map(|img| ManifestRecord {
            image_path: format!("{image_dir}/{}.png", img.id),
            caption: img.caption.clone(),
            regions: img
                .regions
                .iter()
                .map(|r| RegionRecord {
                    text: r.text.clone(),
                    bbox: [r.bbox.x as i64, r.bbox.y as i64, r.bbox.w as i64, r.bbox.h as i64],
                    font_id: r.font_id.clone(),
                    font_px: r.font_px,
                })
                .collect(),
        })
        .collect()
}

/// Save PNGs plus manifest for a set of annotated images.
pub fn save_dataset(
    out_dir: &Path,
    images: &[AnnotatedImage],
    meta: Option<&ManifestMeta>,
) -> Result<PathBuf> {
    let image_dir = out_dir.join("images");
    fs::create_dir_all(&image_dir).map_err(|e| Error::io(&image_dir, e))?;
    for img in images {
        let path = image_dir.join(format!("{}.png", img.id));
        img.image.save(&path)?;
    }
    let manifest_path = out_dir.join("manifest.jsonl");
    write_manifest(&manifest_path, meta, &to_records(images, "images"))?;
    Ok(manifest_path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solid_image(dir: &Path, name: &str, size: u32) -> String {
        let img = RgbImage::from_pixel(size, size, image::Rgb([200, 200, 200]));
        let path = dir.join(name);
        img.save(&path).unwrap();
        name.to_string()
    }

    fn record(image_path: &str, regions: Vec<RegionRecord>) -> ManifestRecord {
        ManifestRecord { image_path: image_path.into(), caption: "a test card".into(), regions }
    }

    fn region(text: &str, bbox: [i64; 4]) -> RegionRecord {
        RegionRecord { text: text.into(), bbox, font_id: "sans".into(), font_px: 12 }
    }

    #[test]
    fn loads_two_valid_records() {
        let dir = tempfile::tempdir().unwrap();
        let a = solid_image(dir.path(), "a.png", 64);
        let b = solid_image(dir.path(), "b.png", 64);
        let records = vec![
            record(&a, vec![region("HI", [2, 2, 20, 14])]),
            record(&b, vec![region("YO", [4, 4, 20, 14])]),
        ];
        let manifest = dir.path().join("manifest.jsonl");
        write_manifest(&manifest, None, &records).unwrap();
        let ds = load_dataset(&manifest).unwrap();
        assert_eq!(ds.images.len(), 2);
        assert_eq!(ds.report, LoadReport::default());
    }

    #[test]
    fn clamps_overflowing_bbox_to_image_edge() {
        let dir = tempfile::tempdir().unwrap();
        let a = solid_image(dir.path(), "a.png", 64);
        let records = vec![record(&a, vec![region("HI", [50, 10, 17, 12])])];
        let manifest = dir.path().join("manifest.jsonl");
        write_manifest(&manifest, None, &records).unwrap();
        let ds = load_dataset(&manifest).unwrap();
        let bbox = ds.images[0].regions[0].bbox;
        assert_eq!(bbox, BBox { x: 50, y: 10, w: 14, h: 12 });
        assert_eq!(ds.report.clamped, 1);
    }

    #[test]
    fn drops_whitespace_only_text_with_warning() {
        let dir = tempfile::tempdir().unwrap();
        let a = solid_image(dir.path(), "a.png", 64);
        let records = vec![record(&a, vec![region("  ", [2, 2, 20, 14])])];
        let manifest = dir.path().join("manifest.jsonl");
        write_manifest(&manifest, None, &records).unwrap();
        let ds = load_dataset(&manifest).unwrap();
        assert!(ds.images[0].regions.is_empty());
        assert_eq!(ds.report.dropped_empty_text, 1);
        assert_eq!(ds.report.warnings(), 1);
    }

    #[test]
    fn malformed_record_reports_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = dir.path().join("manifest.jsonl");
        std::fs::write(&manifest, "{\"image_path\": \"a.png\", \"caption\": 3}\n").unwrap();
        match load_dataset(&manifest) {
            Err(Error::ManifestParse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_image_reports_path() {
        let dir = tempfile::tempdir().unwrap();
        let records = vec![record("nope.png", vec![])];
        let manifest = dir.path().join("manifest.jsonl");
        write_manifest(&manifest, None, &records).unwrap();
        match load_dataset(&manifest) {
            Err(Error::MissingImage { path, .. }) => {
                assert!(path.to_string_lossy().ends_with("nope.png"))
            }
            other => panic!("expected missing-image error, got {other:?}"),
        }
    }

    #[test]
    fn manifest_round_trip_is_semantically_identical() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = dir.path().join("manifest.jsonl");
        let mut meta = ManifestMeta::new();
        meta.insert("mix_ratio".into(), serde_json::json!("3:1"));
        let records = vec![
            record("a.png", vec![region("HI", [2, 2, 20, 14])]),
            record("b.png", vec![]),
        ];
        write_manifest(&manifest, Some(&meta), &records).unwrap();
        let (meta2, records2) = read_manifest(&manifest).unwrap();
        assert_eq!(meta2.as_ref(), Some(&meta));
        assert_eq!(records2, records);
        let manifest2 = dir.path().join("again.jsonl");
        write_manifest(&manifest2, meta2.as_ref(), &records2).unwrap();
        assert_eq!(
            std::fs::read_to_string(&manifest).unwrap(),
            std::fs::read_to_string(&manifest2).unwrap()
        );
    }

    #[test]
    fn clamp_rejects_fully_outside_boxes() {
        assert_eq!(clamp_bbox([70, 0, 5, 5], 64, 64), None);
        assert_eq!(clamp_bbox([0, 0, 0, 5], 64, 64), None);
        assert_eq!(clamp_bbox([-3, -3, 4, 4], 64, 64), Some(BBox { x: 0, y: 0, w: 1, h: 1 }));
    }
}
