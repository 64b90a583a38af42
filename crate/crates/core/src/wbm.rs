//! Wafer-bin-map ingestion: text formats, bivaluing, majority-vote
//! compression and row-major flattening.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const RAW_SIDE: usize = 52;
pub const RAW_CELLS: usize = RAW_SIDE * RAW_SIDE;
pub const COMPRESSED_SIDE: usize = 8;
pub const FEATURES: usize = COMPRESSED_SIDE * COMPRESSED_SIDE;

/// The nine single-type defect classes.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DefectLabel {
    Normal,
    Center,
    Doughnut,
    #[serde(rename = "Edge-Loc")]
    EdgeLoc,
    #[serde(rename = "Edge-Ring")]
    EdgeRing,
    Loc,
    #[serde(rename = "Near-Full")]
    NearFull,
    Scratch,
    Random,
}

impl DefectLabel {
    pub const ALL: [DefectLabel; 9] = [
        DefectLabel::Normal,
        DefectLabel::Center,
        DefectLabel::Doughnut,
        DefectLabel::EdgeLoc,
        DefectLabel::EdgeRing,
        DefectLabel::Loc,
        DefectLabel::NearFull,
        DefectLabel::Scratch,
        DefectLabel::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DefectLabel::Normal => "Normal",
            DefectLabel::Center => "Center",
            DefectLabel::Doughnut => "Doughnut",
            DefectLabel::EdgeLoc => "Edge-Loc",
            DefectLabel::EdgeRing => "Edge-Ring",
            DefectLabel::Loc => "Loc",
            DefectLabel::NearFull => "Near-Full",
            DefectLabel::Scratch => "Scratch",
            DefectLabel::Random => "Random",
        }
    }

    /// Position in `ALL`.
    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&l| l == self).unwrap()
    }
}

impl fmt::Display for DefectLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DefectLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::UnknownLabel(s.to_string()))
    }
}

/// 52×52 trivalued map: 0 = no chip, 1 = good chip, 2 = defective chip.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawWaferMap {
    grid: Vec<u8>,
    pub label: DefectLabel,
}

impl RawWaferMap {
    pub fn new(grid: Vec<u8>, label: DefectLabel) -> Result<Self> {
        if grid.len() != RAW_CELLS {
            return Err(Error::DimensionMismatch {
                expected: RAW_CELLS,
                found: grid.len(),
            });
        }
        if let Some(&bad) = grid.iter().find(|&&c| c > 2) {
            return Err(Error::Format(format!("raw cell value {bad} outside 0..=2")));
        }
        Ok(RawWaferMap { grid, label })
    }

    pub fn grid(&self) -> &[u8] {
        &self.grid
    }

    pub fn has_defect_cells(&self) -> bool {
        self.grid.contains(&2)
    }
}

/// 52×52 map of defect bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryWaferMap {
    grid: Vec<u8>,
}

impl BinaryWaferMap {
    pub fn new(grid: Vec<u8>) -> Result<Self> {
        if grid.len() != RAW_CELLS {
            return Err(Error::DimensionMismatch {
                expected: RAW_CELLS,
                found: grid.len(),
            });
        }
        if grid.iter().any(|&c| c > 1) {
            return Err(Error::Format("binary cell outside 0..=1".into()));
        }
        Ok(BinaryWaferMap { grid })
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.grid[row * RAW_SIDE + col]
    }

    pub fn grid(&self) -> &[u8] {
        &self.grid
    }
}

/// 8×8 map of defect bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompressedMap {
    pub grid: [[u8; COMPRESSED_SIDE]; COMPRESSED_SIDE],
}

/// Bit vector fed to the networks, with an optional class label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatSample {
    pub bits: Vec<u8>,
    pub label: Option<DefectLabel>,
}

impl FlatSample {
    pub fn new(bits: Vec<u8>, label: Option<DefectLabel>) -> Self {
        FlatSample { bits, label }
    }
}

/// Maps raw cells to defect bits: 2 becomes 1, both 0 and 1 become 0.
pub fn bivalue(raw: &RawWaferMap) -> BinaryWaferMap {
    BinaryWaferMap {
        grid: raw.grid.iter().map(|&c| u8::from(c == 2)).collect(),
    }
}

/// Band boundaries `⌊len·k/parts⌋` for `k = 0..=parts`.
pub fn band_boundaries(len: usize, parts: usize) -> Vec<usize> {
    (0..=parts).map(|k| len * k / parts).collect()
}

/// Majority-vote downsampling of a square grid. A block maps to 1 when at
/// least half of its cells are 1.
pub fn majority_compress(grid: &[u8], side: usize, out_side: usize) -> Vec<u8> {
    let bands = band_boundaries(side, out_side);
    let mut out = vec![0u8; out_side * out_side];
    for br in 0..out_side {
        for bc in 0..out_side {
            let (r0, r1) = (bands[br], bands[br + 1]);
            let (c0, c1) = (bands[bc], bands[bc + 1]);
            let ones: usize = (r0..r1)
                .map(|r| {
                    grid[r * side + c0..r * side + c1]
                        .iter()
                        .map(|&b| b as usize)
                        .sum::<usize>()
                })
                .sum();
            let size = (r1 - r0) * (c1 - c0);
            out[br * out_side + bc] = u8::from(2 * ones >= size);
        }
    }
    out
}

/// 52×52 → 8×8 by majority vote over bands of sizes 6,7,6,7,6,7,6,7.
pub fn compress(bin: &BinaryWaferMap) -> CompressedMap {
    let flat = majority_compress(&bin.grid, RAW_SIDE, COMPRESSED_SIDE);
    let mut grid = [[0u8; COMPRESSED_SIDE]; COMPRESSED_SIDE];
    for (r, row) in grid.iter_mut().enumerate() {
        row.copy_from_slice(&flat[r * COMPRESSED_SIDE..(r + 1) * COMPRESSED_SIDE]);
    }
    CompressedMap { grid }
}

/// Row-major flattening: `bits[8r + c] = grid[r][c]`.
pub fn flatten(c: &CompressedMap, label: Option<DefectLabel>) -> FlatSample {
    FlatSample {
        bits: c.grid.iter().flatten().copied().collect(),
        label,
    }
}

/// Inverse of [`flatten`].
pub fn unflatten(s: &FlatSample) -> Result<CompressedMap> {
    if s.bits.len() != FEATURES {
        return Err(Error::DimensionMismatch {
            expected: FEATURES,
            found: s.bits.len(),
        });
    }
    let mut grid = [[0u8; COMPRESSED_SIDE]; COMPRESSED_SIDE];
    for (i, &b) in s.bits.iter().enumerate() {
        grid[i / COMPRESSED_SIDE][i % COMPRESSED_SIDE] = b;
    }
    Ok(CompressedMap { grid })
}

/// Full preprocessing of one raw map.
pub fn preprocess(raw: &RawWaferMap) -> FlatSample {
    flatten(&compress(&bivalue(raw)), Some(raw.label))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum DatasetFormat {
    /// `LABEL;c0,...,c2703`
    WbmTxt,
    /// `LABEL,b0,...,b63`
    FlatCsv,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Dataset {
    Raw(Vec<RawWaferMap>),
    Flat(Vec<FlatSample>),
}

fn parse_cells(text: &str, sep: char, expected: usize, max: u8, line: usize) -> Result<Vec<u8>> {
    let cells: Vec<&str> = text.split(sep).collect();
    if cells.len() != expected {
        return Err(Error::Parse {
            line,
            reason: format!("expected {expected} cells, found {}", cells.len()),
        });
    }
    cells
        .iter()
        .map(|c| match c.parse::<u8>() {
            Ok(v) if v <= max && c.len() == 1 => Ok(v),
            _ => Err(Error::Parse {
                line,
                reason: format!("invalid cell {c:?}"),
            }),
        })
        .collect()
}

fn parse_label(text: &str, line: usize) -> Result<DefectLabel> {
    if text.is_empty() {
        return Err(Error::Parse {
            line,
            reason: "empty label".into(),
        });
    }
    text.parse()
}

fn records(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.is_empty())
}

/// Parses WBM-TXT v1 text.
pub fn parse_wbm_txt(text: &str) -> Result<Vec<RawWaferMap>> {
    records(text)
        .map(|(line, l)| {
            let (label, cells) = l.split_once(';').ok_or(Error::Parse {
                line,
                reason: "missing ';' after label".into(),
            })?;
            let label = parse_label(label, line)?;
            let grid = parse_cells(cells, ',', RAW_CELLS, 2, line)?;
            Ok(RawWaferMap { grid, label })
        })
        .collect()
}

/// Parses FLAT-CSV v1 text with `width` feature columns.
pub fn parse_flat_csv(text: &str, width: usize) -> Result<Vec<FlatSample>> {
    records(text)
        .map(|(line, l)| {
            let (label, bits) = l.split_once(',').ok_or(Error::Parse {
                line,
                reason: "missing ',' after label".into(),
            })?;
            let label = parse_label(label, line)?;
            let bits = parse_cells(bits, ',', width, 1, line)?;
            Ok(FlatSample {
                bits,
                label: Some(label),
            })
        })
        .collect()
}

pub fn parse_dataset(path: &Path, format: DatasetFormat) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    Ok(match format {
        DatasetFormat::WbmTxt => Dataset::Raw(parse_wbm_txt(&text)?),
        DatasetFormat::FlatCsv => Dataset::Flat(parse_flat_csv(&text, FEATURES)?),
    })
}

/// Renders samples as FLAT-CSV v1. Unlabeled samples are refused.
pub fn to_flat_csv(samples: &[FlatSample]) -> Result<String> {
    let mut out = String::new();
    for s in samples {
        let label = s
            .label
            .ok_or_else(|| Error::Format("FLAT-CSV rows need a label".into()))?;
        out.push_str(label.name());
        for b in &s.bits {
            out.push(',');
            out.push(if *b == 1 { '1' } else { '0' });
        }
        out.push('\n');
    }
    Ok(out)
}

/// Per-class counts of an ingest run. `without_defect_cells` counts maps
/// containing no 2s, which bivalue to all zeros; a high count on a non-Normal
/// class usually means the input was already binary.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub total: usize,
    pub per_class: BTreeMap<String, usize>,
    pub without_defect_cells: usize,
}

/// Preprocesses every raw map and tallies the result.
pub fn ingest(maps: &[RawWaferMap]) -> (Vec<FlatSample>, IngestSummary) {
    let mut summary = IngestSummary {
        per_class: DefectLabel::ALL
            .iter()
            .map(|l| (l.name().to_string(), 0))
            .collect(),
        ..IngestSummary::default()
    };
    let samples = maps
        .iter()
        .map(|m| {
            summary.total += 1;
            *summary
                .per_class
                .entry(m.label.name().to_string())
                .or_default() += 1;
            summary.without_defect_cells += usize::from(!m.has_defect_cells());
            preprocess(m)
        })
        .collect();
    (samples, summary)
}

/// Renders raw maps as WBM-TXT v1.
pub fn to_wbm_txt(maps: &[RawWaferMap]) -> String {
    let mut out = String::new();
    for m in maps {
        out.push_str(m.label.name());
        out.push(';');
        for (i, c) in m.grid.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push(char::from(b'0' + c));
        }
        out.push('\n');
    }
    out
}
