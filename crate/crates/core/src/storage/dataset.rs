//! Fixed-width binary dataset files and partition-level sampling.
//!
//! Layout, little-endian:
//!
//! ```text
//! "CLBD" | u32 version | u64 count | u32 length | u8 value width (4 or 8)
//! count x ( u64 id | length x value )
//! ```

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::series::{DataSeries, Dataset};

pub const DATASET_MAGIC: &[u8; 4] = b"CLBD";
pub const DATASET_VERSION: u32 = 1;
pub const DATASET_EXTENSION: &str = "clbd";
const HEADER_LEN: usize = 4 + 4 + 8 + 4 + 1;

/// Header fields of a dataset file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetHeader {
    pub count: u64,
    pub length: u32,
    pub value_width: u8,
}

impl DatasetHeader {
    pub fn record_len(&self) -> usize {
        8 + self.length as usize * self.value_width as usize
    }
}

pub(crate) fn encode_record(out: &mut Vec<u8>, series: &DataSeries) {
    out.extend_from_slice(&series.id.to_le_bytes());
    for v in series.values() {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
}

pub(crate) fn decode_record(
    bytes: &[u8],
    value_width: u8,
    path: &Path,
    location: impl Fn() -> String,
) -> Result<DataSeries> {
    let id = u64::from_le_bytes(bytes[..8].try_into().expect("8-byte id"));
    let body = &bytes[8..];
    let values: Vec<f64> = match value_width {
        4 => body
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes(c.try_into().expect("4 bytes"))))
            .collect(),
        8 => body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect(),
        w => return Err(Error::parse(path, location(), format!("unsupported value width {w}"))),
    };
    DataSeries::new(id, values).map_err(|e| Error::parse(path, location(), e.to_string()))
}

/// Writes `series` as one dataset file with 32-bit values.
pub fn write_dataset(path: &Path, series: &[DataSeries]) -> Result<()> {
    let length = series.first().map_or(0, DataSeries::len);
    if series.iter().any(|s| s.len() != length) {
        return Err(Error::Input("series lengths differ".into()));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut buf = Vec::with_capacity(HEADER_LEN + series.len() * (8 + 4 * length));
    buf.extend_from_slice(DATASET_MAGIC);
    buf.extend_from_slice(&DATASET_VERSION.to_le_bytes());
    buf.extend_from_slice(&(series.len() as u64).to_le_bytes());
    buf.extend_from_slice(&(length as u32).to_le_bytes());
    buf.push(4);
    for s in series {
        encode_record(&mut buf, s);
    }
    w.write_all(&buf).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

fn parse_header(path: &Path, bytes: &[u8], file_len: usize) -> Result<DatasetHeader> {
    if bytes.len() < HEADER_LEN || file_len < HEADER_LEN {
        return Err(Error::parse(path, "header", "file shorter than header"));
    }
    if &bytes[..4] != DATASET_MAGIC {
        return Err(Error::parse(path, "header", "bad magic, expected CLBD"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != DATASET_VERSION {
        return Err(Error::parse(path, "header", format!("unsupported version {version}")));
    }
    let header = DatasetHeader {
        count: u64::from_le_bytes(bytes[8..16].try_into().unwrap()),
        length: u32::from_le_bytes(bytes[16..20].try_into().unwrap()),
        value_width: bytes[20],
    };
    if header.value_width != 4 && header.value_width != 8 {
        return Err(Error::parse(
            path,
            "header",
            format!("unsupported value width {}", header.value_width),
        ));
    }
    let expected = header.count as usize * header.record_len();
    if file_len - HEADER_LEN != expected {
        return Err(Error::parse(
            path,
            "body",
            format!("body holds {} bytes, header implies {expected}", file_len - HEADER_LEN),
        ));
    }
    Ok(header)
}

/// Reads the header only.
pub fn read_dataset_header(path: &Path) -> Result<DatasetHeader> {
    let mut head = [0u8; HEADER_LEN];
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let len = file.metadata().map_err(|e| Error::io(path, e))?.len() as usize;
    BufReader::new(file)
        .read_exact(&mut head)
        .map_err(|_| Error::parse(path, "header", "file shorter than header"))?;
    parse_header(path, &head, len)
}

/// Reads every record of one dataset file.
pub fn read_dataset_file(path: &Path) -> Result<Vec<DataSeries>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let header = parse_header(path, &bytes, bytes.len())?;
    bytes[HEADER_LEN..]
        .chunks_exact(header.record_len())
        .enumerate()
        .map(|(i, rec)| decode_record(rec, header.value_width, path, || format!("record {i}")))
        .collect()
}

/// Reads and concatenates dataset files in the given order.
pub fn read_datasets(paths: &[PathBuf]) -> Result<Dataset> {
    let mut all = Vec::new();
    for p in paths {
        all.extend(read_dataset_file(p)?);
    }
    Dataset::new(all)
}

/// Dataset files (`*.clbd`) in `dir`, sorted by name. A path to a single
/// file yields just that file.
pub fn list_dataset_files(dir: &Path) -> Result<Vec<PathBuf>> {
    if dir.is_file() {
        return Ok(vec![dir.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == DATASET_EXTENSION))
        .collect();
    files.sort();
    Ok(files)
}

/// Splits `series` into files of at most `per_file` records named
/// `part-00000.clbd`, `part-00001.clbd`, ... inside `dir`.
pub fn write_sharded(dir: &Path, series: &[DataSeries], per_file: usize) -> Result<Vec<PathBuf>> {
    if per_file == 0 {
        return Err(Error::Config("records per file must be at least 1".into()));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    series
        .chunks(per_file)
        .enumerate()
        .map(|(i, chunk)| {
            let path = dir.join(format!("part-{i:05}.{DATASET_EXTENSION}"));
            write_dataset(&path, chunk).map(|_| path)
        })
        .collect()
}

/// Reads a CSV export: one series per line, id in column 0.
pub fn read_csv(csv_path: &Path) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(csv_path)
        .map_err(|e| Error::parse(csv_path, "open", e.to_string()))?;
    let mut series = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let loc = || format!("line {}", line + 1);
        let row = row.map_err(|e| Error::parse(csv_path, loc(), e.to_string()))?;
        let mut fields = row.iter();
        let id: u64 = fields
            .next()
            .ok_or_else(|| Error::parse(csv_path, loc(), "missing id"))?
            .parse()
            .map_err(|e: std::num::ParseIntError| Error::parse(csv_path, loc(), e.to_string()))?;
        let values = fields
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::parse(csv_path, loc(), e.to_string()))?;
        series.push(DataSeries::new(id, values).map_err(|e| Error::parse(csv_path, loc(), e.to_string()))?);
    }
    // validates common length and unique ids
    Dataset::new(series)
}

/// Converts a CSV export into sharded dataset files.
pub fn import_csv(csv_path: &Path, out_dir: &Path, per_file: usize) -> Result<Vec<PathBuf>> {
    write_sharded(out_dir, read_csv(csv_path)?.as_slice(), per_file)
}

/// Picks `ceil(alpha * files)` whole files uniformly at random and returns
/// them in name order.
pub fn choose_sample_files(inputs: &[PathBuf], alpha: f64, seed: u64) -> Result<Vec<PathBuf>> {
    if inputs.is_empty() {
        return Err(Error::io(
            PathBuf::new(),
            std::io::Error::new(std::io::ErrorKind::NotFound, "no input dataset files"),
        ));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Config(format!("sample fraction {alpha} must lie in (0, 1]")));
    }
    // tolerate representation error such as 0.3 * 10 = 3.0000000000000004
    let wanted = ((alpha * inputs.len() as f64) - 1e-9).ceil().max(1.0) as usize;
    let wanted = wanted.min(inputs.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = rand::seq::index::sample(&mut rng, inputs.len(), wanted).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| inputs[i].clone()).collect())
}

/// Partition-level sample of the input files, loaded into memory.
pub fn sample_partitions(inputs: &[PathBuf], alpha: f64, seed: u64) -> Result<Dataset> {
    read_datasets(&choose_sample_files(inputs, alpha, seed)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(count: usize, len: usize) -> Vec<DataSeries> {
        (0..count)
            .map(|i| DataSeries::new(i as u64, (0..len).map(|j| (i * 10 + j) as f64 * 0.5).collect()).unwrap())
            .collect()
    }

    #[test]
    fn write_then_read() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.clbd");
        let data = series(5, 3);
        write_dataset(&path, &data).unwrap();
        assert_eq!(read_dataset_file(&path).unwrap(), data);
        let header = read_dataset_header(&path).unwrap();
        assert_eq!(header, DatasetHeader { count: 5, length: 3, value_width: 4 });
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.clbd");
        write_dataset(&path, &series(2, 2)).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        bytes.pop();
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(read_dataset_file(&path), Err(Error::Parse { .. })));
        bytes[0] = b'X';
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(read_dataset_file(&path), Err(Error::Parse { .. })));
    }

    #[test]
    fn reads_double_width_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("wide.clbd");
        let mut bytes = Vec::new();
        bytes.extend_from_slice(DATASET_MAGIC);
        bytes.extend_from_slice(&1u32.to_le_bytes());
        bytes.extend_from_slice(&1u64.to_le_bytes());
        bytes.extend_from_slice(&2u32.to_le_bytes());
        bytes.push(8);
        bytes.extend_from_slice(&9u64.to_le_bytes());
        bytes.extend_from_slice(&0.1f64.to_le_bytes());
        bytes.extend_from_slice(&(-2.5f64).to_le_bytes());
        fs::write(&path, bytes).unwrap();
        let got = read_dataset_file(&path).unwrap();
        assert_eq!(got[0].id, 9);
        assert_eq!(got[0].values(), &[0.1, -2.5]);
    }

    #[test]
    fn sharding_and_sampling() {
        let dir = tempfile::tempdir().unwrap();
        let files = write_sharded(dir.path(), &series(100, 2), 1).unwrap();
        assert_eq!(files.len(), 100);
        assert_eq!(list_dataset_files(dir.path()).unwrap(), files);

        assert_eq!(choose_sample_files(&files, 1.0, 3).unwrap(), files);
        let ten = &files[..10];
        let three = choose_sample_files(ten, 0.3, 5).unwrap();
        assert_eq!(three.len(), 3);
        assert_eq!(three, choose_sample_files(ten, 0.3, 5).unwrap());
        assert_eq!(sample_partitions(&files, 0.1, 1).unwrap().len(), 10);
        assert!(sample_partitions(&[], 0.5, 1).is_err());
        assert!(matches!(choose_sample_files(&files, 0.0, 1), Err(Error::Config(_))));
    }

    #[test]
    fn csv_import() {
        let dir = tempfile::tempdir().unwrap();
        let csv_path = dir.path().join("in.csv");
        fs::write(&csv_path, "7, 1.0, 2.0, 3.0\n8,4,5,6\n").unwrap();
        let out = dir.path().join("out");
        let files = import_csv(&csv_path, &out, 10).unwrap();
        let got = read_datasets(&files).unwrap();
        assert_eq!(got.len(), 2);
        assert_eq!(got.as_slice()[1].id, 8);
        assert_eq!(got.as_slice()[1].values(), &[4.0, 5.0, 6.0]);

        fs::write(&csv_path, "1,1.0,2.0\n2,1.0\n").unwrap();
        assert!(import_csv(&csv_path, &out, 10).is_err());
        fs::write(&csv_path, "x,1.0\n").unwrap();
        assert!(matches!(import_csv(&csv_path, &out, 10), Err(Error::Parse { .. })));
    }
}
