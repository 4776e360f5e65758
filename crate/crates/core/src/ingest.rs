//! Delimited-file ingestion, level-to-change transforms and alignment.

use std::fmt;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::PairedSeries;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnSelector {
    Name(String),
    Index(usize),
}

impl fmt::Display for ColumnSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnSelector::Name(n) => f.write_str(n),
            ColumnSelector::Index(i) => write!(f, "{i}"),
        }
    }
}

impl FromStr for ColumnSelector {
    type Err = Error;

    /// Bare integers select by 0-based position, anything else by header name.
    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::InvalidParameter("empty column selector".into()));
        }
        Ok(match s.parse::<usize>() {
            Ok(i) => ColumnSelector::Index(i),
            Err(_) => ColumnSelector::Name(s.to_string()),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    #[default]
    None,
    ArithmeticChange,
    LogReturn,
    PctReturn,
}

impl Transform {
    pub fn as_str(self) -> &'static str {
        match self {
            Transform::None => "none",
            Transform::ArithmeticChange => "diff",
            Transform::LogReturn => "log",
            Transform::PctReturn => "pct",
        }
    }
}

impl FromStr for Transform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Transform::None),
            "diff" | "arithmetic_change" => Ok(Transform::ArithmeticChange),
            "log" | "log_return" => Ok(Transform::LogReturn),
            "pct" | "pct_return" => Ok(Transform::PctReturn),
            other => Err(Error::InvalidParameter(format!("unknown transform {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub path: PathBuf,
    pub column: ColumnSelector,
    pub transform: Transform,
    pub delimiter: u8,
    /// Informational only.
    pub frequency: Option<String>,
}

impl ColumnSpec {
    pub fn new(path: impl Into<PathBuf>, column: ColumnSelector) -> Self {
        Self {
            path: path.into(),
            column,
            transform: Transform::None,
            delimiter: b',',
            frequency: None,
        }
    }
}

/// Values of one column keyed by row. Keys come from the first column when
/// the value column is not the first one, otherwise from the row number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadedColumn {
    pub pairs: Vec<(String, f64)>,
    pub dropped: usize,
    pub header: Option<Vec<String>>,
}

fn parse_finite(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

pub fn load_column(spec: &ColumnSpec) -> Result<LoadedColumn> {
    let path = spec.path.as_path();
    if !path.exists() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(spec.delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(File::open(path)?);
    let mut rows = reader.records();
    let Some(first) = rows.next().transpose()? else {
        return Err(Error::EmptyAfterCleaning {
            path: path.to_path_buf(),
            dropped: 0,
        });
    };

    let no_such = || Error::NoSuchColumn {
        path: path.to_path_buf(),
        column: spec.column.to_string(),
    };
    let (index, header, first_is_data) = match &spec.column {
        ColumnSelector::Name(name) => {
            let idx = first.iter().position(|h| h == name).ok_or_else(no_such)?;
            (idx, Some(first.iter().map(str::to_string).collect()), false)
        }
        ColumnSelector::Index(idx) => {
            let cell = first.get(*idx).ok_or_else(no_such)?;
            if parse_finite(cell).is_some() {
                (*idx, None, true)
            } else {
                (*idx, Some(first.iter().map(str::to_string).collect()), false)
            }
        }
    };

    let mut pairs = Vec::new();
    let mut dropped = 0;
    let mut row_no = 0usize;
    let mut take = |record: &csv::StringRecord, pairs: &mut Vec<(String, f64)>, dropped: &mut usize| {
        let key = if index == 0 {
            row_no.to_string()
        } else {
            record.get(0).unwrap_or_default().to_string()
        };
        row_no += 1;
        match record.get(index).and_then(parse_finite) {
            Some(v) => pairs.push((key, v)),
            None => *dropped += 1,
        }
    };
    if first_is_data {
        take(&first, &mut pairs, &mut dropped);
    }
    for record in rows {
        take(&record?, &mut pairs, &mut dropped);
    }
    if pairs.is_empty() {
        return Err(Error::EmptyAfterCleaning {
            path: path.to_path_buf(),
            dropped,
        });
    }
    Ok(LoadedColumn {
        pairs,
        dropped,
        header,
    })
}

pub fn transform_levels(values: &[f64], transform: Transform) -> Result<Vec<f64>> {
    if transform == Transform::None {
        return Ok(values.to_vec());
    }
    if values.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: values.len(),
        });
    }
    if matches!(transform, Transform::LogReturn | Transform::PctReturn) {
        if let Some(index) = values.iter().position(|v| *v <= 0.0) {
            return Err(Error::NonPositiveLevel {
                index,
                value: values[index],
            });
        }
    }
    Ok(values
        .windows(2)
        .map(|w| match transform {
            Transform::ArithmeticChange => w[1] - w[0],
            Transform::LogReturn => (w[1] / w[0]).ln(),
            Transform::PctReturn => w[1] / w[0] - 1.0,
            Transform::None => unreachable!(),
        })
        .collect())
}

/// Transforms a keyed column; each change takes the key of the later level.
pub fn transform_keyed(pairs: &[(String, f64)], transform: Transform) -> Result<Vec<(String, f64)>> {
    let values: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let changed = transform_levels(&values, transform)?;
    let skip = pairs.len() - changed.len();
    Ok(pairs[skip..]
        .iter()
        .zip(changed)
        .map(|((k, _), v)| (k.clone(), v))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlignPolicy {
    #[default]
    InnerJoinOnKey,
    Positional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinStats {
    pub left: usize,
    pub right: usize,
    pub matched: usize,
}

/// Pairs two keyed columns. The inner join keeps keys present in both, in
/// the order they appear in `a`; a key repeated in `b` matches its first
/// occurrence.
pub fn align(a: &[(String, f64)], b: &[(String, f64)], policy: AlignPolicy) -> Result<(PairedSeries, JoinStats)> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = match policy {
        AlignPolicy::Positional => a.iter().zip(b).map(|(p, q)| (p.1, q.1)).unzip(),
        AlignPolicy::InnerJoinOnKey => {
            let mut lookup = std::collections::HashMap::with_capacity(b.len());
            for (k, v) in b {
                lookup.entry(k.as_str()).or_insert(*v);
            }
            a.iter()
                .filter_map(|(k, x)| lookup.get(k.as_str()).map(|y| (*x, *y)))
                .unzip()
        }
    };
    let stats = JoinStats {
        left: a.len(),
        right: b.len(),
        matched: xs.len(),
    };
    if xs.len() < 2 {
        return Err(Error::TooFewAligned(xs.len()));
    }
    let mut series = PairedSeries::new(xs, ys)?;
    series.meta.insert(
        "align".into(),
        match policy {
            AlignPolicy::InnerJoinOnKey => "inner_join_on_key".into(),
            AlignPolicy::Positional => "positional".into(),
        },
    );
    series.meta.insert(
        "align.stats".into(),
        format!("left={} right={} matched={}", stats.left, stats.right, stats.matched),
    );
    Ok((series, stats))
}

/// Load, transform, then align two columns.
pub fn load_pair(x: &ColumnSpec, y: &ColumnSpec, policy: AlignPolicy) -> Result<(PairedSeries, JoinStats)> {
    let lx = load_column(x)?;
    let ly = load_column(y)?;
    let tx = transform_keyed(&lx.pairs, x.transform)?;
    let ty = transform_keyed(&ly.pairs, y.transform)?;
    let (series, stats) = align(&tx, &ty, policy)?;
    let mut series = series.with_labels(label(x), label(y));
    series.meta.insert("pipeline".into(), "transform_then_align".into());
    series.meta.insert("x.source".into(), describe(x, lx.dropped));
    series.meta.insert("y.source".into(), describe(y, ly.dropped));
    Ok((series, stats))
}

fn label(spec: &ColumnSpec) -> String {
    let file = spec
        .path
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_default();
    format!("{file}:{}", spec.column)
}

fn describe(spec: &ColumnSpec, dropped: usize) -> String {
    format!(
        "{}:{} transform={} dropped={}",
        spec.path.display(),
        spec.column,
        spec.transform.as_str(),
        dropped
    )
}

/// Tab for `.tsv` / `.tab` files, comma otherwise.
pub fn default_delimiter(path: &Path) -> u8 {
    match path.extension().and_then(|e| e.to_str()) {
        Some("tsv") | Some("tab") => b'\t',
        _ => b',',
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    fn keyed(pairs: &[(&str, f64)]) -> Vec<(String, f64)> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn numeric_column_in_file_order() {
        let f = file("a,b\n1,10\n2,20\n3,30\n");
        let col = load_column(&ColumnSpec::new(f.path(), "b".parse().unwrap())).unwrap();
        assert_eq!(col.pairs, keyed(&[("1", 10.0), ("2", 20.0), ("3", 30.0)]));
        assert_eq!(col.dropped, 0);
        assert_eq!(col.header.unwrap(), vec!["a", "b"]);
    }

    #[test]
    fn blank_cell_is_dropped_and_counted() {
        let f = file("date,v\n2020-01-01,1.5\n2020-01-02,\n2020-01-03,2.5\n");
        let col = load_column(&ColumnSpec::new(f.path(), ColumnSelector::Index(1))).unwrap();
        assert_eq!(col.pairs.len(), 2);
        assert_eq!(col.dropped, 1);
        assert_eq!(col.pairs[1].0, "2020-01-03");
    }

    #[test]
    fn headerless_file_uses_row_numbers_for_first_column() {
        let f = file("4.0\n5.0\nNaN\ninf\n6.0\n");
        let col = load_column(&ColumnSpec::new(f.path(), ColumnSelector::Index(0))).unwrap();
        assert_eq!(col.pairs, keyed(&[("0", 4.0), ("1", 5.0), ("4", 6.0)]));
        assert_eq!(col.dropped, 2);
        assert!(col.header.is_none());
    }

    #[test]
    fn other_delimiters() {
        let f = file("k;v\nx;1\ny;2\n");
        let mut spec = ColumnSpec::new(f.path(), "v".parse().unwrap());
        spec.delimiter = b';';
        assert_eq!(load_column(&spec).unwrap().pairs.len(), 2);
        assert_eq!(default_delimiter(Path::new("a.tsv")), b'\t');
        assert_eq!(default_delimiter(Path::new("a.csv")), b',');
    }

    #[test]
    fn load_errors() {
        assert!(matches!(
            load_column(&ColumnSpec::new("/definitely/not/here.csv", ColumnSelector::Index(0))),
            Err(Error::FileNotFound(_))
        ));
        let f = file("a,b\n1,2\n");
        assert!(matches!(
            load_column(&ColumnSpec::new(f.path(), "c".parse().unwrap())),
            Err(Error::NoSuchColumn { .. })
        ));
        assert!(matches!(
            load_column(&ColumnSpec::new(f.path(), ColumnSelector::Index(5))),
            Err(Error::NoSuchColumn { .. })
        ));
        let f = file("a,b\nx,\ny,z\n");
        assert!(matches!(
            load_column(&ColumnSpec::new(f.path(), "b".parse().unwrap())),
            Err(Error::EmptyAfterCleaning { dropped: 2, .. })
        ));
    }

    #[test]
    fn transforms() {
        let d = transform_levels(&[1.0, 1.5, 1.2], Transform::ArithmeticChange).unwrap();
        assert_eq!(d[0], 0.5);
        assert!((d[1] + 0.3).abs() < 1e-15);
        let p = transform_levels(&[100.0, 110.0], Transform::PctReturn).unwrap();
        assert!((p[0] - 0.10).abs() < 1e-15);
        let e = std::f64::consts::E;
        let l = transform_levels(&[e, e * e], Transform::LogReturn).unwrap();
        assert!((l[0] - 1.0).abs() < 1e-15);
        assert_eq!(transform_levels(&[3.0], Transform::None).unwrap(), vec![3.0]);
        assert!(matches!(
            transform_levels(&[1.0, 0.0, 2.0], Transform::LogReturn),
            Err(Error::NonPositiveLevel { index: 1, .. })
        ));
        assert!(transform_levels(&[-1.0, 1.0], Transform::ArithmeticChange).is_ok());
    }

    #[test]
    fn keyed_transform_takes_later_key() {
        let t = transform_keyed(&keyed(&[("a", 1.0), ("b", 3.0), ("c", 6.0)]), Transform::ArithmeticChange).unwrap();
        assert_eq!(t, keyed(&[("b", 2.0), ("c", 3.0)]));
    }

    #[test]
    fn alignment() {
        let a = keyed(&[("a", 1.0), ("b", 2.0), ("c", 3.0)]);
        let (s, st) = align(&a, &a, AlignPolicy::InnerJoinOnKey).unwrap();
        assert_eq!((s.len(), st.matched), (3, 3));

        let b = keyed(&[("b", 20.0), ("c", 30.0), ("d", 40.0)]);
        let (s, _) = align(&a, &b, AlignPolicy::InnerJoinOnKey).unwrap();
        assert_eq!(s.xs(), &[2.0, 3.0]);
        assert_eq!(s.ys(), &[20.0, 30.0]);

        let five = keyed(&[("1", 1.0), ("2", 2.0), ("3", 3.0), ("4", 4.0), ("5", 5.0)]);
        let (s, _) = align(&five, &a, AlignPolicy::Positional).unwrap();
        assert_eq!(s.len(), 3);

        let lone = keyed(&[("z", 1.0)]);
        assert!(matches!(align(&a, &lone, AlignPolicy::InnerJoinOnKey), Err(Error::TooFewAligned(0))));
    }

    #[test]
    fn dates_as_keys_join_across_holidays() {
        let fx = file("date,spx\n2024-01-02,100\n2024-01-03,101\n2024-01-04,99\n2024-01-05,102\n");
        let fy = file("date,ust\n2024-01-02,4.0\n2024-01-04,4.1\n2024-01-05,4.05\n");
        let mut x = ColumnSpec::new(fx.path(), "spx".parse().unwrap());
        x.transform = Transform::PctReturn;
        let mut y = ColumnSpec::new(fy.path(), "ust".parse().unwrap());
        y.transform = Transform::ArithmeticChange;
        let (s, stats) = load_pair(&x, &y, AlignPolicy::InnerJoinOnKey).unwrap();
        // x changes keyed 01-03, 01-04, 01-05; y changes keyed 01-04, 01-05
        assert_eq!(stats, JoinStats { left: 3, right: 2, matched: 2 });
        assert!((s.xs()[0] - (99.0 / 101.0 - 1.0)).abs() < 1e-15);
        assert!((s.ys()[1] + 0.05).abs() < 1e-12);
        assert_eq!(s.meta["pipeline"], "transform_then_align");
    }
}
