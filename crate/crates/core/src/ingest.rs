//! Loading tracks from `track_id,frame,x,y` CSV and cutting them into
//! fixed-length samples: frame-dropping decimation followed by windowed
//! segmentation.

use std::collections::HashMap;
use std::io::{Read, Write};

use crate::error::{csv_err, Error, Result};
use crate::geometry::{Dataset, Point2, Trajectory};
use crate::scalar::Scalar;

pub const CSV_HEADER: [&str; 4] = ["track_id", "frame", "x", "y"];

#[derive(Clone, Debug, PartialEq)]
pub struct RawTrack<T> {
    pub id: String,
    /// Strictly increasing frame numbers.
    pub frames: Vec<(i64, Point2<T>)>,
}

impl<T: Scalar> RawTrack<T> {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IngestConfig {
    /// Source rate divided by target rate.
    pub decimation_factor: usize,
    pub segment_length: usize,
    pub stride: usize,
    /// Tracks are split where consecutive source frames differ by more than
    /// this. `None` uses `decimation_factor`.
    pub max_frame_gap: Option<i64>,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            decimation_factor: 5,
            segment_length: 54,
            stride: 54,
            max_frame_gap: None,
        }
    }
}

impl IngestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.decimation_factor == 0 {
            return Err(Error::InvalidConfig("decimation_factor must be at least 1".into()));
        }
        if self.segment_length < 2 {
            return Err(Error::InvalidConfig("segment_length must be at least 2".into()));
        }
        if self.stride == 0 {
            return Err(Error::InvalidConfig("stride must be at least 1".into()));
        }
        if matches!(self.max_frame_gap, Some(g) if g < 1) {
            return Err(Error::InvalidConfig("max_frame_gap must be at least 1".into()));
        }
        Ok(())
    }

    fn gap(&self) -> i64 {
        self.max_frame_gap.unwrap_or(self.decimation_factor as i64)
    }
}

type FrameRow<T> = (i64, Point2<T>, u64);

fn parse_field<V: std::str::FromStr>(field: &str, what: &str, line: u64) -> Result<V> {
    field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("{what} `{field}` is not a number"),
    })
}

/// Parses trajectory CSV. Tracks keep the order in which their ids first
/// appear; frames within a track are sorted ascending.
pub fn parse_csv<T: Scalar, R: Read>(input: R) -> Result<Vec<RawTrack<T>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut index: HashMap<String, usize> = HashMap::new();
    // (track id, [(frame, point, source line)])
    let mut rows: Vec<(String, Vec<FrameRow<T>>)> = Vec::new();
    let mut first = true;

    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        if std::mem::take(&mut first)
            && record.len() == 4
            && record.iter().zip(CSV_HEADER).all(|(f, h)| f.eq_ignore_ascii_case(h))
        {
            continue;
        }
        if record.len() != 4 {
            return Err(Error::Parse {
                line,
                message: format!("expected 4 fields, found {}", record.len()),
            });
        }
        let frame: i64 = parse_field(&record[1], "frame", line)?;
        let x: T = parse_field(&record[2], "x", line)?;
        let y: T = parse_field(&record[3], "y", line)?;
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::Parse {
                line,
                message: "coordinate is not finite".into(),
            });
        }
        let slot = *index.entry(record[0].to_string()).or_insert_with(|| {
            rows.push((record[0].to_string(), Vec::new()));
            rows.len() - 1
        });
        rows[slot].1.push((frame, Point2::new(x, y), line));
    }

    rows.into_iter()
        .map(|(id, mut frames)| {
            frames.sort_by_key(|f| f.0);
            if let Some(w) = frames.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(Error::Parse {
                    line: w[0].2.max(w[1].2),
                    message: format!("duplicate frame {} in track `{id}`", w[0].0),
                });
            }
            Ok(RawTrack {
                id,
                frames: frames.into_iter().map(|(f, p, _)| (f, p)).collect(),
            })
        })
        .collect()
}

pub fn write_csv<T: Scalar, W: Write>(tracks: &[RawTrack<T>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for t in tracks {
        for (frame, p) in &t.frames {
            w.write_record([t.id.clone(), frame.to_string(), p.x.to_string(), p.y.to_string()])
                .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Keeps frames `0, factor, 2*factor, ...`; no interpolation.
pub fn resample<T: Scalar>(track: &RawTrack<T>, factor: usize) -> RawTrack<T> {
    RawTrack {
        id: track.id.clone(),
        frames: track.frames.iter().step_by(factor.max(1)).copied().collect(),
    }
}

/// Splits a track wherever consecutive frame numbers differ by more than `max_gap`.
pub fn split_at_gaps<T: Scalar>(track: &RawTrack<T>, max_gap: i64) -> Vec<RawTrack<T>> {
    let mut pieces: Vec<Vec<(i64, Point2<T>)>> = Vec::new();
    for (i, &f) in track.frames.iter().enumerate() {
        if i == 0 || f.0 - track.frames[i - 1].0 > max_gap {
            pieces.push(Vec::new());
        }
        pieces.last_mut().expect("piece exists").push(f);
    }
    if pieces.len() <= 1 {
        return vec![track.clone()];
    }
    pieces
        .into_iter()
        .enumerate()
        .map(|(n, frames)| RawTrack {
            id: format!("{}~{n}", track.id),
            frames,
        })
        .collect()
}

/// Windows of `m` consecutive frames starting every `stride` frames; ids are
/// `<track id>@<window start>`.
pub fn segment<T: Scalar>(track: &RawTrack<T>, m: usize, stride: usize) -> Vec<Trajectory<T>> {
    if m < 2 || stride == 0 || track.len() < m {
        return Vec::new();
    }
    (0..=track.len() - m)
        .step_by(stride)
        .map(|start| {
            let points = track.frames[start..start + m].iter().map(|f| f.1).collect();
            Trajectory::from_parts(format!("{}@{start}", track.id), points)
        })
        .collect()
}

pub fn build_dataset<T: Scalar>(tracks: &[RawTrack<T>], cfg: &IngestConfig) -> Result<Dataset<T>> {
    cfg.validate()?;
    let mut samples = Vec::new();
    for track in tracks {
        for piece in split_at_gaps(track, cfg.gap()) {
            let decimated = resample(&piece, cfg.decimation_factor);
            samples.extend(segment(&decimated, cfg.segment_length, cfg.stride));
        }
    }
    if samples.is_empty() {
        return Err(Error::EmptyResult(format!(
            "no track yields a {}-point segment",
            cfg.segment_length
        )));
    }
    Dataset::new(samples)
}

/// One track per sample, frames numbered from 0.
pub fn dataset_to_tracks<T: Scalar>(ds: &Dataset<T>) -> Vec<RawTrack<T>> {
    ds.samples()
        .iter()
        .map(|s| RawTrack {
            id: s.id().to_string(),
            frames: s.points().iter().enumerate().map(|(i, &p)| (i as i64, p)).collect(),
        })
        .collect()
}

/// Inverse of [`dataset_to_tracks`]: every track becomes one sample.
pub fn tracks_to_dataset<T: Scalar>(tracks: Vec<RawTrack<T>>) -> Result<Dataset<T>> {
    let samples = tracks
        .into_iter()
        .map(|t| Trajectory::new(t.id, t.frames.into_iter().map(|f| f.1).collect()))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn track(id: &str, n: usize) -> RawTrack<f64> {
        RawTrack {
            id: id.into(),
            frames: (0..n)
                .map(|i| (i as i64, Point2::new(i as f64, 0.5 * i as f64)))
                .collect(),
        }
    }

    #[test]
    fn minimal_csv() {
        let t: Vec<RawTrack<f64>> = parse_csv("a,0,1.0,2.0\na,1,2.0,3.0\n".as_bytes()).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(
            t[0].frames,
            vec![(0, Point2::new(1.0, 2.0)), (1, Point2::new(2.0, 3.0))]
        );
    }

    #[test]
    fn header_is_optional_and_frames_sorted() {
        let text = "track_id,frame,x,y\na,2,3,3\nb,0,9,9\na,0,1,1\na,1,2,2\n";
        let t: Vec<RawTrack<f64>> = parse_csv(text.as_bytes()).unwrap();
        assert_eq!(t.iter().map(|t| t.id.as_str()).collect::<Vec<_>>(), ["a", "b"]);
        assert_eq!(t[0].frames.iter().map(|f| f.0).collect::<Vec<_>>(), [0, 1, 2]);
    }

    #[test]
    fn malformed_rows_name_their_line() {
        let err = parse_csv::<f64, _>("a,0,1.0,2.0\na,0,1.0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_csv::<f64, _>("a,0,1.0,2.0\na,1,one,2.0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_csv::<f64, _>("a,0,1.0,2.0\nb,0,1,1\na,0,5,5\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse_csv::<f64, _>("a,0,NaN,2.0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn resample_examples() {
        let t = track("a", 10);
        assert_eq!(resample(&t, 1), t);
        let r = resample(&t, 5);
        assert_eq!(r.frames.iter().map(|f| f.0).collect::<Vec<_>>(), [0, 5]);
    }

    #[test]
    fn segment_examples() {
        assert_eq!(segment(&track("a", 108), 54, 54).len(), 2);
        assert!(segment(&track("a", 53), 54, 54).is_empty());
        let s = segment(&track("a", 56), 54, 1);
        assert_eq!(s.iter().map(|t| t.id()).collect::<Vec<_>>(), ["a@0", "a@1", "a@2"]);
        assert_eq!(s[1].points()[0], Point2::new(1.0, 0.5));
    }

    #[test]
    fn overlapping_windows_share_points() {
        let s = segment(&track("a", 30), 10, 4);
        for w in s.windows(2) {
            assert_eq!(&w[0].points()[4..], &w[1].points()[..6]);
        }
    }

    #[test]
    fn build_dataset_examples() {
        let cfg = IngestConfig::default();
        let ds = build_dataset(&[track("a", 270)], &cfg).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.m(), 54);
        assert_eq!(ds.samples()[0].points()[1], Point2::new(5.0, 2.5));
        assert!(matches!(build_dataset::<f64>(&[], &cfg), Err(Error::EmptyResult(_))));
    }

    #[test]
    fn gaps_split_tracks() {
        let mut t = track("a", 20);
        for f in &mut t.frames[10..] {
            f.0 += 100;
        }
        let pieces = split_at_gaps(&t, 5);
        assert_eq!(pieces.len(), 2);
        assert_eq!(pieces[0].id, "a~0");
        assert_eq!(pieces[1].frames[0].0, 110);
        assert_eq!(split_at_gaps(&track("b", 5), 1), vec![track("b", 5)]);
        let cfg = IngestConfig {
            decimation_factor: 1,
            segment_length: 10,
            stride: 10,
            max_frame_gap: None,
        };
        let ds = build_dataset(&[t], &cfg).unwrap();
        assert_eq!(
            ds.samples().iter().map(|s| s.id()).collect::<Vec<_>>(),
            ["a~0@0", "a~1@0"]
        );
    }

    #[test]
    fn invalid_config() {
        for cfg in [
            IngestConfig {
                decimation_factor: 0,
                ..Default::default()
            },
            IngestConfig {
                segment_length: 1,
                ..Default::default()
            },
            IngestConfig {
                stride: 0,
                ..Default::default()
            },
            IngestConfig {
                max_frame_gap: Some(0),
                ..Default::default()
            },
        ] {
            assert!(cfg.validate().is_err());
        }
    }

    #[test]
    fn dataset_tracks_round_trip() {
        let ds = build_dataset(
            &[track("a", 30), track("b", 25)],
            &IngestConfig {
                decimation_factor: 2,
                segment_length: 5,
                stride: 3,
                max_frame_gap: None,
            },
        )
        .unwrap();
        let mut buf = Vec::new();
        write_csv(&dataset_to_tracks(&ds), &mut buf).unwrap();
        let back = tracks_to_dataset(parse_csv(buf.as_slice()).unwrap()).unwrap();
        assert_eq!(back, ds);
    }
}
