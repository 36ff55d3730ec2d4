//! The 9-dimensional topological signature of a video: eight persistent
//! entropies from the plane filtrations of the stacked image-sequence
//! complex, plus one from the audio amplitude filtration.

use std::io::{self, Write};

use rayon::prelude::*;

use thiserror::Error;

use crate::complexbuild::{
    build_path_complex, build_stacked_complex, AudioSignal, BuildError, LandmarkFrame,
};
use crate::dataset::{EmotionLabel, VideoRecord};
use crate::filtration::{lower_star_filtration, plane_filters, FilterLabel, FiltrationError, Filtration};
use crate::persistence::{
    cap_infinite, compute_persistence_with, persistent_entropy, DiagramCoords, PersistenceError,
};

/// The signature fed to the classifier. `video_features` follow the fixed
/// plane order of [`FilterLabel::PLANES`].
#[derive(Debug, Clone, PartialEq)]
pub struct TopologicalSignature {
    pub video_id: String,
    pub label: Option<EmotionLabel>,
    pub video_features: [f64; 8],
    pub audio_feature: f64,
}

impl TopologicalSignature {
    /// All nine features in file order.
    pub fn features(&self) -> [f64; 9] {
        let mut out = [0.0; 9];
        out[..8].copy_from_slice(&self.video_features);
        out[8] = self.audio_feature;
        out
    }
}

/// Whether entropy pools every homology dimension of a filtration or keeps
/// only connected-component intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EntropyPooling {
    #[default]
    AllDims,
    Dim0Only,
}

/// Knobs of the extraction pipeline, with the experiment defaults.
#[derive(Debug, Clone, Copy)]
pub struct ExtractConfig {
    /// Number of equally spaced frames per video.
    pub frame_count: usize,
    /// Audio subsample length.
    pub audio_samples: usize,
    pub pooling: EntropyPooling,
    pub coords: DiagramCoords,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self {
            frame_count: 9,
            audio_samples: 10_000,
            pooling: EntropyPooling::default(),
            coords: DiagramCoords::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum SignatureError {
    #[error("cannot select frames from an empty sequence")]
    NoFrames,
    #[error("frame count and subsample length must be at least 1")]
    InvalidCount,
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Filtration(#[from] FiltrationError),
    #[error("{filter} filtration: {source}")]
    Persistence {
        filter: FilterLabel,
        #[source]
        source: PersistenceError,
    },
    #[error("signature csv line {line}: {msg}")]
    Csv { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Indices of `k` equally spaced frames out of `total`:
/// floor(j * (total-1) / (k-1)) for j = 0..k-1. The first index is always 0
/// and the last total-1; duplicates appear when total < k.
pub fn select_frames(total: usize, k: usize) -> Result<Vec<usize>, SignatureError> {
    if total == 0 {
        return Err(SignatureError::NoFrames);
    }
    if k == 0 {
        return Err(SignatureError::InvalidCount);
    }
    if k == 1 {
        return Ok(vec![0]);
    }
    Ok((0..k).map(|j| j * (total - 1) / (k - 1)).collect())
}

/// Uniform subsample of `m` points; signals no longer than `m` pass through
/// unchanged.
pub fn subsample_signal(signal: &AudioSignal, m: usize) -> Result<AudioSignal, SignatureError> {
    if m == 0 {
        return Err(SignatureError::InvalidCount);
    }
    let len = signal.samples.len();
    if len <= m {
        return Ok(signal.clone());
    }
    let samples = if m == 1 {
        vec![signal.samples[0]]
    } else {
        (0..m)
            .map(|j| signal.samples[j * (len - 1) / (m - 1)])
            .collect()
    };
    Ok(AudioSignal {
        samples,
        sample_rate: signal.sample_rate,
    })
}

/// Full diagram-to-entropy tail of the pipeline: persistence, optional
/// restriction to dimension 0, capping at the filtration maximum, entropy.
fn filtration_entropy(f: &Filtration, cfg: &ExtractConfig) -> Result<f64, PersistenceError> {
    let diagram = compute_persistence_with(f, cfg.coords)?;
    let diagram = match cfg.pooling {
        EntropyPooling::AllDims => diagram,
        EntropyPooling::Dim0Only => diagram.only_dim(0),
    };
    let cap = match cfg.coords {
        DiagramCoords::FilterValue => f.max_value().unwrap_or(0.0),
        DiagramCoords::OrdinalIndex => {
            if f.is_empty() {
                0.0
            } else {
                f.star_ordinal_at(f.len() - 1) as f64
            }
        }
    };
    persistent_entropy(&cap_infinite(&diagram, cap)?)
}

/// The eight plane entropies of an image sequence, in canonical order.
pub fn extract_video_features(
    frames: &[LandmarkFrame],
    cfg: &ExtractConfig,
) -> Result<[f64; 8], SignatureError> {
    let picks = select_frames(frames.len(), cfg.frame_count)?;
    let selected: Vec<LandmarkFrame> = picks.iter().map(|&i| frames[i].clone()).collect();
    let complex = build_stacked_complex(&selected)?;
    let filters = plane_filters(&complex)?;

    let entropies: Vec<f64> = filters
        .par_iter()
        .map(|h| {
            let f = lower_star_filtration(&complex, h)?;
            filtration_entropy(&f, cfg).map_err(|source| SignatureError::Persistence {
                filter: h.label(),
                source,
            })
        })
        .collect::<Result<_, SignatureError>>()?;
    Ok(entropies.try_into().expect("eight plane filtrations"))
}

/// The audio entropy: subsample, path complex, amplitude lower-star
/// filtration, diagram, cap, entropy.
pub fn extract_audio_feature(
    signal: &AudioSignal,
    cfg: &ExtractConfig,
) -> Result<f64, SignatureError> {
    let signal = subsample_signal(signal, cfg.audio_samples)?;
    let (complex, h) = build_path_complex(&signal)?;
    let lo = signal.samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = signal
        .samples
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        log::warn!("audio signal is constant; its persistent entropy degenerates to 0");
    }
    let f = lower_star_filtration(&complex, &h)?;
    filtration_entropy(&f, cfg).map_err(|source| SignatureError::Persistence {
        filter: FilterLabel::Audio,
        source,
    })
}

/// Extracts the full 9-vector of a video record.
pub fn extract_signature(
    video: &VideoRecord,
    cfg: &ExtractConfig,
) -> Result<TopologicalSignature, SignatureError> {
    let video_features = extract_video_features(&video.frames, cfg)?;
    let audio_feature = extract_audio_feature(&video.audio, cfg)?;
    Ok(TopologicalSignature {
        video_id: video.video_id.clone(),
        label: Some(video.emotion),
        video_features,
        audio_feature,
    })
}

/// Writes `video_id,label,f1,...,f9` lines, floats at 17 significant digits
/// so they round-trip bit-exactly.
pub fn write_signatures_csv(
    w: &mut impl Write,
    signatures: &[TopologicalSignature],
) -> io::Result<()> {
    for sig in signatures {
        debug_assert!(!sig.video_id.contains(','));
        let label = sig.label.map(|l| l.as_str()).unwrap_or("");
        write!(w, "{},{}", sig.video_id, label)?;
        for value in sig.features() {
            write!(w, ",{value:.16e}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn signatures_to_csv(signatures: &[TopologicalSignature]) -> String {
    let mut buf = Vec::new();
    write_signatures_csv(&mut buf, signatures).expect("write to Vec cannot fail");
    String::from_utf8(buf).expect("csv is ascii")
}

/// Parses the signature CSV format written by [`write_signatures_csv`].
pub fn read_signatures_csv(text: &str) -> Result<Vec<TopologicalSignature>, SignatureError> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 11 {
            return Err(SignatureError::Csv {
                line: lineno + 1,
                msg: format!("expected 11 comma-separated fields, got {}", fields.len()),
            });
        }
        let label = if fields[1].is_empty() {
            None
        } else {
            Some(
                fields[1]
                    .parse::<EmotionLabel>()
                    .map_err(|e| SignatureError::Csv {
                        line: lineno + 1,
                        msg: e,
                    })?,
            )
        };
        let mut features = [0.0; 9];
        for (slot, tok) in features.iter_mut().zip(&fields[2..]) {
            *slot = tok.parse::<f64>().map_err(|_| SignatureError::Csv {
                line: lineno + 1,
                msg: format!("not a float: {tok:?}"),
            })?;
        }
        out.push(TopologicalSignature {
            video_id: fields[0].to_string(),
            label,
            video_features: features[..8].try_into().expect("eight entries"),
            audio_feature: features[8],
        });
    }
    Ok(out)
}
