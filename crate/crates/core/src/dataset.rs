//! Corpus ingestion and generation: RAVDESS-style filename metadata,
//! landmark tracking files, WAV audio, train/test splits, and a synthetic
//! desk-scale corpus whose classes are separable by construction.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::complexbuild::{AudioSignal, LandmarkFrame};
use crate::signature::TopologicalSignature;

/// The seven classifier emotions, in the fixed class-index order used by the
/// confusion matrix. Neutral is excluded from classifier corpora.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EmotionLabel {
    Calm,
    Happy,
    Sad,
    Angry,
    Fearful,
    Disgust,
    Surprised,
}

impl EmotionLabel {
    pub const ALL: [EmotionLabel; 7] = [
        EmotionLabel::Calm,
        EmotionLabel::Happy,
        EmotionLabel::Sad,
        EmotionLabel::Angry,
        EmotionLabel::Fearful,
        EmotionLabel::Disgust,
        EmotionLabel::Surprised,
    ];

    pub fn class_index(self) -> usize {
        Self::ALL.iter().position(|&l| l == self).expect("listed")
    }

    pub fn from_class_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EmotionLabel::Calm => "calm",
            EmotionLabel::Happy => "happy",
            EmotionLabel::Sad => "sad",
            EmotionLabel::Angry => "angry",
            EmotionLabel::Fearful => "fearful",
            EmotionLabel::Disgust => "disgust",
            EmotionLabel::Surprised => "surprised",
        }
    }
}

impl fmt::Display for EmotionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EmotionLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| format!("unknown emotion {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Intensity {
    Normal,
    Strong,
}

/// Decoded RAVDESS filename metadata: seven dash-separated 2-digit fields,
/// `modality-vocal-emotion-intensity-statement-repetition-actor`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RavdessMeta {
    /// 01 full audio-video, 02 video-only, 03 audio-only.
    pub modality: u8,
    /// 01 speech, 02 song.
    pub vocal_channel: u8,
    /// 01 neutral, 02 calm, ..., 08 surprised.
    pub emotion_code: u8,
    /// 01 normal, 02 strong.
    pub intensity_code: u8,
    pub statement: u8,
    pub repetition: u8,
    pub actor: u8,
}

impl RavdessMeta {
    /// The classifier label; `None` for neutral, which the corpus excludes.
    pub fn emotion(&self) -> Option<EmotionLabel> {
        match self.emotion_code {
            1 => None,
            code => EmotionLabel::from_class_index(code as usize - 2),
        }
    }

    pub fn intensity(&self) -> Intensity {
        if self.intensity_code == 2 {
            Intensity::Strong
        } else {
            Intensity::Normal
        }
    }

    /// Speech vocalization in the audio-video modality.
    pub fn is_speech_video(&self) -> bool {
        self.modality == 1 && self.vocal_channel == 1
    }

    /// Member of the classifier corpus: a speech video with a non-neutral
    /// emotion.
    pub fn in_classifier_corpus(&self) -> bool {
        self.is_speech_video() && self.emotion().is_some()
    }

    pub fn filename(&self) -> String {
        format!(
            "{:02}-{:02}-{:02}-{:02}-{:02}-{:02}-{:02}",
            self.modality,
            self.vocal_channel,
            self.emotion_code,
            self.intensity_code,
            self.statement,
            self.repetition,
            self.actor
        )
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("filename {name:?}: {msg}")]
    BadFilename { name: String, msg: String },
    #[error("unknown emotion code {0:02}")]
    UnknownEmotionCode(u8),
    #[error("{path}: {msg}")]
    LandmarkFormat { path: String, msg: String },
    #[error("{path}: file has {found} landmarks per frame, configuration says {expected}")]
    LandmarkCount {
        path: String,
        expected: usize,
        found: usize,
    },
    #[error("{path}: unsupported wav encoding: {detail}")]
    UnsupportedWav { path: String, detail: String },
    #[error("{path}: {source}")]
    Wav {
        path: String,
        #[source]
        source: hound::Error,
    },
    #[error("manifest {path}: line {line}: {msg}")]
    Manifest {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("train size {train_n} exceeds corpus size {total}")]
    SplitTooLarge { train_n: usize, total: usize },
    #[error("signature {0} has no label; splits are stratified by emotion")]
    UnlabelledSignature(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Parses a RAVDESS-style filename (an extension, if present, is ignored).
pub fn parse_ravdess_filename(name: &str) -> Result<RavdessMeta, DatasetError> {
    let bad = |msg: &str| DatasetError::BadFilename {
        name: name.to_string(),
        msg: msg.to_string(),
    };
    let stem = name.split('.').next().unwrap_or(name);
    let fields: Vec<&str> = stem.split('-').collect();
    if fields.len() != 7 {
        return Err(bad(&format!(
            "expected 7 dash-separated fields, got {}",
            fields.len()
        )));
    }
    let mut codes = [0u8; 7];
    for (slot, field) in codes.iter_mut().zip(&fields) {
        if field.len() != 2 || !field.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad(&format!("field {field:?} is not a 2-digit code")));
        }
        *slot = field.parse().expect("two ascii digits");
    }
    let [modality, vocal_channel, emotion_code, intensity_code, statement, repetition, actor] =
        codes;
    if !(1..=3).contains(&modality) {
        return Err(bad(&format!("modality {modality:02} out of range")));
    }
    if !(1..=2).contains(&vocal_channel) {
        return Err(bad(&format!("vocal channel {vocal_channel:02} out of range")));
    }
    if !(1..=8).contains(&emotion_code) {
        return Err(DatasetError::UnknownEmotionCode(emotion_code));
    }
    if !(1..=2).contains(&intensity_code) {
        return Err(bad(&format!("intensity {intensity_code:02} out of range")));
    }
    if !(1..=2).contains(&statement) {
        return Err(bad(&format!("statement {statement:02} out of range")));
    }
    if !(1..=2).contains(&repetition) {
        return Err(bad(&format!("repetition {repetition:02} out of range")));
    }
    if !(1..=24).contains(&actor) {
        return Err(bad(&format!("actor {actor:02} out of range")));
    }
    Ok(RavdessMeta {
        modality,
        vocal_channel,
        emotion_code,
        intensity_code,
        statement,
        repetition,
        actor,
    })
}

/// One video of the corpus, fully loaded.
#[derive(Debug, Clone)]
pub struct VideoRecord {
    pub video_id: String,
    pub actor: u8,
    pub emotion: EmotionLabel,
    pub intensity: Intensity,
    pub statement: u8,
    pub repetition: u8,
    pub frames: Vec<LandmarkFrame>,
    pub audio: AudioSignal,
}

/// Loads a landmark tracking file: CSV, one row per frame, columns
/// x0,y0,...,x{n-1},y{n-1}, optional header.
pub fn load_landmark_track(
    path: &Path,
    expected_landmarks: usize,
) -> Result<Vec<LandmarkFrame>, DatasetError> {
    let text = std::fs::read_to_string(path)?;
    parse_landmark_track(&text, expected_landmarks, &path.display().to_string())
}

pub fn parse_landmark_track(
    text: &str,
    expected_landmarks: usize,
    path: &str,
) -> Result<Vec<LandmarkFrame>, DatasetError> {
    let format = |msg: String| DatasetError::LandmarkFormat {
        path: path.to_string(),
        msg,
    };
    let mut frames: Vec<LandmarkFrame> = Vec::new();
    let mut columns: Option<usize> = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if lineno == 0 && cells.iter().all(|c| c.parse::<f64>().is_err()) {
            // Header row.
            continue;
        }
        match columns {
            None => columns = Some(cells.len()),
            Some(expected) if expected != cells.len() => {
                return Err(format(format!(
                    "row {} has {} columns, previous rows have {}",
                    lineno + 1,
                    cells.len(),
                    expected
                )));
            }
            Some(_) => {}
        }
        if cells.len() % 2 != 0 {
            return Err(format(format!(
                "row {} has an odd number of columns ({})",
                lineno + 1,
                cells.len()
            )));
        }
        let mut points = Vec::with_capacity(cells.len() / 2);
        for pair in cells.chunks(2) {
            let x: f64 = pair[0]
                .parse()
                .map_err(|_| format(format!("row {}: not a number: {:?}", lineno + 1, pair[0])))?;
            let y: f64 = pair[1]
                .parse()
                .map_err(|_| format(format!("row {}: not a number: {:?}", lineno + 1, pair[1])))?;
            points.push([x, y]);
        }
        frames.push(LandmarkFrame {
            points,
            frame_index: frames.len(),
        });
    }
    if let Some(frame) = frames.first() {
        if frame.points.len() != expected_landmarks {
            return Err(DatasetError::LandmarkCount {
                path: path.to_string(),
                expected: expected_landmarks,
                found: frame.points.len(),
            });
        }
    }
    Ok(frames)
}

/// Writes the landmark CSV format read by [`load_landmark_track`].
pub fn write_landmark_track(path: &Path, frames: &[LandmarkFrame]) -> Result<(), DatasetError> {
    let mut out = String::new();
    for frame in frames {
        let mut first = true;
        for p in &frame.points {
            if !first {
                out.push(',');
            }
            first = false;
            out.push_str(&format!("{:.16e},{:.16e}", p[0], p[1]));
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Reads a PCM WAV file: 16-bit integer or 32-bit float, mono or stereo.
/// Stereo channels are averaged; integer samples are normalized to [-1, 1]
/// by the format maximum.
pub fn load_wav(path: &Path) -> Result<AudioSignal, DatasetError> {
    let display = path.display().to_string();
    let wav_err = |source: hound::Error| DatasetError::Wav {
        path: display.clone(),
        source,
    };
    let mut reader = hound::WavReader::open(path).map_err(wav_err)?;
    let spec = reader.spec();
    if spec.channels == 0 || spec.channels > 2 {
        return Err(DatasetError::UnsupportedWav {
            path: display,
            detail: format!("{} channels", spec.channels),
        });
    }
    let mono: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => {
            let samples: Vec<f64> = reader
                .samples::<i16>()
                .map(|s| s.map(|v| v as f64 / 32_768.0))
                .collect::<Result<_, _>>()
                .map_err(wav_err)?;
            merge_channels(samples, spec.channels)
        }
        (hound::SampleFormat::Float, 32) => {
            let samples: Vec<f64> = reader
                .samples::<f32>()
                .map(|s| s.map(|v| v as f64))
                .collect::<Result<_, _>>()
                .map_err(wav_err)?;
            merge_channels(samples, spec.channels)
        }
        (format, bits) => {
            return Err(DatasetError::UnsupportedWav {
                path: display,
                detail: format!("{format:?} at {bits} bits per sample"),
            });
        }
    };
    Ok(AudioSignal {
        samples: mono,
        sample_rate: spec.sample_rate,
    })
}

fn merge_channels(interleaved: Vec<f64>, channels: u16) -> Vec<f64> {
    if channels == 1 {
        return interleaved;
    }
    interleaved
        .chunks_exact(channels as usize)
        .map(|frame| frame.iter().sum::<f64>() / channels as f64)
        .collect()
}

/// Writes a mono 32-bit-float WAV.
pub fn write_wav(path: &Path, signal: &AudioSignal) -> Result<(), DatasetError> {
    let display = path.display().to_string();
    let wav_err = |source: hound::Error| DatasetError::Wav {
        path: display.clone(),
        source,
    };
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: signal.sample_rate,
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(wav_err)?;
    for &s in &signal.samples {
        writer.write_sample(s as f32).map_err(wav_err)?;
    }
    writer.finalize().map_err(wav_err)?;
    Ok(())
}

/// One row of a corpus manifest: where a video's inputs live.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub video_id: String,
    pub landmarks: PathBuf,
    pub audio: PathBuf,
    pub raw_name: String,
}

const MANIFEST_HEADER: &str = "video_id,landmarks,audio,filename";

/// Reads a manifest CSV; relative paths are resolved against the manifest's
/// directory.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>, DatasetError> {
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut entries = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line == MANIFEST_HEADER) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(DatasetError::Manifest {
                path: display,
                line: lineno + 1,
                msg: format!("expected 4 fields, got {}", fields.len()),
            });
        }
        entries.push(ManifestEntry {
            video_id: fields[0].to_string(),
            landmarks: base.join(fields[1]),
            audio: base.join(fields[2]),
            raw_name: fields[3].to_string(),
        });
    }
    Ok(entries)
}

/// Writes a manifest CSV with the paths exactly as given.
pub fn write_manifest(path: &Path, entries: &[ManifestEntry]) -> Result<(), DatasetError> {
    let mut file = std::fs::File::create(path)?;
    writeln!(file, "{MANIFEST_HEADER}")?;
    for e in entries {
        writeln!(
            file,
            "{},{},{},{}",
            e.video_id,
            e.landmarks.display(),
            e.audio.display(),
            e.raw_name
        )?;
    }
    Ok(())
}

/// Seeded stratified split: class proportions in the train set match the
/// corpus within one example. Output halves are disjoint, exhaustive, and
/// each sorted by original corpus position.
pub fn split_dataset(
    signatures: &[TopologicalSignature],
    train_n: usize,
    seed: u64,
) -> Result<(Vec<TopologicalSignature>, Vec<TopologicalSignature>), DatasetError> {
    let total = signatures.len();
    if train_n > total {
        return Err(DatasetError::SplitTooLarge { train_n, total });
    }

    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, sig) in signatures.iter().enumerate() {
        let label = sig
            .label
            .ok_or_else(|| DatasetError::UnlabelledSignature(sig.video_id.clone()))?;
        by_class.entry(label.class_index()).or_default().push(i);
    }

    // Largest-remainder allocation of train_n across classes.
    let mut base: BTreeMap<usize, usize> = BTreeMap::new();
    let mut remainders: Vec<(usize, usize)> = Vec::new(); // (numerator remainder, class)
    let mut allocated = 0;
    for (&class, members) in &by_class {
        let exact_num = members.len() * train_n;
        base.insert(class, exact_num / total);
        allocated += exact_num / total;
        remainders.push((exact_num % total, class));
    }
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, class) in remainders.iter().take(train_n - allocated) {
        *base.get_mut(&class).expect("class present") += 1;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_idx = Vec::with_capacity(train_n);
    let mut test_idx = Vec::with_capacity(total - train_n);
    for (&class, members) in &by_class {
        let mut members = members.clone();
        members.shuffle(&mut rng);
        let take = base[&class];
        train_idx.extend_from_slice(&members[..take]);
        test_idx.extend_from_slice(&members[take..]);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok((
        train_idx.iter().map(|&i| signatures[i].clone()).collect(),
        test_idx.iter().map(|&i| signatures[i].clone()).collect(),
    ))
}

// ---------------------------------------------------------------------------
// Synthetic corpus
// ---------------------------------------------------------------------------

/// Number of frames each synthetic video carries.
pub const SYNTH_FRAMES: usize = 27;
/// Landmarks of the synthetic face template.
pub const SYNTH_LANDMARKS: usize = 62;
/// Samples per synthetic audio clip; longer than the 10000-point subsample
/// target so extraction exercises subsampling.
pub const SYNTH_AUDIO_LEN: usize = 24_000;

/// Index ranges of the template regions that animate.
const MOUTH_RANGE: std::ops::Range<usize> = 48..62;
const BROW_RANGE: std::ops::Range<usize> = 17..27;

/// A 62-point face-like template in pixel coordinates. Small deterministic
/// wobbles keep the points in general position (no exact cocircularity).
fn face_template() -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = Vec::with_capacity(SYNTH_LANDMARKS);
    let wob = |i: usize, k: f64| (k * i as f64 + 0.7).sin();

    // Jaw: 17 points along the lower half of an ellipse, left ear to right.
    for i in 0..17 {
        let theta = std::f64::consts::PI * (1.0 + i as f64 / 16.0);
        let rx = 105.0 * (1.0 + 0.02 * wob(i, 3.1));
        let ry = 135.0 * (1.0 + 0.02 * wob(i, 2.3));
        pts.push([250.0 + rx * theta.cos(), 240.0 - ry * theta.sin()]);
    }
    // Brows: 2 x 5 points with a slight arch.
    for side in 0..2 {
        let x0 = if side == 0 { 170.0 } else { 270.0 };
        for i in 0..5 {
            let x = x0 + 15.0 * i as f64 + 0.8 * wob(i + side * 5, 1.9);
            let arch = 6.0 * (1.0 - (i as f64 - 2.0).abs() / 2.0);
            pts.push([x, 185.0 - arch + 0.5 * wob(i + side * 7, 2.7)]);
        }
    }
    // Eyes: 2 x 6 points around small ellipses.
    for side in 0..2 {
        let cx = if side == 0 { 200.0 } else { 300.0 };
        for i in 0..6 {
            let theta = std::f64::consts::TAU * i as f64 / 6.0 + 0.3;
            let rx = 22.0 * (1.0 + 0.03 * wob(i + side * 3, 2.2));
            let ry = 9.0 * (1.0 + 0.03 * wob(i + side * 11, 3.7));
            pts.push([cx + rx * theta.cos(), 215.0 + ry * theta.sin()]);
        }
    }
    // Nose: 4 bridge points and a 5-point base arc.
    for i in 0..4 {
        pts.push([250.0 + 1.2 * wob(i, 4.3), 205.0 + 17.0 * i as f64]);
    }
    for i in 0..5 {
        let x = 228.0 + 11.0 * i as f64 + 0.6 * wob(i, 3.3);
        let y = 266.0 + 4.0 * (1.0 - (i as f64 - 2.0).abs() / 2.0);
        pts.push([x, y + 0.4 * wob(i, 5.1)]);
    }
    // Mouth: 10 outer-lip points on an ellipse plus 4 inner points.
    for i in 0..10 {
        let theta = std::f64::consts::TAU * i as f64 / 10.0 + 0.15;
        let rx = 38.0 * (1.0 + 0.02 * wob(i, 2.9));
        let ry = 16.0 * (1.0 + 0.02 * wob(i, 4.1));
        pts.push([250.0 + rx * theta.cos(), 315.0 + ry * theta.sin()]);
    }
    pts.push([236.0, 315.3]);
    pts.push([250.0, 310.6]);
    pts.push([264.0, 314.6]);
    pts.push([250.0, 319.8]);

    debug_assert_eq!(pts.len(), SYNTH_LANDMARKS);
    pts
}

/// Per-class animation and audio parameters. Classes differ structurally:
/// the number of mouth/brow oscillation cycles and the number of audio
/// valleys drive how many distinct intervals each filtration produces, which
/// pins the entropies to well-separated per-class levels.
struct ClassParams {
    mouth_amp: f64,
    mouth_cycles: f64,
    brow_amp: f64,
    brow_cycles: f64,
    audio_valleys: usize,
}

fn class_params(class: usize) -> ClassParams {
    let c = class as f64;
    ClassParams {
        mouth_amp: 6.0 + 1.5 * c,
        mouth_cycles: 1.0 + 0.5 * c,
        brow_amp: 3.0 + 1.2 * (6.0 - c),
        brow_cycles: 1.0 + 0.25 * (6.0 - c),
        audio_valleys: 2 * class + 2,
    }
}

fn synth_frames(class: usize, rng: &mut ChaCha8Rng) -> Vec<LandmarkFrame> {
    let template = face_template();
    let p = class_params(class);
    let mouth_amp = p.mouth_amp * (1.0 + 0.04 * rng.gen_range(-1.0..1.0));
    let brow_amp = p.brow_amp * (1.0 + 0.04 * rng.gen_range(-1.0..1.0));
    // Phases are fixed per class: the gesture shape is the class identity,
    // only its magnitude and the landmark placement jitter per video.
    let mouth_phase = 0.3 + 0.11 * class as f64;
    let brow_phase = 1.1 + 0.13 * class as f64;
    let offsets: Vec<[f64; 2]> = (0..template.len())
        .map(|_| [rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4)])
        .collect();

    (0..SYNTH_FRAMES)
        .map(|t| {
            let phase = std::f64::consts::TAU * t as f64 / SYNTH_FRAMES as f64;
            let mouth = (p.mouth_cycles * phase + mouth_phase).sin();
            let brow = (p.brow_cycles * phase + brow_phase).sin().abs();
            let points = template
                .iter()
                .enumerate()
                .map(|(i, &[x, y])| {
                    let mut y = y + offsets[i][1];
                    let x = x + offsets[i][0];
                    if MOUTH_RANGE.contains(&i) {
                        // Lower-lip points (template y below the lip center)
                        // open downward, upper-lip points upward.
                        let weight = if y > 315.0 { 1.0 } else { -0.4 };
                        y += mouth_amp * mouth * weight;
                    }
                    if BROW_RANGE.contains(&i) {
                        y -= brow_amp * brow;
                    }
                    [x, y]
                })
                .collect();
            LandmarkFrame {
                points,
                frame_index: t,
            }
        })
        .collect()
}

fn synth_audio(class: usize, rng: &mut ChaCha8Rng) -> AudioSignal {
    let p = class_params(class);
    let valleys = p.audio_valleys;
    let n = SYNTH_AUDIO_LEN;
    let mut samples = vec![1.0f64; n];
    let segment = n as f64 / valleys as f64;
    for v in 0..valleys {
        let center = (v as f64 + 0.5) * segment + rng.gen_range(-0.05..0.05) * segment;
        let half_width = 0.3 * segment;
        let depth = 0.5 * (1.0 + 0.02 * rng.gen_range(-1.0..1.0));
        let lo = ((center - half_width).floor().max(0.0)) as usize;
        let hi = ((center + half_width).ceil() as usize).min(n - 1);
        for (t, sample) in samples.iter_mut().enumerate().take(hi + 1).skip(lo) {
            let x = (t as f64 - center) / half_width;
            if x.abs() < 1.0 {
                *sample -= depth * 0.5 * (1.0 + (std::f64::consts::PI * x).cos());
            }
        }
    }
    AudioSignal {
        samples,
        sample_rate: 16_000,
    }
}

/// Generates `per_class` records per emotion. Deterministic per seed;
/// classes are separable by construction (the audio entropy alone separates
/// every pair of classes).
pub fn synth_dataset(seed: u64, per_class: usize) -> Vec<VideoRecord> {
    let mut records = Vec::with_capacity(7 * per_class);
    for emotion in EmotionLabel::ALL {
        let class = emotion.class_index();
        for idx in 0..per_class {
            let stream = seed.wrapping_add(
                ((class * 1_000_003 + idx) as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
            );
            let mut rng = ChaCha8Rng::seed_from_u64(stream);
            let frames = synth_frames(class, &mut rng);
            let audio = synth_audio(class, &mut rng);
            records.push(VideoRecord {
                video_id: format!("synth-{}-{idx:03}", emotion.as_str()),
                actor: (idx % 24) as u8 + 1,
                emotion,
                intensity: if idx % 2 == 0 {
                    Intensity::Normal
                } else {
                    Intensity::Strong
                },
                statement: (idx / 2 % 2) as u8 + 1,
                repetition: (idx / 4 % 2) as u8 + 1,
                frames,
                audio,
            });
        }
    }
    records
}

/// The RAVDESS-style raw filename of a synthetic record.
pub fn synth_raw_name(record: &VideoRecord) -> String {
    RavdessMeta {
        modality: 1,
        vocal_channel: 1,
        emotion_code: record.emotion.class_index() as u8 + 2,
        intensity_code: match record.intensity {
            Intensity::Normal => 1,
            Intensity::Strong => 2,
        },
        statement: record.statement,
        repetition: record.repetition,
        actor: record.actor,
    }
    .filename()
}
