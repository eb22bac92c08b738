//! Fault-injection exploration over a word corpus.
//!
//! Each word is interpreted by both codecs; the same 32 fault specs (one per
//! first-bit position) are applied to it and each corrupted pattern is decoded
//! by both formats. Per word and format this yields an [`MredRecord`]
//! (mean relative error distance over the injections with a finite outcome);
//! per injection the two relative errors are compared exactly.
//!
//! Work is split into fixed-size chunks processed on a rayon pool, and chunk
//! results are folded strictly in word order, so every output is independent
//! of the worker count.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::io::{self, Write};
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::exact::{abs_diff, compare_relative_errors, floor_log2_rational, format_scientific, BigDyadic, Dyadic};
use crate::fault::{flip, injections_for_word, FaultSpec, SeededDraw, UpsetMode, WORD_BITS};
use crate::float32::float_decode;
use crate::posit32::{posit_decode, NAR};
use crate::word::{DecodedNumber, Format, NumberClass, RawWord32};

/// Significant digits of `mred_decimal`.
pub const MRED_DIGITS: usize = 17;
const CHUNK_WORDS: u64 = 4096;
const CHUNKS_PER_BATCH: u64 = 16;
/// Stream id of corpus generation; fault streams use the word index, which
/// never reaches this value.
const CORPUS_STREAM: u64 = u64::MAX;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("{format} word {word} has a zero golden value and zero-golden exclusion is off")]
    DegenerateGolden { word: RawWord32, format: Format },
    #[error("{format} word {word} decodes to {class}; no golden value")]
    NonFiniteGolden {
        word: RawWord32,
        format: Format,
        class: NumberClass,
    },
    #[error("worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: `{text}` is not a 32-bit hex word")]
    Parse { line: usize, text: String },
    #[error("sequential corpus {start:#010x}+{count} runs past 0xFFFFFFFF")]
    SequentialRange { start: u32, count: u64 },
    #[error("corpus spec `{0}` not understood (uniform:N | seq:START:N | exhaustive | file:PATH)")]
    Spec(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorpusSource {
    UniformRandom { count: u64, seed: u64 },
    Sequential { start: u32, count: u64 },
    /// All 2^32 patterns.
    Exhaustive,
    /// Explicit list, e.g. read from a words file.
    Words(Vec<RawWord32>),
}

impl CorpusSource {
    pub fn sequential(start: u32, count: u64) -> Result<Self, CorpusError> {
        if start as u64 + count > 1u64 << 32 {
            return Err(CorpusError::SequentialRange { start, count });
        }
        Ok(CorpusSource::Sequential { start, count })
    }

    /// Parses one hex word per line; blank lines and `#` comments are skipped.
    pub fn parse_words(text: &str) -> Result<Self, CorpusError> {
        let mut words = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let word = line.parse::<RawWord32>().map_err(|_| CorpusError::Parse {
                line: i + 1,
                text: line.to_string(),
            })?;
            words.push(word);
        }
        Ok(CorpusSource::Words(words))
    }

    pub fn from_words_file(path: &Path) -> Result<Self, CorpusError> {
        let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse_words(&text)
    }

    pub fn len(&self) -> u64 {
        match self {
            CorpusSource::UniformRandom { count, .. } => *count,
            CorpusSource::Sequential { count, .. } => *count,
            CorpusSource::Exhaustive => 1 << 32,
            CorpusSource::Words(words) => words.len() as u64,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Words `start..start + len`; random access, so any chunk can be
    /// generated independently.
    pub fn words(&self, start: u64, len: u64) -> Vec<RawWord32> {
        let end = (start + len).min(self.len());
        match self {
            CorpusSource::UniformRandom { seed, .. } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_stream(CORPUS_STREAM);
                rng.set_word_pos(start as u128);
                (start..end).map(|_| RawWord32(rng.next_u32())).collect()
            }
            CorpusSource::Sequential { start: s, .. } => {
                (start..end).map(|i| RawWord32(*s + i as u32)).collect()
            }
            CorpusSource::Exhaustive => (start..end).map(|i| RawWord32(i as u32)).collect(),
            CorpusSource::Words(words) => words[start as usize..end as usize].to_vec(),
        }
    }

    /// Canonical text form, the inverse of [`CorpusSource::parse_spec`] (file
    /// corpora print the path they were loaded from, which the caller owns).
    pub fn describe(&self) -> String {
        match self {
            CorpusSource::UniformRandom { count, .. } => format!("uniform:{count}"),
            CorpusSource::Sequential { start, count } => format!("seq:{start:#010x}:{count}"),
            CorpusSource::Exhaustive => "exhaustive".to_string(),
            CorpusSource::Words(words) => format!("words:{}", words.len()),
        }
    }

    /// `uniform:N | seq:START:N | exhaustive | file:PATH`; `seed` feeds the
    /// uniform generator.
    pub fn parse_spec(spec: &str, seed: u64) -> Result<Self, CorpusError> {
        let bad = || CorpusError::Spec(spec.to_string());
        if spec == "exhaustive" {
            return Ok(CorpusSource::Exhaustive);
        }
        if let Some(n) = spec.strip_prefix("uniform:") {
            let count = parse_count(n).ok_or_else(bad)?;
            return Ok(CorpusSource::UniformRandom { count, seed });
        }
        if let Some(rest) = spec.strip_prefix("seq:") {
            let (start, count) = rest.split_once(':').ok_or_else(bad)?;
            let start = parse_u32(start).ok_or_else(bad)?;
            let count = parse_count(count).ok_or_else(bad)?;
            return Self::sequential(start, count);
        }
        if let Some(path) = spec.strip_prefix("file:") {
            return Self::from_words_file(Path::new(path));
        }
        Err(bad())
    }
}

fn parse_count(s: &str) -> Option<u64> {
    let s = s.trim().replace('_', "");
    if let Some((mantissa, exp)) = s.split_once(['e', 'E']) {
        let m: u64 = mantissa.parse().ok()?;
        let e: u32 = exp.parse().ok()?;
        return m.checked_mul(10u64.checked_pow(e)?);
    }
    s.parse().ok()
}

fn parse_u32(s: &str) -> Option<u32> {
    let s = s.trim();
    match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u32::from_str_radix(hex, 16).ok(),
        None => s.parse().ok(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordCorpus {
    pub source: CorpusSource,
    /// Skip zero-golden words for MRED instead of failing on them.
    pub exclude_zero_golden: bool,
}

impl WordCorpus {
    pub fn new(source: CorpusSource) -> Self {
        WordCorpus {
            source,
            exclude_zero_golden: true,
        }
    }
}

/// Per-word, per-format resilience statistics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MredRecord {
    pub word: RawWord32,
    pub format: Format,
    pub mode: UpsetMode,
    /// `(1/n) Σ |V − V*_i| / |V|`; absent when the golden value is zero or
    /// special, or when no injection produced a finite outcome.
    pub mred: Option<BigRational>,
    /// Injections contributing to the mean.
    pub n_valid_bits: u32,
    /// Injections whose outcome is NaN, NaR, or an infinity.
    pub n_special_outcomes: u32,
}

impl MredRecord {
    pub fn mred_decimal(&self) -> String {
        self.mred
            .as_ref()
            .map(|m| format_scientific(m, MRED_DIGITS))
            .unwrap_or_default()
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.word,
            self.format,
            self.mode,
            self.mred_decimal(),
            self.n_valid_bits,
            self.n_special_outcomes
        )
    }
}

pub const RECORD_CSV_HEADER: &str = "word_hex,format,mode,mred_decimal,n_valid_bits,n_special_outcomes";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum GoldenKind {
    Valued,
    Zero,
    Special,
}

fn golden_kind(golden: &DecodedNumber) -> GoldenKind {
    match golden.class {
        NumberClass::Zero => GoldenKind::Zero,
        c if c.has_value() => GoldenKind::Valued,
        _ => GoldenKind::Special,
    }
}

/// Accumulates one format's view of one word's injections.
struct FormatAccumulator {
    format: Format,
    golden: DecodedNumber,
    kind: GoldenKind,
    abs_sum: BigDyadic,
    n_valid: u32,
    n_special: u32,
    nan: u32,
    nar: u32,
    inf: u32,
}

impl FormatAccumulator {
    fn new(format: Format, golden: DecodedNumber) -> Self {
        FormatAccumulator {
            format,
            kind: golden_kind(&golden),
            golden,
            abs_sum: BigDyadic::zero(),
            n_valid: 0,
            n_special: 0,
            nan: 0,
            nar: 0,
            inf: 0,
        }
    }

    fn push(&mut self, outcome: &DecodedNumber) {
        match outcome.class {
            NumberClass::Nan => self.nan += 1,
            NumberClass::Nar => self.nar += 1,
            NumberClass::Infinity => self.inf += 1,
            _ => {
                if self.kind == GoldenKind::Valued {
                    self.n_valid += 1;
                    self.abs_sum = self.abs_sum.add(&abs_diff(self.golden.value, outcome.value));
                }
                return;
            }
        }
        self.n_special += 1;
    }

    fn record(&self, word: RawWord32, mode: UpsetMode) -> MredRecord {
        let mred = (self.kind == GoldenKind::Valued && self.n_valid > 0).then(|| {
            let denominator = self.golden.value.abs().to_rational()
                * BigRational::from_integer(BigInt::from(self.n_valid));
            self.abs_sum.to_rational() / denominator
        });
        MredRecord {
            word,
            format: self.format,
            mode,
            mred,
            n_valid_bits: self.n_valid,
            n_special_outcomes: self.n_special,
        }
    }
}

/// MRED of one word in one format. Zero-golden words yield a record without
/// a mean when `exclude_zero_golden` is set and an error otherwise; words
/// whose golden decode is NaN, NaR, or infinite are rejected.
pub fn mred_for_word(
    word: RawWord32,
    format: Format,
    mode: UpsetMode,
    draw: SeededDraw,
    exclude_zero_golden: bool,
) -> Result<MredRecord, SweepError> {
    let golden = format.decode(word);
    match golden_kind(&golden) {
        GoldenKind::Special => {
            return Err(SweepError::NonFiniteGolden {
                word,
                format,
                class: golden.class,
            })
        }
        GoldenKind::Zero if !exclude_zero_golden => {
            return Err(SweepError::DegenerateGolden { word, format })
        }
        _ => {}
    }
    let mut acc = FormatAccumulator::new(format, golden);
    for spec in injections_for_word(mode, draw) {
        acc.push(&format.decode(flip(word, &spec)));
    }
    Ok(acc.record(word, mode))
}

/// Tallies for one format over a sweep.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FormatTally {
    pub nan_created: u64,
    pub nar_created: u64,
    pub inf_created: u64,
    /// Words whose golden value is zero in this format.
    pub zero_golden_words: u64,
    /// The share of the created counts above coming from zero-golden words.
    pub zero_golden_nan: u64,
    pub zero_golden_nar: u64,
    pub zero_golden_inf: u64,
    /// Words whose golden decode is NaN, NaR, or infinite; their injections
    /// are not counted as created specials.
    pub special_golden_words: u64,
    /// Words with a defined MRED.
    pub mred_words: u64,
    pub mred_sum: f64,
    pub mred_log2_sum: f64,
    /// `floor(log2 mred)` → word count.
    pub histogram: BTreeMap<i64, u64>,
}

impl FormatTally {
    pub fn mred_mean(&self) -> Option<f64> {
        (self.mred_words > 0).then(|| self.mred_sum / self.mred_words as f64)
    }

    pub fn mred_geomean(&self) -> Option<f64> {
        (self.mred_words > 0).then(|| (self.mred_log2_sum / self.mred_words as f64).exp2())
    }

    /// Created specials excluding zero-golden words.
    pub fn nar_created_nonzero_golden(&self) -> u64 {
        self.nar_created - self.zero_golden_nar
    }

    pub fn nan_created_nonzero_golden(&self) -> u64 {
        self.nan_created - self.zero_golden_nan
    }

    fn absorb(&mut self, acc: &FormatAccumulator, record: &MredRecord) {
        match acc.kind {
            GoldenKind::Special => {
                self.special_golden_words += 1;
                return;
            }
            GoldenKind::Zero => {
                self.zero_golden_words += 1;
                self.zero_golden_nan += acc.nan as u64;
                self.zero_golden_nar += acc.nar as u64;
                self.zero_golden_inf += acc.inf as u64;
            }
            GoldenKind::Valued => {}
        }
        self.nan_created += acc.nan as u64;
        self.nar_created += acc.nar as u64;
        self.inf_created += acc.inf as u64;
        if let Some(m) = &record.mred {
            self.mred_words += 1;
            let v = m.to_f64().unwrap_or(f64::INFINITY);
            self.mred_sum += v;
            self.mred_log2_sum += v.log2();
            // every valued outcome differs from the golden value, so mred > 0
            if !m.is_zero() {
                *self.histogram.entry(floor_log2_rational(m)).or_insert(0) += 1;
            }
        }
    }

    fn merge(&mut self, other: &FormatTally) {
        self.nan_created += other.nan_created;
        self.nar_created += other.nar_created;
        self.inf_created += other.inf_created;
        self.zero_golden_words += other.zero_golden_words;
        self.zero_golden_nan += other.zero_golden_nan;
        self.zero_golden_nar += other.zero_golden_nar;
        self.zero_golden_inf += other.zero_golden_inf;
        self.special_golden_words += other.special_golden_words;
        self.mred_words += other.mred_words;
        self.mred_sum += other.mred_sum;
        self.mred_log2_sum += other.mred_log2_sum;
        for (bucket, count) in &other.histogram {
            *self.histogram.entry(*bucket).or_insert(0) += count;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub mode: UpsetMode,
    pub words: u64,
    /// Paired trials; each applies one fault spec to both formats.
    pub total_injections: u64,
    /// Posit relative error strictly below float's.
    pub posit_wins: u64,
    pub float_wins: u64,
    pub ties: u64,
    /// Either golden value is zero or special, or either outcome is special.
    pub incomparable: u64,
    pub float: FormatTally,
    pub posit: FormatTally,
}

impl SweepSummary {
    fn empty(mode: UpsetMode) -> Self {
        SweepSummary {
            mode,
            words: 0,
            total_injections: 0,
            posit_wins: 0,
            float_wins: 0,
            ties: 0,
            incomparable: 0,
            float: FormatTally::default(),
            posit: FormatTally::default(),
        }
    }

    pub fn comparable(&self) -> u64 {
        self.posit_wins + self.float_wins + self.ties
    }

    /// Posit wins over comparable trials.
    pub fn posit_win_rate(&self) -> f64 {
        self.posit_wins as f64 / self.comparable().max(1) as f64
    }

    pub fn tally(&self, format: Format) -> &FormatTally {
        match format {
            Format::Float32 => &self.float,
            Format::Posit32 => &self.posit,
        }
    }

    pub fn wins(&self, format: Format) -> u64 {
        match format {
            Format::Float32 => self.float_wins,
            Format::Posit32 => self.posit_wins,
        }
    }

    fn merge(&mut self, other: &SweepSummary) {
        self.words += other.words;
        self.total_injections += other.total_injections;
        self.posit_wins += other.posit_wins;
        self.float_wins += other.float_wins;
        self.ties += other.ties;
        self.incomparable += other.incomparable;
        self.float.merge(&other.float);
        self.posit.merge(&other.posit);
    }

    /// Human-readable one-liner for the terminal.
    pub fn headline(&self) -> String {
        format!(
            "{} words={} injections={} posit_win_rate={:.6} (wins={} float_wins={} ties={} incomparable={}) float_nan={} float_inf={} posit_nar={} posit_nar_nonzero_golden={}",
            self.mode,
            self.words,
            self.total_injections,
            self.posit_win_rate(),
            self.posit_wins,
            self.float_wins,
            self.ties,
            self.incomparable,
            self.float.nan_created,
            self.float.inf_created,
            self.posit.nar_created,
            self.posit.nar_created_nonzero_golden(),
        )
    }
}

/// Both formats' records for one word plus its contribution to the summary.
struct WordOutcome {
    records: [MredRecord; 2],
}

fn analyze_word(
    index: u64,
    word: RawWord32,
    mode: UpsetMode,
    seed: u64,
    exclude_zero_golden: bool,
    summary: &mut SweepSummary,
) -> Result<WordOutcome, SweepError> {
    let mut float = FormatAccumulator::new(Format::Float32, float_decode(word));
    let mut posit = FormatAccumulator::new(Format::Posit32, posit_decode(word));
    for acc in [&float, &posit] {
        if acc.kind == GoldenKind::Zero && !exclude_zero_golden {
            return Err(SweepError::DegenerateGolden {
                word,
                format: acc.format,
            });
        }
    }
    let specs: [FaultSpec; WORD_BITS as usize] = injections_for_word(mode, SeededDraw::new(seed, index));
    for spec in &specs {
        let corrupted = flip(word, spec);
        let fo = float_decode(corrupted);
        let po = posit_decode(corrupted);
        float.push(&fo);
        posit.push(&po);
        summary.total_injections += 1;
        let comparable = float.kind == GoldenKind::Valued
            && posit.kind == GoldenKind::Valued
            && fo.class.has_value()
            && po.class.has_value();
        if !comparable {
            summary.incomparable += 1;
            continue;
        }
        match compare_relative_errors((posit.golden.value, po.value), (float.golden.value, fo.value)) {
            Ordering::Less => summary.posit_wins += 1,
            Ordering::Greater => summary.float_wins += 1,
            Ordering::Equal => summary.ties += 1,
        }
    }
    let records = [float.record(word, mode), posit.record(word, mode)];
    summary.float.absorb(&float, &records[0]);
    summary.posit.absorb(&posit, &records[1]);
    summary.words += 1;
    Ok(WordOutcome { records })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepConfig {
    pub corpus: WordCorpus,
    pub mode: UpsetMode,
    pub seed: u64,
    /// Worker threads; results do not depend on it.
    pub workers: usize,
}

impl SweepConfig {
    /// A warning when the run is very large.
    pub fn cost_warning(&self) -> Option<String> {
        let injections = self.corpus.source.len() as u128 * WORD_BITS as u128;
        (self.mode == UpsetMode::Mbu && self.corpus.source == CorpusSource::Exhaustive).then(|| {
            format!(
                "exhaustive MBU sweep: {injections} paired injections, each with a ChaCha draw; expect many CPU-hours"
            )
        })
    }
}

fn process_chunk(
    config: &SweepConfig,
    start: u64,
) -> Result<(SweepSummary, Vec<MredRecord>), SweepError> {
    let words = config.corpus.source.words(start, CHUNK_WORDS);
    let mut summary = SweepSummary::empty(config.mode);
    let mut records = Vec::with_capacity(words.len() * 2);
    for (offset, word) in words.into_iter().enumerate() {
        let outcome = analyze_word(
            start + offset as u64,
            word,
            config.mode,
            config.seed,
            config.corpus.exclude_zero_golden,
            &mut summary,
        )?;
        records.extend(outcome.records);
    }
    Ok((summary, records))
}

/// Runs the sweep, streaming records (float then posit for each word, in
/// word order) to `on_record`.
pub fn run_sweep<F>(config: &SweepConfig, mut on_record: F) -> Result<SweepSummary, SweepError>
where
    F: FnMut(&MredRecord) -> io::Result<()>,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))?;
    let total = config.corpus.source.len();
    let chunks = total.div_ceil(CHUNK_WORDS);
    let mut summary = SweepSummary::empty(config.mode);
    let mut next = 0;
    while next < chunks {
        let end = (next + CHUNKS_PER_BATCH).min(chunks);
        let results: Vec<_> = pool.install(|| {
            (next..end)
                .into_par_iter()
                .map(|c| process_chunk(config, c * CHUNK_WORDS))
                .collect()
        });
        for result in results {
            let (partial, records) = result?;
            summary.merge(&partial);
            for record in &records {
                on_record(record)?;
            }
        }
        next = end;
    }
    Ok(summary)
}

pub const SUMMARY_CSV_HEADER: &str = "format,mode,total_injections,win_count,tie_count,incomparable_count,nan_created,nar_created,inf_created,mred_geomean,mred_mean,mred_words,zero_golden_words,zero_golden_nan,zero_golden_nar,zero_golden_inf,special_golden_words";

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

pub fn summary_csv_row(summary: &SweepSummary, format: Format) -> String {
    let t = summary.tally(format);
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        format,
        summary.mode,
        summary.total_injections,
        summary.wins(format),
        summary.ties,
        summary.incomparable,
        t.nan_created,
        t.nar_created,
        t.inf_created,
        fmt_opt(t.mred_geomean()),
        fmt_opt(t.mred_mean()),
        t.mred_words,
        t.zero_golden_words,
        t.zero_golden_nan,
        t.zero_golden_nar,
        t.zero_golden_inf,
        t.special_golden_words,
    )
}

pub const HISTOGRAM_CSV_HEADER: &str = "format,mode,log2_bucket,count";

pub fn write_histogram_csv<W: Write>(out: &mut W, summary: &SweepSummary, formats: &[Format]) -> io::Result<()> {
    writeln!(out, "{HISTOGRAM_CSV_HEADER}")?;
    for &format in formats {
        for (bucket, count) in &summary.tally(format).histogram {
            writeln!(out, "{},{},{},{}", format, summary.mode, bucket, count)?;
        }
    }
    Ok(())
}

pub fn write_summary_csv<W: Write>(out: &mut W, summary: &SweepSummary, formats: &[Format]) -> io::Result<()> {
    writeln!(out, "{SUMMARY_CSV_HEADER}")?;
    for &format in formats {
        writeln!(out, "{}", summary_csv_row(summary, format))?;
    }
    Ok(())
}

/// Exact single-flip probabilities of creating a special value, over a
/// uniformly random word and a uniformly random bit position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecialCreationOracle {
    /// Outcome is NaN, whatever the golden class.
    pub float_nan_any: BigRational,
    /// Golden finite (including zero and subnormal), outcome NaN.
    pub float_nan_from_finite: BigRational,
    /// Golden infinity, outcome NaN.
    pub float_nan_from_infinity: BigRational,
    /// Golden NaN that stays NaN.
    pub float_nan_from_nan: BigRational,
    /// Outcome is NaR.
    pub posit_nar_any: BigRational,
    /// Outcome is NaR and the golden word is not zero.
    pub posit_nar_nonzero_golden: BigRational,
}

/// Enumerates (exponent field, sign, bit) exhaustively and counts the
/// fraction fields leading to NaN in closed form; the posit side walks the
/// Hamming-1 neighbours of NaR, the only words one flip away from it.
pub fn nan_creation_oracle() -> SpecialCreationOracle {
    const FRACTIONS: u64 = 1 << 23;
    let mut from_finite = 0u64;
    let mut from_inf = 0u64;
    let mut from_nan = 0u64;
    for _sign in 0..2 {
        for exponent in 0u32..256 {
            for bit in 0u32..32 {
                match bit {
                    23..=30 => {
                        // fraction unchanged and must be nonzero
                        if exponent ^ (1 << (bit - 23)) == 0xFF {
                            let count = FRACTIONS - 1;
                            if exponent == 0xFF {
                                from_nan += count;
                            } else {
                                from_finite += count;
                            }
                        }
                    }
                    0..=22 if exponent == 0xFF => {
                        // flipped fraction nonzero unless golden was exactly 1 << bit
                        from_inf += 1; // golden fraction 0
                        from_nan += FRACTIONS - 2;
                    }
                    31 if exponent == 0xFF => from_nan += FRACTIONS - 1,
                    _ => {}
                }
            }
        }
    }
    let mut nar_any = 0u64;
    let mut nar_nonzero = 0u64;
    for bit in 0..WORD_BITS {
        let golden = RawWord32(NAR.0 ^ (1 << bit));
        let spec = FaultSpec::seu(bit).expect("bit in range");
        if posit_decode(flip(golden, &spec)).class == NumberClass::Nar {
            nar_any += 1;
            if posit_decode(golden).class != NumberClass::Zero {
                nar_nonzero += 1;
            }
        }
    }
    let trials = BigInt::from(1u64 << 37);
    let p = |n: u64| BigRational::new(BigInt::from(n), trials.clone());
    SpecialCreationOracle {
        float_nan_any: p(from_finite + from_inf + from_nan),
        float_nan_from_finite: p(from_finite),
        float_nan_from_infinity: p(from_inf),
        float_nan_from_nan: p(from_nan),
        posit_nar_any: p(nar_any),
        posit_nar_nonzero_golden: p(nar_nonzero),
    }
}

impl SpecialCreationOracle {
    pub fn csv(&self) -> String {
        let rows = [
            ("float32", "nan_any", &self.float_nan_any),
            ("float32", "nan_from_finite", &self.float_nan_from_finite),
            ("float32", "nan_from_infinity", &self.float_nan_from_infinity),
            ("float32", "nan_from_nan", &self.float_nan_from_nan),
            ("posit32", "nar_any", &self.posit_nar_any),
            ("posit32", "nar_nonzero_golden", &self.posit_nar_nonzero_golden),
        ];
        let mut out = String::from("format,event,probability_exact,probability_decimal\n");
        for (format, event, p) in rows {
            out.push_str(&format!("{format},{event},{p},{}\n", format_scientific(p, MRED_DIGITS)));
        }
        out
    }
}

/// Relative error `|V − V*| / |V|` of one injection, for callers that want a
/// single trial rather than a whole record.
pub fn injection_relative_error(golden: Dyadic, outcome: &DecodedNumber) -> Option<BigRational> {
    if golden.is_zero() {
        return None;
    }
    outcome
        .finite_value()
        .map(|v| crate::exact::relative_error(golden, v))
}
