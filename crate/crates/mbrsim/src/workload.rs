//! Core-level workload generators.
//!
//! Three kinds: the saturating buffer writer (back-to-back bus writes,
//! forever), intensity profiles standing in for benchmark behavior
//! (`accesses_per_kilo` bus accesses per 1000 retired instructions, spread
//! evenly), and replayable traces.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::errors::TraceLoadError;

/// Upper bound on profile intensity: at most one access per instruction.
pub const MAX_ACCESSES_PER_KILO: u32 = 1000;

/// Instruction count shared by the named benchmark presets.
pub const PRESET_TOTAL_INSTRUCTIONS: u64 = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceEntry {
    pub gap_instructions: u64,
    pub access_count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileKind {
    /// Continuously writes a buffer sized to the LLC: every operation is a
    /// bus access, no compute gap, never finishes.
    SaturatingWriter,
    /// Evenly spread accesses over a fixed instruction count.
    Intensity {
        accesses_per_kilo: u32,
        total_instructions: u64,
    },
    /// Replays `(gap, burst)` records exactly once.
    Trace { entries: Arc<Vec<TraceEntry>> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadProfile {
    pub name: String,
    pub kind: ProfileKind,
    /// Ticks per non-memory instruction.
    pub base_cpi: u64,
}

impl WorkloadProfile {
    pub fn saturating_writer() -> Self {
        WorkloadProfile {
            name: "saturating_writer".to_string(),
            kind: ProfileKind::SaturatingWriter,
            base_cpi: 1,
        }
    }

    pub fn intensity(
        name: impl Into<String>,
        accesses_per_kilo: u32,
        total_instructions: u64,
    ) -> Result<Self, String> {
        if accesses_per_kilo > MAX_ACCESSES_PER_KILO {
            return Err(format!(
                "accesses_per_kilo_instructions must be in 0..={MAX_ACCESSES_PER_KILO}, got {accesses_per_kilo}"
            ));
        }
        if total_instructions == 0 {
            return Err("total_instructions must be positive".to_string());
        }
        Ok(WorkloadProfile {
            name: name.into(),
            kind: ProfileKind::Intensity {
                accesses_per_kilo,
                total_instructions,
            },
            base_cpi: 1,
        })
    }

    pub fn is_writer(&self) -> bool {
        matches!(self.kind, ProfileKind::SaturatingWriter)
    }

    /// Finite profiles terminate; the run may stop once all of them have.
    pub fn is_finite(&self) -> bool {
        !self.is_writer()
    }
}

/// Named intensity presets. The absolute values are calibration artifacts;
/// what the library guarantees is their order: the susan variants are the
/// most memory-bound, qsort and bitcount sit in the middle, and basicmath
/// barely touches the bus.
const PRESETS: &[(&str, u32)] = &[
    ("susanc_small", 23),
    ("susane_small", 21),
    ("susans_small", 16),
    ("bitcount_small", 9),
    ("qsort_small", 8),
    ("basicmath_small", 1),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

pub fn preset(name: &str) -> Option<WorkloadProfile> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(n, apk)| {
        WorkloadProfile::intensity(*n, *apk, PRESET_TOTAL_INSTRUCTIONS)
            .expect("presets are valid")
    })
}

/// Loads a trace file: one `<gap_instructions> <access_count>` record per
/// line, `#` starts a comment, blank lines are skipped, and the file must
/// end with a newline.
pub fn load_trace(path: impl AsRef<Path>) -> Result<WorkloadProfile, TraceLoadError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let profile_name = format!("trace:{}", path.display());
    parse_trace(&text, profile_name)
}

pub fn parse_trace(text: &str, name: String) -> Result<WorkloadProfile, TraceLoadError> {
    if !text.is_empty() && !text.ends_with('\n') {
        return Err(TraceLoadError::MissingNewline);
    }
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut fields = content.split_whitespace();
        let gap = parse_field(fields.next(), line, "gap_instructions")?;
        let count = parse_field(fields.next(), line, "access_count")?;
        if fields.next().is_some() {
            return Err(TraceLoadError::Parse {
                line,
                message: "expected exactly two fields: <gap_instructions> <access_count>".into(),
            });
        }
        entries.push(TraceEntry {
            gap_instructions: gap,
            access_count: count,
        });
    }
    if entries.is_empty() {
        return Err(TraceLoadError::Empty);
    }
    Ok(WorkloadProfile {
        name,
        kind: ProfileKind::Trace {
            entries: Arc::new(entries),
        },
        base_cpi: 1,
    })
}

fn parse_field(field: Option<&str>, line: usize, what: &str) -> Result<u64, TraceLoadError> {
    let raw = field.ok_or_else(|| TraceLoadError::Parse {
        line,
        message: format!("missing {what}"),
    })?;
    raw.parse::<u64>().map_err(|_| TraceLoadError::Parse {
        line,
        message: format!("{what} must be a non-negative integer, got '{raw}'"),
    })
}

/// One step of a workload's action stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    /// Retire this many ticks of compute before the next boundary.
    Compute(u64),
    /// Issue one bus access and block until it retires.
    MemAccess,
    Done,
}

#[derive(Debug, Clone)]
struct Jitter {
    rng: ChaCha8Rng,
    amplitude: u64,
}

#[derive(Debug, Clone)]
enum CursorKind {
    Writer,
    Intensity {
        accesses_per_kilo: u64,
        total_instructions: u64,
        accesses_total: u64,
        instr_done: u64,
        accesses_done: u64,
        pending_target: Option<u64>,
    },
    Trace {
        entries: Arc<Vec<TraceEntry>>,
        entry: usize,
        gap_emitted: bool,
        accesses_emitted: u64,
    },
    Empty,
}

/// Action-stream position for one core. Deterministic unless seeded jitter
/// is enabled, and deterministic per seed even then.
#[derive(Debug, Clone)]
pub struct Cursor {
    kind: CursorKind,
    base_cpi: u64,
    jitter: Option<Jitter>,
}

impl Cursor {
    pub fn new(profile: &WorkloadProfile, jitter: Option<(u64, u64)>) -> Self {
        let kind = match &profile.kind {
            ProfileKind::SaturatingWriter => CursorKind::Writer,
            ProfileKind::Intensity {
                accesses_per_kilo,
                total_instructions,
            } => CursorKind::Intensity {
                accesses_per_kilo: u64::from(*accesses_per_kilo),
                total_instructions: *total_instructions,
                accesses_total: total_instructions * u64::from(*accesses_per_kilo) / 1000,
                instr_done: 0,
                accesses_done: 0,
                pending_target: None,
            },
            ProfileKind::Trace { entries } => CursorKind::Trace {
                entries: Arc::clone(entries),
                entry: 0,
                gap_emitted: false,
                accesses_emitted: 0,
            },
        };
        let jitter = jitter.and_then(|(amplitude, seed)| {
            if amplitude == 0 {
                None
            } else {
                Some(Jitter {
                    rng: ChaCha8Rng::seed_from_u64(seed),
                    amplitude,
                })
            }
        });
        Cursor {
            kind,
            base_cpi: profile.base_cpi,
            jitter,
        }
    }

    pub fn empty() -> Self {
        Cursor {
            kind: CursorKind::Empty,
            base_cpi: 1,
            jitter: None,
        }
    }

    pub fn is_finite(&self) -> bool {
        !matches!(self.kind, CursorKind::Writer)
    }

    /// Whether the stream is exhausted, without consuming anything.
    pub fn peek_done(&self) -> bool {
        self.clone().next_action() == Action::Done
    }

    pub fn next_action(&mut self) -> Action {
        let cpi = self.base_cpi;
        match &mut self.kind {
            CursorKind::Writer => Action::MemAccess,
            CursorKind::Empty => Action::Done,
            CursorKind::Intensity {
                accesses_per_kilo,
                total_instructions,
                accesses_total,
                instr_done,
                accesses_done,
                pending_target,
            } => {
                if accesses_done < accesses_total {
                    if pending_target.is_none() {
                        // Access k lands after instruction ceil(1000k / apk),
                        // which keeps the long-run rate exact under flooring.
                        let k = *accesses_done + 1;
                        let mut target = (k * 1000).div_ceil(*accesses_per_kilo);
                        if let Some(j) = &mut self.jitter {
                            let amp = j.amplitude as i64;
                            let delta = j.rng.gen_range(-amp..=amp);
                            target = target
                                .saturating_add_signed(delta)
                                .clamp(*instr_done, *total_instructions);
                        }
                        *pending_target = Some(target);
                    }
                    let target = pending_target.unwrap();
                    if *instr_done < target {
                        let gap = target - *instr_done;
                        *instr_done = target;
                        Action::Compute(gap * cpi)
                    } else {
                        *pending_target = None;
                        *accesses_done += 1;
                        Action::MemAccess
                    }
                } else if *instr_done < *total_instructions {
                    let gap = *total_instructions - *instr_done;
                    *instr_done = *total_instructions;
                    Action::Compute(gap * cpi)
                } else {
                    Action::Done
                }
            }
            CursorKind::Trace {
                entries,
                entry,
                gap_emitted,
                accesses_emitted,
            } => loop {
                if *entry >= entries.len() {
                    return Action::Done;
                }
                let e = entries[*entry];
                if !*gap_emitted {
                    *gap_emitted = true;
                    if e.gap_instructions > 0 {
                        return Action::Compute(e.gap_instructions * cpi);
                    }
                }
                if *accesses_emitted < e.access_count {
                    *accesses_emitted += 1;
                    return Action::MemAccess;
                }
                *entry += 1;
                *gap_emitted = false;
                *accesses_emitted = 0;
            },
        }
    }
}
