//! JSON Lines transcripts and hazard logs.
//!
//! A transcript starts with a [`TranscriptHeader`] line followed by one
//! [`EpisodeRecord`] per episode. Action indices follow the header's
//! `action_names` table (`walking * 6 + upper_body`).

use super::{Algorithm, EpisodeRecord, SearchParams, SearchResult};
use crate::human::action_space;
use crate::safety::HazardReport;
use serde::{Deserialize, Serialize};
use std::io::{self, BufRead, Write};

pub const TRANSCRIPT_SCHEMA: &str = "hazardsim-transcript";
pub const HAZARD_LOG_SCHEMA: &str = "hazardsim-hazards";
pub const TRANSCRIPT_VERSION: u32 = 1;

pub type TranscriptEpisode = EpisodeRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptHeader {
    pub schema: String,
    pub version: u32,
    pub scenario: String,
    pub algorithm: Algorithm,
    pub params: SearchParams,
    pub action_names: Vec<String>,
    pub episodes: usize,
    pub first_hazard_iteration: Option<usize>,
}

impl TranscriptHeader {
    pub fn new(schema: &str, scenario: &str, result: &SearchResult) -> Self {
        Self {
            schema: schema.into(),
            version: TRANSCRIPT_VERSION,
            scenario: scenario.into(),
            algorithm: result.algorithm,
            params: result.params,
            action_names: action_space().iter().map(|a| a.to_string()).collect(),
            episodes: result.episodes.len(),
            first_hazard_iteration: result.first_hazard_iteration,
        }
    }
}

fn json_line<W: Write, T: Serialize>(out: &mut W, value: &T) -> io::Result<()> {
    serde_json::to_writer(&mut *out, value).map_err(io::Error::other)?;
    out.write_all(b"\n")
}

pub fn write_transcript<W: Write>(out: &mut W, scenario: &str, result: &SearchResult) -> io::Result<()> {
    json_line(out, &TranscriptHeader::new(TRANSCRIPT_SCHEMA, scenario, result))?;
    for e in &result.episodes {
        json_line(out, e)?;
    }
    Ok(())
}

pub fn write_hazard_log<W: Write>(out: &mut W, scenario: &str, result: &SearchResult) -> io::Result<()> {
    json_line(out, &TranscriptHeader::new(HAZARD_LOG_SCHEMA, scenario, result))?;
    for h in &result.hazards {
        json_line(out, h)?;
    }
    Ok(())
}

/// Reads a transcript, rejecting unknown schemas and versions.
pub fn read_transcript<R: BufRead>(input: R) -> Result<(TranscriptHeader, Vec<EpisodeRecord>), String> {
    let mut lines = input
        .lines()
        .enumerate()
        .filter(|(_, l)| !matches!(l, Ok(s) if s.trim().is_empty()));
    let (_, first) = lines.next().ok_or("empty transcript")?;
    let first = first.map_err(|e| e.to_string())?;
    let header: TranscriptHeader = serde_json::from_str(&first).map_err(|e| format!("line 1: bad header: {e}"))?;
    if header.schema != TRANSCRIPT_SCHEMA {
        return Err(format!(
            "line 1: expected schema `{TRANSCRIPT_SCHEMA}`, found `{}`",
            header.schema
        ));
    }
    if header.version != TRANSCRIPT_VERSION {
        return Err(format!("line 1: unsupported version {}", header.version));
    }
    let mut episodes = Vec::new();
    for (i, line) in lines {
        let line = line.map_err(|e| e.to_string())?;
        let ep: EpisodeRecord = serde_json::from_str(&line).map_err(|e| format!("line {}: {e}", i + 1))?;
        episodes.push(ep);
    }
    Ok((header, episodes))
}

/// Parses a hazard log written by [`write_hazard_log`].
pub fn read_hazard_log<R: BufRead>(input: R) -> Result<Vec<HazardReport>, String> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| format!("line {}: {e}", i + 1))?);
    }
    Ok(out)
}
