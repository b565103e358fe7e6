//! Tolerant parser for the tagged reply format. Tag names match without
//! regard to case or surrounding whitespace, and a closing tag may be written
//! `</TAG>` or `<\TAG>`.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::prompt::Candidate;
use crate::game::{ColorId, GameConfig, Offer, Response};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ParseErrorKind {
    MissingTag(&'static str),
    Unclosed(&'static str),
    UnknownColor(String),
    BadQuantity(String),
    BadChoice(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("{kind:?} at bytes {}..{}", span.start, span.end)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte range of the offending text in the raw reply.
    pub span: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProposalTags {
    pub reasoning: Option<String>,
    pub check: Option<String>,
    pub offer: Offer,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseTags {
    pub reasoning: Option<String>,
    pub choice: Response,
}

struct Element {
    /// Start of the opening tag.
    start: usize,
    content: Range<usize>,
    /// End of the closing tag.
    end: usize,
}

/// Finds `<name>` at or after `from`; returns (tag start, tag end).
fn find_open(text: &str, name: &str, from: usize) -> Option<(usize, usize)> {
    find_tag(text, name, from, false)
}

fn find_close(text: &str, name: &str, from: usize) -> Option<(usize, usize)> {
    find_tag(text, name, from, true)
}

fn find_tag(text: &str, name: &str, from: usize, closing: bool) -> Option<(usize, usize)> {
    let bytes = text.as_bytes();
    let mut i = from;
    while let Some(off) = text.get(i..)?.find('<') {
        let start = i + off;
        let mut j = skip_ws(bytes, start + 1);
        let is_close = matches!(bytes.get(j), Some(b'/') | Some(b'\\'));
        if is_close {
            j = skip_ws(bytes, j + 1);
        }
        if is_close == closing
            && bytes.len() >= j + name.len()
            && bytes[j..j + name.len()].eq_ignore_ascii_case(name.as_bytes())
        {
            let k = skip_ws(bytes, j + name.len());
            if bytes.get(k) == Some(&b'>') {
                return Some((start, k + 1));
            }
        }
        i = start + 1;
    }
    None
}

fn skip_ws(bytes: &[u8], mut i: usize) -> usize {
    while bytes.get(i).is_some_and(|b| b.is_ascii_whitespace()) {
        i += 1;
    }
    i
}

fn element(text: &str, name: &'static str, from: usize) -> Result<Option<Element>, ParseError> {
    let Some((start, open_end)) = find_open(text, name, from) else {
        return Ok(None);
    };
    let (close_start, end) = find_close(text, name, open_end).ok_or(ParseError {
        kind: ParseErrorKind::Unclosed(name),
        span: start..text.len(),
    })?;
    // an opening tag of the same name before the close means this one was
    // never closed
    if let Some((again, _)) = find_open(text, name, open_end).filter(|&(s, _)| s < close_start) {
        return Err(ParseError { kind: ParseErrorKind::Unclosed(name), span: start..again });
    }
    Ok(Some(Element { start, content: open_end..close_start, end }))
}

fn required(text: &str, name: &'static str, from: usize) -> Result<Element, ParseError> {
    element(text, name, from)?.ok_or(ParseError {
        kind: ParseErrorKind::MissingTag(name),
        span: from..text.len(),
    })
}

fn trimmed(text: &str, r: &Range<usize>) -> (String, Range<usize>) {
    let raw = &text[r.clone()];
    let lead = raw.len() - raw.trim_start().len();
    let t = raw.trim();
    (t.to_string(), r.start + lead..r.start + lead + t.len())
}

fn optional_text(text: &str, name: &'static str, from: usize, to: usize) -> Result<Option<String>, ParseError> {
    match element(&text[..to], name, from)? {
        Some(e) => Ok(Some(trimmed(text, &e.content).0)),
        None => Ok(None),
    }
}

fn color(config: &GameConfig, text: &str, e: &Element) -> Result<ColorId, ParseError> {
    let (raw, span) = trimmed(text, &e.content);
    let lower = raw.to_ascii_lowercase();
    let name = lower
        .strip_suffix("chips")
        .or_else(|| lower.strip_suffix("chip"))
        .unwrap_or(&lower)
        .trim();
    config
        .color_by_name(name)
        .ok_or(ParseError { kind: ParseErrorKind::UnknownColor(raw), span })
}

fn quantity(text: &str, e: &Element) -> Result<u32, ParseError> {
    let (raw, span) = trimmed(text, &e.content);
    match raw.parse::<u32>() {
        Ok(q) if q > 0 && raw.bytes().all(|b| b.is_ascii_digit()) => Ok(q),
        _ => Err(ParseError { kind: ParseErrorKind::BadQuantity(raw), span }),
    }
}

/// Parses one proposal whose trade tags start at or after `from`. Returns it
/// with the end offset of its last tag.
fn proposal_at(config: &GameConfig, text: &str, from: usize) -> Result<(ProposalTags, usize), ParseError> {
    let get_color = required(text, "GET_COLOR", from)?;
    let get_qty = required(text, "GET_QUANTITY", from)?;
    let give_color = required(text, "GIVE_COLOR", from)?;
    let give_qty = required(text, "GIVE_QUANTITY", from)?;
    let offer = Offer::new(
        color(config, text, &give_color)?,
        quantity(text, &give_qty)?,
        color(config, text, &get_color)?,
        quantity(text, &get_qty)?,
    );
    let first = [&get_color, &get_qty, &give_color, &give_qty].iter().map(|e| e.start).min().unwrap_or(from);
    let end = [&get_color, &get_qty, &give_color, &give_qty].iter().map(|e| e.end).max().unwrap_or(from);
    Ok((
        ProposalTags {
            reasoning: optional_text(text, "REASONING", from, first)?,
            check: optional_text(text, "CHECK", from, first)?,
            offer,
        },
        end,
    ))
}

pub fn parse_proposal(config: &GameConfig, text: &str) -> Result<ProposalTags, ParseError> {
    proposal_at(config, text, 0).map(|(p, _)| p)
}

pub fn parse_response(text: &str) -> Result<ResponseTags, ParseError> {
    let choice = required(text, "CHOICE", 0)?;
    let (raw, span) = trimmed(text, &choice.content);
    let word = raw.trim_end_matches(['.', '!']).trim().to_ascii_lowercase();
    let choice_value = match word.as_str() {
        "yes" => Response::Accept,
        "no" => Response::Decline,
        _ => return Err(ParseError { kind: ParseErrorKind::BadChoice(raw), span }),
    };
    Ok(ResponseTags {
        reasoning: optional_text(text, "REASONING", 0, choice.start)?,
        choice: choice_value,
    })
}

/// Extracts up to `limit` proposal groups in order. Malformed groups are
/// skipped; if none parse, the first error is returned.
pub fn parse_candidates(config: &GameConfig, text: &str, limit: usize) -> Result<Vec<Candidate>, ParseError> {
    let mut out = Vec::new();
    let mut first_err = None;
    let mut from = 0;
    while out.len() < limit {
        // a group spans from the end of the previous group to the GET_COLOR
        // that opens the group after it
        let Some((next, _)) = find_open(text, "GET_COLOR", from) else {
            break;
        };
        let group_end = find_open(text, "GET_COLOR", next + 1).map_or(text.len(), |(s, _)| s);
        let slice = &text[..group_end];
        match proposal_at(config, slice, from) {
            Ok((p, end)) => {
                out.push(Candidate { reasoning: p.reasoning, offer: p.offer });
                from = end;
            }
            Err(e) => {
                first_err.get_or_insert(e);
                from = group_end;
            }
        }
    }
    if out.is_empty() {
        return Err(first_err.unwrap_or(ParseError {
            kind: ParseErrorKind::MissingTag("GET_COLOR"),
            span: 0..text.len(),
        }));
    }
    Ok(out)
}
