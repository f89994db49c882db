//! Platform data API backend.
//!
//! Search and metadata use the public data API. Transcripts come from an
//! optional external command that prints a JSON array of segments
//! (`[{"start_s":0.0,"dur_s":4.2,"text":"..."}]`) for the id passed in place
//! of `{id}`.

use std::process::Command;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::OnceLock;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{IngestError, SearchPhase, Segment, VideoBackend, VideoRecord};
use crate::model::{Chapter, VideoCandidate};

pub const DEFAULT_API_BASE: &str = "https://www.googleapis.com/youtube/v3";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiveBackendConfig {
    pub api_key: String,
    #[serde(default = "default_base")]
    pub api_base: String,
    /// Program and arguments; `{id}` is replaced by the video id.
    #[serde(default)]
    pub transcript_command: Option<Vec<String>>,
    #[serde(default = "default_timeout")]
    pub timeout_s: u64,
}

fn default_base() -> String {
    DEFAULT_API_BASE.to_string()
}

fn default_timeout() -> u64 {
    30
}

pub struct LiveBackend {
    config: LiveBackendConfig,
    client: OnceLock<reqwest::blocking::Client>,
    requests: AtomicU64,
}

impl LiveBackend {
    pub fn new(config: LiveBackendConfig) -> Result<Self, IngestError> {
        if config.api_key.trim().is_empty() {
            return Err(IngestError::Backend("API key is empty".into()));
        }
        Ok(Self {
            config,
            client: OnceLock::new(),
            requests: AtomicU64::new(0),
        })
    }

    fn get(&self, endpoint: &str, query: &[(&str, String)]) -> Result<Value, IngestError> {
        let client = match self.client.get() {
            Some(c) => c,
            None => {
                let built = reqwest::blocking::Client::builder()
                    .timeout(Duration::from_secs(self.config.timeout_s))
                    .build()
                    .map_err(|e| IngestError::Backend(e.to_string()))?;
                self.client.get_or_init(|| built)
            }
        };
        self.requests.fetch_add(1, Ordering::Relaxed);
        let url = format!("{}/{endpoint}", self.config.api_base.trim_end_matches('/'));
        let mut params: Vec<(&str, String)> = query.to_vec();
        params.push(("key", self.config.api_key.clone()));
        let response = client
            .get(url)
            .query(&params)
            .send()
            .map_err(|e| IngestError::Unreachable(e.to_string()))?;
        let status = response.status();
        let body = response
            .text()
            .map_err(|e| IngestError::Unreachable(e.to_string()))?;
        if !status.is_success() {
            return Err(IngestError::Backend(format!(
                "{endpoint} returned {status}: {}",
                body.chars().take(300).collect::<String>()
            )));
        }
        serde_json::from_str(&body).map_err(|e| IngestError::Backend(e.to_string()))
    }

    fn details(&self, ids: &[String]) -> Result<Vec<(String, VideoRecord)>, IngestError> {
        if ids.is_empty() {
            return Ok(Vec::new());
        }
        let body = self.get(
            "videos",
            &[
                ("part", "snippet,contentDetails,statistics,status".into()),
                ("id", ids.join(",")),
            ],
        )?;
        let mut records = parse_video_items(&body);
        // keep search order
        records.sort_by_key(|(id, _)| ids.iter().position(|x| x == id));
        Ok(records)
    }
}

fn ids_at(body: &Value, pointer: &str) -> Vec<String> {
    body["items"]
        .as_array()
        .map(|items| {
            items
                .iter()
                .filter_map(|i| i.pointer(pointer).and_then(Value::as_str))
                .map(str::to_string)
                .collect()
        })
        .unwrap_or_default()
}

/// Records from a `videos` list response.
pub(crate) fn parse_video_items(body: &Value) -> Vec<(String, VideoRecord)> {
    let Some(items) = body["items"].as_array() else {
        return Vec::new();
    };
    items
        .iter()
        .filter_map(|item| {
            let id = item["id"].as_str()?.to_string();
            let snippet = &item["snippet"];
            let description = snippet["description"].as_str().unwrap_or_default().to_string();
            let record = VideoRecord {
                title: snippet["title"].as_str().unwrap_or_default().to_string(),
                channel: snippet["channelTitle"].as_str().unwrap_or_default().to_string(),
                duration_s: item["contentDetails"]["duration"]
                    .as_str()
                    .and_then(parse_iso8601_duration)
                    .unwrap_or(0.0),
                chapters: parse_chapters(&description),
                description,
                tags: snippet["tags"]
                    .as_array()
                    .map(|t| t.iter().filter_map(Value::as_str).map(str::to_string).collect())
                    .unwrap_or_default(),
                view_count: item["statistics"]["viewCount"]
                    .as_str()
                    .and_then(|v| v.parse().ok())
                    .unwrap_or(0),
                available: item["status"]["privacyStatus"].as_str().unwrap_or("public") == "public"
                    && item["status"]["uploadStatus"].as_str().unwrap_or("processed") == "processed",
            };
            Some((id, record))
        })
        .collect()
}

/// Seconds in an ISO-8601 duration such as `PT1H2M3S` or `P1DT5M`.
pub fn parse_iso8601_duration(text: &str) -> Option<f64> {
    let rest = text.strip_prefix('P')?;
    let mut total = 0.0;
    let mut number = String::new();
    let mut in_time = false;
    let mut any = false;
    for c in rest.chars() {
        match c {
            'T' => in_time = true,
            '0'..='9' | '.' => number.push(c),
            unit => {
                let value: f64 = number.parse().ok()?;
                number.clear();
                any = true;
                total += value
                    * match (unit, in_time) {
                        ('W', false) => 604_800.0,
                        ('D', false) => 86_400.0,
                        ('H', true) => 3600.0,
                        ('M', true) => 60.0,
                        ('S', true) => 1.0,
                        _ => return None,
                    };
            }
        }
    }
    (any && number.is_empty()).then_some(total)
}

fn parse_clock(text: &str) -> Option<f64> {
    let parts: Vec<&str> = text.split(':').collect();
    if !(2..=3).contains(&parts.len()) || parts.iter().any(|p| p.is_empty() || !p.chars().all(|c| c.is_ascii_digit())) {
        return None;
    }
    Some(parts.iter().fold(0.0, |acc, p| acc * 60.0 + p.parse::<f64>().unwrap()))
}

/// Chapter markers from description lines like `0:00 Intro` or
/// `1:02:03 - Wrap up`. Only returned when the first marker is at zero and
/// there are at least two.
pub fn parse_chapters(description: &str) -> Vec<Chapter> {
    let chapters: Vec<Chapter> = description
        .lines()
        .filter_map(|line| {
            let line = line.trim();
            let (stamp, rest) = line.split_once(char::is_whitespace)?;
            let start_s = parse_clock(stamp)?;
            let title = rest.trim().trim_start_matches(['-', '–', '|', ':']).trim();
            (!title.is_empty()).then(|| Chapter {
                start_s,
                title: title.to_string(),
            })
        })
        .collect();
    if chapters.len() >= 2 && chapters[0].start_s == 0.0 {
        chapters
    } else {
        Vec::new()
    }
}

impl VideoBackend for LiveBackend {
    fn search(
        &self,
        phase: SearchPhase,
        text: &str,
        limit: usize,
    ) -> Result<Vec<VideoCandidate>, IngestError> {
        let limit = limit.clamp(1, 50);
        let ids = match phase {
            SearchPhase::Playlist => {
                let found = self.get(
                    "search",
                    &[
                        ("part", "snippet".into()),
                        ("type", "playlist".into()),
                        ("maxResults", "3".into()),
                        ("q", text.to_string()),
                    ],
                )?;
                let Some(playlist) = ids_at(&found, "/id/playlistId").into_iter().next() else {
                    return Ok(Vec::new());
                };
                let items = self.get(
                    "playlistItems",
                    &[
                        ("part", "contentDetails".into()),
                        ("maxResults", limit.to_string()),
                        ("playlistId", playlist),
                    ],
                )?;
                ids_at(&items, "/contentDetails/videoId")
            }
            SearchPhase::Video | SearchPhase::Fallback => {
                let found = self.get(
                    "search",
                    &[
                        ("part", "snippet".into()),
                        ("type", "video".into()),
                        ("maxResults", limit.to_string()),
                        ("q", text.to_string()),
                    ],
                )?;
                ids_at(&found, "/id/videoId")
            }
        };
        let source = phase.source();
        Ok(self
            .details(&ids)?
            .into_iter()
            .map(|(id, rec)| rec.to_candidate(&id, source))
            .collect())
    }

    fn video(&self, video_id: &str) -> Result<Option<VideoRecord>, IngestError> {
        Ok(self
            .details(&[video_id.to_string()])?
            .into_iter()
            .next()
            .map(|(_, r)| r))
    }

    fn transcript(&self, video_id: &str) -> Result<Option<Vec<Segment>>, IngestError> {
        let Some(command) = self.config.transcript_command.as_ref().filter(|c| !c.is_empty()) else {
            return Ok(None);
        };
        let args: Vec<String> = command[1..].iter().map(|a| a.replace("{id}", video_id)).collect();
        let output = Command::new(&command[0])
            .args(&args)
            .output()
            .map_err(|e| IngestError::Backend(format!("{}: {e}", command[0])))?;
        if !output.status.success() {
            return Err(IngestError::Backend(format!(
                "{} exited with {}",
                command[0], output.status
            )));
        }
        let stdout = String::from_utf8_lossy(&output.stdout);
        if stdout.trim().is_empty() || stdout.trim() == "null" {
            return Ok(None);
        }
        serde_json::from_str(&stdout)
            .map(Some)
            .map_err(|e| IngestError::Backend(format!("transcript output: {e}")))
    }

    fn name(&self) -> &str {
        "live"
    }

    fn network_ops(&self) -> u64 {
        self.requests.load(Ordering::Relaxed)
    }
}
