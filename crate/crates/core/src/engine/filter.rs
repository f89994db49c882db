use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};

use crate::model::{PlanningPreferences, VideoCandidate};
use crate::text::{jaccard, token_set};

/// Numeric pre-ranking applied before candidates reach the ordering prompt.
///
/// `log10(1 + views) + 2·transcript + 0.5·chapters + 0.5·tags`
pub fn rank_score(c: &VideoCandidate) -> f64 {
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    (1.0 + c.view_count as f64).log10()
        + 2.0 * flag(c.has_transcript)
        + 0.5 * flag(!c.chapters.is_empty())
        + 0.5 * flag(!c.tags.is_empty())
}

/// Best first: higher score, then smaller id.
pub fn rank_cmp(a: &VideoCandidate, b: &VideoCandidate) -> Ordering {
    rank_score(b)
        .total_cmp(&rank_score(a))
        .then_with(|| a.video_id.cmp(&b.video_id))
}

pub fn sort_by_rank(cands: &mut [VideoCandidate]) {
    cands.sort_by(rank_cmp);
}

/// Which band produced a filter result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterPass {
    Band,
    Widened,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Filtered {
    pub kept: Vec<VideoCandidate>,
    pub pass: FilterPass,
}

/// Two-pass duration filter.
///
/// Pass 1 keeps the preferred band. When fewer than `floor` survive, pass 2
/// widens the band by `widen` on both sides. Output is rank-ordered.
pub fn filter_candidates_with(
    cands: &[VideoCandidate],
    prefs: &PlanningPreferences,
    floor: usize,
    widen: f64,
) -> Filtered {
    let band = prefs.video_length.band();
    let select = |band: &crate::model::DurationBand| -> Vec<VideoCandidate> {
        let mut kept: Vec<_> = cands.iter().filter(|c| band.contains(c.duration_s)).cloned().collect();
        sort_by_rank(&mut kept);
        kept
    };
    let kept = select(&band);
    if kept.len() >= floor {
        return Filtered { kept, pass: FilterPass::Band };
    }
    Filtered {
        kept: select(&band.widened(widen)),
        pass: FilterPass::Widened,
    }
}

/// [`filter_candidates_with`] at the default floor of 6 and ±50% widening.
pub fn filter_candidates(cands: &[VideoCandidate], prefs: &PlanningPreferences) -> Filtered {
    filter_candidates_with(cands, prefs, super::SURVIVOR_FLOOR, super::WIDEN_FRACTION)
}

/// Lowercase alphanumeric tokens of the title and tags.
pub fn overlap_tokens(c: &VideoCandidate) -> BTreeSet<String> {
    token_set(&format!("{} {}", c.title, c.tags.join(" ")))
}

/// Drops every candidate that some better-ranked candidate overlaps with at
/// Jaccard similarity ≥ `threshold`. Survivors keep their input order.
///
/// The rule is applied pairwise: a candidate is dropped even if the better
/// one that overlaps it was itself dropped by a third.
pub fn dedup_overlap(cands: &[VideoCandidate], threshold: f64) -> Vec<VideoCandidate> {
    let sets: Vec<_> = cands.iter().map(overlap_tokens).collect();
    let mut dropped = HashSet::new();
    for i in 0..cands.len() {
        for j in i + 1..cands.len() {
            if jaccard(&sets[i], &sets[j]) < threshold {
                continue;
            }
            let loser = match rank_cmp(&cands[i], &cands[j]) {
                Ordering::Greater => i,
                // equal rank means equal ids: keep the earlier one
                _ => j,
            };
            dropped.insert(loser);
        }
    }
    cands
        .iter()
        .enumerate()
        .filter(|(i, _)| !dropped.contains(i))
        .map(|(_, c)| c.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CandidateSource, Chapter, ExperienceLevel, VideoLength};

    fn cand(id: &str, title: &str, minutes: f64, views: u64) -> VideoCandidate {
        VideoCandidate {
            video_id: id.into(),
            title: title.into(),
            channel: "c".into(),
            duration_s: minutes * 60.0,
            description: String::new(),
            tags: vec![],
            chapters: vec![],
            transcript_snippet: String::new(),
            view_count: views,
            has_transcript: false,
            source: CandidateSource::Search,
        }
    }

    fn medium() -> PlanningPreferences {
        PlanningPreferences::new("t", VideoLength::Medium, ExperienceLevel::Beginner, 5).unwrap()
    }

    #[test]
    fn scores() {
        assert_eq!(rank_score(&cand("a", "x", 1.0, 0)), 0.0);
        let mut c = cand("a", "x", 1.0, 999);
        c.has_transcript = true;
        assert!((rank_score(&c) - 5.0).abs() < 1e-12);
        c.tags = vec!["t".into()];
        c.chapters = vec![Chapter { start_s: 0.0, title: "i".into() }];
        assert!((rank_score(&c) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn ties_by_id() {
        let mut v = vec![cand("b", "x", 1.0, 5), cand("a", "y", 1.0, 5), cand("c", "z", 1.0, 50)];
        sort_by_rank(&mut v);
        let ids: Vec<_> = v.iter().map(|c| c.video_id.as_str()).collect();
        assert_eq!(ids, ["c", "a", "b"]);
    }

    #[test]
    fn band_pass_keeps_in_range_only() {
        let mut v: Vec<_> = (0..6).map(|i| cand(&format!("m{i}"), "x", 15.0, 1)).collect();
        v.push(cand("s", "x", 12.0, 1));
        v.push(cand("l", "x", 40.0, 1));
        let out = filter_candidates(&v, &medium());
        assert_eq!(out.pass, FilterPass::Band);
        assert_eq!(out.kept.len(), 7);
        assert!(out.kept.iter().all(|c| c.video_id != "l"));
    }

    #[test]
    fn widened_pass() {
        let mut v: Vec<_> = (0..5).map(|i| cand(&format!("m{i}"), "x", 15.0, 1)).collect();
        v.push(cand("w", "x", 37.0, 1));
        v.push(cand("lo", "x", 5.0, 1));
        v.push(cand("out", "x", 40.0, 1));
        v.push(cand("tiny", "x", 4.9, 1));
        let out = filter_candidates(&v, &medium());
        assert_eq!(out.pass, FilterPass::Widened);
        let ids: BTreeSet<_> = out.kept.iter().map(|c| c.video_id.as_str()).collect();
        assert!(ids.contains("w") && ids.contains("lo"));
        assert!(!ids.contains("out") && !ids.contains("tiny"));
    }

    #[test]
    fn identical_titles_keep_the_better() {
        let v = vec![cand("a", "Semiotics explained", 10.0, 5), cand("b", "Semiotics Explained!", 10.0, 500)];
        let out = dedup_overlap(&v, 0.6);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].video_id, "b");
    }

    #[test]
    fn disjoint_all_survive() {
        let v = vec![cand("a", "alpha beta", 10.0, 5), cand("b", "gamma delta", 10.0, 5)];
        assert_eq!(dedup_overlap(&v, 0.6), v);
    }

    #[test]
    fn pairwise_rule_is_not_transitive() {
        // a~b (0.8), b~c (0.67), a,c apart (0.5): b drops c even though a
        // already dropped b.
        let a = cand("a", "one two three four", 10.0, 1000);
        let b = cand("b", "one two three four five", 10.0, 100);
        let c = cand("c", "two three four five six", 10.0, 10);
        let out = dedup_overlap(&[a.clone(), b, c], 0.6);
        assert_eq!(out, vec![a]);
    }
}
