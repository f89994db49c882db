//! Video learning pathways: planning, prompting, transcript ingestion and
//! learning sessions.
//!
//! The guide in `book/` walks through each part with runnable examples.

pub mod engine;
pub mod ingest;
pub mod llm;
pub mod model;
pub mod session;
pub mod text;

// The guide's code blocks run as doc-tests, one module per chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/pathways.md")]
    mod pathways {}
    #[doc = include_str!("../../../book/src/planning.md")]
    mod planning {}
    #[doc = include_str!("../../../book/src/gateway.md")]
    mod gateway {}
    #[doc = include_str!("../../../book/src/ingestion.md")]
    mod ingestion {}
    #[doc = include_str!("../../../book/src/dedup.md")]
    mod dedup {}
    #[doc = include_str!("../../../book/src/revisions.md")]
    mod revisions {}
    #[doc = include_str!("../../../book/src/sessions.md")]
    mod sessions {}
    #[doc = include_str!("../../../book/src/notes.md")]
    mod notes {}
    #[doc = include_str!("../../../book/src/http-api.md")]
    mod http_api {}
    #[doc = include_str!("../../../book/src/configuration.md")]
    mod configuration {}
}
