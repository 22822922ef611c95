//! specforge: corpus preparation, symbolic-context prompting, and ACSL
//! annotation accounting for LLM specification synthesis on C programs.
//!
//! The pipeline takes a manifest of C programs, derives controlled variants
//! (buggy, anonymized, both), renders prompts that optionally embed EVA
//! reports or PathCrawler test tables, drives a chat-completion provider
//! (or a recorded replay cache), validates that the model only added
//! annotations, and aggregates per-clause counts into reports.

pub mod acsl;
pub mod config;
pub mod corpus;
pub mod ctokens;
pub mod llm;
pub mod pipeline;
pub mod prompt;
pub mod report;
pub mod symbolic;
