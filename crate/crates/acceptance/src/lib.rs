//! Acceptance gate for the workspace; see `tests/acceptance.rs`.
