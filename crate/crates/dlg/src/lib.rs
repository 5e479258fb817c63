//! File-, terminal- and HTTP-facing front ends for `mixdialog-core`: the
//! `dlg` subcommands, Graphviz export of specifications, an interactive
//! dialog runner, and a JSON session service with event-log persistence.

pub mod commands;
pub mod hasse;
pub mod repl;
pub mod service;
