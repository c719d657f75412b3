pub(crate) mod bigstr;
pub mod classifier;
pub mod coset_enum;
pub mod digraph;
pub mod freewords;
pub mod oracle_k;
pub mod par;
pub mod presentation;
