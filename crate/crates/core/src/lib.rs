//! Search over assignments of elements to alternatives with exact,
//! greedy and learned value-to-go guidance.

pub mod bench;
pub mod binio;
pub mod cli;
pub mod dataset;
pub mod domain;
pub mod error;
pub mod exact;
pub mod neural;
pub mod search;
pub mod seeds;
pub mod svg;
pub mod valuegen;
pub mod workers;
