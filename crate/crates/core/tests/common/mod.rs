#![allow(dead_code)]

pub mod fixtures;
pub mod gif_oracle;
pub mod laws;
pub mod oracle;
