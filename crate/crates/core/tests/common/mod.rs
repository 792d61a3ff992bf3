#![allow(dead_code)]

pub mod dom;
pub mod files;
pub mod geometry;
pub mod projects;
