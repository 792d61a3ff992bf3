//! Core engine for adding voice + pointer commands to web applications.
//!
//! Developers describe intents (example utterances, labeled parameters, GUI
//! context filters and a target action) in a [`store::Project`]. The [`nlu`]
//! module trains a classifier and extractor from it; at run time [`dialog`]
//! fuses the recognized utterance with pointer context from [`context`] and
//! produces an [`dialog::ActionPlan`]. [`replay`] records demonstrated GUI
//! steps and [`codegen`] connects intents to the app's source code.

pub mod codegen;
pub mod context;
pub mod dialog;
pub mod nlu;
pub mod replay;
pub mod store;
