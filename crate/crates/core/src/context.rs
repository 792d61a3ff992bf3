//! GUI context from pointer traces: hover and marquee detection, plus
//! attribute filters that turn selected elements into parameter values.
//!
//! Element lookup (`elementFromPoint`) happens in the browser; events arrive
//! here already carrying an [`ElementSnapshot`], so everything in this module
//! is a pure function of its inputs.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::store::ContextFilter;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum PointerKind {
    Move,
    Down,
    Up,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl BoundingBox {
    pub fn new(x: f64, y: f64, width: f64, height: f64) -> Self {
        BoundingBox { x, y, width, height }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ElementSnapshot {
    pub tag: String,
    #[serde(default)]
    pub classes: BTreeSet<String>,
    /// Includes `innerText` alongside the DOM attributes.
    #[serde(default)]
    pub attributes: BTreeMap<String, String>,
    pub bounding_box: BoundingBox,
}

impl ElementSnapshot {
    pub fn new(tag: impl Into<String>, bounding_box: BoundingBox) -> Self {
        ElementSnapshot {
            tag: tag.into(),
            classes: BTreeSet::new(),
            attributes: BTreeMap::new(),
            bounding_box,
        }
    }

    pub fn class(mut self, class: impl Into<String>) -> Self {
        self.classes.insert(class.into());
        self
    }

    pub fn attr(mut self, name: impl Into<String>, value: impl Into<String>) -> Self {
        self.attributes.insert(name.into(), value.into());
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.tag.trim().is_empty() {
            return Err("element tag is empty".into());
        }
        let b = &self.bounding_box;
        if !(b.width >= 0.0 && b.height >= 0.0) {
            return Err(format!("element <{}> has a negative bounding box", self.tag));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PointerEvent {
    pub kind: PointerKind,
    pub x: f64,
    pub y: f64,
    pub timestamp_ms: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element: Option<ElementSnapshot>,
}

impl PointerEvent {
    pub fn new(kind: PointerKind, x: f64, y: f64, timestamp_ms: i64) -> Self {
        PointerEvent {
            kind,
            x,
            y,
            timestamp_ms,
            element: None,
        }
    }

    pub fn over(mut self, element: ElementSnapshot) -> Self {
        self.element = Some(element);
        self
    }
}

/// Axis-aligned rectangle given by two corners, normalized so `x1 <= x2`, `y1 <= y2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl Rect {
    pub fn from_corners(ax: f64, ay: f64, bx: f64, by: f64) -> Self {
        Rect {
            x1: ax.min(bx),
            y1: ay.min(by),
            x2: ax.max(bx),
            y2: ay.max(by),
        }
    }

    pub fn contains(&self, b: &BoundingBox) -> bool {
        b.x >= self.x1 && b.y >= self.y1 && b.x + b.width <= self.x2 && b.y + b.height <= self.y2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum ContextEvent {
    Hover { element: ElementSnapshot, at: (f64, f64) },
    Marquee { elements: Vec<ElementSnapshot>, rect: Rect },
}

impl ContextEvent {
    /// Checks the wire-level invariants of a client-supplied event.
    pub fn validate(&self) -> Result<(), String> {
        match self {
            ContextEvent::Hover { element, .. } => element.validate(),
            ContextEvent::Marquee { elements, rect } => {
                for e in elements {
                    e.validate()?;
                    if !rect.contains(&e.bounding_box) {
                        return Err(format!(
                            "marquee element <{}> lies outside the selection rectangle",
                            e.tag
                        ));
                    }
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct ContextThresholds {
    /// Per-frame displacement below which the cursor counts as resting.
    pub hover_threshold_px: f64,
    /// Number of consecutive resting frames that make a hover.
    pub hover_frames: usize,
    /// Down-to-up displacement above which a press counts as a drag.
    pub drag_threshold_px: f64,
}

impl Default for ContextThresholds {
    fn default() -> Self {
        ContextThresholds {
            hover_threshold_px: 5.0,
            hover_frames: 5,
            drag_threshold_px: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContextError {
    #[error("malformed trace: timestamp decreases at event {index}")]
    MalformedTrace { index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FilterError {
    #[error("attribute {0:?} is not present on the selected element")]
    AttributeAbsent(String),
}

/// A parameter value: one string, a list for marquee selections, or a number
/// for number-kind parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParameterValue {
    Single(String),
    List(Vec<String>),
    Number(serde_json::Number),
}

impl From<&str> for ParameterValue {
    fn from(s: &str) -> Self {
        ParameterValue::Single(s.to_string())
    }
}

fn distance(a: &PointerEvent, b: &PointerEvent) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Classifies a pointer trace as a hover, a marquee drag, or neither.
///
/// A completed drag anywhere in the trace takes precedence over a hover.
pub fn detect_context(
    trace: &[PointerEvent],
    thresholds: &ContextThresholds,
) -> Result<Option<ContextEvent>, ContextError> {
    if let Some(index) = trace.windows(2).position(|w| w[1].timestamp_ms < w[0].timestamp_ms) {
        return Err(ContextError::MalformedTrace { index: index + 1 });
    }
    if let Some(marquee) = detect_marquee(trace, thresholds) {
        return Ok(Some(marquee));
    }
    Ok(detect_hover(trace, thresholds))
}

fn detect_marquee(trace: &[PointerEvent], thresholds: &ContextThresholds) -> Option<ContextEvent> {
    let up = trace.iter().rposition(|e| e.kind == PointerKind::Up)?;
    let down = trace[..up].iter().rposition(|e| e.kind == PointerKind::Down)?;
    let (d, u) = (&trace[down], &trace[up]);
    if distance(d, u) <= thresholds.drag_threshold_px {
        return None;
    }
    let rect = Rect::from_corners(d.x, d.y, u.x, u.y);
    let mut observed: Vec<ElementSnapshot> = Vec::new();
    for e in trace[down..=up].iter().filter_map(|e| e.element.as_ref()) {
        if !observed.contains(e) {
            observed.push(e.clone());
        }
    }
    Some(ContextEvent::Marquee {
        elements: marquee_select(&observed, &rect),
        rect,
    })
}

/// Elements lying completely inside `rect`, in observation order.
pub fn marquee_select(observed: &[ElementSnapshot], rect: &Rect) -> Vec<ElementSnapshot> {
    observed
        .iter()
        .filter(|e| rect.contains(&e.bounding_box))
        .cloned()
        .collect()
}

fn detect_hover(trace: &[PointerEvent], thresholds: &ContextThresholds) -> Option<ContextEvent> {
    // Trailing run of move events whose consecutive displacements stay under
    // the threshold; k displacements need k + 1 frames.
    let mut start = trace.len();
    while start > 0 && trace[start - 1].kind == PointerKind::Move {
        if start < trace.len() && distance(&trace[start - 1], &trace[start]) >= thresholds.hover_threshold_px {
            break;
        }
        start -= 1;
    }
    let run = &trace[start..];
    if run.len() < thresholds.hover_frames.max(1) + 1 {
        return None;
    }
    let last = run.iter().rev().find(|e| e.element.is_some())?;
    Some(ContextEvent::Hover {
        element: last.element.clone()?,
        at: (last.x, last.y),
    })
}

fn matches(element: &ElementSnapshot, filter: &ContextFilter) -> bool {
    element.tag.eq_ignore_ascii_case(&filter.tag_name) && filter.required_classes.is_subset(&element.classes)
}

/// Extracts the filter's attribute from the selected element(s).
///
/// Marquee selections only yield values for multi-select filters.
pub fn match_filter(event: &ContextEvent, filter: &ContextFilter) -> Option<ParameterValue> {
    match event {
        ContextEvent::Hover { element, .. } => {
            if !matches(element, filter) {
                return None;
            }
            element
                .attributes
                .get(&filter.attribute_to_extract)
                .map(|v| ParameterValue::Single(v.clone()))
        }
        ContextEvent::Marquee { elements, .. } => {
            if !filter.multi_select {
                return None;
            }
            let values: Vec<String> = elements
                .iter()
                .filter(|e| matches(e, filter))
                .filter_map(|e| e.attributes.get(&filter.attribute_to_extract).cloned())
                .collect();
            (!values.is_empty()).then_some(ParameterValue::List(values))
        }
    }
}

/// Builds the attribute filter a developer demonstrates by picking an element
/// and one of its attributes.
pub fn build_filter_from_demonstration(
    selected: &ElementSnapshot,
    chosen_attribute: &str,
    multi_select: bool,
) -> Result<ContextFilter, FilterError> {
    if !selected.attributes.contains_key(chosen_attribute) {
        return Err(FilterError::AttributeAbsent(chosen_attribute.to_string()));
    }
    Ok(ContextFilter {
        tag_name: selected.tag.clone(),
        required_classes: selected.classes.clone(),
        attribute_to_extract: chosen_attribute.to_string(),
        multi_select,
    })
}
