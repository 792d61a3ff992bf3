//! A flat simulated document for replaying directives.

use geno_core::context::{BoundingBox, ElementSnapshot};
use geno_core::replay::{Directive, DirectiveAction, RecordedElement};

/// A flat document: elements in document order, each with a stable id.
pub struct SimDom {
    pub elements: Vec<SimElement>,
    /// Ids of elements acted on, with the text set for inputs.
    pub log: Vec<(usize, Option<String>)>,
}

pub struct SimElement {
    pub id: usize,
    pub tag: String,
    pub clickable: bool,
    pub value: String,
}

impl SimDom {
    pub fn new(spec: &[(&str, bool)]) -> Self {
        SimDom {
            elements: spec
                .iter()
                .enumerate()
                .map(|(id, (tag, clickable))| SimElement {
                    id,
                    tag: tag.to_string(),
                    clickable: *clickable,
                    value: String::new(),
                })
                .collect(),
            log: Vec::new(),
        }
    }

    /// What the recorder reports for the element with `id`.
    pub fn describe(&self, id: usize) -> RecordedElement {
        let el = &self.elements[id];
        RecordedElement {
            snapshot: ElementSnapshot::new(el.tag.clone(), BoundingBox::new(0.0, 20.0 * id as f64, 50.0, 20.0)),
            is_clickable: el.clickable,
            dom_index_by_tag: self.elements[..id].iter().filter(|e| e.tag == el.tag).count(),
        }
    }

    pub fn by_tag(&mut self, tag: &str, index: usize) -> Option<&mut SimElement> {
        self.elements.iter_mut().filter(|e| e.tag == tag).nth(index)
    }

    pub fn run(&mut self, plan: &[Directive]) {
        for d in plan {
            let el = self
                .by_tag(&d.select_by_tag_index.tag, d.select_by_tag_index.index)
                .expect("directive target resolves");
            let id = el.id;
            let text = match &d.action {
                DirectiveAction::Click => None,
                DirectiveAction::SetText { text } => {
                    el.value = text.clone();
                    Some(text.clone())
                }
            };
            self.log.push((id, text));
        }
    }
}

pub fn calendar_dom() -> SimDom {
    // Five buttons; the third one (id 4) switches to week view.
    SimDom::new(&[
        ("div", false),
        ("button", true),
        ("button", true),
        ("span", false),
        ("button", true),
        ("button", true),
        ("button", true),
        ("div", false),
    ])
}
