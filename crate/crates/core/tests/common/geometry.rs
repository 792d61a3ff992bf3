//! Brute-force pointer-trace oracle and random trace generator.

use geno_core::context::{
    detect_context, BoundingBox, ContextEvent, ContextThresholds, ElementSnapshot, PointerEvent, PointerKind,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Classification computed straight from the threshold definitions.
#[derive(Debug, PartialEq)]
pub enum Oracle {
    Malformed,
    None,
    Hover(ElementSnapshot),
    Marquee(Vec<ElementSnapshot>),
}

pub fn oracle(trace: &[PointerEvent], t: &ContextThresholds) -> Oracle {
    for i in 1..trace.len() {
        if trace[i].timestamp_ms < trace[i - 1].timestamp_ms {
            return Oracle::Malformed;
        }
    }
    let dist = |a: &PointerEvent, b: &PointerEvent| ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt();

    // Drag: the last up, and the last down before it.
    let mut up = None;
    for (i, e) in trace.iter().enumerate() {
        if e.kind == PointerKind::Up {
            up = Some(i);
        }
    }
    if let Some(u) = up {
        let mut down = None;
        for (i, e) in trace[..u].iter().enumerate() {
            if e.kind == PointerKind::Down {
                down = Some(i);
            }
        }
        if let Some(d) = down {
            if dist(&trace[d], &trace[u]) > t.drag_threshold_px {
                let (x1, x2) = (trace[d].x.min(trace[u].x), trace[d].x.max(trace[u].x));
                let (y1, y2) = (trace[d].y.min(trace[u].y), trace[d].y.max(trace[u].y));
                let mut seen: Vec<ElementSnapshot> = Vec::new();
                for e in &trace[d..=u] {
                    if let Some(el) = &e.element {
                        if !seen.contains(el) {
                            seen.push(el.clone());
                        }
                    }
                }
                let inside = seen
                    .into_iter()
                    .filter(|el| {
                        let b = &el.bounding_box;
                        b.x >= x1 && b.y >= y1 && b.x + b.width <= x2 && b.y + b.height <= y2
                    })
                    .collect();
                return Oracle::Marquee(inside);
            }
        }
    }

    // Hover: the last K+1 events are moves with every step under the threshold.
    let k = t.hover_frames;
    if trace.len() < k + 1 {
        return Oracle::None;
    }
    let tail = &trace[trace.len() - k - 1..];
    let still = tail.iter().all(|e| e.kind == PointerKind::Move)
        && (1..tail.len()).all(|i| dist(&tail[i - 1], &tail[i]) < t.hover_threshold_px);
    if !still {
        return Oracle::None;
    }
    // Widen to the whole stationary run and take its latest snapshot.
    let mut start = trace.len() - k - 1;
    while start > 0
        && trace[start - 1].kind == PointerKind::Move
        && dist(&trace[start - 1], &trace[start]) < t.hover_threshold_px
    {
        start -= 1;
    }
    match trace[start..].iter().rev().find_map(|e| e.element.clone()) {
        Some(el) => Oracle::Hover(el),
        None => Oracle::None,
    }
}

pub fn classify(trace: &[PointerEvent], t: &ContextThresholds) -> Oracle {
    match detect_context(trace, t) {
        Err(_) => Oracle::Malformed,
        Ok(None) => Oracle::None,
        Ok(Some(ContextEvent::Hover { element, .. })) => Oracle::Hover(element),
        Ok(Some(ContextEvent::Marquee { elements, .. })) => Oracle::Marquee(elements),
    }
}

pub fn random_element(rng: &mut ChaCha8Rng) -> ElementSnapshot {
    let tags = ["span", "div", "button"];
    let x = rng.random_range(0.0..200.0_f64).round();
    let y = rng.random_range(0.0..200.0_f64).round();
    ElementSnapshot::new(
        tags[rng.random_range(0..tags.len())],
        BoundingBox::new(
            x,
            y,
            rng.random_range(0.0..60.0_f64).round(),
            rng.random_range(0.0..30.0_f64).round(),
        ),
    )
    .attr("innerText", format!("e{}", rng.random_range(0..50)))
}

/// Traces mixing still stretches, jitter near the thresholds, clicks and drags.
pub fn random_trace(rng: &mut ChaCha8Rng) -> Vec<PointerEvent> {
    let pool: Vec<ElementSnapshot> = (0..6).map(|_| random_element(rng)).collect();
    let len = rng.random_range(0..16);
    let mut x = rng.random_range(0.0..200.0_f64);
    let mut y = rng.random_range(0.0..200.0_f64);
    let mut ts = 0i64;
    let mut trace = Vec::with_capacity(len);
    for _ in 0..len {
        let step = match rng.random_range(0..4) {
            0 => 0.0,
            1 => rng.random_range(0.0..5.5),
            2 => rng.random_range(4.0..12.0),
            _ => rng.random_range(10.0..120.0),
        };
        let angle = rng.random_range(0.0..std::f64::consts::TAU);
        x += step * angle.cos();
        y += step * angle.sin();
        let kind = match rng.random_range(0..10) {
            0 => PointerKind::Down,
            1 => PointerKind::Up,
            _ => PointerKind::Move,
        };
        ts += if rng.random_bool(0.03) {
            -1
        } else {
            rng.random_range(0..20)
        };
        let mut e = PointerEvent::new(kind, x, y, ts);
        if rng.random_bool(0.7) {
            e = e.over(pool[rng.random_range(0..pool.len())].clone());
        }
        trace.push(e);
    }
    trace
}
