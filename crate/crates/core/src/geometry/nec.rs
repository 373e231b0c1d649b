//! NEC-2 card deck export, and a reader for the geometry cards it writes.

use std::fmt::Write as _;

use super::wire::WireModel;
use super::GeometryError;
use crate::vec3::Vec3;

/// Radiation pattern request in NEC angles: `theta` from the +z axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PatternRequest {
    pub theta_start: f64,
    pub theta_step: f64,
    pub theta_count: usize,
    pub phi_start: f64,
    pub phi_step: f64,
    pub phi_count: usize,
}

impl PatternRequest {
    /// Full sphere at `step` degrees.
    pub fn full_sphere(step: f64) -> Self {
        Self {
            theta_start: 0.0,
            theta_step: step,
            theta_count: (180.0 / step).round() as usize + 1,
            phi_start: 0.0,
            phi_step: step,
            phi_count: (360.0 / step).round() as usize,
        }
    }
}

impl Default for PatternRequest {
    fn default() -> Self {
        Self::full_sphere(5.0)
    }
}

fn num(x: f64) -> String {
    // seven significant digits, free-field friendly
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.6E}")
}

/// Writes a CM/CE/GW/GE/EX/FR/RP/EN deck. One `GW` card per tag group;
/// ports become unit voltage sources whose sign carries the feed polarity.
pub fn export_nec_deck(model: &WireModel, frequency: f64, pattern: &PatternRequest) -> String {
    let mut deck = String::new();
    let _ = writeln!(deck, "CM curvant conformal dipole array");
    let _ = writeln!(deck, "CM {} segments, {} ports", model.segment_count(), model.ports.len());
    let _ = writeln!(deck, "CE");
    let groups = model.tag_groups();
    // NEC tags must be unique per card; renumber groups in order.
    let mut card_of_segment = vec![(0usize, 0usize); model.segment_count()];
    for (g, range) in groups.iter().enumerate() {
        let first = &model.segments[range.start];
        let last = &model.segments[range.end - 1];
        let _ = writeln!(
            deck,
            "GW {} {} {} {} {} {} {} {} {}",
            g + 1,
            range.len(),
            num(first.start.x),
            num(first.start.y),
            num(first.start.z),
            num(last.end.x),
            num(last.end.y),
            num(last.end.z),
            num(first.radius)
        );
        for (k, i) in range.clone().enumerate() {
            card_of_segment[i] = (g + 1, k + 1);
        }
    }
    let _ = writeln!(deck, "GE 0");
    for port in &model.ports {
        let (tag, seg) = card_of_segment[port.segment];
        let _ = writeln!(deck, "EX 0 {tag} {seg} 0 {} {}", num(port.sign.value()), num(0.0));
    }
    let _ = writeln!(deck, "FR 0 1 0 0 {} 0", num(frequency / 1e6));
    let _ = writeln!(
        deck,
        "RP 0 {} {} 1000 {} {} {} {}",
        pattern.theta_count,
        pattern.phi_count,
        num(pattern.theta_start),
        num(pattern.phi_start),
        num(pattern.theta_step),
        num(pattern.phi_step)
    );
    let _ = writeln!(deck, "EN");
    deck
}

/// One parsed `GW` card.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WireCard {
    pub tag: u32,
    pub segments: usize,
    pub start: Vec3,
    pub end: Vec3,
    pub radius: f64,
}

impl WireCard {
    /// Endpoints of the card's even subdivision.
    pub fn segment_endpoints(&self) -> Vec<(Vec3, Vec3)> {
        let n = self.segments as f64;
        (0..self.segments)
            .map(|k| (self.start.lerp(self.end, k as f64 / n), self.start.lerp(self.end, (k + 1) as f64 / n)))
            .collect()
    }
}

/// Reads every `GW` card of a deck.
pub fn parse_wire_cards(deck: &str) -> Result<Vec<WireCard>, GeometryError> {
    let mut cards = Vec::new();
    for (lineno, line) in deck.lines().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.first() != Some(&"GW") {
            continue;
        }
        let bad = |what: &str| GeometryError::Deck { line: lineno + 1, message: what.to_string() };
        if fields.len() < 10 {
            return Err(bad("GW card needs 9 fields"));
        }
        let tag = fields[1].parse().map_err(|_| bad("bad tag"))?;
        let segments = fields[2].parse().map_err(|_| bad("bad segment count"))?;
        let mut v = [0.0; 7];
        for (slot, field) in v.iter_mut().zip(&fields[3..10]) {
            *slot = field.parse().map_err(|_| bad("bad number"))?;
        }
        cards.push(WireCard {
            tag,
            segments,
            start: Vec3::new(v[0], v[1], v[2]),
            end: Vec3::new(v[3], v[4], v[5]),
            radius: v[6],
        });
    }
    Ok(cards)
}
