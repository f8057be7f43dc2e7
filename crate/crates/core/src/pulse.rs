//! Logical pulse schedules for a candidate circuit.
//!
//! Every operation occupies its own slot on a single sequential timeline:
//! single-qubit rotations go on local channels with a nominal duration,
//! analog blocks on the global channel with their exact parameters.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzTemplate, Block, Genome, Operation};
use crate::error::{Error, Result};
use crate::pauli::Axis;
use crate::rydberg::NS_PER_US;

pub const DEFAULT_ROTATION_NS: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Channel {
    Local { qubit: usize },
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PulseKind {
    Rotation { axis: Axis, angle: f64 },
    AnalogBlock { block: Block },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseEntry {
    pub channel: Channel,
    pub start_ns: f64,
    pub duration_ns: f64,
    /// rad/µs
    pub omega: f64,
    /// rad/µs
    pub delta: f64,
    pub phi: f64,
    pub kind: PulseKind,
}

impl PulseEntry {
    pub fn end_ns(&self) -> f64 {
        self.start_ns + self.duration_ns
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub n_qubits: usize,
    pub entries: Vec<PulseEntry>,
}

/// Square-pulse parameters realising `R_axis(angle)` in `duration_ns`.
/// `X` and `Y` use the drive with `φ = 0` and `φ = −π/2`, `Z` uses the detuning.
fn rotation_drive(axis: Axis, angle: f64, duration_ns: f64) -> (f64, f64, f64) {
    let rate = if duration_ns > 0.0 {
        angle / (duration_ns / NS_PER_US)
    } else {
        0.0
    };
    match axis {
        Axis::X => (rate, 0.0, 0.0),
        Axis::Y => (rate, 0.0, -FRAC_PI_2),
        Axis::Z => (0.0, rate, 0.0),
    }
}

pub fn export_schedule(g: &Genome, tpl: &AnsatzTemplate) -> Result<PulseSchedule> {
    export_schedule_with(g, tpl, DEFAULT_ROTATION_NS)
}

/// Schedule in `build_circuit` order, local rotations lasting `rotation_ns` each.
pub fn export_schedule_with(g: &Genome, tpl: &AnsatzTemplate, rotation_ns: f64) -> Result<PulseSchedule> {
    if !(rotation_ns > 0.0 && rotation_ns.is_finite()) {
        return Err(Error::InvalidSchedule(format!(
            "rotation duration must be positive, got {rotation_ns}"
        )));
    }
    let mut clock = 0.0;
    let mut entries = Vec::new();
    for op in tpl.build_circuit(g)? {
        let entry = match op {
            Operation::Rotation { qubit, axis, angle } => {
                let (omega, delta, phi) = rotation_drive(axis, angle, rotation_ns);
                PulseEntry {
                    channel: Channel::Local { qubit },
                    start_ns: clock,
                    duration_ns: rotation_ns,
                    omega,
                    delta,
                    phi,
                    kind: PulseKind::Rotation { axis, angle },
                }
            }
            Operation::Analog { block, params } => PulseEntry {
                channel: Channel::Global,
                start_ns: clock,
                duration_ns: params.duration_ns,
                omega: params.omega,
                delta: params.delta,
                phi: params.phi,
                kind: PulseKind::AnalogBlock { block },
            },
        };
        clock = entry.end_ns();
        entries.push(entry);
    }
    let schedule = PulseSchedule {
        n_qubits: tpl.n_qubits(),
        entries,
    };
    schedule.validate()?;
    Ok(schedule)
}

impl PulseSchedule {
    pub fn total_duration_ns(&self) -> f64 {
        self.entries.iter().map(PulseEntry::end_ns).fold(0.0, f64::max)
    }

    /// Channel entries are disjoint and global entries overlap nothing.
    pub fn validate(&self) -> Result<()> {
        for (i, e) in self.entries.iter().enumerate() {
            if !(e.start_ns >= 0.0 && e.duration_ns >= 0.0) || !e.end_ns().is_finite() {
                return Err(Error::InvalidSchedule(format!("entry {i} has invalid timing")));
            }
            if let Channel::Local { qubit } = e.channel {
                if qubit >= self.n_qubits {
                    return Err(Error::QubitOutOfRange {
                        index: qubit,
                        n_qubits: self.n_qubits,
                    });
                }
            }
        }
        for (i, a) in self.entries.iter().enumerate() {
            for (j, b) in self.entries.iter().enumerate().skip(i + 1) {
                let conflict = a.channel == b.channel
                    || a.channel == Channel::Global
                    || b.channel == Channel::Global;
                let overlap = a.start_ns < b.end_ns() && b.start_ns < a.end_ns();
                if conflict && overlap {
                    return Err(Error::InvalidSchedule(format!("entries {i} and {j} overlap")));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Self = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    fn rows(&self) -> Vec<(String, Channel)> {
        let mut rows = vec![("global".to_string(), Channel::Global)];
        rows.extend((0..self.n_qubits).map(|q| (format!("q{q}"), Channel::Local { qubit: q })));
        rows
    }

    /// Fixed-width text timeline: `x`/`y`/`z` for rotations, `1`/`2` for the
    /// analog blocks.
    pub fn render_ascii(&self, width: usize) -> String {
        let width = width.max(10);
        let total = self.total_duration_ns();
        let col = |t: f64| {
            if total > 0.0 {
                ((t / total) * width as f64).round() as usize
            } else {
                0
            }
        };
        let mut out = String::new();
        for (label, channel) in self.rows() {
            let mut line = vec!['.'; width];
            for e in self.entries.iter().filter(|e| e.channel == channel) {
                let glyph = match e.kind {
                    PulseKind::Rotation { angle, .. } if angle == 0.0 => continue,
                    PulseKind::Rotation { axis, .. } => axis.symbol().to_ascii_lowercase(),
                    PulseKind::AnalogBlock { block: Block::First } => '1',
                    PulseKind::AnalogBlock { block: Block::Second } => '2',
                };
                let (a, b) = (col(e.start_ns), col(e.end_ns()).max(col(e.start_ns) + 1));
                for c in line.iter_mut().take(b.min(width)).skip(a) {
                    *c = glyph;
                }
            }
            let _ = writeln!(out, "{label:>6} |{}|", line.into_iter().collect::<String>());
        }
        let _ = writeln!(out, "{:>6}  0 ns{:>w$}", "", format!("{total:.1} ns"), w = width - 3);
        out
    }

    pub fn render_svg(&self) -> String {
        const LEFT: f64 = 60.0;
        const WIDTH: f64 = 800.0;
        const ROW: f64 = 28.0;
        let total = self.total_duration_ns().max(1.0);
        let rows = self.rows();
        let height = ROW * rows.len() as f64 + 30.0;
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{height}" font-family="monospace" font-size="12">"#,
            LEFT + WIDTH + 20.0
        );
        for (r, (label, channel)) in rows.iter().enumerate() {
            let y = r as f64 * ROW + 10.0;
            let _ = writeln!(out, r#"<text x="4" y="{}">{label}</text>"#, y + 16.0);
            let _ = writeln!(
                out,
                r##"<line x1="{LEFT}" y1="{0}" x2="{1}" y2="{0}" stroke="#bbb"/>"##,
                y + ROW / 2.0,
                LEFT + WIDTH
            );
            for e in self.entries.iter().filter(|e| e.channel == *channel) {
                let (fill, text) = match e.kind {
                    PulseKind::Rotation { angle, .. } if angle == 0.0 => continue,
                    PulseKind::Rotation { axis, angle } => {
                        ("#4caf50", format!("R{}({angle:.2})", axis.symbol()))
                    }
                    PulseKind::AnalogBlock { block } => ("#7e57c2", format!("{block:?} {:.1} ns", e.duration_ns)),
                };
                let x = LEFT + WIDTH * e.start_ns / total;
                let w = (WIDTH * e.duration_ns / total).max(1.0);
                let _ = writeln!(
                    out,
                    r#"<rect x="{x:.2}" y="{:.2}" width="{w:.2}" height="{:.2}" fill="{fill}"><title>{text}</title></rect>"#,
                    y + 4.0,
                    ROW - 8.0
                );
            }
        }
        let _ = writeln!(
            out,
            r#"<text x="{LEFT}" y="{}">0 ns</text><text x="{}" y="{}" text-anchor="end">{} ns</text>"#,
            height - 6.0,
            LEFT + WIDTH,
            height - 6.0,
            self.total_duration_ns()
        );
        out.push_str("</svg>\n");
        out
    }
}
