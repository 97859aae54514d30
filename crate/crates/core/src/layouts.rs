//! Named surround speaker layouts.
//!
//! Channel order is the WAV channel contract: L, R, C, LFE, then the bed
//! surrounds front to back (left before right), then the heights front to
//! back (left before right).
//!
//! | layout | channels |
//! |--------|----------|
//! | 5.1    | L R C LFE Ls Rs |
//! | 5.1.2  | L R C LFE Ls Rs Ltm Rtm |
//! | 5.1.4  | L R C LFE Ls Rs Ltf Rtf Ltr Rtr |
//! | 7.1    | L R C LFE Lss Rss Lrs Rrs |
//! | 7.1.2  | L R C LFE Lss Rss Lrs Rrs Ltm Rtm |
//! | 7.1.4  | L R C LFE Lss Rss Lrs Rrs Ltf Rtf Ltr Rtr |
//! | 9.1    | L R C LFE Lw Rw Lss Rss Lrs Rrs |
//! | 9.1.2  | L R C LFE Lw Rw Lss Rss Lrs Rrs Ltm Rtm |
//! | 9.1.4  | L R C LFE Lw Rw Lss Rss Lrs Rrs Ltf Rtf Ltr Rtr |

use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::Direction;

pub const SUPPORTED_LAYOUTS: [&str; 9] = ["5.1", "5.1.4", "5.1.2", "7.1", "7.1.4", "7.1.2", "9.1.4", "9.1.2", "9.1"];

pub const HEIGHT_ELEVATION_DEG: f64 = 45.0;

/// Speaker angles as (label, azimuth, elevation). Negative azimuth is to
/// the right. Edit here to match another convention.
const FRONT: [(&str, f64, f64); 3] = [("L", 30.0, 0.0), ("R", -30.0, 0.0), ("C", 0.0, 0.0)];
const SURROUND_5: [(&str, f64, f64); 2] = [("Ls", 110.0, 0.0), ("Rs", -110.0, 0.0)];
const WIDE: [(&str, f64, f64); 2] = [("Lw", 60.0, 0.0), ("Rw", -60.0, 0.0)];
const SURROUND_7: [(&str, f64, f64); 4] =
    [("Lss", 90.0, 0.0), ("Rss", -90.0, 0.0), ("Lrs", 135.0, 0.0), ("Rrs", -135.0, 0.0)];
const TOP_2: [(&str, f64, f64); 2] = [("Ltm", 90.0, HEIGHT_ELEVATION_DEG), ("Rtm", -90.0, HEIGHT_ELEVATION_DEG)];
const TOP_4: [(&str, f64, f64); 4] = [
    ("Ltf", 45.0, HEIGHT_ELEVATION_DEG),
    ("Rtf", -45.0, HEIGHT_ELEVATION_DEG),
    ("Ltr", 135.0, HEIGHT_ELEVATION_DEG),
    ("Rtr", -135.0, HEIGHT_ELEVATION_DEG),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Position {
    Speaker(Direction),
    Lfe,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub label: &'static str,
    pub position: Position,
}

impl Channel {
    pub fn direction(&self) -> Option<Direction> {
        match self.position {
            Position::Speaker(d) => Some(d),
            Position::Lfe => None,
        }
    }

    pub fn is_lfe(&self) -> bool {
        self.position == Position::Lfe
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeakerLayout {
    pub name: &'static str,
    pub channels: Vec<Channel>,
}

impl SpeakerLayout {
    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn lfe_index(&self) -> Option<usize> {
        self.channels.iter().position(Channel::is_lfe)
    }

    /// Indices of the non-LFE channels, in channel order.
    pub fn speaker_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.channels[i].is_lfe()).collect()
    }
}

impl fmt::Display for SpeakerLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.name)?;
        for (i, c) in self.channels.iter().enumerate() {
            match c.position {
                Position::Speaker(d) => writeln!(f, "{i}\t{}\t{}\t{}", c.label, d.azimuth(), d.elevation())?,
                Position::Lfe => writeln!(f, "{i}\t{}\t-\t-", c.label)?,
            }
        }
        Ok(())
    }
}

pub fn get_layout(name: &str) -> Result<SpeakerLayout> {
    let name = SUPPORTED_LAYOUTS
        .iter()
        .copied()
        .find(|&n| n == name.trim())
        .ok_or_else(|| Error::UnsupportedLayout {
            name: name.to_string(),
            supported: SUPPORTED_LAYOUTS.to_vec(),
        })?;
    let (bed, heights) = match name.split('.').collect::<Vec<_>>()[..] {
        [b, _] => (b, "0"),
        [b, _, h] => (b, h),
        _ => unreachable!("supported names have two or three parts"),
    };
    let mut rows: Vec<(&'static str, f64, f64)> = Vec::new();
    rows.extend(FRONT);
    let lfe_at = rows.len();
    match bed {
        "5" => rows.extend(SURROUND_5),
        "7" => rows.extend(SURROUND_7),
        "9" => {
            rows.extend(WIDE);
            rows.extend(SURROUND_7);
        }
        _ => unreachable!(),
    }
    match heights {
        "0" => {}
        "2" => rows.extend(TOP_2),
        "4" => rows.extend(TOP_4),
        _ => unreachable!(),
    }
    let mut channels: Vec<Channel> = rows
        .into_iter()
        .map(|(label, az, el)| Channel {
            label,
            position: Position::Speaker(Direction::new(az, el).expect("table angles are finite")),
        })
        .collect();
    channels.insert(
        lfe_at,
        Channel {
            label: "LFE",
            position: Position::Lfe,
        },
    );
    Ok(SpeakerLayout { name, channels })
}

/// Speaker directions in channel order, LFE left out.
pub fn speaker_directions(layout: &SpeakerLayout) -> Vec<Direction> {
    layout.channels.iter().filter_map(Channel::direction).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(name: &str) -> Vec<&'static str> {
        get_layout(name).unwrap().channels.iter().map(|c| c.label).collect()
    }

    #[test]
    fn five_one_order() {
        assert_eq!(labels("5.1"), ["L", "R", "C", "LFE", "Ls", "Rs"]);
        assert_eq!(labels("9.1.4")[4..6], ["Lw", "Rw"]);
    }

    #[test]
    fn unknown_layout_lists_supported() {
        let msg = get_layout("stereo").unwrap_err().to_string();
        for n in SUPPORTED_LAYOUTS {
            assert!(msg.contains(n), "{msg}");
        }
    }

    #[test]
    fn name_arithmetic_and_symmetry() {
        for name in SUPPORTED_LAYOUTS {
            let l = get_layout(name).unwrap();
            let parts: Vec<usize> = name.split('.').map(|p| p.parse().unwrap()).collect();
            let heights = parts.get(2).copied().unwrap_or(0);
            assert_eq!(l.len(), parts[0] + 1 + heights, "{name}");
            assert_eq!(l.channels.iter().filter(|c| c.is_lfe()).count(), 1);
            let mut seen = std::collections::HashSet::new();
            assert!(l.channels.iter().all(|c| seen.insert(c.label)));

            let dirs = speaker_directions(&l);
            assert_eq!(dirs.len(), l.len() - 1);
            assert_eq!(dirs.iter().filter(|d| d.elevation() == 0.0).count(), parts[0]);
            assert!(dirs.iter().all(|d| d.elevation() == 0.0 || d.elevation() == HEIGHT_ELEVATION_DEG));
            assert_eq!(dirs.iter().filter(|d| d.elevation() > 0.0).count(), heights);
            for d in dirs.iter().filter(|d| d.azimuth() != 0.0) {
                let mirror = (360.0 - d.azimuth()) % 360.0;
                assert!(dirs.iter().any(|e| e.azimuth() == mirror && e.elevation() == d.elevation()), "{name} {d}");
            }
        }
    }
}
