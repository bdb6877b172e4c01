use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// One of the eight compass directions a shelf neighbor can lie in.
///
/// North is "up" in the image, i.e. toward smaller `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    N,
    NE,
    E,
    SE,
    S,
    SW,
    W,
    NW,
}

impl Direction {
    pub const ALL: [Direction; 8] = [
        Direction::N,
        Direction::NE,
        Direction::E,
        Direction::SE,
        Direction::S,
        Direction::SW,
        Direction::W,
        Direction::NW,
    ];

    /// Slot index in `0..8`, clockwise from N.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Direction {
        Self::ALL[i % 8]
    }

    pub fn opposite(self) -> Direction {
        Self::from_index(self.index() + 4)
    }

    /// Grid step `(d_row, d_col)`; rows grow southward.
    pub fn grid_step(self) -> (i32, i32) {
        match self {
            Direction::N => (-1, 0),
            Direction::NE => (-1, 1),
            Direction::E => (0, 1),
            Direction::SE => (1, 1),
            Direction::S => (1, 0),
            Direction::SW => (1, -1),
            Direction::W => (0, -1),
            Direction::NW => (-1, -1),
        }
    }

    pub fn from_grid_step(d_row: i32, d_col: i32) -> Option<Direction> {
        Self::ALL.into_iter().find(|d| d.grid_step() == (d_row, d_col))
    }

    /// Unit vector in image coordinates.
    pub fn unit(self) -> (f64, f64) {
        let (dr, dc) = self.grid_step();
        let norm = f64::from(dr * dr + dc * dc).sqrt();
        (f64::from(dc) / norm, f64::from(dr) / norm)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::N => "N",
            Direction::NE => "NE",
            Direction::E => "E",
            Direction::SE => "SE",
            Direction::S => "S",
            Direction::SW => "SW",
            Direction::W => "W",
            Direction::NW => "NW",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|d| d.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| ModelError::UnknownDirection(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn opposites() {
        assert_eq!(Direction::N.opposite(), Direction::S);
        assert_eq!(Direction::NE.opposite(), Direction::SW);
        assert_eq!(Direction::E.opposite(), Direction::W);
        assert_eq!(Direction::NW.opposite(), Direction::SE);
        assert_eq!(Direction::W.opposite().opposite(), Direction::W);
    }

    #[test]
    fn opposite_is_geometric_antipode() {
        for d in Direction::ALL {
            assert_eq!(d.opposite().opposite(), d);
            let (r, c) = d.grid_step();
            assert_eq!(d.opposite().grid_step(), (-r, -c));
            assert_eq!(Direction::from_grid_step(r, c), Some(d));
        }
    }

    #[test]
    fn parses_case_insensitively() {
        assert_eq!("sw".parse::<Direction>().unwrap(), Direction::SW);
        assert!("up".parse::<Direction>().is_err());
    }

    #[test]
    fn north_points_up() {
        let (x, y) = Direction::N.unit();
        assert_eq!((x, y), (0.0, -1.0));
    }
}
