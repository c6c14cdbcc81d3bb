use std::fmt;
use std::str::FromStr;

/// One of the four sectors (pseudo-omni beam directions) of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sector {
    A,
    B,
    C,
    D,
}

pub const SECTORS: [Sector; 4] = [Sector::A, Sector::B, Sector::C, Sector::D];

impl Sector {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Sector> {
        SECTORS.get(i).copied()
    }

    pub fn label(self) -> &'static str {
        match self {
            Sector::A => "A",
            Sector::B => "B",
            Sector::C => "C",
            Sector::D => "D",
        }
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown sector label {0:?} (expected A, B, C or D)")]
pub struct BadSectorLabel(pub String);

impl FromStr for Sector {
    type Err = BadSectorLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "A" | "a" => Ok(Sector::A),
            "B" | "b" => Ok(Sector::B),
            "C" | "c" => Ok(Sector::C),
            "D" | "d" => Ok(Sector::D),
            other => Err(BadSectorLabel(other.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_roundtrip() {
        for (i, s) in SECTORS.iter().enumerate() {
            assert_eq!(s.index(), i);
            assert_eq!(Sector::from_index(i), Some(*s));
            assert_eq!(s.label().parse::<Sector>().unwrap(), *s);
        }
        assert_eq!(Sector::from_index(4), None);
        assert!("E".parse::<Sector>().is_err());
    }
}
