//! Nine-valued logic (`std_ulogic`) with the standard logical operators and
//! the `resolved` resolution function.

use serde::{Deserialize, Serialize};
use std::fmt;

/// One `std_ulogic` value.
///
/// Declaration order matches the enumeration order of the standard package,
/// so the derived `Ord` is the predefined relational order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Logic9 {
    #[serde(rename = "U")]
    U,
    #[serde(rename = "X")]
    X,
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "Z")]
    Z,
    #[serde(rename = "W")]
    W,
    #[serde(rename = "L")]
    L,
    #[serde(rename = "H")]
    H,
    #[serde(rename = "-")]
    DontCare,
}

/// Drive strength used by resolution.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Strength {
    HighImpedance,
    Weak,
    Forcing,
}

impl Logic9 {
    pub const ALL: [Logic9; 9] = [
        Logic9::U,
        Logic9::X,
        Logic9::Zero,
        Logic9::One,
        Logic9::Z,
        Logic9::W,
        Logic9::L,
        Logic9::H,
        Logic9::DontCare,
    ];

    pub fn from_char(c: char) -> Option<Logic9> {
        Some(match c.to_ascii_uppercase() {
            'U' => Logic9::U,
            'X' => Logic9::X,
            '0' => Logic9::Zero,
            '1' => Logic9::One,
            'Z' => Logic9::Z,
            'W' => Logic9::W,
            'L' => Logic9::L,
            'H' => Logic9::H,
            '-' => Logic9::DontCare,
            _ => return None,
        })
    }

    pub fn to_char(self) -> char {
        match self {
            Logic9::U => 'U',
            Logic9::X => 'X',
            Logic9::Zero => '0',
            Logic9::One => '1',
            Logic9::Z => 'Z',
            Logic9::W => 'W',
            Logic9::L => 'L',
            Logic9::H => 'H',
            Logic9::DontCare => '-',
        }
    }

    pub fn from_bool(b: bool) -> Logic9 {
        if b {
            Logic9::One
        } else {
            Logic9::Zero
        }
    }

    /// `to_X01`: strong or weak 0/1 become a boolean, everything else is unknown.
    pub fn to_bool(self) -> Option<bool> {
        match self {
            Logic9::Zero | Logic9::L => Some(false),
            Logic9::One | Logic9::H => Some(true),
            _ => None,
        }
    }

    fn strength(self) -> Strength {
        match self {
            Logic9::Z => Strength::HighImpedance,
            Logic9::W | Logic9::L | Logic9::H => Strength::Weak,
            _ => Strength::Forcing,
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Logic9 {
        match self {
            Logic9::U => Logic9::U,
            v => match v.to_bool() {
                Some(b) => Logic9::from_bool(!b),
                None => Logic9::X,
            },
        }
    }

    pub fn and(self, rhs: Logic9) -> Logic9 {
        if self.to_bool() == Some(false) || rhs.to_bool() == Some(false) {
            Logic9::Zero
        } else if self == Logic9::U || rhs == Logic9::U {
            Logic9::U
        } else if self.to_bool() == Some(true) && rhs.to_bool() == Some(true) {
            Logic9::One
        } else {
            Logic9::X
        }
    }

    pub fn or(self, rhs: Logic9) -> Logic9 {
        if self.to_bool() == Some(true) || rhs.to_bool() == Some(true) {
            Logic9::One
        } else if self == Logic9::U || rhs == Logic9::U {
            Logic9::U
        } else if self.to_bool() == Some(false) && rhs.to_bool() == Some(false) {
            Logic9::Zero
        } else {
            Logic9::X
        }
    }

    pub fn xor(self, rhs: Logic9) -> Logic9 {
        if self == Logic9::U || rhs == Logic9::U {
            return Logic9::U;
        }
        match (self.to_bool(), rhs.to_bool()) {
            (Some(a), Some(b)) => Logic9::from_bool(a ^ b),
            _ => Logic9::X,
        }
    }

    /// Pairwise resolution of two simultaneous drivers.
    pub fn resolve_pair(self, rhs: Logic9) -> Logic9 {
        use Logic9::*;
        if self == U || rhs == U {
            return U;
        }
        if matches!(self, X | DontCare) || matches!(rhs, X | DontCare) {
            return X;
        }
        match self.strength().cmp(&rhs.strength()) {
            std::cmp::Ordering::Greater => self,
            std::cmp::Ordering::Less => rhs,
            std::cmp::Ordering::Equal if self == rhs => self,
            std::cmp::Ordering::Equal => match self.strength() {
                Strength::Forcing => X,
                Strength::Weak => W,
                Strength::HighImpedance => Z,
            },
        }
    }
}

impl fmt::Display for Logic9 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

/// The `resolved` function of `std_logic_1164`: a single driver passes through
/// unchanged, otherwise drivers are folded starting from `'Z'`.
pub fn resolve(drivers: &[Logic9]) -> Logic9 {
    match drivers {
        [] => Logic9::Z,
        [single] => *single,
        many => many.iter().fold(Logic9::Z, |acc, d| acc.resolve_pair(*d)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // rows and columns in the order U X 0 1 Z W L H -
    const RESOLVED: [&str; 9] = [
        "UUUUUUUUU",
        "UXXXXXXXX",
        "UX0X0000X",
        "UXX11111X",
        "UX01ZWLHX",
        "UX01WWWWX",
        "UX01LWLWX",
        "UX01HWWHX",
        "UXXXXXXXX",
    ];
    const AND: [&str; 9] = [
        "UU0UUU0UU",
        "UX0XXX0XX",
        "000000000",
        "UX01XX01X",
        "UX0XXX0XX",
        "UX0XXX0XX",
        "000000000",
        "UX01XX01X",
        "UX0XXX0XX",
    ];
    const OR: [&str; 9] = [
        "UUU1UUU1U",
        "UXX1XXX1X",
        "UX01XX01X",
        "111111111",
        "UXX1XXX1X",
        "UXX1XXX1X",
        "UX01XX01X",
        "111111111",
        "UXX1XXX1X",
    ];

    fn table(rows: &[&str; 9], f: impl Fn(Logic9, Logic9) -> Logic9) {
        for (i, row) in rows.iter().enumerate() {
            for (j, want) in row.chars().enumerate() {
                let (a, b) = (Logic9::ALL[i], Logic9::ALL[j]);
                assert_eq!(f(a, b).to_char(), want, "{a} op {b}");
            }
        }
    }

    #[test]
    fn resolution_table() {
        table(&RESOLVED, Logic9::resolve_pair);
    }

    #[test]
    fn and_or_tables() {
        table(&AND, Logic9::and);
        table(&OR, Logic9::or);
    }

    #[test]
    fn not_and_xor() {
        let not: String = Logic9::ALL.iter().map(|l| l.not().to_char()).collect();
        assert_eq!(not, "UX10XX10X");
        assert_eq!(Logic9::H.xor(Logic9::L).to_char(), '1');
        assert_eq!(Logic9::One.xor(Logic9::One).to_char(), '0');
        assert_eq!(Logic9::Z.xor(Logic9::Zero).to_char(), 'X');
    }

    #[test]
    fn resolve_folds_drivers() {
        assert_eq!(resolve(&[]), Logic9::Z);
        assert_eq!(resolve(&[Logic9::H]), Logic9::H);
        assert_eq!(resolve(&[Logic9::Z, Logic9::L, Logic9::H]), Logic9::W);
        assert_eq!(resolve(&[Logic9::W, Logic9::One, Logic9::Z]), Logic9::One);
    }

    #[test]
    fn chars_round_trip() {
        for l in Logic9::ALL {
            assert_eq!(Logic9::from_char(l.to_char()), Some(l));
        }
        assert_eq!(Logic9::from_char('h'), Some(Logic9::H));
        assert_eq!(Logic9::from_char('q'), None);
        assert_eq!(Logic9::H.to_bool(), Some(true));
        assert_eq!(Logic9::W.to_bool(), None);
    }
}
