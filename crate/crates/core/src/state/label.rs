use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// A basis label for one subsystem.
///
/// Marbles and free particles use `In`/`Out`. Per-marble apparatuses start
/// `Ready` and end `RecordIn`/`RecordOut`. The counter starts `Ready` and
/// ends `Count(k)`; an observer's arithmetic memory starts `CountQuery` and
/// ends `Judged(k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Label {
    In,
    Out,
    Ready,
    RecordIn,
    RecordOut,
    Count(u32),
    CountQuery,
    Judged(u32),
}

impl Label {
    /// The two spatial regions a marble can occupy.
    pub const REGIONS: [Label; 2] = [Label::In, Label::Out];

    pub fn is_region(&self) -> bool {
        matches!(self, Label::In | Label::Out)
    }

    /// The other region, for `In`/`Out`.
    pub fn opposite(&self) -> Option<Label> {
        match self {
            Label::In => Some(Label::Out),
            Label::Out => Some(Label::In),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::In => write!(f, "in"),
            Label::Out => write!(f, "out"),
            Label::Ready => write!(f, "ready"),
            Label::RecordIn => write!(f, "'in'"),
            Label::RecordOut => write!(f, "'out'"),
            Label::Count(k) => write!(f, "'O={k}'"),
            Label::CountQuery => write!(f, "'count?'"),
            Label::Judged(k) => write!(f, "'count={k}'"),
        }
    }
}

impl From<Label> for String {
    fn from(label: Label) -> String {
        label.to_string()
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let count = |body: &str| -> Result<u32, String> {
            body.parse()
                .map_err(|_| format!("bad count in label {s:?}"))
        };
        match s {
            "in" => Ok(Label::In),
            "out" => Ok(Label::Out),
            "ready" => Ok(Label::Ready),
            "'in'" => Ok(Label::RecordIn),
            "'out'" => Ok(Label::RecordOut),
            "'count?'" => Ok(Label::CountQuery),
            _ => {
                if let Some(body) = s.strip_prefix("'O=").and_then(|r| r.strip_suffix('\'')) {
                    Ok(Label::Count(count(body)?))
                } else if let Some(body) =
                    s.strip_prefix("'count=").and_then(|r| r.strip_suffix('\''))
                {
                    Ok(Label::Judged(count(body)?))
                } else {
                    Err(format!("unknown label {s:?}"))
                }
            }
        }
    }
}

impl TryFrom<String> for Label {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubsystemKind {
    /// A two-region object (marble or particle), numbered from 0.
    Marble { index: usize },
    /// Records the region of the subsystem at roster position `target`.
    Apparatus { target: usize },
    /// Registers how many of `n` marbles are in the box.
    Counter { n: u32 },
    /// Memory store for a judgement about a count out of `n`.
    Observer { n: u32 },
}

impl SubsystemKind {
    pub fn alphabet(&self) -> Vec<Label> {
        match *self {
            SubsystemKind::Marble { .. } => vec![Label::In, Label::Out],
            SubsystemKind::Apparatus { .. } => {
                vec![Label::Ready, Label::RecordIn, Label::RecordOut]
            }
            SubsystemKind::Counter { n } => std::iter::once(Label::Ready)
                .chain((0..=n).map(Label::Count))
                .collect(),
            SubsystemKind::Observer { n } => std::iter::once(Label::CountQuery)
                .chain((0..=n).map(Label::Judged))
                .collect(),
        }
    }

    pub fn admits(&self, label: Label) -> bool {
        match (*self, label) {
            (SubsystemKind::Marble { .. }, Label::In | Label::Out) => true,
            (
                SubsystemKind::Apparatus { .. },
                Label::Ready | Label::RecordIn | Label::RecordOut,
            ) => true,
            (SubsystemKind::Counter { .. }, Label::Ready) => true,
            (SubsystemKind::Counter { n }, Label::Count(k)) => k <= n,
            (SubsystemKind::Observer { .. }, Label::CountQuery) => true,
            (SubsystemKind::Observer { n }, Label::Judged(k)) => k <= n,
            _ => false,
        }
    }

    /// The label a freshly prepared subsystem of this kind starts in.
    pub fn ready_label(&self) -> Option<Label> {
        match self {
            SubsystemKind::Marble { .. } => None,
            SubsystemKind::Apparatus { .. } | SubsystemKind::Counter { .. } => Some(Label::Ready),
            SubsystemKind::Observer { .. } => Some(Label::CountQuery),
        }
    }

    pub fn is_pointer(&self) -> bool {
        !matches!(self, SubsystemKind::Marble { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Subsystem {
    pub name: String,
    pub kind: SubsystemKind,
    /// Number of particles that can suffer hits; sets this subsystem's share
    /// of the aggregate hit rate.
    pub particles: f64,
}

impl Subsystem {
    pub fn marble(index: usize, particles: f64) -> Self {
        Subsystem {
            name: format!("m{}", index + 1),
            kind: SubsystemKind::Marble { index },
            particles,
        }
    }
}

/// A configuration: one label per roster subsystem, in roster order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Configuration(pub Vec<Label>);

impl Configuration {
    pub fn labels(&self) -> &[Label] {
        &self.0
    }

    pub fn get(&self, subsystem: usize) -> Label {
        self.0[subsystem]
    }

    pub fn count_in(&self) -> usize {
        self.0.iter().filter(|l| **l == Label::In).count()
    }
}
