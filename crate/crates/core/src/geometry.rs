//! The yin-yang symbol and its three class regions.
//!
//! The big circle of radius `r_big` is centred at `(r_big, r_big)`. Two
//! mid-circles of radius `r_big / 2` sit on the horizontal diameter at
//! `(0.5 r_big, r_big)` (left) and `(1.5 r_big, r_big)` (right), and the dots of
//! radius `r_small` share those centres. Yin is the upper half plus the right
//! mid-circle, minus the left mid-circle; Yang is its 180° rotation.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// A point in the plane of the symbol.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Class of a sample. The integer codes are part of every file format.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum ClassLabel {
    Yin = 0,
    Yang = 1,
    Dot = 2,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 3] = [ClassLabel::Yin, ClassLabel::Yang, ClassLabel::Dot];
    pub const COUNT: usize = 3;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassLabel::Yin => "Yin",
            ClassLabel::Yang => "Yang",
            ClassLabel::Dot => "Dot",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl From<ClassLabel> for u8 {
    fn from(c: ClassLabel) -> u8 {
        c as u8
    }
}

impl TryFrom<u8> for ClassLabel {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        ClassLabel::from_index(v as usize).ok_or_else(|| format!("unknown class code {v}"))
    }
}

/// Radii of the symbol. The centre is always `(r_big, r_big)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryParams {
    r_big: f64,
    r_small: f64,
}

impl Default for GeometryParams {
    fn default() -> Self {
        Self { r_big: 0.5, r_small: 0.1 }
    }
}

impl GeometryParams {
    /// Requires `0 < r_small < r_big / 2` so each dot fits inside its mid-circle.
    pub fn new(r_big: f64, r_small: f64) -> Result<Self> {
        if !(r_big.is_finite() && r_small.is_finite()) || r_small <= 0.0 || r_small >= r_big / 2.0 {
            return Err(Error::config(format!(
                "geometry requires 0 < r_small < r_big/2, got r_big={r_big}, r_small={r_small}"
            )));
        }
        Ok(Self { r_big, r_small })
    }

    pub fn r_big(&self) -> f64 {
        self.r_big
    }

    pub fn r_small(&self) -> f64 {
        self.r_small
    }

    pub fn center(&self) -> Point {
        Point::new(self.r_big, self.r_big)
    }

    /// Side length of the bounding square `[0, 2 r_big]²`.
    pub fn extent(&self) -> f64 {
        2.0 * self.r_big
    }

    pub fn left_dot_center(&self) -> Point {
        Point::new(0.5 * self.r_big, self.r_big)
    }

    pub fn right_dot_center(&self) -> Point {
        Point::new(1.5 * self.r_big, self.r_big)
    }

    /// Exact region areas `(Yin, Yang, Dot)`.
    pub fn analytic_areas(&self) -> [f64; 3] {
        use std::f64::consts::PI;
        let dot = 2.0 * PI * self.r_small * self.r_small;
        let swirl = PI * self.r_big * self.r_big / 2.0 - PI * self.r_small * self.r_small;
        [swirl, swirl, dot]
    }
}

pub fn dist_to_left_dot(p: Point, g: &GeometryParams) -> f64 {
    p.distance(g.left_dot_center())
}

pub fn dist_to_right_dot(p: Point, g: &GeometryParams) -> f64 {
    p.distance(g.right_dot_center())
}

/// Boundary points count as inside.
pub fn inside_big_circle(p: Point, g: &GeometryParams) -> bool {
    p.distance(g.center()) <= g.r_big
}

/// Assigns a point inside the big circle to its class.
///
/// Tests run in a fixed order with inclusive comparisons: Dot first, then
/// Yin, otherwise Yang.
pub fn which_class(p: Point, g: &GeometryParams) -> Result<ClassLabel> {
    if !inside_big_circle(p, g) {
        return Err(Error::OutsideSymbol { x: p.x, y: p.y });
    }
    Ok(classify_unchecked(p, g))
}

/// `which_class` without the containment check, for callers that already know.
pub(crate) fn classify_unchecked(p: Point, g: &GeometryParams) -> ClassLabel {
    let d_left = dist_to_left_dot(p, g);
    let d_right = dist_to_right_dot(p, g);
    let mid = g.r_big / 2.0;
    if d_left <= g.r_small || d_right <= g.r_small {
        ClassLabel::Dot
    } else if d_right <= mid || (d_left > mid && p.y > g.r_big) {
        ClassLabel::Yin
    } else {
        ClassLabel::Yang
    }
}
