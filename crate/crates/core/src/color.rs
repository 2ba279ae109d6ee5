//! CIELAB / sRGB colors and the CIEDE2000 difference metric.
//!
//! All conversions use the D65 white point and the 2° standard observer.

use alloc::string::String;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

const WHITE_X: f64 = 0.95047;
const WHITE_Y: f64 = 1.0;
const WHITE_Z: f64 = 1.08883;

// (6/29)^3 and 3·(6/29)^2
const LAB_EPSILON: f64 = 216.0 / 24389.0;
const LAB_SLOPE: f64 = 108.0 / 841.0;

/// Linear channels may overshoot [0, 1] by this much and still count as
/// inside the gamut; sRGB round trips land within ~1e-12.
const GAMUT_TOLERANCE: f64 = 1e-7;

/// A point in CIELAB space.
///
/// `l` is kept in `[0, 100]` and `a`, `b` in `[-128, 128]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LabColor {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

impl LabColor {
    /// Builds a color, clamping each component into its valid range.
    pub fn new(l: f64, a: f64, b: f64) -> Self {
        LabColor {
            l: l.clamp(0.0, 100.0),
            a: a.clamp(-128.0, 128.0),
            b: b.clamp(-128.0, 128.0),
        }
    }

    /// Color from lightness, chroma and hue angle in degrees.
    pub fn from_lch(l: f64, chroma: f64, hue_deg: f64) -> Self {
        let h = hue_deg.to_radians();
        LabColor::new(l, chroma * libm::cos(h), chroma * libm::sin(h))
    }

    pub fn chroma(&self) -> f64 {
        libm::hypot(self.a, self.b)
    }

    /// Hue angle in degrees, in `[0, 360)`. Neutral colors report 0.
    pub fn hue(&self) -> f64 {
        if self.a == 0.0 && self.b == 0.0 {
            return 0.0;
        }
        let h = libm::atan2(self.b, self.a).to_degrees();
        if h < 0.0 {
            h + 360.0
        } else if h >= 360.0 {
            h - 360.0
        } else {
            h
        }
    }

    pub fn distance_squared(&self, other: &LabColor) -> f64 {
        let dl = self.l - other.l;
        let da = self.a - other.a;
        let db = self.b - other.b;
        dl * dl + da * da + db * db
    }

    /// True when the color is displayable in sRGB without clipping.
    pub fn in_srgb_gamut(&self) -> bool {
        let [r, g, b] = lab_to_linear_rgb(*self);
        [r, g, b]
            .iter()
            .all(|&c| (-GAMUT_TOLERANCE..=1.0 + GAMUT_TOLERANCE).contains(&c))
    }

    /// Nearest 8-bit sRGB color, expressed back in LAB.
    ///
    /// Colors produced this way survive a hex round trip bit for bit.
    pub fn snap_to_srgb(&self) -> LabColor {
        srgb_to_lab(lab_to_srgb(*self).0)
    }
}

/// An 8-bit sRGB color.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct RgbColor {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl RgbColor {
    pub const WHITE: RgbColor = RgbColor::new(255, 255, 255);
    pub const BLACK: RgbColor = RgbColor::new(0, 0, 0);

    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        RgbColor { r, g, b }
    }

    /// `#RRGGBB`, uppercase.
    pub fn to_hex(&self) -> String {
        alloc::format!("{self}")
    }

    /// Parses `#RRGGBB` (case-insensitive). The leading `#` is required.
    pub fn from_hex(s: &str) -> Result<Self> {
        let invalid = || Error::Validation(alloc::format!("invalid hex color {s:?}"));
        let digits = s.strip_prefix('#').ok_or_else(invalid)?;
        if digits.len() != 6 || !digits.bytes().all(|c| c.is_ascii_hexdigit()) {
            return Err(invalid());
        }
        let channel = |i: usize| u8::from_str_radix(&digits[i..i + 2], 16).map_err(|_| invalid());
        Ok(RgbColor::new(channel(0)?, channel(2)?, channel(4)?))
    }
}

impl fmt::Display for RgbColor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{:02X}{:02X}{:02X}", self.r, self.g, self.b)
    }
}

impl FromStr for RgbColor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RgbColor::from_hex(s)
    }
}

fn decode_gamma(c: f64) -> f64 {
    if c > 0.04045 {
        libm::pow((c + 0.055) / 1.055, 2.4)
    } else {
        c / 12.92
    }
}

fn encode_gamma(c: f64) -> f64 {
    if c > 0.003_130_8 {
        1.055 * libm::pow(c, 1.0 / 2.4) - 0.055
    } else {
        12.92 * c
    }
}

fn lab_f(t: f64) -> f64 {
    if t > LAB_EPSILON {
        libm::cbrt(t)
    } else {
        t / LAB_SLOPE + 4.0 / 29.0
    }
}

fn lab_f_inv(t: f64) -> f64 {
    let cubed = t * t * t;
    if cubed > LAB_EPSILON {
        cubed
    } else {
        LAB_SLOPE * (t - 4.0 / 29.0)
    }
}

// exact inverse of the matrix in `srgb_unit_to_lab`, so round trips stay tight
fn lab_to_linear_rgb(c: LabColor) -> [f64; 3] {
    let fy = (c.l + 16.0) / 116.0;
    let fx = fy + c.a / 500.0;
    let fz = fy - c.b / 200.0;
    let x = WHITE_X * lab_f_inv(fx);
    let y = WHITE_Y * lab_f_inv(fy);
    let z = WHITE_Z * lab_f_inv(fz);
    [
        3.240_454_836_021_409 * x - 1.537_138_850_102_575 * y - 0.498_531_546_868_481 * z,
        -0.969_266_389_875_654 * x + 1.876_010_928_842_491 * y + 0.041_556_082_346_674 * z,
        0.055_643_419_604_214 * x - 0.204_025_854_267_698 * y + 1.057_225_162_457_929 * z,
    ]
}

/// Converts an 8-bit sRGB color to CIELAB.
pub fn srgb_to_lab(c: RgbColor) -> LabColor {
    srgb_unit_to_lab([c.r, c.g, c.b].map(|v| f64::from(v) / 255.0))
}

/// Converts gamma-encoded sRGB channels in `[0, 1]` to CIELAB.
pub fn srgb_unit_to_lab(rgb: [f64; 3]) -> LabColor {
    let [r, g, b] = rgb.map(decode_gamma);

    let x = 0.412_456_4 * r + 0.357_576_1 * g + 0.180_437_5 * b;
    let y = 0.212_672_9 * r + 0.715_152_2 * g + 0.072_175_0 * b;
    let z = 0.019_333_9 * r + 0.119_192_0 * g + 0.950_304_1 * b;

    let fx = lab_f(x / WHITE_X);
    let fy = lab_f(y / WHITE_Y);
    let fz = lab_f(z / WHITE_Z);
    LabColor::new(116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz))
}

/// Gamma-encoded sRGB channels of a CIELAB color, unclamped.
pub fn lab_to_srgb_unit(c: LabColor) -> [f64; 3] {
    lab_to_linear_rgb(c).map(|v| if v < 0.0 { -encode_gamma(-v) } else { encode_gamma(v) })
}

/// Converts a CIELAB color to 8-bit sRGB.
///
/// Channels outside the gamut are clamped; the flag reports whether the color
/// was displayable without clamping.
pub fn lab_to_srgb(c: LabColor) -> (RgbColor, bool) {
    let linear = lab_to_linear_rgb(c);
    let in_gamut = linear
        .iter()
        .all(|&v| (-GAMUT_TOLERANCE..=1.0 + GAMUT_TOLERANCE).contains(&v));
    let [r, g, b] = linear.map(|v| {
        let encoded = encode_gamma(v.clamp(0.0, 1.0));
        libm::round(encoded * 255.0).clamp(0.0, 255.0) as u8
    });
    (RgbColor::new(r, g, b), in_gamut)
}

const POW25_7: f64 = 6_103_515_625.0;

fn pow7(x: f64) -> f64 {
    let x2 = x * x;
    let x3 = x2 * x;
    x3 * x3 * x
}

fn hue_angle(b: f64, a: f64) -> f64 {
    if a == 0.0 && b == 0.0 {
        return 0.0;
    }
    let h = libm::atan2(b, a).to_degrees();
    if h < 0.0 {
        h + 360.0
    } else {
        h
    }
}

/// CIEDE2000 color difference with unit parametric factors.
pub fn ciede2000(c1: LabColor, c2: LabColor) -> f64 {
    let chroma1 = libm::hypot(c1.a, c1.b);
    let chroma2 = libm::hypot(c2.a, c2.b);
    let mean_chroma7 = pow7((chroma1 + chroma2) / 2.0);
    let g = 0.5 * (1.0 - libm::sqrt(mean_chroma7 / (mean_chroma7 + POW25_7)));

    let a1 = (1.0 + g) * c1.a;
    let a2 = (1.0 + g) * c2.a;
    let cp1 = libm::hypot(a1, c1.b);
    let cp2 = libm::hypot(a2, c2.b);
    let hp1 = hue_angle(c1.b, a1);
    let hp2 = hue_angle(c2.b, a2);

    let delta_l = c2.l - c1.l;
    let delta_c = cp2 - cp1;
    let chroma_product = cp1 * cp2;
    let delta_h_angle = if chroma_product == 0.0 {
        0.0
    } else {
        let d = hp2 - hp1;
        if d > 180.0 {
            d - 360.0
        } else if d < -180.0 {
            d + 360.0
        } else {
            d
        }
    };
    let delta_h =
        2.0 * libm::sqrt(chroma_product) * libm::sin((delta_h_angle / 2.0).to_radians());

    let mean_l = (c1.l + c2.l) / 2.0;
    let mean_cp = (cp1 + cp2) / 2.0;
    let hue_sum = hp1 + hp2;
    let mean_h = if chroma_product == 0.0 {
        hue_sum
    } else if libm::fabs(hp1 - hp2) <= 180.0 {
        hue_sum / 2.0
    } else if hue_sum < 360.0 {
        (hue_sum + 360.0) / 2.0
    } else {
        (hue_sum - 360.0) / 2.0
    };

    let t = 1.0 - 0.17 * libm::cos((mean_h - 30.0).to_radians())
        + 0.24 * libm::cos((2.0 * mean_h).to_radians())
        + 0.32 * libm::cos((3.0 * mean_h + 6.0).to_radians())
        - 0.20 * libm::cos((4.0 * mean_h - 63.0).to_radians());
    let rotation = (mean_h - 275.0) / 25.0;
    let delta_theta = 30.0 * libm::exp(-rotation * rotation);
    let mean_cp7 = pow7(mean_cp);
    let rc = 2.0 * libm::sqrt(mean_cp7 / (mean_cp7 + POW25_7));
    let l50 = (mean_l - 50.0) * (mean_l - 50.0);
    let sl = 1.0 + 0.015 * l50 / libm::sqrt(20.0 + l50);
    let sc = 1.0 + 0.045 * mean_cp;
    let sh = 1.0 + 0.015 * mean_cp * t;
    let rt = -libm::sin((2.0 * delta_theta).to_radians()) * rc;

    let dl = delta_l / sl;
    let dc = delta_c / sc;
    let dh = delta_h / sh;
    let sum = dl * dl + dc * dc + dh * dh + rt * dc * dh;
    libm::sqrt(sum.max(0.0))
}
