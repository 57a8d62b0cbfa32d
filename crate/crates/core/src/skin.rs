//! Fixed RGB skin-colour rule.
//!
//! A pixel is skin when either clause holds:
//!
//! * uniform daylight: `R > 95, G > 40, B > 20, max - min > 15, |R - G| > 15, R > G, R > B`
//! * flash / bright lighting: `R > 220, G > 210, B > 170, |R - G| <= 15, R > B, G > B`

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{BinaryMask, RgbImage};

#[inline]
pub fn daylight_clause(r: u8, g: u8, b: u8) -> bool {
    let (r, g, b) = (r as i32, g as i32, b as i32);
    let spread = r.max(g).max(b) - r.min(g).min(b);
    r > 95 && g > 40 && b > 20 && spread > 15 && (r - g).abs() > 15 && r > g && r > b
}

#[inline]
pub fn bright_clause(r: u8, g: u8, b: u8) -> bool {
    let (r, g, b) = (r as i32, g as i32, b as i32);
    r > 220 && g > 210 && b > 170 && (r - g).abs() <= 15 && r > b && g > b
}

#[inline]
pub fn is_skin(r: u8, g: u8, b: u8) -> bool {
    daylight_clause(r, g, b) || bright_clause(r, g, b)
}

/// [`is_skin`] on unchecked integer channels.
pub fn try_is_skin(r: i64, g: i64, b: i64) -> Result<bool> {
    let ch = |v: i64| u8::try_from(v).map_err(|_| Error::ChannelOutOfRange(v));
    Ok(is_skin(ch(r)?, ch(g)?, ch(b)?))
}

pub fn skin_mask(img: &RgbImage) -> BinaryMask {
    let bits = img.pixels().iter().map(|&[r, g, b]| is_skin(r, g, b)).collect();
    BinaryMask::new(img.width(), img.height(), bits).expect("mask matches image dimensions")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SkinRuleReport {
    pub clause1_hits: usize,
    pub clause2_hits: usize,
    pub total_skin: usize,
}

pub fn skin_report(img: &RgbImage) -> SkinRuleReport {
    img.pixels()
        .iter()
        .fold(SkinRuleReport::default(), |mut acc, &[r, g, b]| {
            let c1 = daylight_clause(r, g, b);
            let c2 = bright_clause(r, g, b);
            acc.clause1_hits += c1 as usize;
            acc.clause2_hits += c2 as usize;
            acc.total_skin += (c1 || c2) as usize;
            acc
        })
}
