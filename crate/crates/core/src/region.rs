//! Connected-component labeling, per-region statistics and the
//! golden-ratio face-candidate filter.

use serde::{Deserialize, Serialize};

use crate::image::BinaryMask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Connectivity {
    Four,
    Eight,
}

/// Inclusive pixel bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BBox {
    pub min_x: usize,
    pub min_y: usize,
    pub max_x: usize,
    pub max_y: usize,
}

impl BBox {
    pub fn width(&self) -> usize {
        self.max_x - self.min_x + 1
    }

    pub fn height(&self) -> usize {
        self.max_y - self.min_y + 1
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.min_x as f64 && x <= self.max_x as f64 && y >= self.min_y as f64 && y <= self.max_y as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub label: u32,
    pub area: usize,
    pub bbox: BBox,
    pub centroid: (f64, f64),
}

impl Region {
    pub fn aspect_ratio(&self) -> f64 {
        self.bbox.height() as f64 / self.bbox.width() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMap {
    pub width: usize,
    pub height: usize,
    /// 0 is background; foreground labels are 1..=K.
    pub labels: Vec<u32>,
}

impl LabelMap {
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn new() -> Self {
        // slot 0 unused so provisional labels start at 1
        Self { parent: vec![0] }
    }

    fn make(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let up = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = up;
            x = up;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

/// Two-pass union-find labeling.
///
/// Regions are returned sorted by descending area (ties: smaller `min_y`,
/// then smaller `min_x`) and the label map is renumbered `1..=K` in that
/// order.
pub fn label_components(mask: &BinaryMask, connectivity: Connectivity) -> (LabelMap, Vec<Region>) {
    let (w, h) = (mask.width(), mask.height());
    let mut provisional = vec![0u32; w * h];
    let mut sets = DisjointSet::new();

    for y in 0..h {
        for x in 0..w {
            if !mask.get(x, y) {
                continue;
            }
            let mut neighbours = [0u32; 4];
            let mut n = 0;
            let mut push = |l: u32| {
                if l != 0 {
                    neighbours[n] = l;
                    n += 1;
                }
            };
            if x > 0 {
                push(provisional[y * w + x - 1]);
            }
            if y > 0 {
                push(provisional[(y - 1) * w + x]);
                if connectivity == Connectivity::Eight {
                    if x > 0 {
                        push(provisional[(y - 1) * w + x - 1]);
                    }
                    if x + 1 < w {
                        push(provisional[(y - 1) * w + x + 1]);
                    }
                }
            }
            let label = match neighbours[..n].iter().min() {
                None => sets.make(),
                Some(&m) => {
                    for &l in &neighbours[..n] {
                        sets.union(m, l);
                    }
                    m
                }
            };
            provisional[y * w + x] = label;
        }
    }

    // resolve roots and accumulate statistics per root
    struct Acc {
        area: usize,
        sx: f64,
        sy: f64,
        bbox: BBox,
    }
    let mut root_slot = vec![u32::MAX; sets.parent.len()];
    let mut accs: Vec<Acc> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let p = provisional[y * w + x];
            if p == 0 {
                continue;
            }
            let root = sets.find(p) as usize;
            if root_slot[root] == u32::MAX {
                root_slot[root] = accs.len() as u32;
                accs.push(Acc {
                    area: 0,
                    sx: 0.0,
                    sy: 0.0,
                    bbox: BBox {
                        min_x: x,
                        min_y: y,
                        max_x: x,
                        max_y: y,
                    },
                });
            }
            let slot = root_slot[root];
            provisional[y * w + x] = slot + 1;
            let a = &mut accs[slot as usize];
            a.area += 1;
            a.sx += x as f64;
            a.sy += y as f64;
            a.bbox.min_x = a.bbox.min_x.min(x);
            a.bbox.min_y = a.bbox.min_y.min(y);
            a.bbox.max_x = a.bbox.max_x.max(x);
            a.bbox.max_y = a.bbox.max_y.max(y);
        }
    }

    let mut order: Vec<usize> = (0..accs.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (&accs[i], &accs[j]);
        b.area
            .cmp(&a.area)
            .then(a.bbox.min_y.cmp(&b.bbox.min_y))
            .then(a.bbox.min_x.cmp(&b.bbox.min_x))
    });
    let mut relabel = vec![0u32; accs.len() + 1];
    let regions = order
        .iter()
        .enumerate()
        .map(|(rank, &slot)| {
            relabel[slot + 1] = rank as u32 + 1;
            let a = &accs[slot];
            Region {
                label: rank as u32 + 1,
                area: a.area,
                bbox: a.bbox,
                centroid: (a.sx / a.area as f64, a.sy / a.area as f64),
            }
        })
        .collect();
    let labels = provisional.into_iter().map(|l| relabel[l as usize]).collect();
    (
        LabelMap {
            width: w,
            height: h,
            labels,
        },
        regions,
    )
}

/// `(1 + sqrt 5) / 2`
pub const GOLDEN_RATIO: f64 = 1.618_033_988_749_895;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FaceCandidateRule {
    pub tolerance: f64,
    pub min_area: usize,
}

impl Default for FaceCandidateRule {
    fn default() -> Self {
        Self {
            tolerance: 0.65,
            min_area: 400,
        }
    }
}

impl FaceCandidateRule {
    pub fn golden_ratio(&self) -> f64 {
        GOLDEN_RATIO
    }

    pub fn accepts(&self, region: &Region) -> bool {
        let ratio = region.aspect_ratio();
        region.area >= self.min_area
            && ratio >= GOLDEN_RATIO - self.tolerance
            && ratio <= GOLDEN_RATIO + self.tolerance
    }

    pub fn validate(&self) -> crate::Result<()> {
        if !(self.tolerance > 0.0) || self.min_area == 0 {
            return Err(crate::Error::invalid(format!(
                "face rule needs tolerance > 0 and min_area >= 1, got {} / {}",
                self.tolerance, self.min_area
            )));
        }
        Ok(())
    }
}

/// Keeps regions whose bbox height/width ratio is within the golden band and
/// whose area reaches `min_area`. Input order is preserved.
pub fn face_candidates(regions: &[Region], rule: &FaceCandidateRule) -> Vec<Region> {
    regions.iter().filter(|r| rule.accepts(r)).cloned().collect()
}
