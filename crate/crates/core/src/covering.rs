//! Greedy half-overlap selection of rectangles and verifiers for its consequences.

use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{overlap_volume, CompressedGrid, Rect, ScalarField};
use crate::rng::FieldRng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Selected,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditEntry {
    /// `vol(R_j ∩ ∪ previously selected)` when `R_j` was examined.
    pub overlap_volume_at_decision: u128,
    pub decision: Decision,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Selection {
    input: Vec<Rect>,
    selected: Vec<usize>,
    audit: Vec<AuditEntry>,
}

impl Selection {
    pub fn input(&self) -> &[Rect] {
        &self.input
    }

    /// Indices into `input`, increasing.
    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn audit(&self) -> &[AuditEntry] {
        &self.audit
    }

    pub fn selected_rects(&self) -> Vec<Rect> {
        self.selected.iter().map(|&i| self.input[i].clone()).collect()
    }
}

/// One left-to-right pass: keep `R` when `2·vol(R ∩ ∪ kept) ≤ vol(R)`.
pub fn cf_select(rects: &[Rect]) -> Result<Selection> {
    let first = rects.first().ok_or(Error::Degenerate("empty rectangle list"))?;
    let d = first.dim();
    let mut kept: Vec<Rect> = Vec::new();
    let mut selected = Vec::new();
    let mut audit = Vec::with_capacity(rects.len());
    for (j, r) in rects.iter().enumerate() {
        if r.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: r.dim() });
        }
        let overlap = overlap_volume(r, &kept);
        let decision = if 2 * overlap <= r.volume() {
            kept.push(r.clone());
            selected.push(j);
            Decision::Selected
        } else {
            Decision::Skipped
        };
        audit.push(AuditEntry {
            overlap_volume_at_decision: overlap,
            decision,
        });
    }
    Ok(Selection {
        input: rects.to_vec(),
        selected,
        audit,
    })
}

/// Per-cell number of rectangles containing the cell.
pub fn overlap_field(rects: &[Rect], window: &Rect) -> Result<ScalarField> {
    if rects.iter().any(|r| !window.contains_rect(r)) {
        return Err(Error::WindowTooSmall);
    }
    let mut f = ScalarField::zeros(window.clone())?;
    if rects.is_empty() {
        return Ok(f);
    }
    for (count, piece) in CompressedGrid::build(rects)?.covered_pieces() {
        for p in piece.cells() {
            f.set(&p, count as f64)?;
        }
    }
    Ok(f)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verification {
    /// Every skipped rectangle was more than half covered when examined.
    pub skip_ok: bool,
    /// Every selected rectangle was at most half covered when examined (recomputed).
    pub select_ok: bool,
    /// `2·vol(R̂_k \ ∪_{ℓ<k} R̂_ℓ) ≥ vol(R̂_k)` for every k.
    pub disjoint_core_ok: bool,
    /// Selected rectangles whose new part is exactly half their volume.
    pub disjoint_core_ties: usize,
    /// `M_0 χ_{∪R̂} > ½` on `∪R_j`, witnessed by each `R_j` carrying more than half its volume in `∪R̂`.
    pub half_bound_ok: bool,
}

impl Verification {
    pub fn all_ok(&self) -> bool {
        self.skip_ok && self.select_ok && self.disjoint_core_ok && self.half_bound_ok
    }
}

/// Re-derives every decision and checks the covering consequences with integer arithmetic.
pub fn verify_selection(rects: &[Rect], selection: &Selection) -> Result<Verification> {
    if rects != selection.input() {
        return Err(Error::SelectionMismatch("input rectangles differ".into()));
    }
    if selection.audit.len() != rects.len() || selection.selected.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::SelectionMismatch("malformed audit".into()));
    }
    let mut skip_ok = true;
    let mut select_ok = selection.selected.first() == Some(&0);
    let mut core_ok = true;
    let mut ties = 0;
    let mut kept: Vec<Rect> = Vec::new();
    for (j, (r, entry)) in rects.iter().zip(&selection.audit).enumerate() {
        let overlap = overlap_volume(r, &kept);
        let vol = r.volume();
        if overlap != entry.overlap_volume_at_decision {
            select_ok = false;
        }
        let is_selected = selection.selected.binary_search(&j).is_ok();
        match entry.decision {
            Decision::Skipped => skip_ok &= !is_selected && 2 * overlap > vol,
            Decision::Selected => {
                select_ok &= is_selected && 2 * overlap <= vol;
                let core = vol - overlap;
                core_ok &= 2 * core >= vol;
                if 2 * core == vol {
                    ties += 1;
                }
                kept.push(r.clone());
            }
        }
    }
    let half_bound_ok = rects.iter().all(|r| 2 * overlap_volume(r, &kept) > r.volume());
    Ok(Verification {
        skip_ok,
        select_ok,
        disjoint_core_ok: core_ok,
        disjoint_core_ties: ties,
        half_bound_ok,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimates {
    pub union_volume: u128,
    pub selected_union_volume: u128,
    /// `vol ∪R_j / vol ∪R̂_k`.
    pub est1_ratio: f64,
    /// `(p, ‖Σ χ_{R̂_k}‖_p / vol(∪R̂_k)^{1/p})`.
    pub est2_ratios: Vec<(f64, f64)>,
    pub max_overlap_count: u32,
}

pub fn est_ratios(rects: &[Rect], selection: &Selection, p_list: &[f64]) -> Result<Estimates> {
    if let Some(&p) = p_list.iter().find(|p| !(**p > 1.0 && p.is_finite())) {
        return Err(Error::InvalidExponent(format!("p = {p} must lie in (1, ∞)")));
    }
    let all = CompressedGrid::build(rects)?;
    let sel = CompressedGrid::build(&selection.selected_rects())?;
    let (u_all, u_sel) = (all.union_volume(), sel.union_volume());
    let est2_ratios = p_list
        .iter()
        .map(|&p| (p, (sel.count_power_sum(p) / u_sel as f64).powf(1.0 / p)))
        .collect();
    Ok(Estimates {
        union_volume: u_all,
        selected_union_volume: u_sel,
        est1_ratio: u_all as f64 / u_sel as f64,
        est2_ratios,
        max_overlap_count: sel.max_count(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoveringReport {
    pub n_input: usize,
    pub n_selected: usize,
    pub verification: Verification,
    pub estimates: Estimates,
}

/// Selection, verification and ratio estimates in one pass.
pub fn cover(rects: &[Rect], p_list: &[f64]) -> Result<(Selection, CoveringReport)> {
    let selection = cf_select(rects)?;
    let verification = verify_selection(rects, &selection)?;
    let estimates = est_ratios(rects, &selection, p_list)?;
    let report = CoveringReport {
        n_input: rects.len(),
        n_selected: selection.selected.len(),
        verification,
        estimates,
    };
    Ok((selection, report))
}

/// Order in which the rectangle list is fed to the selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    File,
    VolumeDescending,
    Shuffle(u64),
}

impl Order {
    pub fn apply(self, rects: &[Rect]) -> Vec<Rect> {
        let mut out = rects.to_vec();
        match self {
            Order::File => {}
            Order::VolumeDescending => out.sort_by_key(|r| std::cmp::Reverse(r.volume())),
            Order::Shuffle(seed) => FieldRng::new(seed).shuffle(&mut out),
        }
        out
    }
}

impl FromStr for Order {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "file" => Ok(Order::File),
            "voldesc" => Ok(Order::VolumeDescending),
            _ => s
                .strip_prefix("shuffle:")
                .and_then(|seed| seed.parse().ok())
                .map(Order::Shuffle)
                .ok_or_else(|| Error::Parse(format!("unknown order `{s}`"))),
        }
    }
}

impl std::fmt::Display for Order {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Order::File => f.write_str("file"),
            Order::VolumeDescending => f.write_str("voldesc"),
            Order::Shuffle(seed) => write!(f, "shuffle:{seed}"),
        }
    }
}

/// `count` random boxes in `[0, side)^d`, each side length uniform in `1..=max_len`.
pub fn random_family(rng: &mut FieldRng, d: usize, side: i64, count: usize, max_len: i64) -> Vec<Rect> {
    (0..count)
        .map(|_| {
            let mut lo = Vec::with_capacity(d);
            let mut hi = Vec::with_capacity(d);
            for _ in 0..d {
                let len = rng.range_i64(1, max_len.min(side) + 1);
                let start = rng.range_i64(0, side - len + 1);
                lo.push(start);
                hi.push(start + len);
            }
            Rect::new(lo, hi).expect("nonempty sides")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maximal::{maximal_exact_at, Alpha};

    fn t_interval(lo: i64, hi: i64) -> Rect {
        Rect::new(vec![0, 0, lo], vec![2, 2, hi]).unwrap()
    }

    /// Marks cells one rectangle at a time.
    fn dense_overlap(r: &Rect, kept: &[Rect]) -> u128 {
        r.cells().filter(|p| kept.iter().any(|k| k.contains(p))).count() as u128
    }

    #[test]
    fn nested_suffix_is_skipped() {
        let rects = [t_interval(0, 4), t_interval(1, 4)];
        let s = cf_select(&rects).unwrap();
        assert_eq!(s.selected(), &[0]);
        assert_eq!(s.audit()[1].overlap_volume_at_decision, 12);
        assert_eq!(s.audit()[1].decision, Decision::Skipped);
        let v = verify_selection(&rects, &s).unwrap();
        assert!(v.all_ok());
    }

    #[test]
    fn half_overlaps_tie_and_select() {
        let rects = [t_interval(0, 4), t_interval(2, 6), t_interval(4, 8)];
        let (s, report) = cover(&rects, &[2.0]).unwrap();
        assert_eq!(s.selected(), &[0, 1, 2]);
        let overlaps: Vec<u128> = s.audit().iter().map(|a| a.overlap_volume_at_decision).collect();
        assert_eq!(overlaps, vec![0, 8, 8]);
        assert!(report.verification.all_ok());
        assert_eq!(report.verification.disjoint_core_ties, 2);
        assert_eq!(report.estimates.est1_ratio, 1.0);
    }

    #[test]
    fn disjoint_family_has_unit_ratios() {
        let rects: Vec<Rect> = (0..5).map(|k| Rect::cube(3, 3 * k, 3 * k + 2).unwrap()).collect();
        let (s, r) = cover(&rects, &[1.5, 2.0, 3.0]).unwrap();
        assert_eq!(s.selected().len(), 5);
        assert_eq!(r.estimates.est1_ratio, 1.0);
        for (_, e) in &r.estimates.est2_ratios {
            assert!((e - 1.0).abs() < 1e-15);
        }
        assert!(cf_select(&[]).is_err());
    }

    #[test]
    fn half_shifted_chain_closed_form() {
        // [ia, ia+2a) for i < k: all kept; counts are 1 on the two ends and 2 in between.
        let (a, k) = (3i64, 6i64);
        let rects: Vec<Rect> = (0..k).map(|i| t_interval(i * a, i * a + 2 * a)).collect();
        let (s, r) = cover(&rects, &[1.5, 2.0, 3.0]).unwrap();
        assert_eq!(s.selected().len(), k as usize);
        let window = Rect::new(vec![0, 0, 0], vec![2, 2, (k + 1) * a]).unwrap();
        let counts = overlap_field(&rects, &window).unwrap();
        for &(p, got) in &r.estimates.est2_ratios {
            let closed = ((2.0 + 2f64.powf(p) * (k - 1) as f64) / (k + 1) as f64).powf(1.0 / p);
            let dense = (counts.lp_norm(p).unwrap().powf(p) / window.volume() as f64).powf(1.0 / p);
            assert!((got - closed).abs() < 1e-13 * closed);
            assert!((dense - closed).abs() < 1e-13 * closed);
        }
    }

    #[test]
    fn overlap_field_matches_rasterization() {
        let mut rng = FieldRng::new(71);
        let rects = random_family(&mut rng, 3, 10, 12, 6);
        let w = Rect::cube(3, 0, 10).unwrap();
        let f = overlap_field(&rects, &w).unwrap();
        for p in w.cells() {
            assert_eq!(f.get(&p), rects.iter().filter(|r| r.contains(&p)).count() as f64);
        }
        let small = Rect::cube(3, 0, 2).unwrap();
        assert!(matches!(overlap_field(&rects, &small), Err(Error::WindowTooSmall)));
    }

    #[test]
    fn random_families_satisfy_every_check() {
        let mut rng = FieldRng::new(72);
        for _ in 0..20 {
            let rects = random_family(&mut rng, 3, 16, 24, 10);
            let s = cf_select(&rects).unwrap();
            let mut kept = Vec::new();
            for (r, a) in rects.iter().zip(s.audit()) {
                assert_eq!(a.overlap_volume_at_decision, dense_overlap(r, &kept));
                if a.decision == Decision::Selected {
                    kept.push(r.clone());
                }
            }
            let v = verify_selection(&rects, &s).unwrap();
            assert!(v.all_ok(), "{v:?}");
            let e = est_ratios(&rects, &s, &[2.0]).unwrap();
            assert!(e.est1_ratio >= 1.0 && e.est2_ratios[0].1 >= 1.0);
        }
    }

    #[test]
    fn half_bound_against_exact_maximal() {
        let mut rng = FieldRng::new(73);
        for _ in 0..3 {
            let rects = random_family(&mut rng, 3, 8, 10, 5);
            let s = cf_select(&rects).unwrap();
            let w = Rect::cube(3, 0, 8).unwrap();
            let chi = overlap_field(&s.selected_rects(), &w)
                .unwrap()
                .scaled(1.0)
                .values()
                .iter()
                .map(|&c| if c > 0.0 { 1.0 } else { 0.0 })
                .collect();
            let chi = ScalarField::new(w.clone(), chi).unwrap();
            for p in w.cells().filter(|p| rects.iter().any(|r| r.contains(p))) {
                assert!(maximal_exact_at(&chi, Alpha::ZERO, &p) > 0.5);
            }
        }
    }

    #[test]
    fn decisions_are_prefix_stable() {
        let mut rng = FieldRng::new(74);
        let rects = random_family(&mut rng, 3, 12, 30, 8);
        let full = cf_select(&rects).unwrap();
        for cut in [1, 7, 15, 29] {
            let part = cf_select(&rects[..cut]).unwrap();
            assert_eq!(part.audit(), &full.audit()[..cut]);
        }
    }

    #[test]
    fn orders_parse_and_apply() {
        let rects = vec![Rect::cube(3, 0, 1).unwrap(), Rect::cube(3, 0, 3).unwrap(), Rect::cube(3, 0, 2).unwrap()];
        let o: Order = "voldesc".parse().unwrap();
        let vols: Vec<u128> = o.apply(&rects).iter().map(Rect::volume).collect();
        assert_eq!(vols, vec![27, 8, 1]);
        assert_eq!("shuffle:9".parse::<Order>().unwrap(), Order::Shuffle(9));
        assert_eq!(Order::Shuffle(9).apply(&rects), Order::Shuffle(9).apply(&rects));
        assert!("bogus".parse::<Order>().is_err());
    }
}
