//! The ordered Fisher check and inseparable-pair counters.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{domain, Result};

/// α(x−c, x−c) ≤ (x−c, y−c). Every counter funnels through this so the
/// fast and naive paths agree bit for bit.
#[inline]
pub(crate) fn inseparable_raw(x: &[f64], y: &[f64], alpha: f64, c: &[f64]) -> bool {
    let (mut xx, mut xy) = (0.0, 0.0);
    for k in 0..x.len() {
        let a = x[k] - c[k];
        let b = y[k] - c[k];
        xx += a * a;
        xy += a * b;
    }
    alpha * xx <= xy
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return domain(format!("alpha must be in (0,1], got {alpha}"));
    }
    Ok(())
}

/// True when x is not separated from y by the hyperplane through x
/// orthogonal to x − c. Ties count as inseparable, so x = c gives true.
pub fn is_inseparable_ordered(x: &[f64], y: &[f64], alpha: f64, c: &[f64]) -> Result<bool> {
    if x.len() != y.len() || x.len() != c.len() {
        return domain(format!("dimension mismatch: x {}, y {}, c {}", x.len(), y.len(), c.len()));
    }
    check_alpha(alpha)?;
    Ok(inseparable_raw(x, y, alpha, c))
}

fn check_flat(points: &[f64], n: usize, c: &[f64]) -> Result<usize> {
    if n == 0 || !points.len().is_multiple_of(n) {
        return domain(format!("{} values do not form points of dimension {n}", points.len()));
    }
    if c.len() != n {
        return domain(format!("centre has dimension {}, expected {n}", c.len()));
    }
    let m = points.len() / n;
    if m < 2 {
        return domain("need at least two points");
    }
    if points.iter().any(|v| !v.is_finite()) {
        return domain("points must be finite");
    }
    Ok(m)
}

fn sum_rows(m: usize, row: impl Fn(usize) -> u64 + Sync + Send) -> u64 {
    #[cfg(feature = "parallel")]
    {
        (0..m).into_par_iter().map(row).sum()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..m).map(row).sum()
    }
}

/// Ordered pairs (x, y), x ≠ y by index, that fail the check. O(M²).
pub fn count_inseparable_pairs(points: &[Vec<f64>], alpha: f64, c: &[f64]) -> Result<u64> {
    let n = c.len();
    if points.iter().any(|p| p.len() != n) {
        return domain("all points must have the centre's dimension");
    }
    let flat: Vec<f64> = points.iter().flatten().copied().collect();
    count_inseparable_pairs_flat(&flat, n, alpha, c)
}

/// Naive counter over a row-major buffer.
pub fn count_inseparable_pairs_flat(points: &[f64], n: usize, alpha: f64, c: &[f64]) -> Result<u64> {
    check_alpha(alpha)?;
    let m = check_flat(points, n, c)?;
    let pt = |i: usize| &points[i * n..(i + 1) * n];
    Ok(sum_rows(m, |i| (0..m).filter(|&j| j != i && inseparable_raw(pt(i), pt(j), alpha, c)).count() as u64))
}

/// Perturbed-model counter: the pair (i, j) is checked with centre equal to
/// the base point of i.
pub fn count_inseparable_pairs_perturbed(points: &[f64], bases: &[Vec<f64>], n: usize, alpha: f64) -> Result<u64> {
    check_alpha(alpha)?;
    let m = check_flat(points, n, &vec![0.0; n])?;
    if bases.len() < m || bases.iter().take(m).any(|b| b.len() != n) {
        return domain(format!("need {m} base points of dimension {n}"));
    }
    let pt = |i: usize| &points[i * n..(i + 1) * n];
    Ok(sum_rows(m, |i| (0..m).filter(|&j| j != i && inseparable_raw(pt(i), pt(j), alpha, &bases[i])).count() as u64))
}

const PAD: usize = 16;
/// Quantization scale: coordinates of magnitude ≤ 1 map to i8 in [−127, 127].
const Q: f64 = 127.0;

/// Coordinates quantized individually; the rest enter the filter through a
/// Cauchy–Schwarz bound on their norm.
const HEAD: usize = 16;

/// Filter data. Points are centred, sorted by norm and scaled to max norm 1.
/// The first HEAD coordinates are rounded to i8, four per i32, column-major;
/// one more group carries the rounded-up tail norm.
struct Prepared {
    m: usize,
    groups: usize,
    stride: usize,
    order: Vec<u32>,
    /// Signed bytes of each point, the column side of the product.
    cols: Vec<i32>,
    /// Unsigned bytes, the row side: head coordinates offset by 128.
    rows: Vec<i32>,
    /// Per-column start value: rounding allowance minus the offset correction.
    col0: Vec<i32>,
    thr: Vec<i32>,
}

fn pack(bytes: &[u8]) -> i32 {
    i32::from_le_bytes([bytes[0], bytes[1], bytes[2], bytes[3]])
}

/// Split u = (h, t) into head and tail. With h = (a + e)/Q, h' = (b + f)/Q,
/// |e|, |f| ≤ ½ coordinatewise, and T ≥ Q‖t‖ integers,
/// Q²(u, u') ≤ (a, b) + ½‖a‖₁ + ½‖b‖₁ + H/4 + T·T'.
/// So α‖u‖² ≤ (u, u') implies
/// (a, b) + ½‖b‖₁ + T·T' ≥ Q²α‖u‖² − ½‖a‖₁ − H/4, which the filter tests
/// with the right side rounded down and the left rounded up.
fn prepare(points: &[f64], n: usize, m: usize, alpha: f64, c: &[f64]) -> Prepared {
    let mut q = vec![0.0f64; m];
    for (i, qi) in q.iter_mut().enumerate() {
        *qi = points[i * n..(i + 1) * n].iter().zip(c).map(|(x, ck)| (x - ck) * (x - ck)).sum();
    }
    let mut order: Vec<u32> = (0..m as u32).collect();
    order.sort_by(|&a, &b| q[a as usize].total_cmp(&q[b as usize]));
    let max_q = q.iter().copied().fold(0.0, f64::max);
    let scale = if max_q > 0.0 { 1.0 / max_q.sqrt() } else { 1.0 };
    let head = n.min(HEAD);
    let head_groups = head.div_ceil(4);
    let groups = head_groups + usize::from(n > head);
    let stride = m + PAD;
    let mut cols = vec![0i32; groups * stride];
    let mut rows = vec![pack(&[128; 4]); groups * stride];
    let mut col0 = vec![0i32; stride];
    let mut thr = vec![0i32; m];
    let mut signed = vec![0u8; groups * 4];
    let mut unsigned = vec![128u8; groups * 4];
    for (r, &i) in order.iter().enumerate() {
        let i = i as usize;
        let p = &points[i * n..(i + 1) * n];
        let (mut l1, mut sum, mut tail2) = (0i64, 0i64, 0.0f64);
        for k in 0..n {
            let u = (p[k] - c[k]) * scale;
            if k < head {
                let a = (u * Q).round().clamp(-Q, Q) as i32;
                signed[k] = a as i8 as u8;
                unsigned[k] = (a + 128) as u8;
                l1 += a.abs() as i64;
                sum += a as i64;
            } else {
                tail2 += u * u;
            }
        }
        if n > head {
            // The tail norm is at most 1; the small excess covers rounding.
            let t = (Q * tail2.sqrt() * (1.0 + 1e-12)).ceil().min(Q) as u8;
            let k = 4 * head_groups;
            signed[k..k + 4].copy_from_slice(&[t, 0, 0, 0]);
            unsigned[k..k + 4].copy_from_slice(&[t, 0, 0, 0]);
        }
        for g in 0..groups {
            cols[g * stride + r] = pack(&signed[4 * g..4 * g + 4]);
            rows[g * stride + r] = pack(&unsigned[4 * g..4 * g + 4]);
        }
        col0[r] = ((l1 + 1) / 2 - 128 * sum) as i32;
        // One extra unit absorbs rounding in q and in the f64 re-check.
        let bound = Q * Q * alpha * q[i] * scale * scale - 0.5 * l1 as f64 - 0.25 * head as f64 - 1.0;
        thr[r] = bound.floor().max(i32::MIN as f64) as i32;
    }
    Prepared { m, groups, stride, order, cols, rows, col0, thr }
}

#[inline]
fn dot4(row: i32, col: i32) -> i32 {
    let (a, b) = (row.to_le_bytes(), col.to_le_bytes());
    (0..4).map(|k| a[k] as i32 * b[k] as i8 as i32).sum()
}

/// Scans rows r0..r1 against columns j0..j1, pushing (r, j) for every j > r
/// that passes the filter for row r.
type TileScan = unsafe fn(&Prepared, usize, usize, usize, usize, &mut Vec<(u32, u32)>);

/// Rows per work item and columns per tile; a column tile stays in L1 while
/// the whole row block passes over it.
const ROW_BLOCK: usize = 64;
const COL_TILE: usize = 512;

fn scan_tile_portable(p: &Prepared, r0: usize, r1: usize, j0: usize, j1: usize, out: &mut Vec<(u32, u32)>) {
    for r in r0..r1 {
        for j in j0.max(r + 1)..j1 {
            let mut acc = p.col0[j];
            for g in 0..p.groups {
                acc += dot4(p.rows[g * p.stride + r], p.cols[g * p.stride + j]);
            }
            if acc >= p.thr[r] {
                out.push((r as u32, j as u32));
            }
        }
    }
}

/// Lanes of the 16-wide vector starting at column `js` that lie in (r, j1).
#[inline]
fn lane_mask(js: usize, r: usize, j1: usize) -> u32 {
    let mut mask = 0xffff;
    let left = j1 - js;
    if left < 16 {
        mask &= (1u32 << left) - 1;
    }
    if r >= js {
        let skip = r - js + 1;
        mask &= if skip >= 16 { 0 } else { 0xffff << skip & 0xffff };
    }
    mask
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx512f,avx512vnni")]
unsafe fn scan_tile_vnni(p: &Prepared, r0: usize, r1: usize, j0: usize, j1: usize, out: &mut Vec<(u32, u32)>) {
    use std::arch::x86_64::*;
    const ROWS: usize = 4;
    let cols = p.cols.as_ptr();
    let rows = p.rows.as_ptr();
    let col0 = p.col0.as_ptr();
    let mut ra = r0;
    while ra < r1 {
        let live = ROWS.min(r1 - ra);
        // Columns up to ra lie below the diagonal for every row in the group.
        let mut js = j0.max(ra + 1);
        if js >= j1 {
            break;
        }
        let mut thr = [_mm512_set1_epi32(i32::MAX); ROWS];
        for (q, t) in thr.iter_mut().enumerate().take(live) {
            *t = _mm512_set1_epi32(p.thr[ra + q]);
        }
        while js < j1 {
            // SAFETY: every column array is padded by PAD = 16 entries past
            // m ≥ j1, and rows ra..ra + 4 stay inside that padding.
            let start = _mm512_loadu_si512(col0.add(js) as *const _);
            let mut acc = [start; ROWS];
            for g in 0..p.groups {
                let col = _mm512_loadu_si512(cols.add(g * p.stride + js) as *const _);
                for (q, a) in acc.iter_mut().enumerate() {
                    let row = _mm512_set1_epi32(*rows.add(g * p.stride + ra + q));
                    *a = _mm512_dpbusd_epi32(*a, row, col);
                }
            }
            for q in 0..live {
                let mut hits = _mm512_cmpge_epi32_mask(acc[q], thr[q]) as u32 & lane_mask(js, ra + q, j1);
                while hits != 0 {
                    out.push(((ra + q) as u32, (js + hits.trailing_zeros() as usize) as u32));
                    hits &= hits - 1;
                }
            }
            js += 16;
        }
        ra += ROWS;
    }
}

/// Tile kernels available on this machine, fastest first. All of them
/// produce the same candidate set.
fn kernels() -> Vec<(&'static str, TileScan)> {
    let mut ks: Vec<(&'static str, TileScan)> = Vec::new();
    #[cfg(target_arch = "x86_64")]
    {
        if is_x86_feature_detected!("avx512f") && is_x86_feature_detected!("avx512vnni") {
            ks.push(("avx512vnni", scan_tile_vnni));
        }
    }
    ks.push(("portable", scan_tile_portable));
    ks
}

fn count_prepared(points: &[f64], n: usize, alpha: f64, c: &[f64], p: &Prepared, scan: TileScan) -> u64 {
    let pt = |i: u32| &points[i as usize * n..(i as usize + 1) * n];
    let block = |buf: &mut Vec<(u32, u32)>, b: usize| -> u64 {
        let (r0, r1) = (b * ROW_BLOCK, ((b + 1) * ROW_BLOCK).min(p.m));
        buf.clear();
        let mut j0 = r0 + 1;
        while j0 < p.m {
            let j1 = (j0 + COL_TILE).min(p.m);
            // SAFETY: `scan` comes from `kernels()`, which only offers
            // kernels whose target features were detected at runtime.
            unsafe { scan(p, r0, r1, j0, j1, buf) };
            j0 = j1;
        }
        // The filter tests the order starting at the smaller norm, which is
        // implied by the other order, so both are re-checked here.
        let mut hits = 0;
        for &(r, j) in buf.iter() {
            let (a, b) = (p.order[r as usize], p.order[j as usize]);
            hits += inseparable_raw(pt(a), pt(b), alpha, c) as u64;
            hits += inseparable_raw(pt(b), pt(a), alpha, c) as u64;
        }
        hits
    };
    let blocks = p.m.div_ceil(ROW_BLOCK);
    #[cfg(feature = "parallel")]
    {
        (0..blocks).into_par_iter().map_init(Vec::new, |buf, b| block(buf, b)).sum()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let mut buf = Vec::new();
        (0..blocks).map(|b| block(&mut buf, b)).sum()
    }
}

/// Same count as [`count_inseparable_pairs_flat`]. An integer filter with a
/// rigorous rounding allowance discards almost every pair; the rest are
/// re-checked in f64 with the naive routine.
pub fn count_inseparable_pairs_fast(points: &[f64], n: usize, alpha: f64, c: &[f64]) -> Result<u64> {
    check_alpha(alpha)?;
    let m = check_flat(points, n, c)?;
    if m < 64 {
        return count_inseparable_pairs_flat(points, n, alpha, c);
    }
    let p = prepare(points, n, m, alpha, c);
    Ok(count_prepared(points, n, alpha, c, &p, kernels()[0].1))
}

/// Counts with every available kernel; used to cross-check them.
#[doc(hidden)]
pub fn count_with_each_kernel(points: &[f64], n: usize, alpha: f64, c: &[f64]) -> Result<Vec<(&'static str, u64)>> {
    check_alpha(alpha)?;
    let m = check_flat(points, n, c)?;
    let p = prepare(points, n, m, alpha, c);
    Ok(kernels().into_iter().map(|(name, k)| (name, count_prepared(points, n, alpha, c, &p, k))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::{DistributionSpec, McRng, Sampler};
    use rand::SeedableRng;

    #[test]
    fn basic_cases() {
        assert!(!is_inseparable_ordered(&[1.0, 0.0], &[0.0, 1.0], 1.0, &[0.0, 0.0]).unwrap());
        assert!(is_inseparable_ordered(&[0.3, 0.4], &[0.3, 0.4], 1.0, &[0.0, 0.0]).unwrap());
        assert!(is_inseparable_ordered(&[0.0, 0.0], &[1.0, 0.0], 0.5, &[0.0, 0.0]).unwrap());
        assert!(is_inseparable_ordered(&[1.0], &[1.0, 2.0], 1.0, &[0.0]).is_err());
        let basis: Vec<Vec<f64>> = (0..5).map(|i| (0..5).map(|k| if k == i { 1.0 } else { 0.0 }).collect()).collect();
        assert_eq!(count_inseparable_pairs(&basis, 1.0, &[0.0; 5]).unwrap(), 0);
        let same = vec![vec![0.2, -0.7, 0.1]; 7];
        assert_eq!(count_inseparable_pairs(&same, 1.0, &[0.0; 3]).unwrap(), 42);
    }

    fn ball_set(n: usize, m: usize, seed: u64) -> Vec<f64> {
        let s = Sampler::new(&DistributionSpec::UniformBall, n).unwrap();
        let mut rng = McRng::seed_from_u64(seed);
        let mut buf = Vec::new();
        s.fill_set(&mut rng, m, &mut buf).unwrap();
        buf
    }

    #[test]
    fn fast_matches_naive() {
        for (n, m, alpha) in [(3usize, 700usize, 1.0), (8, 500, 0.6), (20, 400, 0.3), (30, 600, 0.8), (12, 300, 1.0)] {
            let pts = ball_set(n, m, n as u64);
            let c = vec![0.0; n];
            let naive = count_inseparable_pairs_flat(&pts, n, alpha, &c).unwrap();
            for (name, v) in count_with_each_kernel(&pts, n, alpha, &c).unwrap() {
                assert_eq!(v, naive, "{name} n={n} alpha={alpha}");
            }
            assert!(naive > 0 || n >= 20);
        }
    }

    #[test]
    fn fast_handles_duplicates_and_offsets() {
        let n = 16;
        let mut pts = ball_set(n, 200, 9);
        let first: Vec<f64> = pts[..n].to_vec();
        for _ in 0..5 {
            pts.extend_from_slice(&first);
        }
        for v in pts.iter_mut() {
            *v += 3.0;
        }
        let c = vec![3.0; n];
        let naive = count_inseparable_pairs_flat(&pts, n, 1.0, &c).unwrap();
        assert!(naive >= 30);
        for (name, v) in count_with_each_kernel(&pts, n, 1.0, &c).unwrap() {
            assert_eq!(v, naive, "{name}");
        }
    }
}
