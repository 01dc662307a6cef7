use std::collections::HashSet;

use foodscape::geo::{LocalFrame, PlanarPoint};
use foodscape::kde::{
    extract_hotspots, gaussian_kernel_1d, jitter_duplicates, kde_at, rasterize, select_bandwidth,
    Bandwidth, DUPLICATE_JITTER_M,
};
use proptest::prelude::*;

fn frame() -> LocalFrame {
    LocalFrame::centered_at(40.73, -73.99)
}

#[test]
fn kernel_values() {
    assert!((gaussian_kernel_1d(0.0) - 0.398_942_280_4).abs() < 1e-10);
    assert!((gaussian_kernel_1d(1.0) - 0.241_970_724_5).abs() < 1e-10);
    assert_eq!(gaussian_kernel_1d(2.5), gaussian_kernel_1d(-2.5));

    let h = Bandwidth::new(100.0).unwrap();
    let origin = PlanarPoint::new(0.0, 0.0);
    let peak = kde_at(&[origin], h, origin).unwrap();
    assert!((peak - 1.5915e-5).abs() < 1e-9);
    let at_h = kde_at(&[origin], h, PlanarPoint::new(60.0, 80.0)).unwrap();
    assert!((at_h - 9.653e-6).abs() < 1e-9);
}

#[test]
fn kernel_integrates_to_one() {
    // Composite Simpson over [-8h, 8h]² on the surface of a single point.
    let h = Bandwidth::new(37.0).unwrap();
    let origin = PlanarPoint::new(0.0, 0.0);
    let n = 400;
    let a = -8.0 * h.meters();
    let step = 16.0 * h.meters() / n as f64;
    let weight = |i: usize| match i {
        0 => 1.0,
        i if i == n => 1.0,
        i if i % 2 == 1 => 4.0,
        _ => 2.0,
    };
    let mut total = 0.0;
    for i in 0..=n {
        for j in 0..=n {
            let q = PlanarPoint::new(a + i as f64 * step, a + j as f64 * step);
            total += weight(i) * weight(j) * kde_at(&[origin], h, q).unwrap();
        }
    }
    total *= step * step / 9.0;
    assert!((total - 1.0).abs() < 1e-6, "integral {total}");
}

#[test]
fn symmetric_clusters_peak_at_their_centers() {
    let centers = [PlanarPoint::new(0.0, 0.0), PlanarPoint::new(2000.0, 0.0)];
    let mut pts = Vec::new();
    for c in centers {
        pts.push(c);
        for r in [40.0, 80.0] {
            for (dx, dy) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
                pts.push(PlanarPoint::new(c.x + r * dx, c.y + r * dy));
            }
        }
    }
    let field = rasterize(&pts, Bandwidth::new(150.0).unwrap(), frame(), 25.0).unwrap();
    for c in centers {
        let best = (0..field.values.len())
            .filter(|&i| field.cell_center(i).distance(&c) < 1000.0)
            .max_by(|&a, &b| field.values[a].total_cmp(&field.values[b]))
            .unwrap();
        assert!(
            field.cell_center(best).distance(&c) <= field.cell_size * 2f64.sqrt(),
            "peak off center"
        );
    }
}

fn sample() -> impl Strategy<Value = Vec<PlanarPoint>> {
    prop::collection::vec((-800.0f64..800.0, -800.0f64..800.0), 2..40)
        .prop_map(|v| v.into_iter().map(|(x, y)| PlanarPoint::new(x, y)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn wide_bandwidth_flattens_the_surface(pts in sample()) {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for p in &pts {
            x0 = x0.min(p.x); x1 = x1.max(p.x); y0 = y0.min(p.y); y1 = y1.max(p.y);
        }
        let diameter = pts.iter().flat_map(|a| pts.iter().map(move |b| a.distance(b))).fold(0.0, f64::max);
        prop_assume!(diameter > 1.0);
        let h = Bandwidth::new(20.0 * diameter).unwrap();
        let mut values = Vec::new();
        for i in 0..=10 {
            for j in 0..=10 {
                let q = PlanarPoint::new(x0 + (x1 - x0) * i as f64 / 10.0, y0 + (y1 - y0) * j as f64 / 10.0);
                values.push(kde_at(&pts, h, q).unwrap());
            }
        }
        let max = values.iter().copied().fold(f64::MIN, f64::max);
        let min = values.iter().copied().fold(f64::MAX, f64::min);
        prop_assert!(max / min < 1.05, "ratio {}", max / min);
    }

    #[test]
    fn jittered_duplicates_give_finite_scores(pts in sample(), copies in 1usize..6, seed in any::<u64>()) {
        // Venue-anchored posts: every location repeated.
        let mut all = Vec::new();
        for p in &pts {
            all.extend(std::iter::repeat_n(*p, copies + 1));
        }
        prop_assume!(all.len() >= 10);
        let keys: Vec<String> = (0..all.len()).map(|i| format!("post-{i}")).collect();
        let jittered = jitter_duplicates(&all, &keys, DUPLICATE_JITTER_M, seed);
        for (a, b) in all.iter().zip(&jittered) {
            prop_assert!(a.distance(b) <= DUPLICATE_JITTER_M);
        }
        let sel = select_bandwidth(&jittered, &Bandwidth::default_grid()).unwrap();
        prop_assert!(sel.scores.iter().all(|s| s.is_finite()));
    }

    #[test]
    fn hotspots_are_sound_and_maximal(pts in sample(), q in 0.5f64..0.99) {
        let field = rasterize(&pts, Bandwidth::new(120.0).unwrap(), frame(), 40.0).unwrap();
        let spots = extract_hotspots(&field, q).unwrap();
        prop_assert!(!spots.is_empty());
        let threshold = spots[0].threshold;
        let mut owner = vec![usize::MAX; field.values.len()];
        for (k, s) in spots.iter().enumerate() {
            prop_assert_eq!(s.rank, k + 1);
            for &c in &s.member_cells {
                prop_assert!(field.values[c] >= threshold);
                prop_assert_eq!(owner[c], usize::MAX, "cell in two components");
                owner[c] = k;
            }
        }
        for w in spots.windows(2) {
            prop_assert!(w[0].peak_density >= w[1].peak_density);
        }
        let (nx, ny) = (field.nx, field.ny);
        for idx in 0..field.values.len() {
            let above = field.values[idx] >= threshold;
            prop_assert_eq!(above, owner[idx] != usize::MAX);
            if !above {
                continue;
            }
            let (c, r) = (idx % nx, idx / nx);
            let mut neighbours = HashSet::new();
            if c > 0 { neighbours.insert(idx - 1); }
            if c + 1 < nx { neighbours.insert(idx + 1); }
            if r > 0 { neighbours.insert(idx - nx); }
            if r + 1 < ny { neighbours.insert(idx + nx); }
            for nb in neighbours {
                if field.values[nb] >= threshold {
                    prop_assert_eq!(owner[nb], owner[idx], "adjacent cells split");
                }
            }
        }
    }
}
