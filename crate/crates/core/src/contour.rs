//! Marching-squares zero contours on a rectangular grid, with Newton refinement of vertices.

use std::collections::{BTreeMap, BTreeSet};

use crate::web::GridSpec;

/// Edge of the grid: horizontal `(0, i, j)` joins nodes `(i,j)`–`(i+1,j)`, vertical `(1, i, j)`
/// joins `(i,j)`–`(i,j+1)`.
type EdgeKey = (u8, usize, usize);

/// Zero contours of the sampled field `values` (row-major, `j` outer). Nodes with `None` are
/// skipped along with every cell touching them. Zero counts as positive.
pub(crate) fn zero_contours(grid: &GridSpec, values: &[Option<f64>]) -> Vec<Vec<[f64; 2]>> {
    let nx = grid.nx;
    let at = |i: usize, j: usize| values[j * nx + i];
    let point = |key: EdgeKey| -> [f64; 2] {
        let (kind, i, j) = key;
        let (i2, j2) = if kind == 0 { (i + 1, j) } else { (i, j + 1) };
        let (va, vb) = (at(i, j).unwrap_or(0.0), at(i2, j2).unwrap_or(0.0));
        let t = if va == vb {
            0.5
        } else {
            (va / (va - vb)).clamp(0.0, 1.0)
        };
        let (xa, ya, xb, yb) = (grid.x(i), grid.y(j), grid.x(i2), grid.y(j2));
        [xa + t * (xb - xa), ya + t * (yb - ya)]
    };

    let mut links: BTreeMap<EdgeKey, Vec<EdgeKey>> = BTreeMap::new();
    let mut link = |a: EdgeKey, b: EdgeKey| {
        links.entry(a).or_default().push(b);
        links.entry(b).or_default().push(a);
    };
    for j in 0..grid.ny - 1 {
        for i in 0..nx - 1 {
            let (Some(v0), Some(v1), Some(v2), Some(v3)) =
                (at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1))
            else {
                continue;
            };
            let s = [v0 >= 0.0, v1 >= 0.0, v2 >= 0.0, v3 >= 0.0];
            // bottom, right, top, left
            let edges: [EdgeKey; 4] = [(0, i, j), (1, i + 1, j), (0, i, j + 1), (1, i, j)];
            let cut = [s[0] != s[1], s[1] != s[2], s[3] != s[2], s[0] != s[3]];
            let hits: Vec<usize> = (0..4).filter(|&k| cut[k]).collect();
            match hits.len() {
                2 => link(edges[hits[0]], edges[hits[1]]),
                4 => {
                    let centre = 0.25 * (v0 + v1 + v2 + v3) >= 0.0;
                    if centre == s[0] {
                        link(edges[0], edges[1]);
                        link(edges[2], edges[3]);
                    } else {
                        link(edges[3], edges[0]);
                        link(edges[1], edges[2]);
                    }
                }
                _ => {}
            }
        }
    }

    let mut used: BTreeSet<(EdgeKey, EdgeKey)> = BTreeSet::new();
    let pair = |a: EdgeKey, b: EdgeKey| if a <= b { (a, b) } else { (b, a) };
    let walk = |start: EdgeKey, used: &mut BTreeSet<(EdgeKey, EdgeKey)>| -> Option<Vec<[f64; 2]>> {
        let mut keys = vec![start];
        let mut cur = start;
        loop {
            let next = links[&cur]
                .iter()
                .copied()
                .find(|&n| !used.contains(&pair(cur, n)));
            let Some(n) = next else { break };
            used.insert(pair(cur, n));
            keys.push(n);
            cur = n;
            if n == start {
                break;
            }
        }
        (keys.len() > 1).then(|| keys.into_iter().map(point).collect())
    };

    let mut out = Vec::new();
    // open chains start at degree-one edges, closed loops anywhere
    let starts: Vec<EdgeKey> = links
        .iter()
        .filter(|(_, v)| v.len() == 1)
        .map(|(k, _)| *k)
        .collect();
    for s in starts {
        if let Some(line) = walk(s, &mut used) {
            out.push(line);
        }
    }
    let all: Vec<EdgeKey> = links.keys().copied().collect();
    for s in all {
        if let Some(line) = walk(s, &mut used) {
            out.push(line);
        }
    }
    out
}

/// Value, gradient and tolerance scale of a field at a point.
pub(crate) struct FieldSample {
    pub v: f64,
    pub gx: f64,
    pub gy: f64,
    pub scale: f64,
}

/// Moves `start` onto the zero set along the gradient. Returns the best point found, which is
/// never farther than `max_move` from `start`, and whether `|v| < tol·scale` was reached.
pub(crate) fn refine_zero(
    start: [f64; 2],
    tol: f64,
    max_move: f64,
    field: impl Fn(f64, f64) -> Option<FieldSample>,
) -> ([f64; 2], bool) {
    let mut best = start;
    let Some(mut s) = field(start[0], start[1]) else {
        return (start, false);
    };
    let mut best_v = s.v.abs();
    let mut p = start;
    for _ in 0..40 {
        if s.v.abs() < tol * s.scale {
            return (p, true);
        }
        let g2 = s.gx * s.gx + s.gy * s.gy;
        if g2 == 0.0 || !g2.is_finite() {
            break;
        }
        let q = [p[0] - s.v * s.gx / g2, p[1] - s.v * s.gy / g2];
        if (q[0] - start[0]).hypot(q[1] - start[1]) > max_move {
            break;
        }
        let Some(next) = field(q[0], q[1]) else { break };
        p = q;
        s = next;
        if s.v.abs() < best_v {
            best_v = s.v.abs();
            best = p;
        }
    }
    let ok = field(best[0], best[1]).is_some_and(|s| s.v.abs() < tol * s.scale);
    (best, ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::web::DomainBox;

    #[test]
    fn circle_is_one_closed_loop() {
        let g = GridSpec::square(21, DomainBox::symmetric(1.0)).unwrap();
        let vals: Vec<Option<f64>> = g
            .nodes()
            .map(|(_, _, x, y)| Some(0.25 - x * x - y * y))
            .collect();
        let lines = zero_contours(&g, &vals);
        assert_eq!(lines.len(), 1);
        let l = &lines[0];
        assert_eq!(l.first(), l.last());
        for p in l {
            assert!((p[0].hypot(p[1]) - 0.5).abs() < 0.02, "{p:?}");
        }
    }

    #[test]
    fn line_is_open_and_refines() {
        let g = GridSpec::square(16, DomainBox::symmetric(1.0)).unwrap();
        let f = |x: f64, y: f64| y - 0.3 * x * x - 0.1;
        let vals: Vec<Option<f64>> = g.nodes().map(|(_, _, x, y)| Some(f(x, y))).collect();
        let lines = zero_contours(&g, &vals);
        assert_eq!(lines.len(), 1);
        assert!(lines[0].len() >= 16);
        for p in &lines[0] {
            let (q, ok) = refine_zero(*p, 1e-12, 0.2, |x, y| {
                Some(FieldSample {
                    v: f(x, y),
                    gx: -0.6 * x,
                    gy: 1.0,
                    scale: 1.0,
                })
            });
            assert!(ok && f(q[0], q[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn no_sign_change_no_contour() {
        let g = GridSpec::square(16, DomainBox::symmetric(1.0)).unwrap();
        let vals: Vec<Option<f64>> = g.nodes().map(|_| Some(-1.0)).collect();
        assert!(zero_contours(&g, &vals).is_empty());
    }
}
