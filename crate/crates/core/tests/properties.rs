use flatweb::catalog;
use flatweb::connection::{self, sigma_from_roots};
use flatweb::cubic::{monicize, solve_depressed, tschirnhausen_reduce, ReduceOptions, Roots};
use flatweb::expr::{Expr, Jet2};
use flatweb::hexagon::{hexagon_defect, HexagonOptions};
use flatweb::render::{render_svg, StyleSpec};
use flatweb::singular::{classify, ClassifyOptions, Verdict};
use flatweb::trace::{trace_web, SeedSpec};
use flatweb::web::{DomainBox, GridSpec, WebSource};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn catalog_exprs() -> Vec<(String, Expr, DomainBox)> {
    let mut out = Vec::new();
    for id in catalog::IDS {
        let e = catalog::get(id).unwrap();
        let d = e.spec.domain;
        let named: Vec<(&str, &Expr)> = match &e.spec.source {
            WebSource::Depressed(w) => vec![("A", &w.a), ("B", &w.b)],
            WebSource::GeneralCubic(w) => {
                vec![("K3", &w.k3), ("K2", &w.k2), ("K1", &w.k1), ("K0", &w.k0)]
            }
            WebSource::QuadraticPlusVertical(w) => vec![("a", &w.a), ("b", &w.b)],
        };
        for (n, x) in named {
            out.push((format!("{id}.{n}"), x.clone(), d));
        }
    }
    out
}

fn close(got: f64, want: f64, rel: f64) -> bool {
    (got - want).abs() <= rel * want.abs().max(1.0)
}

#[test]
fn jets_match_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let h = 1e-5;
    for (name, e, d) in catalog_exprs() {
        let mut n = 0;
        while n < 100 {
            let (x, y) = (
                rng.gen_range(d.xmin + 2.0 * h..d.xmax - 2.0 * h),
                rng.gen_range(d.ymin + 2.0 * h..d.ymax - 2.0 * h),
            );
            let at = |x: f64, y: f64| e.eval_jet2(x, y);
            let Ok(j) = at(x, y) else { continue };
            // fourth-order central stencil: the tan pole of hom-tan defeats the two-point one
            let (mut dx, mut dy) = (Jet2::default(), Jet2::default());
            let mut ok = true;
            for (k, c) in [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)] {
                let w = c / (12.0 * h);
                match (at(x + k * h, y), at(x, y + k * h)) {
                    (Ok(sx), Ok(sy)) => {
                        dx.v += w * sx.v;
                        dx.vx += w * sx.vx;
                        dy.v += w * sy.v;
                        dy.vx += w * sy.vx;
                        dy.vy += w * sy.vy;
                    }
                    _ => ok = false,
                }
            }
            if !ok {
                continue;
            }
            let fd = [
                (j.vx, dx.v),
                (j.vy, dy.v),
                (j.vxx, dx.vx),
                (j.vxy, dy.vx),
                (j.vyy, dy.vy),
            ];
            for (k, (got, want)) in fd.into_iter().enumerate() {
                assert!(
                    close(got, want, 1e-6),
                    "{name} at ({x}, {y}), partial {k}: jet {got} vs {want}"
                );
            }
            n += 1;
        }
    }
}

fn ulps_close(got: f64, want: f64) -> bool {
    (got - want).abs() <= 4.0 * f64::EPSILON * want.abs()
}

proptest! {
    #[test]
    fn monomial_jets_are_exact(x in -3.0f64..3.0, y in -3.0f64..3.0, i in 0i32..=4, j in 0i32..=4) {
        prop_assume!(i + j <= 4);
        let jet = Expr::parse(&format!("x^{i}*y^{j}")).unwrap().eval_jet2(x, y).unwrap();
        let m = |a: i32, b: i32, c: f64| if a < 0 || b < 0 { 0.0 } else { c * x.powi(a) * y.powi(b) };
        let (fi, fj) = (i as f64, j as f64);
        let want = Jet2 {
            v: m(i, j, 1.0),
            vx: m(i - 1, j, fi),
            vy: m(i, j - 1, fj),
            vxx: m(i - 2, j, fi * (fi - 1.0)),
            vxy: m(i - 1, j - 1, fi * fj),
            vyy: m(i, j - 2, fj * (fj - 1.0)),
        };
        for (g, w) in [(jet.v, want.v), (jet.vx, want.vx), (jet.vy, want.vy), (jet.vxx, want.vxx), (jet.vxy, want.vxy), (jet.vyy, want.vyy)] {
            prop_assert!(ulps_close(g, w), "{g} vs {w} for x^{i} y^{j}");
        }
    }

    #[test]
    fn printed_expressions_reparse(text in expr_text()) {
        let e = Expr::parse(&text).unwrap();
        let printed = e.to_string();
        let again = Expr::parse(&printed).unwrap();
        prop_assert_eq!(again.to_string(), printed.clone());
        for (x, y) in [(0.3, -0.7), (1.1, 0.4)] {
            match (e.eval(x, y), again.eval(x, y)) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a.to_bits(), b.to_bits(), "{} vs {}", text, printed),
                (Err(_), Err(_)) => {}
                other => prop_assert!(false, "{text} vs {printed}: {other:?}"),
            }
        }
    }

    #[test]
    fn root_order_only_permutes_sigma(p0 in -3.0f64..3.0, p1 in -3.0f64..3.0, perm in 0usize..6) {
        let roots = [p0, p1, -p0 - p1];
        let orders = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let o = orders[perm];
        let base = sigma_from_roots(roots);
        let moved = sigma_from_roots([roots[o[0]], roots[o[1]], roots[o[2]]]);
        for i in 0..3 {
            let b = base[o[i]];
            let m = moved[i];
            let tol = 1e-12 * (1.0 + b[0].abs() + b[1].abs());
            let same = (m[0] - b[0]).abs() <= tol && (m[1] - b[1]).abs() <= tol;
            let flipped = (m[0] + b[0]).abs() <= tol && (m[1] + b[1]).abs() <= tol;
            prop_assert!(same || flipped);
        }
        let sum = [0, 1].map(|k| moved.iter().map(|s| s[k]).sum::<f64>());
        prop_assert!(sum[0].abs() < 1e-12 * (1.0 + p0.abs() + p1.abs()).powi(2) && sum[1].abs() < 1e-12 * (1.0 + p0.abs() + p1.abs()).powi(2));
    }
}

fn expr_text() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("x".to_string()),
        Just("y".to_string()),
        Just("pi".to_string()),
        (0u32..20).prop_map(|n| format!("{n}")),
        (1u32..100).prop_map(|n| format!("{}.{}", n / 10, n % 10)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (
                inner.clone(),
                inner.clone(),
                prop::sample::select(vec!["+", "-", "*", "/"])
            )
                .prop_map(|(a, b, op)| format!("({a}){op}({b})")),
            (inner.clone(), 0u32..4).prop_map(|(a, n)| format!("({a})^{n}")),
            inner.clone().prop_map(|a| format!("-({a})")),
            (
                inner,
                prop::sample::select(vec!["sin", "cos", "exp", "tan"])
            )
                .prop_map(|(a, f)| format!("{f}({a})")),
        ]
    })
}

#[test]
fn curvature_matches_curl_of_gamma() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let h = 1e-5;
    for id in ["nf1", "nf3", "hom-tan", "hom-poly", "control-1"] {
        let e = catalog::get(id).unwrap();
        let WebSource::Depressed(w) = &e.spec.source else {
            unreachable!()
        };
        let d = e.spec.domain;
        let (mut n, mut tries) = (0, 0);
        while n < 30 && tries < 100_000 {
            tries += 1;
            let (x, y) = (
                rng.gen_range(d.xmin + h..d.xmax - h),
                rng.gen_range(d.ymin + h..d.ymax - h),
            );
            let Ok((a, b)) = w.coefficients(x, y) else {
                continue;
            };
            let Ok(k) = connection::curvature(w, x, y) else {
                continue;
            };
            // well inside the admissible set, so the stencil does not feel the discriminant
            if flatweb::cubic::delta(a, b).abs() < 1e-2 * (1.0 + a.abs().powi(3) + b * b) {
                continue;
            }
            let g = |x: f64, y: f64| connection::gamma(w, x, y);
            let (Ok(px), Ok(mx), Ok(py), Ok(my)) =
                (g(x + h, y), g(x - h, y), g(x, y + h), g(x, y - h))
            else {
                continue;
            };
            let curl = (px.gamma2 - mx.gamma2) / (2.0 * h) - (py.gamma1 - my.gamma1) / (2.0 * h);
            assert!(
                close(k.k, curl, 1e-6),
                "{id} at ({x}, {y}): K {} vs curl {curl}",
                k.k
            );
            n += 1;
        }
        assert_eq!(n, 30, "{id}: too few admissible points");
    }
}

#[test]
fn flat_triple_points_have_vanishing_bx_and_are_legendrian() {
    for id in catalog::IDS {
        let e = catalog::get(id).unwrap();
        if !e.expected.flat {
            continue;
        }
        let WebSource::Depressed(w) = &e.spec.source else {
            continue;
        };
        for pt in e
            .expected
            .singular_points
            .iter()
            .filter(|p| p.verdict == "TripleGeneric")
        {
            let (_, b) = w.jets(pt.x, pt.y).unwrap();
            assert!(b.vx.abs() < 1e-8, "{id}: B_x = {}", b.vx);
            let r = classify(w, pt.x, pt.y, &ClassifyOptions::default()).unwrap();
            assert_eq!(r.verdict, Verdict::TripleGeneric);
            let res = r.residuals.unwrap();
            assert_eq!((res.legendrian_g1, res.legendrian_g2), (0.0, 0.0), "{id}");
            assert!(
                res.r_system.iter().any(|v| v.abs() > 1e-8),
                "{id}: {:?}",
                res.r_system
            );
        }
    }
}

#[test]
fn hom_tan_slopes_scale_with_y() {
    let e = catalog::get("hom-tan").unwrap();
    let WebSource::Depressed(w) = &e.spec.source else {
        unreachable!()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut n = 0;
    while n < 20 {
        let (x, y) = (rng.gen_range(0.05..0.7), rng.gen_range(0.2..0.5));
        for lambda in [0.5, 2.0] {
            let roots = |y: f64| {
                let (a, b) = w.coefficients(x, y).unwrap();
                solve_depressed(a, b, 1e-10).with_multiplicity()
            };
            let (r0, r1) = (roots(y), roots(lambda * y));
            assert_eq!(r0.len(), r1.len());
            for (p, q) in r0.iter().zip(&r1) {
                assert!(
                    (q - lambda * p).abs() < 1e-8 * (1.0 + q.abs()),
                    "({x}, {y}) λ = {lambda}: {q} vs {}",
                    lambda * p
                );
            }
        }
        n += 1;
    }
}

#[test]
fn reduced_webs_have_no_quadratic_term() {
    for id in ["assoc-poly", "nongen-a", "nongen-b"] {
        let e = catalog::get(id).unwrap();
        let WebSource::GeneralCubic(w) = &e.spec.source else {
            unreachable!()
        };
        let plan = e.reduction.unwrap();
        let grid = GridSpec::square(9, plan.reduced).unwrap();
        let web =
            tschirnhausen_reduce(w, &e.spec.domain, plan.x0, &grid, &ReduceOptions::default())
                .unwrap();
        for n in &web.nodes {
            // p = f_x + f_y p̃ turns p³ + a p² + b p + c into f_y³ p̃³ + (3 f_x + a) f_y² p̃² + …
            let (a, _, _) = monicize(w, n.x, n.f).unwrap();
            let coeff = (3.0 * n.f_x + a) / n.f_y;
            assert!(coeff.abs() < 1e-8, "{id} at ({}, {}): {coeff:e}", n.x, n.y);
        }
    }
}

#[test]
fn leaves_follow_their_slopes() {
    for id in ["nf3", "hom-poly", "control-1"] {
        let e = catalog::get(id).unwrap();
        let tr = trace_web(&e.spec, &SeedSpec::default()).unwrap();
        assert!(!tr.leaves.is_empty());
        for l in &tr.leaves {
            let crossings: Vec<usize> = l.criminant_crossings.clone();
            for (k, pair) in l.vertices.windows(2).enumerate() {
                let (u, v) = (pair[0], pair[1]);
                let step =
                    ((v[0] - u[0]).powi(2) + (v[1] - u[1]).powi(2) + (v[2] - u[2]).powi(2)).sqrt();
                let pbar = 0.5 * (u[2] + v[2]);
                let gap = (v[1] - u[1]) - pbar * (v[0] - u[0]);
                assert!(
                    gap.abs() <= 10.0 * step * step + 1e-12,
                    "{id} leaf {} vertex {k}: {gap:e} over step {step:e}",
                    l.branch
                );
                // away from the fold the chord slope is the carried slope up to O(step)
                if !crossings.contains(&(k + 1)) && (v[0] - u[0]).abs() > 0.5 * step {
                    let chord = (v[1] - u[1]) / (v[0] - u[0]);
                    assert!(
                        (chord - pbar).abs() <= 10.0 * step,
                        "{id}: chord {chord} vs {pbar}"
                    );
                }
            }
        }
    }
}

#[test]
fn hexagon_is_symmetric_in_the_offset() {
    let opts = HexagonOptions::default();
    for (id, c) in [("nf3", [-1.0, 0.0]), ("nf2", [0.5, 0.0])] {
        let e = catalog::get(id).unwrap();
        for t in [2e-2, 1e-2] {
            let fwd = hexagon_defect(&e.spec, c, t, &opts).unwrap().defect;
            let back = hexagon_defect(&e.spec, c, -t, &opts).unwrap().defect;
            assert!(
                (fwd - back).abs() <= t.powi(4),
                "{id} t = {t}: {fwd:e} vs {back:e}"
            );
        }
    }
}

#[test]
fn fold_web_passes_the_hexagon_test_for_positive_x() {
    use flatweb::hexagon::{defect_scan, log_offsets};
    let e = catalog::get("nf2").unwrap();
    for c in [[0.3, 0.2], [0.7, -0.4]] {
        let t = defect_scan(
            &e.spec,
            c,
            &log_offsets(1e-3, 1e-1, 10),
            &HexagonOptions::default(),
        );
        assert_eq!(t.flat, Some(true), "at {c:?}: {:?} {:?}", t.slope, t.flag);
    }
}

#[test]
fn svg_is_well_formed_and_deterministic() {
    let style = StyleSpec::default();
    for id in ["nf2", "nf3", "hom-poly"] {
        let e = catalog::get(id).unwrap();
        let first = render_svg(
            &trace_web(&e.spec, &SeedSpec::default()).unwrap().scene,
            &style,
        )
        .unwrap();
        let second = render_svg(
            &trace_web(&e.spec, &SeedSpec::default()).unwrap().scene,
            &style,
        )
        .unwrap();
        assert_eq!(first, second, "{id}");
        let doc = roxmltree::Document::parse(&first).unwrap();
        assert_eq!(doc.root_element().tag_name().name(), "svg");
        assert!(doc
            .descendants()
            .any(|n| n.has_tag_name("path") || n.has_tag_name("polyline")));
    }
}

#[test]
fn three_simple_kind_agrees_with_delta_sign() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10_000 {
        let (a, b) = (rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0));
        let d = flatweb::cubic::delta(a, b);
        let r = solve_depressed(a, b, 1e-10);
        let tol = 1e-10 * (1.0 + f64::abs(a).powi(3) + b * b);
        if d > tol {
            assert!(
                matches!(r.roots, Roots::ThreeSimple { .. }),
                "A = {a}, B = {b}"
            );
        } else if d < -tol {
            assert!(!r.is_three_simple(), "A = {a}, B = {b}");
        }
    }
}
