use proptest::prelude::*;

use super::compile::split;
use super::*;
use crate::opcore::{HamiltonianExpr, Interaction, Site, SiteSystem};

fn line(points: &[f64]) -> EmbeddedGraph {
    let ids = (0..points.len()).map(|i| format!("p{i}")).collect();
    let coords = points.iter().map(|&x| vec![x, 0.0]).collect();
    let edges = (1..points.len()).map(|i| (i - 1, i)).collect();
    EmbeddedGraph::new(2, ids, coords, edges).unwrap()
}

#[test]
fn locality_counts_closed_unit_balls() {
    // Ball around 0.5 holds all three points; the others hold two or three.
    let g = line(&[0.0, 0.5, 1.0]);
    let r = check_locality(&g, &LocalityParams::new(2, 1.0).unwrap());
    assert!(!r.pass);
    assert_eq!(r.max_ball, 3);
    assert_eq!(r.balls.len(), 3);
    assert!(r.edges.is_empty());
    assert!(check_locality(&g, &LocalityParams::new(3, 0.5).unwrap()).pass);

    let g = line(&[0.0, 2.5]);
    let r = check_locality(&g, &LocalityParams::new(3, 2.0).unwrap());
    assert_eq!(r.edges.len(), 1);
    assert!((r.edges[0].length - 2.5).abs() < 1e-12);
    assert!(LocalityParams::new(0, 1.0).is_err());
}

#[test]
fn snapping_halves_until_injective() {
    let g = line(&[0.0, 0.1]);
    let s = snap_to_grid(&g, 1.0).unwrap();
    // 0.1 / a rounds to 0 for a = 1, 1/2, 1/4 and to 1 for a = 1/8.
    assert_eq!(s.halvings, 3);
    assert_eq!(s.spacing, 0.125);
    assert_eq!(s.points, vec![vec![0, 0], vec![1, 0]]);
    assert!(s.max_displacement <= s.spacing * 2f64.sqrt());

    let same = line(&[0.3, 0.3]);
    assert!(matches!(snap_to_grid(&same, 1.0), Err(GeoError::Snap(_))));
}

#[test]
fn diagonals_cross_in_the_plane_but_not_in_space() {
    let pts = vec![vec![0, 0], vec![2, 2], vec![0, 2], vec![2, 0]];
    let edges = vec![(0, 1), (2, 3)];
    let tight = RouteOptions {
        margin: 0,
        ..RouteOptions::default()
    };
    let plan = route_paths(&pts, &edges, &tight).unwrap();
    assert_eq!(plan.crossings.len(), 1, "{plan:?}");
    assert_eq!(plan.crossings[0].point, vec![1, 1]);
    assert!(plan.is_vertex_disjoint());

    let pts3: Vec<GridPoint> = pts.iter().map(|p| vec![p[0], p[1], 0]).collect();
    let plan = route_paths(&pts3, &edges, &RouteOptions::default()).unwrap();
    assert!(plan.crossings.is_empty());
    assert!(plan.is_vertex_disjoint());
    assert!(plan.max_stretch() <= ROUTE_STRETCH as f64);

    let no_cross = RouteOptions {
        margin: 0,
        allow_crossings: false,
        ..RouteOptions::default()
    };
    assert!(matches!(
        route_paths(&pts, &edges, &no_cross),
        Err(GeoError::Route(_))
    ));
}

#[test]
fn domain_sizes() {
    let sq = extract_domain(&PeriodicGraph::square(2)).unwrap();
    assert_eq!(sq.len(), 1);
    assert_eq!(sq.w, vec![vec![1, 0], vec![0, 1]]);

    let hex = PeriodicGraph::hexagonal();
    let d = extract_domain(&hex).unwrap();
    assert_eq!(d.len(), 2);
    let m = verify_minor(&hex, &d, 6).unwrap();
    assert_eq!((m.translates, m.grid_edges), (36, 60));

    let sub = extract_domain(&PeriodicGraph::subdivided_square()).unwrap();
    assert_eq!(sub.len(), 3);
    assert_eq!(extract_domain(&PeriodicGraph::square(3)).unwrap().len(), 1);
}

#[test]
fn central_vertex_examples() {
    // K_{1,3}: centre 0, leaves 1..3.
    let star = vec![vec![1, 2, 3], vec![0], vec![0], vec![0]];
    let c = central_vertex(&star, &[1, 2, 3]).unwrap();
    assert_eq!(c.y, 0);
    assert_eq!(c.paths, vec![vec![0, 1], vec![0, 2], vec![0, 3]]);

    // Path a - b - c with ports a, c, b.
    let path = vec![vec![1], vec![0, 2], vec![1]];
    let c = central_vertex(&path, &[0, 2, 1]).unwrap();
    assert_eq!(c.y, 1);
    assert_eq!(c.paths[2], vec![1]);
    assert!(central_vertex(&path, &[]).is_err());
}

#[test]
fn colourings() {
    let (cells, steps) = PeriodicGraph::square(2).colouring().unwrap();
    assert_eq!((cells, steps), (vec![0], vec![1, 1]));
    // Honeycomb translations keep the sublattice.
    let (cells, steps) = PeriodicGraph::hexagonal().colouring().unwrap();
    assert_ne!(cells[0], cells[1]);
    assert_eq!(steps, vec![0, 0]);
    let tri = PeriodicGraph::new(
        "triangular",
        vec![vec![1.0, 0.0], vec![0.5, 0.75f64.sqrt()]],
        vec![vec![0.0, 0.0]],
        vec![(0, 0, vec![1, 0]), (0, 0, vec![0, 1]), (0, 0, vec![1, -1])],
    )
    .unwrap();
    assert!(tri.colouring().is_none());
}

#[test]
fn windows_round_trip_and_recover_cells() {
    let hex = PeriodicGraph::hexagonal();
    let w = hex.window(-2, 2);
    assert_eq!(w.len(), 50);
    w.check_translation().unwrap();
    let back = EmbeddedGraph::from_toml(&w.to_toml()).unwrap();
    assert_eq!(back, w);
    let cell = PeriodicGraph::from_window("hex", &w).unwrap();
    assert_eq!(cell.cell.len(), 2);
    assert_eq!(cell.edges.len(), 3);
    assert_eq!(extract_domain(&cell).unwrap().len(), 2);

    let mut broken = w.clone();
    let a = broken.ids.iter().position(|i| i == "v0@0_0").unwrap();
    let b = broken.ids.iter().position(|i| i == "v1@0_0").unwrap();
    broken.edges.retain(|&e| e != (a.min(b), a.max(b)));
    assert!(matches!(
        broken.check_translation(),
        Err(GeoError::NotInvariant(_))
    ));
}

fn star(leaves: usize) -> HamiltonianExpr {
    let mut sites = vec![Site::at("c", 2, vec![0.0, 0.0])];
    for k in 0..leaves {
        let a = std::f64::consts::TAU * k as f64 / leaves as f64;
        sites.push(Site::at(format!("l{k}"), 2, vec![a.cos(), a.sin()]));
    }
    let mut h = HamiltonianExpr::new(SiteSystem::new(sites).unwrap());
    for k in 0..leaves {
        h.add_named(Interaction::Heisenberg, &["c", &format!("l{k}")], 1.0)
            .unwrap();
    }
    h
}

#[test]
fn degree_reduction_of_stars() {
    let r = reduce_degree(&star(4), 1e4).unwrap();
    let s = r.summary();
    assert_eq!((s.subdivisions, s.forks, s.depth), (4, 2, 2));
    assert!(s.max_degree <= MAX_DEGREE);

    for d in [5, 8, 9] {
        let s = reduce_degree(&star(d), 1e4).unwrap().summary();
        let bound = (d as f64).log2().ceil() as usize + 1;
        assert!(s.max_degree <= MAX_DEGREE, "d = {d}");
        assert!(s.depth <= bound, "d = {d}: depth {} > {bound}", s.depth);
    }
    let s = reduce_degree(&star(3), 1e4).unwrap().summary();
    assert_eq!((s.forks, s.depth), (0, 1));
}

#[test]
fn odd_splits() {
    assert_eq!(split(3), (1, 1, 1));
    assert_eq!(split(5), (1, 3, 1));
    assert_eq!(split(7), (3, 1, 3));
    assert_eq!(split(9), (3, 3, 3));
    for l in (3..60).step_by(2) {
        let (a, b, c) = split(l);
        assert!(a % 2 == 1 && b % 2 == 1 && c % 2 == 1 && a + b + c == l);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn snapping_is_injective_and_close(
        pts in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..12),
        spacing in 0.2f64..2.0,
    ) {
        // Keep points apart so halving terminates.
        let mut kept: Vec<(f64, f64)> = Vec::new();
        for p in pts {
            if kept.iter().all(|q| (p.0 - q.0).hypot(p.1 - q.1) > 1e-3) {
                kept.push(p);
            }
        }
        let xs: Vec<Vec<f64>> = kept.iter().map(|p| vec![p.0, p.1]).collect();
        let s = snap_with(&xs, spacing, |_, _| true).unwrap();
        let set: std::collections::BTreeSet<_> = s.points.iter().collect();
        prop_assert_eq!(set.len(), xs.len());
        for (k, x) in s.points.iter().zip(&xs) {
            let d = ((k[0] as f64 * s.spacing - x[0]).powi(2) + (k[1] as f64 * s.spacing - x[1]).powi(2)).sqrt();
            prop_assert!(d <= s.spacing * 2f64.sqrt() + 1e-12);
        }
    }

    #[test]
    fn spatial_routes_are_disjoint(
        raw in prop::collection::btree_set((0i64..5, 0i64..5, 0i64..2), 2..8),
        picks in prop::collection::vec((0usize..8, 0usize..8), 1..5),
    ) {
        let pts: Vec<GridPoint> = raw.iter().map(|&(x, y, z)| vec![2 * x, 2 * y, 2 * z]).collect();
        let mut edges = Vec::new();
        for (a, b) in picks {
            let (a, b) = (a % pts.len(), b % pts.len());
            if a != b && !edges.contains(&(a, b)) && !edges.contains(&(b, a)) {
                edges.push((a, b));
            }
        }
        let plan = route_paths(&pts, &edges, &RouteOptions::default()).unwrap();
        prop_assert!(plan.crossings.is_empty());
        prop_assert!(plan.is_vertex_disjoint());
        for (p, &(u, v)) in plan.paths.iter().zip(&plan.edges) {
            prop_assert_eq!(&p[0], &pts[u]);
            prop_assert_eq!(p.last().unwrap(), &pts[v]);
            for w in p.windows(2) {
                let step: i64 = w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).abs()).sum();
                prop_assert_eq!(step, 1);
            }
        }
    }
}
