use mwdesign_core::mesh::*;
use mwdesign_core::presets::{filter_mesh, patch_mesh, FilterLayout, PatchLayout};
use proptest::prelude::*;

/// Winding number of `(px, py)` around a closed polyline.
fn winding(px: f64, py: f64, poly: &[(f64, f64)]) -> i32 {
    let mut w = 0;
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        let cross = (b.0 - a.0) * (py - a.1) - (px - a.0) * (b.1 - a.1);
        if a.1 <= py {
            if b.1 > py && cross > 0.0 {
                w += 1;
            }
        } else if b.1 <= py && cross < 0.0 {
            w -= 1;
        }
    }
    w
}

fn oracle_count(mesh: &MeshModel, frame: &Frame, g: usize) -> usize {
    let polys: Vec<Vec<(f64, f64)>> = (0..mesh.polygons().len())
        .map(|p| mesh.polygon_points(p).iter().map(|q| (q.x as f64 / 1000.0, q.y as f64 / 1000.0)).collect())
        .collect();
    let (dx, dy) = ((frame.x1 - frame.x0) / g as f64, (frame.y1 - frame.y0) / g as f64);
    let mut n = 0;
    for r in 0..g {
        for c in 0..g {
            let (x, y) = (frame.x0 + (c as f64 + 0.5) * dx, frame.y0 + (r as f64 + 0.5) * dy);
            if polys.iter().any(|p| winding(x, y, p) != 0) {
                n += 1;
            }
        }
    }
    n
}

fn random_walk(mesh: &MeshModel, picks: &[(usize, u8)]) -> MeshModel {
    let space = mesh.vertex_action_space();
    let mut m = mesh.clone();
    for &(i, mag) in picks {
        let (v, d) = space[i % space.len()];
        let a = VertexAction::new(v, d, 0.01 * (1 + mag % 20) as f64).unwrap();
        match m.apply_action(&a) {
            Ok(next) => {
                assert!(next.validate().is_empty(), "accepted action left an invalid mesh");
                m = next;
            }
            Err(MeshError::Rejected(v)) => assert!(!v.is_empty()),
            Err(e) => panic!("{e}"),
        }
    }
    m
}

#[test]
fn filter_raster_matches_brute_force() {
    let mesh = filter_mesh(&FilterLayout::default());
    for g in [8, 16, 32, 47] {
        let grid = rasterize(&mesh, g).unwrap();
        assert_eq!(grid.occupied(), oracle_count(&mesh, &Frame::around(&mesh).unwrap(), g));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn accepted_moves_keep_meshes_valid(picks in prop::collection::vec((0usize..10_000, any::<u8>()), 1..60)) {
        let m = random_walk(&filter_mesh(&FilterLayout::default()), &picks);
        prop_assert!(m.validate().is_empty());
    }

    #[test]
    fn perturbed_raster_matches_brute_force(picks in prop::collection::vec((0usize..10_000, any::<u8>()), 1..40)) {
        let m = random_walk(&patch_mesh(&PatchLayout::default()), &picks);
        let frame = Frame::around(&m).unwrap();
        prop_assert_eq!(rasterize_in(&m, &frame, 32).unwrap().occupied(), oracle_count(&m, &frame, 32));
    }

    #[test]
    fn raster_is_translation_consistent(dx in -400i64..400, dy in -400i64..400) {
        let m = filter_mesh(&FilterLayout::default());
        let moved = MeshModel::new(
            m.vertices().iter().map(|p| Point::new(p.x + dx, p.y + dy)).collect(),
            m.polygons().to_vec(),
            m.movable().to_vec(),
            None,
        );
        let f = Frame::around(&m).unwrap();
        let g = f.translated(dx as f64 / 1000.0, dy as f64 / 1000.0);
        prop_assert_eq!(rasterize_in(&m, &f, 32).unwrap(), rasterize_in(&moved, &g, 32).unwrap());
    }

    #[test]
    fn inverse_undoes_any_accepted_action(i in 0usize..10_000, mag in 1u32..300) {
        let m = filter_mesh(&FilterLayout::default());
        let space = m.vertex_action_space();
        let (v, d) = space[i % space.len()];
        let a = VertexAction::new(v, d, mag as f64 / 1000.0).unwrap();
        if let Ok(next) = m.apply_action(&a) {
            prop_assert_eq!(next.apply_action(&a.inverse()).unwrap(), m);
        }
    }
}

#[test]
fn actions_are_pure() {
    let m = filter_mesh(&FilterLayout::default());
    let before = m.clone();
    let a = VertexAction::new(m.vertex_action_space()[5].0, Direction::Up, 0.05).unwrap();
    let (x, y) = (m.apply_action(&a).unwrap(), m.apply_action(&a).unwrap());
    assert_eq!(x, y);
    assert_eq!(m, before);
}

#[test]
fn filter_seed_exceeds_a_five_by_five_bound() {
    let mut m = filter_mesh(&FilterLayout::default());
    assert!(m.validate().is_empty());
    m.set_bound_mm(Some((5.0, 5.0)));
    let v = m.validate();
    assert!(!v.is_empty());
    assert!(v.iter().all(|x| matches!(x, Violation::BoundViolation { .. })));
    assert!(v.iter().any(|x| x.to_string().contains("bound violation")));
}

#[test]
fn crossing_edges_name_the_edges() {
    let bow = vec![Point::from_mm(0.0, 0.0), Point::from_mm(1.0, 1.0), Point::from_mm(1.0, 0.0), Point::from_mm(0.0, 1.0)];
    let m = MeshModel::new(bow, vec![Polygon { tag: PolygonTag::Patch, indices: vec![0, 1, 2, 3] }], vec![true; 4], None);
    let v = m.validate();
    assert!(v.contains(&Violation::SelfIntersection { polygon: 0, edge_a: 0, edge_b: 2 }), "{v:?}");
    assert!(v[0].to_string().contains("self-intersection"));
}

#[test]
fn action_space_size_and_order() {
    // 125 squares of four vertices: 500 movable vertices
    let mut verts = Vec::new();
    let mut polys = Vec::new();
    for i in 0..125 {
        let x = (i % 25) as f64 * 2.0;
        let y = (i / 25) as f64 * 2.0;
        let s = verts.len();
        verts.extend([Point::from_mm(x, y), Point::from_mm(x + 1.0, y), Point::from_mm(x + 1.0, y + 1.0), Point::from_mm(x, y + 1.0)]);
        polys.push(Polygon { tag: PolygonTag::Patch, indices: (s..s + 4).collect() });
    }
    let m = MeshModel::new(verts, polys, vec![true; 500], None);
    let space = m.vertex_action_space();
    assert_eq!(space.len(), 2000);
    assert_eq!(&space[..4], &[(0, Direction::Up), (0, Direction::Down), (0, Direction::Left), (0, Direction::Right)]);
    assert!(space.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn json_layout() {
    let m = filter_mesh(&FilterLayout::default());
    let text = m.to_json();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
    assert_eq!(keys.len(), 4);
    for k in ["vertices", "polygons", "movable", "bound"] {
        assert!(keys.iter().any(|x| x == k));
    }
    let tags: Vec<&str> = v["polygons"].as_array().unwrap().iter().map(|p| p["tag"].as_str().unwrap()).collect();
    for t in ["resonator-1", "resonator-2", "feed"] {
        assert!(tags.contains(&t));
    }
    assert_eq!(MeshModel::from_json(&text).unwrap(), m);
    assert!(MeshModel::from_json(r#"{"vertices": [], "polygons": [], "movable": [], "bound": null, "extra": 1}"#).is_err());
}

#[test]
fn port_vertices_are_fixed() {
    let m = filter_mesh(&FilterLayout::default());
    let fixed = m.movable().iter().position(|x| !x).unwrap();
    let a = VertexAction::new(fixed, Direction::Left, 0.05).unwrap();
    assert_eq!(m.apply_action(&a), Err(MeshError::NotMovable(fixed)));
}
