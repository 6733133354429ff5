//! Analytic test configurations and the five-object proximity example.

use std::f64::consts::PI;

use crate::config_model::{BoundingSpec, Configuration, Contour};
use crate::geom::{pt, Point};

pub fn square_vertices(cx: f64, cy: f64, half: f64) -> Vec<Point> {
    vec![pt(cx - half, cy - half), pt(cx + half, cy - half), pt(cx + half, cy + half), pt(cx - half, cy + half)]
}

pub fn square(cx: f64, cy: f64, half: f64) -> Contour {
    Contour::new(square_vertices(cx, cy, half), 0).expect("square is valid")
}

/// Points within distance 1 of the segment (0,0)–(4,0), as an `n`-gon.
pub fn stadium_vertices(n: usize) -> Vec<Point> {
    let per_cap = n / 2;
    let mut v = Vec::with_capacity(2 * per_cap);
    for (cx, start) in [(4.0, -PI / 2.0), (0.0, PI / 2.0)] {
        for j in 0..per_cap {
            let a = start + PI * j as f64 / (per_cap - 1) as f64;
            v.push(pt(cx + a.cos(), a.sin()));
        }
    }
    v
}

pub fn stadium(n: usize) -> Contour {
    Contour::new(stadium_vertices(n), 0).expect("stadium is valid")
}

pub fn disk_vertices(cx: f64, cy: f64, r: f64, n: usize) -> Vec<Point> {
    (0..n)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / n as f64;
            pt(cx + r * a.cos(), cy + r * a.sin())
        })
        .collect()
}

pub fn disk(cx: f64, cy: f64, r: f64, n: usize) -> Contour {
    Contour::new(disk_vertices(cx, cy, r, n), 0).expect("disk is valid")
}

pub fn ellipse_vertices(a: f64, b: f64, n: usize) -> Vec<Point> {
    (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            pt(a * t.cos(), b * t.sin())
        })
        .collect()
}

/// A 3×3 block with a 1-wide notch cut from the top middle.
pub fn u_shape_vertices() -> Vec<Point> {
    vec![
        pt(0.0, 0.0),
        pt(3.0, 0.0),
        pt(3.0, 3.0),
        pt(2.0, 3.0),
        pt(2.0, 1.0),
        pt(1.0, 1.0),
        pt(1.0, 3.0),
        pt(0.0, 3.0),
    ]
}

pub fn box_spec(x0: f64, y0: f64, x1: f64, y1: f64) -> BoundingSpec {
    BoundingSpec::Box { corners: [pt(x0, y0), pt(x1, y1)] }
}

/// Named configuration with the bounding spec it is usually analysed in.
pub struct Fixture {
    pub name: &'static str,
    pub configuration: Configuration,
    pub bounding: BoundingSpec,
}

pub fn two_squares() -> Fixture {
    Fixture {
        name: "two_squares",
        configuration: Configuration::new(vec![square_vertices(0.0, 0.0, 1.0), square_vertices(6.0, 0.0, 1.0)])
            .expect("valid"),
        bounding: box_spec(-3.0, -3.0, 9.0, 3.0),
    }
}

pub fn single_square_box() -> Fixture {
    Fixture {
        name: "square_box",
        configuration: Configuration::new(vec![square_vertices(0.0, 0.0, 1.0)]).expect("valid"),
        bounding: box_spec(-3.0, -3.0, 3.0, 3.0),
    }
}

pub fn single_square_threshold() -> Fixture {
    Fixture {
        name: "square_threshold",
        configuration: Configuration::new(vec![square_vertices(0.0, 0.0, 1.0)]).expect("valid"),
        bounding: BoundingSpec::Threshold { tau: 1.0 },
    }
}

pub fn stadium_box() -> Fixture {
    Fixture {
        name: "stadium",
        configuration: Configuration::new(vec![stadium_vertices(512)]).expect("valid"),
        bounding: box_spec(-2.0, -2.0, 6.0, 2.0),
    }
}

pub fn disk_box() -> Fixture {
    Fixture {
        name: "disk",
        configuration: Configuration::new(vec![disk_vertices(0.0, 0.0, 1.0, 256)]).expect("valid"),
        bounding: box_spec(-2.0, -2.0, 2.0, 2.0),
    }
}

pub fn u_shape() -> Fixture {
    Fixture {
        name: "u_shape",
        configuration: Configuration::new(vec![u_shape_vertices()]).expect("valid"),
        bounding: box_spec(-1.0, -1.0, 4.0, 5.0),
    }
}

/// Square, disk and stadium-like bar sharing one box.
pub fn three_objects() -> Fixture {
    let bar = vec![pt(-1.0, 3.0), pt(5.0, 3.0), pt(5.0, 4.0), pt(-1.0, 4.0)];
    Fixture {
        name: "three_objects",
        configuration: Configuration::new(vec![
            square_vertices(0.0, 0.0, 1.0),
            disk_vertices(4.0, 0.0, 1.0, 256),
            bar,
        ])
        .expect("valid"),
        bounding: box_spec(-3.0, -3.0, 7.0, 6.0),
    }
}

pub fn all() -> Vec<Fixture> {
    vec![two_squares(), single_square_box(), single_square_threshold(), stadium_box(), disk_box(), u_shape(), three_objects()]
}

/// Closeness matrix of the five-object example configuration.
pub const FIVE_OBJECT_CLOSENESS: [[f64; 5]; 5] = [
    [1.0, 0.240, 0.081, 0.0, 0.0],
    [0.240, 1.0, 0.200, 0.104, 0.152],
    [0.081, 0.200, 1.0, 0.487, 0.0],
    [0.0, 0.104, 0.487, 1.0, 0.305],
    [0.0, 0.152, 0.0, 0.305, 1.0],
];

pub const FIVE_OBJECT_SIGNIFICANCE: [f64; 5] = [0.52, 0.40, 0.43, 0.46, 0.49];
pub const FIVE_OBJECT_V_VOL: [f64; 5] = [0.49, 0.11, 0.15, 0.10, 0.15];
pub const FIVE_OBJECT_V_LK: [f64; 5] = [0.34, 0.21, 0.10, 0.16, 0.19];
