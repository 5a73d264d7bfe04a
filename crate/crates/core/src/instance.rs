//! Problem instances: depot and city coordinates with precomputed geometry.
//!
//! Index 0 is always the depot; cities are numbered `1..=n_cities`.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    name: String,
    coords: Vec<(f64, f64)>,
    dist: Vec<f64>,
    theta: Vec<f64>,
}

/// Options for the TSPLIB reader.
#[derive(Debug, Clone, Copy, Default)]
pub struct TsplibOptions {
    /// Round distances to the nearest integer as TSPLIB's EUC_2D does.
    pub round_distances: bool,
}

#[derive(Serialize, Deserialize)]
struct NativeInstance {
    depot: [f64; 2],
    cities: Vec<[f64; 2]>,
}

impl Instance {
    /// Builds an instance from the depot followed by the city coordinates.
    pub fn from_coords(name: impl Into<String>, coords: Vec<(f64, f64)>) -> Result<Self> {
        Self::build(name.into(), coords, false)
    }

    fn build(name: String, coords: Vec<(f64, f64)>, round: bool) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidInstance("zero cities".into()));
        }
        if coords.iter().any(|&(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::InvalidInstance("non-finite coordinate".into()));
        }
        let size = coords.len();
        let mut dist = vec![0.0; size * size];
        for i in 0..size {
            for j in (i + 1)..size {
                let (xi, yi) = coords[i];
                let (xj, yj) = coords[j];
                let mut d = (xi - xj).hypot(yi - yj);
                if round {
                    d = (d + 0.5).floor();
                }
                dist[i * size + j] = d;
                dist[j * size + i] = d;
            }
        }
        let (dx, dy) = coords[0];
        let theta = coords
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| if i == 0 { 0.0 } else { depot_angle(x - dx, y - dy) })
            .collect();
        Ok(Instance {
            name,
            coords,
            dist,
            theta,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_cities(&self) -> usize {
        self.coords.len() - 1
    }

    /// Number of nodes including the depot.
    pub fn size(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[(f64, f64)] {
        &self.coords
    }

    pub fn depot(&self) -> (f64, f64) {
        self.coords[0]
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.coords.len() + j]
    }

    /// Angle of `city - depot` in `[0, 2π)`.
    #[inline]
    pub fn theta(&self, city: usize) -> f64 {
        self.theta[city]
    }

    pub fn cities(&self) -> impl Iterator<Item = usize> + Clone {
        1..self.coords.len()
    }

    /// Smallest possible max-route length: some route must reach the
    /// farthest city and come back.
    pub fn star_bound(&self) -> f64 {
        self.cities().map(|c| 2.0 * self.d(0, c)).fold(0.0, f64::max)
    }

    /// Reads a TSPLIB `EUC_2D` file. File node 1 becomes the depot.
    pub fn parse_tsplib(text: &str) -> Result<Self> {
        Self::parse_tsplib_with(text, TsplibOptions::default())
    }

    pub fn parse_tsplib_with(text: &str, opts: TsplibOptions) -> Result<Self> {
        let mut name = String::new();
        let mut dimension: Option<(usize, usize)> = None;
        let mut coords: Vec<(f64, f64)> = Vec::new();
        let mut in_coords = false;
        let mut last_line = 0;

        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            last_line = lineno;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if line == "EOF" {
                break;
            }
            if in_coords {
                let fields: Vec<&str> = line.split_whitespace().collect();
                if fields.len() != 3 {
                    return Err(Error::parse(
                        lineno,
                        format!("expected `id x y`, found {} fields", fields.len()),
                    ));
                }
                let num = |s: &str| {
                    s.parse::<f64>()
                        .map_err(|_| Error::parse(lineno, format!("invalid number `{s}`")))
                };
                fields[0]
                    .parse::<usize>()
                    .map_err(|_| Error::parse(lineno, format!("invalid node id `{}`", fields[0])))?;
                coords.push((num(fields[1])?, num(fields[2])?));
                continue;
            }
            if line.starts_with("NODE_COORD_SECTION") {
                in_coords = true;
                continue;
            }
            let Some((key, value)) = line.split_once(':') else {
                return Err(Error::parse(lineno, format!("malformed header line `{line}`")));
            };
            let value = value.trim();
            match key.trim() {
                "NAME" => name = value.to_string(),
                "TYPE" => {
                    if value != "TSP" {
                        return Err(Error::parse(lineno, format!("unsupported TYPE `{value}`")));
                    }
                }
                "COMMENT" => {}
                "DIMENSION" => {
                    let n = value
                        .parse::<usize>()
                        .map_err(|_| Error::parse(lineno, format!("invalid DIMENSION `{value}`")))?;
                    dimension = Some((n, lineno));
                }
                "EDGE_WEIGHT_TYPE" => {
                    if value != "EUC_2D" {
                        return Err(Error::parse(
                            lineno,
                            format!("unsupported EDGE_WEIGHT_TYPE `{value}`"),
                        ));
                    }
                }
                other => {
                    return Err(Error::parse(lineno, format!("unsupported header key `{other}`")));
                }
            }
        }

        let Some((dim, dim_line)) = dimension else {
            return Err(Error::parse(last_line, "missing DIMENSION"));
        };
        if !in_coords {
            return Err(Error::parse(last_line, "missing NODE_COORD_SECTION"));
        }
        if coords.len() != dim {
            return Err(Error::parse(
                dim_line,
                format!("DIMENSION is {dim} but {} coordinates were given", coords.len()),
            ));
        }
        if dim < 2 {
            return Err(Error::parse(dim_line, "instance needs a depot and at least one city"));
        }
        Self::build(name, coords, opts.round_distances)
    }

    /// Reads the native JSON format `{"depot":[x,y],"cities":[[x,y],...]}`.
    pub fn parse_json(text: &str) -> Result<Self> {
        let native: NativeInstance = serde_json::from_str(text)?;
        if native.cities.is_empty() {
            return Err(Error::InvalidInstance("zero cities".into()));
        }
        let coords = std::iter::once(native.depot)
            .chain(native.cities)
            .map(|[x, y]| (x, y))
            .collect();
        Self::from_coords("", coords)
    }

    pub fn to_json(&self) -> String {
        let native = NativeInstance {
            depot: [self.coords[0].0, self.coords[0].1],
            cities: self.coords[1..].iter().map(|&(x, y)| [x, y]).collect(),
        };
        serde_json::to_string(&native).expect("instance serialization cannot fail")
    }

    /// Cities drawn uniformly over the unit disk, depot at the origin.
    pub fn generate_random(n_cities: usize, seed: u64) -> Result<Self> {
        if n_cities == 0 {
            return Err(Error::InvalidInstance("zero cities".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coords = Vec::with_capacity(n_cities + 1);
        coords.push((0.0, 0.0));
        for _ in 0..n_cities {
            let r = rng.gen::<f64>().sqrt();
            let phi = TAU * rng.gen::<f64>();
            coords.push((r * phi.cos(), r * phi.sin()));
        }
        Self::from_coords(format!("random-{n_cities}-{seed}"), coords)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

fn depot_angle(dx: f64, dy: f64) -> f64 {
    let mut a = dy.atan2(dx);
    if a < 0.0 {
        a += TAU;
    }
    if a >= TAU {
        a = 0.0;
    }
    a
}

/// Angular distance between two angles, in `[0, π]`.
pub fn angdist(a: f64, b: f64) -> f64 {
    let d = (a - b).abs().rem_euclid(TAU);
    d.min(TAU - d)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{PI, SQRT_2};

    use super::*;

    const MINIMAL: &str = "NAME: tiny\nDIMENSION: 2\nNODE_COORD_SECTION\n1 0 0\n2 3 4\nEOF\n";

    #[test]
    fn minimal_tsplib() {
        let inst = Instance::parse_tsplib(MINIMAL).unwrap();
        assert_eq!(inst.n_cities(), 1);
        assert_eq!(inst.d(0, 1), 5.0);
        assert_eq!(inst.name(), "tiny");
    }

    #[test]
    fn tsplib_errors_name_the_line() {
        let bad_weight = "NAME: x\nDIMENSION: 2\nEDGE_WEIGHT_TYPE: GEO\nNODE_COORD_SECTION\n1 0 0\n2 1 1\n";
        match Instance::parse_tsplib(bad_weight) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let short = "DIMENSION: 3\nNODE_COORD_SECTION\n1 0 0\n2 1 1\nEOF\n";
        match Instance::parse_tsplib(short) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 1);
                assert!(message.contains("DIMENSION"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let garbage = "DIMENSION: 2\nNODE_COORD_SECTION\n1 0 0\n2 1 abc\n";
        match Instance::parse_tsplib(garbage) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            Instance::parse_tsplib("NAME: x\nNODE_COORD_SECTION\n1 0 0\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            Instance::parse_tsplib("DIMENSION: 2\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            Instance::parse_tsplib("NAME x\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn tsplib_rounding_flag() {
        let text = "DIMENSION: 2\nEDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 1 1\nEOF\n";
        let exact = Instance::parse_tsplib(text).unwrap();
        assert_eq!(exact.d(0, 1), SQRT_2);
        let rounded =
            Instance::parse_tsplib_with(text, TsplibOptions { round_distances: true }).unwrap();
        assert_eq!(rounded.d(0, 1), 1.0);
    }

    #[test]
    fn json_examples() {
        let one = Instance::parse_json(r#"{"depot":[0,0],"cities":[[1,0]]}"#).unwrap();
        assert_eq!(one.n_cities(), 1);
        assert_eq!(one.d(0, 1), 1.0);

        let two = Instance::parse_json(r#"{"depot":[0,0],"cities":[[1,0],[0,1]]}"#).unwrap();
        assert_eq!(two.d(1, 2), SQRT_2);

        let err = Instance::parse_json(r#"{"depot":[0,0],"cities":[]}"#).unwrap_err();
        assert!(err.to_string().contains("zero cities"));
        assert!(Instance::parse_json(r#"{"cities":[[1,0]]}"#).is_err());
        assert!(Instance::parse_json(r#"{"depot":[0,0],"cities":[["a",0]]}"#).is_err());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let inst = Instance::generate_random(30, 11).unwrap();
        let back = Instance::parse_json(&inst.to_json()).unwrap();
        assert_eq!(inst.coords(), back.coords());
    }

    #[test]
    fn generate_examples() {
        let inst = Instance::generate_random(50, 7).unwrap();
        assert_eq!(inst.n_cities(), 50);
        assert_eq!(inst.depot(), (0.0, 0.0));
        assert!(inst.coords().iter().all(|&(x, y)| x.hypot(y) <= 1.0));
        let again = Instance::generate_random(50, 7).unwrap();
        assert_eq!(inst, again);
        assert_ne!(inst.coords(), Instance::generate_random(50, 8).unwrap().coords());
        assert!(Instance::generate_random(0, 1).is_err());
    }

    #[test]
    fn theta_range() {
        let inst = Instance::from_coords(
            "t",
            vec![(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0), (0.0, 0.0)],
        )
        .unwrap();
        assert_eq!(inst.theta(1), 0.0);
        assert!((inst.theta(2) - PI / 2.0).abs() < 1e-15);
        assert!((inst.theta(3) - PI).abs() < 1e-15);
        assert!((inst.theta(4) - 1.5 * PI).abs() < 1e-15);
        assert_eq!(inst.theta(5), 0.0);
    }

    #[test]
    fn angdist_examples() {
        assert!((angdist(0.1, TAU - 0.1) - 0.2).abs() < 1e-12);
        assert_eq!(angdist(1.3, 1.3), 0.0);
        assert!((angdist(0.0, PI) - PI).abs() < 1e-15);
    }
}
