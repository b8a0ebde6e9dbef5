//! Seeded synthetic maps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GridError, OccupancyGrid2D, OccupancyGrid3D, PlanarPoint};

/// Independent Bernoulli cells: each is 1.0 with probability `density`.
pub fn gen_random(size: (usize, usize), density: f64, seed: u64) -> OccupancyGrid2D {
    assert!((0.0..=1.0).contains(&density), "density must lie in [0, 1]");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..size.0 * size.1)
        .map(|_| if rng.random_bool(density) { 1.0 } else { 0.0 })
        .collect();
    OccupancyGrid2D::new(size, 1.0, PlanarPoint::default(), values)
        .expect("generated values are valid")
}

/// Shape controls for [`gen_city_block_with`]. All lengths are in cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CityBlockParams {
    /// Minimum free cells between any two footprints, and between a
    /// footprint and the map edge.
    pub min_gap: usize,
    pub footprint_min: usize,
    pub footprint_max: usize,
    pub height_min: usize,
    pub height_max: usize,
    /// Rejection-sampling budget per block.
    pub max_attempts: usize,
}

impl CityBlockParams {
    /// Defaults scaled to the map size.
    pub fn for_size(size: (usize, usize, usize)) -> Self {
        let (nx, ny, nz) = size;
        let span = nx.min(ny);
        let footprint_min = (span / 12).max(1);
        Self {
            min_gap: (span / 20).max(1),
            footprint_min,
            footprint_max: (span / 6).max(footprint_min),
            height_min: (nz / 5).max(1).min(nz),
            height_max: nz,
            max_attempts: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Footprint {
    i0: usize,
    i1: usize,
    j0: usize,
    j1: usize,
}

impl Footprint {
    // Free cells separating two footprints along their most separated axis.
    fn separation(&self, other: &Footprint) -> isize {
        let sx = (other.i0 as isize - self.i1 as isize).max(self.i0 as isize - other.i1 as isize);
        let sy = (other.j0 as isize - self.j1 as isize).max(self.j0 as isize - other.j1 as isize);
        sx.max(sy)
    }
}

/// City-like volumetric map with default [`CityBlockParams`].
pub fn gen_city_block(
    size: (usize, usize, usize),
    block_count: usize,
    seed: u64,
) -> Result<OccupancyGrid3D, GridError> {
    gen_city_block_with(size, block_count, seed, &CityBlockParams::for_size(size))
}

/// Places `block_count` solid axis-aligned prisms on a free grid, keeping at
/// least `min_gap` free cells between neighbours and from the map edge so the
/// free ground space stays connected.
pub fn gen_city_block_with(
    size: (usize, usize, usize),
    block_count: usize,
    seed: u64,
    params: &CityBlockParams,
) -> Result<OccupancyGrid3D, GridError> {
    let (nx, ny, nz) = size;
    if nx == 0 || ny == 0 || nz == 0 {
        return Err(GridError::Invalid("every size component must be positive".into()));
    }
    if block_count == 0 {
        return Err(GridError::Invalid("block_count must be >= 1".into()));
    }
    let p = params;
    if p.footprint_min == 0 || p.footprint_min > p.footprint_max || p.height_min == 0 || p.height_min > p.height_max
    {
        return Err(GridError::Invalid(format!("inconsistent city block parameters: {p:?}")));
    }
    let fail = |placed| GridError::PlacementFailed { requested: block_count, placed };
    let height_max = p.height_max.min(nz);
    let room_x = nx.saturating_sub(2 * p.min_gap);
    let room_y = ny.saturating_sub(2 * p.min_gap);
    if room_x < p.footprint_min || room_y < p.footprint_min || height_max < p.height_min {
        return Err(fail(0));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut blocks: Vec<(Footprint, usize)> = Vec::with_capacity(block_count.min(1024));
    for placed in 0..block_count {
        let mut accepted = None;
        for _ in 0..p.max_attempts {
            let w = rng.random_range(p.footprint_min..=p.footprint_max.min(room_x));
            let d = rng.random_range(p.footprint_min..=p.footprint_max.min(room_y));
            let i0 = rng.random_range(p.min_gap..=nx - p.min_gap - w);
            let j0 = rng.random_range(p.min_gap..=ny - p.min_gap - d);
            let fp = Footprint { i0, i1: i0 + w, j0, j1: j0 + d };
            if blocks.iter().all(|(b, _)| b.separation(&fp) >= p.min_gap as isize) {
                let height = rng.random_range(p.height_min..=height_max);
                accepted = Some((fp, height));
                break;
            }
        }
        match accepted {
            Some(b) => blocks.push(b),
            None => return Err(fail(placed)),
        }
    }

    let mut values = vec![0.0; nx * ny * nz];
    for (fp, height) in &blocks {
        for k in 0..*height {
            for j in fp.j0..fp.j1 {
                for i in fp.i0..fp.i1 {
                    values[i + nx * (j + ny * k)] = 1.0;
                }
            }
        }
    }
    OccupancyGrid3D::new(size, 1.0, [0.0; 3], values)
}
