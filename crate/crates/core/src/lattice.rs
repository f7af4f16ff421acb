//! Periodic hypercubic lattices with flat site indexing and precomputed
//! nearest-neighbor tables.
//!
//! Site `(c_1, ..., c_d)` with 0-based coordinates maps to the flat index
//! `Σ_k c_k · L^(k-1)`: the first axis varies fastest. This ordering is part
//! of the file-format contract, so disorder files are portable.
//!
//! Every site has exactly `2d` neighbor entries, ordered
//! `+axis1, -axis1, +axis2, -axis2, ...`. For `L = 2` the entries along an
//! axis coincide and are stored twice, so the coupling sums of the energy
//! always run over exactly `2d` terms.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    d: usize,
    l: usize,
    n_sites: usize,
    /// Flat `n_sites × 2d` table, row `i` holding the neighbors of site `i`.
    neighbors: Vec<u32>,
}

impl Lattice {
    /// Builds the `d`-dimensional periodic lattice of linear size `l`.
    pub fn new(d: usize, l: usize) -> Result<Self> {
        if d < 1 {
            return Err(Error::param("d", format!("dimension must be >= 1, got {d}")));
        }
        if l < 2 {
            return Err(Error::param("L", format!("linear size must be >= 2, got {l}")));
        }
        let n_sites = l
            .checked_pow(d as u32)
            .filter(|&n| n <= u32::MAX as usize / (2 * d))
            .ok_or_else(|| Error::param("L", format!("lattice {l}^{d} is too large")))?;

        let mut neighbors = Vec::with_capacity(n_sites * 2 * d);
        let mut coords = vec![0usize; d];
        for i in 0..n_sites {
            let mut stride = 1usize;
            for &c in coords.iter() {
                let up = i - c * stride + ((c + 1) % l) * stride;
                let down = i - c * stride + ((c + l - 1) % l) * stride;
                neighbors.push(up as u32);
                neighbors.push(down as u32);
                stride *= l;
            }
            for c in coords.iter_mut() {
                *c += 1;
                if *c < l {
                    break;
                }
                *c = 0;
            }
        }
        Ok(Self {
            d,
            l,
            n_sites,
            neighbors,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn linear_size(&self) -> usize {
        self.l
    }

    #[inline]
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Number of neighbor entries per site (`2d`).
    #[inline]
    pub fn coordination(&self) -> usize {
        2 * self.d
    }

    /// Ordered neighbor multiset of site `i`.
    pub fn neighbors(&self, i: usize) -> Result<&[u32]> {
        if i >= self.n_sites {
            return Err(Error::SiteOutOfRange {
                index: i,
                n_sites: self.n_sites,
            });
        }
        Ok(self.neighbor_row(i))
    }

    #[inline]
    pub(crate) fn neighbor_row(&self, i: usize) -> &[u32] {
        let z = self.coordination();
        &self.neighbors[i * z..(i + 1) * z]
    }

    /// Rows of the neighbor table in site order; the kernels' main loop.
    #[inline]
    pub fn neighbor_rows(&self) -> impl Iterator<Item = &[u32]> {
        self.neighbors.chunks_exact(self.coordination())
    }

    /// Flat index of a coordinate tuple.
    pub fn site_index(&self, coords: &[usize]) -> Result<usize> {
        if coords.len() != self.d {
            return Err(Error::DimensionMismatch {
                what: "coordinate tuple",
                expected: self.d,
                got: coords.len(),
            });
        }
        let mut idx = 0usize;
        let mut stride = 1usize;
        for &c in coords {
            if c >= self.l {
                return Err(Error::param("coords", format!("coordinate {c} >= L = {}", self.l)));
            }
            idx += c * stride;
            stride *= self.l;
        }
        Ok(idx)
    }

    /// Coordinate tuple of a flat index.
    pub fn site_coords(&self, mut i: usize) -> Result<Vec<usize>> {
        if i >= self.n_sites {
            return Err(Error::SiteOutOfRange {
                index: i,
                n_sites: self.n_sites,
            });
        }
        let mut coords = Vec::with_capacity(self.d);
        for _ in 0..self.d {
            coords.push(i % self.l);
            i /= self.l;
        }
        Ok(coords)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn ring_of_four() {
        let lat = Lattice::new(1, 4).unwrap();
        assert_eq!(lat.n_sites(), 4);
        assert_eq!(lat.neighbors(0).unwrap(), &[1, 3]);
        assert_eq!(lat.neighbors(2).unwrap(), &[3, 1]);
    }

    #[test]
    fn two_site_ring_stores_duplicates() {
        let lat = Lattice::new(1, 2).unwrap();
        assert_eq!(lat.neighbors(0).unwrap(), &[1, 1]);
        assert_eq!(lat.neighbors(1).unwrap(), &[0, 0]);
    }

    #[test]
    fn square_lattice_wraps() {
        let lat = Lattice::new(2, 4).unwrap();
        assert_eq!(lat.n_sites(), 16);
        // Site (0,0): +x -> (1,0)=1, -x -> (3,0)=3, +y -> (0,1)=4, -y -> (0,3)=12.
        assert_eq!(lat.neighbors(0).unwrap(), &[1, 3, 4, 12]);
        for i in 0..16 {
            assert_eq!(lat.neighbors(i).unwrap().len(), 4);
        }
    }

    #[test]
    fn interior_site_of_3x3() {
        let lat = Lattice::new(2, 3).unwrap();
        let center = lat.site_index(&[1, 1]).unwrap();
        assert_eq!(center, 4);
        let expected = [
            lat.site_index(&[2, 1]).unwrap() as u32,
            lat.site_index(&[0, 1]).unwrap() as u32,
            lat.site_index(&[1, 2]).unwrap() as u32,
            lat.site_index(&[1, 0]).unwrap() as u32,
        ];
        assert_eq!(lat.neighbors(center).unwrap(), &expected);
    }

    #[test]
    fn cubic_coordination() {
        let lat = Lattice::new(3, 10).unwrap();
        assert_eq!(lat.neighbors(0).unwrap().len(), 6);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Lattice::new(0, 4).is_err());
        assert!(Lattice::new(2, 1).is_err());
        assert!(Lattice::new(3, 10).unwrap().neighbors(1000).is_err());
    }

    #[test]
    fn coords_roundtrip() {
        let lat = Lattice::new(3, 5).unwrap();
        for i in 0..lat.n_sites() {
            let c = lat.site_coords(i).unwrap();
            assert_eq!(lat.site_index(&c).unwrap(), i);
        }
    }

    /// Degree count, symmetry counting multiplicity, and index validity for
    /// every (d, L) pair at desk scale.
    #[test]
    fn neighbor_table_invariants() {
        for d in 1..=3 {
            for l in 2..=6 {
                let lat = Lattice::new(d, l).unwrap();
                let n = lat.n_sites();
                let mut total = 0usize;
                let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
                for i in 0..n {
                    let row = lat.neighbors(i).unwrap();
                    assert_eq!(row.len(), 2 * d, "d={d} L={l} site {i}");
                    total += row.len();
                    for &j in row {
                        let j = j as usize;
                        assert!(j < n);
                        // Neighbors differ by ±1 (mod L) in exactly one coordinate.
                        let ci = lat.site_coords(i).unwrap();
                        let cj = lat.site_coords(j).unwrap();
                        let diffs: Vec<usize> = (0..d).filter(|&a| ci[a] != cj[a]).collect();
                        assert_eq!(diffs.len(), 1, "d={d} L={l} {i}->{j}");
                        let a = diffs[0];
                        let step = (ci[a] + 1) % l == cj[a] || (cj[a] + 1) % l == ci[a];
                        assert!(step);
                        *counts.entry((i, j)).or_default() += 1;
                    }
                }
                assert_eq!(total, 2 * d * n);
                for (&(i, j), &c) in &counts {
                    assert_eq!(counts.get(&(j, i)), Some(&c), "d={d} L={l} ({i},{j})");
                }
            }
        }
    }
}
