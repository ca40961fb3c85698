//! Dense reference eigensolver for the normalized Laplacian `I − A/d`.
//!
//! This is the ground-truth side of every oracle comparison: sublinear
//! estimators are checked against quantities computed here.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};

/// Default vertex cap for dense eigendecompositions.
pub const DENSE_CAP: usize = 4000;

pub fn normalized_laplacian(g: &Graph) -> DMatrix<f64> {
    let d = g.d() as f64;
    let mut l = -g.adjacency_dense() / d;
    for i in 0..g.n() {
        l[(i, i)] += 1.0;
    }
    l
}

/// Ascending eigenvalues of `I − A/d` (no eigenvectors).
pub fn normalized_laplacian_eigenvalues(g: &Graph, cap: usize) -> Result<Vec<f64>> {
    if g.n() > cap {
        return Err(Error::TooLarge { n: g.n(), cap });
    }
    let mut vals: Vec<f64> = normalized_laplacian(g).symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    Ok(vals)
}

/// Full eigendecomposition `L = U Λ Uᵀ`, eigenpairs ascending, with the
/// embedding dimension `k` used by the bottom-space accessors.
#[derive(Debug, Clone)]
pub struct SpectralData {
    eigenvalues: Vec<f64>,
    vectors: DMatrix<f64>,
    k: usize,
}

pub fn exact_spectral(g: &Graph, k: usize) -> Result<SpectralData> {
    exact_spectral_capped(g, k, DENSE_CAP)
}

pub fn exact_spectral_capped(g: &Graph, k: usize, cap: usize) -> Result<SpectralData> {
    if g.n() > cap {
        return Err(Error::TooLarge { n: g.n(), cap });
    }
    if k == 0 || k > g.n() {
        return Err(Error::Parameter(format!("embedding dimension {k} out of range")));
    }
    let eig = normalized_laplacian(g).symmetric_eigen();
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(g.n(), g.n(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(SpectralData {
        eigenvalues,
        vectors,
        k,
    })
}

impl SpectralData {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    /// Same decomposition with a different embedding dimension.
    pub fn with_k(mut self, k: usize) -> Result<Self> {
        if k == 0 || k > self.n() {
            return Err(Error::Parameter(format!("embedding dimension {k} out of range")));
        }
        self.k = k;
        Ok(self)
    }

    /// Eigenvalue `1 − λ_i/2` of the lazy walk matrix for eigenpair `i`.
    pub fn walk_eigenvalue(&self, i: usize) -> f64 {
        1.0 - self.eigenvalues[i] / 2.0
    }

    /// `f_x = U_[k]ᵀ 1_x`.
    pub fn embedding(&self, x: Vertex) -> DVector<f64> {
        DVector::from_fn(self.k, |i, _| self.vectors[(x, i)])
    }

    /// `⟨f_x, Σ_[k] f_y⟩` with `Σ = I − Λ/2`.
    pub fn wdp(&self, x: Vertex, y: Vertex) -> f64 {
        (0..self.k)
            .map(|i| self.walk_eigenvalue(i) * self.vectors[(x, i)] * self.vectors[(y, i)])
            .sum()
    }

    /// `zᵀ U_[k] diag(weights) U_[k]ᵀ z`.
    fn bottom_form(&self, z: &[f64], weight: impl Fn(usize) -> f64) -> f64 {
        (0..self.k)
            .map(|i| {
                let c: f64 = self.vectors.column(i).iter().zip(z).map(|(u, z)| u * z).sum();
                weight(i) * c * c
            })
            .sum()
    }

    /// `zᵀ U_[k] Σ_[k] U_[k]ᵀ z`.
    pub fn walk_projection_form(&self, z: &[f64]) -> f64 {
        self.bottom_form(z, |i| self.walk_eigenvalue(i))
    }

    /// `zᵀ U_[k] Λ_[k] U_[k]ᵀ z`, the rank-`k` truncation of the Laplacian.
    pub fn rank_k_laplacian_form(&self, z: &[f64]) -> f64 {
        self.bottom_form(z, |i| self.eigenvalues[i])
    }

    /// Max over pairs of `‖L u_i − λ_i u_i‖₂` against the given graph.
    pub fn max_residual(&self, g: &Graph) -> f64 {
        let l = normalized_laplacian(g);
        (0..self.n())
            .map(|i| {
                let u = self.vectors.column(i);
                (&l * u - u * self.eigenvalues[i]).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// `⟨f_x, Σ_[k] f_y⟩` from a precomputed decomposition.
pub fn exact_wdp(sd: &SpectralData, x: Vertex, y: Vertex) -> f64 {
    sd.wdp(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::graph::Graph;

    fn two_components() -> Graph {
        let mut e = complete_edges(0, 5);
        e.extend(complete_edges(5, 5));
        Graph::from_edges(10, 4, e).unwrap()
    }

    #[test]
    fn regular_graph_bottom_pair() {
        let (g, _) = two_cliques();
        let sd = exact_spectral(&g, 1).unwrap();
        assert!(sd.eigenvalues()[0].abs() < 1e-10);
        let u = sd.eigenvectors().column(0);
        let c = 1.0 / (8f64).sqrt();
        assert!(u.iter().all(|x| (x.abs() - c).abs() < 1e-10));
        for x in 0..8 {
            for y in 0..8 {
                assert!((exact_wdp(&sd, x, y) - 1.0 / 8.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn orthonormal_and_small_residual() {
        let (g, _) = two_cliques();
        let sd = exact_spectral(&g, 2).unwrap();
        let u = sd.eigenvectors();
        let gram = u.transpose() * u;
        assert!((gram - DMatrix::identity(8, 8)).abs().max() < 1e-8);
        assert!(sd.max_residual(&g) < 1e-7);
        assert!(sd.eigenvalues().iter().all(|&l| (-1e-12..=2.0 + 1e-12).contains(&l)));
    }

    #[test]
    fn component_count_is_zero_multiplicity() {
        let g = two_components();
        let vals = normalized_laplacian_eigenvalues(&g, DENSE_CAP).unwrap();
        assert!(vals[1].abs() < 1e-10);
        assert!(vals[2] > 0.1);
    }

    #[test]
    fn too_large() {
        let g = cycle(10);
        assert!(matches!(
            exact_spectral_capped(&g, 2, 5),
            Err(Error::TooLarge { n: 10, cap: 5 })
        ));
    }

    #[test]
    fn self_wdp_bounded_by_embedding_norm() {
        let (g, _) = two_cliques();
        let sd = exact_spectral(&g, 3).unwrap();
        for x in 0..8 {
            let w = exact_wdp(&sd, x, x);
            assert!(w >= -1e-12 && w <= sd.embedding(x).norm_squared() + 1e-12);
        }
    }

    #[test]
    fn same_cluster_pairs_dominate() {
        let (g, p) = two_cliques();
        let sd = exact_spectral(&g, 2).unwrap();
        let mut wins = 0;
        let mut total = 0;
        for x in 0..8 {
            for y in 0..8 {
                for z in 0..8 {
                    if p.label(x) == p.label(y) && p.label(x) != p.label(z) {
                        total += 1;
                        if exact_wdp(&sd, x, y) > exact_wdp(&sd, x, z) {
                            wins += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(wins, total);
    }

    #[test]
    fn wdp_invariant_under_relabeling() {
        let (g, _) = two_cliques();
        let perm = vec![3, 6, 0, 7, 1, 5, 2, 4];
        let gp = g.permuted(&perm).unwrap();
        let a = exact_spectral(&g, 2).unwrap();
        let b = exact_spectral(&gp, 2).unwrap();
        for x in 0..8 {
            for y in 0..8 {
                assert!((a.wdp(x, y) - b.wdp(perm[x], perm[y])).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn degenerate_eigenspace_rotation() {
        // two disjoint K5: λ1 = λ2 = 0, any orthonormal basis of the kernel works
        let g = two_components();
        let sd = exact_spectral(&g, 2).unwrap();
        let th = 0.7f64;
        let (c, s) = (th.cos(), th.sin());
        let u = sd.eigenvectors();
        for x in 0..10 {
            for y in 0..10 {
                let rot = |v: usize| {
                    (
                        c * u[(v, 0)] - s * u[(v, 1)],
                        s * u[(v, 0)] + c * u[(v, 1)],
                    )
                };
                let (a0, a1) = rot(x);
                let (b0, b1) = rot(y);
                let rotated = a0 * b0 * sd.walk_eigenvalue(0) + a1 * b1 * sd.walk_eigenvalue(1);
                assert!((rotated - sd.wdp(x, y)).abs() < 1e-6);
            }
        }
    }
}
