//! Summation-by-parts and spectral identities of the discrete operators,
//! checked against brute-force oracles (dense matrices, random fields).

use brinkfric_core::field::{CellField, FaceField};
use brinkfric_core::grid::{BoundaryPartition, Grid2D};
use brinkfric_core::ops::{stream_curl, DiscreteOps};
use brinkfric_core::steady::divfree_basis;
use nalgebra::DMatrix;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn setup(nx: usize, ny: usize) -> DiscreteOps {
    let g = Grid2D::build(nx, ny, 1.3, 0.9).unwrap();
    let p = BoundaryPartition::constant_g(&g, 0.5).unwrap();
    DiscreteOps::new(&g, &p)
}

fn random_admissible(ops: &DiscreteOps, rng: &mut ChaCha8Rng) -> FaceField {
    let mut f = FaceField::zeros(ops.grid());
    for x in f.u.iter_mut().chain(f.v.iter_mut()) {
        *x = rng.gen_range(-1.0..1.0);
    }
    f.enforce_essential(ops.grid());
    f
}

fn random_cells(ops: &DiscreteOps, rng: &mut ChaCha8Rng) -> CellField {
    let mut q = CellField::zeros(ops.grid());
    for x in q.q.iter_mut() {
        *x = rng.gen_range(-1.0..1.0);
    }
    q
}

fn random_divfree(ops: &DiscreteOps, rng: &mut ChaCha8Rng) -> FaceField {
    let g = ops.grid();
    let mut psi = vec![0.0; (g.nx + 1) * (g.ny + 1)];
    for j in 1..g.ny {
        for i in 1..g.nx {
            psi[i + j * (g.nx + 1)] = rng.gen_range(-1.0..1.0);
        }
    }
    stream_curl(g, &psi)
}

#[test]
fn adjointness_on_100_random_pairs() {
    let ops = setup(12, 10);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let v = random_admissible(&ops, &mut rng);
        let q = random_cells(&ops, &mut rng);
        let lhs = ops.inner_cells(&ops.divergence(&v), &q);
        let rhs = ops.inner(&v, &ops.gradient(&q));
        let scale = ops.norm_l2(&v) * ops.norm_l2_cells(&q);
        assert!(
            (lhs + rhs).abs() <= 1e-13 * scale.max(1e-30),
            "adjointness defect {:.3e}",
            (lhs + rhs).abs()
        );
    }
}

#[test]
fn laplacian_symmetry_on_random_pairs() {
    let ops = setup(11, 9);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..100 {
        let u = random_admissible(&ops, &mut rng);
        let v = random_admissible(&ops, &mut rng);
        let auv = ops.inner(&ops.laplacian(&u).unwrap(), &v);
        let avu = ops.inner(&u, &ops.laplacian(&v).unwrap());
        let scale = ops.norm_l2(&u) * ops.norm_l2(&v);
        assert!((auv - avu).abs() <= 1e-12 * scale.max(1e-30));
    }
}

#[test]
fn laplacian_negative_semidefinite_and_definite_on_nonzero() {
    let ops = setup(9, 9);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let u = random_admissible(&ops, &mut rng);
        let e = ops.inner(&ops.laplacian(&u).unwrap(), &u);
        assert!(e <= 0.0);
        if ops.norm_l2(&u) > 1e-8 {
            assert!(e < 0.0);
        }
    }
}

#[test]
fn discrete_poincare_inequality_on_divfree_fields() {
    let ops = setup(10, 10);
    let lam = ops.compute_lambda_min(1e-10, 300).unwrap();
    assert!(lam.lambda > 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..100 {
        let u = random_divfree(&ops, &mut rng);
        let l2 = ops.inner(&u, &u);
        let h1 = ops.grad_norm_sq(&u);
        assert!(
            l2 <= (1.0 + 1e-8) / lam.lambda * h1,
            "Poincare violated: {l2} vs {}",
            h1 / lam.lambda
        );
    }
}

#[test]
fn divergence_matches_dense_matrix_on_4x4() {
    let g = Grid2D::build(4, 4, 1.0, 1.0).unwrap();
    let part = BoundaryPartition::constant_g(&g, 0.0).unwrap();
    let ops = DiscreteOps::new(&g, &part);
    let nu = g.n_ufaces();
    let nv = g.n_vfaces();
    let nc = g.n_cells();
    // assemble the divergence as an explicit matrix acting on [u; v]
    let mut mat = DMatrix::<f64>::zeros(nc, nu + nv);
    for j in 0..g.ny {
        for i in 0..g.nx {
            let row = g.cidx(i, j);
            mat[(row, g.uidx(i + 1, j))] += 1.0 / g.dx;
            mat[(row, g.uidx(i, j))] -= 1.0 / g.dx;
            mat[(row, nu + g.vidx(i, j + 1))] += 1.0 / g.dy;
            mat[(row, nu + g.vidx(i, j))] -= 1.0 / g.dy;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let mut f = FaceField::zeros(&g);
        for x in f.u.iter_mut().chain(f.v.iter_mut()) {
            *x = rng.gen_range(-1.0..1.0);
        }
        let stacked =
            DMatrix::from_iterator(nu + nv, 1, f.u.iter().chain(f.v.iter()).copied());
        let dense = &mat * stacked;
        let stencil = ops.divergence(&f);
        for c in 0..nc {
            assert!((dense[(c, 0)] - stencil.q[c]).abs() < 1e-13);
        }
    }
}

#[test]
fn divfree_basis_dimension_matches_dense_rank() {
    let g = Grid2D::build(6, 5, 1.0, 1.0).unwrap();
    let part = BoundaryPartition::constant_g(&g, 0.0).unwrap();
    let ops = DiscreteOps::new(&g, &part);
    // admissible face count
    let n_adm = (g.nx - 1) * g.ny + g.nx * (g.ny - 1);
    // dense divergence restricted to admissible faces
    let mut cols = Vec::new();
    for j in 0..g.ny {
        for i in 1..g.nx {
            cols.push((0usize, i, j));
        }
    }
    for j in 1..g.ny {
        for i in 0..g.nx {
            cols.push((1usize, i, j));
        }
    }
    assert_eq!(cols.len(), n_adm);
    let mut mat = DMatrix::<f64>::zeros(g.n_cells(), n_adm);
    for (c, &(comp, i, j)) in cols.iter().enumerate() {
        let mut f = FaceField::zeros(&g);
        if comp == 0 {
            f.u[g.uidx(i, j)] = 1.0;
        } else {
            f.v[g.vidx(i, j)] = 1.0;
        }
        let d = ops.divergence(&f);
        for r in 0..g.n_cells() {
            mat[(r, c)] = d.q[r];
        }
    }
    let rank = mat.svd(false, false).rank(1e-10);
    let basis = divfree_basis(&ops).unwrap();
    assert_eq!(basis.dim(), n_adm - rank);
    // and the analytic count
    assert_eq!(basis.dim(), (g.nx - 1) * (g.ny - 1));
}

#[test]
fn lambda_min_stable_under_refinement() {
    let l_coarse = {
        let g = Grid2D::build(16, 16, 1.0, 1.0).unwrap();
        let p = BoundaryPartition::constant_g(&g, 0.0).unwrap();
        DiscreteOps::new(&g, &p)
            .compute_lambda_min(1e-10, 300)
            .unwrap()
            .lambda
    };
    let l_fine = {
        let g = Grid2D::build(32, 32, 1.0, 1.0).unwrap();
        let p = BoundaryPartition::constant_g(&g, 0.0).unwrap();
        DiscreteOps::new(&g, &p)
            .compute_lambda_min(1e-10, 300)
            .unwrap()
            .lambda
    };
    assert!(
        (l_coarse - l_fine).abs() <= 0.05 * l_fine,
        "lambda drifted: {l_coarse} vs {l_fine}"
    );
}
