use std::collections::HashMap;
use std::sync::Arc;

use approx::assert_relative_eq;
use nalgebra::DMatrix;

use super::*;
use crate::linalg::{dot, norm, random_vector, seeded_rng, sub};
use crate::modes::ModeSet;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn basis(m: usize, n: usize) -> Arc<FockBasis> {
    Arc::new(FockBasis::new(m, n).unwrap())
}

fn ket(b: &FockBasis, occ: &[u16]) -> Vec<C64> {
    let mut v = vec![c(0.0); b.dim()];
    v[b.index(occ).unwrap()] = c(1.0);
    v
}

fn unit_grid(m: usize) -> ModeSet {
    let points = (1..=m).map(|i| i as f64).collect();
    ModeSet::new(3, 0.5, points, vec![1.0; m], (1..=m).map(|i| i as f64).collect()).unwrap()
}

#[test]
fn annihilator_examples() {
    let b = basis(2, 2);
    let a1 = annihilator(0, &b).unwrap();
    let a2 = annihilator(1, &b).unwrap();
    assert!(a1.apply_vec(&ket(&b, &[0, 0])).iter().all(|v| v.norm() == 0.0));
    let out = a1.apply_vec(&ket(&b, &[2, 0]));
    let expect: Vec<C64> = ket(&b, &[1, 0]).iter().map(|v| v * 2f64.sqrt()).collect();
    assert_eq!(out, expect);
    assert_eq!(a2.apply_vec(&ket(&b, &[1, 1])), ket(&b, &[1, 0]));
}

#[test]
fn creator_examples() {
    let b = basis(2, 2);
    let c1 = creator(0, &b).unwrap();
    assert_eq!(c1.apply_vec(&ket(&b, &[0, 0])), ket(&b, &[1, 0]));
    assert!(c1.apply_vec(&ket(&b, &[1, 1])).iter().all(|v| v.norm() == 0.0));
    assert!(c1.apply_vec(&ket(&b, &[0, 2])).iter().all(|v| v.norm() == 0.0));
    let m = dot(&ket(&b, &[1, 0]), &c1.apply_vec(&ket(&b, &[0, 0])));
    assert_eq!(m, c(1.0));
}

#[test]
fn adjoint_of_materialized_annihilator_is_creator() {
    let b = basis(3, 3);
    for i in 0..3 {
        let a = annihilator(i, &b).unwrap().to_csr();
        let cr = creator(i, &b).unwrap().to_csr();
        assert_eq!(a.conj_transpose(), cr);
    }
}

#[test]
fn matrix_free_and_sparse_agree() {
    let b = basis(3, 4);
    let grid = unit_grid(3);
    let mut rng = seeded_rng(5);
    let f = random_vector(&mut rng, 3);
    let x = random_vector(&mut rng, b.dim());
    for op in [
        smeared_annihilator(&f, &grid, &b).unwrap(),
        smeared_creator(&f, &grid, &b).unwrap(),
    ] {
        let dense = op.materialize();
        let d = sub(&op.apply_vec(&x), &dense.apply_vec(&x));
        assert!(norm(&d) < 1e-14);
        let d = sub(&op.adjoint_apply_vec(&x), &dense.adjoint_apply_vec(&x));
        assert!(norm(&d) < 1e-14);
    }
}

#[test]
fn smeared_annihilator_conventions() {
    let b = basis(2, 3);
    let grid = ModeSet::new(3, 0.1, vec![0.5, 1.0], vec![0.25, 4.0], vec![0.5, 1.0]).unwrap();
    // normalized cell function of mode 1
    let f = vec![c(0.0), c(1.0 / 2.0)];
    let af = smeared_annihilator(&f, &grid, &b).unwrap().to_csr();
    assert_eq!(af, annihilator(1, &b).unwrap().to_csr());

    let mut vac = vec![c(0.0); b.dim()];
    vac[0] = c(1.0);
    let g = vec![C64::new(0.3, -1.0), c(2.0)];
    assert!(norm(&smeared_annihilator(&g, &grid, &b).unwrap().apply_vec(&vac)) == 0.0);

    let mut rng = seeded_rng(9);
    let psi = random_vector(&mut rng, b.dim());
    let alpha = C64::new(0.7, 1.3);
    let scaled: Vec<C64> = g.iter().map(|v| alpha * v).collect();
    let lhs = smeared_annihilator(&scaled, &grid, &b).unwrap().apply_vec(&psi);
    let rhs: Vec<C64> = smeared_annihilator(&g, &grid, &b)
        .unwrap()
        .apply_vec(&psi)
        .into_iter()
        .map(|v| alpha.conj() * v)
        .collect();
    assert!(norm(&sub(&lhs, &rhs)) < 1e-13);

    assert!(smeared_annihilator(&[c(1.0)], &grid, &b).is_err());
}

#[test]
fn dgamma_examples() {
    let b = basis(2, 3);
    let d = dgamma(&[0.5, 2.0], &b).unwrap();
    let out = d.apply_vec(&ket(&b, &[1, 1]));
    assert_eq!(out, ket(&b, &[1, 1]).iter().map(|v| v * 2.5).collect::<Vec<_>>());
    let n = number(&b);
    assert!(norm(&n.apply_vec(&ket(&b, &[0, 0]))) == 0.0);
    let d = dgamma(&[2.0, 7.0], &b).unwrap();
    assert_eq!(dot(&ket(&b, &[3, 0]), &d.apply_vec(&ket(&b, &[3, 0]))), c(6.0));
}

#[test]
fn field_examples() {
    let b = basis(1, 4);
    let grid = ModeSet::new(1, 0.5, vec![1.0], vec![4.0], vec![1.0]).unwrap();
    // lam * sqrt(w) = 1
    let phi = field(&[0.5], &grid, &b).unwrap();
    assert!(phi.is_hermitian());
    let m = dot(&ket(&b, &[1]), &phi.apply_vec(&ket(&b, &[0])));
    assert_relative_eq!(m.re, std::f64::consts::FRAC_1_SQRT_2, max_relative = 1e-15);

    let zero = field(&[0.0], &grid, &b).unwrap();
    let mut rng = seeded_rng(1);
    let x = random_vector(&mut rng, b.dim());
    assert!(norm(&zero.apply_vec(&x)) == 0.0);

    let grid3 = ModeSet::new(3, 0.1, vec![0.3, 0.6, 0.9], vec![0.2, 1.5, 3.0], vec![0.3, 0.6, 0.9]).unwrap();
    let b3 = basis(3, 3);
    let lam = [1.2, -0.4, 0.7];
    let phi = field(&lam, &grid3, &b3).unwrap();
    let vac = ket(&b3, &[0, 0, 0]);
    let phi_vac = phi.apply_vec(&vac);
    let expect = grid3.discrete_norm_sqr(&lam) / 2.0;
    assert_relative_eq!(dot(&phi_vac, &phi_vac).re, expect, max_relative = 1e-14);
    assert!(phi.hermiticity_defect(3, 4) < 1e-13);
}

#[test]
fn tensor_examples() {
    let b = basis(2, 2);
    let mut rng = seeded_rng(2);
    let v = random_vector(&mut rng, 2);
    let w = random_vector(&mut rng, b.dim());
    let x = annihilator(1, &b).unwrap();
    let op = fock_only(2, x.clone());
    let lhs = op.apply_vec(&StateVector::product(&v, &w).amplitudes);
    let rhs = StateVector::product(&v, &x.apply_vec(&w)).amplitudes;
    assert!(norm(&sub(&lhs, &rhs)) < 1e-15);

    let a = DMatrix::from_row_slice(2, 2, &[c(1.0), C64::new(0.0, -2.0), C64::new(0.0, 2.0), c(-3.0)]);
    let op = matter_only(a.clone(), b.dim()).materialize();
    let dense = DMatrix::from_fn(op.dim(), op.dim(), |i, j| {
        op.as_csr().unwrap().row(i).find(|&(cc, _)| cc == j).map_or(c(0.0), |t| t.1)
    });
    let (vals, _) = crate::linalg::hermitian_eigen(&dense);
    let (avals, _) = crate::linalg::hermitian_eigen(&a);
    for (k, val) in vals.iter().enumerate() {
        let expect = avals[k / b.dim()];
        assert_relative_eq!(*val, expect, epsilon = 1e-12);
    }
    let grid = unit_grid(2);
    let herm = tensor(a, field(&[1.0, 0.5], &grid, &b).unwrap().materialize());
    assert!(herm.is_hermitian());
    assert!(herm.hermiticity_defect(4, 3) < 1e-13);
}

/// Dense ladder matrices built from a hash-map index, independent of the
/// combinatorial ranking used by `FockBasis`.
fn dense_ladders(m: usize, n_max: usize) -> (Vec<Vec<u16>>, Vec<DMatrix<f64>>, Vec<DMatrix<f64>>) {
    let mut states = Vec::new();
    let mut stack = vec![vec![]];
    while let Some(s) = stack.pop() {
        if s.len() == m {
            states.push(s);
            continue;
        }
        let used: u16 = s.iter().sum();
        for v in 0..=(n_max as u16 - used) {
            let mut t = s.clone();
            t.push(v);
            stack.push(t);
        }
    }
    let idx: HashMap<Vec<u16>, usize> = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    let dim = states.len();
    let mut ann = vec![DMatrix::zeros(dim, dim); m];
    let mut cre = vec![DMatrix::zeros(dim, dim); m];
    for (j, s) in states.iter().enumerate() {
        for i in 0..m {
            if s[i] > 0 {
                let mut t = s.clone();
                t[i] -= 1;
                ann[i][(idx[&t], j)] = (s[i] as f64).sqrt();
            }
            let mut t = s.clone();
            t[i] += 1;
            if let Some(&k) = idx.get(&t) {
                cre[i][(k, j)] = (t[i] as f64).sqrt();
            }
        }
    }
    (states, ann, cre)
}

#[test]
fn brute_force_ccr_interior_and_top_layer() {
    let (states, ann, cre) = dense_ladders(2, 3);
    for i in 0..2 {
        for j in 0..2 {
            let comm = &ann[i] * &cre[j] - &cre[j] * &ann[i];
            for (col, s) in states.iter().enumerate() {
                let total: u16 = s.iter().sum();
                for row in 0..states.len() {
                    let expect = if row == col && i == j { 1.0 } else { 0.0 };
                    if total < 3 {
                        assert!((comm[(row, col)] - expect).abs() < 1e-13);
                    }
                }
            }
            let aa = &ann[i] * &ann[j] - &ann[j] * &ann[i];
            assert!(aa.iter().all(|v| *v == 0.0));
        }
    }
    // the library agrees with the brute-force matrices entry by entry
    let b = basis(2, 3);
    for i in 0..2 {
        let a = annihilator(i, &b).unwrap().to_csr();
        for (r, col, v) in a.triplets() {
            let rr = states.iter().position(|s| s.as_slice() == b.state(r)).unwrap();
            let cc = states.iter().position(|s| s.as_slice() == b.state(col)).unwrap();
            assert_eq!(ann[i][(rr, cc)], v.re);
        }
        assert_eq!(a.nnz(), ann[i].iter().filter(|v| **v != 0.0).count());
    }
}

#[test]
fn top_weight_and_state_vector() {
    let b = basis(2, 2);
    let mut w = vec![c(0.0); b.dim()];
    w[0] = c(0.6);
    w[4] = c(0.8);
    let s = StateVector::product(&[c(1.0), c(0.0)], &w);
    assert_relative_eq!(s.top_weight(&b), 0.64, max_relative = 1e-15);
    assert_relative_eq!(s.norm(), 1.0, max_relative = 1e-15);
    assert_eq!(s.fock_dim(), 6);
    assert!(StateVector::new(2, vec![c(0.0); 5]).is_err());
    let mut amps = s.amplitudes.clone();
    drop_top_layer(&mut amps, &b);
    assert_eq!(top_weight(&amps, &b), 0.0);
}

#[test]
fn composition_and_adjoint() {
    let b = basis(2, 3);
    let a = annihilator(0, &b).unwrap();
    let cr = creator(1, &b).unwrap();
    let prod = cr.clone().compose(a.clone());
    let mut rng = seeded_rng(11);
    let x = random_vector(&mut rng, b.dim());
    let direct = cr.apply_vec(&a.apply_vec(&x));
    assert!(norm(&sub(&prod.apply_vec(&x), &direct)) < 1e-15);
    let sparse = prod.materialize();
    assert!(norm(&sub(&sparse.apply_vec(&x), &direct)) < 1e-14);
    let y = random_vector(&mut rng, b.dim());
    let lhs = dot(&y, &prod.apply_vec(&x));
    let rhs = dot(&prod.adjoint().apply_vec(&y), &x);
    assert!((lhs - rhs).norm() < 1e-13);
    let rhs2 = dot(&prod.adjoint_apply_vec(&y), &x);
    assert!((lhs - rhs2).norm() < 1e-13);
}
