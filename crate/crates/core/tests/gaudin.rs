use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use fgaudin::diffop::{DiffOperator, MatrixJet, MultiIndex};
use fgaudin::elliptic::ModularData;
use fgaudin::gaudin::*;
use fgaudin::liealg::*;
use fgaudin::C64;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn coeffs(op: &DiffOperator, h: &[C64]) -> BTreeMap<MultiIndex, DMatrix<C64>> {
    op.coefficients_at(h, 0)
        .unwrap()
        .into_iter()
        .map(|(b, j)| (b, j.value().clone()))
        .collect()
}

/// Max entrywise difference over the union of supports, relative to the larger operator.
fn op_diff(a: &BTreeMap<MultiIndex, DMatrix<C64>>, b: &BTreeMap<MultiIndex, DMatrix<C64>>) -> (f64, f64) {
    let mut keys: Vec<&MultiIndex> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut diff: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for k in keys {
        let za = a.get(k);
        let zb = b.get(k);
        let d = match (za, zb) {
            (Some(x), Some(y)) => max_abs(&(x - y)),
            (Some(x), None) | (None, Some(x)) => max_abs(x),
            (None, None) => 0.0,
        };
        diff = diff.max(d);
        scale = scale.max(za.map(max_abs).unwrap_or(0.0)).max(zb.map(max_abs).unwrap_or(0.0));
    }
    (diff, scale)
}

fn a(rank: usize) -> Arc<RootSystem> {
    Arc::new(build_root_system(Series::A, rank).unwrap())
}

fn irrep(rs: &RootSystem, labels: &[f64]) -> Arc<RepresentedModule> {
    let w = rs
        .weight_from_dynkin(&labels.iter().map(|v| c(*v, 0.0)).collect::<Vec<_>>())
        .unwrap();
    Arc::new(build_irrep(rs, &w).unwrap())
}

fn md() -> ModularData {
    ModularData::new(c(0.1, 0.9)).unwrap()
}

fn fund_fund(z: [C64; 2]) -> GaudinProblem {
    let rs = a(1);
    let f = irrep(&rs, &[1.0]);
    GaudinProblem::new(
        rs,
        md(),
        vec![Site { z: z[0], module: f.clone() }, Site { z: z[1], module: f }],
    )
    .unwrap()
}

// Direct θ₁₁ series and derivative, no lattice reduction.
fn theta(z: C64, tau: C64) -> (C64, C64) {
    let mut v = c(0.0, 0.0);
    let mut d = c(0.0, 0.0);
    for n in -40..=40 {
        let k = n as f64 + 0.5;
        let e = (c(0.0, PI) * tau * k * k + c(0.0, 2.0 * PI) * (z + 0.5) * k).exp();
        v += e;
        d += e * c(0.0, 2.0 * PI * k);
    }
    (v, d)
}

fn w_direct(cc: C64, z: C64, tau: C64) -> C64 {
    let tp0 = theta(c(0.0, 0.0), tau).1;
    tp0 * theta(z - cc, tau).0 / (theta(z, tau).0 * theta(-cc, tau).0)
}

fn zeta_direct(z: C64, tau: C64) -> C64 {
    let (v, d) = theta(z, tau);
    d / v
}

fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

#[test]
fn transfer_matches_straight_line_oracle() {
    let tau = c(0.1, 0.9);
    let z = [c(0.1, 0.05), c(0.55, 0.3)];
    let p = fund_fund(z);
    assert_eq!(p.dim(), 2);
    // sl2 fundamental: basis (v+, v−).
    let e = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
    let f = e.transpose();
    let h1 = DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]) / c(2f64.sqrt(), 0.0);
    let id = DMatrix::<C64>::identity(2, 2);
    let at = |m: &DMatrix<C64>, site: usize| if site == 0 { kron(m, &id) } else { kron(&id, m) };
    // V(0) inside the product basis (index 2a + b): (+,−) = 1 and (−,+) = 2.
    let zero = [1usize, 2usize];
    let restrict = |m: &DMatrix<C64>| DMatrix::from_fn(2, 2, |r, s| m[(zero[r], zero[s])]);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pts = sample_points(&p.rs, 5, &SampleBox::default(), &mut rng);
    for (k, h) in pts.iter().enumerate() {
        let u = c(0.3 + 0.07 * k as f64, -0.2 + 0.05 * k as f64);
        let op = build_transfer(&p, u).unwrap();
        let got = coeffs(&op, h);
        let xa = c(2f64.sqrt(), 0.0) * h[0];
        let zeta: Vec<C64> = z.iter().map(|zi| zeta_direct(zi - u, tau)).collect();
        // ∇ = ∂ − Z with Z constant ⇒ ½∇² = ½∂² − Z∂ + ½Z².
        let zmat = restrict(&(at(&h1, 0) * zeta[0] + at(&h1, 1) * zeta[1])).transpose();
        let mut pot = DMatrix::zeros(2, 2);
        for (ea, ema, sgn) in [(&e, &f, 1.0), (&f, &e, -1.0)] {
            for i in 0..2 {
                for j in 0..2 {
                    let wa = w_direct(xa * sgn, z[i] - u, tau);
                    let wb = w_direct(-xa * sgn, z[j] - u, tau);
                    // ρ*_j(e_{−α}) ρ*_i(e_α) is the transpose of ρ_i(e_α) ρ_j(e_{−α}).
                    let v = at(ea, i) * at(ema, j);
                    pot += restrict(&v).transpose() * (wa * wb * 0.5);
                }
            }
        }
        let mut want = BTreeMap::new();
        want.insert(vec![2], id.clone() * c(0.5, 0.0));
        want.insert(vec![1], -zmat.clone());
        want.insert(vec![0], &zmat * &zmat * c(0.5, 0.0) + pot);
        let (d, s) = op_diff(&got, &want);
        assert!(d <= 1e-12 * s, "sample {k}: diff {d}, scale {s}");
    }
}

#[test]
fn trivial_sites_give_the_flat_laplacian() {
    let rs = a(2);
    let triv = irrep(&rs, &[0.0, 0.0]);
    let p = GaudinProblem::new(
        rs.clone(),
        md(),
        vec![Site { z: c(0.1, 0.0), module: triv.clone() }, Site { z: c(0.4, 0.2), module: triv }],
    )
    .unwrap();
    assert_eq!(p.dim(), 1);
    let h = [c(0.13, 0.02), c(0.31, -0.05)];
    let got = coeffs(&build_transfer(&p, c(0.7, 0.1)).unwrap(), &h);
    for (b, m) in &got {
        let want = if b.iter().sum::<u32>() == 2 && b.iter().any(|v| *v == 2) { 0.5 } else { 0.0 };
        assert!((m[(0, 0)] - c(want, 0.0)).norm() < 1e-15, "{b:?}");
    }
    for r in 0..2 {
        let nab = coeffs(&build_nabla(&p, r, c(0.7, 0.1)).unwrap(), &h);
        for (b, m) in nab {
            let want = if b.iter().sum::<u32>() == 1 && b[r] == 1 { 1.0 } else { 0.0 };
            assert!((m[(0, 0)] - c(want, 0.0)).norm() < 1e-15);
        }
    }
}

#[test]
fn nabla_single_site_and_constant_coefficients() {
    let rs = a(1);
    let adj = irrep(&rs, &[2.0]);
    let p = GaudinProblem::new(rs.clone(), md(), vec![Site { z: c(0.2, 0.1), module: adj }]).unwrap();
    let u = c(0.45, -0.3);
    let nab = build_nabla(&p, 0, u).unwrap();
    let zeta = fgaudin::elliptic::zeta11(c(0.2, 0.1) - u, &p.md, 0).unwrap().value();
    let h = [c(0.2, 0.05)];
    for (b, j) in nab.coefficients_at(&h, 3).unwrap() {
        if b[0] == 0 {
            let want = -DMatrix::from_diagonal(p.dual_cartan(0, 0)) * zeta;
            assert!(max_abs(&(j.value() - want)) < 1e-15);
        }
        for k in 1..j.coeffs.len() {
            assert_eq!(max_abs(&j.coeffs[k]), 0.0);
        }
    }
}

#[test]
fn potential_preserves_zero_weight_space() {
    // Every hopping block maps V*(0) into itself, and its transpose chain stays at weight zero.
    let rs = a(2);
    let m1 = irrep(&rs, &[1.0, 0.0]);
    let m2 = irrep(&rs, &[0.0, 1.0]);
    let m3 = irrep(&rs, &[1.0, 1.0]);
    let p = GaudinProblem::new(
        rs.clone(),
        md(),
        vec![
            Site { z: c(0.0, 0.0), module: m1 },
            Site { z: c(0.3, 0.2), module: m2 },
            Site { z: c(0.6, 0.5), module: m3 },
        ],
    )
    .unwrap();
    assert!(p.dim() > 0);
    for k in 0..rs.roots().len() {
        let ea = rs.basis_index(BasisElement::Root(k));
        let ema = rs.basis_index(BasisElement::Root(rs.negative_of(k)));
        for i in 0..3 {
            for j in 0..3 {
                for t in p.space.basis() {
                    for (t2, v) in p.space.apply_chain(t, &[(j, ema), (i, ea)]) {
                        if v.norm() > 0.0 {
                            assert!(p.space.index_of(&t2).is_some());
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn invalid_configurations_are_rejected() {
    let rs = a(1);
    let f = irrep(&rs, &[1.0]);
    let tau = c(0.1, 0.9);
    let err = GaudinProblem::new(
        rs.clone(),
        md(),
        vec![
            Site { z: c(0.2, 0.1), module: f.clone() },
            Site { z: c(0.2, 0.1) + tau + 1.0, module: f.clone() },
        ],
    )
    .unwrap_err();
    assert_eq!(err, GaudinError::SitesCoincide { i: 0, j: 1 });
    assert_eq!(GaudinProblem::new(rs.clone(), md(), vec![]).unwrap_err(), GaudinError::NoSites);
    let p = fund_fund([c(0.1, 0.05), c(0.55, 0.3)]);
    assert!(matches!(
        build_transfer(&p, c(0.1, 0.05) - tau),
        Err(GaudinError::SpectralAtSite { site: 0 })
    ));
    let op = build_transfer(&p, c(0.3, 0.1)).unwrap();
    // α(H) = √2 ξ = 1.
    let h = [c(1.0 / 2f64.sqrt(), 0.0)];
    assert!(op.coefficients_at(&h, 0).is_err());
    assert!(matches!(check_in_s(&p.rs, &h), Err(GaudinError::NotInS { .. })));
}

#[test]
fn transfer_is_periodic_in_u() {
    let p = fund_fund([c(0.1, 0.05), c(0.55, 0.3)]);
    let h = [c(0.23, 0.04)];
    for u in [c(0.3, 0.1), c(-0.4, 0.6), c(0.8, -0.35)] {
        let a1 = coeffs(&build_transfer(&p, u).unwrap(), &h);
        let a2 = coeffs(&build_transfer(&p, u + 1.0).unwrap(), &h);
        let (d, _) = op_diff(&a1, &a2);
        assert!(d <= 1e-10, "{d}");
    }
}

#[test]
fn swapping_identical_sites_conjugates_by_the_flip() {
    let rs = a(2);
    let m = irrep(&rs, &[1.0, 1.0]);
    let other = irrep(&rs, &[0.0, 0.0]);
    let zs = [c(0.05, 0.1), c(0.4, 0.35), c(0.7, -0.1)];
    let mk = |order: [usize; 3]| {
        let mods = [m.clone(), m.clone(), other.clone()];
        GaudinProblem::new(
            rs.clone(),
            md(),
            order.iter().map(|&k| Site { z: zs[k], module: mods[k].clone() }).collect(),
        )
        .unwrap()
    };
    let p = mk([0, 1, 2]);
    let q = mk([1, 0, 2]);
    let n = p.dim();
    // Permutation: tuple (a, b, c) in p ↔ (b, a, c) in q.
    let mut perm = DMatrix::zeros(n, n);
    for (i, t) in p.space.basis().iter().enumerate() {
        let j = q.space.index_of(&[t[1], t[0], t[2]]).unwrap();
        perm[(j, i)] = c(1.0, 0.0);
    }
    let h = [c(0.17, 0.03), c(0.29, -0.06)];
    let u = c(0.61, 0.22);
    let a1 = coeffs(&build_transfer(&p, u).unwrap(), &h);
    let a2 = coeffs(&build_transfer(&q, u).unwrap(), &h);
    for (b, mp) in &a1 {
        let mq = &a2[b];
        let conj = &perm * mp * perm.transpose();
        assert!(max_abs(&(conj - mq)) <= 1e-12 * max_abs(mp).max(1.0), "{b:?}");
    }
}

#[test]
fn pi_parity_and_log_derivatives() {
    for rank in 1..=3 {
        let rs = a(rank);
        let m = md();
        let mut rng = ChaCha8Rng::seed_from_u64(rank as u64);
        for h in sample_points(&rs, 3, &SampleBox::default(), &mut rng) {
            let p = weyl_kac_pi(&h, &m, &rs, 2).unwrap();
            let neg: Vec<C64> = h.iter().map(|v| -v).collect();
            let pn = weyl_kac_pi(&neg, &m, &rs, 0).unwrap();
            let sign = if rs.num_positive() % 2 == 0 { 1.0 } else { -1.0 };
            assert!((pn.value / p.value - c(sign, 0.0)).norm() < 1e-10);
            for r in 0..rank {
                let step = 1e-5;
                let mut hp = h.clone();
                let mut hm = h.clone();
                hp[r] += step;
                hm[r] -= step;
                let vp = weyl_kac_pi(&hp, &m, &rs, 0).unwrap().value;
                let vm = weyl_kac_pi(&hm, &m, &rs, 0).unwrap().value;
                let fd = (vp - vm) / (2.0 * step) / p.value;
                let got = p.dlog(r).value()[(0, 0)];
                assert!((got - fd).norm() <= 1e-6 * got.norm().max(1.0));
            }
            // Jets of Π and 1/Π are reciprocal.
            let prod = p.pi.mul(&p.inv).unwrap();
            assert!((prod.value()[(0, 0)] - c(1.0, 0.0)).norm() < 1e-12);
            for k in 1..prod.coeffs.len() {
                assert!(prod.coeffs[k][(0, 0)].norm() < 1e-9);
            }
        }
    }
}

#[test]
fn pi_tau_derivative_matches_finite_difference() {
    let rs = a(2);
    let tau = c(0.1, 0.9);
    let h = [c(0.21, 0.03), c(-0.37, 0.02)];
    let p = weyl_kac_pi(&h, &ModularData::new(tau).unwrap(), &rs, 0).unwrap();
    let step = 1e-5;
    let val = |t: C64| weyl_kac_pi(&h, &ModularData::new(t).unwrap(), &rs, 0).unwrap().value;
    let fd = (val(tau + step) - val(tau - step)) / (2.0 * step) / p.value;
    let got = p.dtau_log.value()[(0, 0)];
    assert!((got - fd).norm() <= 1e-6 * got.norm());
}

#[test]
fn pi_trigonometric_limit() {
    let rs = a(2);
    let m = ModularData::from_nome(c(1e-12, 0.0)).unwrap();
    let h = [c(0.21, 0.03), c(-0.37, 0.02)];
    let p = weyl_kac_pi(&h, &m, &rs, 0).unwrap();
    let mut want = m.q().powf(rs.dim() as f64 / 24.0);
    for k in 0..rs.num_positive() {
        let x = rs.root_value(k, &h);
        want *= (c(0.0, PI) * x).exp() - (c(0.0, -PI) * x).exp();
    }
    assert!((p.value / want - c(1.0, 0.0)).norm() <= 1e-8);
}

#[test]
fn tilde_routes_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p = fund_fund([c(0.1, 0.05), c(0.55, 0.3)]);
    let pts = sample_points(&p.rs, 10, &SampleBox::default(), &mut rng);
    for (k, h) in pts.iter().enumerate() {
        let u = c(0.25 + 0.05 * k as f64, -0.15 + 0.03 * k as f64);
        let a1 = coeffs(&build_tilde_transfer(&p, u, TildeRoute::Conjugation).unwrap(), h);
        let a2 = coeffs(&build_tilde_transfer(&p, u, TildeRoute::Explicit).unwrap(), h);
        let (d, s) = op_diff(&a1, &a2);
        assert!(d <= 1e-6 * s, "sample {k}: {d} vs {s}");
    }
}

#[test]
fn tilde_routes_agree_for_a2() {
    let rs = a(2);
    let m1 = irrep(&rs, &[1.0, 0.0]);
    let m2 = irrep(&rs, &[0.0, 1.0]);
    let p = GaudinProblem::new(
        rs.clone(),
        md(),
        vec![Site { z: c(0.0, 0.1), module: m1 }, Site { z: c(0.45, 0.4), module: m2 }],
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for h in sample_points(&rs, 3, &SampleBox::default(), &mut rng) {
        let u = c(0.7, -0.2);
        let a1 = coeffs(&build_tilde_transfer(&p, u, TildeRoute::Conjugation).unwrap(), &h);
        let a2 = coeffs(&build_tilde_transfer(&p, u, TildeRoute::Explicit).unwrap(), &h);
        let (d, s) = op_diff(&a1, &a2);
        assert!(d <= 1e-6 * s, "{d} vs {s}");
    }
}

#[test]
fn conjugation_by_one_is_identity() {
    let p = fund_fund([c(0.1, 0.05), c(0.55, 0.3)]);
    let u = c(0.3, 0.2);
    let t = build_transfer(&p, u).unwrap();
    let one = |at: &[C64], order: usize| Ok(MatrixJet::scalar_constant(at, order, c(1.0, 0.0)));
    let conj = conjugate(&t, one, one).unwrap();
    let h = [c(0.2, 0.05)];
    let (d, _) = op_diff(&coeffs(&t, &h), &coeffs(&conj, &h));
    assert_eq!(d, 0.0);
}

#[test]
fn transfer_commutes_for_fund_fund() {
    let p = fund_fund([c(0.1, 0.05), c(0.55, 0.3)]);
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let pts = sample_points(&p.rs, 20, &SampleBox::default(), &mut rng);
    for (k, h) in pts.iter().enumerate() {
        let u = c(0.3 - 0.02 * k as f64, 0.1 + 0.03 * k as f64);
        let u2 = c(-0.45 + 0.04 * k as f64, 0.5 - 0.02 * k as f64);
        let rep = commutativity_residual(&p, u, u2, std::slice::from_ref(h)).unwrap();
        assert!(rep.max_normalized <= 1e-8, "sample {k}: {}", rep.max_normalized);
        assert!(rep.max_top_order <= 1e-12);
    }
}

#[test]
fn self_commutator_and_trivial_commutator_vanish() {
    let p = fund_fund([c(0.1, 0.05), c(0.55, 0.3)]);
    let h = vec![vec![c(0.2, 0.05)], vec![c(-0.3, 0.1)]];
    let rep = commutativity_residual(&p, c(0.3, 0.2), c(0.3, 0.2), &h).unwrap();
    assert_eq!(rep.max_normalized, 0.0);
    let rs = a(1);
    let triv = irrep(&rs, &[0.0]);
    let q = GaudinProblem::new(rs, md(), vec![Site { z: c(0.0, 0.0), module: triv }]).unwrap();
    let rep = commutativity_residual(&q, c(0.3, 0.2), c(0.7, -0.1), &h).unwrap();
    assert_eq!(rep.max_normalized, 0.0);
}

#[test]
fn samples_stay_away_from_root_hyperplanes() {
    let rs = a(3);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let bx = SampleBox::default();
    for h in sample_points(&rs, 50, &bx, &mut rng) {
        for k in 0..rs.roots().len() {
            let v = rs.root_value(k, &h);
            assert!((v - c(v.re.round(), 0.0)).norm() >= bx.margin);
        }
        assert!(h.iter().all(|x| x.re >= bx.re.0 && x.re < bx.re.1 && x.im >= bx.im.0 && x.im < bx.im.1));
    }
}
