mod common;

use common::*;
use expm_rt::problems::{build_conv_diff, ConvDiffSpec};
use expm_rt::sai::{SaiOperator, SaiProjection};
use expm_rt::sparse::{estimate_norm_2, LinearOperator};
use expm_rt::sparse_lu::BandedLu;
use expm_rt::{ArnoldiDecomposition, CsrMatrix};

#[test]
fn operator_parts_have_the_reported_norms() {
    let p = build_conv_diff(&ConvDiffSpec { mesh: 802, peclet: 200.0 }).unwrap();
    assert_eq!(p.matrix.n(), 640_000);
    let s = estimate_norm_2(&p.diffusion, 60);
    let k = estimate_norm_2(&p.convection, 60);
    assert!((6000.0 / 1.5..=6000.0 * 1.5).contains(&s), "‖S‖ ≈ {s}");
    assert!((0.5 / 1.5..=0.5 * 1.5).contains(&k), "‖K‖ ≈ {k}");
}

#[test]
fn symmetric_and_skew_parts_split_exactly() {
    let p = build_conv_diff(&ConvDiffSpec { mesh: 32, peclet: 100.0 }).unwrap();
    let scale = p.matrix.max_abs_entry();
    let sym = p.matrix.symmetric_part().linear_combination(1.0, -1.0, &p.diffusion).unwrap();
    let skew = p.matrix.skew_part().linear_combination(1.0, -1.0, &p.convection).unwrap();
    assert!(sym.max_abs_entry() <= 1e-15 * scale);
    assert!(skew.max_abs_entry() <= 1e-15 * scale);
    for (i, j, x) in p.convection.triplets() {
        assert_eq!(p.convection.get(j, i), -x);
    }
    let d = Mat::from_csr(&p.diffusion);
    assert!(sym_min_eigenvalue(&d) > 0.0);
}

#[test]
fn shifted_solve_is_accurate() {
    let p = build_conv_diff(&ConvDiffSpec { mesh: 42, peclet: 100.0 }).unwrap();
    let n = p.matrix.n();
    let shifted = CsrMatrix::identity(n).linear_combination(1.0, 0.1, &p.matrix).unwrap();
    let lu = BandedLu::factor(&shifted).unwrap();
    let mut r = rng(41);
    for _ in 0..5 {
        let b: Vec<f64> = (0..n).map(|_| gaussian(&mut r)).collect();
        let mut x = vec![0.0; n];
        lu.solve(&b, &mut x);
        let ax = shifted.apply_vec(&x);
        assert!(vdist(&ax, &b) <= 1e-12 * vnorm(&b));
    }
}

#[test]
fn shift_and_invert_residual_is_flat_with_interior_minimum() {
    let p = build_conv_diff(&ConvDiffSpec { mesh: 102, peclet: 100.0 }).unwrap();
    let op = SaiOperator::new(&p.matrix, 0.1).unwrap();
    let mut d = ArnoldiDecomposition::start(&op, &p.v).unwrap();
    for _ in 0..5 {
        d.step(&op).unwrap();
    }
    let sp = SaiProjection::new(&d, &op).unwrap();
    let curve: Vec<(f64, f64)> = (0..=200)
        .map(|i| {
            let s = i as f64 / 200.0;
            (s, sp.residual_norm(s).unwrap())
        })
        .collect();
    let (s_min, r_min) = curve.iter().copied().fold((0.0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
    let r_max = curve.iter().map(|c| c.1).fold(0.0, f64::max);
    eprintln!("k=5: max/min residual {:.1e}, minimum at s = {s_min}", r_max / r_min);
    assert!(s_min > 0.1 && s_min < 1.0);
    assert!(curve[0].1 > r_min);
}
