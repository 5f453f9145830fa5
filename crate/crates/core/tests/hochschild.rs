use tpcalc::ainf::{add_term, pure, TensorChain};
use tpcalc::fukaya_models::{build_single_equator, build_sphere, build_torus, q_h_tilde};
use tpcalc::hochschild::{boundary_depth_of, dcc, degree, hochschild_barcode, is_cycle, normalize, HochschildComplex};
use tpcalc::q::{q, qi};
use tpcalc::{Ext, Nov};

fn chain(terms: &[(Vec<usize>, Nov)]) -> TensorChain {
    let mut c = TensorChain::new();
    for (t, x) in terms {
        add_term(&mut c, t.clone(), x);
    }
    c
}

#[test]
fn unit_is_a_boundary_of_depth_one_half() {
    let m = build_single_equator(qi(0)).unwrap();
    let (e, pt) = (m.g("e_L"), m.g("pt_L"));
    // a = pt + T^{1/4} e; normalization keeps a ⊗ pt ⊗ pt
    let a3 = chain(&[(vec![pt, pt, pt], Nov::mono(q(-1, 2))), (vec![e, pt, pt], Nov::mono(q(-1, 4)))]);
    assert_eq!(dcc(&m.cat, &a3).unwrap(), pure(vec![e]));
    assert_eq!(tpcalc::hochschild::level(&m.cat, &a3), Some(q(1, 2)));
    assert_eq!(boundary_depth_of(&m.cat, &pure(vec![e]), 4).unwrap(), Ext::Fin(q(1, 2)));
    assert_eq!(boundary_depth_of(&m.cat, &pure(vec![pt]), 4).unwrap(), Ext::Inf);
}

#[test]
fn four_fold_point_chain() {
    let m = build_single_equator(qi(0)).unwrap();
    let (e, pt) = (m.g("e_L"), m.g("pt_L"));
    let mut a4 = TensorChain::new();
    for mask in 0..16u32 {
        let t: Vec<usize> = (0..4).map(|i| if mask >> i & 1 == 1 { e } else { pt }).collect();
        add_term(&mut a4, t, &Nov::mono(q(mask.count_ones() as i64, 4)));
    }
    // T^{1/2}(e⊗pt + pt⊗e), where pt⊗e vanishes after normalization
    assert_eq!(dcc(&m.cat, &a4).unwrap(), pure(vec![e, pt]).into_keys().map(|t| (t, Nov::mono(q(1, 2)))).collect());
}

#[test]
fn normalization_drops_late_units() {
    let m = build_single_equator(qi(0)).unwrap();
    let (e, pt) = (m.g("e_L"), m.g("pt_L"));
    assert!(normalize(&m.cat, &pure(vec![pt, e])).is_empty());
    assert_eq!(normalize(&m.cat, &pure(vec![e, pt])).len(), 1);
    assert!(dcc(&m.cat, &pure(vec![pt, e, e])).unwrap().is_empty());
}

#[test]
fn differential_squares_to_zero() {
    let m = build_single_equator(qi(0)).unwrap();
    let hc = HochschildComplex::build(&m.cat, 4).unwrap();
    for (i, t) in hc.tensors.iter().enumerate() {
        let d = dcc(&m.cat, &pure(t.clone())).unwrap();
        assert!(dcc(&m.cat, &d).unwrap().is_empty());
        for s in d.keys() {
            assert_eq!(degree(&m.cat, s), m.cat.reduce(degree(&m.cat, t) - 1), "tensor {i}");
        }
    }
    let s = build_sphere(2, q(1, 10)).unwrap();
    assert!(HochschildComplex::build(&s.cat, 3).is_ok());
}

#[test]
fn single_equator_barcode() {
    let m = build_single_equator(qi(0)).unwrap();
    let b = hochschild_barcode(&m.cat, 4, Some(1)).unwrap();
    assert!(b.finite.iter().any(|x| x.length == q(1, 2)));
    assert!(b.finite.iter().all(|x| x.degree == 1));
}

#[test]
fn torus_correction_term() {
    let p = qi(8);
    let n = 3;
    let m = build_torus(n, 1, p, qi(0)).unwrap();
    let qt = q_h_tilde(q(1, n as i64), p);
    let mut bare = TensorChain::new();
    let mut want = TensorChain::new();
    for j in 1..=n {
        let j1 = j % n + 1;
        let (ax, ay) = (format!("a{j}_xy"), format!("a{j}_yx"));
        let (bx, by) = (format!("a{j1}_xy"), format!("a{j1}_yx"));
        add_term(&mut bare, m.tensor(&[&ax, &by, &bx, &ay]), &Nov::one());
        add_term(&mut want, m.tensor(&[&ax, &ay]), &qt);
        add_term(&mut want, m.tensor(&[&ay, &ax]), &qt);
        let corr = dcc(&m.cat, &pure(m.tensor(&[&format!("e_{j}"), &ax, &ay]))).unwrap();
        assert_eq!(corr, chain(&[(m.tensor(&[&ax, &ay]), Nov::one()), (m.tensor(&[&ay, &ax]), Nov::one())]));
    }
    assert_eq!(dcc(&m.cat, &bare).unwrap(), want);
    assert!(is_cycle(&m.cat, &m.witness).unwrap());
}

#[test]
fn sphere_witness_is_exact_in_the_gauge_model() {
    // the tabulated OC values are not a chain map on this model
    let m = build_sphere(2, qi(0)).unwrap();
    assert_eq!(boundary_depth_of(&m.cat, &m.witness, 3).unwrap(), Ext::Fin(qi(0)));
    let m = build_sphere(3, qi(0)).unwrap();
    assert_eq!(boundary_depth_of(&m.cat, &m.witness, 3).unwrap(), Ext::Fin(q(1, 12)));
}
