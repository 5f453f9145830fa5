use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tpcalc::ainf::{
    add_term, bar_differential, basis, cone_differential, contracting_homotopy, maurer_cartan_check, pure, star_product, tw_hom, twist,
    twisted_cone, unit_reach, unit_witness_level, verify_abouzaid_diagram, verify_lambda_homotopy, BarComplex, Builder, Category, Matrix,
    Module, Object, TableModule, TensorChain, TwistedComplex, Vector,
};
use tpcalc::fukaya_models::{build_single_equator, build_sphere, build_torus};
use tpcalc::novikov_complex::concise_barcode;
use tpcalc::q::{q, qi};
use tpcalc::{Error, Ext, Nov};

fn single() -> Category {
    build_single_equator(qi(0)).unwrap().cat
}

fn mono(e: tpcalc::Q) -> Nov {
    Nov::mono(e)
}

/// `T^{-1/2} a⊗a⊗a + e⊗pt⊗e` with `a = pt + T^{1/4} e`, as a bar chain.
fn single_witness(a: &Category) -> TensorChain {
    let (e, pt) = (a.gen_id("e_L").unwrap(), a.gen_id("pt_L").unwrap());
    let mut h = TensorChain::new();
    for mask in 0..8u32 {
        let t: Vec<usize> = (0..3).map(|i| if mask >> i & 1 == 1 { e } else { pt }).collect();
        add_term(&mut h, t, &mono(q(mask.count_ones() as i64, 4) - q(1, 2)));
    }
    add_term(&mut h, vec![e, pt, e], &Nov::one());
    h
}

fn random_cone_element(a: &Category, k: usize, rng: &mut ChaCha8Rng, max_len: usize) -> TensorChain {
    let mut x = TensorChain::new();
    for _ in 0..rng.gen_range(1..=4) {
        let len = rng.gen_range(1..=max_len);
        let ts = a.tuples(len, Some(k), Some(k), &|_| true);
        let t = ts[rng.gen_range(0..ts.len())].clone();
        add_term(&mut x, t, &mono(q(rng.gen_range(-2..=4), 4)));
    }
    x
}

fn sum(a: &TensorChain, b: &TensorChain) -> TensorChain {
    let mut out = a.clone();
    for (t, c) in b {
        add_term(&mut out, t.clone(), c);
    }
    out
}

#[test]
fn corrupted_table_fails_relations() {
    let m = build_sphere(2, qi(0)).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&m.cat.to_json()).unwrap();
    let entry = v["mu"].as_array_mut().unwrap().iter_mut().find(|e| e["order"] == 3).unwrap();
    entry["output_terms"][0]["novikov"] = "T^1/3".into();
    let bad = Category::parse_json(&v.to_string()).unwrap();
    let r = bad.verify_ainf(4);
    assert!(!r.passed());
    assert!(m.cat.verify_ainf(4).passed());
}

#[test]
fn json_round_trip() {
    for cat in [single(), build_sphere(3, q(1, 7)).unwrap().cat, build_torus(3, 1, qi(5), q(1, 9)).unwrap().cat] {
        let back = Category::parse_json(&cat.to_json()).unwrap();
        let id = |g: usize| back.gen_id(&cat.gens[g].name).unwrap();
        assert_eq!(back.objects, cat.objects);
        assert_eq!(back.gens.len(), cat.gens.len());
        for (g, h) in cat.gens.iter().enumerate() {
            assert_eq!(&back.gens[id(g)], h);
        }
        assert_eq!(back.table_len(), cat.table_len());
        for (t, v) in cat.table_entries() {
            let t: Vec<usize> = t.iter().map(|&g| id(g)).collect();
            let v: Vector = v.iter().map(|(&g, c)| (id(g), c.clone())).collect();
            assert_eq!(back.mu(&t).unwrap(), v);
        }
    }
}

#[test]
fn rejects_bad_tables() {
    let mut b = Builder::new(2, 1);
    let k = b.object(Object::new("K"), "e");
    let x = b.gen("x", k, k, 1, qi(0));
    let mut v = Vector::new();
    add_term(&mut v, x, &Nov::one());
    b.set(vec![x, x], v.clone());
    assert!(matches!(b.clone().build(2), Err(Error::Precondition(_))), "degree check");
    let mut b2 = Builder::new(2, 1);
    let k = b2.object(Object::new("K"), "e");
    let x = b2.gen("x", k, k, 0, qi(0));
    let mut v = Vector::new();
    add_term(&mut v, x, &mono(q(-1, 2)));
    b2.set(vec![x, x], v);
    assert!(matches!(b2.build(2), Err(Error::Precondition(_))), "level check");
}

#[test]
fn uncovered_tuples_are_reported() {
    let t = build_torus(1, 1, qi(5), qi(0)).unwrap();
    let r = t.cat.verify_ainf(3);
    assert!(r.passed());
    assert!(!r.uncheckable.is_empty());
    let (a, c) = (t.g("a_xy"), t.g("pt_y"));
    assert!(matches!(t.cat.mu(&[a, c, c]), Err(Error::Coverage(_))));
}

#[test]
fn unit_only_category() {
    let mut b = Builder::new(2, 1);
    let k = b.object(Object::new("K"), "e_K");
    let a = b.build(2).unwrap();
    assert!(a.verify_ainf(5).passed());
    assert_eq!(unit_reach(&a, &[k], k, 2).unwrap(), Ext::Fin(qi(0)));
}

#[test]
fn empty_and_unreachable_bar_complexes() {
    let a = single();
    let bar = BarComplex::build(&a, &[], 0, 3).unwrap();
    assert!(bar.tensors.is_empty());
    assert_eq!(unit_reach(&a, &[], 0, 3).unwrap(), Ext::Inf);
    let mut b = Builder::new(2, 1);
    let k = b.object(Object::new("K"), "e_K");
    let l = b.object(Object::new("L"), "e_L");
    let x = b.build(2).unwrap();
    assert_eq!(unit_reach(&x, &[l], k, 3).unwrap(), Ext::Inf);
}

#[test]
fn bar_differential_squares_to_zero() {
    let a = single();
    let bar = BarComplex::build(&a, &[0], 0, 4).unwrap();
    for t in &bar.tensors {
        let d = bar_differential(&a, &pure(t.clone())).unwrap();
        assert!(bar_differential(&a, &d).unwrap().is_empty());
    }
    let s = build_sphere(2, q(1, 10)).unwrap().cat;
    assert!(BarComplex::build(&s, &[0, 1], 0, 3).is_ok());
    assert!(BarComplex::build(&s, &[1], 0, 4).is_ok());
}

#[test]
fn unit_witness_on_single_equator() {
    let a = single();
    let h = single_witness(&a);
    assert!(bar_differential(&a, &h).unwrap().is_empty());
    assert_eq!(a.mu_chain(&h).unwrap(), basis(a.unit(0)));
    assert_eq!(unit_witness_level(&a, &[0], 0, &h, &Vector::new()).unwrap(), q(1, 2));
    let reach = unit_reach(&a, &[0], 0, 2).unwrap();
    assert!(reach <= Ext::Fin(q(1, 2)));
    assert_eq!(reach, Ext::Fin(qi(0)));
}

#[test]
fn sphere_unit_reach() {
    let m = build_sphere(2, q(1, 10)).unwrap();
    // through the other circle the cheapest route is e_1 ⊗ n_1 ⊗ s_1' rescaled
    let r = unit_reach(&m.cat, &[1], 0, 2).unwrap();
    assert!(r <= Ext::Fin(q(1, 4) + q(1, 5)), "{r:?}");
    assert!(r >= Ext::Fin(qi(0)));
}

#[test]
fn star_leibniz_on_random_elements() {
    let a = single();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let x = random_cone_element(&a, 0, &mut rng, 3);
        let y = random_cone_element(&a, 0, &mut rng, 3);
        let lhs = cone_differential(&a, &star_product(&a, &x, &y).unwrap()).unwrap();
        let dx = star_product(&a, &cone_differential(&a, &x).unwrap(), &y).unwrap();
        let dy = star_product(&a, &x, &cone_differential(&a, &y).unwrap()).unwrap();
        assert_eq!(lhs, sum(&dx, &dy));
    }
}

#[test]
fn contracting_homotopy_on_single_equator() {
    let a = single();
    let hom = contracting_homotopy(&a, &[0], 0, &single_witness(&a), &Vector::new()).unwrap();
    assert_eq!(hom.level, q(1, 2));
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let x = random_cone_element(&a, 0, &mut rng, 3);
        assert!(hom.defect(&a, &x).unwrap().is_empty());
        assert_eq!(star_product(&a, &x, &pure(vec![a.unit(0)])).unwrap(), x);
    }
    let mut not_cycle = single_witness(&a);
    add_term(&mut not_cycle, vec![a.unit(0), a.gen_id("pt_L").unwrap(), a.unit(0)], &Nov::one());
    add_term(&mut not_cycle, vec![a.gen_id("pt_L").unwrap(), a.gen_id("pt_L").unwrap()], &Nov::one());
    assert!(contracting_homotopy(&a, &[0], 0, &not_cycle, &Vector::new()).is_err());
}

#[test]
fn twisted_complexes() {
    let a = single();
    let l = TwistedComplex::object(0);
    assert!(maurer_cartan_check(&a, &l).unwrap());
    let tl = twist(&a, 0, &l).unwrap();
    assert_eq!(tl.len(), 1 + a.hom(0, 0).len());
    assert!(maurer_cartan_check(&a, &tl).unwrap());
    let h = tw_hom(&a, &l, &tl).unwrap();
    let b = concise_barcode(&h.complex).unwrap();
    assert_eq!(b.infinite_count(), 2);
    // the cone of the identity is acyclic
    let f = Matrix::from([((0, 0), basis(a.unit(0)))]);
    let cone = twisted_cone(&a, &l, &l, &f, qi(0)).unwrap();
    let hc = tw_hom(&a, &l, &cone).unwrap();
    let bc = concise_barcode(&hc.complex).unwrap();
    assert_eq!(bc.infinite_count(), 0);
    // a level-1/2 cone of the identity has bars of length 1/2
    let slow = twisted_cone(&a, &l, &l, &Matrix::from([((0, 0), basis(a.unit(0)))]), q(1, 2)).unwrap();
    let bs = concise_barcode(&tw_hom(&a, &l, &slow).unwrap().complex).unwrap();
    assert!(bs.finite.iter().all(|x| x.length == q(1, 2)));
    // a non-cycle is rejected
    let pt = a.gen_id("pt_L").unwrap();
    let bad = Matrix::from([((0, 0), basis(pt))]);
    assert!(twisted_cone(&a, &l, &l, &bad, qi(0)).is_err());
}

#[test]
fn twist_on_sphere() {
    let m = build_sphere(2, q(1, 10)).unwrap();
    let x = TwistedComplex::object(0);
    let t = twist(&m.cat, 1, &x).unwrap();
    assert!(maurer_cartan_check(&m.cat, &t).unwrap());
}

#[test]
fn lambda_homotopy() {
    let a = single();
    assert!(verify_lambda_homotopy(&a, 0, &Module::Yoneda(0), 3).unwrap().passed());
    assert!(verify_lambda_homotopy(&a, 0, &Module::Zero, 3).unwrap().passed());
    let tm = TableModule::from_yoneda(&a, 0, 4).unwrap();
    assert!(verify_lambda_homotopy(&a, 0, &Module::Table(tm.clone()), 3).unwrap().passed());
    let mut bad = tm;
    let pt = a.gen_id("pt_L").unwrap();
    let mpt = bad.gen_id("pt_L").unwrap();
    let me = bad.gen_id("e_L").unwrap();
    bad.set(vec![pt, pt], mpt, [(me, mono(q(1, 3)))].into());
    assert!(!verify_lambda_homotopy(&a, 0, &Module::Table(bad), 3).unwrap().passed());
    let s = build_sphere(2, qi(0)).unwrap().cat;
    assert!(verify_lambda_homotopy(&s, 0, &Module::Yoneda(1), 3).unwrap().passed());
}

#[test]
fn abouzaid_diagram() {
    let a = single();
    let r = verify_abouzaid_diagram(&a, &[0], 0, 3, 2).unwrap();
    assert!(r.passed() && r.uncheckable.is_empty() && r.checked > 0);
    let s = build_sphere(2, qi(0)).unwrap().cat;
    let r = verify_abouzaid_diagram(&s, &[0, 1], 0, 3, 2).unwrap();
    assert!(r.passed() && r.uncheckable.is_empty() && r.checked > 0);
}

#[test]
fn shifted_category() {
    let s = build_sphere(2, q(1, 10)).unwrap().cat;
    let (t, rep) = s.shift_category(q(1, 3)).unwrap();
    assert!(rep.passed());
    assert!(t.verify_ainf(3).passed());
    // all circles share one family, so nothing moves
    assert_eq!(t.gens, s.gens);
    let tor = build_torus(1, 1, qi(4), qi(0)).unwrap().cat;
    let (u, rep) = tor.shift_category(q(1, 2)).unwrap();
    assert!(rep.passed());
    let a = u.gen_id("a_xy").unwrap();
    assert_eq!(u.gens[a].level, q(1, 2));
    assert!(tor.shift_category(q(-1, 2)).is_err());
}
