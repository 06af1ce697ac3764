//! Property tests for the algebraic invariants.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use quadspec_core::lattice::{enumerate_spectrum, LatticeGenerator, SpectralLattice, ENUMERATION_CAP};
use quadspec_core::probe::OmegaRegion;
use quadspec_core::symplectic::{
    hamilton_map, verify_hamilton_identities, PhasePoint, QuadraticSymbol,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn symbol_from_entries(n: usize, entries: Vec<(f64, f64)>) -> QuadraticSymbol {
    let d = 2 * n;
    let mut m = Array2::zeros((d, d));
    let mut it = entries.into_iter().cycle();
    for i in 0..d {
        for j in i..d {
            let (re, im) = it.next().unwrap();
            let v = C64::new(re, im);
            m[[i, j]] = v;
            m[[j, i]] = v;
        }
    }
    QuadraticSymbol::new(n, m).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hamilton_identities_hold(
        n in 1usize..=3,
        entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 28),
        seed in 0u64..1000,
    ) {
        let q = symbol_from_entries(n, entries);
        let f = hamilton_map(&q);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let report = verify_hamilton_identities(&q, &f, 100, &mut rng).unwrap();
        let scale = q.norm().max(f64::MIN_POSITIVE);
        prop_assert!(report.max_residual() <= 1e-12 * scale);
        prop_assert!(report.trace_abs <= 1e-12 * f.norm().max(f64::MIN_POSITIVE));
    }

    #[test]
    fn polarization_identity(
        entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 10),
        x in prop::collection::vec(-1.0f64..1.0, 4),
        y in prop::collection::vec(-1.0f64..1.0, 4),
    ) {
        let q = symbol_from_entries(2, entries);
        let px = PhasePoint::from_real(&x).unwrap();
        let py = PhasePoint::from_real(&y).unwrap();
        let sum = PhasePoint::new(px.coords() + py.coords()).unwrap();
        let lhs = q.polarized(&px, &py).unwrap();
        let rhs = (q.eval(&sum).unwrap() - q.eval(&px).unwrap() - q.eval(&py).unwrap())
            / C64::new(2.0, 0.0);
        prop_assert!((lhs - rhs).norm() <= 1e-12 * q.norm().max(1.0));
    }

    #[test]
    fn enumeration_stable_under_reordering(
        re1 in 0.2f64..2.0,
        im1 in -1.0f64..1.0,
        re2 in 0.2f64..2.0,
        im2 in -1.0f64..1.0,
        r1 in 1usize..=3,
        r2 in 1usize..=3,
        radius in 2.0f64..10.0,
    ) {
        let g1 = LatticeGenerator { mu_re: re1, mu_im: im1, r: r1, on_ray: false };
        let g2 = LatticeGenerator { mu_re: re2, mu_im: im2, r: r2, on_ray: false };
        let a = SpectralLattice { generators: vec![g1.clone(), g2.clone()], n: r1 + r2, r_total: r1 + r2 };
        let b = SpectralLattice { generators: vec![g2, g1], n: r1 + r2, r_total: r1 + r2 };
        let pa = enumerate_spectrum(&a, radius, ENUMERATION_CAP).unwrap();
        let pb = enumerate_spectrum(&b, radius, ENUMERATION_CAP).unwrap();
        prop_assert_eq!(pa.len(), pb.len());
        for (x, y) in pa.iter().zip(pb.iter()) {
            prop_assert!((x.value() - y.value()).norm() < 1e-10);
        }
    }

    #[test]
    fn omega_membership_monotone(
        k0 in 0usize..=3,
        c in 1.0f64..4.0,
        h in 0.001f64..0.1,
        radius_frac in 0.0f64..1.0,
        phi in 0.0f64..std::f64::consts::PI,
        phi2 in 0.0f64..std::f64::consts::PI,
    ) {
        let c0 = 0.5;
        prop_assume!(c * h < c0);
        let region = OmegaRegion::new(k0, c, c0, h).unwrap();
        let r = c * h + radius_frac * (c0 - c * h);
        // phi measured from the positive real axis; larger phi means
        // smaller real part at fixed modulus.
        let z1 = C64::from_polar(r, phi.min(phi2));
        let z2 = C64::from_polar(r, phi.max(phi2));
        if region.contains(z1) {
            prop_assert!(region.contains(z2), "z1={z1} in, z2={z2} out");
        }
    }
}
