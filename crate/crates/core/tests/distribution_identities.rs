use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use tailmix_core::distributions::{
    constrained_phi, discrete_power_law_log_pmf, DiscretePowerLaw, gpd_conditional_density, mixture_log_pmf,
    mixture_log_survival, pareto_density, sample_mixture_seeded,
};
use tailmix_core::special::hurwitz_zeta;
use tailmix_core::{BulkKind, MixturePmf, MixtureSpec, ParamVector};

fn rng(seed: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// Random valid parameters with the given tail shape. `phi_u` is resolved for
/// the constrained mode and drawn uniformly otherwise.
fn random_params(r: &mut Xoshiro256PlusPlus, spec: &MixtureSpec, xi2: f64) -> ParamVector {
    loop {
        let xi1 = r.random_range(0.2..5.0);
        let sigma = r.random_range(0.3..8.0);
        let u = r.random_range(1..40u64);
        if sigma + xi2 * u as f64 <= 0.05 {
            continue;
        }
        let phi = if spec.constrained {
            constrained_phi(spec.bulk, xi1, xi2, sigma, u).unwrap()
        } else {
            r.random_range(0.01..0.6)
        };
        if let Ok(p) = ParamVector::new(xi1, xi2, sigma, u, phi) {
            return p;
        }
    }
}

fn specs() -> Vec<MixtureSpec> {
    let mut v = Vec::new();
    for bulk in [BulkKind::Geometric, BulkKind::PowerLaw] {
        for constrained in [false, true] {
            v.push(MixtureSpec::new(bulk, constrained));
        }
    }
    v
}

#[test]
fn mass_sums_to_one_for_every_family() {
    const UPPER: u64 = 1_000_000;
    let mut r = rng(11);
    for spec in specs() {
        for xi2 in [-0.4, 0.0, 0.5, 2.0] {
            for _ in 0..2 {
                let p = random_params(&mut r, &spec, xi2);
                let f = MixturePmf::new(&spec, &p).unwrap();
                let mut total = 0.0;
                for x in 1..=UPPER {
                    total += f.pmf(x);
                }
                total += mixture_log_survival(UPPER + 1, &spec, &p).unwrap().exp();
                assert!((total - 1.0).abs() < 1e-8, "{spec:?} {p:?}: {total}");
            }
        }
    }
}

#[test]
fn pmf_and_log_pmf_agree() {
    let mut r = rng(5);
    for spec in specs() {
        for xi2 in [-0.3, 0.0, 1e-9, 0.4, 3.0] {
            let p = random_params(&mut r, &spec, xi2);
            let f = MixturePmf::new(&spec, &p).unwrap();
            for x in [1, p.u, p.u + 1, p.u + 2, p.u + 17, p.u + 5000] {
                let a = f.pmf(x);
                let b = mixture_log_pmf(x, &spec, &p).unwrap().exp();
                assert!((a - b).abs() <= 1e-13 * b.max(1e-300), "{x}: {a} vs {b}");
            }
        }
    }
}

/// Adaptive Simpson quadrature with Richardson correction.
fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Continuous exponential-GPD mixture density written out from scratch.
fn exp_gpd_density(z: f64, p: &ParamVector) -> f64 {
    let u = p.u as f64;
    if z <= 0.0 {
        0.0
    } else if z <= u {
        let norm = 1.0 - (-u / p.xi1).exp();
        (1.0 - p.phi_u) * (-z / p.xi1).exp() / p.xi1 / norm
    } else {
        let su = p.sigma + p.xi2 * u;
        let t = 1.0 + p.xi2 * (z - u) / su;
        if t <= 0.0 {
            0.0
        } else if p.xi2 == 0.0 {
            p.phi_u * (-(z - u) / su).exp() / su
        } else {
            p.phi_u * t.powf(-1.0 / p.xi2 - 1.0) / su
        }
    }
}

#[test]
fn geometric_pmf_is_the_discretised_exponential_gpd() {
    let mut r = rng(23);
    for constrained in [false, true] {
        let spec = MixtureSpec::new(BulkKind::Geometric, constrained);
        for _ in 0..25 {
            let xi2 = r.random_range(-0.4..1.5);
            let p = random_params(&mut r, &spec, xi2);
            for x in [1, p.u, p.u + 1, p.u + 10] {
                let got = mixture_log_pmf(x, &spec, &p).unwrap().exp();
                let want = simpson(&|z| exp_gpd_density(z, &p), (x - 1) as f64, x as f64, 1e-14);
                assert!((got - want).abs() < 1e-8, "x = {x}, {p:?}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn gpd_with_sigma0_xi_mu_is_pareto() {
    let mut r = rng(3);
    for _ in 0..100 {
        let xi = r.random_range(0.05..4.0);
        let mu = r.random_range(0.5..50.0);
        let u = mu + r.random_range(0.0..30.0);
        let z = u * r.random_range(1.0001..100.0);
        let g = gpd_conditional_density(z, u, mu, xi * mu, xi);
        let pa = pareto_density(z, u, 1.0 / xi + 1.0);
        assert!((g - pa).abs() <= 1e-12 * pa, "{g} vs {pa}");
    }
}

#[test]
fn survival_differences_are_the_pmf() {
    let mut r = rng(99);
    let all = specs();
    for i in 0..200 {
        let spec = all[i % all.len()];
        let xi2 = r.random_range(-0.5..2.5);
        let p = random_params(&mut r, &spec, xi2);
        let x = r.random_range(1..(3 * p.u + 30));
        let s0 = mixture_log_survival(x, &spec, &p).unwrap().exp();
        let s1 = mixture_log_survival(x + 1, &spec, &p).unwrap().exp();
        let pmf = mixture_log_pmf(x, &spec, &p).unwrap().exp();
        assert!((s0 - s1 - pmf).abs() < 1e-10, "{x} {p:?}");
        assert!(s1 <= s0);
    }
}

#[test]
fn survival_boundary_values() {
    let mut r = rng(8);
    for spec in specs() {
        let p = random_params(&mut r, &spec, 0.3);
        assert_eq!(mixture_log_survival(1, &spec, &p).unwrap(), 0.0);
        let at = mixture_log_survival(p.u + 1, &spec, &p).unwrap();
        assert!((at - p.phi_u.ln()).abs() < 1e-14);
    }
}

#[test]
fn small_tail_shape_matches_exponential_branch() {
    let mut r = rng(41);
    for spec in specs() {
        let p0 = random_params(&mut r, &spec, 0.0);
        for xi2 in [1e-9, -1e-9, 1e-10, -1e-10] {
            let p = ParamVector { xi2, ..p0 };
            for x in [p.u + 1, p.u + 3, p.u + 40] {
                let a = mixture_log_pmf(x, &spec, &p).unwrap();
                let b = mixture_log_pmf(x, &spec, &p0).unwrap();
                assert!((a - b).abs() < 1e-6, "xi2 = {xi2}, x = {x}: {a} vs {b}");
                let a = mixture_log_survival(x, &spec, &p).unwrap();
                let b = mixture_log_survival(x, &spec, &p0).unwrap();
                assert!((a - b).abs() < 1e-6);
            }
        }
        // far out the gap is a genuine first-order effect in ξ₂, so it must
        // shrink in proportion rather than jump
        let x = p0.u + 400;
        let b = mixture_log_pmf(x, &spec, &p0).unwrap();
        let d1 = mixture_log_pmf(x, &spec, &ParamVector { xi2: 2e-9, ..p0 }).unwrap() - b;
        let d2 = mixture_log_pmf(x, &spec, &ParamVector { xi2: 1e-9, ..p0 }).unwrap() - b;
        assert!((d1 - 2.0 * d2).abs() <= 0.05 * d1.abs() + 1e-9, "{d1} {d2}");
    }
}

#[test]
fn discrete_power_law_normalises() {
    let (alpha, u0) = (2.5, 3);
    let mut total = 0.0;
    let upper = 10_000_000u64;
    let law = DiscretePowerLaw::new(alpha, u0).unwrap();
    for x in u0..=upper {
        total += law.log_pmf(x).exp();
    }
    assert_eq!(law.log_pmf(u0 + 5), discrete_power_law_log_pmf(u0 + 5, alpha, u0).unwrap());
    total += hurwitz_zeta(alpha, (upper + 1) as f64).unwrap() / hurwitz_zeta(alpha, u0 as f64).unwrap();
    assert!((total - 1.0).abs() < 1e-8, "{total}");
    let r = discrete_power_law_log_pmf(7, alpha, u0).unwrap() - discrete_power_law_log_pmf(14, alpha, u0).unwrap();
    assert!((r - alpha * 2f64.ln()).abs() < 1e-13);
}

#[test]
fn draws_match_the_pmf() {
    let n = 1_000_000;
    for (spec, p) in [
        (MixtureSpec::new(BulkKind::Geometric, false), ParamVector::new(3.0, 0.4, 2.0, 8, 0.15).unwrap()),
        (MixtureSpec::new(BulkKind::PowerLaw, false), ParamVector::new(0.8, -0.2, 4.0, 5, 0.3).unwrap()),
    ] {
        let draws = sample_mixture_seeded(&spec, &p, n, 2024).unwrap();
        let nf = n as f64;
        for x in 1..=(p.u + 12) {
            let pm = mixture_log_pmf(x, &spec, &p).unwrap().exp();
            let count = draws.iter().filter(|&&d| d == x).count() as f64;
            let se = (nf * pm * (1.0 - pm)).sqrt();
            assert!((count - nf * pm).abs() <= 3.0 * se.max(1.0), "{spec:?} x = {x}: {count} vs {}", nf * pm);
        }
        let exceed = draws.iter().filter(|&&d| d > p.u).count() as f64 / nf;
        let se = (p.phi_u * (1.0 - p.phi_u) / nf).sqrt();
        assert!((exceed - p.phi_u).abs() <= 3.0 * se);
    }
}
