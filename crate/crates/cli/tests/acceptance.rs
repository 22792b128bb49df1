//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};
use std::panic::{self, AssertUnwindSafe};
use std::process::Command;

use dualrail::channels::KrausChannel;
use dualrail::elements::{apply_unitary, post_select, Circuit, CircuitElement};
use dualrail::fock::{FockSpace, ModeOperator, PureState};
use dualrail::regen::{self, DualRailQubit, LinkConfig, Regenerator, TransmitMode};
use dualrail::trajectories::{self, LossModel};
use dualrail::Complex64;
use rand::rngs::StdRng;
use rand::SeedableRng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

/// Binomial standard error of a rate measured over `n` shots.
fn sigma(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

fn ac1_density_closed_form() -> Outcome {
    let space = FockSpace::new(2, 2).map_err(err)?;
    let mut rng = StdRng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for gamma in [0.1, 0.5, 1.0] {
        let channel = KrausChannel::balanced_damping(space, &[0, 1], gamma).map_err(err)?;
        let s = (-gamma).exp();
        for _ in 0..20 {
            let q = DualRailQubit::haar_random(&mut rng);
            let rho = channel
                .apply(&q.state(2).map_err(err)?.to_density())
                .map_err(err)?;
            let amp = |occ: &[usize]| match occ {
                [0, 1] => q.c0(),
                [1, 0] => q.c1(),
                _ => c(0.0, 0.0),
            };
            for row in space.basis() {
                for col in space.basis() {
                    let mut want = amp(row.as_slice()) * amp(col.as_slice()).conj() * s;
                    if row.as_slice() == [0, 0] && col.as_slice() == [0, 0] {
                        want += 1.0 - s;
                    }
                    let got = rho.element(row.as_slice(), col.as_slice()).map_err(err)?;
                    worst = worst.max((got - want).norm());
                }
            }
        }
    }
    check(worst <= 1e-12, format!("max entry error {worst:e}"))?;
    Ok(format!("60 lossy qubits, max entry error {worst:.1e}"))
}

fn ac2_regenerator_chain() -> Outcome {
    let (c0, c1) = (c(0.48, -0.36), c(0.0, 0.8));
    let h = FRAC_1_SQRT_2;
    let space = FockSpace::new(4, 3).map_err(err)?;
    let circuit = regen::build_regenerator(&space).map_err(err)?;
    let input =
        PureState::from_terms(space, &[(c0, &[0, 1, 1, 0]), (c1, &[1, 0, 1, 0])]).map_err(err)?;
    let states = circuit.prefix(4).unitary_trace(&input).map_err(err)?;
    let expected = [
        (
            0,
            vec![
                (c0 * h, [0, 1, 1, 0]),
                (c0 * h, [0, 1, 0, 1]),
                (c1 * h, [1, 0, 1, 0]),
                (c1 * h, [1, 0, 0, 1]),
            ],
        ),
        (
            2,
            vec![
                (-c0 * h, [0, 1, 1, 0]),
                (c0 * h, [0, 1, 0, 1]),
                (-c1 * h, [1, 0, 1, 0]),
                (c1 * h, [1, 0, 0, 1]),
            ],
        ),
        (3, vec![(c0, [0, 1, 0, 1]), (c1, [1, 0, 0, 1])]),
    ];
    for (step, terms) in &expected {
        let terms: Vec<(Complex64, &[usize])> = terms.iter().map(|(a, o)| (*a, &o[..])).collect();
        let want = PureState::from_terms(space, &terms).map_err(err)?;
        check(
            states[*step].approx_eq(&want, 1e-12),
            format!("state after element {step} differs"),
        )?;
    }
    let sel = post_select(&states[3], &[2, 3], &[0, 1]).map_err(err)?;
    check(
        (sel.probability - 1.0).abs() <= 1e-12,
        format!("acceptance probability {}", sel.probability),
    )?;
    let out =
        PureState::from_terms(space, &[(c0, &[0, 1, 0, 1]), (c1, &[1, 0, 0, 1])]).map_err(err)?;
    check(
        sel.state.as_ref().is_some_and(|s| s.approx_eq(&out, 1e-12)),
        "accepted state differs",
    )?;
    Ok("three intermediate states match, accepted with p = 1".into())
}

fn ac3_vacuum_rejected() -> Outcome {
    let space = FockSpace::new(4, 3).map_err(err)?;
    let circuit = regen::build_regenerator(&space).map_err(err)?;
    let vac = PureState::basis(space, &[0, 0, 1, 0]).map_err(err)?;
    let last = circuit
        .prefix(4)
        .unitary_trace(&vac)
        .map_err(err)?
        .pop()
        .ok_or("empty trace")?;
    let p = post_select(&last, &[2, 3], &[1, 0])
        .map_err(err)?
        .probability;
    check(
        (p - 1.0).abs() <= 1e-12,
        format!("probe 10 probability {p}"),
    )?;
    let signal = PureState::vacuum(FockSpace::new(2, 3).map_err(err)?);
    let r = Regenerator::new(3)
        .map_err(err)?
        .regenerate_pure(&signal)
        .map_err(err)?;
    check(
        (r.p_reject - 1.0).abs() <= 1e-12 && r.accepted.is_none(),
        format!("p_reject {}", r.p_reject),
    )?;
    Ok(format!("|0010> exits with probe 10, p = {p}"))
}

fn ac4_acceptance_probability() -> Outcome {
    let regen = Regenerator::new(3).map_err(err)?;
    let mut rng = StdRng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for gamma in [0.05, 0.5, 1.0, 2.0] {
        for _ in 0..10 {
            let psi = DualRailQubit::haar_random(&mut rng).state(3).map_err(err)?;
            let lossy = KrausChannel::balanced_damping(*psi.space(), &[0, 1], gamma)
                .map_err(err)?
                .apply(&psi.to_density())
                .map_err(err)?;
            let p = regen.regenerate(&lossy).map_err(err)?.p_accept;
            worst = worst.max((p - (-gamma).exp()).abs());
        }
    }
    check(worst <= 1e-12, format!("exact error {worst:e}"))?;

    let gamma = 0.5;
    let shots = 100_000;
    let q = DualRailQubit::new(c(0.6, 0.0), c(0.0, 0.8)).map_err(err)?;
    let link = LinkConfig {
        segments: 1,
        loss: LossModel::Exponential {
            gamma_per_step: gamma,
        },
        regenerate_every: 1,
    };
    let r = regen::transmit(&q, &link, TransmitMode::Trajectory { shots, seed: 2024 }, 3)
        .map_err(err)?;
    let target = (-gamma).exp();
    let s = sigma(target, shots);
    let z = (r.p_success - target).abs() / s;
    check(
        z <= 3.0,
        format!("trajectory p = {} vs {target}, {z:.2} sigma", r.p_success),
    )?;
    Ok(format!(
        "exact error {worst:.1e}; trajectory p = {} vs e^-0.5 = {target:.6} ({z:.2} sigma)",
        r.p_success
    ))
}

fn ac5_fidelity_one() -> Outcome {
    let regen = Regenerator::new(3).map_err(err)?;
    let mut rng = StdRng::seed_from_u64(5);
    let mut worst: f64 = 1.0;
    for _ in 0..100 {
        let q = DualRailQubit::haar_random(&mut rng);
        let psi = q.state(3).map_err(err)?;
        for gamma in [0.05, 0.5, 2.0] {
            let lossy = KrausChannel::balanced_damping(*psi.space(), &[0, 1], gamma)
                .map_err(err)?
                .apply(&psi.to_density())
                .map_err(err)?;
            let out = regen.regenerate(&lossy).map_err(err)?;
            let f = out.accepted_qubit().ok_or("nothing accepted")?.fidelity(&q);
            worst = worst.min(f);
        }
    }
    check(worst >= 1.0 - 1e-10, format!("min fidelity {worst}"))?;
    Ok(format!(
        "300 cases, min fidelity 1 - {:.1e}",
        (1.0 - worst).max(0.0)
    ))
}

/// Three modes at cutoff 3 with mixing, loss on every mode and a Kerr
/// interaction between lossy steps.
fn mixing_circuit() -> dualrail::Result<(Circuit, PureState)> {
    let space = FockSpace::new(3, 3)?;
    let circuit = Circuit::new(
        space,
        vec![
            CircuitElement::BeamSplitter {
                modes: [0, 1],
                theta: 0.7,
            },
            CircuitElement::Loss {
                modes: vec![0, 1, 2],
                gamma: 0.3,
            },
            CircuitElement::KerrCrossPhase {
                modes: [1, 2],
                phi: 1.1,
            },
            CircuitElement::BeamSplitter {
                modes: [1, 2],
                theta: PI / 3.0,
            },
            CircuitElement::PhaseShift { mode: 0, phi: 0.4 },
            CircuitElement::Loss {
                modes: vec![1, 2],
                gamma: 0.4,
            },
        ],
    )?;
    Ok((circuit, PureState::basis(space, &[1, 1, 0])?))
}

fn ac6_trajectory_oracle() -> Outcome {
    let (mixer, mixer_input) = mixing_circuit().map_err(err)?;
    let q = DualRailQubit::new(c(0.6, 0.0), c(0.0, 0.8)).map_err(err)?;
    let rail_input = q.state(3).map_err(err)?;
    let rail =
        trajectories::loss_circuit(*rail_input.space(), &[0, 1], &LossModel::quadratic(0.01), 5)
            .map_err(err)?;
    let mut lines = Vec::new();
    for (name, circuit, input) in [
        ("3-mode", &mixer, &mixer_input),
        ("dual-rail", &rail, &rail_input),
    ] {
        let exact = circuit
            .run_density(&input.to_density())
            .map_err(err)?
            .state
            .ok_or("exact run empty")?;
        let mut smaller = 0;
        let mut worst_ratio: f64 = 0.0;
        for seed in [11, 12, 13] {
            let mut d = [0.0; 2];
            for (slot, shots) in [10_000usize, 100_000].into_iter().enumerate() {
                let ens = trajectories::run_ensemble(input, circuit, shots, seed).map_err(err)?;
                d[slot] = exact.trace_distance(&ens.avg_density).map_err(err)?;
                let bound = 5.0 / (shots as f64).sqrt();
                worst_ratio = worst_ratio.max(d[slot] / bound);
                check(
                    d[slot] <= bound,
                    format!(
                        "{name} seed {seed} N={shots}: distance {} > {bound}",
                        d[slot]
                    ),
                )?;
            }
            if d[1] < d[0] {
                smaller += 1;
            }
        }
        check(
            smaller >= 2,
            format!("{name}: N=1e5 closer in only {smaller} of 3 seeds"),
        )?;
        lines.push(format!(
            "{name}: worst distance {worst_ratio:.2} of bound, N=1e5 closer in {smaller}/3"
        ));
    }
    Ok(lines.join("; "))
}

fn ac7_watchdog() -> Outcome {
    let (eps, n, shots) = (0.001, 10, 100_000);
    let q = DualRailQubit::new(c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)).map_err(err)?;
    let unregen_target = 1.0 - eps * (n * n) as f64;
    let regen_target = (1.0 - eps).powi(n as i32);
    let mut parts = Vec::new();
    for (label, every, target) in [
        ("unregenerated", 0, unregen_target),
        ("regenerated", 1, regen_target),
    ] {
        let link = LinkConfig {
            segments: n,
            loss: LossModel::quadratic(eps),
            regenerate_every: every,
        };
        let exact = regen::transmit(&q, &link, TransmitMode::Exact, 3)
            .map_err(err)?
            .p_success;
        check(
            (exact - target).abs() <= 1e-4,
            format!("{label} exact {exact} vs {target}"),
        )?;
        let sim = regen::transmit(&q, &link, TransmitMode::Trajectory { shots, seed: 7 }, 3)
            .map_err(err)?;
        let z = (sim.p_success - target).abs() / sigma(target, shots);
        check(
            z <= 3.0,
            format!(
                "{label} simulated {} vs {target}, {z:.2} sigma",
                sim.p_success
            ),
        )?;
        parts.push(format!(
            "{label} {} vs {target:.6} ({z:.2} sigma, exact {exact:.6})",
            sim.p_success
        ));
    }
    Ok(format!(
        "{}; target 1 - eps n^2 = {unregen_target}",
        parts.join(", ")
    ))
}

fn ac8_visibility() -> Outcome {
    for gamma in [0.0, 0.3, 1.0, 5.0] {
        let v = dualrail::classical_visibility(gamma, gamma).map_err(err)?;
        check(
            (v - 1.0).abs() <= 1e-12,
            format!("V({gamma},{gamma}) = {v}"),
        )?;
    }
    let mut worst: f64 = 0.0;
    for theta in [FRAC_PI_4, 0.3, 1.2] {
        for gamma in [0.0, 0.3, 1.0, 5.0] {
            let out = regen::balanced_interferometer(theta, gamma, 3).map_err(err)?;
            let p = out.p_10_given_detection().ok_or("no photon detected")?;
            worst = worst.max((p - 1.0).abs());
            check(
                (out.p_10 - (-gamma).exp()).abs() <= 1e-12,
                format!("p_10 {} at gamma {gamma}", out.p_10),
            )?;
        }
    }
    check(worst <= 1e-12, format!("conditional |10> error {worst:e}"))?;
    Ok(format!(
        "V = 1 for balanced loss; conditional |10> probability error {worst:.1e}"
    ))
}

fn ac9_qnd() -> Outcome {
    let mut rng = StdRng::seed_from_u64(9);
    for _ in 0..100 {
        let psi = DualRailQubit::haar_random(&mut rng).state(3).map_err(err)?;
        let q = ModeOperator::total_number(*psi.space(), &[0, 1]).map_err(err)?;
        let mean = q.expectation(&psi).map_err(err)?;
        check((mean - 1.0).abs() <= 1e-12, format!("<Q> = {mean}"))?;
        let chk = regen::qnd_eigenstate_check(&psi).map_err(err)?;
        check(
            chk.is_eigenstate && chk.eigenvalue.is_some_and(|e| (e - 1.0).abs() <= 1e-12),
            format!("check {chk:?}"),
        )?;
    }
    Ok("100 manifold states are Q eigenstates with eigenvalue 1".into())
}

fn ac10_channel_algebra() -> Outcome {
    let mut worst_complete: f64 = 0.0;
    let mut worst_semigroup: f64 = 0.0;
    for cutoff in [2, 3] {
        let space = FockSpace::new(2, cutoff).map_err(err)?;
        for (g1, g2) in [(0.1, 0.2), (0.5, 0.7), (1.0, 2.5), (0.0, 0.3)] {
            let a = KrausChannel::balanced_damping(space, &[0, 1], g1).map_err(err)?;
            let b = KrausChannel::balanced_damping(space, &[0, 1], g2).map_err(err)?;
            let ab = KrausChannel::balanced_damping(space, &[0, 1], g1 + g2).map_err(err)?;
            let single = KrausChannel::amplitude_damping(space, 1, g1).map_err(err)?;
            let composed = a.compose(&b).map_err(err)?;
            for ch in [&a, &b, &ab, &single, &composed] {
                worst_complete = worst_complete.max(ch.completeness_error());
            }
            let diff = composed.superoperator() - ab.superoperator();
            worst_semigroup = diff
                .iter()
                .map(|z| z.norm())
                .fold(worst_semigroup, f64::max);
        }
    }
    check(
        worst_complete <= 1e-12,
        format!("completeness {worst_complete:e}"),
    )?;
    check(
        worst_semigroup <= 1e-12,
        format!("semigroup {worst_semigroup:e}"),
    )?;
    Ok(format!(
        "completeness {worst_complete:.1e}, semigroup {worst_semigroup:.1e}"
    ))
}

fn ac11_unitarity() -> Outcome {
    let space = FockSpace::new(2, 3).map_err(err)?;
    // Beamsplitters keep at most cutoff - 1 photons in range; Kerr is diagonal.
    let safe: Vec<PureState> = space
        .basis()
        .filter(|o| o.as_slice().iter().sum::<usize>() <= 2)
        .map(|o| PureState::basis(space, o.as_slice()))
        .collect::<dualrail::Result<_>>()
        .map_err(err)?;
    let all: Vec<PureState> = space
        .basis()
        .map(|o| PureState::basis(space, o.as_slice()))
        .collect::<dualrail::Result<_>>()
        .map_err(err)?;
    let mut worst: f64 = 0.0;
    for angle in [0.0, 0.3, FRAC_PI_4, 1.0, PI / 2.0, 2.5, -1.7] {
        for (el, inputs) in [
            (
                CircuitElement::BeamSplitter {
                    modes: [0, 1],
                    theta: angle,
                },
                &safe,
            ),
            (
                CircuitElement::KerrCrossPhase {
                    modes: [0, 1],
                    phi: angle,
                },
                &all,
            ),
        ] {
            let outs: Vec<PureState> = inputs
                .iter()
                .map(|s| apply_unitary(s, &el))
                .collect::<dualrail::Result<_>>()
                .map_err(err)?;
            for (i, x) in outs.iter().enumerate() {
                for (j, y) in outs.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((x.inner(y).map_err(err)? - want).norm());
                }
            }
        }
    }
    check(worst <= 1e-12, format!("gram error {worst:e}"))?;
    let hom = apply_unitary(
        &PureState::basis(space, &[1, 1]).map_err(err)?,
        &CircuitElement::BeamSplitter {
            modes: [0, 1],
            theta: FRAC_PI_4,
        },
    )
    .map_err(err)?;
    let a11 = hom.amplitude(&[1, 1]).map_err(err)?.norm();
    check(a11 <= 1e-12, format!("|11> amplitude {a11:e}"))?;
    Ok(format!(
        "gram error {worst:.1e}; 50/50 |11> -> |11> amplitude {a11:.1e}"
    ))
}

fn ac12_determinism() -> Outcome {
    let run = |workers: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_dualrail"))
            .args([
                "transmit",
                "--mode",
                "trajectory",
                "--seed",
                "42",
                "--shots",
                "20000",
                "--segments",
                "6",
                "--regenerate-every",
                "2",
                "--eps",
                "0.005",
                "--c0",
                "0.6",
                "--c1",
                "0.8j",
                "--workers",
                workers,
            ])
            .output()
            .map_err(err)?;
        check(
            out.status.success(),
            format!("exit {:?}", out.status.code()),
        )?;
        Ok::<_, String>(out.stdout)
    };
    let a = run("1")?;
    let b = run("1")?;
    let c = run("3")?;
    check(!a.is_empty(), "empty report")?;
    check(a == b, "two runs differ")?;
    check(a == c, "worker count changes the report")?;
    Ok(format!(
        "{} identical bytes across runs and worker counts",
        a.len()
    ))
}

fn main() {
    let criteria: [Criterion; 12] = [
        (
            "lossy dual-rail density matrix closed form",
            ac1_density_closed_form,
        ),
        (
            "regenerator chain and accepted state",
            ac2_regenerator_chain,
        ),
        ("perfect rejection of the vacuum", ac3_vacuum_rejected),
        (
            "acceptance probability e^-gamma",
            ac4_acceptance_probability,
        ),
        ("accepted state fidelity", ac5_fidelity_one),
        (
            "trajectory ensemble vs exact channel",
            ac6_trajectory_oracle,
        ),
        ("watchdog effect", ac7_watchdog),
        ("balanced loss visibility", ac8_visibility),
        ("QND eigenstates", ac9_qnd),
        ("channel completeness and semigroup", ac10_channel_algebra),
        ("unitarity and HOM", ac11_unitarity),
        ("trajectory report determinism", ac12_determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS AC-{} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL AC-{} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
