//! Fast invariant checks that need no reference data.

use std::time::Instant;

use clap::Args;
use serde::{Deserialize, Serialize};
use seslab_core::basis::{build_basis, hermite, hermite_gaussian, normalization_residual, ScaleSet};
use seslab_core::equiv::equivariance_error_cropped;
use seslab_core::geometry::{projective_mapping, scale_mapping, CameraIntrinsics, EgoMotion, PatchPlane};
use seslab_core::ses::{build_stack, StackKind, StackSpec};
use seslab_core::tensor::{conv2d, synth_corpus, BorderPolicy, Grid, PixelMapping, SynthKind};

use crate::error::{CliError, CliResult};
use crate::output::{echo_config, ensure_dir, load_config};
use crate::GlobalArgs;

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Test hook: perturb one reference-scale basis member before the l2 check.
    #[arg(long, hide = true)]
    corrupt_basis_norm: bool,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelftestConfig {
    pub seed: u64,
}

type Check = Result<(), String>;
type NamedCheck<'a> = (&'a str, Box<dyn Fn() -> Check>);

fn identity_kernel(seed: u64) -> Check {
    let images = synth_corpus(SynthKind::BandlimitedNoise, 2, 12, 17, seed).map_err(|e| e.to_string())?;
    let input = Grid::stack(&images).map_err(|e| e.to_string())?;
    let mut kernels = Grid::zeros(&[2, 2, 3, 3]);
    kernels.set(&[0, 0, 1, 1], 1.0);
    kernels.set(&[1, 1, 1, 1], 1.0);
    for border in [BorderPolicy::ZeroFill, BorderPolicy::Clamp, BorderPolicy::Circular] {
        let out = conv2d(&input, &kernels, border).map_err(|e| e.to_string())?;
        if !out.bit_eq(&input) {
            return Err(format!("delta kernel changed the input under {border:?}"));
        }
    }
    Ok(())
}

fn explicit_hermite(n: u32, x: f64) -> f64 {
    let x2 = x * x;
    match n {
        0 => 1.0,
        1 => x,
        2 => x2 - 1.0,
        3 => x * (x2 - 3.0),
        4 => x2 * x2 - 6.0 * x2 + 3.0,
        5 => x * (x2 * x2 - 10.0 * x2 + 15.0),
        6 => x2 * x2 * x2 - 15.0 * x2 * x2 + 45.0 * x2 - 15.0,
        _ => unreachable!(),
    }
}

fn hermite_recurrence() -> Check {
    for n in 0..=6 {
        for i in 0..=100 {
            let x = -5.0 + 0.1 * i as f64;
            let got = hermite(n, x).map_err(|e| e.to_string())?;
            let want = explicit_hermite(n, x);
            if (got - want).abs() > 1e-9 {
                return Err(format!("H_{n}({x}) = {got}, explicit form gives {want}"));
            }
        }
    }
    Ok(())
}

fn basis_norm(corrupt: bool) -> Check {
    let scales = ScaleSet::from_alpha(0.1, 3).map_err(|e| e.to_string())?;
    let basis = build_basis(&scales, 6, 7).map_err(|e| e.to_string())?;
    let mut filters = basis.filters().clone();
    if corrupt {
        // Stretch the first member of the reference scale by 1%.
        let member = basis.k() * basis.k();
        let start = scales.reference() * basis.num_members() * member;
        for v in &mut filters.data_mut()[start..start + member] {
            *v *= 1.01;
        }
    }
    let residual = normalization_residual(&filters, scales.reference());
    if residual > 1e-12 {
        return Err(format!("reference-scale member norm deviates from 1 by {residual:e}"));
    }
    Ok(())
}

fn dilation_covariance() -> Check {
    for &(n, m) in &[(0, 0), (1, 2), (3, 3), (6, 5)] {
        for &s in &[0.7, 1.1, 1.6] {
            for &(u, v) in &[(0.31, -0.77), (1.13, 0.42), (-0.5, 2.2)] {
                let a = hermite_gaussian(1.3 * s, n, m, s * u, s * v) * s * s;
                let b = hermite_gaussian(1.3, n, m, u, v);
                if (a - b).abs() > 1e-12 {
                    return Err(format!("(n={n}, m={m}) at s={s}: {a} vs {b}"));
                }
            }
        }
    }
    Ok(())
}

fn unit_scale_error(seed: u64) -> Check {
    let images = synth_corpus(SynthKind::GaussianBlobs, 2, 32, 48, seed).map_err(|e| e.to_string())?;
    for kind in [StackKind::Ses, StackKind::Vanilla] {
        let mut net = build_stack(&StackSpec::new(kind, &[3, 3], 7, seed)).map_err(|e| e.to_string())?;
        net.calibrate(&images).map_err(|e| e.to_string())?;
        for block in 1..=2 {
            let d = equivariance_error_cropped(&net, &images, 1.0, block, 0.1).map_err(|e| e.to_string())?;
            if d.abs() > 1e-12 {
                return Err(format!("{kind} block {block}: error {d:e} at s = 1"));
            }
        }
    }
    Ok(())
}

fn projective_reduction() -> Check {
    let run = || -> seslab_core::Result<f64> {
        let c = CameraIntrinsics::centered(707.0, 160, 48)?;
        let plane = PatchPlane::fronto_parallel(20.0)?;
        let exact = projective_mapping(&c, &plane, &EgoMotion::depth_translation(3.0))?;
        let approx = scale_mapping(&c, &plane, 3.0)?;
        let mut worst: f64 = 0.0;
        for y in 0..48 {
            for x in 0..160 {
                let (a, b) = exact.source(x as f64, y as f64);
                let (p, q) = approx.source(x as f64, y as f64);
                worst = worst.max((a - p).hypot(b - q));
            }
        }
        Ok(worst)
    };
    let worst = run().map_err(|e| e.to_string())?;
    if worst > 1e-9 {
        return Err(format!("maps differ by {worst:e} px"));
    }
    Ok(())
}

pub fn run(global: &GlobalArgs, args: SelftestArgs) -> CliResult<()> {
    let mut config: SelftestConfig = load_config(global.config.as_deref())?;
    if let Some(seed) = global.seed {
        config.seed = seed;
    }
    if let Some(dir) = &global.out_dir {
        ensure_dir(dir)?;
        echo_config(dir, "selftest", &config)?;
    }

    let seed = config.seed;
    let checks: Vec<NamedCheck> = vec![
        ("identity kernel", Box::new(move || identity_kernel(seed))),
        ("hermite recurrence", Box::new(hermite_recurrence)),
        ("basis l2 normalization", Box::new(move || basis_norm(args.corrupt_basis_norm))),
        ("basis dilation covariance", Box::new(dilation_covariance)),
        ("zero error at s = 1", Box::new(move || unit_scale_error(seed))),
        ("projective to scale reduction", Box::new(projective_reduction)),
    ];
    let mut failed = Vec::new();
    for (name, check) in &checks {
        let start = Instant::now();
        match check() {
            Ok(()) => println!("ok      {name} ({:.2?})", start.elapsed()),
            Err(detail) => {
                println!("FAILED  {name}: {detail}");
                failed.push(*name);
            }
        }
    }
    if failed.is_empty() {
        println!("all {} invariants hold", checks.len());
        Ok(())
    } else {
        Err(CliError::runtime(format!("failed invariants: {}", failed.join(", "))))
    }
}
