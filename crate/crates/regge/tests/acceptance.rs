//! Acceptance gate: every headline claim of the library, checked exactly on
//! the four reference meshes, with one pass/fail line per criterion.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::process::Command;
use std::time::Instant;

use num::Zero;
use regge::assembly::{
    assemble_complex, assemble_twisted_structure, chainmap_g, chainmap_hess_geom, chainmap_j,
    chainmap_kappa, Assembler, ComplexId,
};
use regge::cartan::{CartanOps, Field, PotentialResult};
use regge::homology::de_rham_betti;
use regge::mesh::{generate_mesh, write_mesh, MeshKind, SimplicialComplex3};
use regge::rational::Q;
use regge::smallalg::verify_pointwise_identities;
use regge::verify::{expected_cohomology, run_all};

struct Criterion {
    ok: bool,
    line: String,
}

fn criterion(n: usize, name: &str, ok: bool, detail: String) -> Criterion {
    Criterion {
        ok,
        line: format!(
            "{} criterion {n} ({name}): {detail}",
            if ok { "PASS" } else { "FAIL" }
        ),
    }
}

fn meshes() -> Vec<(&'static str, SimplicialComplex3)> {
    vec![
        ("tet", generate_mesh(MeshKind::Tet).unwrap()),
        ("box333", generate_mesh(MeshKind::Box(3, 3, 3)).unwrap()),
        ("tunnel", generate_mesh(MeshKind::Tunnel).unwrap()),
        ("cavity", generate_mesh(MeshKind::Cavity).unwrap()),
    ]
}

#[test]
fn acceptance() {
    let meshes = meshes();
    let mut crits: Vec<Criterion> = Vec::new();

    // 1. metric-complex cohomology = 6 x Betti (independent simplicial
    //    oracle), under 60 s per mesh
    {
        let hardcoded = [
            ("tet", vec![6, 0, 0, 0]),
            ("box333", vec![6, 0, 0, 0]),
            ("tunnel", vec![6, 6, 0, 0]),
            ("cavity", vec![6, 0, 6, 0]),
        ];
        let mut ok = true;
        let mut details = Vec::new();
        for (name, mesh) in &meshes {
            let start = Instant::now();
            let betti = de_rham_betti(mesh);
            let asm = Assembler::new(mesh);
            let coh = assemble_complex(ComplexId::Regge, &asm)
                .unwrap()
                .cohomology()
                .cohomology;
            let elapsed = start.elapsed();
            let expect: Vec<usize> = betti.iter().map(|b| 6 * b).collect();
            let fixed = &hardcoded.iter().find(|(n, _)| n == name).unwrap().1;
            let good = coh == expect && coh == *fixed && elapsed.as_secs() < 60;
            ok &= good;
            details.push(format!("{name} {coh:?} in {:.2}s", elapsed.as_secs_f64()));
        }
        crits.push(criterion(1, "regge cohomology", ok, details.join("; ")));
    }

    // 2. twisted cohomology equals metric-complex cohomology
    {
        let mut ok = true;
        let mut details = Vec::new();
        for (name, mesh) in &meshes {
            let asm = Assembler::new(mesh);
            let a = assemble_complex(ComplexId::Regge, &asm)
                .unwrap()
                .cohomology()
                .cohomology;
            let b = assemble_complex(ComplexId::Twisted, &asm)
                .unwrap()
                .cohomology()
                .cohomology;
            ok &= a == b;
            details.push(format!("{name} {b:?}"));
        }
        crits.push(criterion(2, "twisted = regge", ok, details.join("; ")));
    }

    // 3. auxiliary complexes match the predicted tables
    {
        let aux = [
            ComplexId::XRm,
            ComplexId::RmAux,
            ComplexId::Ned,
            ComplexId::NedC,
            ComplexId::P1n,
            ComplexId::P0n,
        ];
        let mut ok = true;
        let mut details = Vec::new();
        for (name, mesh) in &meshes {
            let betti = de_rham_betti(mesh);
            let asm = Assembler::new(mesh);
            let mut mesh_ok = true;
            for id in aux {
                let coh = assemble_complex(id, &asm).unwrap().cohomology().cohomology;
                let expect = expected_cohomology(id, mesh, &betti).unwrap();
                mesh_ok &= coh == expect;
            }
            ok &= mesh_ok;
            details.push(format!(
                "{name} {}",
                if mesh_ok { "ok" } else { "MISMATCH" }
            ));
        }
        crits.push(criterion(3, "auxiliary tables", ok, details.join("; ")));
    }

    // 4. d.d = 0 exactly for all 12 complexes on all meshes
    {
        let mut ok = true;
        let mut products = 0usize;
        for (_, mesh) in &meshes {
            let asm = Assembler::new(mesh);
            for id in ComplexId::all() {
                // construction re-verifies d.d = 0; re-check the products here
                let c = assemble_complex(id, &asm).unwrap();
                for k in 0..c.d.len() - 1 {
                    ok &= c.d[k + 1].matmul(&c.d[k]).is_zero();
                    products += 1;
                }
            }
        }
        crits.push(criterion(
            4,
            "complex property",
            ok,
            format!("{products} products over 12 complexes x 4 meshes, all zero"),
        ));
    }

    // 5. chain maps commute; kernels have the predicted dimensions; the
    //    projection blocks have full row rank
    {
        let mut ok = true;
        let mut details = Vec::new();
        for (name, mesh) in &meshes {
            let asm = Assembler::new(mesh);
            let regge = assemble_complex(ComplexId::Regge, &asm).unwrap();
            let x_rm = assemble_complex(ComplexId::XRm, &asm).unwrap();
            let rm_aux = assemble_complex(ComplexId::RmAux, &asm).unwrap();
            let nedc = assemble_complex(ComplexId::NedC, &asm).unwrap();
            let p1n = assemble_complex(ComplexId::P1n, &asm).unwrap();
            let hess = assemble_complex(ComplexId::Hessian, &asm).unwrap();
            let p0n = assemble_complex(ComplexId::P0n, &asm).unwrap();

            let kappa = chainmap_kappa(&asm);
            let g = chainmap_g(&asm);
            let j = chainmap_j(&asm).unwrap();
            let hg = chainmap_hess_geom(&asm);
            let mut mesh_ok = kappa.commutes(&x_rm, &x_rm)
                && g.commutes(&x_rm, &rm_aux)
                && j.commutes(&nedc, &p1n)
                && hg.commutes(&hess, &p0n);

            // g1, g2 and j1, j2, j3 are surjective
            for b in [
                &g.blocks[1],
                &g.blocks[2],
                &j.blocks[1],
                &j.blocks[2],
                &j.blocks[3],
            ] {
                mesh_ok &= b.rank() == b.rows;
            }
            // nullity of each projection block = dimension of the metric space
            // it forgets (edge metric, tangential deltas, point deltas)
            for k in 1..=3 {
                let nullity = j.blocks[k].cols - j.blocks[k].rank();
                mesh_ok &= nullity == regge.dims[k];
            }
            ok &= mesh_ok;
            details.push(format!("{name} {}", if mesh_ok { "ok" } else { "FAIL" }));
        }
        crits.push(criterion(5, "diagrams and kernels", ok, details.join("; ")));
    }

    // 6, 8 (and a second pass over 4, 5, 7): the full library battery per
    // mesh; extract the named checks
    let reports: Vec<_> = meshes
        .iter()
        .map(|(name, mesh)| run_all(mesh, name, 7))
        .collect();
    let extract = |id: &str| -> (bool, String) {
        let mut ok = true;
        let mut details = Vec::new();
        for r in &reports {
            let c = r
                .checks
                .iter()
                .find(|c| c.id == id)
                .unwrap_or_else(|| panic!("battery has no check `{id}`"));
            ok &= c.passed;
            details.push(format!(
                "{} {}",
                r.mesh,
                if c.passed { "ok" } else { "FAIL" }
            ));
        }
        (ok, details.join("; "))
    };
    {
        let (ok, detail) = extract("correction_anticommutes");
        crits.push(criterion(6, "curvature of the correction", ok, detail));
    }

    // 7. pointwise identity suite, 20 deterministic instances each, under 1 s
    {
        let start = Instant::now();
        let rep = verify_pointwise_identities(7);
        let elapsed = start.elapsed();
        let (ok, detail) = match rep {
            Ok(r) => (
                r.instances_per_identity == 20 && elapsed.as_secs_f64() < 1.0,
                format!(
                    "{} identities x {} instances in {:.3}s",
                    r.identities.len(),
                    r.instances_per_identity,
                    elapsed.as_secs_f64()
                ),
            ),
            Err(e) => (false, e.to_string()),
        };
        crits.push(criterion(7, "pointwise identities", ok, detail));
    }

    // 8. every payload decomposition is exact (assembly fails otherwise);
    //    the face-block membership residual is reported, never fatal
    {
        let (sign_ok, _) = extract("twisted_signs");
        let (inv_ok, _) = extract("one_sided_inverse");
        let mut ok = sign_ok && inv_ok;
        let mut details = Vec::new();
        for (name, mesh) in &meshes {
            let asm = Assembler::new(mesh);
            // assembling all 12 complexes runs every decomposition with a
            // zero-residual requirement built in
            for id in ComplexId::all() {
                ok &= assemble_complex(id, &asm).is_ok();
            }
            let tw = assemble_twisted_structure(&asm).unwrap();
            details.push(format!(
                "{name} membership residual {}",
                regge::rational::fmt_q(&tw.t3_residual)
            ));
        }
        crits.push(criterion(
            8,
            "payload decompositions",
            ok,
            details.join("; "),
        ));
    }

    // 9. torsion/curvature round-trip on box(2,2,2), 5 random inputs
    {
        use rand::SeedableRng;
        let mesh = generate_mesh(MeshKind::Box(2, 2, 2)).unwrap();
        let asm = Assembler::new(&mesh);
        let ops = CartanOps::new(&asm).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2026);
        let mut ok = true;
        for _ in 0..5 {
            let rand_coeffs = |n: usize, rng: &mut rand_chacha::ChaCha8Rng| {
                let mut v = Vec::with_capacity(n);
                while v.len() < n {
                    for c in regge::smallalg::rand_vec3(rng).0 {
                        if v.len() < n {
                            v.push(c);
                        }
                    }
                }
                v
            };
            let theta = Field {
                space: "vh1".into(),
                coefficients: rand_coeffs(ops.dim_vh1, &mut rng),
            };
            let gamma = Field {
                space: "wh1".into(),
                coefficients: rand_coeffs(ops.dim_wh1, &mut rng),
            };
            let (t, r) = ops.torsion_curvature(&theta, &gamma).unwrap();
            // the image is closed
            let mut b = t.coefficients.clone();
            b.extend(r.coefficients.iter().cloned());
            ok &= ops.a2.mul_vec(&b).iter().all(Q::is_zero);
            // a potential exists and reproduces the input exactly
            match ops.potential_solve(&t, &r).unwrap() {
                PotentialResult::Solution {
                    theta: th,
                    gamma: ga,
                } => {
                    let (t2, r2) = ops.torsion_curvature(&th, &ga).unwrap();
                    ok &= t2 == t && r2 == r;
                }
                PotentialResult::NoSolution { .. } => ok = false,
            }
        }
        crits.push(criterion(
            9,
            "potential round-trip",
            ok,
            "5 random inputs on box(2,2,2)".to_string(),
        ));
    }

    // 10. the CLI verification report is byte-identical across runs
    {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gate.mesh");
        std::fs::write(
            &path,
            write_mesh(&generate_mesh(MeshKind::Box(2, 1, 1)).unwrap()),
        )
        .unwrap();
        let run = || {
            Command::new(env!("CARGO_BIN_EXE_regge"))
                .args([
                    "verify",
                    "--mesh",
                    path.to_str().unwrap(),
                    "--all",
                    "--seed",
                    "7",
                ])
                .output()
                .unwrap()
        };
        let a = run();
        let b = run();
        let ok = a.status.success() && b.status.success() && a.stdout == b.stdout;
        crits.push(criterion(
            10,
            "deterministic output",
            ok,
            format!("two runs, {} bytes each", a.stdout.len()),
        ));
    }

    let mut all_ok = true;
    for c in &crits {
        println!("{}", c.line);
        all_ok &= c.ok;
    }
    assert!(all_ok, "acceptance gate failed:\n{}", {
        crits
            .iter()
            .filter(|c| !c.ok)
            .map(|c| c.line.as_str())
            .collect::<Vec<_>>()
            .join("\n")
    });
}
