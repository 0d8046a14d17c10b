//! Linearized torsion and curvature of coframe/connection perturbations,
//! linearized curvature of metric (edge-length) perturbations, and exact
//! potential reconstruction.
//!
//! All operations are matrix applications of the assembled twisted complex;
//! fields are coefficient vectors in the bases of [`crate::spaces`] and
//! serialize to JSON with rationals as strings.

use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_complex, Assembler, AssemblyError, ComplexId};
use crate::homology::SparseMat;
use crate::rational::{fmt_q, parse_q, Q};
use num::Zero;

#[derive(Debug, thiserror::Error)]
pub enum CartanError {
    #[error("field for space `{space}` has {got} coefficients, expected {expected}")]
    DimensionMismatch {
        space: String,
        expected: usize,
        got: usize,
    },
    #[error("field file: {0}")]
    Format(String),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
}

/// A coefficient vector in a named basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub space: String,
    pub coefficients: Vec<Q>,
}

#[derive(Serialize, Deserialize)]
struct FieldFile {
    space: String,
    coefficients: Vec<String>,
}

impl Field {
    pub fn zeros(space: &str, dim: usize) -> Field {
        Field {
            space: space.to_string(),
            coefficients: vec![Q::zero(); dim],
        }
    }

    pub fn to_json(&self) -> String {
        let file = FieldFile {
            space: self.space.clone(),
            coefficients: self.coefficients.iter().map(fmt_q).collect(),
        };
        serde_json::to_string_pretty(&file).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Field, CartanError> {
        let file: FieldFile =
            serde_json::from_str(text).map_err(|e| CartanError::Format(e.to_string()))?;
        let coefficients = file
            .coefficients
            .iter()
            .map(|s| parse_q(s).map_err(|e| CartanError::Format(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Field {
            space: file.space,
            coefficients,
        })
    }

    fn expect_dims(&self, space: &str, dim: usize) -> Result<(), CartanError> {
        if self.space != space || self.coefficients.len() != dim {
            return Err(CartanError::DimensionMismatch {
                space: space.to_string(),
                expected: dim,
                got: self.coefficients.len(),
            });
        }
        Ok(())
    }
}

/// Result of a potential reconstruction.
#[derive(Clone, Debug)]
pub enum PotentialResult {
    /// a particular preimage (no gauge normalization)
    Solution { theta: Field, gamma: Field },
    /// the input is not in the image; exactly one witness is attached
    NoSolution {
        /// nonzero image under the next differential (complex obstruction)
        residual: Option<Field>,
        /// functional vanishing on the image but not on the input
        /// (cohomology obstruction)
        certificate: Option<Vec<Q>>,
    },
}

/// Assembled operators for the linearized geometry of one mesh.
pub struct CartanOps {
    /// second differential of the twisted complex (torsion/curvature map)
    pub a1: SparseMat,
    /// third differential of the twisted complex
    pub a2: SparseMat,
    /// linearized curvature of metric perturbations (interior edge values)
    pub inc: SparseMat,
    pub dim_vh1: usize,
    pub dim_wh1: usize,
    pub dim_vh2: usize,
    pub dim_wh2: usize,
}

impl CartanOps {
    pub fn new(asm: &Assembler) -> Result<CartanOps, CartanError> {
        let twisted = assemble_complex(ComplexId::Twisted, asm)?;
        let regge = assemble_complex(ComplexId::Regge, asm)?;
        let mesh = asm.mesh;
        let dim_vh1 = mesh.num_edges() + 3 * mesh.num_tets();
        let dim_wh1 = 3 * mesh.interior_faces().len();
        let dim_vh2 = 3 * mesh.interior_faces().len();
        let dim_wh2 = 3 * mesh.interior_edges().len();
        Ok(CartanOps {
            a1: twisted.d[1].clone(),
            a2: twisted.d[2].clone(),
            inc: regge.d[1].clone(),
            dim_vh1,
            dim_wh1,
            dim_vh2,
            dim_wh2,
        })
    }

    /// Torsion and curvature of a coframe/connection perturbation pair.
    pub fn torsion_curvature(
        &self,
        theta: &Field,
        gamma: &Field,
    ) -> Result<(Field, Field), CartanError> {
        theta.expect_dims("vh1", self.dim_vh1)?;
        gamma.expect_dims("wh1", self.dim_wh1)?;
        let mut x = theta.coefficients.clone();
        x.extend(gamma.coefficients.iter().cloned());
        let y = self.a1.mul_vec(&x);
        let (t, r) = y.split_at(self.dim_vh2);
        Ok((
            Field {
                space: "vh2".to_string(),
                coefficients: t.to_vec(),
            },
            Field {
                space: "wh2".to_string(),
                coefficients: r.to_vec(),
            },
        ))
    }

    /// Linearized curvature of a metric perturbation given by edge values.
    pub fn regge_metric_curvature(&self, metric: &Field) -> Result<Field, CartanError> {
        metric.expect_dims("reg", self.inc.cols)?;
        Ok(Field {
            space: "reg0p".to_string(),
            coefficients: self.inc.mul_vec(&metric.coefficients),
        })
    }

    /// Exact particular solution of the torsion/curvature equations, or a
    /// witness of unsolvability.
    pub fn potential_solve(
        &self,
        torsion: &Field,
        curvature: &Field,
    ) -> Result<PotentialResult, CartanError> {
        torsion.expect_dims("vh2", self.dim_vh2)?;
        curvature.expect_dims("wh2", self.dim_wh2)?;
        let mut b = torsion.coefficients.clone();
        b.extend(curvature.coefficients.iter().cloned());
        // complex obstruction first: the input must be closed
        let closed = self.a2.mul_vec(&b);
        if closed.iter().any(|v| !v.is_zero()) {
            return Ok(PotentialResult::NoSolution {
                residual: Some(Field {
                    space: "vh3_wh3".to_string(),
                    coefficients: closed,
                }),
                certificate: None,
            });
        }
        if let Some(x) = self.a1.solve(&b) {
            let (t, g) = x.split_at(self.dim_vh1);
            return Ok(PotentialResult::Solution {
                theta: Field {
                    space: "vh1".to_string(),
                    coefficients: t.to_vec(),
                },
                gamma: Field {
                    space: "wh1".to_string(),
                    coefficients: g.to_vec(),
                },
            });
        }
        // cohomology obstruction: a functional vanishing on the image of the
        // torsion/curvature map but not on the input
        let left_null = self.a1.transpose().nullspace();
        for y in left_null {
            let pairing: Q = y
                .iter()
                .zip(b.iter())
                .map(|(a, c)| a * c)
                .fold(Q::zero(), |acc, v| acc + v);
            if !pairing.is_zero() {
                return Ok(PotentialResult::NoSolution {
                    residual: None,
                    certificate: Some(y),
                });
            }
        }
        unreachable!("an unsolvable consistent system has a separating functional");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_mesh, MeshKind};
    use crate::rational::q;
    use crate::smallalg::rand_vec3;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rand_field(space: &str, dim: usize, rng: &mut ChaCha8Rng) -> Field {
        let mut coefficients = Vec::with_capacity(dim);
        while coefficients.len() < dim {
            let v = rand_vec3(rng);
            for c in v.0 {
                if coefficients.len() < dim {
                    coefficients.push(c);
                }
            }
        }
        Field {
            space: space.to_string(),
            coefficients,
        }
    }

    #[test]
    fn zero_fields_give_zero_output() {
        let mesh = generate_mesh(MeshKind::Box(2, 1, 1)).unwrap();
        let asm = Assembler::new(&mesh);
        let ops = CartanOps::new(&asm).unwrap();
        let theta = Field::zeros("vh1", ops.dim_vh1);
        let gamma = Field::zeros("wh1", ops.dim_wh1);
        let (t, r) = ops.torsion_curvature(&theta, &gamma).unwrap();
        assert!(t.coefficients.iter().all(|v| v.is_zero()));
        assert!(r.coefficients.iter().all(|v| v.is_zero()));
    }

    #[test]
    fn metric_curvature_of_compatible_perturbation_vanishes() {
        let mesh = generate_mesh(MeshKind::Box(2, 2, 2)).unwrap();
        let asm = Assembler::new(&mesh);
        let ops = CartanOps::new(&asm).unwrap();
        // edge values of the symmetric gradient of a random vertex field
        let def = asm.def_lag_reg();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = rand_field("lag", def.cols, &mut rng);
        let metric = Field {
            space: "reg".to_string(),
            coefficients: def.mul_vec(&u.coefficients),
        };
        let curv = ops.regge_metric_curvature(&metric).unwrap();
        assert!(curv.coefficients.iter().all(|v| v.is_zero()));
    }

    #[test]
    fn round_trip_on_box222() {
        let mesh = generate_mesh(MeshKind::Box(2, 2, 2)).unwrap();
        let asm = Assembler::new(&mesh);
        let ops = CartanOps::new(&asm).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2 {
            let theta = rand_field("vh1", ops.dim_vh1, &mut rng);
            let gamma = rand_field("wh1", ops.dim_wh1, &mut rng);
            let (t, r) = ops.torsion_curvature(&theta, &gamma).unwrap();
            match ops.potential_solve(&t, &r).unwrap() {
                PotentialResult::Solution {
                    theta: th,
                    gamma: ga,
                } => {
                    let (t2, r2) = ops.torsion_curvature(&th, &ga).unwrap();
                    assert_eq!(t2, t);
                    assert_eq!(r2, r);
                }
                PotentialResult::NoSolution { .. } => panic!("image point must be solvable"),
            }
        }
    }

    #[test]
    fn non_closed_input_yields_residual() {
        let mesh = generate_mesh(MeshKind::Box(2, 1, 1)).unwrap();
        let asm = Assembler::new(&mesh);
        let ops = CartanOps::new(&asm).unwrap();
        // find a unit vector that the next differential does not annihilate
        let mut t = Field::zeros("vh2", ops.dim_vh2);
        let r = Field::zeros("wh2", ops.dim_wh2);
        let mut found = false;
        for i in 0..ops.dim_vh2 {
            t.coefficients[i] = q(1);
            let mut b = t.coefficients.clone();
            b.extend(r.coefficients.iter().cloned());
            if ops.a2.mul_vec(&b).iter().any(|v| !v.is_zero()) {
                found = true;
                break;
            }
            t.coefficients[i] = Q::zero();
        }
        assert!(found);
        match ops.potential_solve(&t, &r).unwrap() {
            PotentialResult::NoSolution { residual, .. } => assert!(residual.is_some()),
            PotentialResult::Solution { .. } => panic!("expected an obstruction"),
        }
    }

    #[test]
    fn field_json_round_trip() {
        let f = Field {
            space: "reg".to_string(),
            coefficients: vec![q(2), crate::rational::qr(-3, 7)],
        };
        let text = f.to_json();
        let back = Field::from_json(&text).unwrap();
        assert_eq!(back, f);
        // identical reserialization is byte-identical
        assert_eq!(back.to_json(), text);
    }
}
