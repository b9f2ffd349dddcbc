use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use staircase::bch::{ColumnGenerator, ComponentCode};
use staircase::codec::{DecoderConfig, FrameCodec, Schedule};
use staircase::ff::{FfCode, FfConstruction, PermutationSearch, PermutationSource};
use staircase::gf2::{BitMatrix, VecMapping};

fn random(rows: usize, cols: usize, rng: &mut impl Rng) -> BitMatrix {
    let mut m = BitMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m.set(i, j, rng.gen());
        }
    }
    m
}

/// Remainder of the word polynomial (position j is the coefficient of
/// x^(n-1-j)) modulo the generator, by schoolbook long division.
fn remainder(word: &[u8], gen: &[u8]) -> Vec<u8> {
    // gen ascending, gen[deg] = 1
    let deg = gen.len() - 1;
    let mut w = word.to_vec();
    for j in 0..w.len().saturating_sub(deg) {
        if w[j] == 1 {
            for (d, &g) in gen.iter().enumerate() {
                // x^(n-1-j) aligned with the leading term
                w[j + deg - d] ^= g;
            }
        }
    }
    w[w.len() - deg..].to_vec()
}

fn gen_of(code: &ComponentCode) -> Vec<u8> {
    code.generator().coeffs()
}

/// `vec(X)` columnwise from the permutation matrix, without index helpers.
fn unpermute(pi: &BitMatrix, yt: &BitMatrix) -> BitMatrix {
    let (rows, cols) = yt.shape();
    let cm = VecMapping::column_wise(rows, cols);
    BitMatrix::unvec(&pi.transpose().mul(&yt.vec(cm).unwrap()).unwrap(), cm).unwrap()
}

/// Applies `Y ↦ F_rᵀ Y + (π_2(π_1⁻¹(Yᵀ) G_r))ᵀ` with plain matrix operations.
fn direct_a(c: &FfConstruction) -> BitMatrix {
    let (mb, r) = (c.block(), c.r());
    let gr = c.row_code().parity_partition().unwrap().gr;
    let fr = c.col_code().parity_partition().unwrap().gr;
    let (p1, p2) = c.permutation_matrices();
    let cm = VecMapping::column_wise(r, mb);
    let mr = VecMapping::column_wise(mb, r);
    let mut a = BitMatrix::zeros(r * mb, r * mb);
    for q in 0..r * mb {
        let mut e = BitMatrix::zeros(r * mb, 1);
        e.set(q, 0, true);
        let y = BitMatrix::unvec(&e, cm).unwrap();
        let x = unpermute(&p1, &y.transpose());
        let xg = x.mul(&gr).unwrap();
        let permuted = BitMatrix::unvec(&p2.mul(&xg.vec(mr).unwrap()).unwrap(), mr).unwrap();
        let out = fr.transpose().mul(&y).unwrap().add(&permuted.transpose()).unwrap();
        let v = out.vec(cm).unwrap();
        for i in 0..r * mb {
            a.set(i, q, v.get(i, 0));
        }
    }
    a
}

fn toy_constructions() -> Vec<FfConstruction> {
    vec![
        FfConstruction::build(4, 1, 1, ColumnGenerator::Reciprocal, PermutationSearch::default()).unwrap(),
        FfConstruction::build(6, 1, 25, ColumnGenerator::Reciprocal, PermutationSearch::default()).unwrap(),
        FfConstruction::build(6, 1, 25, ColumnGenerator::Reciprocal, PermutationSearch { seed: 3, attempts: 1 })
            .map(|c| {
                // arbitrary exponents on the same codes
                let (row, col) = (c.row_code().clone(), c.col_code().clone());
                FfConstruction::with_exponents(row, col, vec![3, 0, 7, 7, 12, 1], vec![5, 9, 2, 0, 0, 11], PermutationSource::Given)
                    .unwrap()
            })
            .unwrap(),
    ]
}

#[test]
fn kronecker_form_matches_direct_map() {
    for c in toy_constructions() {
        assert_eq!(c.a_matrix(), direct_a(&c), "exponents {:?}", c.exponents());
        let prod = c.a_matrix().mul(c.a_inverse()).unwrap();
        assert_eq!(prod, BitMatrix::identity(c.r() * c.block()));
    }
}

#[test]
fn same_code_block_cyclic_a_is_singular() {
    // columns of Y constant: Z R + shifted Z R cancel
    let (row, col) = FfConstruction::codes(6, 1, 25, ColumnGenerator::Same).unwrap();
    let err = FfConstruction::with_exponents(row, col, vec![12, 11, 10, 9, 8, 7], vec![6, 5, 4, 3, 2, 1], PermutationSource::Given);
    assert!(matches!(err, Err(staircase::Error::Singular { .. })));
    let e = FfConstruction::build(6, 1, 25, ColumnGenerator::Same, PermutationSearch { seed: 1, attempts: 20 });
    assert!(matches!(e, Err(staircase::Error::Construction(_))));
}

#[test]
fn small_toy_uses_random_permutations() {
    let c = &toy_constructions()[0];
    assert_eq!((c.block(), c.r()), (3, 4));
    assert!(matches!(c.source(), PermutationSource::Random { .. }));
    assert_eq!(toy_constructions()[1].source(), PermutationSource::LowErrorFloor);
}

/// Assembles all row and column words of one pair from `(Y, P̃_c)`.
fn pair_words(
    c: &FfConstruction,
    b0: &BitMatrix,
    b1: &BitMatrix,
    b2: &BitMatrix,
    y: &BitMatrix,
    pc: &BitMatrix,
) -> (Vec<Vec<u8>>, Vec<Vec<u8>>) {
    let (p1, p2) = c.permutation_matrices();
    let x = unpermute(&p1, &y.transpose());
    let pr = unpermute(&p2, &pc.transpose());
    let rows_m = b0.hstack(b1).unwrap().hstack(&x).unwrap().hstack(&pr).unwrap();
    let cols_m = b1.vstack(b2).unwrap().vstack(y).unwrap().vstack(pc).unwrap();
    let rows = (0..rows_m.rows()).map(|i| rows_m.row_bits(i)).collect();
    let cols = (0..cols_m.cols()).map(|j| (0..cols_m.rows()).map(|i| cols_m.bit(i, j)).collect()).collect();
    (rows, cols)
}

fn constraint_values(c: &FfConstruction, b: [&BitMatrix; 3], z: &[u8]) -> Vec<u8> {
    let (mb, r) = (c.block(), c.r());
    let mut y = BitMatrix::zeros(r, mb);
    let mut pc = BitMatrix::zeros(r, mb);
    for i in 0..r {
        for j in 0..mb {
            y.set(i, j, z[i * mb + j] == 1);
            pc.set(i, j, z[r * mb + i * mb + j] == 1);
        }
    }
    let (rows, cols) = pair_words(c, b[0], b[1], b[2], &y, &pc);
    let gr = gen_of(c.row_code());
    let gc = gen_of(c.col_code());
    let mut out = Vec::new();
    for w in rows {
        out.extend(remainder(&w, &gr));
    }
    for w in cols {
        out.extend(remainder(&w, &gc));
    }
    out
}

/// Gaussian elimination on dense 0/1 rows; returns the unique solution.
fn solve_unique(mut m: Vec<Vec<u8>>, mut rhs: Vec<u8>) -> Option<Vec<u8>> {
    let n = m[0].len();
    let mut row = 0;
    for col in 0..n {
        let Some(p) = (row..m.len()).find(|&i| m[i][col] == 1) else {
            return None;
        };
        m.swap(p, row);
        rhs.swap(p, row);
        for i in 0..m.len() {
            if i != row && m[i][col] == 1 {
                let src = m[row].clone();
                for (d, s) in m[i].iter_mut().zip(src) {
                    *d ^= s;
                }
                rhs[i] ^= rhs[row];
            }
        }
        row += 1;
    }
    if rhs[row..].iter().any(|&b| b == 1) {
        return None;
    }
    Some(rhs[..n].to_vec())
}

#[test]
fn encoder_matches_joint_linear_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for c in toy_constructions() {
        let (mb, r) = (c.block(), c.r());
        let unknowns = 2 * r * mb;
        for trial in 0..3 {
            let b0 = if trial == 0 { BitMatrix::zeros(mb, mb) } else { random(mb, mb, &mut rng) };
            let b1 = random(mb, mb, &mut rng);
            let b2 = random(mb, mb, &mut rng);
            let zero = vec![0u8; unknowns];
            let base = constraint_values(&c, [&b0, &b1, &b2], &zero);
            assert_eq!(base.len(), unknowns);
            let mut cols = Vec::new();
            for q in 0..unknowns {
                let mut e = zero.clone();
                e[q] = 1;
                let v = constraint_values(&c, [&b0, &b1, &b2], &e);
                cols.push(v.iter().zip(&base).map(|(a, b)| a ^ b).collect::<Vec<u8>>());
            }
            let matrix: Vec<Vec<u8>> = (0..unknowns).map(|i| (0..unknowns).map(|q| cols[q][i]).collect()).collect();
            let z = solve_unique(matrix, base).expect("joint system must have a unique solution");

            let prev = if trial == 0 { None } else { Some(&b0) };
            let red = c.encode_pair(prev, &b1, &b2).unwrap();
            for i in 0..r {
                for j in 0..mb {
                    assert_eq!(red.y.bit(i, j), z[i * mb + j]);
                    assert_eq!(red.pc.bit(i, j), z[r * mb + i * mb + j]);
                }
            }
            // punctured parts are the permuted transposes
            let (p1, p2) = c.permutation_matrices();
            assert_eq!(red.x, unpermute(&p1, &red.y.transpose()));
            assert_eq!(red.pr, unpermute(&p2, &red.pc.transpose()));
            let (rows, colw) = pair_words(&c, &b0, &b1, &b2, &red.y, &red.pc);
            assert!(rows.iter().all(|w| c.row_code().is_codeword(w)));
            assert!(colw.iter().all(|w| c.col_code().is_codeword(w)));
        }
    }
}

#[test]
fn frame_round_trip_and_correction() {
    let c = Arc::new(FfConstruction::build(7, 2, 27, ColumnGenerator::Reciprocal, PermutationSearch::default()).unwrap());
    assert_eq!(c.block(), 36);
    for schedule in [Schedule::ColumnsFirst, Schedule::RowsFirst] {
        let code = FfCode::new(c.clone(), 5, DecoderConfig { schedule, ..DecoderConfig::default() }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let info: Vec<u8> = (0..code.info_len()).map(|_| rng.gen_range(0..2)).collect();
        let clean = code.encode(&info).unwrap();
        assert_eq!(code.violations(&clean), 0);
        assert_eq!(code.extract_info(&clean), info);
        let mut noisy = clean.clone();
        for m in noisy.mats.iter_mut() {
            let (rows, cols) = m.shape();
            for _ in 0..rows / 6 {
                m.flip(rng.gen_range(0..rows), rng.gen_range(0..cols));
            }
        }
        code.decode(&mut noisy);
        assert_eq!(noisy, clean);
    }
}

#[test]
fn table_scale_construction_is_invertible() {
    let c = FfConstruction::build(8, 3, 63, ColumnGenerator::Reciprocal, PermutationSearch::default()).unwrap();
    assert_eq!(c.r() * c.block(), 1728);
    // the low error floor pair is singular here (rank 1720), the seeded
    // search succeeds on its second draw
    let (e1, e2) = staircase::ff::ff_low_ef_exponents(72, 24).unwrap();
    let gr = c.row_code().parity_partition().unwrap().gr;
    let fr = c.col_code().parity_partition().unwrap().gr;
    assert_eq!(staircase::ff::ff_build_a(&gr, &fr, 72, &e1, &e2).rank(), 1720);
    assert_eq!(c.source(), PermutationSource::Random { seed: 1, attempt: 1 });
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let b1 = random(72, 72, &mut rng);
    let b2 = random(72, 72, &mut rng);
    let red = c.encode_pair(None, &b1, &b2).unwrap();
    let (rows, cols) = pair_words(&c, &BitMatrix::zeros(72, 72), &b1, &b2, &red.y, &red.pc);
    assert!(rows.iter().all(|w| c.row_code().is_codeword(w)));
    assert!(cols.iter().all(|w| c.col_code().is_codeword(w)));
}
