use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use staircase::bch::ComponentCode;
use staircase::codec::{DecoderConfig, FrameCodec};
use staircase::gf2::{BitMatrix, VecMapping};
use staircase::pff::{pff_build_b, PffCode, PffConstruction, PiSearch};

fn random(rows: usize, cols: usize, rng: &mut impl Rng) -> BitMatrix {
    let mut m = BitMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m.set(i, j, rng.gen());
        }
    }
    m
}

fn remainder(word: &[u8], gen: &[u8]) -> Vec<u8> {
    let deg = gen.len() - 1;
    let mut w = word.to_vec();
    for j in 0..w.len() - deg {
        if w[j] == 1 {
            for (d, &g) in gen.iter().enumerate() {
                w[j + deg - d] ^= g;
            }
        }
    }
    w[w.len() - deg..].to_vec()
}

fn toys() -> Vec<PffConstruction> {
    vec![
        PffConstruction::build(6, 1, 25, 1, PiSearch::default()).unwrap(),
        PffConstruction::build(7, 2, 39, 1, PiSearch::default()).unwrap(),
    ]
}

/// Column and row words of the self-protection pairs, from the drawn `D`.
fn sp_words(c: &PffConstruction, prev: &BitMatrix, d: &BitMatrix, info: &BitMatrix) -> (Vec<Vec<u8>>, Vec<Vec<u8>>) {
    let (mb, r) = (c.block(), c.r());
    let w = mb - 2 * r;
    let cols = (0..mb)
        .map(|j| {
            let mut v = vec![0u8; 2 * r];
            v.extend((0..mb).map(|i| prev.bit(i, j)));
            v.extend((0..mb).map(|i| d.bit(i, j)));
            v
        })
        .collect();
    let right = d.submatrix(0..mb, w..mb).mul(&c.pi_matrix()).unwrap();
    let y = d.submatrix(w..w + r, 0..mb);
    let pc = d.submatrix(w + r..mb, 0..mb);
    let row_m = d
        .submatrix(0..mb, 0..w)
        .hstack(&right)
        .unwrap()
        .hstack(info)
        .unwrap()
        .hstack(&y.transpose())
        .unwrap()
        .hstack(&pc.transpose())
        .unwrap();
    let rows = (0..mb).map(|i| row_m.row_bits(i)).collect();
    (cols, rows)
}

fn constraints(c: &PffConstruction, prev: &BitMatrix, sp_info: &BitMatrix, info: &BitMatrix, z: &[u8]) -> Vec<u8> {
    let (mb, r) = (c.block(), c.r());
    let w = mb - 2 * r;
    let mut d = BitMatrix::zeros(mb, mb);
    d.paste(sp_info, 0, 0);
    for i in 0..2 * r {
        for j in 0..mb {
            d.set(w + i, j, z[i * mb + j] == 1);
        }
    }
    let (cols, rows) = sp_words(c, prev, &d, info);
    let gc = c.col_code().generator().coeffs();
    let gr = c.row_code().generator().coeffs();
    let mut out = Vec::new();
    for v in cols {
        out.extend(remainder(&v, &gc));
    }
    for v in rows {
        out.extend(remainder(&v, &gr));
    }
    out
}

fn solve_unique(mut m: Vec<Vec<u8>>, mut rhs: Vec<u8>) -> Option<Vec<u8>> {
    let n = m[0].len();
    for col in 0..n {
        let p = (col..m.len()).find(|&i| m[i][col] == 1)?;
        m.swap(p, col);
        rhs.swap(p, col);
        for i in 0..m.len() {
            if i != col && m[i][col] == 1 {
                let src = m[col].clone();
                for (d, s) in m[i].iter_mut().zip(src) {
                    *d ^= s;
                }
                rhs[i] ^= rhs[col];
            }
        }
    }
    if rhs[n..].iter().any(|&b| b == 1) {
        return None;
    }
    Some(rhs[..n].to_vec())
}

#[test]
fn staged_encoder_matches_joint_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for c in toys() {
        let (mb, r) = (c.block(), c.r());
        let w = mb - 2 * r;
        let unknowns = 2 * r * mb;
        for trial in 0..4 {
            let prev = if trial == 0 { BitMatrix::zeros(mb, mb) } else { random(mb, mb, &mut rng) };
            let sp_info = random(w, mb, &mut rng);
            let info = random(mb, mb, &mut rng);
            let zero = vec![0u8; unknowns];
            let base = constraints(&c, &prev, &sp_info, &info, &zero);
            assert_eq!(base.len(), unknowns);
            let cols: Vec<Vec<u8>> = (0..unknowns)
                .map(|q| {
                    let mut e = zero.clone();
                    e[q] = 1;
                    let v = constraints(&c, &prev, &sp_info, &info, &e);
                    v.iter().zip(&base).map(|(a, b)| a ^ b).collect()
                })
                .collect();
            let matrix = (0..unknowns).map(|i| (0..unknowns).map(|q| cols[q][i]).collect()).collect();
            let z = solve_unique(matrix, base).expect("unique solution");
            let d = c.encode_self_protected(&prev, &sp_info, &info).unwrap();
            for i in 0..2 * r {
                for j in 0..mb {
                    assert_eq!(d.bit(w + i, j), z[i * mb + j], "trial {trial} ({i}, {j})");
                }
            }
        }
    }
}

#[test]
fn self_protection_identities_hold() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for c in toys() {
        let (mb, r) = (c.block(), c.r());
        let w = mb - 2 * r;
        for _ in 0..20 {
            let prev = random(mb, mb, &mut rng);
            let info = random(mb, mb, &mut rng);
            let d = c.encode_self_protected(&prev, &random(w, mb, &mut rng), &info).unwrap();
            let (cols, rows) = sp_words(&c, &prev, &d, &info);
            assert!(cols.iter().all(|v| c.col_code().is_codeword(v)));
            assert!(rows.iter().all(|v| c.row_code().is_codeword(v)));
        }
        let zero = BitMatrix::zeros(mb, mb);
        let d = c.encode_self_protected(&zero, &BitMatrix::zeros(w, mb), &zero).unwrap();
        assert!(d.is_zero());
    }
}

/// `Y_2 ↦ Y_2ᵀAᵀ + [I; F_rᵀ] Y_2 G̃_B`, column by column.
fn direct_b(row: &ComponentCode, col: &ComponentCode, pi: &[usize]) -> BitMatrix {
    let r = row.r();
    let mb = (row.k() - r) / 2;
    let a = PffConstruction::stage1_matrix(row, col).unwrap();
    let fr = col.parity_partition().unwrap().gr;
    let gi = row.parity_partition().unwrap().gi;
    let gb = BitMatrix::from_perm_targets(pi).mul(&gi.submatrix(mb - 2 * r..mb, 0..r)).unwrap();
    let k = BitMatrix::identity(r).vstack(&fr.transpose()).unwrap();
    let n = 2 * r * r;
    let mut b = BitMatrix::zeros(n, n);
    for q in 0..n {
        let mut e = BitMatrix::zeros(n, 1);
        e.set(q, 0, true);
        let y2 = BitMatrix::unvec(&e, VecMapping::row_wise(r, 2 * r)).unwrap();
        let out = y2
            .transpose()
            .mul(&a.transpose())
            .unwrap()
            .add(&k.mul(&y2).unwrap().mul(&gb).unwrap())
            .unwrap();
        let v = out.vec(VecMapping::row_wise(2 * r, r)).unwrap();
        for i in 0..n {
            b.set(i, q, v.get(i, 0));
        }
    }
    b
}

#[test]
fn stage2_matrix_matches_direct_map() {
    for c in toys() {
        let b = PffConstruction::stage2_matrix(c.row_code(), c.col_code(), c.pi_targets()).unwrap();
        assert_eq!(b, direct_b(c.row_code(), c.col_code(), c.pi_targets()));
        let a = PffConstruction::stage1_matrix(c.row_code(), c.col_code()).unwrap();
        let fr = c.col_code().parity_partition().unwrap().gr;
        assert_eq!(b.rank(), 2 * c.r() * c.r());
        assert_eq!(a.mul(c.a_inverse()).unwrap(), BitMatrix::identity(c.r()));
        assert_eq!(b.mul(c.b_inverse()).unwrap(), BitMatrix::identity(2 * c.r() * c.r()));
        let _ = pff_build_b(&a, &fr, &BitMatrix::zeros(2 * c.r(), c.r()));
    }
}

#[test]
fn search_returns_first_full_rank_candidate() {
    use rand::seq::SliceRandom;
    for c in toys() {
        let r = c.r();
        let (attempt, seed) = c.search_origin();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for a in 0..=attempt {
            let pi: Vec<usize> = if a == 0 {
                (0..2 * r).collect()
            } else {
                let mut p: Vec<usize> = (0..2 * r).collect();
                p.shuffle(&mut rng);
                p
            };
            let full = direct_b(c.row_code(), c.col_code(), &pi).rank() == 2 * r * r;
            assert_eq!(full, a == attempt, "attempt {a}");
            if a == attempt {
                assert_eq!(pi, c.pi_targets());
            }
        }
    }
}

#[test]
fn table_two_row_one_stage_one() {
    let (row, col) = PffConstruction::codes(8, 3, 15).unwrap();
    let a = PffConstruction::stage1_matrix(&row, &col).unwrap();
    let inv = a.invert().unwrap();
    assert_eq!(a.mul(&inv).unwrap(), BitMatrix::identity(24));
    let c = PffConstruction::with_codes(row, col, 1, PiSearch::default()).unwrap();
    assert_eq!(c.b_inverse().rows(), 1152);
}

#[test]
fn frame_round_trip_all_propagation_lengths() {
    let base = toys().remove(1);
    for l in 1..=3 {
        let c = Arc::new(base.with_propagation(l).unwrap());
        let code = PffCode::new(c.clone(), 3, DecoderConfig::default()).unwrap();
        let bits: usize = c.period_info_bits().iter().sum();
        assert_eq!(code.info_len(), 3 * bits);
        let mut rng = ChaCha8Rng::seed_from_u64(l as u64);
        let info: Vec<u8> = (0..code.info_len()).map(|_| rng.gen_range(0..2)).collect();
        let clean = code.encode(&info).unwrap();
        assert_eq!(code.violations(&clean), 0, "L={l}");
        let mut noiseless = clean.clone();
        code.decode(&mut noiseless);
        assert_eq!(noiseless, clean);
        assert_eq!(code.extract_info(&clean), info);

        let mut noisy = clean.clone();
        for m in noisy.mats.iter_mut() {
            for _ in 0..4 {
                m.flip(rng.gen_range(0..30), rng.gen_range(0..30));
            }
        }
        code.decode(&mut noisy);
        assert_eq!(noisy, clean, "L={l}");
    }
}
