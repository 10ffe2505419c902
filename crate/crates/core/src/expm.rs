//! Matrix exponential by scaling and squaring with the degree-13 Pade
//! approximant (Higham 2005). Serves as the closed-form reference for
//! zero-delay trajectories; the simulator never calls it.

use crate::mat::Mat;

// Pade-13 coefficients.
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// exp(A) for a square matrix.
pub fn expm(a: &Mat) -> Mat {
    assert!(a.is_square());
    let n = a.rows();
    let norm = a.norm_one();
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    let a = a.scale(0.5_f64.powi(s as i32));

    let a2 = a.matmul(&a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);
    let ident = Mat::identity(n);

    // u = A (A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I)
    let w1 = a6
        .scale(B13[13])
        .add(&a4.scale(B13[11]))
        .add(&a2.scale(B13[9]));
    let w2 = a6
        .scale(B13[7])
        .add(&a4.scale(B13[5]))
        .add(&a2.scale(B13[3]))
        .add(&ident.scale(B13[1]));
    let u = a.matmul(&a6.matmul(&w1).add(&w2));
    // v = A6 (b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let z1 = a6
        .scale(B13[12])
        .add(&a4.scale(B13[10]))
        .add(&a2.scale(B13[8]));
    let z2 = a6
        .scale(B13[6])
        .add(&a4.scale(B13[4]))
        .add(&a2.scale(B13[2]))
        .add(&ident.scale(B13[0]));
    let v = a6.matmul(&z1).add(&z2);

    // (v - u) r = (v + u)
    let numer = v.add(&u);
    let denom = v.add(&u.scale(-1.0));
    let mut r = denom
        .lu_solve(&numer)
        .expect("Pade denominator is nonsingular for scaled matrices");
    for _ in 0..s {
        r = r.matmul(&r);
    }
    r
}

/// Reference solution of x' = -L x: returns exp(-L t) x0.
pub fn expm_oracle(l: &Mat, x0: &[f64], t: f64) -> Vec<f64> {
    assert!(t >= 0.0, "oracle needs a nonnegative time");
    if t == 0.0 {
        return x0.to_vec();
    }
    expm(&l.scale(-t)).matvec(x0)
}
