//! Eigenvalues of a general real matrix: balancing, reduction to upper
//! Hessenberg form by stabilized elimination, then the Francis double-shift QR
//! iteration.

use num_complex::Complex64;

use super::Matrix;

const MAX_ITERATIONS_PER_EIGENVALUE: usize = 60;

/// All eigenvalues of `m`, in the order they deflate. Returns `None` if the
/// QR iteration fails to converge.
pub fn real_eigenvalues(m: &Matrix) -> Option<Vec<Complex64>> {
    let n = m.dim();
    if n == 0 {
        return Some(Vec::new());
    }
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m[(i, j)]).collect()).collect();
    if a.iter().flatten().any(|v| !v.is_finite()) {
        return None;
    }
    balance(&mut a);
    to_hessenberg(&mut a);
    hessenberg_qr(a)
}

/// Characteristic polynomial `det(λI − m)`, lowest degree first, by the
/// La Budde recursion on a balanced Hessenberg form of `m`. Much less
/// sensitive to rounding than trace recursions once the eigenvalues spread
/// over more than a decade.
pub fn hessenberg_char_poly(m: &Matrix) -> Vec<f64> {
    let n = m.dim();
    let mut h: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m[(i, j)]).collect()).collect();
    balance(&mut h);
    to_hessenberg(&mut h);
    // p[k] = det(λI − H[..k, ..k])
    let mut p: Vec<Vec<f64>> = vec![vec![1.0]];
    for k in 0..n {
        let mut next = vec![0.0; k + 2];
        for (d, c) in p[k].iter().enumerate() {
            next[d + 1] += c;
            next[d] -= h[k][k] * c;
        }
        let mut product = 1.0;
        for i in (0..k).rev() {
            product *= h[i + 1][i];
            let w = h[i][k] * product;
            if w != 0.0 {
                for (d, c) in p[i].iter().enumerate() {
                    next[d] -= w * c;
                }
            }
        }
        p.push(next);
    }
    p.pop().unwrap_or_else(|| vec![1.0])
}

fn balance(a: &mut [Vec<f64>]) {
    const RADIX: f64 = 2.0;
    let n = a.len();
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= RADIX;
                    c *= sqrdx;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for v in a[i].iter_mut() {
                        *v *= g;
                    }
                    for row in a.iter_mut() {
                        row[i] *= f;
                    }
                }
            }
        }
    }
}

fn to_hessenberg(a: &mut [Vec<f64>]) {
    let n = a.len();
    for m in 1..n.saturating_sub(1) {
        let mut x: f64 = 0.0;
        let mut pivot = m;
        for (j, row) in a.iter().enumerate().skip(m) {
            if row[m - 1].abs() > x.abs() {
                x = row[m - 1];
                pivot = j;
            }
        }
        if pivot != m {
            a.swap(pivot, m);
            for row in a.iter_mut() {
                row.swap(pivot, m);
            }
        }
        if x != 0.0 {
            for i in m + 1..n {
                let mut y = a[i][m - 1];
                if y != 0.0 {
                    y /= x;
                    a[i][m - 1] = y;
                    for j in m..n {
                        a[i][j] -= y * a[m][j];
                    }
                    for row in a.iter_mut() {
                        row[m] += y * row[i];
                    }
                }
            }
        }
    }
    for (i, row) in a.iter_mut().enumerate() {
        for v in row.iter_mut().take(i.saturating_sub(1)) {
            *v = 0.0;
        }
    }
}

#[allow(clippy::many_single_char_names)]
fn hessenberg_qr(mut a: Vec<Vec<f64>>) -> Option<Vec<Complex64>> {
    let n = a.len();
    let eps = f64::EPSILON;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let mut anorm = 0.0;
    for (i, row) in a.iter().enumerate() {
        for v in row.iter().skip(i.saturating_sub(1)) {
            anorm += v.abs();
        }
    }
    let mut nn = n as isize - 1;
    let mut t = 0.0;
    while nn >= 0 {
        let mut its = 0;
        loop {
            let nu = nn as usize;
            let mut l = nu;
            while l > 0 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() <= eps * s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[nu][nu];
            if l == nu {
                out[nu] = Complex64::new(x + t, 0.0);
                nn -= 1;
                break;
            }
            let mut y = a[nu - 1][nu - 1];
            let mut w = a[nu][nu - 1] * a[nu - 1][nu];
            if l + 1 == nu {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + z.copysign(p);
                    out[nu - 1] = Complex64::new(x + z, 0.0);
                    out[nu] = out[nu - 1];
                    if z != 0.0 {
                        out[nu] = Complex64::new(x - w / z, 0.0);
                    }
                } else {
                    out[nu] = Complex64::new(x + p, -z);
                    out[nu - 1] = out[nu].conj();
                }
                nn -= 2;
                break;
            }
            if its == MAX_ITERATIONS_PER_EIGENVALUE {
                return None;
            }
            if its == 10 || its == 20 || its == 40 {
                // exceptional shift
                t += x;
                for (i, row) in a.iter_mut().enumerate().take(nu + 1) {
                    row[i] -= x;
                }
                let s = a[nu][nu - 1].abs() + a[nu - 1][nu - 2].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            let (mut p, mut q, mut r);
            let mut m = nu - 2;
            loop {
                let z = a[m][m];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[m + 1][m] + a[m][m + 1];
                q = a[m + 1][m + 1] - z - rr - ss;
                r = a[m + 2][m + 1];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                if u <= eps * v {
                    break;
                }
                m -= 1;
            }
            for i in m..nu - 1 {
                a[i + 2][i] = 0.0;
                if i != m {
                    a[i + 2][i - 1] = 0.0;
                }
            }
            let mut xk = 0.0;
            for k in m..nu {
                if k != m {
                    p = a[k][k - 1];
                    q = a[k + 1][k - 1];
                    r = 0.0;
                    if k + 1 != nu {
                        r = a[k + 2][k - 1];
                    }
                    xk = p.abs() + q.abs() + r.abs();
                    if xk != 0.0 {
                        p /= xk;
                        q /= xk;
                        r /= xk;
                    }
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a[k][k - 1] = -a[k][k - 1];
                        }
                    } else {
                        a[k][k - 1] = -s * xk;
                    }
                    p += s;
                    let hx = p / s;
                    let hy = q / s;
                    let hz = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nu {
                        let mut pp = a[k][j] + q * a[k + 1][j];
                        if k + 1 != nu {
                            pp += r * a[k + 2][j];
                            a[k + 2][j] -= pp * hz;
                        }
                        a[k + 1][j] -= pp * hy;
                        a[k][j] -= pp * hx;
                    }
                    let mmin = nu.min(k + 3);
                    for row in a.iter_mut().take(mmin + 1).skip(l) {
                        let mut pp = hx * row[k] + hy * row[k + 1];
                        if k + 1 != nu {
                            pp += hz * row[k + 2];
                            row[k + 2] -= pp * r;
                        }
                        row[k + 1] -= pp * q;
                        row[k] -= pp;
                    }
                }
            }
            if l + 1 >= nu {
                break;
            }
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn rotation_has_unit_imaginary_pair() {
        let ev = sorted(real_eigenvalues(&Matrix::rotation_generator()).unwrap());
        assert!((ev[0] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((ev[1] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn companion_of_known_roots() {
        // roots 1, 2, 3, 4 -> x⁴ − 10x³ + 35x² − 50x + 24
        let c = [24.0, -50.0, 35.0, -10.0];
        let mut m = Matrix::zeros(4);
        for i in 0..3 {
            m[(i + 1, i)] = 1.0;
        }
        for (i, ci) in c.iter().enumerate() {
            m[(i, 3)] = -ci;
        }
        let ev = sorted(real_eigenvalues(&m).unwrap());
        for (k, z) in ev.iter().enumerate() {
            assert!((z - Complex64::new(k as f64 + 1.0, 0.0)).norm() < 1e-10, "{ev:?}");
        }
    }

    #[test]
    fn hessenberg_char_poly_of_known_roots() {
        // (λ−1)(λ−2)(λ−3)(λ+0.5) behind a rotation
        let m = Matrix::from_rows([
            [1.0, 7.0, -3.0, 0.5],
            [0.0, 2.0, 4.0, 1.0],
            [0.0, 0.0, 3.0, -2.0],
            [0.0, 0.0, 0.0, -0.5],
        ]);
        let (c, sn) = (0.6, 0.8);
        let t = Matrix::from_rows([
            [c, -sn, 0.0, 0.0],
            [sn, c, 0.0, 0.0],
            [0.0, 0.0, c, sn],
            [0.0, 0.0, -sn, c],
        ]);
        let a = &(&t * &m) * &t.transpose();
        let c = hessenberg_char_poly(&a);
        let want = [-3.0, -0.5, 8.0, -5.5, 1.0];
        for (x, y) in c.iter().zip(want) {
            assert!((x - y).abs() < 1e-12, "{c:?}");
        }
    }

    #[test]
    fn triangular_matrix_returns_diagonal() {
        let m = Matrix::from_rows([[2.0, 5.0, -1.0], [0.0, -3.0, 4.0], [0.0, 0.0, 0.5]]);
        let ev = sorted(real_eigenvalues(&m).unwrap());
        let expect = [-3.0, 0.5, 2.0];
        for (z, e) in ev.iter().zip(expect) {
            assert!((z.re - e).abs() < 1e-13 && z.im.abs() < 1e-13);
        }
    }
}
