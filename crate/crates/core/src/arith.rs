//! Elementary integer arithmetic shared by the counting modules.

use num_integer::Integer;

/// Floor of the square root of a nonnegative integer.
pub fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

pub fn is_square(n: i128) -> bool {
    if n < 0 {
        return false;
    }
    let r = isqrt(n as u128);
    r * r == n as u128
}

/// Solves `a*x + b*y = g` with `g = gcd(a, b) >= 0`.
pub fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let e = a.extended_gcd(&b);
    if e.gcd < 0 {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

/// Smallest-prime-factor table for `0..=n`.
pub fn spf_sieve(n: usize) -> Vec<u32> {
    let mut spf = vec![0u32; n + 1];
    let mut primes: Vec<u32> = Vec::new();
    for i in 2..=n {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
        }
        for &p in &primes {
            let m = p as usize * i;
            if p > spf[i] || m > n {
                break;
            }
            spf[m] = p;
        }
    }
    spf
}

/// Euler's totient for `0..=n` by a linear sieve.
pub fn totient_sieve(n: usize) -> Vec<u32> {
    let mut phi = vec![0u32; n + 1];
    let mut primes: Vec<u32> = Vec::new();
    if n >= 1 {
        phi[1] = 1;
    }
    for i in 2..=n {
        if phi[i] == 0 {
            phi[i] = i as u32 - 1;
            primes.push(i as u32);
        }
        for &p in &primes {
            let m = p as usize * i;
            if m > n {
                break;
            }
            if i % p as usize == 0 {
                phi[m] = phi[i] * p;
                break;
            }
            phi[m] = phi[i] * (p - 1);
        }
    }
    phi
}

/// Prime factorisation `(p, e)` of `n >= 1` using a smallest-prime-factor table.
pub fn factor_with(spf: &[u32], mut n: usize) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    while n > 1 {
        let p = spf[n] as usize;
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        out.push((p as u64, e));
    }
    out
}

/// Trial-division factorisation, for one-off use on moderate inputs.
pub fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Kronecker symbol `(a / n)` for `n >= 1`.
pub fn kronecker(a: i64, n: u64) -> i32 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut n = n;
    let mut result = 1i32;
    let tz = n.trailing_zeros();
    if tz > 0 {
        if a % 2 == 0 {
            return 0;
        }
        let r = a.rem_euclid(8);
        if tz % 2 == 1 && (r == 3 || r == 5) {
            result = -result;
        }
        n >>= tz;
    }
    // Jacobi symbol (a / n) for odd n.
    let mut a = a.rem_euclid(n as i64) as u64;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

fn is_squarefree(n: u64) -> bool {
    factor(n).iter().all(|&(_, e)| e == 1)
}

/// True when `d` is the discriminant of a quadratic field.
pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    match d.rem_euclid(4) {
        1 => is_squarefree(d.unsigned_abs()),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && is_squarefree(m.unsigned_abs())
        }
        _ => false,
    }
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, b, m);
        }
        b = mulmod(b, b, m);
        e >>= 1;
    }
    r
}

/// Square roots of `a` modulo an odd prime `p` (Tonelli–Shanks).
fn sqrt_mod_prime(a: u64, p: u64) -> Vec<u64> {
    let a = a % p;
    if a == 0 {
        return vec![0];
    }
    if p == 2 {
        return vec![a];
    }
    if powmod(a, (p - 1) / 2, p) != 1 {
        return vec![];
    }
    let (mut q, mut s) = (p - 1, 0u32);
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while powmod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = powmod(z, q, p);
    let mut t = powmod(a, q, p);
    let mut r = powmod(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mulmod(tt, tt, p);
            i += 1;
        }
        let b = powmod(c, 1u64 << (m - i - 1), p);
        m = i;
        c = mulmod(b, b, p);
        t = mulmod(t, c, p);
        r = mulmod(r, b, p);
    }
    let mut v = vec![r, p - r];
    v.sort_unstable();
    v.dedup();
    v
}

/// All `x` in `0..p^k` with `x² ≡ a (mod p^k)`.
pub fn sqrt_mod_prime_power(a: i64, p: u64, k: u32) -> Vec<u64> {
    let mut roots: Vec<u64> = if p == 2 {
        (0..2).filter(|&x| (x * x) as i64 % 2 == a.rem_euclid(2)).collect()
    } else {
        sqrt_mod_prime(a.rem_euclid(p as i64) as u64, p)
    };
    let mut modulus = p;
    for _ in 1..k {
        let next = modulus * p;
        let target = a.rem_euclid(next as i64) as u64;
        let mut lifted = Vec::new();
        for &r in &roots {
            for j in 0..p {
                let x = r + j * modulus;
                if mulmod(x, x, next) == target {
                    lifted.push(x);
                }
            }
        }
        roots = lifted;
        modulus = next;
        if roots.is_empty() {
            break;
        }
    }
    roots
}

/// All `x` in `0..m` with `x² ≡ a (mod m)`, given the factorisation of `m`.
pub fn sqrt_mod(a: i64, factors: &[(u64, u32)]) -> Vec<u64> {
    let mut roots = vec![0u64];
    let mut modulus = 1u64;
    for &(p, e) in factors {
        let pk = p.pow(e);
        let local = sqrt_mod_prime_power(a, p, e);
        if local.is_empty() {
            return Vec::new();
        }
        // CRT: x ≡ r (mod modulus), x ≡ s (mod pk)
        let (_, inv, _) = ext_gcd((modulus % pk) as i64, pk as i64);
        let inv = inv.rem_euclid(pk as i64) as u64;
        let next = modulus * pk;
        let mut combined = Vec::with_capacity(roots.len() * local.len());
        for &r in &roots {
            for &s in &local {
                let diff = (s as i64 - (r % pk) as i64).rem_euclid(pk as i64) as u64;
                let t = mulmod(diff, inv, pk);
                combined.push(r + modulus * t);
            }
        }
        roots = combined;
        modulus = next;
    }
    roots.sort_unstable();
    roots
}
