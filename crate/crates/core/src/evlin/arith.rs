use num_integer::Integer;

pub(crate) fn lcm(a: u64, b: u64) -> u64 {
    let g = a.gcd(&b);
    (a / g).checked_mul(b).expect("period overflow")
}

pub(crate) fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Solves `a·t ≡ b (mod m)`. Returns `(t0, step)` with all solutions `t0 + step·u`,
/// `0 ≤ t0 < step`, or `None` if unsolvable.
pub(crate) fn solve_linear_congruence(a: u64, b: u64, m: u64) -> Option<(u64, u64)> {
    let a = a % m;
    let b = b % m;
    let g = a.gcd(&m);
    if b % g != 0 {
        return None;
    }
    let step = m / g;
    if step == 1 {
        return Some((0, 1));
    }
    let inv = mod_inverse((a / g) % step, step).expect("coprime after dividing by gcd");
    let t0 = ((b / g) as u128 * inv as u128 % step as u128) as u64;
    Some((t0, step))
}

fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let e = (a as i128).extended_gcd(&(m as i128));
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m as i128) as u64)
}
