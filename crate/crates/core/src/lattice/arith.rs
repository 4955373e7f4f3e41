//! Exact integer routines: perfect squares, trial factorization, and the
//! sum-of-two-squares machinery behind r2 and the Mordell criteria.

/// True iff `n` is a perfect square, exact for the full u128 range.
pub fn is_perfect_square(n: u128) -> bool {
    let r = n.isqrt();
    r * r == n
}

/// Trial-division factorization, `n >= 1`. Desk-scale inputs (< 2^48) keep
/// this well under a millisecond.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    assert!(n >= 1, "factorize expects n >= 1");
    let mut out = Vec::new();
    let mut push = |p: u64, e: u32| {
        if e > 0 {
            out.push((p, e));
        }
    };
    let mut e2 = 0;
    while n.is_multiple_of(2) {
        n /= 2;
        e2 += 1;
    }
    push(2, e2);
    let mut p = 3u64;
    while p * p <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        push(p, e);
        p += 2;
    }
    push(n, u64::from(n > 1) as u32);
    out
}

/// Number of ordered representations `n = x^2 + y^2` over the integers,
/// from the multiplicative formula: 4 * prod (a_p + 1) over p = 1 mod 4,
/// zero when any prime p = 3 mod 4 divides to an odd power.
pub fn r2_count(n: u64) -> u64 {
    assert!(n >= 1, "r2_count expects n >= 1");
    let mut count = 4u64;
    for (p, e) in factorize(n) {
        match p % 4 {
            1 => count *= u64::from(e) + 1,
            3 if e % 2 == 1 => return 0,
            _ => {}
        }
    }
    count
}

/// True iff `n` is a sum of two integer squares (0 counts: 0 = 0 + 0).
pub fn is_sum_of_two_squares(n: u64) -> bool {
    n == 0 || r2_count(n) > 0
}

/// Sorted divisors of `n`.
pub fn divisors(n: u64) -> Vec<u64> {
    assert!(n >= 1);
    let mut out = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            if d != n / d {
                out.push(n / d);
            }
        }
        d += 1;
    }
    out.sort_unstable();
    out
}
