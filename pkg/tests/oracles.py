"""Reference values computed without the Laurent recursion."""
from fractions import Fraction


def rs_polynomial(power: int, n: int, order: int) -> list:
    """Rayleigh-Schroedinger coefficients eps_1..eps_order for
    H = -d^2/2 + x^2/2 + g x^power, E = n + 1/2 + sum_k eps_k g^k.

    Works on psi = exp(-x^2/2) P(x): the unperturbed operator acts on
    monomials as x^j -> (j - n) x^j - j(j-1)/2 x^(j-2), which is triangular,
    so each order is solved top-down in exact arithmetic.
    """
    p0 = {n: Fraction(1)}
    for j in range(n - 2, -1, -2):
        p0[j] = Fraction((j + 2) * (j + 1), 2) * p0[j + 2] / (j - n)
    P = [p0]
    eps = []
    for k in range(1, order + 1):
        rhs = {}
        for j, c in P[k - 1].items():
            rhs[j + power] = rhs.get(j + power, 0) - c
        for i in range(1, k):
            for j, c in P[k - i].items():
                rhs[j] = rhs.get(j, 0) + eps[i - 1] * c
        top = max(rhs) if rhs else 0
        p = {}
        e_k = None
        for j in range(top + 2, -1, -1):
            r = rhs.get(j, Fraction(0))
            if e_k is not None:
                r += e_k * p0.get(j, 0)
            r += Fraction((j + 2) * (j + 1), 2) * p.get(j + 2, Fraction(0))
            if j == n:
                e_k = -r
                p[j] = Fraction(0)
            else:
                p[j] = r / (j - n)
        P.append({j: c for j, c in p.items() if c != 0})
        eps.append(e_k)
    return eps


def sextic_plain(n: int, lam) -> list:
    """Closed forms [E1, E3, E5, E7] at omega0 = 1, integer arithmetic."""
    lam = Fraction(lam)
    p3 = 3 + 2 * n + 2 * n**2
    p5 = 3495 + 4538 * n + 5324 * n**2 + 1572 * n**3 + 786 * n**4
    p7 = 247935 + 444014 * n + 600050 * n**2 + 323868 * n**3 + 191424 * n**4 + 35388 * n**5 + 11796 * n**6
    return [
        Fraction(1, 2) + n,
        Fraction(5, 16) * lam * (1 + 2 * n) * p3,
        -Fraction(1, 256) * lam**2 * (1 + 2 * n) * p5,
        Fraction(5, 2048) * lam**3 * (1 + 2 * n) * p7,
    ]


def gen_binom(a: Fraction, b: int) -> Fraction:
    out = Fraction(1)
    for i in range(b):
        out *= (a - i) / (i + 1)
    return out


def sextic_reexpanded(n: int, lam, omega0, K: int) -> list:
    """Renormalized sextic E_1..E_K from the plain series (hbar = 1).

    By scaling, E_{2j+1}(omega) = a_j lam^j omega^(1-4j); substituting
    omega^2 = omega0^2 + (1 - omega0^2) and expanding in the second term
    order by order yields the renormalized coefficients.
    """
    lam, w0 = Fraction(lam), Fraction(omega0)
    J = (K - 1) // 2
    # the sextic coupling is g = lam/2, so a_j = eps_j / 2^j
    a = [Fraction(1, 2) + n] + [e / 2**j for j, e in enumerate(rs_polynomial(6, n, J), 1)]
    u = (1 - w0 * w0) / (w0 * w0)
    out = [Fraction(0)] * K
    for Jt in range(J + 1):
        total = Fraction(0)
        for j in range(Jt + 1):
            b = Jt - j
            total += a[j] * lam**j * w0 ** (1 - 4 * j) * gen_binom(Fraction(1 - 4 * j, 2), b) * u**b
        out[2 * Jt] = total
    return out


def textbook_second_order(f1, f2, n, m=1, omega=1):
    """Second-order energy for cubic f1 x^3 and quartic f2 x^4 couplings."""
    f1, f2 = Fraction(f1), Fraction(f2)
    return (-Fraction(15, 4) * f1**2 / (m**3 * omega**4) * (n * n + n + Fraction(11, 30))
            + Fraction(3, 2) * f2 / (m**2 * omega**2) * (n * n + n + Fraction(1, 2)))


def quasi_exact_eq101(v2, v4, v6):
    """E_1..E_6 closed forms as printed, via mpmath at 80 digits."""
    import mpmath

    with mpmath.workdps(80):
        V2, V4, V6 = (mpmath.mpf(Fraction(v).numerator) / Fraction(v).denominator for v in (v2, v4, v6))
        s = mpmath.sqrt(V2)
        return [
            s,
            3 * V4 / (2 * V2),
            3 * (-7 * V4**2 + 5 * V2 * V6) / (4 * V2 ** mpmath.mpf(2.5)),
            -9 * (-37 * V4**3 + 40 * V2 * V4 * V6) / (8 * V2**4),
            -15 * (2059 * V4**4 - 2992 * V2 * V4**2 * V6 + 466 * V2**2 * V6**2) / (64 * V2 ** mpmath.mpf(5.5)),
            9 * (101859 * V4**5 - 186380 * V2 * V4**3 * V6 + 61420 * V2**2 * V4 * V6**2) / (128 * V2**7),
        ]
