#!/usr/bin/env python3
"""Generate newform ingestion files (prime Hecke eigenvalues) for the bundled forms.

Elliptic-curve forms come from point counting; 5.4.a.a is eta(z)^4 eta(5z)^4.
"""
import argparse
import numpy as np


def primes_up_to(n):
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, int(n ** 0.5) + 1):
        if sieve[i]:
            sieve[i * i::i] = False
    return np.nonzero(sieve)[0]


def ap_curve(a1, a2, a3, a4, a6, p):
    # y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 over F_p (p of good reduction)
    x = np.arange(p, dtype=np.int64)
    if p == 2:
        pts = 0
        for xv in range(2):
            for yv in range(2):
                if (yv * yv + a1 * xv * yv + a3 * yv - (xv ** 3 + a2 * xv * xv + a4 * xv + a6)) % 2 == 0:
                    pts += 1
        return p - pts
    # complete the square: (2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    rhs = (4 * (x * x % p * x % p) + b2 * (x * x % p) + 2 * b4 * x + b6) % p
    sq = np.zeros(p, dtype=np.int64)
    sq[(x * x) % p] = 1
    legendre = np.where(rhs == 0, 0, np.where(sq[rhs] == 1, 1, -1))
    return -int(legendre.sum())


def eta_product_coeffs(nmax):
    # q * prod (1-q^n)^4 (1-q^{5n})^4, coefficients of q^1..q^nmax
    def eta_series(step, length):
        s = np.zeros(length, dtype=np.int64)
        k = 0
        while True:
            done = True
            for kk in ([k] if k == 0 else [k, -k]):
                e = kk * (3 * kk - 1) // 2 * step
                if e < length:
                    s[e] += -1 if kk % 2 else 1
                    done = False
            if done and k > 0:
                break
            k += 1
        return s

    length = nmax
    result = np.zeros(length, dtype=np.int64)
    result[0] = 1
    for step in (1, 1, 1, 1, 5, 5, 5, 5):
        e = eta_series(step, length)
        nz = np.nonzero(e)[0]
        acc = np.zeros(length, dtype=np.int64)
        for idx in nz:
            acc[idx:] += e[idx] * result[:length - idx]
        result = acc
    return {n: int(result[n - 1]) for n in range(1, nmax + 1)}


def write(path, label, level, weight, al, coeffs):
    with open(path, "w") as fh:
        fh.write(f"# prime Hecke eigenvalues a_l of {label}\n")
        fh.write(f"label {label}\nlevel {level}\nweight {weight}\n")
        for ell, sign in al:
            fh.write(f"atkin_lehner {ell} {sign}\n")
        fh.write("coefficients\n")
        for ell, a in coeffs:
            fh.write(f"{ell} {a}\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data/newforms")
    ap.add_argument("--bound", type=int, default=300000)
    args = ap.parse_args()
    ps = primes_up_to(args.bound)

    curves = {
        "11a": (11, (0, -1, 1, -10, -20), [(11, -1)]),
        "37a": (37, (0, 0, 1, -1, 0), [(37, 1)]),
    }
    for label, (n, ainv, al) in curves.items():
        bound = args.bound if label == "11a" else 20000
        coeffs = []
        for p in ps:
            p = int(p)
            if p > bound:
                break
            if p == n:
                # split/non-split multiplicative reduction: a_p = -w_p
                coeffs.append((p, -al[0][1]))
            else:
                coeffs.append((p, ap_curve(*ainv, p)))
        write(f"{args.out}/{label}.txt", label, n, 2, al, coeffs)

    bound = args.bound // 2
    eta = eta_product_coeffs(bound)
    coeffs = [(int(p), eta[int(p)]) for p in ps if p <= bound]
    # a_5 = -w_5 * 5^{(4-2)/2}
    w5 = -eta[5] // 5
    write(f"{args.out}/5.4.a.a.txt", "5.4.a.a", 5, 4, [(5, w5)], coeffs)


if __name__ == "__main__":
    main()
