"""LLL on a Gram matrix and Fincke-Pohst enumeration of short vectors."""

from __future__ import annotations

import math


def lll_gram(G, delta=0.99):
    """LLL-reduce the lattice with Gram matrix G (floats or mpf).

    Returns (T, G_red): rows of T are integer coordinates of the reduced
    basis in the input basis, and G_red = T G T^t.
    """
    n = len(G)
    G = [list(r) for r in G]
    T = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    if n <= 1:
        return T, G
    mu = [[0] * n for _ in range(n)]
    B = [0] * n

    def gso(k):
        for j in range(k):
            s = G[k][j]
            for l in range(j):
                s -= mu[j][l] * mu[k][l] * B[l]
            mu[k][j] = s / B[j]
        s = G[k][k]
        for l in range(k):
            s -= mu[k][l] * mu[k][l] * B[l]
        B[k] = s

    def sub(k, j, q):
        # b_k -= q b_j
        Gj = G[j]
        Gk = G[k]
        for i in range(n):
            Gk[i] -= q * Gj[i]
        for i in range(n):
            G[i][k] -= q * G[i][j]
        Tk, Tj = T[k], T[j]
        for i in range(n):
            Tk[i] -= q * Tj[i]
        for l in range(j):
            mu[k][l] -= q * mu[j][l]
        mu[k][j] -= q

    gso(0)
    k = 1
    steps = 0
    while k < n:
        steps += 1
        if steps > 100000:
            break
        gso(k)
        for j in range(k - 1, -1, -1):
            q = int(math.floor(mu[k][j] + 0.5)) if abs(mu[k][j]) > 0.5 else 0
            if q:
                sub(k, j, q)
        if B[k] < (delta - mu[k][k - 1] ** 2) * B[k - 1]:
            G[k], G[k - 1] = G[k - 1], G[k]
            for r in G:
                r[k], r[k - 1] = r[k - 1], r[k]
            T[k], T[k - 1] = T[k - 1], T[k]
            k = max(k - 1, 1)
            gso(k - 1)
        else:
            k += 1
    return T, G


def cholesky_q(G):
    """Upper-triangular q with Q(x) = sum_i q_ii (x_i + sum_{j>i} q_ij x_j)^2."""
    n = len(G)
    q = [[0.0] * n for _ in range(n)]
    a = [[float(G[i][j]) for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(i, n):
            q[i][j] = a[i][j]
    for i in range(n):
        for j in range(i + 1, n):
            q[j][i] = q[i][j]
            q[i][j] = q[i][j] / q[i][i]
        for k in range(i + 1, n):
            for l in range(k, n):
                q[k][l] -= q[k][i] * q[i][l]
    return q


def short_vectors(G, bound, max_count=None, include_zero=False):
    """All integer x != 0 with x G x^t <= bound, one of each pair +-x.

    The bound is inflated by a relative 1e-9 so that floating point error
    cannot drop boundary vectors; callers filter exactly.
    """
    n = len(G)
    q = cholesky_q(G)
    C = float(bound) * (1 + 1e-9) + 1e-12
    out = []
    x = [0] * n

    def rec(i, remaining):
        center = -sum(q[i][j] * x[j] for j in range(i + 1, n))
        qi = q[i][i]
        if qi <= 0:
            return
        r = math.sqrt(max(remaining, 0.0) / qi)
        lo_ = math.ceil(center - r - 1e-9)
        hi_ = math.floor(center + r + 1e-9)
        for v in range(lo_, hi_ + 1):
            t = v - center
            rem = remaining - qi * t * t
            if rem < -1e-9 * C:
                continue
            x[i] = v
            if i == 0:
                if any(x) or include_zero:
                    # keep the representative whose last nonzero entry is positive
                    for c in reversed(x):
                        if c:
                            if c > 0:
                                out.append(list(x))
                            break
                    else:
                        out.append(list(x))
                    if max_count is not None and len(out) >= max_count:
                        raise _Enough
            else:
                rec(i - 1, rem)
        x[i] = 0

    try:
        rec(n - 1, C)
    except _Enough:
        pass
    return out


class _Enough(Exception):
    pass


__all__ = ["lll_gram", "cholesky_q", "short_vectors"]
