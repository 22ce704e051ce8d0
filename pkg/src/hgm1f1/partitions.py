"""Integer partitions, dominance order and generalized Pochhammer symbols.

Partitions are plain tuples of positive ints in weakly decreasing order;
the empty tuple is the unique partition of 0.
"""
from fractions import Fraction
from functools import lru_cache
from math import factorial


def weight(kappa):
    return sum(kappa)


def check_partition(kappa):
    kappa = tuple(int(p) for p in kappa)
    if any(p < 1 for p in kappa) or any(kappa[i] < kappa[i + 1] for i in range(len(kappa) - 1)):
        raise ValueError(f"not a partition: {kappa!r}")
    return kappa


@lru_cache(maxsize=None)
def _parts(k, max_length, max_part):
    if k == 0:
        return ((),)
    if max_length == 0:
        return ()
    out = []
    for first in range(min(k, max_part), 0, -1):
        for rest in _parts(k - first, max_length - 1, first):
            out.append((first,) + rest)
    return tuple(out)


def partitions_of(k, max_length=None):
    """All partitions of ``k`` with at most ``max_length`` parts.

    Order is reverse-lexicographic, so ``(k)`` comes first and ``(1^k)`` last.
    That order is a linear extension of dominance: if ``mu`` dominates
    ``lam`` then ``mu`` appears no later than ``lam``.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if max_length is None:
        max_length = k
    if max_length < 1 and k > 0:
        return []
    return list(_parts(k, max_length, k))


def dominates(kappa, lam):
    """True if ``lam`` is dominated by ``kappa`` (``lam <| kappa``)."""
    if sum(kappa) != sum(lam):
        raise ValueError(f"dominance needs equal weights, got {kappa!r} and {lam!r}")
    s = t = 0
    for i in range(max(len(kappa), len(lam))):
        s += kappa[i] if i < len(kappa) else 0
        t += lam[i] if i < len(lam) else 0
        if t > s:
            return False
    return True


def rising(a, k):
    out = 1
    for j in range(k):
        out = out * (a + j)
    return out


def gen_pochhammer(a, kappa):
    """(a)_kappa = prod_i (a - (i-1)/2)_{k_i}.

    Works for ints, floats and Fractions; with a Fraction the half shifts
    stay exact.
    """
    half = Fraction(1, 2) if isinstance(a, Fraction) else 0.5
    out = 1
    for i, k in enumerate(kappa):
        out = out * rising(a - i * half, k)
    return out


def rho(kappa):
    """sum_i k_i (k_i - i), the eigenvalue entering James' recurrence."""
    return sum(k * (k - i - 1) for i, k in enumerate(kappa))


def conjugate(kappa):
    if not kappa:
        return ()
    return tuple(sum(1 for p in kappa if p > j) for j in range(kappa[0]))


def hook_product_upper(kappa):
    """prod over boxes of (2*arm + leg + 2)."""
    conj = conjugate(kappa)
    out = 1
    for i, row in enumerate(kappa):
        for j in range(row):
            out *= 2 * (row - j - 1) + (conj[j] - i - 1) + 2
    return out


def factorial_product(kappa):
    out = 1
    for p in kappa:
        out *= factorial(p)
    return out


def multiplicities(kappa):
    counts = {}
    for p in kappa:
        counts[p] = counts.get(p, 0) + 1
    return counts


def count_partitions(k):
    """Partition numbers by Euler's pentagonal recurrence (independent of enumeration)."""
    p = [1] + [0] * k
    for n in range(1, k + 1):
        total, j = 0, 1
        while True:
            g1 = j * (3 * j - 1) // 2
            if g1 > n:
                break
            sign = 1 if j % 2 else -1
            total += sign * p[n - g1]
            g2 = j * (3 * j + 1) // 2
            if g2 <= n:
                total += sign * p[n - g2]
            j += 1
        p[n] = total
    return p[k]
