"""Slow reference implementations that share no code path with the package."""

import itertools
import math

import numpy as np


def brute_partial_trace(amps, dims, keep):
    """Double loop over all basis index pairs, summing matching traced digits."""
    keep = sorted(keep)
    traced = [k for k in range(len(dims)) if k not in keep]
    kdims = [dims[k] for k in keep]
    size = math.prod(kdims)
    rho = np.zeros((size, size), dtype=complex)
    digits = list(itertools.product(*(range(d) for d in dims)))
    for a, da in enumerate(digits):
        for b, db in enumerate(digits):
            if any(da[k] != db[k] for k in traced):
                continue
            r = 0
            c = 0
            for k, d in zip(keep, kdims):
                r = r * d + da[k]
                c = c * d + db[k]
            rho[r, c] += amps[a] * np.conj(amps[b])
    return rho


def entropy_bits(rho):
    w = np.linalg.eigvals(rho).real
    w = w[w > 1e-14]
    return float(-np.sum(w * np.log2(w)))


def brute_cef(amps, dims):
    """Half the sum over all 2**n - 2 subsets, each traced explicitly."""
    n = len(dims)
    if n == 1:
        return 0.0
    total = 0.0
    for mask in range(1, 2**n - 1):
        keep = [k for k in range(n) if mask >> k & 1]
        total += entropy_bits(brute_partial_trace(amps, dims, keep))
    return total / 2


def _schmidt_rank(amps, dims, keep, rel_tol=1e-9):
    n = len(dims)
    rest = [k for k in range(n) if k not in keep]
    t = np.asarray(amps).reshape(dims).transpose(list(keep) + rest)
    m = t.reshape(math.prod(dims[k] for k in keep), -1)
    s = np.linalg.svd(m, compute_uv=False)
    return int(np.sum(s**2 > rel_tol * s[0] ** 2))


def brute_ec(amps, dims):
    """Finest product partition from exhaustive bipartition tests.

    Returns canonical blocks: tuples of 0-based parties, sorted by first party.
    """
    n = len(dims)
    full = 2**n - 1
    separable = [full]
    for mask in range(1, full):
        keep = [k for k in range(n) if mask >> k & 1]
        if _schmidt_rank(amps, dims, keep) == 1:
            separable.append(mask)
    blocks = set()
    for i in range(n):
        b = full
        for s in separable:
            if s >> i & 1:
                b &= s
        blocks.add(tuple(k for k in range(n) if b >> k & 1))
    return sorted(blocks)


def binary_entropy(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)
