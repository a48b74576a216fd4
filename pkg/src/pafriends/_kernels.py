"""Numba kernels for the Fenwick-tree sampler and the evolution hot loop.

All kernels operate on 1-indexed arrays (slot 0 unused) so node ids map
directly to array positions. The tree capacity is always a power of two,
which makes ``tree[cap]`` the total weight.
"""
from numba import njit


@njit(cache=True, nogil=True)
def fenwick_add(tree, cap, i, delta):
    while i <= cap:
        tree[i] += delta
        i += i & (-i)


@njit(cache=True, nogil=True)
def fenwick_prefix(tree, i):
    s = 0.0
    while i > 0:
        s += tree[i]
        i -= i & (-i)
    return s


@njit(cache=True, nogil=True)
def fenwick_find(tree, cap, u):
    """Smallest index whose cumulative weight strictly exceeds u."""
    pos = 0
    bit = cap
    while bit:
        nxt = pos + bit
        if nxt <= cap and tree[nxt] <= u:
            pos = nxt
            u -= tree[nxt]
        bit >>= 1
    return pos + 1


@njit(cache=True, nogil=True)
def fenwick_build(weights, tree, cap):
    # propagation must walk every slot up to cap so ancestors above the last
    # leaf still receive their partial sums
    tree[:] = 0.0
    n = weights.shape[0]
    for i in range(1, cap + 1):
        if i <= n:
            tree[i] += weights[i - 1]
        j = i + (i & (-i))
        if j <= cap:
            tree[j] += tree[i]


@njit(cache=True, nogil=True)
def sample_targets(tree, cap, n, u_row, out_row):
    """Draw one arrival's endpoints from the pre-step weights.

    Each uniform in u_row is scaled by the current total; the clamp covers
    the 2^-53 sliver where u*total rounds up to total itself.
    """
    total = tree[cap]
    for e in range(u_row.shape[0]):
        t = fenwick_find(tree, cap, u_row[e] * total)
        if t > n:
            t = n
        out_row[e] = t


@njit(cache=True, nogil=True)
def apply_arrival(tree, cap, degrees, n, targets_row, arrival_weight):
    c = targets_row.shape[0]
    new = n + 1
    for e in range(c):
        t = targets_row[e]
        degrees[t] += 1
        fenwick_add(tree, cap, t, 1.0)
    degrees[new] = c
    fenwick_add(tree, cap, new, arrival_weight)
    return new


@njit(cache=True, nogil=True)
def evolve_block(tree, cap, degrees, n, arrival_weight, uniforms, out_targets):
    """Run len(out_targets) arrivals; returns the new node count.

    Draws for one arrival all use the pre-step weights (no intra-step
    update); out_targets row s records the endpoints of arrival n+1+s.
    """
    steps = out_targets.shape[0]
    for s in range(steps):
        sample_targets(tree, cap, n, uniforms[s], out_targets[s])
        n = apply_arrival(tree, cap, degrees, n, out_targets[s], arrival_weight)
    return n
