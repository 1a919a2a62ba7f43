"""Pure-Python/numpy implementations of the hot kernels.

Both backends must agree bit for bit: the orbit uses the same ``r * x + b``
evaluation order, and squared distances are accumulated coordinate by
coordinate starting from coordinate 0.
"""

import itertools

import numpy as np

_QUERY_CHUNK = 1 << 17
# (query, cell) pairs materialised at once
_PAIR_BATCH = 1 << 21
# largest shell radius handled vectorised, by dimension (index 0 unused)
_VEC_MAX_RHO = (0, 64, 24, 8)


def chaos_orbit(ratios, translations, indices, x0, burn_in):
    """Run ``x <- r[I_t] * x + b[I_t]`` and return the states after ``burn_in`` steps.

    Parameters
    ----------
    ratios : (M,) float64
    translations : (M, d) float64
    indices : (T,) int64
        0-based map indices, one per step.
    x0 : (d,) float64
    burn_in : int
        Number of leading states to discard; ``T - burn_in`` rows are returned.
    """
    T = len(indices)
    d = translations.shape[1]
    out = np.empty((max(T - burn_in, 0), d), dtype=np.float64)
    r = ratios.tolist()
    idx = indices.tolist()
    if d == 1:
        b = translations[:, 0].tolist()
        x = float(x0[0])
        col = [0.0] * out.shape[0]
        for t in range(T):
            k = idx[t]
            x = r[k] * x + b[k]
            if t >= burn_in:
                col[t - burn_in] = x
        out[:, 0] = col
        return out
    b = translations.tolist()
    x = [float(v) for v in x0]
    for t in range(T):
        k = idx[t]
        rk = r[k]
        bk = b[k]
        x = [rk * x[j] + bk[j] for j in range(d)]
        if t >= burn_in:
            out[t - burn_in] = x
    return out


def _shell_offsets(R, d):
    if R == 0:
        return np.zeros((1, d), dtype=np.int64)
    axes = [np.arange(-R, R + 1, dtype=np.int64)] * d
    cube = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    return cube[np.abs(cube).max(axis=1) == R]


def directed_min_sq(queries, spoints, ukeys, starts, clo, chi, strides, h):
    """Minimum squared distance from each query to the bucketed point set.

    The buckets are uniform cells of side ``h``; cells are visited in
    Chebyshev shells around the query cell until no unvisited cell can hold
    a closer point.
    """
    nq, d = queries.shape
    best = np.full(nq, np.inf)
    for lo in range(0, nq, _QUERY_CHUNK):
        hi = min(lo + _QUERY_CHUNK, nq)
        best[lo:hi] = _directed_chunk(queries[lo:hi], spoints, ukeys, starts, clo, chi, strides, h)
    return best


def _directed_chunk(queries, spoints, ukeys, starts, clo, chi, strides, h):
    nq, d = queries.shape
    best = np.full(nq, np.inf)
    cq = np.floor(np.clip(queries / h, -4e18, 4e18)).astype(np.int64)
    rho0 = np.maximum(np.maximum(clo - cq, cq - chi), 0).max(axis=1)
    rhomax = np.maximum(cq - clo, chi - cq).max(axis=1)
    rho = rho0.copy()
    active = np.arange(nq)
    nkeys = len(ukeys)
    vec_max = _VEC_MAX_RHO[d] if d < len(_VEC_MAX_RHO) else 2
    while active.size:
        # wide shells are walked one query at a time, clipped to the box
        wide = rho[active] > vec_max
        for q in active[wide]:
            best[q] = _scan_query(queries[q], cq[q], int(rho[q]), int(rhomax[q]), best[q],
                                  spoints, ukeys, starts, clo, chi, strides, h)
        active = active[~wide]
        if not active.size:
            break
        r_act = rho[active]
        for R in np.unique(r_act):
            offs = _shell_offsets(int(R), d)
            group = active[r_act == R]
            step = max(1, _PAIR_BATCH // len(offs))
            for lo in range(0, len(group), step):
                _scan_shell(group[lo:lo + step], offs, queries, cq, best, spoints, ukeys, starts,
                            clo, chi, strides, nkeys)
        ra = rho[active]
        bound = np.maximum(ra - 2, 0) * h
        done = (ra >= rhomax[active]) | ((ra >= 2) & (best[active] <= bound * bound))
        rho[active] += 1
        active = active[~done]
    return best


def _scan_shell(sel, offs, queries, cq, best, spoints, ukeys, starts, clo, chi, strides, nkeys):
    d = queries.shape[1]
    cells = cq[sel][:, None, :] + offs[None, :, :]
    inbox = np.all((cells >= clo) & (cells <= chi), axis=2)
    qi, si = np.nonzero(inbox)
    if qi.size == 0:
        return
    keys = ((cells[qi, si] - clo) * strides).sum(axis=1)
    pos = np.searchsorted(ukeys, keys)
    pos_c = np.minimum(pos, nkeys - 1)
    found = ukeys[pos_c] == keys
    qi = qi[found]
    pos_c = pos_c[found]
    s = starts[pos_c]
    cnt = starts[pos_c + 1] - s
    total = int(cnt.sum())
    if total == 0:
        return
    qrep = np.repeat(sel[qi], cnt)
    pidx = np.arange(total) - np.repeat(np.cumsum(cnt) - cnt, cnt) + np.repeat(s, cnt)
    sq = np.zeros(total)
    for j in range(d):
        diff = queries[qrep, j] - spoints[pidx, j]
        sq += diff * diff
    np.minimum.at(best, qrep, sq)


def _scan_query(x, cq, rho, rhomax, best, spoints, ukeys, starts, clo, chi, strides, h):
    """Scalar shell walk for one query, the same visiting rule as the compiled kernel."""
    d = len(x)
    x = x.tolist()
    cq = cq.tolist()
    clo_l, chi_l, st = clo.tolist(), chi.tolist(), strides.tolist()
    last = d - 1
    bsq = float(best)

    def scan(key, bsq):
        pos = int(np.searchsorted(ukeys, key))
        if pos >= len(ukeys) or ukeys[pos] != key:
            return bsq
        block = spoints[starts[pos]:starts[pos + 1]].tolist()
        for p in block:
            sq = 0.0
            for j in range(d):
                diff = x[j] - p[j]
                sq = sq + diff * diff
            if sq < bsq:
                bsq = sq
        return bsq

    while True:
        lo = [max(cq[j] - rho, clo_l[j]) for j in range(d)]
        hi = [min(cq[j] + rho, chi_l[j]) for j in range(d)]
        if all(lo[j] <= hi[j] for j in range(d)):
            for lead in itertools.product(*[range(lo[j], hi[j] + 1) for j in range(last)]):
                base = sum((lead[j] - clo_l[j]) * st[j] for j in range(last))
                on_shell = any(abs(lead[j] - cq[j]) == rho for j in range(last))
                if on_shell or rho == 0:
                    cols = range(lo[last], hi[last] + 1)
                else:
                    cols = [c for c in (cq[last] - rho, cq[last] + rho) if lo[last] <= c <= hi[last]]
                for c in cols:
                    bsq = scan(base + (c - clo_l[last]) * st[last], bsq)
        if rho >= rhomax:
            break
        if rho >= 2:
            bound = (rho - 2) * h
            if bsq <= bound * bound:
                break
        rho += 1
    return bsq
