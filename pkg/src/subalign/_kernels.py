"""Compiled inner loops for EM training and decoding.

Cell layout: for sentence ``s`` with ``n`` source and ``m`` target tokens the
``m * (n + 1)`` cells are stored target-major starting at ``cell_off[s]``;
column 0 of every row is the NULL source.
"""
import math

import numpy as np
from numba import njit


TIE_TOLERANCE = 1e-12


@njit(cache=True)
def cell_offsets(src_off, tgt_off):
    n_sent = src_off.size - 1
    out = np.empty(n_sent + 1, dtype=np.int64)
    out[0] = 0
    for s in range(n_sent):
        n = src_off[s + 1] - src_off[s]
        m = tgt_off[s + 1] - tgt_off[s]
        out[s + 1] = out[s] + m * (n + 1)
    return out


@njit(cache=True)
def cell_keys(src_ids, src_off, tgt_ids, tgt_off, cell_off, n_tgt_vocab):
    """Packed ``(source + 1) * V_t + target`` key for every cell; source -1 is NULL."""
    keys = np.empty(cell_off[-1], dtype=np.int64)
    for s in range(src_off.size - 1):
        a, n = src_off[s], src_off[s + 1] - src_off[s]
        b, m = tgt_off[s], tgt_off[s + 1] - tgt_off[s]
        base = cell_off[s]
        for j in range(m):
            f = tgt_ids[b + j]
            row = base + j * (n + 1)
            keys[row] = f
            for i in range(n):
                keys[row + 1 + i] = (src_ids[a + i] + 1) * n_tgt_vocab + f
    return keys


@njit(cache=True)
def _diag_prior(buf, n, j, m, tension):
    # fills buf[0:n] with exp(-tension * |(i+1)/n - (j+1)/m|) normalized over i
    z = 0.0
    for i in range(n):
        v = math.exp(-tension * abs((i + 1) / n - (j + 1) / m))
        buf[i] = v
        z += v
    for i in range(n):
        buf[i] /= z


@njit(cache=True)
def e_step(src_off, tgt_off, cell_off, cell_pair, t, p0, diagonal, tension,
           acc, comp, post, store_post):
    """One E-step. Adds expected counts into ``acc`` (Kahan-compensated) and
    returns the data log-likelihood under the current parameters."""
    loglik = 0.0
    max_n = 0
    for s in range(src_off.size - 1):
        max_n = max(max_n, src_off[s + 1] - src_off[s])
    prior = np.empty(max_n + 1)
    w = np.empty(max_n + 1)
    for s in range(src_off.size - 1):
        n = src_off[s + 1] - src_off[s]
        m = tgt_off[s + 1] - tgt_off[s]
        base = cell_off[s]
        for j in range(m):
            row = base + j * (n + 1)
            if diagonal:
                _diag_prior(prior, n, j, m, tension)
            else:
                for i in range(n):
                    prior[i] = 1.0 / n
            w[0] = p0 * t[cell_pair[row]]
            z = w[0]
            for i in range(n):
                w[i + 1] = (1.0 - p0) * prior[i] * t[cell_pair[row + 1 + i]]
                z += w[i + 1]
            if z <= 0.0:
                continue
            loglik += math.log(z)
            for i in range(n + 1):
                g = w[i] / z
                if store_post:
                    post[row + i] = g
                p = cell_pair[row + i]
                y = g - comp[p]
                tot = acc[p] + y
                comp[p] = (tot - acc[p]) - y
                acc[p] = tot
    return loglik


@njit(cache=True)
def tension_objective(src_off, tgt_off, cell_off, post, tension):
    """Expected log positional prior (real positions only) and its derivative
    with respect to the tension, for fixed posteriors ``post``."""
    value = 0.0
    grad = 0.0
    for s in range(src_off.size - 1):
        n = src_off[s + 1] - src_off[s]
        m = tgt_off[s + 1] - tgt_off[s]
        base = cell_off[s]
        for j in range(m):
            row = base + j * (n + 1)
            z = 0.0
            zh = 0.0
            for i in range(n):
                h = abs((i + 1) / n - (j + 1) / m)
                e = math.exp(-tension * h)
                z += e
                zh += e * h
            logz = math.log(z)
            mean_h = zh / z
            for i in range(n):
                g = post[row + 1 + i]
                h = abs((i + 1) / n - (j + 1) / m)
                value += g * (-tension * h - logz)
                grad += g * (mean_h - h)
    return value, grad


@njit(cache=True)
def viterbi(src_off, tgt_off, cell_off, tcell, p0, diagonal, tension):
    """Best source position per target token, -1 for NULL. Real positions win
    ties against NULL and against later positions; scores within a relative
    TIE_TOLERANCE count as tied, so the choice does not depend on the order in
    which equal expected counts happened to be summed."""
    out = np.empty(tgt_off[-1], dtype=np.int64)
    max_n = 0
    for s in range(src_off.size - 1):
        max_n = max(max_n, src_off[s + 1] - src_off[s])
    prior = np.empty(max_n + 1)
    for s in range(src_off.size - 1):
        n = src_off[s + 1] - src_off[s]
        m = tgt_off[s + 1] - tgt_off[s]
        base = cell_off[s]
        for j in range(m):
            row = base + j * (n + 1)
            if diagonal:
                _diag_prior(prior, n, j, m, tension)
            else:
                for i in range(n):
                    prior[i] = 1.0 / n
            best = -1
            best_w = -1.0
            for i in range(n):
                v = (1.0 - p0) * prior[i] * tcell[row + 1 + i]
                if v > best_w * (1.0 + TIE_TOLERANCE):
                    best_w = v
                    best = i
            if p0 * tcell[row] > best_w * (1.0 + TIE_TOLERANCE):
                best = -1
            out[tgt_off[s] + j] = best
    return out


@njit(cache=True)
def cell_sides(src_ids, src_off, tgt_ids, tgt_off, cell_off):
    """Source id (-1 for NULL) and target id of every cell."""
    cs = np.empty(cell_off[-1], dtype=np.int64)
    ct = np.empty(cell_off[-1], dtype=np.int64)
    for s in range(src_off.size - 1):
        a, n = src_off[s], src_off[s + 1] - src_off[s]
        b, m = tgt_off[s], tgt_off[s + 1] - tgt_off[s]
        base = cell_off[s]
        for j in range(m):
            row = base + j * (n + 1)
            cs[row] = -1
            ct[row] = tgt_ids[b + j]
            for i in range(n):
                cs[row + 1 + i] = src_ids[a + i]
                ct[row + 1 + i] = tgt_ids[b + j]
    return cs, ct


@njit(cache=True)
def row_shape_priors(shape_n, shape_m, shape_j, tension):
    """Normalized diagonal priors and their mean distance for each distinct
    ``(n, m, j)`` row shape, concatenated; ``off[k]`` starts shape ``k``."""
    n_shapes = shape_n.size
    off = np.empty(n_shapes + 1, dtype=np.int64)
    off[0] = 0
    for k in range(n_shapes):
        off[k + 1] = off[k] + shape_n[k]
    pri = np.empty(off[-1])
    mean_h = np.empty(n_shapes)
    for k in range(n_shapes):
        n, m, j = shape_n[k], shape_m[k], shape_j[k]
        z = 0.0
        zh = 0.0
        for i in range(n):
            h = abs((i + 1) / n - (j + 1) / m)
            e = math.exp(-tension * h)
            pri[off[k] + i] = e
            z += e
            zh += e * h
        for i in range(n):
            pri[off[k] + i] /= z
        mean_h[k] = zh / z
    return pri, off, mean_h


@njit(cache=True)
def e_step_shaped(src_off, tgt_off, cell_off, cell_pair, t, p0, row_shape, pri, pri_off,
                  acc, comp, post, store_post):
    """E-step with positional priors looked up per row shape."""
    loglik = 0.0
    max_n = 0
    for s in range(src_off.size - 1):
        max_n = max(max_n, src_off[s + 1] - src_off[s])
    w = np.empty(max_n + 1)
    r = 0
    for s in range(src_off.size - 1):
        n = src_off[s + 1] - src_off[s]
        m = tgt_off[s + 1] - tgt_off[s]
        base = cell_off[s]
        for j in range(m):
            row = base + j * (n + 1)
            po = pri_off[row_shape[r]]
            r += 1
            w[0] = p0 * t[cell_pair[row]]
            z = w[0]
            for i in range(n):
                w[i + 1] = (1.0 - p0) * pri[po + i] * t[cell_pair[row + 1 + i]]
                z += w[i + 1]
            if z <= 0.0:
                continue
            loglik += math.log(z)
            for i in range(n + 1):
                g = w[i] / z
                if store_post:
                    post[row + i] = g
                p = cell_pair[row + i]
                y = g - comp[p]
                tot = acc[p] + y
                comp[p] = (tot - acc[p]) - y
                acc[p] = tot
    return loglik


@njit(cache=True)
def posterior_row_stats(src_off, tgt_off, cell_off, post):
    """Per row the real-position posterior mass, and the total expected distance."""
    mass = np.empty(tgt_off[-1])
    emp = 0.0
    r = 0
    for s in range(src_off.size - 1):
        n = src_off[s + 1] - src_off[s]
        m = tgt_off[s + 1] - tgt_off[s]
        base = cell_off[s]
        for j in range(m):
            row = base + j * (n + 1)
            tot = 0.0
            for i in range(n):
                g = post[row + 1 + i]
                tot += g
                emp += g * abs((i + 1) / n - (j + 1) / m)
            mass[r] = tot
            r += 1
    return mass, emp


@njit(cache=True)
def dense_unique_inverse(keys, key_space):
    """``np.unique(keys, return_inverse=True)`` for keys in ``[0, key_space)``."""
    ids = np.full(key_space, -1, dtype=np.int64)
    for c in range(keys.size):
        ids[keys[c]] = 0
    n = 0
    for k in range(key_space):
        if ids[k] == 0:
            ids[k] = n
            n += 1
    uniq = np.empty(n, dtype=np.int64)
    for k in range(key_space):
        if ids[k] >= 0:
            uniq[ids[k]] = k
    inv = np.empty(keys.size, dtype=np.int64)
    for c in range(keys.size):
        inv[c] = ids[keys[c]]
    return uniq, inv
