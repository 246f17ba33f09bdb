"""Leapfrog inner loops: numba-compiled kernel with a pure-numpy fallback.

The backend is picked once at import from the PENDSEARCH_BACKEND
environment variable ("numba", "numpy" or "auto", the default), and can
be overridden per call; `benchmarks/bench_integrator.py` times the two
lanes against each other. Both lanes run the identical update order, so
a single system evolves bit-reproducibly within a lane.

Kernel contract (shared by both lanes): velocity-Verlet update of an
arrowhead spring system, in-place on (x, v), recording group energies
every ``rec_stride`` steps and one probe coordinate every
``probe_stride`` steps, optionally full state snapshots.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import ValidationError

BACKEND_ENV = "PENDSEARCH_BACKEND"

try:
    from numba import njit
    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised via the numpy lane
    HAS_NUMBA = False


def default_backend() -> str:
    choice = os.environ.get(BACKEND_ENV, "auto").lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ValidationError(
            [f"{BACKEND_ENV} must be auto, numba or numpy, got {choice!r}"])
    if choice == "auto":
        return "numba" if HAS_NUMBA else "numpy"
    if choice == "numba" and not HAS_NUMBA:
        raise ValidationError(["numba backend requested but not importable"])
    return choice


def _leapfrog_numpy(m, hub_k, s, groups, x, v, dt, steps, rec_stride, n_rec,
                    probe_idx, probe_stride, n_probe, record_states):
    inv_m = 1.0 / m
    half = 0.5 * dt
    dev_mask = groups[1:] == 1

    e_sup = np.empty(n_rec)
    e_dev = np.empty(n_rec)
    e_col = np.empty(n_rec)
    probe = np.empty(n_probe)
    xs = np.empty((n_rec if record_states else 0, m.shape[0]))
    vs = np.empty_like(xs)

    def accel(x):
        rel = x[1:] - x[0]
        f = s * rel
        a = np.empty_like(x)
        a[0] = (f.sum() - hub_k * x[0]) * inv_m[0]
        a[1:] = -f * inv_m[1:]
        return a

    def record(i):
        rel = x[1:] - x[0]
        e = 0.5 * m[1:] * v[1:] ** 2 + 0.5 * s * rel ** 2
        e_sup[i] = 0.5 * m[0] * v[0] ** 2 + 0.5 * hub_k * x[0] ** 2
        e_dev[i] = e[dev_mask].sum()
        e_col[i] = e[~dev_mask].sum()
        if record_states:
            xs[i] = x
            vs[i] = v

    record(0)
    if n_probe:
        probe[0] = x[probe_idx]
    a = accel(x)
    ri = pi = 1
    for step in range(1, steps + 1):
        v += half * a
        x += dt * v
        a = accel(x)
        v += half * a
        if step % rec_stride == 0:
            record(ri)
            ri += 1
        if n_probe and step % probe_stride == 0:
            probe[pi] = x[probe_idx]
            pi += 1
    return e_sup, e_dev, e_col, probe, xs, vs


def _leapfrog_loops(m, hub_k, s, groups, x, v, dt, steps, rec_stride, n_rec,
                    probe_idx, probe_stride, n_probe, record_states):
    ndof = m.shape[0]
    half = 0.5 * dt

    e_sup = np.empty(n_rec)
    e_dev = np.empty(n_rec)
    e_col = np.empty(n_rec)
    probe = np.empty(n_probe)
    n_snap = n_rec if record_states else 0
    xs = np.empty((n_snap, ndof))
    vs = np.empty((n_snap, ndof))

    a = np.empty(ndof)
    hub = -hub_k * x[0]
    for j in range(1, ndof):
        rel = x[j] - x[0]
        a[j] = -s[j - 1] * rel / m[j]
        hub += s[j - 1] * rel
    a[0] = hub / m[0]

    e_sup[0] = 0.5 * m[0] * v[0] * v[0] + 0.5 * hub_k * x[0] * x[0]
    dev = 0.0
    col = 0.0
    for j in range(1, ndof):
        rel = x[j] - x[0]
        e = 0.5 * m[j] * v[j] * v[j] + 0.5 * s[j - 1] * rel * rel
        if groups[j] == 1:
            dev += e
        else:
            col += e
    e_dev[0] = dev
    e_col[0] = col
    if record_states:
        for j in range(ndof):
            xs[0, j] = x[j]
            vs[0, j] = v[j]
    if n_probe > 0:
        probe[0] = x[probe_idx]

    ri = 1
    pi = 1
    for step in range(1, steps + 1):
        for j in range(ndof):
            v[j] += half * a[j]
        for j in range(ndof):
            x[j] += dt * v[j]
        hub = -hub_k * x[0]
        for j in range(1, ndof):
            rel = x[j] - x[0]
            a[j] = -s[j - 1] * rel / m[j]
            hub += s[j - 1] * rel
        a[0] = hub / m[0]
        for j in range(ndof):
            v[j] += half * a[j]

        if step % rec_stride == 0:
            e_sup[ri] = 0.5 * m[0] * v[0] * v[0] + 0.5 * hub_k * x[0] * x[0]
            dev = 0.0
            col = 0.0
            for j in range(1, ndof):
                rel = x[j] - x[0]
                e = 0.5 * m[j] * v[j] * v[j] + 0.5 * s[j - 1] * rel * rel
                if groups[j] == 1:
                    dev += e
                else:
                    col += e
            e_dev[ri] = dev
            e_col[ri] = col
            if record_states:
                for j in range(ndof):
                    xs[ri, j] = x[j]
                    vs[ri, j] = v[j]
            ri += 1
        if n_probe > 0 and step % probe_stride == 0:
            probe[pi] = x[probe_idx]
            pi += 1
    return e_sup, e_dev, e_col, probe, xs, vs


if HAS_NUMBA:
    _leapfrog_numba = njit(cache=True)(_leapfrog_loops)


def leapfrog_kernel(m, hub_k, s, groups, x, v, dt, steps, rec_stride,
                    probe_idx, probe_stride, record_states, backend=None):
    """Dispatch to the selected lane. Mutates x and v in place."""
    lane = default_backend() if backend is None else backend
    if lane == "numba" and not HAS_NUMBA:
        raise ValidationError(["numba backend requested but not importable"])
    n_rec = steps // rec_stride + 1
    n_probe = steps // probe_stride + 1 if probe_idx >= 0 else 0
    args = (m, hub_k, s, groups, x, v, float(dt), steps, rec_stride, n_rec,
            probe_idx, probe_stride, n_probe, record_states)
    if lane == "numba":
        return _leapfrog_numba(*args)
    return _leapfrog_numpy(*args)
