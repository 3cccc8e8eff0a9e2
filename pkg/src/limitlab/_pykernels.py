"""Pure numpy twins of the compiled kernels in ``_ckernels.pyx``.

Signatures and outputs match exactly; the compiled versions are only faster.
"""
import numpy as np


def poly_classify(coeffs, z0, radius, max_iter, attractors, eps, status, steps, which):
    coeffs = np.asarray(coeffs)
    deg = coeffs.shape[0] - 1
    r2 = radius * radius
    e2 = eps * eps
    z = np.array(z0, dtype=np.complex128)
    status[:] = 0
    steps[:] = max_iter
    which[:] = -1
    active = np.arange(z.shape[0])
    for k in range(max_iter + 1):
        if active.size == 0:
            break
        za = z[active]
        esc = za.real * za.real + za.imag * za.imag > r2
        if esc.any():
            idx = active[esc]
            status[idx] = 1
            steps[idx] = k
        live = ~esc
        for j in range(len(attractors)):
            dz = za - attractors[j]
            hit = live & (dz.real * dz.real + dz.imag * dz.imag < e2)
            if hit.any():
                idx = active[hit]
                status[idx] = 2
                steps[idx] = k
                which[idx] = j
                live &= ~hit
        active = active[live]
        za = za[live]
        acc = np.full(za.shape, coeffs[deg], dtype=np.complex128)
        for i in range(deg - 1, -1, -1):
            acc = acc * za + coeffs[i]
        z[active] = acc


def henon_classify(coeffs, a, x0, y0, radius, max_iter, fx, fy, eps, status, steps, which):
    coeffs = np.asarray(coeffs)
    deg = coeffs.shape[0] - 1
    r2 = radius * radius
    e2 = eps * eps
    x = np.array(x0, dtype=np.complex128)
    y = np.array(y0, dtype=np.complex128)
    status[:] = 0
    steps[:] = max_iter
    which[:] = -1
    active = np.arange(x.shape[0])
    for k in range(max_iter + 1):
        if active.size == 0:
            break
        xa = x[active]
        ya = y[active]
        esc = (xa.real * xa.real + xa.imag * xa.imag > r2) | (ya.real * ya.real + ya.imag * ya.imag > r2)
        if esc.any():
            idx = active[esc]
            status[idx] = 1
            steps[idx] = k
        live = ~esc
        for j in range(len(fx)):
            dx = xa - fx[j]
            dy = ya - fy[j]
            hit = live & (dx.real * dx.real + dx.imag * dx.imag + (dy.real * dy.real + dy.imag * dy.imag) < e2)
            if hit.any():
                idx = active[hit]
                status[idx] = 2
                steps[idx] = k
                which[idx] = j
                live &= ~hit
        active = active[live]
        xa = xa[live]
        ya = ya[live]
        acc = np.full(xa.shape, coeffs[deg], dtype=np.complex128)
        for i in range(deg - 1, -1, -1):
            acc = acc * xa + coeffs[i]
        x[active] = acc - a * ya
        y[active] = xa


def track_nearest(roots, start, index, ratio):
    roots = np.asarray(roots)
    prev = start
    for t in range(roots.shape[0]):
        row = roots[t]
        dz = row - prev
        dist = dz.real * dz.real + dz.imag * dz.imag
        order = np.argsort(dist, kind="stable")
        best = order[0]
        index[t] = best
        if row.shape[0] < 2:
            ratio[t] = 0.0
        else:
            d1, d2 = dist[order[0]], dist[order[1]]
            ratio[t] = 1.0 if d2 == 0.0 else (d1 / d2) ** 0.5
        prev = row[best]
