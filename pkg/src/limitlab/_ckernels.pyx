# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled orbit kernels.

Every routine here has a line-by-line twin in ``_pykernels`` and must stay
bit-identical to it: same operation order, squared-modulus comparisons, no
fused multiply-add (see ``-ffp-contract=off`` in setup.py).
"""

cdef inline double complex _horner(const double complex[::1] c, Py_ssize_t deg,
                                   double complex z) noexcept nogil:
    cdef double complex acc = c[deg]
    cdef Py_ssize_t i
    for i in range(deg - 1, -1, -1):
        acc = acc * z + c[i]
    return acc


cdef inline double _abs2(double complex z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


def poly_classify(const double complex[::1] coeffs, const double complex[::1] z0,
                  double radius, int max_iter, const double complex[::1] attractors,
                  double eps, signed char[::1] status, int[::1] steps, int[::1] which):
    """Escape / convergence classification of polynomial orbits.

    status: 0 undecided within budget, 1 escaped, 2 converged to ``attractors[which]``.
    """
    cdef Py_ssize_t n = z0.shape[0]
    cdef Py_ssize_t na = attractors.shape[0]
    cdef Py_ssize_t deg = coeffs.shape[0] - 1
    cdef double r2 = radius * radius
    cdef double e2 = eps * eps
    cdef Py_ssize_t i, j
    cdef int k
    cdef double complex z
    cdef signed char st
    with nogil:
        for i in range(n):
            z = z0[i]
            st = 0
            steps[i] = max_iter
            which[i] = -1
            for k in range(max_iter + 1):
                if _abs2(z) > r2:
                    st = 1
                    steps[i] = k
                    break
                for j in range(na):
                    if _abs2(z - attractors[j]) < e2:
                        st = 2
                        steps[i] = k
                        which[i] = <int>j
                        break
                if st == 2:
                    break
                z = _horner(coeffs, deg, z)
            status[i] = st


def henon_classify(const double complex[::1] coeffs, double complex a,
                   const double complex[::1] x0, const double complex[::1] y0,
                   double radius, int max_iter, const double complex[::1] fx,
                   const double complex[::1] fy, double eps, signed char[::1] status,
                   int[::1] steps, int[::1] which):
    """Trichotomy for H(x, y) = (p(x) - a*y, x); status codes as in poly_classify."""
    cdef Py_ssize_t n = x0.shape[0]
    cdef Py_ssize_t na = fx.shape[0]
    cdef Py_ssize_t deg = coeffs.shape[0] - 1
    cdef double r2 = radius * radius
    cdef double e2 = eps * eps
    cdef Py_ssize_t i, j
    cdef int k
    cdef double complex x, y, xn
    cdef signed char st
    with nogil:
        for i in range(n):
            x = x0[i]
            y = y0[i]
            st = 0
            steps[i] = max_iter
            which[i] = -1
            for k in range(max_iter + 1):
                if _abs2(x) > r2 or _abs2(y) > r2:
                    st = 1
                    steps[i] = k
                    break
                for j in range(na):
                    if _abs2(x - fx[j]) + _abs2(y - fy[j]) < e2:
                        st = 2
                        steps[i] = k
                        which[i] = <int>j
                        break
                if st == 2:
                    break
                xn = _horner(coeffs, deg, x) - a * y
                y = x
                x = xn
            status[i] = st


def track_nearest(const double complex[:, ::1] roots, double complex start,
                  long[::1] index, double[::1] ratio):
    """Follow the root nearest to the previous choice through each row of ``roots``.

    ratio[t] is nearest/second-nearest distance at row t (0 when d == 1).
    """
    cdef Py_ssize_t T = roots.shape[0]
    cdef Py_ssize_t d = roots.shape[1]
    cdef Py_ssize_t t, j, best
    cdef double complex prev = start
    cdef double dist, d1, d2
    with nogil:
        for t in range(T):
            best = 0
            d1 = 1e300
            d2 = 1e300
            for j in range(d):
                dist = _abs2(roots[t, j] - prev)
                if dist < d1:
                    d2 = d1
                    d1 = dist
                    best = j
                elif dist < d2:
                    d2 = dist
            index[t] = best
            if d2 >= 1e300 or d2 == 0.0:
                ratio[t] = 0.0 if d2 >= 1e300 else 1.0
            else:
                ratio[t] = (d1 / d2) ** 0.5
            prev = roots[t, best]
