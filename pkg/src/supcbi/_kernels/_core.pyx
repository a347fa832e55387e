# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled simulation kernels.

Mirrors _pyloop.py draw-for-draw: identical uniform consumption order and
identical floating-point expressions, so both backends produce bit-identical
paths from the same bit generator state.
"""

from libc.math cimport cos, exp, log, pi, pow, rint, sin, sqrt
from libc.stdlib cimport free, malloc, realloc

import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from numpy.random cimport bitgen_t

cnp.import_array()

from ._pyloop import gamma_factor

cdef double _LOG10 = 2.302585092994046


cdef inline double next_u(bitgen_t *bg) noexcept nogil:
    return bg.next_double(bg.state)


cdef double std_normal(bitgen_t *bg) noexcept nogil:
    cdef double u1 = 1.0 - next_u(bg)
    cdef double u2 = next_u(bg)
    return sqrt(-2.0 * log(u1)) * cos(2.0 * pi * u2)


cdef double gamma_std(bitgen_t *bg, double shape) noexcept nogil:
    cdef double g, u, d, c, x, t, v
    if shape < 1.0:
        g = gamma_std(bg, shape + 1.0)
        u = 1.0 - next_u(bg)
        return g * pow(u, 1.0 / shape)
    d = shape - 1.0 / 3.0
    c = 1.0 / sqrt(9.0 * d)
    while True:
        x = std_normal(bg)
        t = 1.0 + c * x
        if t <= 0.0:
            continue
        v = t * t * t
        u = 1.0 - next_u(bg)
        if log(u) < 0.5 * x * x + d - d * v + d * log(v):
            return d * v


cdef double stable_pos(bitgen_t *bg, double alpha) noexcept nogil:
    cdef double u, w, theta
    while True:
        u = next_u(bg)
        if 0.0 < u < 1.0:
            break
    w = 1.0 - next_u(bg)
    while w <= 0.0:
        w = 1.0 - next_u(bg)
    theta = pi * u
    w = -log(w)
    return (sin(alpha * theta) / pow(sin(theta), 1.0 / alpha)) * pow(
        sin((1.0 - alpha) * theta) / w, (1.0 - alpha) / alpha
    )


cdef long poisson(bitgen_t *bg, double lam) noexcept nogil:
    cdef double limit, p, n
    cdef long k
    if lam <= 0.0:
        return 0
    if lam > 50.0:
        n = rint(lam + sqrt(lam) * std_normal(bg))
        if n < 0.0:
            return 0
        return <long> n
    limit = exp(-lam)
    k = 0
    p = 1.0
    while True:
        p *= next_u(bg)
        if p <= limit:
            return k
        k += 1


cdef double ts_increment(bitgen_t *bg, double intensity, double dt,
                         double b, double alpha, double gam) noexcept nogil:
    cdef double theta, b_alpha, sigma, total, v, lam
    cdef long n_sub, i, n
    if intensity <= 0.0 or dt <= 0.0:
        return 0.0
    if alpha > 0.0:
        theta = intensity * dt * gam / alpha
        n_sub = 1
        b_alpha = pow(b, alpha)
        while theta * b_alpha > _LOG10:
            theta *= 0.5
            n_sub *= 2
        sigma = pow(theta, 1.0 / alpha)
        total = 0.0
        for i in range(n_sub):
            while True:
                v = sigma * stable_pos(bg, alpha)
                if next_u(bg) < exp(-b * v):
                    total += v
                    break
        return total
    if alpha == 0.0:
        return gamma_std(bg, intensity * dt) / b
    lam = intensity * dt * pow(b, alpha) * gam
    n = poisson(bg, lam)
    total = 0.0
    for i in range(n):
        total += gamma_std(bg, -alpha) / b
    return total


cdef bitgen_t *get_bitgen(object bit_generator):
    return <bitgen_t *> PyCapsule_GetPointer(bit_generator.capsule, "BitGenerator")


# growable long buffer for sojourn run lengths
cdef struct LongBuf:
    long *data
    long size
    long cap


cdef int buf_push(LongBuf *buf, long value) noexcept nogil:
    cdef long new_cap
    cdef long *p
    if buf.size == buf.cap:
        new_cap = buf.cap * 2 if buf.cap > 0 else 64
        p = <long *> realloc(buf.data, new_cap * sizeof(long))
        if p == NULL:
            return -1
        buf.data = p
        buf.cap = new_cap
    buf.data[buf.size] = value
    buf.size += 1
    return 0


cdef object buf_to_hours(LongBuf *buf, double dt):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(buf.size)
    cdef long i
    for i in range(buf.size):
        out[i] = buf.data[i] * dt
    return out


def run_supcbi(object bit_generator, double A, double B, double b,
               double alpha, double eta, double beta, double xmin,
               double y0, double dt, long n_steps, long burn_in,
               long hourly_stride, long dump_stride, object thresholds,
               double shift):
    cdef bitgen_t *bg = get_bitgen(bit_generator)
    cdef double[:] thr = np.ascontiguousarray(thresholds, dtype=np.float64)
    cdef long n_thr = thr.shape[0]
    cdef long n_emit = n_steps - burn_in
    cdef long n_hourly = 0, n_dump = 0
    if n_emit > 0 and hourly_stride > 0:
        n_hourly = n_emit // hourly_stride
    if n_emit > 0 and dump_stride > 0:
        n_dump = n_emit // dump_stride
    hourly_arr = np.empty(n_hourly)
    dump_arr = np.empty(n_dump)
    cdef double[:] hourly = hourly_arr
    cdef double[:] dump = dump_arr

    cdef int *states = NULL
    cdef long *runs = NULL
    cdef int *pending = NULL
    cdef LongBuf *high = NULL
    cdef LongBuf *low = NULL
    cdef long k
    if n_thr > 0:
        states = <int *> malloc(n_thr * sizeof(int))
        runs = <long *> malloc(n_thr * sizeof(long))
        pending = <int *> malloc(n_thr * sizeof(int))
        high = <LongBuf *> malloc(n_thr * sizeof(LongBuf))
        low = <LongBuf *> malloc(n_thr * sizeof(LongBuf))
        for k in range(n_thr):
            states[k] = -1
            runs[k] = 0
            pending[k] = 1
            high[k] = LongBuf(NULL, 0, 0)
            low[k] = LongBuf(NULL, 0, 0)

    cdef double shape = beta - 1.0
    cdef double gam = gamma_factor(alpha)
    cdef double y = y0, rho, decay, inten, dl, x, d, d2
    cdef double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0
    cdef long count = 0, ih = 0, idp = 0, step
    cdef int cls, failed = 0
    with nogil:
        for step in range(n_steps):
            rho = gamma_std(bg, shape) * eta
            decay = exp(-rho * dt)
            inten = A + rho * B * y
            dl = ts_increment(bg, inten, dt, b, alpha, gam)
            y = decay * y + (1.0 - decay) / (rho * dt) * dl
            if step < burn_in:
                continue
            x = y + xmin
            d = x - shift
            s1 += d
            d2 = d * d
            s2 += d2
            s3 += d2 * d
            s4 += d2 * d2
            if hourly_stride > 0 and (count + 1) % hourly_stride == 0:
                hourly[ih] = x
                ih += 1
            if dump_stride > 0 and (count + 1) % dump_stride == 0:
                dump[idp] = x
                idp += 1
            count += 1
            for k in range(n_thr):
                if x > thr[k]:
                    cls = 1
                elif x < thr[k]:
                    cls = 0
                else:
                    cls = states[k] if states[k] >= 0 else 0
                if states[k] < 0:
                    states[k] = cls
                    runs[k] = 1
                elif cls == states[k]:
                    runs[k] += 1
                else:
                    if pending[k]:
                        pending[k] = 0
                    elif states[k] == 1:
                        if buf_push(&high[k], runs[k]) != 0:
                            failed = 1
                            break
                    else:
                        if buf_push(&low[k], runs[k]) != 0:
                            failed = 1
                            break
                    states[k] = cls
                    runs[k] = 1
            if failed:
                break

    sojourns = []
    for k in range(n_thr):
        sojourns.append((buf_to_hours(&high[k], dt), buf_to_hours(&low[k], dt)))
        free(high[k].data)
        free(low[k].data)
    if n_thr > 0:
        free(states)
        free(runs)
        free(pending)
        free(high)
        free(low)
    if failed:
        raise MemoryError("sojourn buffer allocation failed")
    return count, s1, s2, s3, s4, hourly_arr, dump_arr, sojourns


def run_embedding(object bit_generator, double A, double B, double b,
                  double alpha, object weights, object speeds, double xmin,
                  object y0, double dt, long n_steps, long burn_in,
                  long hourly_stride, long dump_stride, double shift):
    cdef bitgen_t *bg = get_bitgen(bit_generator)
    cdef double[:] c = np.ascontiguousarray(weights, dtype=np.float64)
    cdef double[:] rho = np.ascontiguousarray(speeds, dtype=np.float64)
    cdef long m = rho.shape[0]
    ys_arr = np.ascontiguousarray(y0, dtype=np.float64).copy()
    cdef double[:] ys = ys_arr
    decays_arr = np.empty(m)
    prefs_arr = np.empty(m)
    cdef double[:] decays = decays_arr
    cdef double[:] prefs = prefs_arr
    cdef long i
    for i in range(m):
        decays[i] = exp(-rho[i] * dt)
        prefs[i] = (1.0 - decays[i]) / (rho[i] * dt)

    cdef long n_emit = n_steps - burn_in
    cdef long n_hourly = 0, n_dump = 0
    if n_emit > 0 and hourly_stride > 0:
        n_hourly = n_emit // hourly_stride
    if n_emit > 0 and dump_stride > 0:
        n_dump = n_emit // dump_stride
    hourly_arr = np.empty(n_hourly)
    dump_arr = np.empty(n_dump)
    cdef double[:] hourly = hourly_arr
    cdef double[:] dump = dump_arr

    cdef double gam = gamma_factor(alpha)
    cdef double total, inten, dl, x, d, d2
    cdef double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0
    cdef long count = 0, ih = 0, idp = 0, step
    with nogil:
        for step in range(n_steps):
            total = 0.0
            for i in range(m):
                inten = c[i] * A + rho[i] * B * ys[i]
                dl = ts_increment(bg, inten, dt, b, alpha, gam)
                ys[i] = decays[i] * ys[i] + prefs[i] * dl
                total += ys[i]
            if step < burn_in:
                continue
            x = total + xmin
            d = x - shift
            s1 += d
            d2 = d * d
            s2 += d2
            s3 += d2 * d
            s4 += d2 * d2
            if hourly_stride > 0 and (count + 1) % hourly_stride == 0:
                hourly[ih] = x
                ih += 1
            if dump_stride > 0 and (count + 1) % dump_stride == 0:
                dump[idp] = x
                idp += 1
            count += 1
    return count, s1, s2, s3, s4, hourly_arr, dump_arr, []


def sample_increments(object bit_generator, long n, double intensity,
                      double dt, double b, double alpha):
    cdef bitgen_t *bg = get_bitgen(bit_generator)
    cdef double gam = gamma_factor(alpha)
    out_arr = np.empty(n)
    cdef double[:] out = out_arr
    cdef long i
    with nogil:
        for i in range(n):
            out[i] = ts_increment(bg, intensity, dt, b, alpha, gam)
    return out_arr


def sample_speeds(object bit_generator, long n, double eta, double beta):
    cdef bitgen_t *bg = get_bitgen(bit_generator)
    out_arr = np.empty(n)
    cdef double[:] out = out_arr
    cdef long i
    with nogil:
        for i in range(n):
            out[i] = gamma_std(bg, beta - 1.0) * eta
    return out_arr
