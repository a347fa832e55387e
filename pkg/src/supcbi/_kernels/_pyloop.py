"""Pure-Python reference implementation of the simulation kernels.

Every routine draws from a ``next_u()`` callable returning uniforms in
[0, 1).  The compiled kernel in ``_core.pyx`` mirrors the draw order and
arithmetic of this module exactly, so both backends produce bit-identical
paths from the same bit generator.
"""

from __future__ import annotations

from math import cos, exp, log, pi, sin, sqrt
from math import gamma as _gamma

import numpy as np

# acceptance-probability floor exp(-LOG10) = 0.1 for the tilting rejection
_LOG10 = 2.302585092994046


def std_normal(next_u):
    """One standard normal via Box-Muller (consumes two uniforms)."""
    u1 = 1.0 - next_u()
    u2 = next_u()
    return sqrt(-2.0 * log(u1)) * cos(2.0 * pi * u2)


def gamma_std(next_u, shape):
    """Gamma(shape, 1) draw, Marsaglia-Tsang with the shape<1 boost."""
    if shape < 1.0:
        g = gamma_std(next_u, shape + 1.0)
        u = 1.0 - next_u()
        return g * u ** (1.0 / shape)
    d = shape - 1.0 / 3.0
    c = 1.0 / sqrt(9.0 * d)
    while True:
        x = std_normal(next_u)
        t = 1.0 + c * x
        if t <= 0.0:
            continue
        v = t * t * t
        u = 1.0 - next_u()
        if log(u) < 0.5 * x * x + d - d * v + d * log(v):
            return d * v


def stable_pos(next_u, alpha):
    """One-sided stable draw S with E[exp(-s S)] = exp(-s^alpha), alpha in (0,1).

    Kanter / Chambers-Mallows-Stuck construction.
    """
    while True:
        u = next_u()
        if 0.0 < u < 1.0:
            break
    w = 1.0 - next_u()
    while w <= 0.0:
        w = 1.0 - next_u()
    theta = pi * u
    w = -log(w)
    return (sin(alpha * theta) / sin(theta) ** (1.0 / alpha)) * (
        sin((1.0 - alpha) * theta) / w
    ) ** ((1.0 - alpha) / alpha)


def poisson(next_u, lam):
    """Poisson(lam) count; Knuth product method, normal tail for large lam."""
    if lam <= 0.0:
        return 0
    if lam > 50.0:
        n = round(lam + sqrt(lam) * std_normal(next_u))
        return max(0, int(n))
    limit = exp(-lam)
    k = 0
    p = 1.0
    while True:
        p *= next_u()
        if p <= limit:
            return k
        k += 1


def gamma_factor(alpha):
    """Gamma-function constant used by ``ts_increment``; hoisted out of the
    sampling loop so both backends evaluate it with the same implementation."""
    if alpha > 0.0:
        return _gamma(1.0 - alpha)
    if alpha < 0.0:
        return _gamma(-alpha)
    return 0.0


def ts_increment(next_u, intensity, dt, b, alpha, gam):
    """Increment of a tempered stable subordinator over dt.

    Levy measure: intensity * exp(-b z) z^{-(alpha+1)} dz.  Exact in law per
    alpha branch: exponential-tilting rejection for alpha in (0,1), Gamma
    process for alpha = 0, compound Poisson for alpha < 0.  ``gam`` must be
    ``gamma_factor(alpha)``.
    """
    if intensity <= 0.0 or dt <= 0.0:
        return 0.0
    if alpha > 0.0:
        theta = intensity * dt * gam / alpha
        n_sub = 1
        b_alpha = b**alpha
        while theta * b_alpha > _LOG10:
            theta *= 0.5
            n_sub *= 2
        sigma = theta ** (1.0 / alpha)
        total = 0.0
        for _ in range(n_sub):
            while True:
                v = sigma * stable_pos(next_u, alpha)
                if next_u() < exp(-b * v):
                    total += v
                    break
        return total
    if alpha == 0.0:
        return gamma_std(next_u, intensity * dt) / b
    # finite activity: event rate intensity*dt*b^alpha*Gamma(-alpha),
    # Gamma(-alpha, b) jump sizes
    lam = intensity * dt * b**alpha * gam
    n = poisson(next_u, lam)
    total = 0.0
    for _ in range(n):
        total += gamma_std(next_u, -alpha) / b
    return total


def _classify(x, thr, state):
    if x > thr:
        return 1
    if x < thr:
        return 0
    return state if state >= 0 else 0


def run_supcbi(
    bit_generator,
    A,
    B,
    b,
    alpha,
    eta,
    beta,
    xmin,
    y0,
    dt,
    n_steps,
    burn_in,
    hourly_stride,
    dump_stride,
    thresholds,
    shift,
):
    """Simulate one stationary superposed path with per-step speed redraws.

    State update per step: exact exponential decay with a freshly drawn
    reversion speed, plus one tempered stable increment whose intensity uses
    the left-limit state.  Returns accumulated power sums of (X - shift),
    the hourly-decimated series, the optional strided dump, and completed
    sojourn durations per threshold (boundary runs dropped).
    """
    next_u = np.random.Generator(bit_generator).random
    shape = beta - 1.0
    gam = gamma_factor(alpha)
    y = y0
    count = 0
    s1 = s2 = s3 = s4 = 0.0
    hourly = []
    dump = []
    n_thr = len(thresholds)
    states = [-1] * n_thr
    runs = [0] * n_thr
    pending = [True] * n_thr
    high = [[] for _ in range(n_thr)]
    low = [[] for _ in range(n_thr)]
    for step in range(n_steps):
        rho = gamma_std(next_u, shape) * eta
        decay = exp(-rho * dt)
        inten = A + rho * B * y
        dl = ts_increment(next_u, inten, dt, b, alpha, gam)
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
            hourly.append(x)
        if dump_stride > 0 and (count + 1) % dump_stride == 0:
            dump.append(x)
        count += 1
        for k in range(n_thr):
            cls = _classify(x, thresholds[k], states[k])
            if states[k] < 0:
                states[k] = cls
                runs[k] = 1
            elif cls == states[k]:
                runs[k] += 1
            else:
                if pending[k]:
                    pending[k] = False
                elif states[k] == 1:
                    high[k].append(runs[k] * dt)
                else:
                    low[k].append(runs[k] * dt)
                states[k] = cls
                runs[k] = 1
    sojourns = [
        (np.asarray(high[k], dtype=float), np.asarray(low[k], dtype=float))
        for k in range(n_thr)
    ]
    return (
        count,
        s1,
        s2,
        s3,
        s4,
        np.asarray(hourly, dtype=float),
        np.asarray(dump, dtype=float),
        sojourns,
    )


def run_embedding(
    bit_generator,
    A,
    B,
    b,
    alpha,
    weights,
    speeds,
    xmin,
    y0,
    dt,
    n_steps,
    burn_in,
    hourly_stride,
    dump_stride,
    shift,
):
    """Simulate the finite superposition: independent components with fixed
    speeds, jump intensity c_i*A + rho_i*B*Y_i, exact per-component decay."""
    next_u = np.random.Generator(bit_generator).random
    gam = gamma_factor(alpha)
    m = len(speeds)
    ys = [float(v) for v in y0]
    decays = [exp(-speeds[i] * dt) for i in range(m)]
    prefs = [(1.0 - decays[i]) / (speeds[i] * dt) for i in range(m)]
    count = 0
    s1 = s2 = s3 = s4 = 0.0
    hourly = []
    dump = []
    for step in range(n_steps):
        total = 0.0
        for i in range(m):
            inten = weights[i] * A + speeds[i] * B * ys[i]
            dl = ts_increment(next_u, inten, dt, b, alpha, gam)
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
            hourly.append(x)
        if dump_stride > 0 and (count + 1) % dump_stride == 0:
            dump.append(x)
        count += 1
    return (
        count,
        s1,
        s2,
        s3,
        s4,
        np.asarray(hourly, dtype=float),
        np.asarray(dump, dtype=float),
        [],
    )


def sample_increments(bit_generator, n, intensity, dt, b, alpha):
    """n independent tempered stable increments (test/benchmark helper)."""
    next_u = np.random.Generator(bit_generator).random
    gam = gamma_factor(alpha)
    out = np.empty(n)
    for i in range(n):
        out[i] = ts_increment(next_u, intensity, dt, b, alpha, gam)
    return out


def sample_speeds(bit_generator, n, eta, beta):
    """n draws from the size-biased mixing law Gamma(beta-1, eta)."""
    next_u = np.random.Generator(bit_generator).random
    out = np.empty(n)
    for i in range(n):
        out[i] = gamma_std(next_u, beta - 1.0) * eta
    return out
