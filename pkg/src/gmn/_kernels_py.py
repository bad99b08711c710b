"""Pure numpy implementations of the hot kernels.

Mirrors ``_kernels_c.pyx`` function for function; used when the compiled
extension is unavailable or ``GMN_PURE_PYTHON=1`` is set.
"""
import numpy as np


def family_score(a, alphas, delta):
    """Score and gradient of the constrained state family (phases gauged to 0).

    Returns ``(score, grad)`` where ``grad`` is ordered ``(a, alpha_1..alpha_N, delta)``.
    The score is ``-inf``-free only for feasible ``a``; callers keep ``a`` inside
    ``[0, family_a_max(alphas)]``.
    """
    alphas = np.asarray(alphas, dtype=float)
    n = alphas.size
    s = np.sin(0.5 * alphas)
    c = np.cos(0.5 * alphas)
    sign = -1.0 if n % 2 else 1.0

    ps = np.prod(s)
    pc = np.prod(c)
    # products with factor i removed; N is small so the O(N^2) form is fine
    ps_wo = np.array([np.prod(np.delete(s, i)) for i in range(n)])
    pc_wo = np.array([np.prod(np.delete(c, i)) for i in range(n)])
    dps = 0.5 * c * ps_wo
    dpc = -0.5 * s * pc_wo

    g = (1.0 - pc * pc) / ps
    dg = (-2.0 * pc * dpc * ps - (1.0 - pc * pc) * dps) / (ps * ps)
    h = g / ps
    dh = (dg * ps - g * dps) / (ps * ps)

    rad = 1.0 - a * a * h
    if rad < 0.0:
        rad = 0.0
    root = np.sqrt(rad)
    inv_root = 0.5 / root if root > 0.0 else 0.0
    cd = np.cos(delta)
    sd = np.sin(delta)

    q = a * a * g * g + pc * pc * rad + 2.0 * sign * a * g * pc * root * cd
    score = a * a - q

    drad_da = -2.0 * a * h
    drad_dal = -a * a * dh
    dq_da = (2.0 * a * g * g + pc * pc * drad_da
             + 2.0 * sign * g * pc * cd * (root + a * drad_da * inv_root))
    dq_dal = (2.0 * a * a * g * dg + 2.0 * pc * dpc * rad + pc * pc * drad_dal
              + 2.0 * sign * a * cd * (dg * pc * root + g * dpc * root
                                       + g * pc * drad_dal * inv_root))
    dq_dd = -2.0 * sign * a * g * pc * root * sd

    grad = np.empty(n + 2)
    grad[0] = 2.0 * a - dq_da
    grad[1:n + 1] = -dq_dal
    grad[n + 1] = -dq_dd
    return float(score), grad


def family_a_max(alphas):
    """Largest ``a`` keeping the normalization radicand nonnegative, and its gradient."""
    alphas = np.asarray(alphas, dtype=float)
    n = alphas.size
    s = np.sin(0.5 * alphas)
    c = np.cos(0.5 * alphas)
    ps = np.prod(s)
    pc = np.prod(c)
    ps_wo = np.array([np.prod(np.delete(s, i)) for i in range(n)])
    pc_wo = np.array([np.prod(np.delete(c, i)) for i in range(n)])
    dps = 0.5 * c * ps_wo
    dpc = -0.5 * s * pc_wo
    # a_max^2 = ps^2 / (1 - pc^2)
    den = 1.0 - pc * pc
    m2 = ps * ps / den
    dm2 = (2.0 * ps * dps * den + ps * ps * 2.0 * pc * dpc) / (den * den)
    m = np.sqrt(m2)
    return float(m), 0.5 * dm2 / m


def qubit_terms(re, im, alphas):
    """Paradox terms of an unnormalized N-qubit vector under the gauge-fixed measurements.

    ``z = re + 1j*im`` is normalized internally. Returns ``(values, jac)`` with
    ``values = [p, q, r_1, ..., r_N]`` and ``jac`` of shape ``(N + 2, 2 * 2**N + N)``
    holding derivatives with respect to ``(re, im, alphas)``.

    ``r_i`` is the marginal probability of "+" for party i at setting 1 together
    with "+" for party i+1 (cyclic) at setting 0.
    """
    re = np.asarray(re, dtype=float)
    im = np.asarray(im, dtype=float)
    alphas = np.asarray(alphas, dtype=float)
    n = alphas.size
    dim = 1 << n
    z = re + 1j * im
    norm = float(np.dot(re, re) + np.dot(im, im))

    s = np.sin(0.5 * alphas)
    c = np.cos(0.5 * alphas)

    raw = np.zeros(n + 2)
    draw = np.zeros((n + 2, 2 * dim + n))

    raw[0] = re[0] ** 2 + im[0] ** 2
    draw[0, 0] = 2.0 * re[0]
    draw[0, dim] = 2.0 * im[0]

    # q: overlap with the all-"-" product bra at setting 1
    f = np.array([1.0])
    for i in range(n):
        f = np.kron(f, [-s[i], c[i]])
    ov = np.dot(f, z)
    raw[1] = abs(ov) ** 2
    draw[1, :dim] = 2.0 * ov.real * f
    draw[1, dim:2 * dim] = 2.0 * ov.imag * f
    for i in range(n):
        fi = np.array([1.0])
        for j in range(n):
            fi = np.kron(fi, [-0.5 * c[j], -0.5 * s[j]] if j == i else [-s[j], c[j]])
        draw[1, 2 * dim + i] = 2.0 * (np.conj(ov) * np.dot(fi, z)).real

    zt = z.reshape((2,) * n)
    for i in range(n):
        j = (i + 1) % n
        zi = np.moveaxis(zt, (i, j), (0, 1))
        w = c[i] * zi[0, 0] + s[i] * zi[1, 0]
        dw = -0.5 * s[i] * zi[0, 0] + 0.5 * c[i] * zi[1, 0]
        raw[2 + i] = np.sum(np.abs(w) ** 2)
        g = np.zeros((2, 2) + w.shape, dtype=complex)
        g[0, 0] = c[i] * w
        g[1, 0] = s[i] * w
        g = np.moveaxis(g, (0, 1), (i, j)).reshape(dim)
        draw[2 + i, :dim] = 2.0 * g.real
        draw[2 + i, dim:2 * dim] = 2.0 * g.imag
        draw[2 + i, 2 * dim + i] = 2.0 * np.sum((np.conj(w) * dw).real)

    values = raw / norm
    jac = draw / norm
    jac[:, :dim] -= np.outer(values, 2.0 * re) / norm
    jac[:, dim:2 * dim] -= np.outer(values, 2.0 * im) / norm
    return values, jac
