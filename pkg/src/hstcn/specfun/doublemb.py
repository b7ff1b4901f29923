"""Double Mellin-Barnes integrals over two vertical lines.

The integrands that appear here factor as F(s) * G(w) * H(sigma_s s + sigma_w w)
times power kernels z_s^{-s} z_w^{-w}; the coupling factor H is the only part
mixing the two variables, so on a common uniform grid it reduces to a 1-D
precomputation indexed by the sum of node offsets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .gamma import NonConvergenceError
from .meijer import DEFAULT_POLICY, TruncationPolicy

__all__ = ["DoubleMBKernel", "double_mellin_barnes"]


@dataclass
class DoubleMBKernel:
    """Integrand description: all callables return complex *logs* (array in/out)."""

    f_s: Callable
    g_w: Callable
    h_joint: Callable  # evaluated at sigma_s * s + sigma_w * w
    z_s: float
    z_w: float
    c_s: float
    c_w: float
    sigma_s: int = 1
    sigma_w: int = 1


def _grid_eval(kernel: DoubleMBKernel, h: float, T: float):
    n = int(math.ceil(T / h))
    t = h * np.arange(-n, n + 1)
    s = kernel.c_s + 1j * t
    w = kernel.c_w + 1j * t

    lf = kernel.f_s(s) - 1j * t * math.log(kernel.z_s)
    lg = kernel.g_w(w) - 1j * t * math.log(kernel.z_w)

    vbase = kernel.sigma_s * kernel.c_s + kernel.sigma_w * kernel.c_w
    vt = h * np.arange(-2 * n, 2 * n + 1)
    lh = kernel.h_joint(vbase + 1j * vt)

    def scaled(lv):
        m = float(np.max(lv.real))
        if not math.isfinite(m):
            m = 0.0
        with np.errstate(invalid="ignore"):
            out = np.exp(lv - m)
        return np.where(np.isfinite(lv.real) | (lv.real == -np.inf), out, 0.0), m

    F, sf = scaled(lf)
    G, sg = scaled(lg)
    H, sh = scaled(lh)
    F = np.nan_to_num(F, nan=0.0)
    G = np.nan_to_num(G, nan=0.0)
    H = np.nan_to_num(H, nan=0.0)

    ks = kernel.sigma_s * np.arange(-n, n + 1)
    kw = kernel.sigma_w * np.arange(-n, n + 1)
    idx = (ks[:, None] + kw[None, :]) + 2 * n
    M = F[:, None] * G[None, :] * H[idx]
    total = M.sum()

    # (1/2 pi i)^2 (i dt)(i du) = dt du / (2 pi)^2.
    scale = sf + sg + sh - kernel.c_s * math.log(kernel.z_s) - kernel.c_w * math.log(kernel.z_w)
    val = (h / (2.0 * math.pi)) ** 2 * total * math.exp(scale)

    absM = np.abs(M)
    tail = float(
        max(absM[0, :].max(), absM[-1, :].max(), absM[:, 0].max(), absM[:, -1].max())
    )
    peak = float(absM.max())
    return complex(val), tail, peak


def double_mellin_barnes(kernel: DoubleMBKernel,
                         policy: TruncationPolicy = DEFAULT_POLICY,
                         verify: bool = True):
    """Tensor-product trapezoid quadrature of a double Mellin-Barnes integral.

    Returns (real value, error estimate).  The imaginary residual must come
    out negligible relative to the result; a persistent imaginary part means
    the contours fail to separate the pole families.  ``verify=False`` skips
    the halved-step confirmation grid; callers evaluating many terms of one
    kernel family verify the first term and reuse the step for the rest.
    """
    T = policy.contour_im_halfwidth
    h = 1.0 / policy.contour_nodes_per_unit
    freq = abs(math.log(kernel.z_s)) + abs(math.log(kernel.z_w)) + 3.0 * math.log(2.0 + T)
    h = min(h, 2.0 * math.pi / freq / 4.0)

    v1, tail, peak = _grid_eval(kernel, h, T)
    if tail > 1e-12 * peak:
        T *= 2.0
        v1, tail, peak = _grid_eval(kernel, h, T)
        if tail > 1e-8 * peak:
            raise NonConvergenceError("double-MB integrand tails not negligible")
    if not verify:
        v2 = v1
        err = abs(v1) * policy.rel_tol_contour
    else:
        v2, _, _ = _grid_eval(kernel, h / 2.0, T)
        err = abs(v2 - v1)
        if err > 10.0 * policy.rel_tol_contour * max(abs(v2), 1e-300):
            v3, _, _ = _grid_eval(kernel, h / 4.0, T)
            err = abs(v3 - v2)
            v2 = v3
            if err > 100.0 * policy.rel_tol_contour * max(abs(v2), 1e-300):
                raise NonConvergenceError("double-MB quadrature failed tolerance")

    if abs(v2.imag) > 1e-6 * max(abs(v2.real), 1e-300) + 1e-300:
        raise NonConvergenceError(
            f"double-MB imaginary residual {v2.imag:.3e} vs result {v2.real:.3e}"
        )
    return float(v2.real), float(err)
