"""Closed-form input-output map for the uncoupled-rotation regime.

With zero birefringence and zero precession the coupled light-spin system
reduces to a Goursat problem whose fundamental solution is known in closed
form.  Working in scaled coordinates (zeta, tau) on the unit square with
kappa_c = a*L*T, the self-kernel and cross-kernel are

    a > 0:  K(u) = sqrt(kappa_c/u) * J1(2*sqrt(kappa_c*u)),
            G(x, t) = J0(2*sqrt(kappa_c*x*t))
    a < 0:  J1 -> -I1 and J0 -> I0 with |kappa_c| in the arguments
    a = 0:  K = 0, G = 1 (transparency)

K has a finite limit K(0+) = kappa_c, so all quadratures below are over
smooth integrands.  The output maps are

    Xi1(L,t) = Xi1_in(t) - (K*Xi1_in)(t) + 2*beta*xi3 * Int G(L-z',t) Jz_in(z') dz'
    Xi2(L,t) = Xi2_in(t) - (K*Xi2_in)(t) - 2*eps*xi3  * Int G(L-z',t) Jy_in(z') dz'
    Jz(z,T)  = Jz_in(z) - (K*Jz_in)(z) - eps*jx  * Int G(z,T-t') Xi1_in(t') dt'
    Jy(z,T)  = Jy_in(z) - (K*Jy_in)(z) + beta*jx * Int G(z,T-t') Xi2_in(t') dt'

These forms are validated against the direct lattice integrator in the test
suite before anything downstream relies on them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from .model import Grid, PhysicalParams
from .quadrature import PanelRule, panel_nodes

__all__ = [
    "KernelSet",
    "FieldRecord",
    "SpinRecord",
    "kernel_self_scaled",
    "kernel_cross_scaled",
    "output_field",
    "output_spin",
]

_TINY = 1e-300


def kernel_self_scaled(kappa_c: float, u):
    """Scaled self-kernel K(u) on u in [0, 1]; K(0+) = kappa_c exactly."""
    u = np.asarray(u, dtype=float)
    if kappa_c == 0.0:
        return np.zeros_like(u)
    mag = abs(kappa_c)
    arg = 2.0 * np.sqrt(mag * np.clip(u, 0.0, None))
    amp = np.sqrt(mag / np.maximum(u, _TINY))
    if kappa_c > 0.0:
        val = amp * _sp.j1(arg)
    else:
        val = -amp * _sp.i1(arg)
    return np.where(u <= 0.0, kappa_c, val)


def kernel_cross_scaled(kappa_c: float, x, t):
    """Scaled cross-kernel G(x, t) for x, t in [0, 1]; G = 1 at a = 0."""
    prod = np.clip(np.asarray(x, dtype=float) * np.asarray(t, dtype=float), 0.0, None)
    if kappa_c == 0.0:
        return np.ones_like(prod)
    if kappa_c > 0.0:
        return _sp.j0(2.0 * np.sqrt(kappa_c * prod))
    return _sp.i0(2.0 * np.sqrt(-kappa_c * prod))


@dataclass(frozen=True)
class KernelSet:
    """Fundamental-solution kernels bound to physical parameters."""

    a_coupling: float
    length_L: float
    time_T: float

    @classmethod
    def from_params(cls, params: PhysicalParams) -> "KernelSet":
        return cls(params.a_coupling, params.length_L, params.time_T)

    @property
    def kappa_c(self) -> float:
        return self.a_coupling * self.length_L * self.time_T

    def k_time(self, u):
        """Light self-kernel at physical time lag u in (0, T]."""
        return kernel_self_scaled(self.kappa_c, np.asarray(u, float) / self.time_T) / self.time_T

    def k_space(self, u):
        """Spin self-kernel at physical space lag u in (0, L]."""
        return kernel_self_scaled(self.kappa_c, np.asarray(u, float) / self.length_L) / self.length_L

    def g_cross(self, x, t):
        """Cross kernel at physical residual depth x and time t."""
        return kernel_cross_scaled(
            self.kappa_c,
            np.asarray(x, float) / self.length_L,
            np.asarray(t, float) / self.time_T,
        )


def _centers(n: int) -> np.ndarray:
    return (np.arange(n) + 0.5) / n


def _validate_samples(name: str, arr, n: int) -> np.ndarray:
    arr = np.asarray(arr, dtype=float)
    if arr.shape != (n,):
        raise ValueError(f"{name} must have shape ({n},), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite samples")
    return arr


@dataclass(frozen=True)
class FieldRecord:
    """Stokes component samples Xi1(t), Xi2(t) at bin centers, fixed z."""

    xi1: np.ndarray
    xi2: np.ndarray

    def __post_init__(self):
        n = len(self.xi1)
        object.__setattr__(self, "xi1", _validate_samples("xi1", self.xi1, n))
        object.__setattr__(self, "xi2", _validate_samples("xi2", self.xi2, n))

    @property
    def n(self) -> int:
        return self.xi1.size

    @classmethod
    def from_functions(cls, f_xi1, f_xi2, n_time: int, time_T: float = 1.0) -> "FieldRecord":
        t = _centers(n_time) * time_T
        return cls(np.asarray(f_xi1(t), float), np.asarray(f_xi2(t), float))

    @classmethod
    def zeros(cls, n_time: int) -> "FieldRecord":
        return cls(np.zeros(n_time), np.zeros(n_time))


@dataclass(frozen=True)
class SpinRecord:
    """Transverse spin samples Jz(z), Jy(z) at bin centers, fixed t."""

    jz: np.ndarray
    jy: np.ndarray

    def __post_init__(self):
        n = len(self.jz)
        object.__setattr__(self, "jz", _validate_samples("jz", self.jz, n))
        object.__setattr__(self, "jy", _validate_samples("jy", self.jy, n))

    @property
    def n(self) -> int:
        return self.jz.size

    @classmethod
    def from_functions(cls, f_jz, f_jy, n_space: int, length_L: float = 1.0) -> "SpinRecord":
        z = _centers(n_space) * length_L
        return cls(np.asarray(f_jz(z), float), np.asarray(f_jy(z), float))

    @classmethod
    def zeros(cls, n_space: int) -> "SpinRecord":
        return cls(np.zeros(n_space), np.zeros(n_space))


def _interp_uniform_centers(values: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Cubic Lagrange interpolation of center samples onto scaled points x.

    Center j sits at (j + 1/2)/n.  Four-point stencils are clamped at the
    edges, so points in the outer half-bins are extrapolated at O(h^4).
    """
    n = values.size
    if n < 4:
        # quadrature grids this coarse are rejected upstream; linear fallback
        idx = np.clip(x * n - 0.5, 0.0, n - 1.0)
        lo = np.clip(np.floor(idx).astype(int), 0, n - 2)
        frac = idx - lo
        return values[lo] * (1 - frac) + values[lo + 1] * frac
    p = x * n - 0.5
    base = np.clip(np.floor(p).astype(int) - 1, 0, n - 4)
    s = p - base
    v0 = values[base]
    v1 = values[base + 1]
    v2 = values[base + 2]
    v3 = values[base + 3]
    w0 = -(s - 1) * (s - 2) * (s - 3) / 6.0
    w1 = s * (s - 2) * (s - 3) / 2.0
    w2 = -s * (s - 1) * (s - 3) / 2.0
    w3 = s * (s - 1) * (s - 2) / 6.0
    return w0 * v0 + w1 * v1 + w2 * v2 + w3 * v3


def _self_convolution(kappa_c: float, samples: np.ndarray, rule: PanelRule,
                      chunk: int = 256) -> np.ndarray:
    """(K * f)(tau_j) at every bin center tau_j, panels aligned to bins."""
    n = samples.size
    h = 1.0 / n
    taus = _centers(n)
    edges = np.arange(n + 1) * h
    full_x, full_w = panel_nodes(edges, rule)          # (n, order)
    full_x = full_x.ravel()
    full_w = full_w.ravel()
    f_full = _interp_uniform_centers(samples, full_x)
    # half-panel [j*h, tau_j] per output
    half_lo = taus - 0.5 * h
    mid = 0.5 * (half_lo + taus)
    half = 0.25 * h
    part_x = mid[:, None] + half * rule.x[None, :]     # (n, order)
    part_w = np.full_like(part_x, half) * rule.w[None, :]
    f_part = _interp_uniform_centers(samples, part_x.ravel()).reshape(part_x.shape)
    out = np.empty(n)
    nodes_per_bin = rule.order
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        js = np.arange(lo, hi)
        # full bins strictly left of bin j
        lags = taus[js, None] - full_x[None, :]
        kern = kernel_self_scaled(kappa_c, lags)
        mask = (np.arange(full_x.size)[None, :] // nodes_per_bin) < js[:, None]
        acc = np.sum(np.where(mask, kern * (full_w[None, :] * f_full[None, :]), 0.0), axis=1)
        acc += np.sum(
            kernel_self_scaled(kappa_c, taus[js, None] - part_x[js])
            * part_w[js] * f_part[js],
            axis=1,
        )
        out[js] = acc
    return out


def _cross_integral(kappa_c: float, source: np.ndarray, n_out: int,
                    residual_of_node, rule: PanelRule, chunk: int = 256) -> np.ndarray:
    """Int G(residual(node), c_j) * source(node) d(node) at every output center c_j.

    The source lives on its own unit interval (n_source bins); outputs are
    the n_out bin centers of the conjugate axis.
    """
    n_src = source.size
    edges = np.arange(n_src + 1) / n_src
    x, w = panel_nodes(edges, rule)
    x = x.ravel()
    wf = (w.ravel()) * _interp_uniform_centers(source, x)
    res = residual_of_node(x)
    outs = _centers(n_out)
    out = np.empty(n_out)
    for lo in range(0, n_out, chunk):
        hi = min(lo + chunk, n_out)
        g = kernel_cross_scaled(kappa_c, res[None, :], outs[lo:hi, None])
        out[lo:hi] = g @ wf
    return out


def output_field(params: PhysicalParams, grid: Grid, xi_in: FieldRecord,
                 spin_in: SpinRecord, rule: PanelRule | None = None) -> FieldRecord:
    """Light record at z = L from input light (z=0) and input spins (t=0)."""
    if xi_in.n != grid.n_time or spin_in.n != grid.n_space:
        raise ValueError("input records do not match the grid")
    rule = rule or PanelRule()
    kc = params.a_coupling * params.length_L * params.time_T
    conv1 = _self_convolution(kc, xi_in.xi1, rule)
    conv2 = _self_convolution(kc, xi_in.xi2, rule)
    crossz = _cross_integral(kc, spin_in.jz, grid.n_time, lambda zeta: 1.0 - zeta, rule)
    crossy = _cross_integral(kc, spin_in.jy, grid.n_time, lambda zeta: 1.0 - zeta, rule)
    cb = 2.0 * params.beta * params.xi3_bar * params.length_L
    ce = 2.0 * params.epsilon * params.xi3_bar * params.length_L
    return FieldRecord(
        xi1=xi_in.xi1 - conv1 + cb * crossz,
        xi2=xi_in.xi2 - conv2 - ce * crossy,
    )


def output_spin(params: PhysicalParams, grid: Grid, xi_in: FieldRecord,
                spin_in: SpinRecord, rule: PanelRule | None = None) -> SpinRecord:
    """Spin record at t = T from input light (z=0) and input spins (t=0)."""
    if xi_in.n != grid.n_time or spin_in.n != grid.n_space:
        raise ValueError("input records do not match the grid")
    rule = rule or PanelRule()
    kc = params.a_coupling * params.length_L * params.time_T
    conv_z = _self_convolution(kc, spin_in.jz, rule)
    conv_y = _self_convolution(kc, spin_in.jy, rule)
    # G(z, T - t'): residual in the time integral is 1 - tau'
    cross1 = _cross_integral(kc, xi_in.xi1, grid.n_space, lambda tau: 1.0 - tau, rule)
    cross2 = _cross_integral(kc, xi_in.xi2, grid.n_space, lambda tau: 1.0 - tau, rule)
    ce = params.epsilon * params.jx_bar * params.time_T
    cb = params.beta * params.jx_bar * params.time_T
    return SpinRecord(
        jz=spin_in.jz - conv_z - ce * cross1,
        jy=spin_in.jy - conv_y + cb * cross2,
    )
