"""Laplace/Fourier mode picture: dispersion, transport, and identity checks.

The temporal Laplace modes (variable s) and spatial Laplace modes (variable
p) of the coupled system are locked by the dispersion law p(s) = A/s with
A = -2*beta*eps*xi3_bar*jx_bar.  On the Fourier section s = -i*omega,
p = i*q this gives q*omega = A and the correlation wavepacket transports at
the group velocity v_g = d omega/d q = -A/q^2, positive on the red wing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import hilbert

from .kernels import FieldRecord, SpinRecord, kernel_cross_scaled, kernel_self_scaled
from .lattice import cell_matrix, integrate, _sweep
from .model import Grid, PhysicalParams
from .quadrature import PanelRule, panel_nodes

__all__ = [
    "SpectralPoint",
    "dispersion_p_of_s",
    "group_velocity",
    "spectral_point",
    "measure_packet_velocity",
    "laplace_identity_residual",
    "laplace_scan",
    "plane_wave_max_error",
]


@dataclass(frozen=True)
class SpectralPoint:
    """One point on the dispersion curve, in both parametrizations."""

    s: complex
    p: complex

    @property
    def omega(self) -> float:
        # s = -i*omega
        return float(self.s.imag * -1.0) if self.s.real == 0 else math.nan

    @property
    def q(self) -> float:
        # p = i*q
        return float(self.p.imag) if self.p.real == 0 else math.nan


def dispersion_p_of_s(A: float, s: complex) -> complex:
    """Spatial Laplace variable coupled to temporal variable s: p = A/s."""
    if s == 0:
        raise ValueError("dispersion has a pole at s = 0")
    if not (math.isfinite(A) and math.isfinite(abs(s))):
        raise ValueError("non-finite dispersion input")
    return A / s


def spectral_point(A: float, s: complex) -> SpectralPoint:
    return SpectralPoint(s=complex(s), p=dispersion_p_of_s(A, s))


def group_velocity(A: float, q: float) -> float:
    """Transport speed of the correlation wavepacket, v_g = -A/q^2."""
    if q == 0:
        raise ValueError("group velocity undefined at q = 0")
    if not (math.isfinite(A) and math.isfinite(q)):
        raise ValueError("non-finite group-velocity input")
    return -A / (q * q)


def _bandpass(x: np.ndarray, dt: float, w_lo: float, w_hi: float) -> np.ndarray:
    spec = np.fft.rfft(x)
    w = 2.0 * np.pi * np.fft.rfftfreq(x.size, dt)
    spec[(w < w_lo) | (w > w_hi)] = 0.0
    return np.fft.irfft(spec, n=x.size)


def measure_packet_velocity(params: PhysicalParams, grid: Grid,
                            q0: float, bandwidth: float) -> float:
    """Transport speed of a narrowband spin wavepacket, from the lattice.

    A Gaussian spin packet centered at wavenumber q0 radiates light; the
    light signal is recorded at two probe planes downstream and the group
    delay is read off the envelope peak of their cross-correlation.  The
    lattice is extended internally beyond the sample box so the packet and
    its transit fit; the caller grid sets the spatial sampling density
    (at least 8 points per packet wavelength are required).

    Requires a >= 0 (red wing); returns 0.0 when no signal propagates (a=0).
    """
    if params.kappa2 != 0.0 or params.omega != 0.0:
        raise ValueError("packet transport is measured in the kappa2 = Omega = 0 regime")
    a_phys = params.a_coupling
    if a_phys < 0.0:
        raise ValueError("packet transport measurement requires a >= 0 (red wing)")
    if not q0 or not math.isfinite(q0):
        raise ValueError("q0 must be nonzero and finite")
    if bandwidth <= 0.0 or bandwidth > 0.2 * abs(q0):
        raise ValueError("bandwidth must lie in (0, 0.2*|q0|] for a narrowband packet")

    # scaled problem on the extended domain, lengths in L, times in T
    L, T = params.length_L, params.time_T
    a = a_phys * L * T
    q = abs(q0) * L
    sig_q = bandwidth * L
    lam = 2.0 * math.pi / q
    ppw_user = lam / (1.0 / grid.n_space)
    if ppw_user < 8.0:
        raise ValueError(
            f"packet not resolvable on grid: {ppw_user:.2f} points per wavelength < 8"
        )
    if a == 0.0:
        return 0.0

    sig_z = 1.0 / sig_q
    z0 = 3.5 * sig_z
    v_g = a / (q * q)
    planes = (z0 + 2.5 * sig_z, z0 + 3.5 * sig_z)
    z_run = planes[1] + 0.7 * sig_z
    sig_tau = sig_z / v_g
    t_run = (planes[1] - z0) / v_g + 5.0 * sig_tau
    w_carrier = a / q

    dz = lam / min(48.0, max(8.0, ppw_user))
    dt = min(2.0 * math.pi / w_carrier / 40.0, sig_tau / 200.0)
    # stability of the lattice cell
    while a * dz * dt >= 0.2:
        dt *= 0.5
    nz = int(math.ceil(z_run / dz))
    nt = int(math.ceil(t_run / dt))
    dz = z_run / nz
    dt = t_run / nt

    run_params = PhysicalParams(
        beta=math.sqrt(a / 2.0), epsilon=math.sqrt(a / 2.0),
        xi3_bar=1.0, jx_bar=1.0, length_L=z_run, time_T=t_run,
    )
    cell = cell_matrix(run_params, dz, dt)
    zc = (np.arange(nz) + 0.5) * dz
    w = np.stack([
        np.cos(q * zc) * np.exp(-((zc - z0) / (math.sqrt(2.0) * sig_z)) ** 2),
        np.zeros(nz),
    ])
    u = np.zeros((2, nt))
    probe_idx = tuple(int(zp / dz) for zp in planes)
    _, _, captured = _sweep(cell, u, w, probes=probe_idx)
    s1 = captured[probe_idx[0]]
    s2 = captured[probe_idx[1]]
    if max(np.max(np.abs(s1)), np.max(np.abs(s2))) < 1e-12:
        return 0.0
    s1 = _bandpass(s1, dt, 0.55 * w_carrier, 1.55 * w_carrier)
    s2 = _bandpass(s2, dt, 0.55 * w_carrier, 1.55 * w_carrier)
    corr = np.correlate(s2, s1, mode="full")
    env = np.abs(hilbert(corr))
    k = int(np.argmax(env))
    shift = 0.0
    if 0 < k < env.size - 1:
        denom = env[k - 1] - 2.0 * env[k] + env[k + 1]
        if denom != 0.0:
            shift = 0.5 * (env[k - 1] - env[k + 1]) / denom
    lag = (k + shift - (nt - 1)) * dt
    if lag <= 0.0:
        return 0.0
    v_scaled = (probe_idx[1] - probe_idx[0]) * dz / lag
    return v_scaled * L / T


def _kernel_output_extended(kc: float, cb: float, xi_fn, jz_fn, taus: np.ndarray,
                            n_grid: int, rule: PanelRule) -> np.ndarray:
    """Xi1(zeta=1, tau) from the kernel solution, tau allowed beyond 1.

    Inputs are scaled callables compactly supported in (0, 1).
    """
    taus = np.atleast_1d(np.asarray(taus, float))
    # space cross term: nodes fixed on [0,1]
    edges_z = np.linspace(0.0, 1.0, n_grid + 1)
    xz, wz = panel_nodes(edges_z, rule)
    xz = xz.ravel()
    wfz = wz.ravel() * jz_fn(xz)
    cross = kernel_cross_scaled(kc, (1.0 - xz)[None, :], taus[:, None]) @ wfz
    # time convolution against the compact input; for tau beyond the support
    # the full [0,1] panel set applies, inside it the upper limit tau must
    # fall on a panel edge, so full bins plus one partial panel per node
    edges_t = np.linspace(0.0, 1.0, n_grid + 1)
    xt, wt = panel_nodes(edges_t, rule)
    xt = xt.ravel()
    wft = wt.ravel() * xi_fn(xt)
    conv = np.zeros_like(taus)
    outside = taus >= 1.0
    if np.any(outside):
        to = taus[outside]
        block = np.empty(to.size)
        for lo in range(0, to.size, 512):
            hi = min(lo + 512, to.size)
            kern = kernel_self_scaled(kc, to[lo:hi, None] - xt[None, :])
            block[lo:hi] = kern @ wft
        conv[outside] = block
    inside = (taus > 0.0) & (taus < 1.0)
    if np.any(inside):
        ti = taus[inside]
        bins = np.minimum((ti * n_grid).astype(int), n_grid - 1)
        vals = np.empty(ti.size)
        nodes_per_bin = rule.order
        for m, (tau, b) in enumerate(zip(ti, bins)):
            full = slice(0, b * nodes_per_bin)
            acc = float(kernel_self_scaled(kc, tau - xt[full]) @ wft[full])
            lo_edge = b / n_grid
            mid = 0.5 * (lo_edge + tau)
            half = 0.5 * (tau - lo_edge)
            px = mid + half * rule.x
            pw = half * rule.w
            acc += float(np.sum(pw * kernel_self_scaled(kc, tau - px) * xi_fn(px)))
            vals[m] = acc
        conv[inside] = vals
    direct = np.where((taus > 0.0) & (taus < 1.0), xi_fn(np.clip(taus, 0.0, 1.0)), 0.0)
    return direct - conv + cb * cross


def laplace_identity_residual(params: PhysicalParams, grid: Grid, s: float,
                              xi1_in, jz_in) -> float:
    """Relative residual of the finite-domain Laplace-transformed solution.

    Checks  X(L,s) = exp(-(a/s)L) X(0,s)
                     + (2 beta xi3 / s) Int_0^L exp(-(a/s)(L-z')) Jz_in(z') dz'
    where X(z,s) is evaluated by continuing the kernel solution to t beyond T
    and truncating the transform at s*t >= 40.  Inputs are callables of the
    physical coordinates, compactly supported in (0,T) and (0,L).
    """
    if params.kappa2 != 0.0 or params.omega != 0.0:
        raise ValueError("Laplace identity requires kappa2 = Omega = 0")
    if not (math.isfinite(s) and s > 0.0):
        raise ValueError("s must be real and positive")
    a = params.a_coupling
    if a < 0.0:
        raise ValueError("a < 0 rejected: the time continuation diverges on the blue wing")

    L, T = params.length_L, params.time_T
    kc = a * L * T
    s_sc = s * T
    cb = 2.0 * params.beta * params.xi3_bar * L
    xi_sc = lambda tau: np.asarray(xi1_in(np.asarray(tau) * T), float)
    jz_sc = lambda zeta: np.asarray(jz_in(np.asarray(zeta) * L), float)

    rule = PanelRule()
    t_max = 40.0 / s_sc
    n = grid.n_time
    # transform panels: grid-fine over the input support, coarser beyond
    if t_max <= 1.0:
        edges = np.linspace(0.0, t_max, max(2, int(np.ceil(t_max * n))) + 1)
    else:
        tail = np.arange(1.0, t_max, 0.25)
        edges = np.concatenate([np.linspace(0.0, 1.0, n + 1), tail[1:], [t_max]])
    xo, wo = panel_nodes(edges, rule)
    xo = xo.ravel()
    wo = wo.ravel()
    field = _kernel_output_extended(kc, cb, xi_sc, jz_sc, xo, n, rule)
    lhs = float(np.sum(wo * np.exp(-s_sc * xo) * field))

    edges_in = np.linspace(0.0, 1.0, n + 1)
    xi_nodes, wi = panel_nodes(edges_in, rule)
    xi_nodes = xi_nodes.ravel()
    wi = wi.ravel()
    xin_hat = float(np.sum(wi * np.exp(-s_sc * xi_nodes) * xi_sc(xi_nodes)))
    spin_hat = float(np.sum(
        wi * np.exp(-(kc / s_sc) * (1.0 - xi_nodes)) * jz_sc(xi_nodes)
    ))
    rhs = math.exp(-kc / s_sc) * xin_hat + (cb / s_sc) * spin_hat
    return abs(lhs - rhs) / max(abs(rhs), 1e-300)


def laplace_scan(params: PhysicalParams, grid: Grid, s_values, xi1_in, jz_in,
                 csv_path=None) -> list[tuple[float, float]]:
    """Residuals over several transform variables, optionally written as CSV."""
    rows = [(float(s), laplace_identity_residual(params, grid, s, xi1_in, jz_in))
            for s in s_values]
    if csv_path is not None:
        from .runner import write_csv
        write_csv(csv_path, ("s", "residual"), rows)
    return rows


def plane_wave_max_error(params: PhysicalParams, grid: Grid,
                         omega: float) -> float:
    """Max output-record error of the exact traveling wave under the lattice.

    The wave pair Xi1 = cos(qz - omega*t), Jz = (eps*jx/omega) sin(qz - omega*t)
    with q = A/omega solves the kappa2 = Omega = 0 system exactly; the lattice
    solution must reproduce it to O(h^2).
    """
    if params.kappa2 != 0.0 or params.omega != 0.0:
        raise ValueError("plane-wave check requires kappa2 = Omega = 0")
    if omega == 0.0:
        raise ValueError("omega must be nonzero")
    A = -params.a_coupling
    q = A / omega
    amp = params.epsilon * params.jx_bar / omega
    xi = FieldRecord.from_functions(
        lambda t: np.cos(omega * t), lambda t: np.zeros_like(t),
        grid.n_time, params.time_T)
    sp = SpinRecord.from_functions(
        lambda z: amp * np.sin(q * z), lambda z: np.zeros_like(z),
        grid.n_space, params.length_L)
    field, spin = integrate(params, grid, xi, sp)
    t = (np.arange(grid.n_time) + 0.5) * grid.dt(params.time_T)
    z = (np.arange(grid.n_space) + 0.5) * grid.dz(params.length_L)
    exact_field = np.cos(q * params.length_L - omega * t)
    exact_spin = amp * np.sin(q * z - omega * params.time_T)
    return max(
        float(np.max(np.abs(field.xi1 - exact_field))),
        float(np.max(np.abs(spin.jz - exact_spin))),
    )
