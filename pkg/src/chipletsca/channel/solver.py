"""Transient solver: modified nodal analysis with trapezoidal companion models.

The network is written as ``G x + D dx/dt = S u(t)`` where ``x`` stacks the
non-ground node voltages followed by inductor and voltage-source branch
currents. Each step solves ``(G + 2D/h) x_n = S u_n + (2D/h) x_{n-1} + d_{n-1}``
with ``d`` the dynamic-element history term; this is the matrix form of the
usual capacitor/inductor companion stamps. DC voltage sources are AC shorts,
so the result is the small-signal response around the operating point.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import LinAlgWarning, lu_factor

from ..traces import Trace, TraceSet
from .netlist import GROUND, Netlist

KCL_RTOL = 1e-9


class SingularCircuitError(RuntimeError):
    pass


class SolverInstabilityError(RuntimeError):
    pass


@dataclass
class ChannelOutput:
    """Receiver-load current and, optionally, node voltages.

    For a batched solve ``i_leak`` is a TraceSet and each ``v_nodes`` entry
    is an array of shape ``(n_traces, n_samples)``.
    """

    i_leak: Trace | TraceSet
    v_nodes: dict | None = None
    max_kcl_residual: float = 0.0


@dataclass
class _System:
    index: dict
    G: np.ndarray
    D: np.ndarray
    S: np.ndarray
    sources: list


def assemble(net: Netlist) -> _System:
    """Build the MNA matrices for ``net``."""
    net.validate()
    nodes = [n for n in net.nodes if n != GROUND]
    index = {n: i for i, n in enumerate(nodes)}
    branches = net.by_kind("inductor") + net.by_kind("dc_voltage_source")
    for j, e in enumerate(branches):
        index[e.name] = len(nodes) + j
    size = len(nodes) + len(branches)
    G = np.zeros((size, size))
    D = np.zeros((size, size))

    def stamp(M, a, b, value):
        ia, ib = index.get(a), index.get(b)
        if ia is not None:
            M[ia, ia] += value
        if ib is not None:
            M[ib, ib] += value
        if ia is not None and ib is not None:
            M[ia, ib] -= value
            M[ib, ia] -= value

    def incidence(e):
        k = index[e.name]
        for node, sign in ((e.a, 1.0), (e.b, -1.0)):
            i = index.get(node)
            if i is not None:
                G[i, k] += sign      # branch current leaves node+
                G[k, i] += sign      # branch voltage v+ - v-

    for e in net.by_kind("resistor"):
        stamp(G, e.a, e.b, 1.0 / e.value)
    for e in net.by_kind("capacitor"):
        stamp(D, e.a, e.b, e.value)
    for e in branches:
        incidence(e)
        if e.kind == "inductor":
            D[index[e.name], index[e.name]] -= e.value
    for e in net.by_kind("mutual"):
        la, lb = net.element(e.a), net.element(e.b)
        m = e.value * np.sqrt(la.value * lb.value)
        D[index[la.name], index[lb.name]] -= m
        D[index[lb.name], index[la.name]] -= m

    sources = net.by_kind("current_source")
    S = np.zeros((size, len(sources)))
    for j, e in enumerate(sources):
        if e.a in index:
            S[index[e.a], j] -= 1.0
        if e.b in index:
            S[index[e.b], j] += 1.0
    return _System(index, G, D, S, sources)


def _excitation_matrix(sys: _System, excitation):
    """Return (waveforms [n_src, batch, n_samples], period, template)."""
    if isinstance(excitation, (Trace, TraceSet)):
        if len(sys.sources) != 1:
            raise ValueError("a single excitation needs exactly one current source; "
                             "pass a mapping of waveform names instead")
        excitation = {sys.sources[0].value: excitation}
    items = [excitation[e.value] for e in sys.sources]
    if not items:
        raise ValueError("netlist has no current source to drive")
    template = items[0]
    for it in items[1:]:
        if (type(it) is not type(template) or it.sample_period != template.sample_period
                or np.shape(it.samples) != np.shape(template.samples)):
            raise ValueError("all excitations must share type, shape and sample period")
    waves = np.stack([np.atleast_2d(np.asarray(it.samples, dtype=np.float64)) for it in items])
    return waves, template.sample_period, template


def transient_solve(net: Netlist, excitation, dt: float | None = None,
                    record_nodes: bool = False) -> ChannelOutput:
    """Solve the network from zero initial conditions.

    ``excitation`` is a Trace, a TraceSet (solved as one batch) or a mapping
    from waveform name to either. It is interpolated onto the solver grid of
    step ``dt`` (default: a hundredth of its sample period) with a C2 cubic
    spline. Output sample ``k`` of the receiver current is its mean over
    ``(t[k-1], t[k]]``, i.e. the charge delivered per sample period, so
    resonances above the output Nyquist rate do not alias. Node voltages are
    point samples at ``t[k]``.
    """
    sys = assemble(net)
    if net.receiver is None:
        raise ValueError("netlist has no receiver load")
    waves, period, template = _excitation_matrix(sys, excitation)
    if dt is None:
        dt = period / 100
    if not dt > 0 or dt > period * (1 + 1e-12):
        raise ValueError("need 0 < dt <= excitation sample period")

    n_src, batch, n_samples = waves.shape
    t_exc = np.arange(n_samples) * period
    if n_samples >= 3:
        interp = CubicSpline(t_exc, waves, axis=2)
    else:
        def interp(t):
            return np.stack([[np.interp(t, t_exc, w) for w in src] for src in waves])

    A = sys.G + (2.0 / dt) * sys.D
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu = lu_factor(A, check_finite=False)
    diag = np.abs(np.diag(lu[0]))
    if diag.min() <= 1e-13 * diag.max():
        names = "; ".join(str(e) for e in net.elements)
        raise SingularCircuitError(f"singular MNA matrix for topology: {names}")
    Dh = (2.0 / dt) * sys.D
    St = sys.S

    recv = net.element(net.receiver)
    sel = np.zeros(A.shape[0])
    if recv.a in sys.index:
        sel[sys.index[recv.a]] += 1.0 / recv.value
    if recv.b in sys.index:
        sel[sys.index[recv.b]] -= 1.0 / recv.value
    n_nodes = len(net.nodes) - 1

    A_inv = np.linalg.inv(A)
    x = np.zeros((A.shape[0], batch))
    g = np.zeros_like(x)              # companion-model history sources
    i_prev = np.zeros(batch)
    charge = np.zeros(batch)          # integral of receiver current since t=0
    charge_at = np.zeros((n_samples, batch))
    nodes_at = np.zeros((n_samples, n_nodes, batch)) if record_nodes else None
    worst = 0.0
    t_now = 0.0
    step = 0
    for k in range(1, n_samples):
        # Sub-steps ending at or before t_exc[k]; a final partial step is
        # replaced by linear interpolation of the state at t_exc[k].
        n_end = int(np.floor(t_exc[k] / dt + 1e-9))
        times = np.arange(step + 1, n_end + 2) * dt
        u_chunk = interp(times)
        for j, t_new in enumerate(times):
            rhs = St @ u_chunk[:, :, j] + g
            x_new = A_inv @ rhs
            if not np.all(np.isfinite(x_new)):
                raise SolverInstabilityError(
                    f"non-finite solution at step {step + j + 1} (t={t_new:.3e} s)")
            r = A @ x_new - rhs
            res2 = np.einsum("ij,ij->j", r, r)
            scale2 = np.einsum("ij,ij->j", rhs, rhs)
            worst = max(worst, float(np.max(res2 / np.maximum(scale2, 1e-300))))
            i_new = sel @ x_new
            if t_new > t_exc[k] + 1e-9 * dt:
                # Overshoot past the sample instant: interpolate, do not accept.
                w = (t_exc[k] - t_now) / dt
                charge_at[k] = charge + 0.5 * (i_prev + (i_prev + w * (i_new - i_prev))) * w * dt
                if nodes_at is not None:
                    nodes_at[k] = (x + w * (x_new - x))[:n_nodes]
                break
            charge += 0.5 * (i_prev + i_new) * dt
            g = 2.0 * (Dh @ x_new) - g
            x, i_prev, t_now = x_new, i_new, t_new
            step += 1
        else:
            charge_at[k] = charge
            if nodes_at is not None:
                nodes_at[k] = x[:n_nodes]
        if abs(t_now - t_exc[k]) <= 1e-9 * dt:
            charge_at[k] = charge
            if nodes_at is not None:
                nodes_at[k] = x[:n_nodes]
    worst = float(np.sqrt(worst))
    if worst > KCL_RTOL:
        raise SolverInstabilityError(f"KCL residual {worst:.2e} exceeds {KCL_RTOL:.0e}")

    i_leak = np.zeros((batch, n_samples))
    i_leak[:, 1:] = np.diff(charge_at, axis=0).T / period
    v_nodes = None
    if record_nodes:
        v_nodes = {name: nodes_at[:, i, :].T for name, i in sys.index.items() if i < n_nodes}
    if isinstance(template, TraceSet):
        leak = template.with_samples(i_leak, unit="amperes", integrated=False)
    else:
        leak = template.with_samples(i_leak[0], unit="amperes", integrated=False)
        if v_nodes is not None:
            v_nodes = {k: v[0] for k, v in v_nodes.items()}
    return ChannelOutput(leak, v_nodes, worst)
