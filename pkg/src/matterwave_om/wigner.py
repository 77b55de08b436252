"""Two-mode Wigner distribution of the post-collision mirror state and its negativity.

Conventions: beta_j are complex phase-space amplitudes (a coherent state
|beta> has its Wigner peak at beta), the distribution is normalised over
d^2 beta_1 d^2 beta_2 = dRe dIm dRe dIm.

The negativity integral exploits the structure of the closed form.  Every
Gaussian term is centred on the real axes at zero, and the cosine factor only
sees Re(beta1 - beta2), so after the orthogonal change of variables

    u = (x1 - x2)/sqrt2,  v = (x1 + x2)/sqrt2,
    p = (y1 - y2)/sqrt2,  q = (y1 + y2)/sqrt2      (x = Re beta, y = Im beta)

the v direction is a bare Gaussian for any state and the q direction is a bare
Gaussian for a sharp particle number.  Those integrals are done analytically,
leaving a 2-D integral (3-D for particle-number mixtures).  ``method="full"``
keeps the literal 4-D tensor-product quadrature for cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional

import numpy as np

from .beamstate import BeamState, Mode, coherence_factor, fluctuation_weights, normalization_q
from .qmath import binomial_exact

#: allowed deviation of the quadrature normalisation integral from one
NORM_TOLERANCE = 1e-3


class GridError(ValueError):
    """Quadrature grid too narrow or too coarse for the requested state."""


class PhasePoint(NamedTuple):
    """Pair of complex amplitudes (beta1, beta2); fields may be numpy arrays."""

    b1: complex
    b2: complex


@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor-product grid over the four real phase-space axes.

    ``half_width``/``points`` apply to the imaginary axes (Im beta_j), where the
    Gaussian centres are spread out; ``re_half_width``/``re_points`` apply to
    the real axes, which carry the interference fringes.  Both default to the
    imaginary-axis values.  Gauss-Legendre grids are composite, with panels of
    ``panel_order`` nodes.
    """

    half_width: float
    points: int
    rule: str = "gauss-legendre"
    re_half_width: Optional[float] = None
    re_points: Optional[int] = None
    panel_order: int = 8

    def __post_init__(self):
        if self.rule not in ("gauss-legendre", "trapezoid"):
            raise GridError(f"unknown quadrature rule {self.rule!r}")
        if not self.half_width > 0 or (self.re_half_width is not None and not self.re_half_width > 0):
            raise GridError("half-widths must be positive")
        if self.points < 8 or (self.re_points is not None and self.re_points < 8):
            raise GridError("need at least 8 points per axis")

    @property
    def re_hw(self) -> float:
        return self.half_width if self.re_half_width is None else self.re_half_width

    @property
    def re_n(self) -> int:
        return self.points if self.re_points is None else self.re_points

    def im_nodes(self, scale: float = 1.0):
        return axis_nodes(scale * self.half_width, math.ceil(scale * self.points), self.rule, self.panel_order)

    def re_nodes(self, scale: float = 1.0):
        return axis_nodes(scale * self.re_hw, math.ceil(scale * self.re_n), self.rule, self.panel_order)


def axis_nodes(half_width: float, points: int, rule: str = "gauss-legendre", panel_order: int = 8):
    """Nodes and weights on [-half_width, half_width]."""
    if rule == "trapezoid":
        x = np.linspace(-half_width, half_width, points)
        w = np.full(points, x[1] - x[0])
        w[[0, -1]] *= 0.5
        return x, w
    panels = max(1, math.ceil(points / panel_order))
    return _composite_gl(-half_width, half_width, panels, panel_order)


def _composite_gl(a: float, b: float, panels: int, order: int):
    t, wt = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    lo, hi = edges[:-1, None], edges[1:, None]
    x = (0.5 * (hi - lo) * t + 0.5 * (hi + lo)).ravel()
    w = (0.5 * (hi - lo) * wt).ravel()
    return x, w


@dataclass(frozen=True)
class NegativityResult:
    delta: float
    abs_integral: float
    norm_integral: float
    grid: QuadratureGrid
    method: str = "reduced"
    #: probability mass of the particle-number tail left out of the mixture
    truncated_mass: float = 0.0
    components: tuple = field(default=(), repr=False)


# --------------------------------------------------------------------------
# closed form


def _pair_weights(N: int, gamma: float, nbar: float, mode) -> list[tuple[int, int, float]]:
    # binom(N,r1) binom(N,r2) Phi(r1-r2) / Q for every contributing pair
    Q = normalization_q(N, gamma, nbar, mode)
    out = []
    for r1 in range(N + 1):
        b1 = binomial_exact(N, r1)
        for r2 in range(N + 1):
            phi = coherence_factor(r1 - r2, mode)
            if phi:
                out.append((r1, r2, b1 * binomial_exact(N, r2) * phi / Q))
    return out


def _wigner(b1, b2, N: int, mode, gamma: float, nbar: float, shift: float):
    # shift = offset added to both Im(beta) before evaluating the unshifted form
    s = nbar + 0.5
    b1 = np.asarray(b1, dtype=complex) + 1j * shift
    b2 = np.asarray(b2, dtype=complex) + 1j * shift
    x1, y1, x2, y2 = b1.real, b1.imag, b2.real, b2.imag
    out = np.zeros(np.broadcast(b1, b2).shape)
    xdiff = x1 - x2
    radial = np.exp(-(x1 * x1 + x2 * x2) / s)
    for r1, r2, w in _pair_weights(N, gamma, nbar, mode):
        t = r1 + r2
        g = np.exp(-((y1 - 0.5 * gamma * (2 * N - t)) ** 2 + (y2 - 0.5 * gamma * t) ** 2) / s)
        out += w * g * np.cos(2 * gamma * (r1 - r2) * xdiff)
    out *= radial / (math.pi * s) ** 2
    return out if out.ndim else float(out)


def wigner_value(point: PhasePoint, beam: BeamState, gamma: float, nbar: float):
    """W(beta1, beta2) of the normalised post-collision state (vectorised)."""
    _check_params(gamma, nbar)
    return _wigner(point[0], point[1], beam.n_particles, beam.mode, gamma, nbar, 0.0)


def wigner_shifted(point: PhasePoint, beam: BeamState, gamma: float, nbar: float):
    """W_S(beta1, beta2) = W(beta1 + i gamma N/2, beta2 + i gamma N/2).

    Satisfies W_S(beta1, beta2) = W_S(-beta2, -beta1).
    """
    _check_params(gamma, nbar)
    N = beam.n_particles
    return _wigner(point[0], point[1], N, beam.mode, gamma, nbar, 0.5 * gamma * N)


def wigner_mixture(point: PhasePoint, beam: BeamState, gamma: float, nbar: float,
                   tail: float = 1e-12):
    """Shifted Wigner function of the particle-number mixture sum_N' w_N' W_N'.

    All components are shifted by the nominal gamma N / 2 so the nominal
    component coincides with ``wigner_shifted``.
    """
    _check_params(gamma, nbar)
    N = beam.n_particles
    weights = fluctuation_weights(N, beam.fluctuation_mean or 0.0, tail=tail)
    return sum(w * _wigner(point[0], point[1], n, beam.mode, gamma, nbar, 0.5 * gamma * N)
               for n, w in weights)


def _check_params(gamma: float, nbar: float):
    if gamma < 0 or nbar < 0:
        raise ValueError("gamma and nbar must be non-negative")


# --------------------------------------------------------------------------
# grids


def gaussian_sigma(nbar: float) -> float:
    """Standard deviation of each Gaussian term along an imaginary axis."""
    return 0.5 * math.sqrt(2 * nbar + 1)


def default_grid(N: int, gamma: float, nbar: float, panel_order: int = 8) -> QuadratureGrid:
    """Grid covering every Gaussian centre of W_S and resolving its fringes.

    Half-width gamma N/2 + 6 sqrt((2 nbar + 1)/2) on the imaginary axes; the
    real axes only need the envelope.  Point counts grow with gamma N so the
    fringe period pi/(gamma N) stays resolved.
    """
    margin = 6 * math.sqrt((2 * nbar + 1) / 2)
    hw = 0.5 * gamma * N + margin
    sig = gaussian_sigma(nbar)
    im_points = max(48, 24 * math.ceil(2 * hw / sig))
    periods = 2 * margin * 2 * gamma * N / (2 * math.pi)
    re_points = max(48, math.ceil(8 * periods) + 16)

    def rnd(n):
        return panel_order * math.ceil(n / panel_order)

    return QuadratureGrid(hw, rnd(im_points), "gauss-legendre", margin, rnd(re_points), panel_order)


def _validate_grid(grid: QuadratureGrid, N: int, gamma: float, nbar: float):
    sig = gaussian_sigma(nbar)
    need_im = 0.5 * gamma * N + 6 * sig
    need_re = 6 * sig
    if grid.half_width < need_im - 1e-12 or grid.re_hw < need_re - 1e-12:
        raise GridError(
            f"grid half-widths (re {grid.re_hw:.3g}, im {grid.half_width:.3g}) do not cover "
            f"all Gaussian centres +/- 6 sigma (need re {need_re:.3g}, im {need_im:.3g})")


# --------------------------------------------------------------------------
# negativity


def negativity(beam: BeamState, gamma: float, nbar: float,
               grid: Optional[QuadratureGrid] = None, method: str = "reduced") -> NegativityResult:
    """delta = integral |W| d^2beta1 d^2beta2 - 1 for a sharp particle number.

    ``method="reduced"`` integrates the exact 2-D reduction (zeros of the
    integrand are located so each sign-definite piece gets full Gauss-Legendre
    accuracy); ``method="full"`` runs the plain 4-D tensor-product rule on W_S.

    Raises
    ------
    GridError
        If the grid misses part of the distribution or the normalisation
        integral deviates from one by more than ``NORM_TOLERANCE``.
    """
    _check_params(gamma, nbar)
    N = beam.n_particles
    grid = grid or default_grid(N, gamma, nbar)
    _validate_grid(grid, N, gamma, nbar)
    if method == "reduced":
        abs_int, norm = _reduced_2d(N, beam.mode, gamma, nbar, grid)
    elif method == "full":
        abs_int, norm = _full_4d(beam, gamma, nbar, grid)
    else:
        raise ValueError(f"unknown method {method!r}")
    _check_norm(norm)
    return NegativityResult(abs_int - 1.0, abs_int, norm, grid, method)


def negativity_fluctuating(beam: BeamState, gamma: float, nbar: float,
                           grid: Optional[QuadratureGrid] = None, tail: float = 1e-4,
                           method: Optional[str] = None) -> NegativityResult:
    """Negativity of the mixture over fluctuating particle numbers N'.

    Components whose combined weight is below ``tail`` are dropped; the
    dropped probability mass is reported as ``truncated_mass``.  With
    ``fluctuation_mean`` zero or unset this is ``negativity(beam)``.
    """
    _check_params(gamma, nbar)
    N = beam.n_particles
    mbar = beam.fluctuation_mean or 0.0
    if mbar == 0 and method in (None, "reduced"):
        res = negativity(beam.with_n(N), gamma, nbar, grid)
        return replace(res, components=((N, 1.0),))
    weights = fluctuation_weights(N, mbar, tail=tail) if mbar > 0 else [(N, 1.0)]
    kept = [(n, w) for n, w in weights if w > 0]
    n_hi = max(n for n, _ in kept)
    n_lo = min(n for n, _ in kept)
    span = max(n_hi - N, N - n_lo, 0)
    grid = grid or _mixture_grid(N, n_hi, span, gamma, nbar)
    _validate_grid(grid, n_hi, gamma, nbar)
    abs_int, norm = _reduced_3d(N, kept, beam.mode, gamma, nbar, grid)
    _check_norm(norm)
    dropped = (mbar / (1.0 + mbar)) ** (n_hi - N + 1) if mbar > 0 else 0.0
    return NegativityResult(abs_int - 1.0, abs_int, norm, grid, "reduced-3d", dropped, tuple(kept))


def _check_norm(norm: float):
    if not abs(norm - 1.0) <= NORM_TOLERANCE:
        raise GridError(f"normalisation integral {norm:.6g} deviates from 1 by more than "
                        f"{NORM_TOLERANCE:g}; enlarge or refine the grid")


def _mixture_grid(N: int, n_hi: int, span: int, gamma: float, nbar: float) -> QuadratureGrid:
    base = default_grid(n_hi, gamma, nbar)
    margin = 6 * math.sqrt((2 * nbar + 1) / 2)
    # q axis must reach the most displaced component: |N' - N| gamma / sqrt2
    hw = max(base.half_width, 0.5 * gamma * n_hi + margin, gamma * span / math.sqrt(2) + margin)
    pts = base.panel_order * math.ceil(3 * 2 * hw / gaussian_sigma(nbar) / base.panel_order)
    return replace(base, half_width=hw, points=max(pts, 48))


class _FringeBasis:
    """G_t(u) = sum_{r1+r2=t} weight * cos(kappa (r1 - r2) u), one column per t."""

    def __init__(self, N: int, mode, gamma: float, nbar: float):
        self.N = N
        self.kappa = 2 * math.sqrt(2) * gamma
        self.coef = np.zeros((N + 1, 2 * N + 1))  # [|d|, t]
        for r1, r2, w in _pair_weights(N, gamma, nbar, mode):
            self.coef[abs(r1 - r2), r1 + r2] += w
        self.centres = gamma * (N - np.arange(2 * N + 1)) / math.sqrt(2)  # p-centres

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        d = np.arange(self.N + 1)
        return np.cos(self.kappa * u[..., None] * d) @ self.coef

    def p_profile(self, p, s: float, offset: float = 0.0):
        # shape (2N+1, len(p))
        return np.exp(-(p[None, :] - self.centres[:, None] - offset) ** 2 / s)


def _reduced_2d(N: int, mode, gamma: float, nbar: float, grid: QuadratureGrid):
    s = nbar + 0.5
    basis = _FringeBasis(N, mode, gamma, nbar)
    p, wp = grid.im_nodes(math.sqrt(2))
    gp = basis.p_profile(p, s)
    u_hw = grid.re_hw
    if grid.rule == "trapezoid":
        u, wu = axis_nodes(u_hw, math.ceil(math.sqrt(2) * grid.re_n), "trapezoid")
        F = (np.exp(-u * u / s)[:, None] * basis(u)) @ gp
        return float(wu @ np.abs(F) @ wp / (math.pi * s)), float(wu @ F @ wp / (math.pi * s))
    n_cells = max(16, math.ceil(math.sqrt(2) * grid.re_n / 2))
    abs_u, signed_u = _abs_integral_u(basis, gp, -u_hw, u_hw, n_cells, grid.panel_order, s)
    return float(abs_u @ wp / (math.pi * s)), float(signed_u @ wp / (math.pi * s))


def _abs_integral_u(basis, gp, a, b, n_cells, order, s, bisections=40):
    """Per p-column integrals of |f| and f over u in [a, b], f = e^{-u^2/s} basis(u) @ gp.

    The u-range is split into cells; a cell whose endpoint values differ in
    sign is split at the bracketed zero (bisection) so that every piece is
    sign-definite and integrated by Gauss-Legendre to full accuracy.
    """
    edges = np.linspace(a, b, n_cells + 1)
    t, wt = np.polynomial.legendre.leggauss(order)
    half = 0.5 * (edges[1] - edges[0])
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = mid[:, None] + half * t[None, :]
    env = np.exp(-nodes * nodes / s)
    cell_basis = np.einsum("ck,ckt->ct", half * wt[None, :] * env, basis(nodes))
    cell_int = cell_basis @ gp  # (cells, columns)
    edge_vals = basis(edges) @ gp  # envelope is positive; signs suffice
    flip = np.signbit(edge_vals[:-1]) != np.signbit(edge_vals[1:])
    flip &= (edge_vals[:-1] != 0) & (edge_vals[1:] != 0)
    abs_cells = np.abs(cell_int)
    ci, cj = np.nonzero(flip)
    if ci.size:
        lo = edges[ci].copy()
        hi = edges[ci + 1].copy()
        g = gp[:, cj].T  # (K, T)
        f_lo = np.einsum("kt,kt->k", basis(lo), g)
        for _ in range(bisections):
            m = 0.5 * (lo + hi)
            f_m = np.einsum("kt,kt->k", basis(m), g)
            left = np.signbit(f_m) == np.signbit(f_lo)
            lo = np.where(left, m, lo)
            f_lo = np.where(left, f_m, f_lo)
            hi = np.where(left, hi, m)
        root = 0.5 * (lo + hi)
        left_int = _piece(basis, g, edges[ci], root, t, wt, s)
        right_int = _piece(basis, g, root, edges[ci + 1], t, wt, s)
        abs_cells[ci, cj] = np.abs(left_int) + np.abs(right_int)
    return abs_cells.sum(axis=0), cell_int.sum(axis=0)


def _piece(basis, g, a, b, t, wt, s):
    half = 0.5 * (b - a)
    x = 0.5 * (a + b)[:, None] + half[:, None] * t[None, :]
    vals = np.einsum("kjt,kt->kj", basis(x), g) * np.exp(-x * x / s)
    return half * (vals @ wt)


def _kinked_trapezoid(F: np.ndarray, h: float, chunk: int = 256):
    """Column-wise integrals of |F| and F sampled on a uniform grid of spacing h.

    Plain trapezoid sums lose accuracy at every sign change of F, where |F|
    has a kink.  In each cell with a sign change the linear-interpolation
    value replaces the trapezoid value, and the leading Euler-Maclaurin term
    of the two adjoining kinked pieces (h^2/6 |F'| per zero) is added back.
    What remains converges like a smooth integrand between the zeros.
    """
    abs_out = np.empty(F.shape[1])
    signed_out = np.empty(F.shape[1])
    for j in range(0, F.shape[1], chunk):
        block = F[:, j:j + chunk]
        A = np.abs(block)
        abs_sum = A.sum(axis=0) - 0.5 * (A[0] + A[-1])
        signed_out[j:j + chunk] = h * (block.sum(axis=0) - 0.5 * (block[0] + block[-1]))
        ab = block[:-1] * block[1:]
        flip = ab < 0
        both = A[:-1] + A[1:]
        corr = np.where(flip, ab / np.where(flip, both, 1.0) + both / 6.0, 0.0).sum(axis=0)
        abs_out[j:j + chunk] = h * (abs_sum + corr)
    return abs_out, signed_out


def _reduced_3d(N: int, kept, mode, gamma: float, nbar: float, grid: QuadratureGrid,
                rel_cut: float = 1e-16):
    """Mixture path over (u, p, q).

    Component N' contributes w_N' h_N'(q) A_N'(u, p) with
    h_N'(q) = exp(-(q - gamma (N' - N)/sqrt2)^2 / s); at each q node only the
    components above ``rel_cut`` of the largest contribution are summed.
    p and q use the grid's Gauss-Legendre rule; u uses a uniform grid with the
    same node count and the kink-corrected trapezoid rule, because the sign
    changes of the integrand run across u.
    """
    s = nbar + 0.5
    u_hw = math.sqrt(2) * grid.re_hw
    # at least 24 nodes per period of the nominal fringe frequency 2 sqrt2 gamma N
    periods = 2 * u_hw * 2 * math.sqrt(2) * gamma * max(N, 1) / (2 * math.pi)
    u = np.linspace(-u_hw, u_hw, max(math.ceil(math.sqrt(2) * grid.re_n), math.ceil(24 * periods)) | 1)
    h = u[1] - u[0]
    p, wp = grid.im_nodes(math.sqrt(2))
    q, wq = grid.im_nodes(math.sqrt(2))
    env = np.exp(-u * u / s)
    qc = {n: gamma * (n - N) / math.sqrt(2) for n, _ in kept}
    wts = dict(kept)
    cache: dict[int, np.ndarray] = {}

    def component(n):
        if n not in cache:
            b = _FringeBasis(n, mode, gamma, nbar)
            cache[n] = (env[:, None] * b(u)) @ b.p_profile(p, s)
        return cache[n]

    buf = np.empty((u.size, p.size))
    tmp = np.empty_like(buf)
    abs_total = 0.0
    norm_total = 0.0
    for qk, wk in zip(q, wq):
        contrib = {n: wts[n] * math.exp(-(qk - qc[n]) ** 2 / s) for n in wts}
        top = max(contrib.values())
        if top < 1e-20:
            # whole slice bounded by top * sum_n integral |A_n| (< 2 per component)
            continue
        active = [n for n, c in contrib.items() if c >= rel_cut * top]
        for n in list(cache):
            if n not in active:
                del cache[n]
        np.multiply(component(active[0]), contrib[active[0]], out=buf)
        for n in active[1:]:
            np.multiply(component(n), contrib[n], out=tmp)
            buf += tmp
        abs_u, signed_u = _kinked_trapezoid(buf, h)
        abs_total += wk * float(abs_u @ wp)
        norm_total += wk * float(signed_u @ wp)
    pref = 1.0 / ((math.pi * s) ** 2 / math.sqrt(math.pi * s))
    return abs_total * pref, norm_total * pref


def _full_4d(beam: BeamState, gamma: float, nbar: float, grid: QuadratureGrid, chunk: int = 4):
    xr, wr = grid.re_nodes()
    yi, wi = grid.im_nodes()
    X2, Y2 = np.meshgrid(xr, yi, indexing="ij")
    W2 = np.outer(wr, wi)
    b2 = X2 + 1j * Y2
    abs_total = 0.0
    norm_total = 0.0
    for i in range(len(xr)):
        for j0 in range(0, len(yi), chunk):
            b1 = (xr[i] + 1j * yi[j0:j0 + chunk])[:, None, None]
            vals = wigner_shifted(PhasePoint(b1, b2[None]), beam, gamma, nbar)
            w1 = (wr[i] * wi[j0:j0 + chunk])[:, None, None]
            abs_total += float(np.sum(w1 * W2 * np.abs(vals)))
            norm_total += float(np.sum(w1 * W2 * vals))
    return abs_total, norm_total
