"""Beltrami equation solver, Schwarzian pipeline, and conformal welding.

The quasiconformal unknown is carried under the inversion z -> 1/z, so
the dilatation lives on the unit disk where every Neumann iterate is a
polynomial-with-logs density whose Cauchy transform stays closed form
(see the _bipoly module).  The exterior principal part of that series
yields exact normalization jets for the interior conformal restriction,
and the first dropped iterate is, identically, the Beltrami residual of
the truncated solution.

Two evaluation paths coexist on purpose: grid sampled densities go
through windowed quadrature with a local polar patch (cauchy_transform),
while everything feeding derivatives goes through the exact term algebra
(beurling_transform and the solver itself).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._bipoly import BiPoly, eval_principal
from ._util import pairwise_dot
from .errors import (
    CriticalPoint,
    DomainMismatch,
    FitFailure,
    NoConvergence,
    NormTooLarge,
    QuadratureFailure,
    TruncationExceeded,
)
from .geometry import Domain, MoebiusMap
from .quadrature import GridFunction, QuadRule, _local_polar_rule, _smoothstep
from .series import BeltramiField, HoloCoeffs

__all__ = [
    "QCMap",
    "WeldingData",
    "cauchy_transform",
    "beurling_transform",
    "solve_beltrami",
    "schwarzian",
    "bers_embedding",
    "welding_decompose",
]

_polyval = np.polynomial.polynomial.polyval
_polyder = np.polynomial.polynomial.polyder

# geometric-decay contract: consecutive Neumann term ratios must stay
# below _CONTRACTION_CAP * sup|mu| (and below 0.95 outright)
_CONTRACTION_CAP = 4.0
_MAX_TERMS = 50

# stand-in for the point at infinity when reflecting z = 0 through the
# unit circle; large enough to be past any Taylor tail, small enough to
# keep squares finite
_FAR = 1e150


# -- Cauchy and Beurling transforms ------------------------------------


def cauchy_transform(h: GridFunction, z) -> complex:
    """P(h)(z) = -(1/pi) iint_D h(zeta)/(zeta - z) d2zeta by quadrature.

    The weak 1/|zeta - z| singularity is handled by a smooth window plus
    a local polar patch around z with bilinear resampling of h, so the
    accuracy is limited by the grid spacing (a few 1e-4 on the default
    rule), not by the singularity.
    """
    if h.domain is not Domain.UNIT_DISK:
        raise DomainMismatch("cauchy_transform integrates densities on the disk")
    z = complex(z)
    rule = h.rule
    nodes = h.nodes()
    weights = rule.node_weights()
    diffs = nodes - z
    dists = np.abs(diffs)
    delta = rule.patch_radius
    if not rule.patch.enabled or dists.min() > delta:
        out = -pairwise_dot(weights, h.values / diffs) / math.pi
    else:
        eta = _smoothstep(dists / delta)
        base = -pairwise_dot(weights * eta, h.values / diffs) / math.pi
        pts, area, window = _local_polar_rule(z, delta, rule.patch.node_count)
        window = window * (np.abs(pts) < 1.0)
        d = pts - z
        kernel = np.conj(d) / np.abs(d) ** 2
        local = _bilinear_lookup(h, pts)
        out = base - np.sum(area * window * local * kernel) / math.pi
    if not np.isfinite(out):
        raise QuadratureFailure("cauchy transform did not evaluate finitely")
    return complex(out)


def _bilinear_lookup(gf: GridFunction, pts):
    """Sample a grid function off-node, bilinear in (r, theta)."""
    radii = gf.rule.radii
    m = gf.rule.angular_count
    r = np.abs(pts)
    hi = np.clip(np.searchsorted(radii, r), 1, radii.size - 1)
    lo = hi - 1
    span = radii[hi] - radii[lo]
    tr = np.clip((r - radii[lo]) / span, 0.0, 1.0)
    ang = np.angle(pts) * m / (2.0 * math.pi)
    j0 = np.floor(ang).astype(int) % m
    ta = ang - np.floor(ang)
    j1 = (j0 + 1) % m
    v00 = gf.values[lo, j0]
    v01 = gf.values[lo, j1]
    v10 = gf.values[hi, j0]
    v11 = gf.values[hi, j1]
    return ((1 - tr) * ((1 - ta) * v00 + ta * v01)
            + tr * ((1 - ta) * v10 + ta * v11))


def _fit_bipoly(gf: GridFunction, deg_z: int, deg_zbar: int):
    """Least-squares expansion of disk samples over z^a zbar^b monomials.

    The dictionary is a in [0, deg_z], b in [-1, deg_zbar]; the b = -1
    column keeps radial dilatations k z/zbar inside the span.  Returns
    the fitted BiPoly and the sup residual over the nodes.
    """
    nodes = gf.nodes().ravel()
    vals = gf.values.ravel()
    cols = []
    index = []
    for a in range(deg_z + 1):
        for b in range(-1, deg_zbar + 1):
            cols.append(nodes**a * np.conj(nodes) ** b)
            index.append((a, b))
    basis = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(basis, vals, rcond=None)
    resid = float(np.max(np.abs(basis @ coef - vals)))
    scale = float(np.max(np.abs(coef))) if coef.size else 0.0
    out = BiPoly.zero()
    for c, (a, b) in zip(coef, index):
        if abs(c) > 1e-13 * max(scale, 1.0):
            out = out + BiPoly.from_term(c, a, b)
    return out, resid


def beurling_transform(h, z, *, degrees=(6, 18), tol=1e-6) -> complex:
    """H(h)(z), computed as d/dz of the closed-form Cauchy transform.

    h may be a GridFunction on the disk (expanded over monomials first;
    TruncationExceeded when the expansion residual exceeds tol) or a
    BiPoly already in the algebra.  Never evaluated as a raw
    principal-value sum.
    """
    if isinstance(h, GridFunction):
        if h.domain is not Domain.UNIT_DISK:
            raise DomainMismatch("beurling_transform expects densities on the disk")
        bp, resid = _fit_bipoly(h, *degrees)
        top = float(np.max(np.abs(h.values)))
        if resid > tol * max(top, 1.0):
            raise TruncationExceeded(
                f"monomial expansion residual {resid:.3e} exceeds tolerance")
    elif isinstance(h, BiPoly):
        bp = h
    else:
        raise TypeError("beurling_transform takes a GridFunction or BiPoly")
    interior, tail = bp.cauchy()
    z = complex(z)
    if abs(z) <= 1.0:
        return complex(interior.dz().eval(z))
    return complex(eval_principal(_tail_derivative(tail), z))


def _tail_derivative(tail):
    # d/dz of sum t[p] z^(-p-1) re-expressed in the same principal basis
    out = np.zeros(tail.size + 1, dtype=complex)
    if tail.size:
        out[1:] = -(np.arange(tail.size) + 1.0) * tail
    return out


# -- the Neumann series -------------------------------------------------


def _nu_from_mu(mu: BeltramiField, degrees):
    """Dilatation of the inverted problem: the pullback of mu under
    z -> 1/z, restricted to the disk, as a closed-form density."""
    if mu.domain is not Domain.EXTERIOR_DISK:
        raise DomainMismatch("solver dilatations live on the exterior disk")
    if mu.is_harmonic:
        out = BiPoly.zero()
        for n, an in zip(mu.n_values, mu.a):
            if an == 0:
                continue
            c = -0.5 * (n**3 - n) * an
            out = out + BiPoly.from_term(c, 0, n - 2)
            out = out + BiPoly.from_term(-2.0 * c, 1, n - 1)
            out = out + BiPoly.from_term(c, 2, n)
        return out, 0.0
    pulled = mu.iota_star()
    return _fit_bipoly(pulled.grid, *degrees)


def _l2_disk(bp: BiPoly, rule: QuadRule) -> float:
    if bp.is_zero:
        return 0.0
    vals = bp.eval(rule.nodes())
    total = pairwise_dot(rule.node_weights(), np.abs(vals) ** 2)
    return math.sqrt(float(np.real(total)))


class _SeriesState:
    """Accumulated Neumann data: w~(zeta) = zeta + interior(zeta) on the
    disk, zeta + principal tail outside, and the next iterate h, which
    is identically the residual density of the truncation."""

    def __init__(self, nu: BiPoly):
        self.nu = nu
        self.interior = BiPoly.zero()
        self.tail = np.zeros(0, dtype=complex)
        self.h = nu
        self.terms = 0
        self.ratios = []
        self._dz = None
        self._dzbar = None

    def push(self):
        pk, tk = self.h.cauchy()
        self.interior = self.interior + pk
        if tk.size > self.tail.size:
            tk = tk.copy()
            tk[:self.tail.size] += self.tail
            self.tail = tk
        else:
            self.tail[:tk.size] += tk
        self.h = (self.nu * pk.dz()).prune()
        self.terms += 1
        self._dz = self._dzbar = None

    def w_tilde(self, zeta):
        return zeta + self.interior.eval(zeta)

    def w_tilde_ext(self, zeta):
        return zeta + eval_principal(self.tail, zeta)

    def dz_interior(self):
        if self._dz is None:
            self._dz = self.interior.dz()
        return self._dz

    def dzbar_interior(self):
        if self._dzbar is None:
            self._dzbar = self.interior.dzbar()
        return self._dzbar

    def residual_field(self, ext_nodes):
        """w_zbar - mu w_z of the truncated map at exterior points,
        via residual = -h_next(1/z) / (zbar^2 w~(1/z)^2)."""
        if self.h.is_zero:
            return np.zeros(np.shape(ext_nodes), dtype=complex)
        zeta = 1.0 / ext_nodes
        wt = self.w_tilde(zeta)
        return -self.h.eval(zeta) / (np.conj(ext_nodes) ** 2 * wt**2)

    def residual_sup(self, ext_nodes) -> float:
        return float(np.max(np.abs(self.residual_field(ext_nodes))))


def _run_series(nu: BiPoly, sup_mu: float, tol: float, ext_nodes,
                probe_nodes, max_terms: int) -> _SeriesState:
    state = _SeriesState(nu)
    norm_rule = QuadRule(24, 48)
    prev = None
    cap = min(0.95, _CONTRACTION_CAP * max(sup_mu, 1e-30))
    while True:
        hn = _l2_disk(state.h, norm_rule)
        if hn == 0.0 or state.residual_sup(probe_nodes) <= 0.3 * tol:
            if state.residual_sup(ext_nodes) <= tol:
                return state
        if prev is not None and prev > 0.0:
            ratio = hn / prev
            state.ratios.append(ratio)
            if state.terms >= 3 and ratio > cap:
                raise NoConvergence(
                    f"series ratio {ratio:.3f} broke the contraction bound {cap:.3f}")
        if state.terms >= max_terms:
            raise NoConvergence(
                f"Beltrami residual above {tol:.1e} after {state.terms} terms")
        prev = hn
        state.push()


# -- Taylor data of the interior conformal restriction ------------------


def _taylor_from_tail(tail, count: int):
    """Coefficients a_n of f(zeta) = sum a_n zeta^(n+1) = 1/w~(1/zeta).

    w~(1/zeta) = (1/zeta)(1 + sum_p tail[p] zeta^(p+2)), so the a_n form
    the reciprocal series; a_0 = 1 and a_1 = 0 hold identically, which
    is how the hydrodynamic normalization at infinity turns into the
    interior jets.
    """
    dser = np.zeros(count + 1, dtype=complex)
    for p, t in enumerate(tail):
        if p + 2 <= count:
            dser[p + 2] = t
    inv = np.zeros(count + 1, dtype=complex)
    inv[0] = 1.0
    for k in range(1, count + 1):
        inv[k] = -np.dot(dser[1:k + 1], inv[k - 1::-1])
    return inv


def _poly_mul_trunc(a, b, count: int):
    out = np.convolve(a, b)[:count + 1]
    if out.size < count + 1:
        out = np.pad(out, (0, count + 1 - out.size))
    return out


def _poly_div_trunc(num, den, count: int):
    if den[0] == 0:
        raise ZeroDivisionError("series division needs a unit constant term")
    num = np.pad(np.asarray(num, dtype=complex),
                 (0, max(0, count + 1 - len(num))))
    den = np.pad(np.asarray(den, dtype=complex),
                 (0, max(0, count + 1 - len(den))))
    out = np.zeros(count + 1, dtype=complex)
    for k in range(count + 1):
        acc = num[k] - (np.dot(den[1:k + 1], out[k - 1::-1]) if k else 0.0)
        out[k] = acc / den[0]
    return out


# -- the solved map -----------------------------------------------------


def _reflect(z):
    """1/conj(z) elementwise, sending 0 to the far stand-in for infinity."""
    out = np.full(z.shape, _FAR, dtype=complex)
    nz = z != 0
    out[nz] = 1.0 / np.conj(z[nz])
    return out


def _phi_eval(phi, w):
    a1, a0, aneg = phi
    w = np.asarray(w, dtype=complex)
    out = a1 * w + a0
    if aneg.size:
        iw = 1.0 / w
        out = out + iw * _polyval(iw, aneg)
    return out


def _phi_deriv(phi, w):
    a1, _, aneg = phi
    w = np.asarray(w, dtype=complex)
    out = np.full(w.shape, a1, dtype=complex)
    if aneg.size:
        iw = 1.0 / w
        kk = np.arange(1.0, aneg.size + 1.0)
        out = out - iw**2 * _polyval(iw, kk * aneg)
    return out


@dataclass(frozen=True)
class QCMap:
    """A solved quasiconformal map, sampled over two aligned polar grids.

    grid holds (disk samples, exterior samples) of w; residualNorm is
    the sup of |w_zbar - mu w_z| over the solver grid, evaluated through
    the series identity rather than finite differences.
    """

    grid: tuple
    mu: BeltramiField
    normalization: str
    seriesTermCount: int
    residualNorm: float
    fitResidual: float = 0.0
    decayRatios: tuple = ()
    normalizationChecks: dict = field(default_factory=dict)
    _series: _SeriesState = field(default=None, repr=False)
    _dress: dict = field(default=None, repr=False)

    @property
    def rule(self) -> QuadRule:
        return self.grid[0].rule

    # Model B evaluation: w(z) = 1/w~(1/z) with w~ from the series
    def _eval_b(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.empty(z.shape, dtype=complex)
        inside = np.abs(z) <= 1.0
        zin = z[inside]
        if zin.size:
            vals = np.zeros(zin.shape, dtype=complex)
            nz = zin != 0
            vals[nz] = 1.0 / self._series.w_tilde_ext(1.0 / zin[nz])
            out[inside] = vals
        zout = z[~inside]
        if zout.size:
            out[~inside] = 1.0 / self._series.w_tilde(1.0 / zout)
        return out

    def _derivs_b(self, z):
        """(w_z, w_zbar) of the Model B map."""
        z = np.asarray(z, dtype=complex)
        wz = np.empty(z.shape, dtype=complex)
        wzb = np.zeros(z.shape, dtype=complex)
        inside = np.abs(z) <= 1.0
        zin = z[inside]
        if zin.size:
            vals = np.ones(zin.shape, dtype=complex)
            nz = zin != 0
            zeta = 1.0 / zin[nz]
            wt = self._series.w_tilde_ext(zeta)
            dwt = 1.0 + eval_principal(_tail_derivative(self._series.tail), zeta)
            vals[nz] = dwt / (zin[nz] ** 2 * wt**2)
            wz[inside] = vals
        zout = z[~inside]
        if zout.size:
            zeta = 1.0 / zout
            wt = self._series.w_tilde(zeta)
            dz_wt = 1.0 + self._series.dz_interior().eval(zeta)
            dzb_wt = self._series.dzbar_interior().eval(zeta)
            wz[~inside] = dz_wt / (zout**2 * wt**2)
            wzb[~inside] = dzb_wt / (np.conj(zout) ** 2 * wt**2)
        return wz, wzb

    def _dressed(self, wb):
        return self._dress["mhat"].apply(_phi_eval(self._dress["phi"], wb))

    def _dressed_deriv(self, wb):
        inner = _phi_eval(self._dress["phi"], wb)
        return (self._dress["mhat"].derivative(inner)
                * _phi_deriv(self._dress["phi"], wb))

    def _eval_a(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.empty(z.shape, dtype=complex)
        outside = np.abs(z) >= 1.0
        zo = z[outside]
        if zo.size:
            out[outside] = self._dressed(self._eval_b(zo))
        zi = z[~outside]
        if zi.size:
            out[~outside] = 1.0 / np.conj(self._dressed(self._eval_b(_reflect(zi))))
        return out

    def _derivs_a(self, z):
        z = np.asarray(z, dtype=complex)
        wz = np.empty(z.shape, dtype=complex)
        wzb = np.empty(z.shape, dtype=complex)
        outside = np.abs(z) >= 1.0
        zo = z[outside]
        if zo.size:
            chain = self._dressed_deriv(self._eval_b(zo))
            bz, bzb = self._derivs_b(zo)
            wz[outside] = chain * bz
            wzb[outside] = chain * bzb
        zi = z[~outside]
        if zi.size:
            sigma = _reflect(zi)
            wb = self._eval_b(sigma)
            chain = self._dressed_deriv(wb)
            bz, bzb = self._derivs_b(sigma)
            wa = self._dressed(wb)
            # scale-safe denominators: z^2 conj(W)^2 = conj(W/sigma)^2
            # and zbar^2 conj(W)^2 = (conj(W)/sigma)^2 at sigma = 1/zbar
            d1 = np.conj(wa / sigma) ** 2
            d2 = (np.conj(wa) / sigma) ** 2
            wz[~outside] = np.conj(chain * bz) / d1
            wzb[~outside] = np.conj(chain * bzb) / d2
        return wz, wzb

    def evaluate(self, z):
        """w at arbitrary points (scalar or ndarray)."""
        z = np.asarray(z, dtype=complex)
        scalar = z.ndim == 0
        flat = z.reshape(-1)
        vals = self._eval_a(flat) if self.normalization == "ModelA" \
            else self._eval_b(flat)
        vals = vals.reshape(z.shape)
        return complex(vals) if scalar else vals

    __call__ = evaluate

    def derivatives(self, z):
        """(w_z, w_zbar) at arbitrary points."""
        z = np.asarray(z, dtype=complex)
        scalar = z.ndim == 0
        flat = z.reshape(-1)
        wz, wzb = (self._derivs_a(flat) if self.normalization == "ModelA"
                   else self._derivs_b(flat))
        wz, wzb = wz.reshape(z.shape), wzb.reshape(z.shape)
        if scalar:
            return complex(wz), complex(wzb)
        return wz, wzb

    def invert(self, target, *, tol=1e-12, max_iter=50) -> complex:
        """Newton preimage of a target value, seeded from the nearest
        grid sample."""
        target = complex(target)
        cands = []
        for gf in self.grid:
            idx = np.argmin(np.abs(gf.values - target))
            cands.append((abs(gf.values.ravel()[idx] - target),
                          complex(gf.nodes().ravel()[idx])))
        z = min(cands)[1]
        for _ in range(max_iter):
            err = self.evaluate(z) - target
            if abs(err) < tol:
                return complex(z)
            wz, wzb = self.derivatives(z)
            jac = abs(wz) ** 2 - abs(wzb) ** 2
            if jac <= 0:
                break
            z = z - (np.conj(wz) * err - wzb * np.conj(err)) / jac
        raise NoConvergence("Newton inversion stalled")


def _interior_jets(qc: QCMap) -> dict:
    """Numerical jets of w at 0 read off a small circle, independently
    of the series bookkeeping that enforces them."""
    r = 1e-2
    pts = r * np.exp(2j * math.pi * np.arange(8) / 8)
    modes = np.fft.fft(qc._eval_b(pts)) / 8
    return {
        "w(0)": float(abs(modes[0])),
        "w'(0)-1": float(abs(modes[1] / r - 1.0)),
        "w''(0)": float(abs(2.0 * modes[2] / r**2)),
    }


def _exterior_riemann(boundary, k_neg: int, *, steps: int = 30):
    """Newton fit of Phi(w) = A1 w + A0 + sum_k A_-k w^-k mapping the
    outside of the sampled curve onto the outside of the unit circle,
    with Phi(inf) = inf and A1 real positive as gauge."""
    m = boundary.size
    basis = [boundary, np.ones(m, dtype=complex)]
    basis += [boundary ** (-k) for k in range(1, k_neg + 1)]
    basis = np.column_stack(basis)
    coef = np.zeros(k_neg + 2, dtype=complex)
    coef[0] = 1.0
    for _ in range(steps):
        phi = basis @ coef
        res = np.abs(phi) ** 2 - 1.0
        if np.max(np.abs(res)) < 1e-13:
            break
        cb = np.conj(phi)[:, None] * basis
        cols = [2.0 * cb[:, 0].real]
        for jcol in range(1, basis.shape[1]):
            cols.append(2.0 * cb[:, jcol].real)
            cols.append(-2.0 * cb[:, jcol].imag)
        mat = np.column_stack(cols)
        upd, *_ = np.linalg.lstsq(mat, -res, rcond=None)
        coef = coef + np.concatenate([[upd[0]], upd[1::2] + 1j * upd[2::2]])
        coef[0] = complex(coef[0].real, 0.0)
    resid = float(np.max(np.abs(np.abs(basis @ coef) - 1.0)))
    if resid > 1e-8:
        raise NoConvergence(f"exterior Riemann fit residual {resid:.2e}")
    return (float(coef[0].real), complex(coef[1]), coef[2:].copy()), resid


def solve_beltrami(mu: BeltramiField, normalization: str = "ModelB",
                   tol: float = 1e-8, *, rule: QuadRule | None = None,
                   fit_degrees=(4, 18), phi_truncation: int = 32,
                   max_terms: int = _MAX_TERMS) -> QCMap:
    """Solve w_zbar = mu w_z for a dilatation supported on the exterior
    disk, normalized per Model A (fixes -1, -i, 1; symmetric under
    circle reflection) or Model B (conformal inside with w(0) = 0,
    w'(0) = 1, w''(0) = 0)."""
    if normalization not in ("ModelA", "ModelB"):
        raise ValueError(f"unknown normalization {normalization!r}")
    sup = mu.sup_norm()
    if sup > 0.5 + 1e-12:
        raise NormTooLarge(f"sup|mu| = {sup:.4f} exceeds the solver cap 0.5")
    rule = rule if rule is not None else QuadRule(64, 128)
    nu, fit_resid = _nu_from_mu(mu, fit_degrees)
    ext_nodes = rule.nodes(Domain.EXTERIOR_DISK)
    probe = QuadRule(12, 24).nodes(Domain.EXTERIOR_DISK)
    # Model A dressing scales the residual by |mhat' Phi'|, so leave margin
    eff_tol = tol if normalization == "ModelB" else 0.25 * tol
    state = _run_series(nu, sup, eff_tol, ext_nodes, probe, max_terms)
    residual = state.residual_sup(ext_nodes)
    c_eff = max(state.ratios) / sup if (state.ratios and sup > 0) else 0.0

    shell = QCMap(grid=(), mu=mu, normalization="ModelB",
                  seriesTermCount=state.terms, residualNorm=residual,
                  _series=state)
    disk_nodes = rule.nodes(Domain.UNIT_DISK)
    disk_vals = shell._eval_b(disk_nodes)
    ext_vals = shell._eval_b(ext_nodes)

    if normalization == "ModelB":
        checks = _interior_jets(shell)
        checks["contractionFactor"] = c_eff
        return QCMap(
            grid=(GridFunction(rule, Domain.UNIT_DISK, disk_vals),
                  GridFunction(rule, Domain.EXTERIOR_DISK, ext_vals)),
            mu=mu, normalization="ModelB", seriesTermCount=state.terms,
            residualNorm=residual, fitResidual=fit_resid,
            decayRatios=tuple(state.ratios), normalizationChecks=checks,
            _series=state)

    # Model A: dress the solved map with the exterior Riemann map of the
    # image domain, then a disk automorphism pinning -1, -i, 1
    m_samples = 4 * rule.angular_count
    circle = np.exp(2j * math.pi * np.arange(m_samples) / m_samples)
    boundary = shell._eval_b(circle)
    phi, phi_resid = _exterior_riemann(boundary, phi_truncation)
    anchors = shell._eval_b(np.array([-1.0 + 0j, -1j, 1.0 + 0j]))
    phi_anchor = _phi_eval(phi, anchors)
    phi_anchor = phi_anchor / np.abs(phi_anchor)
    targets = np.array([-1.0 + 0j, -1j, 1.0 + 0j])
    mhat = MoebiusMap.through_points(phi_anchor, targets, tol=1e-6)
    dress = {"phi": phi, "mhat": mhat,
             "psi_point": complex(phi_anchor[2]), "boundary": boundary}

    chain = np.abs(mhat.derivative(_phi_eval(phi, ext_vals))
                   * _phi_deriv(phi, ext_vals))
    ext_res = chain * np.abs(state.residual_field(ext_nodes))
    wa_ext = mhat.apply(_phi_eval(phi, ext_vals))
    int_res = ext_res / (np.abs(disk_nodes) ** 2 * np.abs(wa_ext) ** 2)
    residual_a = float(max(ext_res.max(), int_res.max()))
    wa_disk = 1.0 / np.conj(wa_ext)
    fixed = mhat.apply(phi_anchor)
    checks = {
        "w(-1)+1": float(abs(fixed[0] + 1.0)),
        "w(-i)+i": float(abs(fixed[1] + 1j)),
        "w(1)-1": float(abs(fixed[2] - 1.0)),
        "phiResidual": phi_resid,
        "contractionFactor": c_eff,
    }
    return QCMap(
        grid=(GridFunction(rule, Domain.UNIT_DISK, wa_disk),
              GridFunction(rule, Domain.EXTERIOR_DISK, wa_ext)),
        mu=mu, normalization="ModelA", seriesTermCount=state.terms,
        residualNorm=residual_a, fitResidual=fit_resid,
        decayRatios=tuple(state.ratios), normalizationChecks=checks,
        _series=state, _dress=dress)


# -- Schwarzian and the Bers embedding ----------------------------------


def _taylor_from_grid(gf: GridFunction, count: int | None = None):
    """Taylor coefficients of a holomorphic function from its outermost
    sample ring (angular FFT, spectrally accurate)."""
    m = gf.rule.angular_count
    count = min(m // 2, 64) if count is None else count
    r = float(gf.rule.radii[-1])
    modes = np.fft.fft(gf.values[-1]) / m
    k = np.arange(count)
    return modes[:count] / r**k


def schwarzian(f, z):
    """S(f) = f'''/f' - (3/2)(f''/f')^2 at the given points.

    Coefficient inputs are differentiated exactly; grid inputs are read
    off spectrally first.  Raises CriticalPoint where |f'| < 1e-12.
    """
    if isinstance(f, GridFunction):
        f = HoloCoeffs(Domain.UNIT_DISK, _taylor_from_grid(f))
    if not isinstance(f, HoloCoeffs):
        raise TypeError("schwarzian takes HoloCoeffs or a sampled grid")
    if f.domain is not Domain.UNIT_DISK:
        raise DomainMismatch("schwarzian expansion lives on the disk")
    c = np.asarray(f.coeffs, dtype=complex)
    d1, d2, d3 = _polyder(c), _polyder(c, 2), _polyder(c, 3)
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    fp = _polyval(z, d1)
    if np.any(np.abs(fp) < 1e-12):
        raise CriticalPoint("derivative vanishes at a requested point")
    out = _polyval(z, d3) / fp - 1.5 * (_polyval(z, d2) / fp) ** 2
    return complex(out) if scalar else out


def bers_embedding(mu: BeltramiField, *, tol: float = 1e-9,
                   truncation: int = 40,
                   rule: QuadRule | None = None) -> HoloCoeffs:
    """Schwarzian of the interior conformal restriction of the Model B
    solution, as Taylor coefficients on the disk."""
    qc = solve_beltrami(mu, "ModelB", tol,
                        rule=rule if rule is not None else QuadRule(24, 48))
    a = _taylor_from_tail(qc._series.tail, truncation + 4)
    count = truncation + 2
    n = np.arange(a.size, dtype=float)
    f1 = ((n + 1.0) * a)[:count + 1]
    f2 = ((n + 1.0) * n * a)[1:count + 2]
    f3 = ((n + 1.0) * n * (n - 1.0) * a)[2:count + 3]
    u = _poly_div_trunc(f2, f1, count)
    s = _poly_div_trunc(f3, f1, count) - 1.5 * _poly_mul_trunc(u, u, count)
    return HoloCoeffs(Domain.UNIT_DISK, s[:truncation + 1])


# -- conformal welding --------------------------------------------------


@dataclass(frozen=True)
class WeldingData:
    """Welding pieces of a circle-symmetric solution: interior series
    f(z) = sum fCoeffs[n] z^(n+1), exterior series g(z) =
    sum gCoeffs[n] z^(1-n), the capacity |g'(inf)| of the welded curve
    and the potential K = log capacity."""

    fCoeffs: np.ndarray
    gCoeffs: np.ndarray
    capacity: float
    potentialK: float
    fitResidual: float = 0.0

    def area_residual(self) -> float:
        """Defect of |b0|^2 = sum (n+1)|a_n|^2 + sum (n-1)|b_n|^2."""
        na = np.arange(self.fCoeffs.size, dtype=float)
        nb = np.arange(self.gCoeffs.size, dtype=float)
        return float(abs(self.gCoeffs[0]) ** 2
                     - np.sum((na + 1.0) * np.abs(self.fCoeffs) ** 2)
                     - np.sum((nb[1:] - 1.0) * np.abs(self.gCoeffs[1:]) ** 2))


def welding_decompose(w: QCMap, truncation: int = 32, *,
                      tol: float = 1e-6) -> WeldingData:
    """Extract the welding factorization from a Model A solution.

    fCoeffs come from the exact interior Taylor data; gCoeffs from a
    least-squares fit of the exterior series on the welded circle
    samples (Tikhonov damped).  Raises FitFailure when the boundary
    residual exceeds tol.
    """
    if w.normalization != "ModelA":
        raise ValueError("welding_decompose needs a Model A solution")
    fcoeffs = _taylor_from_tail(w._series.tail, truncation)
    boundary = w._dress["boundary"]
    psi = w._dress["psi_point"]
    gamma = np.conj(psi) * _phi_eval(w._dress["phi"], boundary)
    powers = np.column_stack([gamma ** (1 - n) for n in range(truncation + 1)])
    lam = math.sqrt(1e-12)
    mat = np.vstack([powers, lam * np.eye(truncation + 1, dtype=complex)])
    rhs = np.concatenate([boundary, np.zeros(truncation + 1, dtype=complex)])
    gcoeffs, *_ = np.linalg.lstsq(mat, rhs, rcond=None)
    resid = float(np.max(np.abs(powers @ gcoeffs - boundary)))
    if resid > tol:
        raise FitFailure(f"welding boundary residual {resid:.3e} exceeds {tol:.1e}")
    capacity = float(abs(gcoeffs[0]))
    return WeldingData(fCoeffs=fcoeffs, gCoeffs=gcoeffs, capacity=capacity,
                       potentialK=math.log(capacity), fitResidual=resid)
