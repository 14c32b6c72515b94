"""Finite-difference scalar curvature of the full real metric tensor.

This is a verification oracle, deliberately independent of the radial
formulas: it assembles the real 2n x 2n metric from the ambient Hermitian
components near a point on the z_1-axis, differentiates numerically twice
and contracts the Ricci tensor.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError, ToleranceNotMet
from .geometry import HermitianMetricRadial, normalization_factor

STEP = 1e-4


def _metrics_at(m: HermitianMetricRadial, q: np.ndarray, c: float) -> np.ndarray:
    """Real metric tensors at an array of real points q with shape (k, 2n)."""
    n = m.n
    p = q[:, :n] + 1j * q[:, n:]
    z = np.sum(np.abs(p) ** 2, axis=1)
    m.domain.check(z)
    e, f = m.E.values(z), m.F.values(z)
    H = f[:, None, None] * np.eye(n)[None] + ((e - f) / z)[:, None, None] * (
        np.conj(p)[:, :, None] * p[:, None, :])
    R, S = H.real, H.imag
    top = np.concatenate([R, S], axis=2)
    bot = np.concatenate([-S, R], axis=2)
    return c * np.concatenate([top, bot], axis=1)


def _scalar(m: HermitianMetricRadial, q0: np.ndarray, h: float, c: float) -> float:
    d = len(q0)
    eye = np.eye(d)
    # Christoffel symbols are needed at q0 and q0 +- h e_k; each needs dg by
    # central differences, so collect every metric evaluation point up front.
    centers = [q0] + [q0 + s * h * eye[k] for k in range(d) for s in (1, -1)]
    pts = []
    for x in centers:
        pts.append(x)
        for l in range(d):
            pts.append(x + h * eye[l])
            pts.append(x - h * eye[l])
    G = _metrics_at(m, np.array(pts), c)
    stride = 1 + 2 * d

    def christoffel(ci: int) -> tuple[np.ndarray, np.ndarray]:
        base = ci * stride
        g = G[base]
        dg = np.array([(G[base + 1 + 2 * l] - G[base + 2 + 2 * l]) / (2 * h) for l in range(d)])
        ginv = np.linalg.inv(g)
        # Gamma^a_{bc} = 1/2 g^{ad} (d_b g_{dc} + d_c g_{db} - d_d g_{bc})
        t = dg.transpose(1, 0, 2) + dg.transpose(1, 2, 0) - dg
        return 0.5 * np.einsum("ad,dbc->abc", ginv, t), ginv

    gam0, ginv0 = christoffel(0)
    dgam = np.zeros((d,) + gam0.shape)
    for k in range(d):
        gp, _ = christoffel(1 + 2 * k)
        gm, _ = christoffel(2 + 2 * k)
        dgam[k] = (gp - gm) / (2 * h)
    # Ric_bd = d_a Gamma^a_bd - d_d Gamma^a_ab + Gamma^a_ae Gamma^e_bd - Gamma^a_de Gamma^e_ab
    ric = (np.einsum("aabd->bd", dgam)
           - np.einsum("daab->bd", dgam)
           + np.einsum("aae,ebd->bd", gam0, gam0)
           - np.einsum("ade,eab->bd", gam0, gam0))
    return float(np.einsum("bd,bd->", ginv0, ric))


def riemannian_scalar_fd_oracle(m: HermitianMetricRadial, z: float, normalization: str = "kahler",
                                step: float = STEP, rel_tol: float = 1e-4) -> float:
    """Scalar curvature at the point (sqrt z, 0, ..., 0) by finite differences.

    Results at steps h and h/2 are combined by Richardson extrapolation;
    their difference must stay within 10x the target tolerance.
    """
    z = float(z)
    c = normalization_factor(normalization)
    dom = m.domain
    h = step * np.sqrt(z)
    margin = 4 * (2 * h * np.sqrt(z) + 2 * h * h)
    if not (z - margin > dom.alpha and z + margin < dom.beta):
        raise DomainError(f"z = {z} is too close to the annulus edge for the stencil")
    q0 = np.zeros(2 * m.n)
    q0[0] = np.sqrt(z)
    r1 = _scalar(m, q0, h, c)
    r2 = _scalar(m, q0, h / 2, c)
    if abs(r1 - r2) > 10 * rel_tol * max(1.0, abs(r2)):
        raise ToleranceNotMet(f"finite differences did not stabilise at z = {z}: {r1} vs {r2}")
    return (4 * r2 - r1) / 3
