"""Numerical kernels for the explicit solver (numba-compiled).

Everything here is deliberately dependency-free of the rest of the package:
inputs are plain arrays prepared by :mod:`foamact.solver`.  Loops run in a
fixed serial order and reductions into nodal arrays are per-node, so results
are bitwise reproducible.  The hot paths are written allocation-free.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# material codes (match foamact.mesh)
MAT_FOAM = 0
MAT_SKIN = 1

LAMBDA_MIN = 1e-3


@njit(cache=True, fastmath=True)
def _jacobi3(a, v, w):
    """In-place eigen-decomposition of the symmetric 3x3 matrix ``a``.

    ``a`` is destroyed; eigenvectors land in the columns of ``v`` and
    eigenvalues in ``w``."""
    for i in range(3):
        for j in range(3):
            v[i, j] = 1.0 if i == j else 0.0
    scale = (a[0, 0] * a[0, 0] + a[1, 1] * a[1, 1] + a[2, 2] * a[2, 2] + 1e-300)
    for _ in range(16):
        off = a[0, 1] * a[0, 1] + a[0, 2] * a[0, 2] + a[1, 2] * a[1, 2]
        if off < 1e-26 * scale:
            break
        for p in range(2):
            for q in range(p + 1, 3):
                apq = a[p, q]
                if abs(apq) < 1e-30:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for k in range(3):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(3):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                for k in range(3):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq
    for i in range(3):
        w[i] = a[i, i]


@njit(cache=True, fastmath=True)
def _powi(x, n):
    """x**n for integer n >= 0 by repeated squaring."""
    r = 1.0
    b = x
    while n > 0:
        if n & 1:
            r *= b
        b *= b
        n >>= 1
    return r


@njit(cache=True, fastmath=True)
def _pow_signed(x, al):
    """x**al, taking the cheap integer-exponent path when available."""
    ali = int(al)
    if al == ali:
        if ali >= 0:
            return _powi(x, ali)
        return 1.0 / _powi(x, -ali)
    return x ** al


@njit(cache=True, fastmath=True)
def _foam_point(lam, mus, alphas, betas, p_out):
    """Principal nominal stresses and energy density of the foam model."""
    j = lam[0] * lam[1] * lam[2]
    lnj = np.log(j)
    u = 0.0
    p_out[0] = 0.0
    p_out[1] = 0.0
    p_out[2] = 0.0
    for t in range(mus.shape[0]):
        mu = mus[t]
        al = alphas[t]
        be = betas[t]
        la0 = _pow_signed(lam[0], al)
        la1 = _pow_signed(lam[1], al)
        la2 = _pow_signed(lam[2], al)
        if abs(be) < 1e-9:
            jterm = 1.0
            vol = -al * lnj
        else:
            jterm = j ** (-al * be)
            vol = (jterm - 1.0) / be
        u += 2.0 * mu / (al * al) * (la0 + la1 + la2 - 3.0 + vol)
        c1 = 2.0 * mu / al
        p_out[0] += c1 * (la0 - jterm) / lam[0]
        p_out[1] += c1 * (la1 - jterm) / lam[1]
        p_out[2] += c1 * (la2 - jterm) / lam[2]
    return u


@njit(cache=True, fastmath=True)
def _skin_point(lam, c10, c20, kappa, jbar, p_out):
    """Principal nominal stresses and deviatoric energy density of the
    near-incompressible skin model.

    The deviatoric I1 terms are evaluated with the local stretches; the
    quadratic volumetric penalty uses the element-mean volume ratio ``jbar``
    (mean dilatation), which avoids volumetric locking of linear hexes.  The
    volumetric energy is integrated once per element by the caller."""
    j = lam[0] * lam[1] * lam[2]
    i1 = lam[0] * lam[0] + lam[1] * lam[1] + lam[2] * lam[2]
    jm23 = j ** (-2.0 / 3.0)
    i1b = jm23 * i1
    dw = c10 + 2.0 * c20 * (i1b - 3.0)
    u = c10 * (i1b - 3.0) + c20 * (i1b - 3.0) ** 2
    pvol = kappa * (jbar - 1.0) * j
    for i in range(3):
        di1b = 2.0 * jm23 * (lam[i] - i1 / (3.0 * lam[i]))
        p_out[i] = dw * di1b + pvol / lam[i]
    return u


@njit(cache=True, fastmath=True)
def internal_forces_elems(coords, elems, mat, bmats, dvols,
                          mus, alphas, betas, c10, c20, kappa,
                          fe_out, energy_out, flag_out):
    """Per-element internal (restoring) forces.

    ``bmats``: (ne, ngp, 8, 3) reference shape gradients; ``dvols``:
    (ne, ngp) integration weights.  ``fe_out``: (ne, 8, 3) restoring force
    contributions (-dU/dx).  ``energy_out``: (ne,) strain energy.
    ``flag_out``: (ne,) int status: 0 ok, 1 stretch clamped, 2 inverted.
    """
    ne = elems.shape[0]
    ngp = bmats.shape[1]
    xe = np.empty((8, 3))
    aw = np.empty((3, 3))
    vw = np.empty((3, 3))
    ww = np.empty(3)
    lam = np.empty(3)
    pr = np.empty(3)
    fg = np.empty((ngp, 9))
    lamg = np.empty((ngp, 3))
    vg = np.empty((ngp, 3, 3))
    lmin2 = LAMBDA_MIN * LAMBDA_MIN
    for e in range(ne):
        for a in range(8):
            n = elems[e, a]
            xe[a, 0] = coords[n, 0]
            xe[a, 1] = coords[n, 1]
            xe[a, 2] = coords[n, 2]
        for a in range(8):
            fe_out[e, a, 0] = 0.0
            fe_out[e, a, 1] = 0.0
            fe_out[e, a, 2] = 0.0
        ue = 0.0
        flag = 0
        is_foam = mat[e] == MAT_FOAM
        # kinematics pass: F, principal stretches, eigenvectors per point
        for g in range(ngp):
            f00 = 0.0; f01 = 0.0; f02 = 0.0
            f10 = 0.0; f11 = 0.0; f12 = 0.0
            f20 = 0.0; f21 = 0.0; f22 = 0.0
            for a in range(8):
                b0 = bmats[e, g, a, 0]
                b1 = bmats[e, g, a, 1]
                b2 = bmats[e, g, a, 2]
                x0 = xe[a, 0]; x1 = xe[a, 1]; x2 = xe[a, 2]
                f00 += x0 * b0; f01 += x0 * b1; f02 += x0 * b2
                f10 += x1 * b0; f11 += x1 * b1; f12 += x1 * b2
                f20 += x2 * b0; f21 += x2 * b1; f22 += x2 * b2
            detf = (f00 * (f11 * f22 - f12 * f21)
                    - f01 * (f10 * f22 - f12 * f20)
                    + f02 * (f10 * f21 - f11 * f20))
            if detf <= 0.0:
                flag = 2
                lamg[g, 0] = -1.0  # mark point as skipped
                continue
            fg[g, 0] = f00; fg[g, 1] = f01; fg[g, 2] = f02
            fg[g, 3] = f10; fg[g, 4] = f11; fg[g, 5] = f12
            fg[g, 6] = f20; fg[g, 7] = f21; fg[g, 8] = f22
            # C = F^T F (symmetric)
            aw[0, 0] = f00 * f00 + f10 * f10 + f20 * f20
            aw[1, 1] = f01 * f01 + f11 * f11 + f21 * f21
            aw[2, 2] = f02 * f02 + f12 * f12 + f22 * f22
            aw[0, 1] = f00 * f01 + f10 * f11 + f20 * f21
            aw[0, 2] = f00 * f02 + f10 * f12 + f20 * f22
            aw[1, 2] = f01 * f02 + f11 * f12 + f21 * f22
            aw[1, 0] = aw[0, 1]
            aw[2, 0] = aw[0, 2]
            aw[2, 1] = aw[1, 2]
            _jacobi3(aw, vw, ww)
            for i in range(3):
                wi = ww[i]
                if wi < lmin2:
                    wi = lmin2
                    if flag == 0:
                        flag = 1
                lamg[g, i] = np.sqrt(wi)
                vg[g, 0, i] = vw[0, i]
                vg[g, 1, i] = vw[1, i]
                vg[g, 2, i] = vw[2, i]
        # element-mean volume ratio for the skin volumetric penalty
        jbar = 1.0
        if not is_foam:
            jsum = 0.0
            vsum = 0.0
            for g in range(ngp):
                if lamg[g, 0] <= 0.0:
                    continue
                dv = dvols[e, g]
                jsum += lamg[g, 0] * lamg[g, 1] * lamg[g, 2] * dv
                vsum += dv
            if vsum > 0.0:
                jbar = jsum / vsum
                ue += 0.5 * kappa * (jbar - 1.0) * (jbar - 1.0) * vsum
        # stress pass
        for g in range(ngp):
            if lamg[g, 0] <= 0.0:
                continue
            lam[0] = lamg[g, 0]
            lam[1] = lamg[g, 1]
            lam[2] = lamg[g, 2]
            if is_foam:
                u = _foam_point(lam, mus, alphas, betas, pr)
            else:
                u = _skin_point(lam, c10, c20, kappa, jbar, pr)
            dv = dvols[e, g]
            ue += u * dv
            # S = V diag(P_i / lam_i) V^T (second Piola), symmetric
            c0 = pr[0] / lam[0]
            c1 = pr[1] / lam[1]
            c2 = pr[2] / lam[2]
            v00 = vg[g, 0, 0]; v01 = vg[g, 0, 1]; v02 = vg[g, 0, 2]
            v10 = vg[g, 1, 0]; v11 = vg[g, 1, 1]; v12 = vg[g, 1, 2]
            v20 = vg[g, 2, 0]; v21 = vg[g, 2, 1]; v22 = vg[g, 2, 2]
            s00 = c0 * v00 * v00 + c1 * v01 * v01 + c2 * v02 * v02
            s11 = c0 * v10 * v10 + c1 * v11 * v11 + c2 * v12 * v12
            s22 = c0 * v20 * v20 + c1 * v21 * v21 + c2 * v22 * v22
            s01 = c0 * v00 * v10 + c1 * v01 * v11 + c2 * v02 * v12
            s02 = c0 * v00 * v20 + c1 * v01 * v21 + c2 * v02 * v22
            s12 = c0 * v10 * v20 + c1 * v11 * v21 + c2 * v12 * v22
            f00 = fg[g, 0]; f01 = fg[g, 1]; f02 = fg[g, 2]
            f10 = fg[g, 3]; f11 = fg[g, 4]; f12 = fg[g, 5]
            f20 = fg[g, 6]; f21 = fg[g, 7]; f22 = fg[g, 8]
            # nominal stress P = F S
            p00 = f00 * s00 + f01 * s01 + f02 * s02
            p01 = f00 * s01 + f01 * s11 + f02 * s12
            p02 = f00 * s02 + f01 * s12 + f02 * s22
            p10 = f10 * s00 + f11 * s01 + f12 * s02
            p11 = f10 * s01 + f11 * s11 + f12 * s12
            p12 = f10 * s02 + f11 * s12 + f12 * s22
            p20 = f20 * s00 + f21 * s01 + f22 * s02
            p21 = f20 * s01 + f21 * s11 + f22 * s12
            p22 = f20 * s02 + f21 * s12 + f22 * s22
            for a in range(8):
                b0 = bmats[e, g, a, 0] * dv
                b1 = bmats[e, g, a, 1] * dv
                b2 = bmats[e, g, a, 2] * dv
                fe_out[e, a, 0] -= p00 * b0 + p01 * b1 + p02 * b2
                fe_out[e, a, 1] -= p10 * b0 + p11 * b1 + p12 * b2
                fe_out[e, a, 2] -= p20 * b0 + p21 * b1 + p22 * b2
        energy_out[e] = ue
        flag_out[e] = flag


@njit(cache=True)
def gather_nodal(fe, inc_ptr, inc_elem, inc_slot, out):
    """Fixed-order per-node reduction of per-element forces (bitwise stable)."""
    nn = inc_ptr.shape[0] - 1
    for n in range(nn):
        fx = 0.0
        fy = 0.0
        fz = 0.0
        for k in range(inc_ptr[n], inc_ptr[n + 1]):
            e = inc_elem[k]
            a = inc_slot[k]
            fx += fe[e, a, 0]
            fy += fe[e, a, 1]
            fz += fe[e, a, 2]
        out[n, 0] = fx
        out[n, 1] = fy
        out[n, 2] = fz


@njit(cache=True)
def pressure_forces(coords, faces, p, out):
    """Follower pressure on outward-oriented quads: adds -p * area-vector,
    split equally over the 4 face nodes.  Returns the total current area."""
    nf = faces.shape[0]
    atot = 0.0
    for f in range(nf):
        n0 = faces[f, 0]
        n1 = faces[f, 1]
        n2 = faces[f, 2]
        n3 = faces[f, 3]
        d1x = coords[n2, 0] - coords[n0, 0]
        d1y = coords[n2, 1] - coords[n0, 1]
        d1z = coords[n2, 2] - coords[n0, 2]
        d2x = coords[n3, 0] - coords[n1, 0]
        d2y = coords[n3, 1] - coords[n1, 1]
        d2z = coords[n3, 2] - coords[n1, 2]
        ax = 0.5 * (d1y * d2z - d1z * d2y)
        ay = 0.5 * (d1z * d2x - d1x * d2z)
        az = 0.5 * (d1x * d2y - d1y * d2x)
        atot += np.sqrt(ax * ax + ay * ay + az * az)
        fx = -0.25 * p * ax
        fy = -0.25 * p * ay
        fz = -0.25 * p * az
        for a in range(4):
            n = faces[f, a]
            out[n, 0] += fx
            out[n, 1] += fy
            out[n, 2] += fz
    return atot


CONTACT_X_CAP = 0.6


@njit(cache=True, fastmath=True)
def _contact_law(pen, k_pen, sig_y, dcap):
    """Contact pressure and stored energy density at penetration ``pen``.

    With ``dcap > 0`` a compaction law models the crushed-cell zone at a
    cut: ``p = sig_y * x / (1 - x)^2`` with ``x = pen / dcap``, i.e. the
    lips engage at the foam's plateau stress and stiffen sharply as the
    compaction depth ``dcap`` is consumed (tangent extension past
    ``x = CONTACT_X_CAP`` keeps the response finite).  With ``dcap <= 0``
    the law is the plain linear penalty ``p = k_pen * pen``.
    """
    if dcap <= 0.0:
        return k_pen * pen, 0.5 * k_pen * pen * pen
    x = pen / dcap
    if x <= CONTACT_X_CAP:
        om = 1.0 - x
        p = sig_y * x / (om * om)
        w = sig_y * dcap * (1.0 / om + np.log(om) - 1.0)
        return p, w
    om = 1.0 - CONTACT_X_CAP
    p_c = sig_y * CONTACT_X_CAP / (om * om)
    k_c = sig_y * (1.0 + CONTACT_X_CAP) / (dcap * om * om * om)
    w_c = sig_y * dcap * (1.0 / om + np.log(om) - 1.0)
    d = pen - CONTACT_X_CAP * dcap
    return p_c + k_c * d, w_c + p_c * d + 0.5 * k_c * d * d


@njit(cache=True)
def contact_forces(coords, vel, mass, nodes_s, faces_m, cand_ptr, cand_face,
                   trib, k_pen, sig_y, dcap, zeta, out):
    """One pass of node-to-face seam contact.

    ``nodes_s``: slave node ids; ``cand_ptr``/``cand_face``: CSR candidate
    master-face lists per slave node; ``faces_m``: master quads whose outward
    normals point toward the slave side; ``trib``: tributary area per
    candidate entry.  The normal pressure follows :func:`_contact_law`; on
    top of it a normal dashpot with damping ratio ``zeta`` (relative to the
    local contact mode) suppresses impact chatter while the lips are
    engaged.  Adds forces to ``out``; returns stored contact energy, the
    worst penetration depth, and the dashpot power being dissipated.
    """
    e_pen = 0.0
    pen_max = 0.0
    p_visc = 0.0
    for si in range(nodes_s.shape[0]):
        n = nodes_s[si]
        px = coords[n, 0]
        py = coords[n, 1]
        pz = coords[n, 2]
        # pick the single best candidate face: valid in-plane projection,
        # penetrating, with the smallest penetration depth (the face the
        # node actually crossed; radius-gathered lists overlap, and taking
        # every match would stack several penalties on one node)
        best_k = -1
        best_gap = -1e300
        best_nx = 0.0
        best_ny = 0.0
        best_nz = 0.0
        best_f = -1
        for k in range(cand_ptr[si], cand_ptr[si + 1]):
            fidx = cand_face[k]
            n0 = faces_m[fidx, 0]
            n1 = faces_m[fidx, 1]
            n2 = faces_m[fidx, 2]
            n3 = faces_m[fidx, 3]
            cx = 0.25 * (coords[n0, 0] + coords[n1, 0] + coords[n2, 0] + coords[n3, 0])
            cy = 0.25 * (coords[n0, 1] + coords[n1, 1] + coords[n2, 1] + coords[n3, 1])
            cz = 0.25 * (coords[n0, 2] + coords[n1, 2] + coords[n2, 2] + coords[n3, 2])
            d1x = coords[n2, 0] - coords[n0, 0]
            d1y = coords[n2, 1] - coords[n0, 1]
            d1z = coords[n2, 2] - coords[n0, 2]
            d2x = coords[n3, 0] - coords[n1, 0]
            d2y = coords[n3, 1] - coords[n1, 1]
            d2z = coords[n3, 2] - coords[n1, 2]
            ax = 0.5 * (d1y * d2z - d1z * d2y)
            ay = 0.5 * (d1z * d2x - d1x * d2z)
            az = 0.5 * (d1x * d2y - d1y * d2x)
            amag = np.sqrt(ax * ax + ay * ay + az * az)
            if amag < 1e-14:
                continue
            nx = ax / amag
            ny = ay / amag
            nz = az / amag
            gap = (px - cx) * nx + (py - cy) * ny + (pz - cz) * nz
            if gap >= 0.0:
                continue
            # reject nodes whose in-plane projection falls outside the face
            # (candidates are gathered by radius, so far-slid pairs appear)
            rx = px - cx - gap * nx
            ry = py - cy - gap * ny
            rz = pz - cz - gap * nz
            e1x = 0.5 * d1x; e1y = 0.5 * d1y; e1z = 0.5 * d1z
            e2x = 0.5 * d2x; e2y = 0.5 * d2y; e2z = 0.5 * d2z
            g11 = e1x * e1x + e1y * e1y + e1z * e1z
            g22 = e2x * e2x + e2y * e2y + e2z * e2z
            g12 = e1x * e2x + e1y * e2y + e1z * e2z
            b1 = rx * e1x + ry * e1y + rz * e1z
            b2 = rx * e2x + ry * e2y + rz * e2z
            det = g11 * g22 - g12 * g12
            if det < 1e-20:
                continue
            ua = (g22 * b1 - g12 * b2) / det
            ub = (g11 * b2 - g12 * b1) / det
            if abs(ua) > 1.05 or abs(ub) > 1.05:
                continue
            if gap > best_gap:
                best_gap = gap
                best_k = k
                best_f = fidx
                best_nx = nx
                best_ny = ny
                best_nz = nz
        if best_k >= 0:
            gap = best_gap
            if -gap > pen_max:
                pen_max = -gap
            a_t = trib[best_k]
            p, w = _contact_law(-gap, k_pen, sig_y, dcap)
            fmag = p * a_t  # push the slave back along +n
            if zeta > 0.0:
                # dashpot on the normal approach velocity, sized from the
                # tangent stiffness of the law at this penetration
                if dcap <= 0.0:
                    kt = k_pen
                else:
                    x = -gap / dcap
                    if x > CONTACT_X_CAP:
                        x = CONTACT_X_CAP
                    om = 1.0 - x
                    kt = sig_y * (1.0 + x) / (dcap * om * om * om)
                n0 = faces_m[best_f, 0]
                n1 = faces_m[best_f, 1]
                n2 = faces_m[best_f, 2]
                n3 = faces_m[best_f, 3]
                vrx = vel[n, 0] - 0.25 * (vel[n0, 0] + vel[n1, 0]
                                          + vel[n2, 0] + vel[n3, 0])
                vry = vel[n, 1] - 0.25 * (vel[n0, 1] + vel[n1, 1]
                                          + vel[n2, 1] + vel[n3, 1])
                vrz = vel[n, 2] - 0.25 * (vel[n0, 2] + vel[n1, 2]
                                          + vel[n2, 2] + vel[n3, 2])
                vn = vrx * best_nx + vry * best_ny + vrz * best_nz
                c = 2.0 * zeta * np.sqrt(kt * a_t * mass[n])
                fmag -= c * vn
                p_visc += c * vn * vn
            out[n, 0] += fmag * best_nx
            out[n, 1] += fmag * best_ny
            out[n, 2] += fmag * best_nz
            q = 0.25 * fmag
            for a in range(4):
                nm = faces_m[best_f, a]
                out[nm, 0] -= q * best_nx
                out[nm, 1] -= q * best_ny
                out[nm, 2] -= q * best_nz
            e_pen += w * a_t
    return e_pen, pen_max, p_visc


@njit(cache=True)
def integrate_free(coords, vel, force, minv, free_mask, cdamp, dt):
    """Central-difference velocity/position update with mass-proportional
    damping on nodes flagged free."""
    nn = coords.shape[0]
    half = 0.5 * cdamp * dt
    for n in range(nn):
        if not free_mask[n]:
            continue
        for i in range(3):
            a = force[n, i] * minv[n]
            v = ((1.0 - half) * vel[n, i] + dt * a) / (1.0 + half)
            vel[n, i] = v
            coords[n, i] += dt * v
