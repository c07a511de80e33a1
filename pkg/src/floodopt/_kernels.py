"""Numba kernels for the finite-volume shallow-water stepper.

Scheme: central-upwind fluxes with generalized-minmod piecewise-linear
reconstruction of the free surface w = h + B, interface bottom values
averaged from cell centers, and a source-term quadrature that balances the
pressure flux exactly for a lake at rest. A donor-cell flux limiter keeps
depths non-negative without sacrificing conservation.

The y-direction sweep reuses the x-direction row sweep on transposed copies
with the momentum fields swapped.
"""

import numpy as np
from numba import njit

BC_CRITICAL = 0
BC_REFLECTIVE = 1

# Keep NaN/Inf semantics; allow contraction and reassociation.
_FM = {"nsz", "arcp", "contract", "reassoc"}

# Generalized minmod parameter (1 = most dissipative, 2 = least).
LIMITER_THETA = 1.3

# Depth below which velocities are smoothly regularized. Equals q/h for
# h >= H_REG; rolls off below so barely-wet cells cannot reach huge speeds.
H_REG = 1e-3
_EPS4 = H_REG ** 4
_SQRT2 = np.sqrt(2.0)

# Specific-velocity ceiling as a multiple of sqrt(g * available head). The
# fastest resolved feature (a dry-bed dam-break front) peaks at twice that
# root, so the cap only drains runaway momentum in near-dry sheets.
VEL_CAP_FACTOR = 8.0


@njit(cache=True, nogil=True, inline="always")
def _velocity(h, q, h_dry):
    """Desingularized velocity: exactly q/h for h >= H_REG, damped below."""
    if h <= h_dry:
        return 0.0
    h2 = h * h
    h4 = h2 * h2
    denom4 = h4 + (h4 if h4 > _EPS4 else _EPS4)
    return _SQRT2 * h * q / np.sqrt(denom4)


@njit(cache=True, nogil=True, inline="always")
def _minmod3(a, b, c):
    if a > 0.0 and b > 0.0 and c > 0.0:
        m = a
        if b < m:
            m = b
        if c < m:
            m = c
        return m
    if a < 0.0 and b < 0.0 and c < 0.0:
        m = a
        if b > m:
            m = b
        if c > m:
            m = c
        return m
    return 0.0


@njit(cache=True, nogil=True)
def fill_ghosts(h, qn, qt, bc, hp, qnp, qtp):
    """Write padded (R+2, C+2) arrays with one ghost ring per the BC.

    qn is the momentum component normal to the sweep direction (rows), qt the
    transverse one. BC_CRITICAL copies the edge state (zero free-surface
    gradient, water may leave). BC_REFLECTIVE copies depth and negates the
    normal momentum at row ends and the transverse momentum at column ends.
    """
    R, C = h.shape
    hp[1 : R + 1, 1 : C + 1] = h
    qnp[1 : R + 1, 1 : C + 1] = qn
    qtp[1 : R + 1, 1 : C + 1] = qt
    sign = -1.0 if bc == BC_REFLECTIVE else 1.0
    for c in range(C):
        hp[0, c + 1] = h[0, c]
        hp[R + 1, c + 1] = h[R - 1, c]
        qnp[0, c + 1] = qn[0, c]
        qnp[R + 1, c + 1] = qn[R - 1, c]
        qtp[0, c + 1] = sign * qt[0, c]
        qtp[R + 1, c + 1] = sign * qt[R - 1, c]
    for r in range(R):
        hp[r + 1, 0] = h[r, 0]
        hp[r + 1, C + 1] = h[r, C - 1]
        qnp[r + 1, 0] = sign * qn[r, 0]
        qnp[r + 1, C + 1] = sign * qn[r, C - 1]
        qtp[r + 1, 0] = qt[r, 0]
        qtp[r + 1, C + 1] = qt[r, C - 1]
    # corners are never read by the stencil; keep them finite
    hp[0, 0] = h[0, 0]
    hp[0, C + 1] = h[0, C - 1]
    hp[R + 1, 0] = h[R - 1, 0]
    hp[R + 1, C + 1] = h[R - 1, C - 1]
    qnp[0, 0] = qnp[0, C + 1] = qnp[R + 1, 0] = qnp[R + 1, C + 1] = 0.0
    qtp[0, 0] = qtp[0, C + 1] = qtp[R + 1, 0] = qtp[R + 1, C + 1] = 0.0


@njit(cache=True, nogil=True)
def pad_bed(bed, bedp):
    R, C = bed.shape
    bedp[1 : R + 1, 1 : C + 1] = bed
    for c in range(C):
        bedp[0, c + 1] = bed[0, c]
        bedp[R + 1, c + 1] = bed[R - 1, c]
    for r in range(R):
        bedp[r + 1, 0] = bed[r, 0]
        bedp[r + 1, C + 1] = bed[r, C - 1]
    bedp[0, 0] = bed[0, 0]
    bedp[0, C + 1] = bed[0, C - 1]
    bedp[R + 1, 0] = bed[R - 1, 0]
    bedp[R + 1, C + 1] = bed[R - 1, C - 1]


@njit(cache=True, nogil=True, fastmath=_FM)
def _sweep(hp, qnp, qtp, bedp, g, h_dry, bc, fh, fn, ft, src):
    """Fluxes along rows of padded arrays, with hydrostatic reconstruction.

    Depth and free surface are reconstructed linearly per cell; at each
    interface the bottom is the max of the two face bottoms and depths are
    re-referenced to it, which keeps dry wall tops from leaking phantom
    pressure. qnp is the row-normal momentum. Outputs: fh (R, C+1) mass
    flux, fn normal-momentum flux, ft transverse-momentum flux, src (R, C)
    normal-momentum source (bed slope plus interface pressure corrections,
    to be divided by the cell size). Mass flux through the outermost
    interfaces is clamped: reflective passes nothing, open never imports.
    """
    R = hp.shape[0] - 2
    C = hp.shape[1] - 2
    w = np.empty(C + 2)
    h_hi = np.empty(C + 2)  # face toward higher column index
    h_lo = np.empty(C + 2)
    w_hi = np.empty(C + 2)
    w_lo = np.empty(C + 2)
    b_hi = np.empty(C + 2)
    b_lo = np.empty(C + 2)
    qn_hi = np.empty(C + 2)
    qn_lo = np.empty(C + 2)
    qt_hi = np.empty(C + 2)
    qt_lo = np.empty(C + 2)
    for r in range(R):
        rr = r + 1
        # a fully dry row contributes no fluxes and no sources
        row_wet = False
        for c in range(C + 2):
            if hp[rr, c] > h_dry:
                row_wet = True
                break
        if not row_wet:
            for c in range(C + 1):
                fh[r, c] = 0.0
                fn[r, c] = 0.0
                ft[r, c] = 0.0
            for c in range(C):
                src[r, c] = 0.0
            continue
        for c in range(C + 2):
            w[c] = hp[rr, c] + bedp[rr, c]
        # ghost faces carry the ghost cell value
        for c in (0, C + 1):
            h_hi[c] = h_lo[c] = hp[rr, c]
            w_hi[c] = w_lo[c] = w[c]
            b_hi[c] = b_lo[c] = bedp[rr, c]
            qn_hi[c] = qn_lo[c] = qnp[rr, c]
            qt_hi[c] = qt_lo[c] = qtp[rr, c]
        for c in range(1, C + 1):
            dw = 0.5 * _minmod3(
                LIMITER_THETA * (w[c] - w[c - 1]),
                0.5 * (w[c + 1] - w[c - 1]),
                LIMITER_THETA * (w[c + 1] - w[c]),
            )
            dh = 0.5 * _minmod3(
                LIMITER_THETA * (hp[rr, c] - hp[rr, c - 1]),
                0.5 * (hp[rr, c + 1] - hp[rr, c - 1]),
                LIMITER_THETA * (hp[rr, c + 1] - hp[rr, c]),
            )
            dqn = 0.5 * _minmod3(
                LIMITER_THETA * (qnp[rr, c] - qnp[rr, c - 1]),
                0.5 * (qnp[rr, c + 1] - qnp[rr, c - 1]),
                LIMITER_THETA * (qnp[rr, c + 1] - qnp[rr, c]),
            )
            dqt = 0.5 * _minmod3(
                LIMITER_THETA * (qtp[rr, c] - qtp[rr, c - 1]),
                0.5 * (qtp[rr, c + 1] - qtp[rr, c - 1]),
                LIMITER_THETA * (qtp[rr, c + 1] - qtp[rr, c]),
            )
            hh = hp[rr, c] + dh
            hl = hp[rr, c] - dh
            if hh < 0.0:
                hh = 0.0
            if hl < 0.0:
                hl = 0.0
            h_hi[c] = hh
            h_lo[c] = hl
            w_hi[c] = w[c] + dw
            w_lo[c] = w[c] - dw
            b_hi[c] = w_hi[c] - hh
            b_lo[c] = w_lo[c] - hl
            qn_hi[c] = qnp[rr, c] + dqn
            qn_lo[c] = qnp[rr, c] - dqn
            qt_hi[c] = qtp[rr, c] + dqt
            qt_lo[c] = qtp[rr, c] - dqt
            # centered bed-slope source over the in-cell bottom variation
            src[r, c - 1] = -g * 0.5 * (hh + hl) * (b_hi[c] - b_lo[c])
        for c in range(C + 1):
            hl_face = h_hi[c]
            hr_face = h_lo[c + 1]
            bstar = b_hi[c]
            if b_lo[c + 1] > bstar:
                bstar = b_lo[c + 1]
            hl = w_hi[c] - bstar
            if hl < 0.0:
                hl = 0.0
            hr = w_lo[c + 1] - bstar
            if hr < 0.0:
                hr = 0.0
            ul = _velocity(hl_face, qn_hi[c], h_dry)
            vl = _velocity(hl_face, qt_hi[c], h_dry)
            ur = _velocity(hr_face, qn_lo[c + 1], h_dry)
            vr = _velocity(hr_face, qt_lo[c + 1], h_dry)
            cl = np.sqrt(g * hl)
            cr = np.sqrt(g * hr)
            ap = ul + cl
            if ur + cr > ap:
                ap = ur + cr
            if ap < 0.0:
                ap = 0.0
            am = ul - cl
            if ur - cr < am:
                am = ur - cr
            if am > 0.0:
                am = 0.0
            spread = ap - am
            if spread > 1e-12:
                hul = hl * ul
                hur = hr * ur
                hvl = hl * vl
                hvr = hr * vr
                inv = 1.0 / spread
                dterm = ap * am * inv
                f0 = (ap * hul - am * hur) * inv + dterm * (hr - hl)
                f1 = (ap * (hul * ul + 0.5 * g * hl * hl) - am * (hur * ur + 0.5 * g * hr * hr)) * inv + dterm * (
                    hur - hul
                )
                f2 = (ap * hul * vl - am * hur * vr) * inv + dterm * (hvr - hvl)
            else:
                f0 = 0.0
                f1 = 0.0
                f2 = 0.0
            if c == 0:
                if bc == BC_REFLECTIVE:
                    f0 = 0.0
                elif f0 > 0.0:
                    f0 = 0.0
            elif c == C:
                if bc == BC_REFLECTIVE:
                    f0 = 0.0
                elif f0 < 0.0:
                    f0 = 0.0
            fh[r, c] = f0
            fn[r, c] = f1
            ft[r, c] = f2
            # interface pressure corrections from the depth re-referencing
            if c >= 1:
                src[r, c - 1] -= 0.5 * g * (hl_face * hl_face - hl * hl)
            if c <= C - 1:
                src[r, c] += 0.5 * g * (hr_face * hr_face - hr * hr)


@njit(cache=True, nogil=True, inline="always")
def _donor_scaled(f, theta_lo, theta_hi):
    """Mass flux scaled by the limiter factor of its donor cell."""
    if f > 0.0:
        return f * theta_lo
    if f < 0.0:
        return f * theta_hi
    return 0.0


@njit(cache=True, nogil=True, fastmath=_FM)
def _euler_stage(hp, hup, hvp, hpt, hvpt, hupt, bedp, bedpt, rate, g, dt, d, bc, h_dry, vel_cap, out_h, out_hu, out_hv):
    """One forward-Euler stage from padded inputs; returns boundary outflow (m3)."""
    ny = hp.shape[0] - 2
    nx = hp.shape[1] - 2
    dtd = dt / d

    fxh = np.empty((ny, nx + 1))
    fxn = np.empty((ny, nx + 1))
    fxt = np.empty((ny, nx + 1))
    srcx = np.empty((ny, nx))
    _sweep(hp, hup, hvp, bedp, g, h_dry, bc, fxh, fxn, fxt, srcx)

    # y-direction: rows of the transposed arrays, normal momentum is hv
    fyh = np.empty((nx, ny + 1))
    fyn = np.empty((nx, ny + 1))
    fyt = np.empty((nx, ny + 1))
    srcy = np.empty((nx, ny))
    _sweep(hpt, hvpt, hupt, bedpt, g, h_dry, bc, fyh, fyn, fyt, srcy)

    # donor-cell positivity factors from the raw mass fluxes
    theta = np.ones((ny, nx))
    for j in range(ny):
        for i in range(nx):
            out = 0.0
            f = fxh[j, i + 1]
            if f > 0.0:
                out += f
            f = fxh[j, i]
            if f < 0.0:
                out -= f
            f = fyh[i, j + 1]
            if f > 0.0:
                out += f
            f = fyh[i, j]
            if f < 0.0:
                out -= f
            out *= dtd
            hij = hp[j + 1, i + 1]
            if out > hij:
                theta[j, i] = hij / out

    invd = 1.0 / d
    for j in range(ny):
        for i in range(nx):
            th = theta[j, i]
            fw = _donor_scaled(fxh[j, i], theta[j, i - 1] if i >= 1 else 1.0, th)
            fe = _donor_scaled(fxh[j, i + 1], th, theta[j, i + 1] if i <= nx - 2 else 1.0)
            fs = _donor_scaled(fyh[i, j], theta[j - 1, i] if j >= 1 else 1.0, th)
            fn_ = _donor_scaled(fyh[i, j + 1], th, theta[j + 1, i] if j <= ny - 2 else 1.0)
            h_new = hp[j + 1, i + 1] - dtd * (fe - fw + fn_ - fs) + dt * rate[j, i]
            if h_new < 0.0:
                h_new = 0.0
            hu_new = (
                hup[j + 1, i + 1]
                - dtd * (fxn[j, i + 1] - fxn[j, i] + fyt[i, j + 1] - fyt[i, j])
                + dt * srcx[j, i] * invd
            )
            hv_new = (
                hvp[j + 1, i + 1]
                - dtd * (fxt[j, i + 1] - fxt[j, i] + fyn[i, j + 1] - fyn[i, j])
                + dt * srcy[i, j] * invd
            )
            if h_new < h_dry:
                hu_new = 0.0
                hv_new = 0.0
            else:
                if h_new < H_REG:
                    # shed the excess momentum a barely-wet cell cannot carry
                    hu_new = h_new * _velocity(h_new, hu_new, h_dry)
                    hv_new = h_new * _velocity(h_new, hv_new, h_dry)
                speed = np.sqrt(hu_new * hu_new + hv_new * hv_new) / h_new
                if speed > vel_cap:
                    scale = vel_cap / speed
                    hu_new *= scale
                    hv_new *= scale
            out_h[j, i] = h_new
            out_hu[j, i] = hu_new
            out_hv[j, i] = hv_new

    outflow = 0.0
    for j in range(ny):
        outflow += _donor_scaled(fxh[j, nx], theta[j, nx - 1], 1.0)
        outflow -= _donor_scaled(fxh[j, 0], 1.0, theta[j, 0])
    for i in range(nx):
        outflow += _donor_scaled(fyh[i, ny], theta[ny - 1, i], 1.0)
        outflow -= _donor_scaled(fyh[i, 0], 1.0, theta[0, i])
    return outflow * dt * d


@njit(cache=True, nogil=True)
def _transpose_into(a, out):
    R, C = a.shape
    for r in range(R):
        for c in range(C):
            out[c, r] = a[r, c]


@njit(cache=True, nogil=True, fastmath=_FM)
def rk2_step(
    h,
    hu,
    hv,
    bedp,
    bedpt,
    rate,
    g,
    dt,
    d,
    bc,
    h_dry,
    vel_cap,
    manning_n,
    hp,
    hup,
    hvp,
    hpt,
    hupt,
    hvpt,
    h1,
    hu1,
    hv1,
    h2,
    hu2,
    hv2,
    ht,
    hut,
    hvt,
    max_depth,
):
    """One SSP-RK2 step, in place on (h, hu, hv); returns boundary outflow.

    Applies semi-implicit Manning drag when manning_n > 0 and folds the new
    depths into the running max_depth field.
    """
    ny, nx = h.shape
    fill_ghosts(h, hu, hv, bc, hp, hup, hvp)
    _transpose_into(h, ht)
    _transpose_into(hu, hut)
    _transpose_into(hv, hvt)
    fill_ghosts(ht, hvt, hut, bc, hpt, hvpt, hupt)
    out1 = _euler_stage(
        hp, hup, hvp, hpt, hvpt, hupt, bedp, bedpt, rate, g, dt, d, bc, h_dry, vel_cap, h1, hu1, hv1
    )

    fill_ghosts(h1, hu1, hv1, bc, hp, hup, hvp)
    _transpose_into(h1, ht)
    _transpose_into(hu1, hut)
    _transpose_into(hv1, hvt)
    fill_ghosts(ht, hvt, hut, bc, hpt, hvpt, hupt)
    out2 = _euler_stage(
        hp, hup, hvp, hpt, hvpt, hupt, bedp, bedpt, rate, g, dt, d, bc, h_dry, vel_cap, h2, hu2, hv2
    )

    gn2 = g * manning_n * manning_n
    for j in range(ny):
        for i in range(nx):
            h_new = 0.5 * (h[j, i] + h2[j, i])
            hu_new = 0.5 * (hu[j, i] + hu2[j, i])
            hv_new = 0.5 * (hv[j, i] + hv2[j, i])
            if h_new < h_dry:
                hu_new = 0.0
                hv_new = 0.0
            else:
                if h_new < H_REG:
                    hu_new = h_new * _velocity(h_new, hu_new, h_dry)
                    hv_new = h_new * _velocity(h_new, hv_new, h_dry)
                speed = np.sqrt(hu_new * hu_new + hv_new * hv_new) / h_new
                if speed > vel_cap:
                    scale = vel_cap / speed
                    hu_new *= scale
                    hv_new *= scale
                if gn2 > 0.0:
                    u = hu_new / h_new
                    v = hv_new / h_new
                    sp = np.sqrt(u * u + v * v)
                    if sp > 0.0:
                        den = 1.0 + dt * gn2 * sp / h_new ** (4.0 / 3.0)
                        hu_new /= den
                        hv_new /= den
            h[j, i] = h_new
            hu[j, i] = hu_new
            hv[j, i] = hv_new
            if h_new > max_depth[j, i]:
                max_depth[j, i] = h_new
    return 0.5 * (out1 + out2)


@njit(cache=True, nogil=True, fastmath=_FM)
def cfl_time_step(h, hu, hv, g, d, h_dry, cfl):
    """CFL-limited dt over wet cells; a huge value when nothing is wet."""
    tmin = 1e30
    ny, nx = h.shape
    for j in range(ny):
        for i in range(nx):
            hij = h[j, i]
            if hij > h_dry:
                u = _velocity(hij, hu[j, i], h_dry)
                v = _velocity(hij, hv[j, i], h_dry)
                s = np.sqrt(u * u + v * v) + np.sqrt(g * hij)
                if s > 1e-12:
                    t = d / s
                    if t < tmin:
                        tmin = t
    return cfl * tmin
