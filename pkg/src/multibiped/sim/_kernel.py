"""Compiled inner loop for the substep integration.

Same math as the numpy path in constraints.py (assembled Schur complement,
Baumgarte bias, semi-implicit Euler, post-projection), specialized to the
standard scene layout: body 0 is the carrier, joint j pins robot body 1+j.
A cross-check test holds the two paths together; the numpy path stays the
reference and the fallback when numba is unavailable.
"""
from __future__ import annotations

import numpy as np

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only when numba is absent
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap(args[0]) if args and callable(args[0]) else wrap


@njit(cache=True)
def _quat_to_matrix_into(q, out):
    w, x, y, z = q[0], q[1], q[2], q[3]
    out[0, 0] = 1 - 2 * (y * y + z * z)
    out[0, 1] = 2 * (x * y - w * z)
    out[0, 2] = 2 * (x * z + w * y)
    out[1, 0] = 2 * (x * y + w * z)
    out[1, 1] = 1 - 2 * (x * x + z * z)
    out[1, 2] = 2 * (y * z - w * x)
    out[2, 0] = 2 * (x * z - w * y)
    out[2, 1] = 2 * (y * z + w * x)
    out[2, 2] = 1 - 2 * (x * x + y * y)


@njit(cache=True)
def _rotate(r_mat, v, out):
    for i in range(3):
        out[i] = r_mat[i, 0] * v[0] + r_mat[i, 1] * v[1] + r_mat[i, 2] * v[2]


@njit(cache=True)
def _cross(a, b, out):
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]


@njit(cache=True)
def _sandwich(r_mat, m_body, out):
    # out = R @ m_body @ R^T
    tmp = np.zeros((3, 3))
    for i in range(3):
        for j in range(3):
            acc = 0.0
            for k in range(3):
                acc += r_mat[i, k] * m_body[k, j]
            tmp[i, j] = acc
    for i in range(3):
        for j in range(3):
            acc = 0.0
            for k in range(3):
                acc += tmp[i, k] * r_mat[j, k]
            out[i, j] = acc


@njit(cache=True)
def _assemble_system(
    pos, quat, vel, omg, invm, inv_inertia, kin, anc_c, anc_r, r_mats, inv_iw, a_mat, ac, ar, cerr, cdot, jdotv
):
    nb = pos.shape[0]
    nj = anc_c.shape[0]
    for b in range(nb):
        _quat_to_matrix_into(quat[b], r_mats[b])
        if kin[b]:
            inv_iw[b, :, :] = 0.0
        else:
            _sandwich(r_mats[b], inv_inertia[b], inv_iw[b])
    tmp = np.zeros(3)
    tmp2 = np.zeros(3)
    tmp3 = np.zeros(3)
    tmp4 = np.zeros(3)
    for j in range(nj):
        _rotate(r_mats[0], anc_c[j], ac[j])
        _rotate(r_mats[1 + j], anc_r[j], ar[j])
        rb = 1 + j
        for k in range(3):
            cerr[j, k] = (pos[rb, k] + ar[j, k]) - (pos[0, k] + ac[j, k])
        _cross(omg[rb], ar[j], tmp)
        _cross(omg[0], ac[j], tmp2)
        for k in range(3):
            cdot[j, k] = vel[rb, k] + tmp[k] - vel[0, k] - tmp2[k]
        _cross(omg[rb], tmp, tmp3)
        _cross(omg[0], tmp2, tmp4)
        for k in range(3):
            jdotv[j, k] = tmp3[k] - tmp4[k]

    # A[j,k] blocks: carrier coupling invm0*I + Sc_j invI0 Sc_k^T everywhere,
    # robot terms on the diagonal
    invm0 = invm[0]
    for j in range(nj):
        sj = np.zeros((3, 3))
        sj[0, 1] = -ac[j, 2]
        sj[0, 2] = ac[j, 1]
        sj[1, 0] = ac[j, 2]
        sj[1, 2] = -ac[j, 0]
        sj[2, 0] = -ac[j, 1]
        sj[2, 1] = ac[j, 0]
        sji = np.zeros((3, 3))
        for a in range(3):
            for b2 in range(3):
                acc = 0.0
                for k in range(3):
                    acc += sj[a, k] * inv_iw[0, k, b2]
                sji[a, b2] = acc
        for k2 in range(nj):
            sk = np.zeros((3, 3))
            sk[0, 1] = -ac[k2, 2]
            sk[0, 2] = ac[k2, 1]
            sk[1, 0] = ac[k2, 2]
            sk[1, 2] = -ac[k2, 0]
            sk[2, 0] = -ac[k2, 1]
            sk[2, 1] = ac[k2, 0]
            for a in range(3):
                for b2 in range(3):
                    acc = 0.0
                    for k in range(3):
                        acc += sji[a, k] * sk[b2, k]  # S_j invI S_k^T
                    if a == b2:
                        acc += invm0
                    a_mat[3 * j + a, 3 * k2 + b2] = acc
        # robot diagonal: invm_r*I + Sr invI_r Sr^T
        rb = 1 + j
        sr = np.zeros((3, 3))
        sr[0, 1] = -ar[j, 2]
        sr[0, 2] = ar[j, 1]
        sr[1, 0] = ar[j, 2]
        sr[1, 2] = -ar[j, 0]
        sr[2, 0] = -ar[j, 1]
        sr[2, 1] = ar[j, 0]
        sri = np.zeros((3, 3))
        for a in range(3):
            for b2 in range(3):
                acc = 0.0
                for k in range(3):
                    acc += sr[a, k] * inv_iw[rb, k, b2]
                sri[a, b2] = acc
        for a in range(3):
            for b2 in range(3):
                acc = 0.0
                for k in range(3):
                    acc += sri[a, k] * sr[b2, k]
                if a == b2:
                    acc += invm[rb]
                a_mat[3 * j + a, 3 * j + b2] += acc


@njit(cache=True)
def _apply_forces(
    invm, inv_iw, ac, ar, lam, f, accel
):
    """accel = M^-1 (f + J^T lam) for the standard layout."""
    nb = invm.shape[0]
    nj = lam.shape[0]
    full = f.copy()
    tmp = np.zeros(3)
    for j in range(nj):
        rb = 1 + j
        for k in range(3):
            full[rb, k] += lam[j, k]
        _cross(ar[j], lam[j], tmp)
        for k in range(3):
            full[rb, 3 + k] += tmp[k]
        for k in range(3):
            full[0, k] -= lam[j, k]
        _cross(ac[j], lam[j], tmp)
        for k in range(3):
            full[0, 3 + k] -= tmp[k]
    for b in range(nb):
        for k in range(3):
            accel[b, k] = full[b, k] * invm[b]
        for i in range(3):
            acc = 0.0
            for k in range(3):
                acc += inv_iw[b, i, k] * full[b, 3 + k]
            accel[b, 3 + i] = acc


@njit(cache=True)
def _slider_wrench(
    slider_state, bounds, mass, friction, restitution, cp_offset, r0, gravity, dt, out
):
    # slider_state: [px, py, vx, vy] in the carrier frame, mutated in place
    g_body = np.zeros(3)
    for i in range(3):
        g_body[i] = -(r0[2, i]) * gravity  # R^T @ (0,0,-g)
    accel = np.zeros(2)
    accel[0] = g_body[0]
    accel[1] = g_body[1]
    vx, vy = slider_state[2], slider_state[3]
    speed = (vx * vx + vy * vy) ** 0.5
    mu_a = friction * gravity
    if speed > 1e-6:
        accel[0] -= mu_a * vx / speed
        accel[1] -= mu_a * vy / speed
    elif (accel[0] ** 2 + accel[1] ** 2) ** 0.5 <= mu_a:
        accel[0] = 0.0
        accel[1] = 0.0
        slider_state[2] = 0.0
        slider_state[3] = 0.0
    vbx, vby = slider_state[2], slider_state[3]
    slider_state[2] += accel[0] * dt
    slider_state[3] += accel[1] * dt
    if speed > 1e-6 and (vbx * slider_state[2] + vby * slider_state[3]) < 0.0:
        slider_state[2] = 0.0
        slider_state[3] = 0.0
        accel[0] = (0.0 - vbx) / dt
        accel[1] = (0.0 - vby) / dt
    slider_state[0] += slider_state[2] * dt
    slider_state[1] += slider_state[3] * dt

    impulse = np.zeros(2)
    for axis in range(2):
        lo = bounds[2 * axis]
        hi = bounds[2 * axis + 1]
        if slider_state[axis] < lo:
            slider_state[axis] = lo
            dv = -(1.0 + restitution) * slider_state[2 + axis]
            slider_state[2 + axis] += dv
            impulse[axis] += mass * dv
        elif slider_state[axis] > hi:
            slider_state[axis] = hi
            dv = -(1.0 + restitution) * slider_state[2 + axis]
            slider_state[2 + axis] += dv
            impulse[axis] += mass * dv

    contact_body = np.zeros(3)
    contact_body[0] = cp_offset[0] + slider_state[0]
    contact_body[1] = cp_offset[1] + slider_state[1]
    contact_body[2] = cp_offset[2]
    contact_world = np.zeros(3)
    _rotate(r0, contact_body, contact_world)

    f_body = np.zeros(3)
    f_body[0] = -mass * (accel[0] - g_body[0]) - impulse[0] / dt
    f_body[1] = -mass * (accel[1] - g_body[1]) - impulse[1] / dt
    f_world = np.zeros(3)
    _rotate(r0, f_body, f_world)
    f_world[2] -= mass * gravity

    torque = np.zeros(3)
    _cross(contact_world, f_world, torque)
    for k in range(3):
        out[k] = f_world[k]
        out[3 + k] = torque[k]


@njit(cache=True)
def run_substeps(
    pos,
    quat,
    vel,
    omg,
    mass,
    invm,
    inertia,
    inv_inertia,
    kin,
    anc_c,
    anc_r,
    const_wrench,
    damping,
    slider_active,
    slider_state,
    slider_bounds,
    slider_mass,
    slider_friction,
    slider_restitution,
    cp_offset,
    gravity,
    n_sub,
    dt,
    alpha,
    beta,
    projection_mode,  # 0 none, 1 last substep, 2 every substep
    lam_out,
):
    """Advance n_sub substeps in place; returns 0 on success, 1 on non-finite."""
    nb = pos.shape[0]
    nj = anc_c.shape[0]
    r_mats = np.zeros((nb, 3, 3))
    inv_iw = np.zeros((nb, 3, 3))
    a_mat = np.zeros((3 * nj, 3 * nj))
    ac = np.zeros((nj, 3))
    ar = np.zeros((nj, 3))
    cerr = np.zeros((nj, 3))
    cdot = np.zeros((nj, 3))
    jdotv = np.zeros((nj, 3))
    wrench = np.zeros((nb, 6))
    accel = np.zeros((nb, 6))
    iw = np.zeros((3, 3))
    tmp = np.zeros(3)
    slider_w = np.zeros(6)

    for sub in range(n_sub):
        _assemble_system(
            pos, quat, vel, omg, invm, inv_inertia, kin, anc_c, anc_r,
            r_mats, inv_iw, a_mat, ac, ar, cerr, cdot, jdotv,
        )

        for b in range(nb):
            for k in range(6):
                wrench[b, k] = const_wrench[b, k]
            # gyroscopic torque -omega x (Iw omega) and angular damping
            _sandwich(r_mats[b], inertia[b], iw)
            for i in range(3):
                tmp[i] = iw[i, 0] * omg[b, 0] + iw[i, 1] * omg[b, 1] + iw[i, 2] * omg[b, 2]
            gx = omg[b, 1] * tmp[2] - omg[b, 2] * tmp[1]
            gy = omg[b, 2] * tmp[0] - omg[b, 0] * tmp[2]
            gz = omg[b, 0] * tmp[1] - omg[b, 1] * tmp[0]
            wrench[b, 3] += -gx - damping[b] * omg[b, 0]
            wrench[b, 4] += -gy - damping[b] * omg[b, 1]
            wrench[b, 5] += -gz - damping[b] * omg[b, 2]
            if kin[b]:
                for k in range(6):
                    wrench[b, k] = 0.0

        if slider_active:
            _slider_wrench(
                slider_state, slider_bounds, slider_mass, slider_friction,
                slider_restitution, cp_offset, r_mats[0], gravity, dt, slider_w,
            )
            for k in range(6):
                wrench[0, k] += slider_w[k]

        # rhs = -(bias + J Minv f)
        rhs = np.zeros(3 * nj)
        minv_f = np.zeros((nb, 6))
        for b in range(nb):
            for k in range(3):
                minv_f[b, k] = wrench[b, k] * invm[b]
            for i in range(3):
                acc = 0.0
                for k in range(3):
                    acc += inv_iw[b, i, k] * wrench[b, 3 + k]
                minv_f[b, 3 + i] = acc
        for j in range(nj):
            rb = 1 + j
            _cross(ar[j], minv_f[rb, 3:], tmp)
            for k in range(3):
                jmf = minv_f[rb, k] - tmp[k]
                rhs[3 * j + k] = jmf
            _cross(ac[j], minv_f[0, 3:], tmp)
            for k in range(3):
                rhs[3 * j + k] += -minv_f[0, k] + tmp[k]
            for k in range(3):
                bias = jdotv[j, k] + alpha * cdot[j, k] + beta * cerr[j, k]
                rhs[3 * j + k] = -(bias + rhs[3 * j + k])

        lam_flat = np.linalg.solve(a_mat, rhs)
        for j in range(nj):
            for k in range(3):
                lam_out[j, k] = lam_flat[3 * j + k]

        _apply_forces(invm, inv_iw, ac, ar, lam_out, wrench, accel)

        # semi-implicit Euler
        for b in range(nb):
            if kin[b]:
                continue
            for k in range(3):
                vel[b, k] += accel[b, k] * dt
                omg[b, k] += accel[b, 3 + k] * dt
                pos[b, k] += vel[b, k] * dt
            w, x, y, z = quat[b, 0], quat[b, 1], quat[b, 2], quat[b, 3]
            ox, oy, oz = omg[b, 0], omg[b, 1], omg[b, 2]
            dw = 0.5 * dt * (-ox * x - oy * y - oz * z)
            dx = 0.5 * dt * (ox * w + oy * z - oz * y)
            dy = 0.5 * dt * (-ox * z + oy * w + oz * x)
            dz = 0.5 * dt * (ox * y - oy * x + oz * w)
            nw, nx, ny, nz = w + dw, x + dx, y + dy, z + dz
            nrm = (nw * nw + nx * nx + ny * ny + nz * nz) ** 0.5
            quat[b, 0] = nw / nrm
            quat[b, 1] = nx / nrm
            quat[b, 2] = ny / nrm
            quat[b, 3] = nz / nrm

        if projection_mode == 2 or (projection_mode == 1 and sub == n_sub - 1):
            _assemble_system(
                pos, quat, vel, omg, invm, inv_inertia, kin, anc_c, anc_r,
                r_mats, inv_iw, a_mat, ac, ar, cerr, cdot, jdotv,
            )
            rhs2 = np.zeros((3 * nj, 2))
            for j in range(nj):
                for k in range(3):
                    rhs2[3 * j + k, 0] = -cerr[j, k]
                    rhs2[3 * j + k, 1] = -cdot[j, k]
            lam2 = np.linalg.solve(a_mat, rhs2)
            dpos = np.zeros((nb, 6))
            dvel = np.zeros((nb, 6))
            _apply_forces(invm, inv_iw, ac, ar, np.ascontiguousarray(lam2[:, 0]).reshape(nj, 3), np.zeros((nb, 6)), dpos)
            _apply_forces(invm, inv_iw, ac, ar, np.ascontiguousarray(lam2[:, 1]).reshape(nj, 3), np.zeros((nb, 6)), dvel)
            for b in range(nb):
                if kin[b]:
                    continue
                for k in range(3):
                    pos[b, k] += dpos[b, k]
                    vel[b, k] += dvel[b, k]
                    omg[b, k] += dvel[b, 3 + k]
                rx, ry, rz = dpos[b, 3], dpos[b, 4], dpos[b, 5]
                w, x, y, z = quat[b, 0], quat[b, 1], quat[b, 2], quat[b, 3]
                dw = 0.5 * (-rx * x - ry * y - rz * z)
                dx = 0.5 * (rx * w + ry * z - rz * y)
                dy = 0.5 * (-rx * z + ry * w + rz * x)
                dz = 0.5 * (rx * y - ry * x + rz * w)
                nw, nx, ny, nz = w + dw, x + dx, y + dy, z + dz
                nrm = (nw * nw + nx * nx + ny * ny + nz * nz) ** 0.5
                quat[b, 0] = nw / nrm
                quat[b, 1] = nx / nrm
                quat[b, 2] = ny / nrm
                quat[b, 3] = nz / nrm

    ok = True
    for b in range(nb):
        for k in range(3):
            if not (np.isfinite(pos[b, k]) and np.isfinite(vel[b, k]) and np.isfinite(omg[b, k])):
                ok = False
    return 0 if ok else 1
