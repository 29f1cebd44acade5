"""Hot scalar kernels: counter-based RNG, trajectory loops, block drivers.

Every function here is compiled with numba's @njit unless the environment
variable KDMC2D_DISABLE_NUMBA is set (any non-empty value), in which case the
identical Python source runs uncompiled. The fallback is orders of magnitude
slower but produces the same deviate streams, so it is useful for debugging
and as a cross-check (see benchmarks/bench_kernels.py).

RNG state crossing the numba boundary must be re-wrapped with np.uint64 by the
caller; numba unboxes uint64 returns to Python ints.
"""

import math
import os

import numpy as np

NUMBA_ENABLED = not os.environ.get("KDMC2D_DISABLE_NUMBA")

if NUMBA_ENABLED:
    import numba

    def jit(func):
        return numba.njit(func, cache=True, nogil=True)
else:
    # Wrapping uint64 arithmetic is intentional; silence scalar overflow
    # warnings for the interpreted path.
    np.seterr(over="ignore")

    def jit(func):
        return func


U64 = np.uint64
_GOLDEN = U64(0x9E3779B97F4A7C15)
_MIX_A = U64(0xBF58476D1CE4E5B9)
_MIX_B = U64(0x94D049BB133111EB)
_S30 = U64(30)
_S27 = U64(27)
_S31 = U64(31)
_S11 = U64(11)
_ONE = U64(1)
_INV53 = 1.0 / 9007199254740992.0  # 2^-53
_FORK = U64(0xD1B54A32D192ED03)


# ---------------------------------------------------------------------------
# splitmix64-style counter-based RNG
# ---------------------------------------------------------------------------

@jit
def mix64(z):
    z = (z ^ (z >> _S30)) * _MIX_A
    z = (z ^ (z >> _S27)) * _MIX_B
    return z ^ (z >> _S31)


@jit
def stream_init(seed, idx):
    """Derive the stream state for particle `idx` of run `seed`, O(1)."""
    return mix64(U64(seed) * _GOLDEN + _ONE) ^ mix64(U64(idx) + _GOLDEN)


@jit
def next_uniform(s):
    """Advance the stream; uniform on (0, 1] so -log(u) is always finite."""
    s = s + _GOLDEN
    x = mix64(s)
    return s, float((x >> _S11) + _ONE) * _INV53


@jit
def next_normal_pair(s):
    """Two independent standard normals via the Marsaglia polar method
    (rejection sampling; consumes a variable, stream-determined number of
    uniforms)."""
    while True:
        s, u1 = next_uniform(s)
        s, u2 = next_uniform(s)
        zx = 2.0 * u1 - 1.0
        zy = 2.0 * u2 - 1.0
        r2 = zx * zx + zy * zy
        if 0.0 < r2 < 1.0:
            f = math.sqrt(-2.0 * math.log(r2) / r2)
            return s, zx * f, zy * f


@jit
def fill_uniform(seed, idx, out):
    s = stream_init(seed, idx)
    for i in range(out.size):
        s, out[i] = next_uniform(s)


@jit
def fill_normal(seed, idx, out):
    s = stream_init(seed, idx)
    n = out.size
    i = 0
    while i + 1 < n:
        s, z1, z2 = next_normal_pair(s)
        out[i] = z1
        out[i + 1] = z2
        i += 2
    if i < n:
        s, z1, z2 = next_normal_pair(s)
        out[i] = z1


# ---------------------------------------------------------------------------
# Background lookup (piecewise-constant rectilinear grid, 1x1 == homogeneous)
# ---------------------------------------------------------------------------

@jit
def bg_index(n, length, coord):
    """Nearest-cell index along one axis; exact cell boundaries resolve to
    the lower-index cell, out-of-range coordinates clamp."""
    t = n * coord / length
    i = int(math.floor(t))
    if i > 0 and t == i:
        i -= 1
    if i < 0:
        i = 0
    elif i > n - 1:
        i = n - 1
    return i


@jit
def bg_cell(nxb, nyb, lx, ly, x, y):
    return bg_index(nxb, lx, x), bg_index(nyb, ly, y)


# ---------------------------------------------------------------------------
# Ballistic flight with exact segment-boundary clipping
# ---------------------------------------------------------------------------

@jit
def flight(x, y, vx, vy, dtau, lx, ly):
    """Fly (x, y) with velocity (vx, vy) for dtau; absorb at the first
    boundary crossing. Corner ties resolve to the x-face (same point).

    Returns (end_x, end_y, absorbed).
    """
    if vx > 0.0:
        tx = (lx - x) / vx
    elif vx < 0.0:
        tx = -x / vx
    else:
        tx = math.inf
    if vy > 0.0:
        ty = (ly - y) / vy
    elif vy < 0.0:
        ty = -y / vy
    else:
        ty = math.inf
    if tx <= ty:
        tmin = tx
    else:
        tmin = ty
    if tmin <= dtau:
        ex = x + tmin * vx
        ey = y + tmin * vy
        # snap to the crossed face against roundoff
        if tx <= ty:
            ex = lx if vx > 0.0 else 0.0
        else:
            ey = ly if vy > 0.0 else 0.0
        return ex, ey, True
    return x + dtau * vx, y + dtau * vy, False


# ---------------------------------------------------------------------------
# Diffusive-increment moments, factored form Sigma = a*I + b*w(x)w
# ---------------------------------------------------------------------------

@jit
def moments(vnx, vny, temp, ux, uy, rate, theta):
    """Mean and factored covariance of the diffusive increment.

    Returns (mu_x, mu_y, a, b, w_x, w_y) with a the isotropic coefficient
    (m^2) and b the dimensionless rank-one coefficient. theta == 0 gives the
    all-zero moments. rate must be > 0.
    """
    if theta == 0.0:
        return 0.0, 0.0, 0.0, 0.0, 0.0, 0.0
    x = theta * rate
    wx = (vnx - ux) / rate
    wy = (vny - uy) / rate
    g = -math.expm1(-x)  # 1 - e^{-x}, accurate for small x
    e = 1.0 - g
    mux = ux * theta + wx * g
    muy = uy * theta + wy * g
    if x < 1.0e-3:
        # the closed forms cancel O(1) terms; leading series are exact to
        # ~6e-7 relative at x = 1e-3
        x3 = x * x * x
        bracket_a = x3 * (1.0 / 6.0) - x3 * x * (1.0 / 12.0)
        b = x3 * (1.0 / 3.0) - x3 * x * (1.0 / 3.0)
    else:
        bracket_a = 2.0 * e + x * (1.0 + e) - 2.0
        b = 1.0 - 2.0 * x * e - e * e
        if bracket_a < 0.0:
            if bracket_a > -1.0e-14 * (2.0 * e + x * (1.0 + e) + 2.0):
                bracket_a = 0.0
            else:
                raise ArithmeticError(
                    "diffusive moments: negative isotropic bracket beyond "
                    "roundoff tolerance")
        if b < 0.0:
            if b > -1.0e-14 * (1.0 + 2.0 * x * e + e * e):
                b = 0.0
            else:
                raise ArithmeticError(
                    "diffusive moments: negative rank-one bracket beyond "
                    "roundoff tolerance")
    a = (2.0 * temp / (rate * rate)) * bracket_a
    return mux, muy, a, b, wx, wy


@jit
def sample_increment(s, mux, muy, a, b, wx, wy):
    """Draw from N(mu, a*I + b*w(x)w) without materializing the matrix."""
    sa = math.sqrt(a)
    sb = math.sqrt(b)
    s, z1, z2 = next_normal_pair(s)
    s, eta, _ = next_normal_pair(s)
    return s, mux + sa * z1 + sb * eta * wx, muy + sa * z2 + sb * eta * wy


@jit
def sample_increments(seed, idx, mux, muy, a, b, wx, wy, out):
    """Fill out (n, 2) with diffusive increments from one stream."""
    s = stream_init(seed, idx)
    for i in range(out.shape[0]):
        s, dx, dy = sample_increment(s, mux, muy, a, b, wx, wy)
        out[i, 0] = dx
        out[i, 1] = dy


# ---------------------------------------------------------------------------
# Single-trajectory integrators
# ---------------------------------------------------------------------------
# Outcome encoding: (state, fx, fy, absorbed, n_collisions, n_steps)

@jit
def sim_kinetic_one(s, px, py, vx, vy, rates, temps, uxs, uys, lx, ly, t_end):
    nxb, nyb = rates.shape
    t = 0.0
    ncoll = 0
    nsteps = 0
    while True:
        i, j = bg_cell(nxb, nyb, lx, ly, px, py)
        rate = rates[i, j]
        s, u = next_uniform(s)
        if rate > 0.0:
            tau = -math.log(u) / rate
        else:
            tau = math.inf
        if t + tau > t_end:
            px, py, absorbed = flight(px, py, vx, vy, t_end - t, lx, ly)
            nsteps += 1
            return s, px, py, absorbed, ncoll, nsteps
        px, py, absorbed = flight(px, py, vx, vy, tau, lx, ly)
        nsteps += 1
        if absorbed:
            return s, px, py, True, ncoll, nsteps
        st = math.sqrt(temps[i, j])
        s, z1, z2 = next_normal_pair(s)
        vx = uxs[i, j] + st * z1
        vy = uys[i, j] + st * z2
        ncoll += 1
        t += tau
        if t >= t_end:
            return s, px, py, False, ncoll, nsteps


@jit
def sim_kdmc_one(s, px, py, vx, vy, rates, temps, uxs, uys, lx, ly,
                 dt, t_end):
    nxb, nyb = rates.shape
    homogeneous = nxb == 1 and nyb == 1
    t = 0.0
    ncoll = 0
    nsteps = 0
    # Diffusive increments are drawn from a sub-stream forked off the
    # incoming state. The main stream then supplies exactly the same draws,
    # in the same order, as the kinetic integrator (one flight-time uniform
    # and one resample pair per collision), so kinetic and KDMC runs with a
    # common seed stay pathwise coupled — convergence studies measure the
    # scheme's bias rather than independent sampling noise.
    s2 = mix64(s ^ _FORK)
    # The increment consumes three normals but they arrive in pairs; carry
    # the spare across steps instead of discarding it.
    spare = 0.0
    have_spare = False
    while True:
        i, j = bg_cell(nxb, nyb, lx, ly, px, py)
        rate = rates[i, j]
        temp = temps[i, j]
        bux = uxs[i, j]
        buy = uys[i, j]
        s, u = next_uniform(s)
        if rate > 0.0:
            tau = -math.log(u) / rate
        else:
            tau = math.inf
        if t + tau >= t_end:
            # final step degenerates to a truncated kinetic flight
            px, py, absorbed = flight(px, py, vx, vy, t_end - t, lx, ly)
            nsteps += 1
            return s, px, py, absorbed, ncoll, nsteps
        px, py, absorbed = flight(px, py, vx, vy, tau, lx, ly)
        if absorbed:
            nsteps += 1
            return s, px, py, True, ncoll, nsteps
        st = math.sqrt(temp)
        s, z1, z2 = next_normal_pair(s)
        vnx = bux + st * z1
        vny = buy + st * z2
        ncoll += 1
        theta = dt - tau % dt
        rem = t_end - t - tau
        if theta > rem:
            theta = rem
        if homogeneous:
            drate = rate
            dtemp = temp
            dux = bux
            duy = buy
        else:
            # fields for the diffusive sub-step: estimated endpoint from the
            # mean displacement with fields frozen at the step start, then a
            # lookup at the midpoint of the diffusive leg
            mex, mey, _, _, _, _ = moments(vnx, vny, temp, bux, buy, rate,
                                           theta)
            mi, mj = bg_cell(nxb, nyb, lx, ly, px + 0.5 * mex,
                             py + 0.5 * mey)
            drate = rates[mi, mj]
            dtemp = temps[mi, mj]
            dux = uxs[mi, mj]
            duy = uys[mi, mj]
        if theta > 0.0:
            if drate > 0.0:
                mux, muy, a, b, wx, wy = moments(vnx, vny, dtemp, dux, duy,
                                                 drate, theta)
                sa = math.sqrt(a)
                sb = math.sqrt(b)
                if have_spare:
                    zx = spare
                    s2, zy, eta = next_normal_pair(s2)
                    have_spare = False
                else:
                    s2, zx, zy = next_normal_pair(s2)
                    s2, eta, spare = next_normal_pair(s2)
                    have_spare = True
                dwx = mux + sa * zx + sb * eta * wx
                dwy = muy + sa * zy + sb * eta * wy
            else:
                # zero collision rate over the diffusive leg: ballistic
                dwx = vnx * theta
                dwy = vny * theta
            ex = px + dwx
            ey = py + dwy
            if ex <= 0.0 or ex >= lx or ey <= 0.0 or ey >= ly:
                # endpoint-only absorption check (knowingly biased)
                nsteps += 1
                return s, ex, ey, True, ncoll, nsteps
            px = ex
            py = ey
        vx = vnx
        vy = vny
        t += tau + theta
        nsteps += 1
        if t >= t_end:
            return s, px, py, False, ncoll, nsteps


# ---------------------------------------------------------------------------
# Block drivers: source sampling + trajectory + histogram deposit
# ---------------------------------------------------------------------------

@jit
def deposit_index(n, length, coord):
    i = int(math.floor(n * coord / length))
    if i > n - 1:
        i = n - 1
    elif i < 0:
        i = 0
    return i


@jit
def run_block(kdmc, seed, i0, n, sx, sy, s_temp, s_ux, s_uy,
              rates, temps, uxs, uys, lx, ly, dt, t_end, counts):
    """Simulate particles [i0, i0+n) and deposit survivors into `counts`.

    Returns (n_absorbed, collision_total, step_total).
    """
    nx, ny = counts.shape
    st = math.sqrt(s_temp)
    nab = 0
    coll_total = 0
    step_total = 0
    for k in range(n):
        s = stream_init(seed, i0 + k)
        s, z1, z2 = next_normal_pair(s)
        vx = s_ux + st * z1
        vy = s_uy + st * z2
        if kdmc:
            s, fx, fy, absorbed, ncoll, nsteps = sim_kdmc_one(
                s, sx, sy, vx, vy, rates, temps, uxs, uys, lx, ly, dt, t_end)
        else:
            s, fx, fy, absorbed, ncoll, nsteps = sim_kinetic_one(
                s, sx, sy, vx, vy, rates, temps, uxs, uys, lx, ly, t_end)
        coll_total += ncoll
        step_total += nsteps
        if absorbed:
            nab += 1
        else:
            counts[deposit_index(nx, lx, fx), deposit_index(ny, ly, fy)] += 1
    return nab, coll_total, step_total
