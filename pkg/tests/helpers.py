"""Independent oracles used across the test modules.

Everything here deliberately avoids the spectral code paths under test:
curve geometry is differentiated by finite differences of the Cartesian
parametrisation, sphere operators act on the homogeneous extension through
finite-difference stencils, and areas come from Monte Carlo sampling.
"""

import numpy as np

TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------------------
# planar curve oracles


def fd_curvature(curve, samples=8192):
    """Curvature of the Cartesian parametrisation by 4th-order differences."""
    theta = TWO_PI * np.arange(samples) / samples
    pts = curve.points(theta)
    h = TWO_PI / samples

    def d1(a):
        return (-np.roll(a, -2) + 8 * np.roll(a, -1) - 8 * np.roll(a, 1) + np.roll(a, 2)) / (12 * h)

    def d2(a):
        return (
            -np.roll(a, -2) + 16 * np.roll(a, -1) - 30 * a + 16 * np.roll(a, 1) - np.roll(a, 2)
        ) / (12 * h * h)

    xp, yp = d1(pts[:, 0]), d1(pts[:, 1])
    xpp, ypp = d2(pts[:, 0]), d2(pts[:, 1])
    return theta, (xp * ypp - yp * xpp) / (xp * xp + yp * yp) ** 1.5


def arclength_energy(curve, wp, samples=8192):
    """Boundary integral of curvature times f(|x|) from the FD parametrisation."""
    theta, kappa = fd_curvature(curve, samples)
    pts = curve.points(theta)
    h = TWO_PI / samples

    def d1(a):
        return (-np.roll(a, -2) + 8 * np.roll(a, -1) - 8 * np.roll(a, 1) + np.roll(a, 2)) / (12 * h)

    speed = np.hypot(d1(pts[:, 0]), d1(pts[:, 1]))
    radii = np.hypot(pts[:, 0], pts[:, 1])
    return float(np.mean(kappa * wp.f(radii) * speed) * TWO_PI)


def arclength_integral(curve, integrand, samples=8192):
    """Boundary integral of ``integrand(theta)`` against the FD arc element."""
    theta = TWO_PI * np.arange(samples) / samples
    pts = curve.points(theta)
    h = TWO_PI / samples

    def d1(a):
        return (-np.roll(a, -2) + 8 * np.roll(a, -1) - 8 * np.roll(a, 1) + np.roll(a, 2)) / (12 * h)

    speed = np.hypot(d1(pts[:, 0]), d1(pts[:, 1]))
    return float(np.mean(integrand(theta) * speed) * TWO_PI)


def outward_normals(curve, theta):
    """Unit outward normals from FD tangents of the Cartesian parametrisation."""
    eps = 1e-6
    p_plus = curve.points(theta + eps)
    p_minus = curve.points(theta - eps)
    tang = (p_plus - p_minus) / (2 * eps)
    nrm = np.column_stack([tang[:, 1], -tang[:, 0]])
    return nrm / np.linalg.norm(nrm, axis=1)[:, None]


def montecarlo_weighted_area(curve, wp, rng, samples=400_000):
    """Monte Carlo estimate of the weighted area with its standard error."""
    box = curve.max_radius * 1.01
    pts = rng.uniform(-box, box, size=(samples, 2))
    radii = np.hypot(pts[:, 0], pts[:, 1])
    angles = np.arctan2(pts[:, 1], pts[:, 0])
    inside = radii <= curve.rho_at(angles)
    vals = np.where(inside, wp.w(np.maximum(radii, 1e-12)), 0.0)
    area_box = (2 * box) ** 2
    mean = np.mean(vals)
    std_err = np.std(vals) / np.sqrt(samples)
    return float(mean * area_box), float(std_err * area_box)


def support_distance(c1, c2, samples=8192):
    """Sup-distance of support functions; equals the Hausdorff distance for convex bodies."""
    phi = TWO_PI * np.arange(samples) / samples
    dirs = np.column_stack([np.cos(phi), np.sin(phi)])
    p1 = c1.points()
    p2 = c2.points()
    h1 = np.max(p1 @ dirs.T, axis=0)
    h2 = np.max(p2 @ dirs.T, axis=0)
    return float(np.max(np.abs(h1 - h2)))


# ---------------------------------------------------------------------------
# sphere oracles: finite differences on the 0-homogeneous extension


def _extension(field_eval, x):
    nrm = np.linalg.norm(x, axis=-1, keepdims=True)
    return field_eval(x / nrm)


def fd_gradient(field_eval, x, step=1e-5):
    """4th-order FD gradient of the homogeneous extension, tangential by construction."""
    x = np.asarray(x, dtype=float)
    n = x.size
    g = np.zeros(n)
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        vals = [
            _extension(field_eval, x + s * step * e) for s in (-2.0, -1.0, 1.0, 2.0)
        ]
        g[i] = (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * step)
    return g


def fd_laplacian(field_eval, x, step=2e-3):
    """4th-order FD ambient Laplacian of the extension = spherical Laplacian."""
    x = np.asarray(x, dtype=float)
    n = x.size
    total = 0.0
    f0 = _extension(field_eval, x)
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        fm2 = _extension(field_eval, x - 2 * step * e)
        fm1 = _extension(field_eval, x - step * e)
        fp1 = _extension(field_eval, x + step * e)
        fp2 = _extension(field_eval, x + 2 * step * e)
        total += (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * step * step)
    return total


def fd_hessian_form(field_eval, x, step=1e-4):
    """(1/2) <grad |grad u|^2, grad u> via nested FD gradients."""

    def sq_grad(y):
        g = fd_gradient(field_eval, y)
        return float(np.dot(g, g))

    x = np.asarray(x, dtype=float)
    n = x.size
    gs = np.zeros(n)
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        vals = [sq_grad((x + s * step * e) / np.linalg.norm(x + s * step * e)) for s in (-2.0, -1.0, 1.0, 2.0)]
        gs[i] = (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * step)
    g = fd_gradient(field_eval, x)
    # Project out the radial part the nesting may have introduced.
    gs -= np.dot(gs, x) * x
    return 0.5 * float(np.dot(gs, g))


def monomial_sphere_moment(n, exponents):
    """Closed-form integral of a monomial with even exponents over S^(n-1)."""
    from math import gamma

    a = [e // 2 for e in exponents]
    if any(e % 2 for e in exponents):
        return 0.0
    num = 2.0
    for ai in a:
        num *= gamma(ai + 0.5)
    return num / gamma(sum(a) + n / 2.0)
