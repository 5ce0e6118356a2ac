"""Triangulated-surface oracle for radial graphs in R^3.

Builds an icosphere whose vertices are pushed onto the boundary surface
along their rays, then estimates mean curvature with the cotangent Laplace
operator.  This is a completely independent, discrete route to the
quantities the spectral code computes, converging under refinement.
"""

import numpy as np
from scipy.sparse import coo_matrix

PHI = (1.0 + np.sqrt(5.0)) / 2.0

_ICO_VERTS = np.array(
    [
        (-1, PHI, 0), (1, PHI, 0), (-1, -PHI, 0), (1, -PHI, 0),
        (0, -1, PHI), (0, 1, PHI), (0, -1, -PHI), (0, 1, -PHI),
        (PHI, 0, -1), (PHI, 0, 1), (-PHI, 0, -1), (-PHI, 0, 1),
    ],
    dtype=float,
)

_ICO_FACES = np.array(
    [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
)


def icosphere(level):
    """Subdivided icosahedron directions (unit vectors) and faces."""
    verts = _ICO_VERTS / np.linalg.norm(_ICO_VERTS, axis=1)[:, None]
    faces = _ICO_FACES.copy()
    for _ in range(level):
        edge_mid = {}
        verts_list = list(verts)

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in edge_mid:
                m = verts_list[i] + verts_list[j]
                m /= np.linalg.norm(m)
                edge_mid[key] = len(verts_list)
                verts_list.append(m)
            return edge_mid[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces.extend([(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)])
        verts = np.array(verts_list)
        faces = np.array(new_faces)
    return verts, faces


def _cotangent_matrix(verts, faces):
    n = verts.shape[0]
    rows, cols, vals = [], [], []
    for k in range(3):
        i = faces[:, k]
        j = faces[:, (k + 1) % 3]
        o = faces[:, (k + 2) % 3]
        u = verts[i] - verts[o]
        v = verts[j] - verts[o]
        cross = np.cross(u, v)
        cot = np.einsum("fi,fi->f", u, v) / np.linalg.norm(cross, axis=1)
        half = 0.5 * cot
        rows.extend([i, j])
        cols.extend([j, i])
        vals.extend([half, half])
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    W = coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    diag = np.asarray(W.sum(axis=1)).ravel()
    return W, diag


def _vertex_areas(verts, faces):
    """Voronoi vertex areas (all icosphere triangles are acute)."""
    areas = np.zeros(verts.shape[0])
    for k in range(3):
        i = faces[:, k]
        j = faces[:, (k + 1) % 3]
        o = faces[:, (k + 2) % 3]
        u = verts[i] - verts[o]
        v = verts[j] - verts[o]
        cot = np.einsum("fi,fi->f", u, v) / np.linalg.norm(np.cross(u, v), axis=1)
        quarter = 0.125 * np.einsum("fi,fi->f", verts[i] - verts[j], verts[i] - verts[j]) * cot
        np.add.at(areas, i, quarter)
        np.add.at(areas, j, quarter)
    return areas


def mesh_mean_curvature(radius_fn, level):
    """Vertex mean curvatures (sum of principal curvatures) on the mesh.

    Returns the unit directions, the surface vertices, the discrete mean
    curvature magnitudes, and the vertex areas.
    """
    dirs, faces = icosphere(level)
    h = radius_fn(dirs)
    verts = dirs * h[:, None]
    W, diag = _cotangent_matrix(verts, faces)
    lap = diag[:, None] * verts - W @ verts
    areas = _vertex_areas(verts, faces)
    # The half-cotangent weights make lap/area the full curvature normal
    # (sum of principal curvatures) pointing outward on convex patches.
    curvature_vec = lap / areas[:, None]
    return dirs, verts, np.linalg.norm(curvature_vec, axis=1), areas


def mesh_energy(radius_fn, weight_fn, level):
    """Integral of mean curvature times ``weight_fn(|x|)`` over the mesh.

    Uses a Galerkin pairing of the (unnormalised) cotangent Laplacian of the
    positions against exact vertex normals, which avoids the noisy division
    by vertex areas.
    """
    dirs, faces = icosphere(level)
    h = radius_fn(dirs)
    verts = dirs * h[:, None]
    W, diag = _cotangent_matrix(verts, faces)
    lap = diag[:, None] * verts - W @ verts
    normals = _exact_normals(radius_fn, dirs, h)
    weights = weight_fn(np.linalg.norm(verts, axis=1))
    return float(np.sum(weights * np.einsum("vi,vi->v", lap, normals)))


def _exact_normals(radius_fn, dirs, h, step=1e-6):
    grads = np.zeros_like(dirs)
    for i in range(3):
        e = np.zeros(3)
        e[i] = 1.0
        xp = dirs + step * e
        xm = dirs - step * e
        xp /= np.linalg.norm(xp, axis=1)[:, None]
        xm /= np.linalg.norm(xm, axis=1)[:, None]
        grads[:, i] = (radius_fn(xp) - radius_fn(xm)) / (2 * step)
    grads -= np.einsum("vi,vi->v", grads, dirs)[:, None] * dirs
    raw = dirs * h[:, None] - grads
    return raw / np.linalg.norm(raw, axis=1)[:, None]
