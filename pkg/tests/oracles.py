"""Independent reference computations shared by several test modules."""

import numpy as np

# unit square, faces bottom, right, top, left (the order mesh_from_polygons assigns)
SQUARE_NORMALS = np.array([[0, -1], [1, 0], [0, 1], [-1, 0]], dtype=float)
SQUARE_FACE_MIDPOINTS = np.array([[0.5, 0], [1, 0.5], [0.5, 1], [0, 0.5]])


def unit_square_k0_operators():
    """Hand-derived k = 0 operators on the unit square, unknowns (v_T, v_F0..v_F3).

    G v = sum_F |F| (v_F - v_T) n_F / |T|;  R v = v_T + G v . (x - x_T);
    S_F v = v_F - v_T - G v . (x_F - x_T).
    Returns G (2, 5) and the list of S_F rows (5,).
    """
    G = np.zeros((2, 5))
    for i in range(4):
        G[:, 1 + i] += SQUARE_NORMALS[i]
        G[:, 0] -= SQUARE_NORMALS[i]
    S = []
    for i in range(4):
        s = -(SQUARE_FACE_MIDPOINTS[i] - 0.5) @ G
        s[0] -= 1.0
        s[1 + i] += 1.0
        S.append(s)
    return G, S


def unit_square_k0_matrix(face_weights=(1.0, 1.0, 1.0, 1.0), cell_factor=1.0):
    """cell_factor * G^T G + sum_F w_F S_F^T S_F (|F| = h_F = |T| = 1)."""
    G, S = unit_square_k0_operators()
    A = cell_factor * G.T @ G
    for w, s in zip(face_weights, S):
        A += w * np.outer(s, s)
    return A


def gauss_square(x0, x1, y0, y1, n=10):
    g, w = np.polynomial.legendre.leggauss(n)
    gx, gy = x0 + (g + 1) * (x1 - x0) / 2, y0 + (g + 1) * (y1 - y0) / 2
    X, Y = np.meshgrid(gx, gy, indexing="ij")
    W = np.outer(w, w) * (x1 - x0) * (y1 - y0) / 4
    return np.column_stack([X.ravel(), Y.ravel()]), W.ravel()
