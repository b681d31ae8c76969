import numpy as np


def angle_deg(u, v):
    """Unsigned angle between two vectors, in degrees."""
    c = abs(np.dot(u, v)) / (np.linalg.norm(u) * np.linalg.norm(v))
    return float(np.degrees(np.arccos(min(c, 1.0))))
